"""Fast Walsh-Hadamard transform in natural (Sylvester) order."""

import numpy as np

from .errors import InvalidArgumentError


def is_power_of_two(n):
    return n >= 1 and (n & (n - 1)) == 0


def next_power_of_two(n):
    """Smallest power of two that is >= n (n >= 1)."""
    if n < 1:
        raise InvalidArgumentError(f"n must be >= 1, got {n}")
    return 1 << (int(n) - 1).bit_length()


def fwht(v):
    """Multiply by the unnormalized Sylvester Hadamard matrix.

    ``H_1 = [1]`` and ``H_2n = [[H_n, H_n], [H_n, -H_n]]``. The transform
    runs along the last axis, so a ``(C, N)`` array is transformed row by
    row. Cost is ``O(N log N)``; the input is not modified.

    Parameters
    ----------
    v : array_like
        Real array whose last axis has power-of-two length ``N``.

    Returns
    -------
    numpy.ndarray
        ``H_N @ v`` along the last axis, as float64.
    """
    a = np.array(v, dtype=np.float64)
    n = a.shape[-1] if a.ndim else 0
    if a.ndim == 0 or not is_power_of_two(n):
        raise InvalidArgumentError(f"length must be a power of two, got {n}")
    lead = a.shape[:-1]
    a = a.reshape(-1, n)
    batch = a.shape[0]
    tmp = np.empty((batch, n // 2))
    h = 1
    while h < n:
        blocks = a.reshape(batch, n // (2 * h), 2, h)
        top = blocks[:, :, 0, :]
        bottom = blocks[:, :, 1, :]
        t = tmp.reshape(batch, n // (2 * h), h)
        np.subtract(top, bottom, out=t)
        top += bottom
        bottom[...] = t
        h *= 2
    return a.reshape(*lead, n)


def fwht_in_place(v):
    """Alias of :func:`fwht` kept for API symmetry; returns a new array."""
    return fwht(v)


def hadamard_entries(rows, cols):
    """Entries ``H[r][c]`` of the Sylvester matrix, as +1/-1 int8.

    Uses ``H[r][c] = (-1) ** popcount(r & c)``, so no transform is involved.
    ``rows`` and ``cols`` broadcast against each other.
    """
    r = np.asarray(rows, dtype=np.uint64)
    c = np.asarray(cols, dtype=np.uint64)
    parity = np.bitwise_count(r & c) & 1
    return (1 - 2 * parity.astype(np.int8)).astype(np.int8)
