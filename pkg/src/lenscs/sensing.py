"""Sensing matrices for the aperture assembly and their implicit application.

Two modes are supported. ``PERMUTED_HADAMARD`` uses selected rows of a
Sylvester Hadamard matrix of order ``N`` (the smallest power of two that
covers the aperture grid) whose columns are shuffled by one shared random
permutation. ``DENSE_RANDOM01`` uses an explicit matrix of i.i.d. uniform
entries in ``[0, 1]`` and is limited to small grids.

Pixel vectors are stored in scan order: aperture element ``(row, col)`` has
linear index ``col * grid_height + row``, i.e. top to bottom within a column
and columns from left to right. :func:`plane_to_scan` and
:func:`scan_to_plane` convert between that layout and ``(height, width)``
arrays.

Random streams come from numpy's PCG64 bit generator
(``numpy.random.default_rng(seed)``), which is platform independent.
"""

import enum
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InvalidArgumentError, ResourceLimitError, UnsupportedModeError
from .hadamard import fwht, hadamard_entries, next_power_of_two

DENSE_PIXEL_CAP = 16384
_DENSE_CHUNK_ROWS = 256


class SensingMode(enum.Enum):
    PERMUTED_HADAMARD = "hadamard"
    DENSE_RANDOM01 = "dense"


@dataclass(frozen=True, eq=False)
class SensingSpec:
    """Reproducible description of a sensing matrix.

    ``permutation_seed=None`` selects the identity column permutation, which
    is convenient for small hand-checked examples.
    """

    grid_width: int
    grid_height: int
    mode: SensingMode
    row_indices: np.ndarray
    permutation_seed: int | None = None
    dense_seed: int = 0
    transform_order: int = field(default=0)

    def __post_init__(self):
        if self.grid_width < 1 or self.grid_height < 1:
            raise InvalidArgumentError(
                f"grid dimensions must be >= 1, got {self.grid_width}x{self.grid_height}"
            )
        n_min = next_power_of_two(self.num_pixels)
        order = self.transform_order or n_min
        if order < n_min or order & (order - 1):
            raise InvalidArgumentError(
                f"transform_order {order} must be a power of two >= {self.num_pixels}"
            )
        object.__setattr__(self, "transform_order", order)
        mode = SensingMode(self.mode)
        object.__setattr__(self, "mode", mode)

        rows = np.array(self.row_indices, dtype=np.int64).ravel()
        if rows.size < 1:
            raise InvalidArgumentError("at least one measurement row is required")
        if rows.min() < 0 or rows.max() >= order:
            raise InvalidArgumentError(f"row indices must lie in [0, {order - 1}]")
        if np.unique(rows).size != rows.size:
            raise InvalidArgumentError("row indices must be distinct")
        rows.setflags(write=False)
        object.__setattr__(self, "row_indices", rows)

    @property
    def num_pixels(self):
        return self.grid_width * self.grid_height

    @property
    def num_measurements(self):
        return int(self.row_indices.size)

    @property
    def has_open_row(self):
        """True when the first selected row is the all-ones row 0."""
        return self.mode is SensingMode.PERMUTED_HADAMARD and self.row_indices[0] == 0

    @cached_property
    def permutation(self):
        """Column permutation ``sigma`` as an int64 array of length N."""
        if self.permutation_seed is None:
            perm = np.arange(self.transform_order, dtype=np.int64)
        else:
            perm = _rng(self.permutation_seed, 0).permutation(self.transform_order)
        perm.setflags(write=False)
        return perm

    def same_matrix_family(self, other):
        """Whether two specs share grid, transform order, mode and permutation."""
        return (
            self.grid_width == other.grid_width
            and self.grid_height == other.grid_height
            and self.transform_order == other.transform_order
            and self.mode is other.mode
            and self.permutation_seed == other.permutation_seed
            and self.dense_seed == other.dense_seed
        )

    def with_rows(self, row_indices):
        return SensingSpec(
            self.grid_width,
            self.grid_height,
            self.mode,
            row_indices,
            permutation_seed=self.permutation_seed,
            dense_seed=self.dense_seed,
            transform_order=self.transform_order,
        )

    def __eq__(self, other):
        if not isinstance(other, SensingSpec):
            return NotImplemented
        return self.same_matrix_family(other) and np.array_equal(
            self.row_indices, other.row_indices
        )

    def __hash__(self):
        return hash((self.grid_width, self.grid_height, self.mode, self.permutation_seed,
                     self.dense_seed, self.row_indices.tobytes()))


def _rng(seed, stream):
    # Independent streams per purpose: 0 = permutation, 1 = row choice, 2 = dense entries.
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, stream])


def make_sensing_spec(grid_width, grid_height, measurement_count, permutation_seed=0,
                      mode=SensingMode.PERMUTED_HADAMARD, dense_seed=None):
    """Build a :class:`SensingSpec` for a ``grid_width x grid_height`` aperture.

    In Hadamard mode row 0 (the fully open pattern) is always selected first,
    followed by ``measurement_count - 1`` rows drawn uniformly without
    replacement from ``1 .. N-1``. In dense mode the spec simply records the
    row count; ``dense_seed`` defaults to ``permutation_seed``.
    """
    mode = SensingMode(mode)
    if grid_width < 1 or grid_height < 1:
        raise InvalidArgumentError(
            f"grid dimensions must be >= 1, got {grid_width}x{grid_height}"
        )
    m = int(measurement_count)
    order = next_power_of_two(grid_width * grid_height)
    if m < 1:
        raise InvalidArgumentError(f"measurement count must be >= 1, got {m}")
    if m > order:
        raise InvalidArgumentError(f"measurement count {m} exceeds transform order {order}")

    if mode is SensingMode.PERMUTED_HADAMARD:
        if permutation_seed is None:
            rest = np.arange(1, m)
        else:
            rest = 1 + _rng(permutation_seed, 1).choice(order - 1, size=m - 1, replace=False)
        rows = np.concatenate([[0], rest])
        return SensingSpec(grid_width, grid_height, mode, rows,
                           permutation_seed=permutation_seed, dense_seed=0)

    seed = permutation_seed if dense_seed is None else dense_seed
    return SensingSpec(grid_width, grid_height, mode, np.arange(m),
                       permutation_seed=None, dense_seed=0 if seed is None else int(seed))


def split_rows(spec, n_views):
    """Partition a Hadamard spec's rows into ``n_views`` disjoint specs.

    Every part keeps row 0 so each view can be converted to the signed
    domain on its own; the remaining rows are dealt out round-robin.
    """
    if not spec.has_open_row:
        raise InvalidArgumentError("split_rows needs a Hadamard spec starting with row 0")
    if n_views < 1:
        raise InvalidArgumentError("n_views must be >= 1")
    rest = spec.row_indices[1:]
    return [spec.with_rows(np.concatenate([[0], rest[i::n_views]])) for i in range(n_views)]


def plane_to_scan(plane):
    """``(H, W[, C])`` array -> scan-order ``(H*W[, C])`` array."""
    plane = np.asarray(plane)
    if plane.ndim == 2:
        return plane.ravel(order="F")
    return plane.transpose(1, 0, 2).reshape(-1, plane.shape[2])


def scan_to_plane(x, grid_width, grid_height):
    """Inverse of :func:`plane_to_scan`."""
    x = np.asarray(x)
    if x.ndim == 1:
        return x.reshape(grid_width, grid_height).T
    return x.reshape(grid_width, grid_height, x.shape[1]).transpose(1, 0, 2)


def _require_hadamard(spec, op):
    if spec.mode is not SensingMode.PERMUTED_HADAMARD:
        raise UnsupportedModeError(f"{op} requires a permuted-Hadamard spec; use dense_* for dense mode")


def _check_pixels(spec, x):
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != spec.num_pixels or x.ndim > 2:
        raise InvalidArgumentError(
            f"expected {spec.num_pixels} scan-order pixels, got shape {x.shape}"
        )
    return x


def signed_rows(spec, ks):
    """Effective +/-1 rows ``H[r_k][sigma(j)]`` for ``j < num_pixels``, shape ``(len(ks), P)``."""
    _require_hadamard(spec, "signed_rows")
    ks = np.atleast_1d(np.asarray(ks, dtype=np.int64))
    if ks.size and (ks.min() < 0 or ks.max() >= spec.num_measurements):
        raise InvalidArgumentError(
            f"row position out of range [0, {spec.num_measurements - 1}]"
        )
    r = spec.row_indices[ks]
    cols = spec.permutation[: spec.num_pixels]
    return hadamard_entries(r[:, None], cols[None, :])


def pattern_for_row(spec, k):
    """Aperture transmittances for the ``k``-th selected row, in scan order.

    Returns a float64 vector of ``num_pixels`` values. In Hadamard mode a
    +1 entry maps to 1 (transparent) and -1 to 0 (opaque); the entries of
    the padded tail beyond ``num_pixels`` are dropped. In dense mode the row
    of the random matrix is returned.
    """
    k = int(k)
    if not 0 <= k < spec.num_measurements:
        raise InvalidArgumentError(f"row position {k} out of range [0, {spec.num_measurements - 1}]")
    if spec.mode is SensingMode.DENSE_RANDOM01:
        return dense_matrix(spec, rows=slice(k, k + 1))[0]
    return patterns_for_rows(spec, [k])[0]


def patterns_for_rows(spec, ks):
    """Binary transmittance patterns for several rows, shape ``(len(ks), P)``."""
    return (signed_rows(spec, ks) > 0).astype(np.float64)


def pattern_plane(spec, k):
    """:func:`pattern_for_row` reshaped to the ``(height, width)`` aperture grid."""
    return scan_to_plane(pattern_for_row(spec, k), spec.grid_width, spec.grid_height)


def _scatter_to_transform(spec, x):
    """Zero-pad pixels to length N and place pixel j at position sigma(j)."""
    n = spec.transform_order
    out = np.zeros(x.shape[1:] + (n,))
    out[..., spec.permutation[: spec.num_pixels]] = x.T if x.ndim == 2 else x
    return out


def forward_apply(spec, x):
    """Signed measurements ``y[k] = sum_j H[r_k][sigma(j)] x[j]``.

    ``x`` is a scan-order vector of ``num_pixels`` values, or a
    ``(num_pixels, C)`` array of channels. The matrix is never formed.
    """
    _require_hadamard(spec, "forward_apply")
    x = _check_pixels(spec, x)
    z = fwht(_scatter_to_transform(spec, x))
    y = z[..., spec.row_indices]
    return y.T if x.ndim == 2 else y


def adjoint_apply(spec, y):
    """Transpose of :func:`forward_apply`; returns scan-order pixels."""
    _require_hadamard(spec, "adjoint_apply")
    y = np.asarray(y, dtype=np.float64)
    if y.shape[0] != spec.num_measurements or y.ndim > 2:
        raise InvalidArgumentError(
            f"expected {spec.num_measurements} measurements, got shape {y.shape}"
        )
    full = np.zeros(y.shape[1:] + (spec.transform_order,))
    full[..., spec.row_indices] = y.T if y.ndim == 2 else y
    z = fwht(full)
    out = z[..., spec.permutation[: spec.num_pixels]]
    return out.T if y.ndim == 2 else out


def binary_to_signed(y_binary, spec):
    """Recover signed Hadamard measurements from 0/1-pattern sensor readings.

    A physical pattern is ``(w + 1) / 2`` for a signed row ``w``, so the
    reading is ``(y_signed + s) / 2`` with ``s`` the total light, which is
    exactly the reading of the fully open row 0. Hence
    ``y_signed = 2 * y_binary - y_binary[0]``.
    """
    _require_hadamard(spec, "binary_to_signed")
    if not spec.has_open_row:
        raise InvalidArgumentError("spec must select row 0 first to convert to the signed domain")
    y = np.asarray(y_binary, dtype=np.float64)
    if y.shape[0] != spec.num_measurements:
        raise InvalidArgumentError(
            f"expected {spec.num_measurements} measurements, got {y.shape[0]}"
        )
    total = y[0]
    out = 2.0 * y - total
    out[0] = total
    return out


def signed_to_binary(y_signed, spec):
    """Inverse of :func:`binary_to_signed`."""
    _require_hadamard(spec, "signed_to_binary")
    if not spec.has_open_row:
        raise InvalidArgumentError("spec must select row 0 first")
    y = np.asarray(y_signed, dtype=np.float64)
    return (y + y[0]) / 2.0


def _check_dense(spec):
    if spec.mode is not SensingMode.DENSE_RANDOM01:
        raise UnsupportedModeError("dense operations require a DenseRandom01 spec")
    if spec.num_pixels > DENSE_PIXEL_CAP:
        raise ResourceLimitError(
            f"dense mode is capped at {DENSE_PIXEL_CAP} pixels, spec has {spec.num_pixels}"
        )


def _dense_chunks(spec):
    rng = _rng(spec.dense_seed, 2)
    m = spec.num_measurements
    for start in range(0, m, _DENSE_CHUNK_ROWS):
        stop = min(m, start + _DENSE_CHUNK_ROWS)
        yield start, stop, rng.random((stop - start, spec.num_pixels))


def dense_matrix(spec, rows=slice(None)):
    """Materialize (rows of) the dense random sensing matrix."""
    _check_dense(spec)
    full = np.vstack([block for _, _, block in _dense_chunks(spec)])
    return full[rows]


def dense_forward_apply(spec, x):
    """``A @ x`` for the dense uniform-[0, 1] matrix, generated in row blocks."""
    _check_dense(spec)
    x = _check_pixels(spec, x)
    y = np.empty((spec.num_measurements,) + x.shape[1:])
    for start, stop, block in _dense_chunks(spec):
        y[start:stop] = block @ x
    return y


def dense_adjoint_apply(spec, y):
    _check_dense(spec)
    y = np.asarray(y, dtype=np.float64)
    if y.shape[0] != spec.num_measurements:
        raise InvalidArgumentError(
            f"expected {spec.num_measurements} measurements, got {y.shape[0]}"
        )
    out = np.zeros((spec.num_pixels,) + y.shape[1:])
    for start, stop, block in _dense_chunks(spec):
        out += block.T @ y[start:stop]
    return out


def signed_operator(spec):
    """``(forward, adjoint, norm_sq)`` for the spec's signed-domain matrix.

    ``norm_sq`` is an upper bound on the squared operator norm.
    """
    if spec.mode is SensingMode.PERMUTED_HADAMARD:
        return (lambda x: forward_apply(spec, x),
                lambda y: adjoint_apply(spec, y),
                float(spec.transform_order))
    _check_dense(spec)
    a = dense_matrix(spec)
    # Exact spectral norm with a small safety margin; dense specs are small.
    norm_sq = 1.01 * float(np.linalg.norm(a, 2)) ** 2
    return (lambda x: a @ np.asarray(x, dtype=np.float64),
            lambda y: a.T @ np.asarray(y, dtype=np.float64),
            norm_sq)
