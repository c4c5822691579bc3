"""Reconstruction from several sensors sharing one aperture assembly.

Three uses are supported: independent reconstruction per view, pooling the
measurements of all views into one larger measurement set for a shared
image, and joint reconstruction of an image finer than the aperture grid
from views at sub-pixel offsets.

A view's registration ``(dx, dy)`` is its sampling offset in aperture
pixels relative to view 0: pixel ``(r, c)`` of view k sees what view 0's
pixel ``(r + dy, c + dx)`` sees (see :func:`lenscs.scene.sampling_offset`).
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import InvalidArgumentError, ValidationError
from .sensing import binary_to_signed, plane_to_scan, scan_to_plane, signed_operator
from .tv import ReconstructionConfig, ReconstructionResult, reconstruct_tv, solve_tv


@dataclass
class ViewSet:
    """Measurement sets of several sensors taken with one pattern family."""

    measurements: list
    registrations: list = field(default=None)

    def __post_init__(self):
        self.measurements = list(self.measurements)
        if not self.measurements:
            raise InvalidArgumentError("a view set needs at least one view")
        if self.registrations is None:
            self.registrations = [(0.0, 0.0)] * len(self.measurements)
        self.registrations = [tuple(float(v) for v in r) for r in self.registrations]
        if len(self.registrations) != len(self.measurements):
            raise InvalidArgumentError("one registration per view is required")
        if not all(len(r) == 2 and np.all(np.isfinite(r)) for r in self.registrations):
            raise InvalidArgumentError("registrations must be finite (dx, dy) pairs")
        ref = self.measurements[0].spec
        for i, ms in enumerate(self.measurements[1:], start=1):
            if not ref.same_matrix_family(ms.spec):
                raise ValidationError(_family_mismatch(ref, ms.spec, i))
            if ms.num_channels != self.measurements[0].num_channels:
                raise ValidationError(f"view {i} has a different channel count")

    def __len__(self):
        return len(self.measurements)

    @property
    def sensors(self):
        return [ms.sensor for ms in self.measurements]

    @property
    def spec(self):
        return self.measurements[0].spec


def _family_mismatch(a, b, i):
    fields = [name for name in ("grid_width", "grid_height", "transform_order", "mode",
                                "permutation_seed", "dense_seed")
              if getattr(a, name) != getattr(b, name)]
    return f"view {i} spec differs from view 0 in: {', '.join(fields)}"


def signed_values(ms):
    return binary_to_signed(ms.values, ms.spec)


def reconstruct_views(views, config=None):
    """Independent TV reconstruction per view, in view order."""
    return [reconstruct_tv(signed_values(ms), ms.spec, config) for ms in views.measurements]


def concatenate_measurements(views, per_view_specs=None):
    """Pool all views' signed measurements into one spec and measurement array.

    Rows are kept in order of first appearance; a row measured by several
    views gets the mean of their values.
    """
    specs = per_view_specs or [ms.spec for ms in views.measurements]
    if len(specs) != len(views):
        raise InvalidArgumentError("one spec per view is required")
    for i, s in enumerate(specs[1:], start=1):
        if not specs[0].same_matrix_family(s):
            raise ValidationError(_family_mismatch(specs[0], s, i))
    sums = {}
    counts = {}
    for s, ms in zip(specs, views.measurements):
        if ms.values.shape[0] != s.num_measurements:
            raise InvalidArgumentError("measurement count does not match its spec")
        y = binary_to_signed(ms.values, s)
        for row, val in zip(s.row_indices.tolist(), y):
            if row in sums:
                sums[row] = sums[row] + val
                counts[row] += 1
            else:
                sums[row] = val.copy()
                counts[row] = 1
    rows = list(sums)
    y = np.array([sums[r] / counts[r] for r in rows])
    return specs[0].with_rows(rows), y


def concatenate_and_reconstruct(views, per_view_specs=None, config=None):
    """Reconstruct one shared image from the pooled measurements of all views."""
    spec, y = concatenate_measurements(views, per_view_specs)
    return reconstruct_tv(y, spec, config)


def _shift_downsample_1d(n_low, factor, offset):
    """``n_low x (factor * n_low)`` matrix: shift by ``offset`` high-res
    samples (linear interpolation, zero outside) then box-average."""
    n_high = factor * n_low
    rows, cols, vals = [], [], []
    base = int(np.floor(offset))
    frac = offset - base
    for i in range(n_low):
        for j in range(factor):
            m = factor * i + j + base
            for col, w in ((m, 1.0 - frac), (m + 1, frac)):
                if w != 0.0 and 0 <= col < n_high:
                    rows.append(i)
                    cols.append(col)
                    vals.append(w / factor)
    return sp.csr_matrix((vals, (rows, cols)), shape=(n_low, n_high))


def shift_downsample_operator(grid_width, grid_height, factor, offset):
    """Sparse map from a scan-order high-res image to a view's pixel image.

    ``offset`` is ``(dx, dy)`` in aperture pixels; it becomes a shift of
    ``factor * offset`` high-res pixels before ``factor x factor`` box
    averaging.
    """
    dx, dy = offset
    rows = _shift_downsample_1d(grid_height, factor, factor * dy)
    cols = _shift_downsample_1d(grid_width, factor, factor * dx)
    # column-major vec(R X C^T) = (C kron R) vec(X)
    return sp.kron(cols, rows, format="csr")


def check_offsets(offsets, factor):
    """Each offset component must be a multiple of ``1 / factor``."""
    for i, off in enumerate(offsets):
        for v in off:
            scaled = v * factor
            if abs(scaled - round(scaled)) > 1e-9:
                raise ValidationError(
                    f"view {i} offset {tuple(off)} is not a multiple of 1/{factor} pixel"
                )


def superres_reconstruct(views, factor=2, config=None, offsets=None):
    """Joint TV reconstruction at ``factor`` times the aperture resolution.

    Each view is modelled as ``S_k X`` where ``S_k`` shifts the high-res
    image ``X`` by the view's offset and box-downsamples it; all views'
    signed measurements are fitted together. Returns a
    :class:`~lenscs.tv.ReconstructionResult` with a
    ``(factor*H, factor*W, C)`` image.
    """
    config = config or ReconstructionConfig()
    factor = int(factor)
    if factor < 1:
        raise InvalidArgumentError("factor must be >= 1")
    offsets = views.registrations if offsets is None else [tuple(o) for o in offsets]
    if len(offsets) != len(views):
        raise InvalidArgumentError("one offset per view is required")
    check_offsets(offsets, factor)
    offsets = [tuple(round(v * factor) / factor for v in off) for off in offsets]

    spec0 = views.spec
    w, h = spec0.grid_width, spec0.grid_height
    hw, hh = factor * w, factor * h
    ops = []
    for ms, off in zip(views.measurements, offsets):
        fwd, adj, norm_sq = signed_operator(ms.spec)
        ops.append((shift_downsample_operator(w, h, factor, off), fwd, adj, norm_sq))
    sizes = [ms.spec.num_measurements for ms in views.measurements]
    splits = np.cumsum(sizes)[:-1]
    # ||S_k||^2 <= 1 / factor^2 (disjoint box means after a contraction)
    total_norm_sq = sum(n for *_, n in ops) / factor ** 2

    def forward(plane):
        xs = plane_to_scan(plane)
        return np.concatenate([fwd(s @ xs) for s, fwd, _, _ in ops])

    def adjoint(v):
        acc = np.zeros(hw * hh)
        for (s, _, adj, _), part in zip(ops, np.split(v, splits)):
            acc += s.T @ adj(part)
        return scan_to_plane(acc, hw, hh)

    y = np.concatenate([signed_values(ms) for ms in views.measurements])
    planes, diags = [], []
    for c in range(y.shape[1]):
        plane, diag = solve_tv(forward, adjoint, y[:, c], (hh, hw), total_norm_sq, config,
                               spec0.transform_order)
        planes.append(plane)
        diags.append(diag)
    return ReconstructionResult(np.stack(planes, axis=-1), diags)
