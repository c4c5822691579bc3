"""Total-variation regularized reconstruction.

The solver is the first-order primal-dual method of Chambolle and Pock
applied to

    minimize_x  TV(x) + lambda / (2 s L) * ||M x - y||^2   subject to x >= 0

where ``L`` bounds ``||M||^2`` and ``s = ||y||_inf / N`` is a data scale
(``N`` the Hadamard order, so ``s`` is roughly the mean pixel intensity).
Dividing by ``s`` makes the reconstruction of ``alpha * y`` exactly
``alpha`` times the reconstruction of ``y``, so ``lambda`` does not depend
on the brightness of the scene. Internally the problem is solved on
``x / s`` with the operator rescaled to unit norm.
"""

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError
from .sensing import plane_to_scan, scan_to_plane, signed_operator


class TVFlavor(enum.Enum):
    ANISOTROPIC = "anisotropic"
    ISOTROPIC = "isotropic"


# ||grad||^2 <= 8 for forward differences on a 2-D grid.
GRAD_NORM_SQ = 8.0


@dataclass(frozen=True)
class ReconstructionConfig:
    """Solver settings.

    ``tau`` and ``sigma`` are the primal and dual steps for the unit-norm
    operator; ``None`` picks ``0.99 / sqrt(8 + 1)`` for both. They must
    satisfy ``tau * sigma * 9 <= 1``.
    """

    tv_flavor: TVFlavor = TVFlavor.ANISOTROPIC
    lam: float = 1000.0
    max_iterations: int = 500
    tolerance: float = 1e-5
    tau: float | None = None
    sigma: float | None = None
    log_every: int = 10

    def __post_init__(self):
        object.__setattr__(self, "tv_flavor", TVFlavor(self.tv_flavor))
        if not self.lam > 0:
            raise InvalidArgumentError(f"lambda must be > 0, got {self.lam}")
        if not self.tolerance > 0:
            raise InvalidArgumentError(f"tolerance must be > 0, got {self.tolerance}")
        if int(self.max_iterations) < 1:
            raise InvalidArgumentError("max_iterations must be >= 1")
        tau, sigma = self.steps
        if tau <= 0 or sigma <= 0:
            raise InvalidArgumentError("step sizes must be positive")
        if tau * sigma * (GRAD_NORM_SQ + 1.0) > 1.0 + 1e-12:
            raise InvalidArgumentError(
                f"step sizes violate tau*sigma*9 <= 1 (tau={tau}, sigma={sigma})"
            )

    @property
    def steps(self):
        default = 0.99 / math.sqrt(GRAD_NORM_SQ + 1.0)
        return (default if self.tau is None else float(self.tau),
                default if self.sigma is None else float(self.sigma))


@dataclass
class ChannelDiagnostics:
    iterations: int
    residual: float
    tv: float
    converged: bool
    history: list = field(default_factory=list)


@dataclass
class ReconstructionResult:
    """Reconstructed ``(H, W, C)`` image with per-channel diagnostics."""

    image: np.ndarray
    diagnostics: list

    @property
    def iterations(self):
        return [d.iterations for d in self.diagnostics]

    @property
    def residuals(self):
        return [d.residual for d in self.diagnostics]


def grad(x):
    """Forward differences with a Neumann boundary.

    Returns an array of shape ``(2, H, W)``: horizontal differences (zero in
    the last column) and vertical differences (zero in the last row).
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or min(x.shape) < 1:
        raise InvalidArgumentError(f"expected a 2-D image plane, got shape {x.shape}")
    g = np.zeros((2,) + x.shape)
    g[0, :, :-1] = x[:, 1:] - x[:, :-1]
    g[1, :-1, :] = x[1:, :] - x[:-1, :]
    return g


def div(p):
    """Discrete divergence, the negative adjoint of :func:`grad`."""
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 3 or p.shape[0] != 2:
        raise InvalidArgumentError(f"expected a (2, H, W) field, got shape {p.shape}")
    ph, pv = p
    d = np.zeros(ph.shape)
    d[:, :-1] += ph[:, :-1]
    d[:, 1:] -= ph[:, :-1]
    d[:-1, :] += pv[:-1, :]
    d[1:, :] -= pv[:-1, :]
    return d


def tv_norm(x, flavor=TVFlavor.ANISOTROPIC):
    g = grad(x)
    if TVFlavor(flavor) is TVFlavor.ANISOTROPIC:
        return float(np.abs(g).sum())
    return float(np.sqrt((g ** 2).sum(axis=0)).sum())


def _project_dual(p, flavor):
    if flavor is TVFlavor.ANISOTROPIC:
        np.clip(p, -1.0, 1.0, out=p)
    else:
        p /= np.maximum(1.0, np.sqrt((p ** 2).sum(axis=0)))
    return p


def solve_tv(forward, adjoint, y, shape, norm_sq, config, transform_order):
    """TV-regularized least squares for one channel with a generic operator.

    Parameters
    ----------
    forward, adjoint : callable
        ``forward`` maps an image plane of ``shape`` to a measurement vector;
        ``adjoint`` is its transpose and returns a plane.
    y : numpy.ndarray
        Signed measurements for one channel.
    norm_sq : float
        Upper bound on the squared operator norm.
    transform_order : int
        ``N`` used to define the data scale ``||y||_inf / N``.

    Returns
    -------
    plane : numpy.ndarray
    diagnostics : ChannelDiagnostics
    """
    y = np.asarray(y, dtype=np.float64)
    if not np.all(np.isfinite(y)):
        raise InvalidArgumentError("measurements must be finite")
    peak = float(np.abs(y).max()) if y.size else 0.0
    if peak == 0.0:
        return np.zeros(shape), ChannelDiagnostics(0, 0.0, 0.0, True)

    scale = peak / transform_order
    root = math.sqrt(norm_sq)
    yn = y / (scale * root)
    lam = config.lam
    tau, sigma = config.steps
    flavor = config.tv_flavor

    def op(v):
        return forward(v) / root

    def op_t(v):
        return adjoint(v) / root

    x = np.zeros(shape)
    x_bar = x.copy()
    p = np.zeros((2,) + shape)
    q = np.zeros_like(yn)
    history = []
    converged = False
    it = 0
    for it in range(1, int(config.max_iterations) + 1):
        p += sigma * grad(x_bar)
        _project_dual(p, flavor)
        q += sigma * (op(x_bar) - yn)
        q /= 1.0 + sigma / lam

        x_old = x
        x = x_old + tau * (div(p) - op_t(q))
        np.maximum(x, 0.0, out=x)
        x_bar = 2.0 * x - x_old

        change = np.linalg.norm(x - x_old)
        if config.log_every and it % config.log_every == 0:
            res = np.linalg.norm(forward(x) - y / scale) * scale
            history.append((it, float(res), tv_norm(x, flavor) * scale))
        if change <= config.tolerance * max(np.linalg.norm(x), 1e-300):
            converged = True
            break

    plane = x * scale
    residual = float(np.linalg.norm(forward(plane) - y))
    diag = ChannelDiagnostics(it, residual, tv_norm(plane, flavor), converged, history)
    return plane, diag


def _channels(y, spec):
    y = np.asarray(y, dtype=np.float64)
    if y.ndim == 1:
        y = y[:, None]
    if y.ndim != 2 or y.shape[0] != spec.num_measurements:
        raise InvalidArgumentError(
            f"expected {spec.num_measurements} measurements per channel, got shape {y.shape}"
        )
    if not np.all(np.isfinite(y)):
        raise InvalidArgumentError("measurements must be finite")
    return y


def reconstruct_tv(y, spec, config=None):
    """Reconstruct an image from signed measurements, channel by channel.

    ``y`` has shape ``(M,)`` or ``(M, C)``. Returns a
    :class:`ReconstructionResult` whose image is ``(H, W, C)``.
    """
    config = config or ReconstructionConfig()
    y = _channels(y, spec)
    fwd, adj, norm_sq = signed_operator(spec)
    w, h = spec.grid_width, spec.grid_height

    def forward(plane):
        return fwd(plane_to_scan(plane))

    def adjoint(v):
        return scan_to_plane(adj(v), w, h)

    planes, diags = [], []
    for c in range(y.shape[1]):
        plane, diag = solve_tv(forward, adjoint, y[:, c], (h, w), norm_sq, config,
                               spec.transform_order)
        planes.append(plane)
        diags.append(diag)
    return ReconstructionResult(np.stack(planes, axis=-1), diags)


def reconstruct_baseline(y, spec):
    """Backprojection estimate ``(1/N) M^T y`` as an ``(H, W, C)`` image."""
    y = _channels(y, spec)
    _, adj, norm_sq = signed_operator(spec)
    x = adj(y) / norm_sq
    return scan_to_plane(x, spec.grid_width, spec.grid_height)
