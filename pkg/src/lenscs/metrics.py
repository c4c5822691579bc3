"""Image comparison metrics and run reports."""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError

PEAK = 255.0


def mse(reference, test):
    """Per-channel mean squared error of two ``(H, W[, C])`` images."""
    ref = np.asarray(reference, dtype=np.float64)
    tst = np.asarray(test, dtype=np.float64)
    if ref.shape != tst.shape:
        raise InvalidArgumentError(f"image shapes differ: {ref.shape} vs {tst.shape}")
    if ref.ndim == 2:
        ref, tst = ref[..., None], tst[..., None]
    return [float(np.mean((ref[..., c] - tst[..., c]) ** 2)) for c in range(ref.shape[2])]


def psnr_from_mse(value, peak=PEAK):
    """``10 log10(peak^2 / mse)``; ``math.inf`` for an exact match."""
    if value == 0:
        return math.inf
    return 10.0 * math.log10(peak ** 2 / value)


def psnr(reference, test, peak=PEAK):
    """PSNR over all channels pooled together."""
    return psnr_from_mse(float(np.mean(mse(reference, test))), peak)


def relative_error(reference, test):
    ref = np.asarray(reference, dtype=np.float64)
    return float(np.linalg.norm(np.asarray(test) - ref) / np.linalg.norm(ref))


def format_psnr(value):
    return "inf" if math.isinf(value) else f"{value:.4f}"


@dataclass
class RunReport:
    """Per-channel quality metrics and solver statistics for one run."""

    mse: list = field(default_factory=list)
    psnr: list = field(default_factory=list)
    iterations: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    tv: list = field(default_factory=list)
    wall_time: float | None = None

    def lines(self, include_timing=False):
        """Tab-delimited report lines, one per channel."""
        n = max(len(self.mse), len(self.iterations))
        out = ["channel\tmse\tpsnr_db\titerations\tresidual\ttv"]
        for c in range(n):
            cells = [str(c)]
            cells.append(f"{self.mse[c]:.6g}" if c < len(self.mse) else "-")
            cells.append(format_psnr(self.psnr[c]) if c < len(self.psnr) else "-")
            cells.append(str(self.iterations[c]) if c < len(self.iterations) else "-")
            cells.append(f"{self.residuals[c]:.6g}" if c < len(self.residuals) else "-")
            cells.append(f"{self.tv[c]:.6g}" if c < len(self.tv) else "-")
            out.append("\t".join(cells))
        if include_timing and self.wall_time is not None:
            out.append(f"# wall_time_s\t{self.wall_time:.3f}")
        return out


def evaluate(reference, test):
    """:class:`RunReport` with per-channel MSE and PSNR (peak 255)."""
    errs = mse(reference, test)
    return RunReport(mse=errs, psnr=[psnr_from_mse(e) for e in errs])
