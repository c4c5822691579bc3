"""Report figures rendered to image files (no display needed)."""

import numpy as np
from matplotlib.figure import Figure

# Fixed metadata keeps PNG output byte-stable between runs.
_PNG_METADATA = {"Software": None}


def _display(image, scale):
    img = np.clip(np.asarray(image, dtype=np.float64) * scale / 255.0, 0.0, 1.0)
    if img.ndim == 3 and img.shape[2] == 1:
        img = img[..., 0]
    return img


def _show(ax, image, title, scale):
    img = _display(image, scale)
    ax.imshow(img, cmap="gray" if img.ndim == 2 else None, vmin=0, vmax=1,
              interpolation="nearest")
    ax.set_title(title, fontsize=9)
    ax.set_xticks([])
    ax.set_yticks([])


def reconstruction_figure(path, panels, diagnostics=None, scale=1.0, dpi=120):
    """Save image panels side by side, plus solver convergence curves.

    ``panels`` maps titles to ``(H, W[, C])`` images in 0-255 units.
    ``diagnostics`` is a list of per-channel
    :class:`~lenscs.tv.ChannelDiagnostics`; channels with a history get a
    residual and TV curve.
    """
    histories = [d.history for d in (diagnostics or []) if d.history]
    ncols = len(panels) + (2 if histories else 0)
    fig = Figure(figsize=(2.6 * ncols, 2.8))
    axes = fig.subplots(1, ncols, squeeze=False)[0]
    for ax, (title, img) in zip(axes, panels.items()):
        _show(ax, img, title, scale)
    if histories:
        res_ax, tv_ax = axes[-2], axes[-1]
        for c, hist in enumerate(histories):
            its, res, tv = np.array(hist).T
            res_ax.semilogy(its, np.maximum(res, 1e-300), label=f"ch {c}")
            tv_ax.plot(its, tv, label=f"ch {c}")
        res_ax.set_title("residual ||Mx - y||", fontsize=9)
        tv_ax.set_title("TV(x)", fontsize=9)
        for ax in (res_ax, tv_ax):
            ax.set_xlabel("iteration", fontsize=8)
            ax.tick_params(labelsize=7)
        res_ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=dpi, metadata=_PNG_METADATA)
    return path


def comparison_figure(path, reference, test, scale=1.0, dpi=120):
    """Reference, test and absolute difference map."""
    ref = np.asarray(reference, dtype=np.float64)
    tst = np.asarray(test, dtype=np.float64)
    diff = np.abs(ref - tst)
    if diff.ndim == 3:
        diff = diff.mean(axis=2)
    fig = Figure(figsize=(8, 2.8))
    axes = fig.subplots(1, 3)
    _show(axes[0], ref, "reference", scale)
    _show(axes[1], tst, "test", scale)
    im = axes[2].imshow(diff, cmap="magma", interpolation="nearest")
    axes[2].set_title("|difference|", fontsize=9)
    axes[2].set_xticks([])
    axes[2].set_yticks([])
    fig.colorbar(im, ax=axes[2], fraction=0.046)
    fig.tight_layout()
    fig.savefig(path, dpi=dpi, metadata=_PNG_METADATA)
    return path
