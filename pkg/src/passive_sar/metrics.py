"""Figures of merit for reconstructions and waveform estimates.

All four metrics are per-sample; averaging across test realizations is left
to the caller.  Foreground/background splits come in as boolean masks, which
in simulation are taken from the ground-truth scene support.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import decode
from .scenes import SceneImage
from .waveform import as_values


def data_mismatch(params, rho_star, data) -> float:
    """Normalized measurement mismatch ||diag(w) F rho* - d||^2 / ||d||^2."""
    d = np.asarray(data, dtype=np.complex128).reshape(-1)
    denom = float(np.vdot(d, d).real)
    if denom == 0.0:
        raise ValueError("data vector has zero norm")
    e = decode(params, rho_star) - d
    return float(np.vdot(e, e).real) / denom


def image_error(rho_star, rho_truth) -> float:
    """Normalized image-domain error ||rho* - rho||^2 / ||rho||^2."""
    a = np.asarray(rho_star, dtype=float).reshape(-1)
    b = np.asarray(rho_truth, dtype=float).reshape(-1)
    if a.shape != b.shape:
        raise ValueError("image length mismatch")
    denom = float(b @ b)
    if denom == 0.0:
        raise ValueError("truth image has zero norm")
    return float((a - b) @ (a - b)) / denom


def contrast(rho_star, foreground_mask) -> float:
    """|mean(foreground) - mean(background)|^2 / var(background).

    Population variance.  Raises when either region is empty or the
    background is exactly constant (the contrast is undefined there).
    """
    img = np.asarray(rho_star, dtype=float).reshape(-1)
    mask = np.asarray(foreground_mask, dtype=bool).reshape(-1)
    if img.shape != mask.shape:
        raise ValueError("mask length mismatch")
    fg = img[mask]
    bg = img[~mask]
    if fg.size == 0 or bg.size == 0:
        raise ValueError("foreground and background must both be nonempty")
    var_bg = float(np.var(bg))
    if var_bg == 0.0:
        raise ValueError("background variance is zero; contrast undefined")
    return abs(float(fg.mean()) - float(bg.mean())) ** 2 / var_bg


def waveform_error(w_truth, w) -> float:
    """Normalized waveform mismatch ||w_t - w||^2 / ||w_t||^2."""
    wt = as_values(w_truth)
    wv = as_values(w)
    if wt.shape != wv.shape:
        raise ValueError("waveform length mismatch")
    denom = float(np.vdot(wt, wt).real)
    if denom == 0.0:
        raise ValueError("truth waveform has zero norm")
    diff = wt - wv
    return float(np.vdot(diff, diff).real) / denom


@dataclass
class CrossSection:
    values: np.ndarray  # the extracted 1-D slice (possibly log10-transformed)
    peak: float
    background_mean: float


def cross_section(
    image: SceneImage,
    axis: str,
    index: int,
    target_mask=None,
    log10: bool = False,
) -> CrossSection:
    """Extract a row or column slice with a peak / mean-background summary.

    ``target_mask`` (full-image boolean) designates target pixels excluded
    from the background mean.  The summary always uses linear values; the
    returned slice is log10-transformed when requested (zeros map to -inf).
    """
    if axis not in ("row", "column"):
        raise ValueError("axis must be 'row' or 'column'")
    mat = image.as_matrix()
    if not 0 <= index < image.side:
        raise ValueError(f"index {index} out of range for side {image.side}")
    line = mat[index, :] if axis == "row" else mat[:, index]
    if target_mask is not None:
        mask2d = np.asarray(target_mask, dtype=bool).reshape(image.side, image.side)
        mask_line = mask2d[index, :] if axis == "row" else mask2d[:, index]
    else:
        mask_line = np.zeros(image.side, dtype=bool)
    background = line[~mask_line]
    peak = float(line.max(initial=0.0))
    background_mean = float(background.mean()) if background.size else 0.0
    out = line.copy()
    if log10:
        with np.errstate(divide="ignore"):
            out = np.log10(out)
    return CrossSection(out, peak, background_mean)
