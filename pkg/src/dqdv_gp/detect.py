"""Uncertainty-aware peak detection on the dQ/dV posterior and plating
classification via the >4.0 V signature."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks as _scipy_find_peaks
from scipy.stats import norm

from .derivative import DerivativePosterior
from .errors import GridDoesNotReachThreshold
from .kernel import Hyperparams

__all__ = [
    "PeakCandidate",
    "PlatingReport",
    "find_peaks",
    "classify",
    "confidence_metric",
    "THRESHOLD_V_DEFAULT",
    "MIN_PROMINENCE_FRAC_DEFAULT",
]

THRESHOLD_V_DEFAULT = 4.0
MIN_PROMINENCE_FRAC_DEFAULT = 0.05

VERDICT_PLATING = "Plating"
VERDICT_NO_PLATING = "NoPlating"


@dataclass(frozen=True)
class PeakCandidate:
    """A significant interior local maximum of the dQ/dV posterior mean."""

    v_peak: float
    magnitude: float
    band_halfwidth: float
    prominence: float

    @property
    def confidence_pct(self) -> float:
        return confidence_metric(self)

    def to_dict(self):
        return {
            "v_peak": float(self.v_peak),
            "magnitude": float(self.magnitude),
            "band_halfwidth": float(self.band_halfwidth),
            "prominence": float(self.prominence),
            "confidence_pct": float(self.confidence_pct),
        }


@dataclass(frozen=True)
class PlatingReport:
    """Per-cycle classification outcome."""

    cycle: int
    verdict: str
    peaks: tuple
    threshold_v: float
    hyperparams: Hyperparams
    grid_vmin: float
    grid_vmax: float
    grid_n: int

    def to_dict(self):
        return {
            "cycle": int(self.cycle),
            "verdict": self.verdict,
            "threshold_v": float(self.threshold_v),
            "peaks": [p.to_dict() for p in self.peaks],
            "hyperparams": self.hyperparams.to_dict(),
            "grid": {
                "vmin": float(self.grid_vmin),
                "vmax": float(self.grid_vmax),
                "n": int(self.grid_n),
            },
        }


def _refine_quadratic(grid, mean, idx):
    """Sub-grid peak location/height from a parabola through 3 samples."""
    y0, y1, y2 = mean[idx - 1], mean[idx], mean[idx + 1]
    denom = y0 - 2.0 * y1 + y2
    if denom >= 0:  # not locally concave; keep the grid point
        return float(grid[idx]), float(y1)
    delta = float(np.clip(0.5 * (y0 - y2) / denom, -0.5, 0.5))
    v_peak = float(grid[idx] + delta * (grid[idx + 1] - grid[idx]))
    height = float(y1 - 0.25 * (y0 - y2) * delta)
    return v_peak, height


def find_peaks(
    post: DerivativePosterior,
    min_prominence_frac: float = MIN_PROMINENCE_FRAC_DEFAULT,
) -> list[PeakCandidate]:
    """Interior local maxima of the posterior mean filtered by prominence.

    The prominence floor is ``min_prominence_frac`` times the peak-to-peak
    range of the mean; locations are refined by quadratic interpolation.
    Endpoints are never candidates.
    """
    mean = post.mean
    if len(mean) < 5:
        raise ValueError("grid must have at least 5 points")
    rng = float(np.max(mean) - np.min(mean))
    if rng <= 0:
        return []
    floor = min_prominence_frac * rng
    idxs, props = _scipy_find_peaks(mean, prominence=floor)

    z = norm.ppf(0.5 + post.level / 2.0)
    out = []
    for n, idx in enumerate(idxs):
        if idx <= 0 or idx >= len(mean) - 1:
            continue
        v_peak, magnitude = _refine_quadratic(post.grid, mean, idx)
        if magnitude <= 0:
            continue
        out.append(
            PeakCandidate(
                v_peak=v_peak,
                magnitude=magnitude,
                band_halfwidth=float(z * np.sqrt(post.var[idx])),
                prominence=float(props["prominences"][n]),
            )
        )
    out.sort(key=lambda p: p.v_peak)
    return out


def _band_separated(post: DerivativePosterior, peak_idx: int) -> bool:
    """Peak resolved beyond uncertainty: its lower credible bound exceeds the
    upper bound at the higher-voltage flanking minimum (or grid end)."""
    right = post.mean[peak_idx:]
    min_idx = peak_idx + int(np.argmin(right))
    return post.lower[peak_idx] > post.upper[min_idx]


def classify(
    post: DerivativePosterior,
    threshold_v: float = THRESHOLD_V_DEFAULT,
    min_prominence_frac: float = MIN_PROMINENCE_FRAC_DEFAULT,
    significance: str = "band-separated",
    cycle: int = 0,
    hyperparams: Hyperparams | None = None,
) -> PlatingReport:
    """Classify one cycle by the above-threshold differential-peak signature.

    Verdict is Plating iff some candidate sits above ``threshold_v`` and, in
    the default band-separated mode, is resolved beyond its credible band.
    Raises GridDoesNotReachThreshold when the grid tops out at or below the
    threshold (the cycle carries no evidence either way).
    """
    if significance not in ("band-separated", "mean-only"):
        raise ValueError(f"unknown significance mode {significance!r}")
    if float(post.grid[-1]) <= threshold_v:
        raise GridDoesNotReachThreshold(
            f"grid ends at {float(post.grid[-1]):.3f} V <= threshold {threshold_v} V"
        )

    candidates = find_peaks(post, min_prominence_frac)
    above = [p for p in candidates if p.v_peak > threshold_v]

    any_significant = False
    for p in above:
        if significance == "mean-only":
            any_significant = True
            break
        idx = int(np.argmin(np.abs(post.grid - p.v_peak)))
        if _band_separated(post, idx):
            any_significant = True
            break

    hp = hyperparams if hyperparams is not None else Hyperparams(1.0, 1.0, 0.0)
    return PlatingReport(
        cycle=cycle,
        verdict=VERDICT_PLATING if any_significant else VERDICT_NO_PLATING,
        peaks=tuple(above),
        threshold_v=threshold_v,
        hyperparams=hp,
        grid_vmin=float(post.grid[0]),
        grid_vmax=float(post.grid[-1]),
        grid_n=len(post.grid),
    )


def confidence_metric(peak: PeakCandidate) -> float:
    """Credible-band half-width at the peak as a percentage of its magnitude."""
    if peak.magnitude <= 0:
        raise ValueError("peak magnitude must be positive")
    return 100.0 * peak.band_halfwidth / peak.magnitude
