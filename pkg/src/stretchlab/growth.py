"""Exponential growth rates: entropy from the g side, critical exponent
from the h side, each by independent estimators.

The Bowen-equation root is the headline estimator (geometric convergence in
the word-length cap); counting fits and Poincare-series sweeps cross-check
it.  Counting windows are clipped to the completeness horizon, below which
the class enumeration is provably exhaustive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from . import mobius, spectra, thermo
from .errors import IncompleteWindow, SweepBracketFailure
from .groups import GroupSpec, PingPongCertificate
from .spectra import PairedSpectrum


@dataclass(frozen=True)
class GrowthEstimate:
    value: float
    method: str  # counting_fit | poincare_sweep | bowen_root
    gap: float   # combined uncertainty used by downstream tolerances
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "method": self.method,
            "gap": self.gap,
            "diagnostics": dict(self.diagnostics),
        }


def completeness_horizon(
    cert: PingPongCertificate, side: str, n_max: int
) -> float:
    """Largest T such that every class of length <= T is guaranteed to have
    word length <= n_max, from the certificate's per-letter bound."""
    return cert.letter_bound(side) * n_max


def counting_estimate(
    lengths: np.ndarray, window: tuple[float, float], horizon: float
) -> GrowthEstimate:
    """Least-squares slope of log N(T) against T over the window, where
    N(T) counts primitive classes of length at most T.

    The reported gap covers three error sources: the OLS standard error,
    the half-window slope split (systematic curvature), and the shift seen
    when the subexponential 1/T factor of the counting function is divided
    out (slope of log(T N(T))); the last dominates at desk-scale horizons.
    """
    t0, t1 = window
    if t1 > horizon + 1e-12:
        raise IncompleteWindow(
            f"window end {t1} exceeds completeness horizon {horizon}"
        )
    if t0 >= t1:
        raise ValueError("window must have positive width")
    lengths = np.sort(np.asarray(lengths, dtype=float))
    counts = np.arange(1, len(lengths) + 1, dtype=float)
    inside = (lengths >= t0) & (lengths <= t1)
    if inside.sum() < 20:
        raise ValueError(
            f"need at least 20 classes in the window, found {int(inside.sum())}"
        )
    x = lengths[inside]
    y = np.log(counts[inside])

    def slope_se(xs, ys):
        n = len(xs)
        xm, ym = xs.mean(), ys.mean()
        sxx = ((xs - xm) ** 2).sum()
        slope = ((xs - xm) * (ys - ym)).sum() / sxx
        resid = ys - ym - slope * (xs - xm)
        se = math.sqrt((resid**2).sum() / max(n - 2, 1) / sxx)
        return slope, se

    slope, se = slope_se(x, y)
    half = len(x) // 2
    s_lo, _ = slope_se(x[:half], y[:half])
    s_hi, _ = slope_se(x[half:], y[half:])
    debiased, _ = slope_se(x, y + np.log(x))
    gap = max(se, abs(s_hi - s_lo), abs(debiased - slope))
    return GrowthEstimate(
        slope,
        "counting_fit",
        gap,
        {
            "window": [t0, t1],
            "points": int(inside.sum()),
            "stderr": se,
            "half_window_split": abs(s_hi - s_lo),
            "debiased_slope": debiased,
        },
    )


def counting_estimate_adaptive(
    lengths: np.ndarray, horizon: float
) -> GrowthEstimate:
    """Counting fit on [horizon/2, horizon], widened downward when that
    window holds fewer than 25 classes."""
    lengths = np.sort(np.asarray(lengths, dtype=float))
    below = lengths[lengths <= horizon]
    t0 = horizon / 2.0
    if (below >= t0).sum() < 25 and len(below) >= 2:
        t0 = float(below[-min(len(below), 30)])
    return counting_estimate(lengths, (t0, horizon), horizon)


def counting_estimate_auto(
    ps: PairedSpectrum, side: str, cert: PingPongCertificate
) -> GrowthEstimate:
    horizon = completeness_horizon(cert, side, ps.n_max)
    return counting_estimate_adaptive(ps.lengths(side, primitive_only=True), horizon)


def bowen_root(ps: PairedSpectrum, side: str) -> GrowthEstimate:
    """Bowen-equation root on the periodic data of the chosen side.

    Needs a complete spectrum at cap >= 6; below that the level sums are
    too shallow for the root to mean anything."""
    if ps.n_max < 6:
        raise ValueError(f"need n_max >= 6, got {ps.n_max}")
    pd = spectra.period_data(ps)
    root = thermo.bowen_solve(pd, side)
    gap = root.gap if math.isfinite(root.gap) else root.residual
    return GrowthEstimate(
        root.value,
        "bowen_root",
        gap,
        {"residual": root.residual, "level": root.level, "stability_gap": root.gap},
    )


# ---------------------------------------------------------------------------
# Poincare-series sweep

def _displacements(prods: np.ndarray, basepoint: tuple[complex, float]) -> np.ndarray:
    z, t = complex(basepoint[0]), float(basepoint[1])
    a, b = prods[:, 0, 0], prods[:, 0, 1]
    c, d = prods[:, 1, 0], prods[:, 1, 1]
    w = c * z + d
    denom = np.abs(w) ** 2 + np.abs(c) ** 2 * t * t
    z_new = ((a * z + b) * w.conjugate() + a * c.conjugate() * t * t) / denom
    t_new = t / denom
    cosh_d = 1.0 + (np.abs(z - z_new) ** 2 + (t - t_new) ** 2) / (2.0 * t * t_new)
    return np.arccosh(np.maximum(cosh_d, 1.0))


def displacement_levels(
    spec: GroupSpec,
    side: str,
    max_level: int,
    basepoint: tuple[complex, float] = mobius.ORIGIN,
    radius: float | None = None,
) -> list[np.ndarray]:
    """Displacements d(p, w p) of a base point for every reduced word,
    grouped by word length.

    Enumerates `max_level` spheres, or with `radius` set stops as soon as a
    whole sphere clears that displacement (every group element moving the
    base point by at most `radius` is then covered; max_level caps work).
    """
    mats = spec.matrices_by_code(side)
    stack = spectra._matrix_stack(mats)
    m = 2 * spec.rank
    succ = np.empty((m, m - 1), dtype=np.int64)
    for c in range(m):
        succ[c] = [d for d in range(m) if d != c ^ 1]
    prods = stack.copy()
    last = np.arange(m, dtype=np.int64)
    levels = []
    for level in range(1, max_level + 1):
        levels.append(_displacements(prods, basepoint))
        if radius is not None and float(levels[-1].min()) > radius:
            break
        if level < max_level:
            nxt = succ[last].reshape(-1)
            prods = np.repeat(prods, m - 1, axis=0) @ stack[nxt]
            last = nxt
    return levels


def _sphere_sum_slope(levels, s: float, fit_window: int) -> float:
    """Fitted growth exponent of the sphere sums a_m = sum over words of
    length m of exp(-s d); the series converges iff this is negative, so
    its zero crossing estimates the abscissa."""
    logs = [float(logsumexp(-s * d)) for d in levels]
    xs = np.arange(1, len(logs) + 1, dtype=float)[-fit_window:]
    ys = np.array(logs)[-fit_window:]
    xm, ym = xs.mean(), ys.mean()
    return float(((xs - xm) * (ys - ym)).sum() / ((xs - xm) ** 2).sum())


def poincare_from_levels(
    levels: list[np.ndarray],
    s_max: float,
    s_min: float = 1e-4,
    fit_window: int = 5,
    grid: int = 24,
    bisections: int = 40,
) -> GrowthEstimate:
    """Abscissa where the fitted log-growth of sphere partial sums crosses
    zero.  If the sums already converge at s_min the estimate is 0."""
    if len(levels) < fit_window + 1:
        raise ValueError("need more levels than the fit window")

    def crossing(fw: int) -> tuple[float, float]:
        def g(s):
            return _sphere_sum_slope(levels, s, fw)

        if g(s_min) <= 0.0:
            return 0.0, s_min
        ss = np.linspace(s_min, s_max, grid)
        lo = s_min
        hi = None
        for s in ss[1:]:
            if g(float(s)) <= 0.0:
                hi = float(s)
                break
            lo = float(s)
        if hi is None:
            raise SweepBracketFailure(
                f"sphere sums still grow at s = {s_max}; raise the sweep limit"
            )
        for _ in range(bisections):
            mid = 0.5 * (lo + hi)
            if g(mid) > 0.0:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi), hi - lo

    value, bracket = crossing(fit_window)
    alt, _ = crossing(max(fit_window - 2, 2))
    gap = max(bracket, abs(value - alt))
    return GrowthEstimate(
        value,
        "poincare_sweep",
        gap,
        {
            "bracket_width": bracket,
            "window_sensitivity": abs(value - alt),
            "levels": len(levels),
            "fit_window": fit_window,
        },
    )


def poincare_estimate(
    spec: GroupSpec,
    side: str = "h",
    max_level: int = 10,
    basepoint: tuple[complex, float] = mobius.ORIGIN,
    radius: float | None = None,
    s_max: float | None = None,
) -> GrowthEstimate:
    """Critical-exponent estimate from the orbital Poincare series."""
    levels = displacement_levels(spec, side, max_level, basepoint, radius)
    if s_max is None:
        # The sphere sums grow by at most a factor 2k-1 per level while the
        # smallest displacement advances by at least the minimal increment,
        # so the crossing lies below log(2k-1)/increment.
        mins = [float(lv.min()) for lv in levels]
        inc = min(b - a for a, b in zip(mins, mins[1:]))
        s_max = math.log(2 * spec.rank - 1) / max(inc, 1e-9) + 1.0
    return poincare_from_levels(levels, s_max=s_max)
