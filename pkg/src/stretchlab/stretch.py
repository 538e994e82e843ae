"""Stretch constants, the entropy/exponent sandwich, and the rigidity
detector.

Both constants come in two flavors per side: truncated ratio sums over
primitive classes (sharp length cutoff) and Gibbs-weighted derivatives of
the level-n orbit pressure (all periodic points, zeta convention).  The two
agree in the limit; their finite-level gap feeds the slack tolerance of the
sandwich check.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from scipy.special import logsumexp

from . import growth, spectra
from .errors import IncompleteWindow, NumericalInstability, StageFailed
from .groups import GroupSpec, spec_hash, verify_ping_pong
from .spectra import PairedSpectrum
from .thermo import PeriodData

FD_STEP = 1e-4


@dataclass(frozen=True)
class TruncatedRatio:
    value: float
    truncation: float
    count: int


def _truncated(ps: PairedSpectrum, T: float, by_side: str, horizon: float | None):
    if horizon is not None and T > horizon + 1e-12:
        raise IncompleteWindow(
            f"truncation {T} exceeds completeness horizon {horizon}"
        )
    num = 0.0
    den = 0.0
    count = 0
    for e in ps.entries:
        if not e.primitive:
            continue
        cut = e.l_g if by_side == "g" else e.l_h
        if cut <= T:
            num += e.l_h
            den += e.l_g
            count += 1
    if count == 0:
        raise ValueError(f"no primitive classes below truncation {T}")
    return TruncatedRatio(num / den, T, count)


def c2_truncated(
    ps: PairedSpectrum, T: float, horizon: float | None = None
) -> TruncatedRatio:
    """Ratio of h-lengths to g-lengths over primitive classes with
    l_g <= T."""
    return _truncated(ps, T, "g", horizon)


def c1_truncated(
    ps: PairedSpectrum, T: float, horizon: float | None = None
) -> TruncatedRatio:
    """As c2_truncated but truncating by l_h <= T."""
    return _truncated(ps, T, "h", horizon)


def _weighted_ratio_derivative(
    pd: PeriodData, n: int, rate: float, weight_obs: str, step: float = FD_STEP
) -> float:
    """d/ds at 0 of the level-n orbit pressure with weights
    exp(-rate * S_weight + s * S_obs), taken for obs = h and obs = g, and
    returned as the h/g ratio (the per-unit-g-time average)."""
    lev = pd.level(n)
    w = -rate * lev.sums[weight_obs]

    def q(s: float, obs: str) -> float:
        return float(logsumexp(w + s * lev.sums[obs], b=lev.mult)) / n

    num = (q(step, "h") - q(-step, "h")) / (2.0 * step)
    den = (q(step, "g") - q(-step, "g")) / (2.0 * step)
    return num / den


def c2_derivative(pd: PeriodData, n: int, entropy_g: float) -> float:
    """Mean h-length per unit g-length under the level-n maximal-measure
    weights of the g side (the derivative route to the upper constant)."""
    return _weighted_ratio_derivative(pd, n, entropy_g, "g")


def c1_derivative(pd: PeriodData, n: int, exponent_h: float) -> float:
    """Mean h-length per unit g-length under the level-n maximal-measure
    weights of the h side (the derivative route to the lower constant)."""
    return _weighted_ratio_derivative(pd, n, exponent_h, "h")


# ---------------------------------------------------------------------------
# the report

@dataclass(frozen=True)
class StretchReport:
    spec_id: str
    n_max: int
    entropy_g: growth.GrowthEstimate
    entropy_g_counting: growth.GrowthEstimate
    exponent_h: growth.GrowthEstimate
    exponent_h_counting: growth.GrowthEstimate
    c1_sum: TruncatedRatio
    c2_sum: TruncatedRatio
    c1_der: float
    c2_der: float
    der_level: int
    c1_gap: float
    c2_gap: float
    slack_lower: float
    slack_upper: float
    slack_tol_lower: float
    slack_tol_upper: float
    inequality_holds: bool
    all_dominated: bool
    domination_violations: int
    ci_bounded_by_one: bool | None
    rigidity_lambda: float | None
    predicted_ratio: float
    rigidity_consistent: bool | None
    tolerances: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def c1(self) -> float:
        return self.c1_der

    def c2(self) -> float:
        return self.c2_der

    def to_dict(self) -> dict:
        return {
            "spec_id": self.spec_id,
            "n_max": self.n_max,
            "entropy_g": self.entropy_g.to_dict(),
            "entropy_g_counting": self.entropy_g_counting.to_dict(),
            "exponent_h": self.exponent_h.to_dict(),
            "exponent_h_counting": self.exponent_h_counting.to_dict(),
            "c1_sum": vars(self.c1_sum) | {},
            "c2_sum": vars(self.c2_sum) | {},
            "c1_der": self.c1_der,
            "c2_der": self.c2_der,
            "der_level": self.der_level,
            "c1_gap": self.c1_gap,
            "c2_gap": self.c2_gap,
            "slack_lower": self.slack_lower,
            "slack_upper": self.slack_upper,
            "slack_tol_lower": self.slack_tol_lower,
            "slack_tol_upper": self.slack_tol_upper,
            "inequality_holds": self.inequality_holds,
            "all_dominated": self.all_dominated,
            "domination_violations": self.domination_violations,
            "ci_bounded_by_one": self.ci_bounded_by_one,
            "rigidity_lambda": self.rigidity_lambda,
            "predicted_ratio": self.predicted_ratio,
            "rigidity_consistent": self.rigidity_consistent,
            "tolerances": dict(self.tolerances),
            "provenance": dict(self.provenance),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def report_from_spectrum(
    ps: PairedSpectrum,
    horizons: tuple[float, float],
    slack_factor: float = 3.0,
    prop_tol: float = 1e-6,
    rigidity_tol: float = 1e-3,
    counting: tuple[growth.GrowthEstimate, growth.GrowthEstimate] | None = None,
    strict: bool = True,
    provenance: dict | None = None,
) -> StretchReport:
    """Assemble the sandwich report from a complete paired spectrum.

    `horizons` gives the completeness horizons (g side, h side) used for
    the truncated sums; `counting` optionally injects precomputed counting
    fits (they need the certificate, which synthetic spectra lack).
    """
    pd = spectra.period_data(ps)
    n = ps.n_max

    ent_g = growth.bowen_root(ps, "g")
    exp_h = growth.bowen_root(ps, "h")
    if counting is None:
        cnt_g = growth.counting_estimate_adaptive(
            ps.lengths("g", primitive_only=True), horizons[0]
        )
        cnt_h = growth.counting_estimate_adaptive(
            ps.lengths("h", primitive_only=True), horizons[1]
        )
    else:
        cnt_g, cnt_h = counting

    c2s = c2_truncated(ps, horizons[0], horizons[0])
    c1s = c1_truncated(ps, horizons[1], horizons[1])
    c2d = c2_derivative(pd, n, ent_g.value)
    c1d = c1_derivative(pd, n, exp_h.value)
    if n - 2 in pd.levels:
        c2d_prev = c2_derivative(pd, n - 2, ent_g.value)
        c1d_prev = c1_derivative(pd, n - 2, exp_h.value)
    else:
        c2d_prev, c1d_prev = c2d, c1d
    c1_gap = abs(c1s.value - c1d) + abs(c1d - c1d_prev)
    c2_gap = abs(c2s.value - c2d) + abs(c2d - c2d_prev)

    h_hat = ent_g.value
    d_hat = exp_h.value
    slack_lower = h_hat - c1d * d_hat
    slack_upper = c2d * d_hat - h_hat
    tol_lower = slack_factor * (ent_g.gap + c1d * exp_h.gap + d_hat * c1_gap)
    tol_upper = slack_factor * (ent_g.gap + c2d * exp_h.gap + d_hat * c2_gap)
    holds = slack_lower >= -tol_lower and slack_upper >= -tol_upper

    dom = spectra.domination_check(ps)
    ci_bounded = None
    if dom.all_dominated:
        ci_bounded = max(c1s.value, c2s.value, c1d, c2d) <= 1.0 + 1e-6

    lam = spectra.proportionality_test(ps, prop_tol)
    predicted = d_hat / h_hat
    rigid_ok = None
    if lam is not None:
        scale = max(1.0, abs(lam * d_hat))
        rigid_ok = (
            abs(c1d - lam) <= rigidity_tol
            and abs(c2d - lam) <= rigidity_tol
            and abs(c1s.value - lam) <= rigidity_tol
            and abs(c2s.value - lam) <= rigidity_tol
            and abs(h_hat - lam * d_hat) <= rigidity_tol * scale
        )

    report = StretchReport(
        spec_id=ps.spec_id,
        n_max=n,
        entropy_g=ent_g,
        entropy_g_counting=cnt_g,
        exponent_h=exp_h,
        exponent_h_counting=cnt_h,
        c1_sum=c1s,
        c2_sum=c2s,
        c1_der=c1d,
        c2_der=c2d,
        der_level=n,
        c1_gap=c1_gap,
        c2_gap=c2_gap,
        slack_lower=slack_lower,
        slack_upper=slack_upper,
        slack_tol_lower=tol_lower,
        slack_tol_upper=tol_upper,
        inequality_holds=holds,
        all_dominated=dom.all_dominated,
        domination_violations=len(dom.violations),
        ci_bounded_by_one=ci_bounded,
        rigidity_lambda=lam,
        predicted_ratio=predicted,
        rigidity_consistent=rigid_ok,
        tolerances={
            "slack_factor": slack_factor,
            "proportionality_tol": prop_tol,
            "rigidity_tol": rigidity_tol,
        },
        provenance=provenance or {},
    )
    if strict:
        if not holds:
            raise NumericalInstability(
                f"sandwich violated: lower slack {slack_lower:.3e} "
                f"(tol {tol_lower:.3e}), upper slack {slack_upper:.3e} "
                f"(tol {tol_upper:.3e})"
            )
        if ci_bounded is False:
            raise NumericalInstability(
                "domination holds but a stretch constant exceeds 1 + 1e-6"
            )
        if rigid_ok is False:
            raise NumericalInstability(
                "proportional spectrum fails the rigidity consistency check"
            )
    return report


def inequality_report(
    spec: GroupSpec,
    n_max: int,
    cache_dir: str | None = None,
    threads: int = 1,
    slack_factor: float = 3.0,
    prop_tol: float = 1e-6,
    rigidity_tol: float = 1e-3,
    strict: bool = True,
) -> StretchReport:
    """Full pipeline: verify, build the spectrum, run every estimator, and
    check the sandwich.  Failures carry the name of the failing stage."""

    def stage(name, fn, *args, **kw):
        try:
            return fn(*args, **kw)
        except Exception as exc:
            raise StageFailed(name, exc) from exc

    cert = stage("verify", verify_ping_pong, spec)
    if not cert.ok:
        raise StageFailed("verify", RuntimeError(cert.failure))
    ps = stage(
        "spectrum", spectra.build_paired_spectrum, spec, n_max,
        cache_dir=cache_dir, threads=threads,
    )
    horizons = (
        growth.completeness_horizon(cert, "g", n_max),
        growth.completeness_horizon(cert, "h", n_max),
    )
    counting = (
        stage("counting", growth.counting_estimate_auto, ps, "g", cert),
        stage("counting", growth.counting_estimate_auto, ps, "h", cert),
    )
    return stage(
        "report", report_from_spectrum, ps, horizons,
        slack_factor=slack_factor, prop_tol=prop_tol,
        rigidity_tol=rigidity_tol, counting=counting, strict=strict,
        provenance={
            "spec_hash": spec_hash(spec),
            "n_max": n_max,
            "horizon_g": horizons[0],
            "horizon_h": horizons[1],
            "letter_bound_g": cert.letter_bound("g"),
            "letter_bound_h": cert.letter_bound("h"),
        },
    )
