"""Named self-checks for the thermodynamic engine.

Each check recomputes a quantity two independent ways (closed form, scalar
root-find, eigen decomposition, or brute enumeration) and compares.  The
CLI surfaces these as `thermo-selftest`; the pytest suite runs them too.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import groups, spectra, thermo
from .thermo import (
    MarkovShift,
    OrbitLevel,
    PeriodData,
    Potential,
    abramov_check,
    affine_potential,
    bowen_root_transfer,
    bowen_solve,
    coboundary_potential,
    constant_potential,
    equidistribution_average,
    equilibrium_average,
    full_shift,
    gibbs_data,
    golden_mean_shift,
    indicator_potential,
    livsic_check,
    orbit_pressure,
    period_data_from_shift,
    pressure_metric_norm,
    scale_potential,
    symbol_potential,
    transfer_pressure,
    variance,
)

GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str


def _close(a: float, b: float, tol: float) -> bool:
    return abs(a - b) <= tol


def _fuchsian_fixture():
    spec = groups.schottky_fuchsian(2, 4.0, seed=0)
    ps = spectra.build_paired_spectrum(spec, 6)
    return spec, ps


def _parry_frequency(shift: MarkovShift, symbol: int) -> float:
    """Stationary symbol frequency of the maximal measure, straight from
    an eigen decomposition of the transition matrix."""
    t = shift.matrix
    w, vr = np.linalg.eig(t)
    i = int(np.argmax(w.real))
    v = np.abs(vr[:, i].real)
    w2, vl = np.linalg.eig(t.T)
    j = int(np.argmax(w2.real))
    u = np.abs(vl[:, j].real)
    pi = u * v / (u @ v)
    return float(pi[symbol])


def run_selftests() -> list[CheckResult]:
    checks: list[CheckResult] = []

    def record(name: str, ok: bool, detail: str):
        checks.append(CheckResult(name, bool(ok), detail))

    full2 = full_shift(2)
    golden = golden_mean_shift()

    # -- transfer pressure ------------------------------------------------
    p = transfer_pressure(full2, constant_potential(full2, 0.0))
    record("transfer/full2-zero", _close(p, math.log(2.0), 1e-12), f"{p:.15g}")

    a, b = 0.3, -0.2
    p = transfer_pressure(full2, symbol_potential(full2, [a, b]))
    want = math.log(math.exp(a) + math.exp(b))
    record("transfer/full2-depth1", _close(p, want, 1e-12), f"{p:.15g} vs {want:.15g}")

    p = transfer_pressure(golden, constant_potential(golden, 0.0))
    record("transfer/golden-zero", _close(p, math.log(GOLDEN), 1e-12), f"{p:.15g}")

    # -- orbit pressure ---------------------------------------------------
    roof = constant_potential(full2, 1.7)
    pd = period_data_from_shift(full2, {"roof": roof}, [10])
    got = orbit_pressure(pd, "roof", 0.6, 10)
    want = math.log(2.0) - 0.6 * 1.7
    record("orbit/constant-roof", _close(got, want, 1e-12), f"{got:.15g}")

    spec, ps = _fuchsian_fixture()
    pdg = spectra.period_data(ps)
    gaps = [abs(orbit_pressure(pdg, "g", 0.0, n) - math.log(3.0)) for n in (3, 6)]
    record(
        "orbit/level-entropy-to-log3",
        gaps[1] < gaps[0] and gaps[1] < 0.2,
        f"gaps {gaps[0]:.3g} -> {gaps[1]:.3g}",
    )

    same = all(
        _close(
            orbit_pressure(pdg, "g", s, n), orbit_pressure(pdg, "h", s, n), 1e-14
        )
        for s in (0.0, 0.3, 0.9)
        for n in (4, 6)
    )
    record("orbit/baseline-sides-equal", same, "l_g data == l_h data")

    # -- Bowen roots --------------------------------------------------------
    pd = period_data_from_shift(full2, {"roof": constant_potential(full2, 1.0)}, [12, 10])
    r = bowen_solve(pd, "roof")
    record(
        "bowen/constant-1",
        _close(r.value, math.log(2.0), 1e-10) and r.residual <= 1e-10,
        f"{r.value:.15g} residual {r.residual:.2e}",
    )

    pd = period_data_from_shift(full2, {"roof": constant_potential(full2, 2.0)}, [12, 10])
    r = bowen_solve(pd, "roof")
    record(
        "bowen/constant-2",
        _close(r.value, math.log(2.0) / 2.0, 1e-10),
        f"{r.value:.15g}",
    )

    two = symbol_potential(full2, [1.0, 2.0])
    pd = period_data_from_shift(full2, {"roof": two}, [12, 10])
    r = bowen_solve(pd, "roof")
    oracle = brentq(
        lambda s: math.exp(-s) + math.exp(-2.0 * s) - 1.0, 0.1, 2.0, xtol=1e-14
    )
    record(
        "bowen/two-valued-vs-scalar-oracle",
        _close(r.value, oracle, 1e-10),
        f"{r.value:.15g} vs {oracle:.15g}",
    )

    # -- equilibrium averages ----------------------------------------------
    f = symbol_potential(golden, [0.2, -0.1])
    got = equilibrium_average(golden, f, constant_potential(golden, 1.0))
    record("average/unit", _close(got, 1.0, 1e-12), f"{got:.15g}")

    got = equilibrium_average(full2, constant_potential(full2, 0.0),
                              indicator_potential(full2, 0))
    record("average/full2-symmetry", _close(got, 0.5, 1e-12), f"{got:.15g}")

    got = equilibrium_average(golden, constant_potential(golden, 0.0),
                              indicator_potential(golden, 0))
    want = _parry_frequency(golden, 0)
    record("average/golden-parry", _close(got, want, 1e-10), f"{got:.15g} vs {want:.15g}")

    # -- variance ------------------------------------------------------------
    v = variance(full2, constant_potential(full2, 0.0), constant_potential(full2, 3.3))
    record("variance/constant", v == 0.0, f"{v:.3e}")

    cob = coboundary_potential(full2, [0.7, -0.4])
    v = variance(full2, constant_potential(full2, 0.0), cob)
    record("variance/coboundary", abs(v) <= 1e-8, f"{v:.3e}")

    v = variance(full2, constant_potential(full2, 0.0),
                 symbol_potential(full2, [1.0, -1.0]))
    record("variance/fair-coin", _close(v, 1.0, 1e-6), f"{v:.12g}")

    # -- pressure metric -----------------------------------------------------
    c0 = constant_potential(full2, -math.log(2.0))
    res = pressure_metric_norm(full2, c0, cob)
    record("pressure-metric/coboundary-velocity", abs(res.norm_sq) <= 1e-8,
           f"{res.norm_sq:.3e}")

    res = pressure_metric_norm(full2, c0, symbol_potential(full2, [1.0, -1.0]))
    want = 1.0 / math.log(2.0)
    record("pressure-metric/fair-coin", _close(res.norm_sq, want, 1e-6),
           f"{res.norm_sq:.12g} vs {want:.12g}")

    ok, detail = _quadratic_family_check(full2)
    record("pressure-metric/bowen-hessian-family", ok, detail)

    # -- equidistribution ----------------------------------------------------
    pd = period_data_from_shift(
        golden,
        {"one": constant_potential(golden, 1.0), "ind0": indicator_potential(golden, 0)},
        [10, 16],
    )
    got = equidistribution_average(pd, "one", 10)
    record("equidistribution/unit", got == 1.0, f"{got:.15g}")

    pd2 = period_data_from_shift(full2, {"ind0": indicator_potential(full2, 0)}, [12])
    got = equidistribution_average(pd2, "ind0", 12)
    record("equidistribution/full2-half", _close(got, 0.5, 1e-14), f"{got:.15g}")

    got = equidistribution_average(pd, "ind0", 16)
    want = _parry_frequency(golden, 0)
    record("equidistribution/golden-gap", abs(got - want) < 1e-2,
           f"{got:.8g} vs {want:.8g}")

    # -- cohomology checks ----------------------------------------------------
    pd = period_data_from_shift(full2, {"cob": cob}, [8, 10])
    v = livsic_check(pd, "cob")
    record("livsic/coboundary-all-zero", v.kind == "all_zero", v.kind)

    v = livsic_check(pdg, "h")
    record("livsic/lengths-all-positive", v.kind == "all_positive", v.kind)

    diff_levels = {
        n: OrbitLevel(lev.mult, {"diff": lev.sums["g"] - lev.sums["h"]}, lev.primitive)
        for n, lev in pdg.levels.items()
    }
    v = livsic_check(PeriodData(pdg.n_max, diff_levels), "diff")
    record("livsic/baseline-difference-zero", v.kind == "all_zero", v.kind)

    # -- time-change consistency ----------------------------------------------
    r = abramov_check(full2, constant_potential(full2, 2.0), 12)
    record(
        "abramov/full2-constant",
        r.residual <= 1e-10 and _close(r.h_star, math.log(2.0) / 2.0, 1e-9),
        f"h* {r.h_star:.12g} residual {r.residual:.2e}",
    )

    r = abramov_check(full2, two, 12)
    record("abramov/full2-two-valued", r.residual <= 1e-8,
           f"residual {r.residual:.2e}")

    r = abramov_check(golden, constant_potential(golden, 1.0), 20)
    record(
        "abramov/golden-constant",
        r.residual <= 1e-8 and _close(r.h_star, math.log(GOLDEN), 1e-8),
        f"h* {r.h_star:.12g} residual {r.residual:.2e}",
    )

    gtwo = symbol_potential(golden, [1.0, 2.0])
    r = abramov_check(golden, gtwo, 16)
    oracle = brentq(
        lambda s: math.exp(-s) + math.exp(-3.0 * s) - 1.0, 0.1, 2.0, xtol=1e-14
    )
    record(
        "abramov/golden-two-valued",
        r.residual <= 1e-8 and _close(r.h_star, oracle, 1e-8),
        f"h* {r.h_star:.12g} vs {oracle:.12g}, residual {r.residual:.2e}",
    )

    return checks


def _quadratic_family_check(shift: MarkovShift) -> tuple[bool, str]:
    """Velocity norm of the pressure-zero family c_t = -h(t) (F0 + t G):
    jet form built from a finite-difference Hessian of the Bowen root must
    match the variance form."""
    f0 = constant_potential(shift, 1.0)
    g = indicator_potential(shift, 0)

    def root(t: float) -> float:
        return bowen_root_transfer(
            shift, affine_potential(shift, f0, t, g), tol=1e-13
        )

    h0 = root(0.0)

    def second_diff(dt: float) -> float:
        return (root(dt) - 2.0 * h0 + root(-dt)) / (dt * dt)

    dt = 6e-3
    hdd = (4.0 * second_diff(dt / 2.0) - second_diff(dt)) / 3.0
    c0 = scale_potential(f0, -h0)
    gd = gibbs_data(shift, affine_potential(shift, c0, 0.0))
    mean_g = thermo._edge_average(shift, gd, g)
    hd = -h0 * mean_g  # exact first derivative of the root at t = 0
    cdot = affine_potential(shift, scale_potential(f0, -hd), -h0, g)
    cddot = affine_potential(
        shift, scale_potential(f0, -hdd), -2.0 * hd, g
    )
    try:
        res = pressure_metric_norm(shift, c0, cdot, cddot)
    except Exception as exc:
        return False, f"raised {exc}"
    return (
        res.jet_form is not None and abs(res.norm_sq - res.jet_form) <= 1e-6,
        f"variance {res.norm_sq:.10g} vs jet {res.jet_form:.10g}",
    )
