"""Acceptance suite: one test per headline criterion, each printing a
PASS line with the measured numbers (run with `pytest -s` to see them).

Expensive artifacts (the rank-2, separation-4 group at word-length cap 12,
and the five perturbed copies) are built once per session.
"""

import json
import math
import time

import numpy as np
import pytest
from scipy.optimize import brentq

from stretchlab import germs, groups, growth, spectra, stretch, thermo
from stretchlab.cli import main as cli_main
from stretchlab.selftest import _parry_frequency, _quadratic_family_check
from stretchlab.spectra import period_data, rescale_h, restrict

N_MAX = 12
EPS = 1e-2
SEEDS = (1, 2, 3, 4, 5)


def announce(num, detail):
    print(f"\nACCEPTANCE {num:02d} PASS: {detail}")


@pytest.fixture(scope="module")
def baseline_report(baseline_spec):
    t0 = time.monotonic()
    rep = stretch.inequality_report(baseline_spec, N_MAX)
    return rep, time.monotonic() - t0


@pytest.fixture(scope="module")
def perturbed_runs(baseline_spec):
    runs = []
    for seed in SEEDS:
        spec = groups.perturb(baseline_spec, EPS, seed=seed)
        cert = groups.verify_ping_pong(spec)
        ps12 = spectra.build_paired_spectrum(spec, N_MAX)
        reports = {}
        for n in (N_MAX - 2, N_MAX):
            ps = restrict(ps12, n)
            horizons = (
                growth.completeness_horizon(cert, "g", n),
                growth.completeness_horizon(cert, "h", n),
            )
            reports[n] = stretch.report_from_spectrum(ps, horizons, strict=False)
        runs.append((seed, reports))
    return runs


def test_criterion_1_totally_geodesic_baseline(baseline_report):
    rep, elapsed = baseline_report
    ratio = rep.entropy_g.value / rep.exponent_h.value
    for value in (rep.c1_sum.value, rep.c2_sum.value, rep.c1_der, rep.c2_der, ratio):
        assert abs(value - 1.0) <= 1e-3
    assert rep.rigidity_lambda == pytest.approx(1.0, abs=1e-9)
    assert rep.rigidity_consistent
    assert elapsed <= 60.0
    announce(
        1,
        f"C1={rep.c1_der:.9f} C2={rep.c2_der:.9f} h/delta={ratio:.9f} "
        f"lambda={rep.rigidity_lambda} in {elapsed:.1f}s",
    )


def test_criterion_2_proportional_rigidity(baseline_ps12, baseline_cert):
    lam = 0.7
    ps = rescale_h(baseline_ps12, lam)
    h_g = growth.completeness_horizon(baseline_cert, "g", N_MAX)
    c2 = stretch.c2_truncated(ps, h_g, h_g)
    c1 = stretch.c1_truncated(ps, lam * h_g, lam * h_g)
    assert abs(c2.value - lam) <= 1e-9
    assert abs(c1.value - lam) <= 1e-9
    pd = period_data(ps)
    ent = growth.bowen_root(ps, "g")
    exp = growth.bowen_root(ps, "h")
    c2d = stretch.c2_derivative(pd, N_MAX, ent.value)
    c1d = stretch.c1_derivative(pd, N_MAX, exp.value)
    assert abs(c2d - lam) <= 1e-5
    assert abs(c1d - lam) <= 1e-5
    assert abs(ent.value - lam * exp.value) <= 1e-3
    announce(
        2,
        f"truncated ({c1.value:.12f}, {c2.value:.12f}), derivative "
        f"({c1d:.8f}, {c2d:.8f}), h - 0.7 delta = {ent.value - lam * exp.value:.2e}",
    )


def test_criterion_3_main_inequality_five_seeds(perturbed_runs):
    details = []
    for seed, reports in perturbed_runs:
        lo = reports[N_MAX]
        hi = reports[N_MAX - 2]
        assert lo.inequality_holds, f"seed {seed} fails the sandwich"
        assert lo.slack_lower >= -lo.slack_tol_lower
        assert lo.slack_upper >= -lo.slack_tol_upper
        assert lo.slack_lower <= hi.slack_lower + 1e-12, f"seed {seed} lower slack grew"
        assert lo.slack_upper <= hi.slack_upper + 1e-12, f"seed {seed} upper slack grew"
        if lo.all_dominated:
            assert lo.c1_der <= lo.c2_der + 1e-6
            assert max(lo.c1_der, lo.c2_der, lo.c1_sum.value, lo.c2_sum.value) <= 1.0 + 1e-6
        assert lo.rigidity_lambda is None
        # Truncated-sum and derivative estimators stay within 5e-3 of each
        # other at the largest admissible truncation.
        assert abs(lo.c2_sum.value - lo.c2_der) <= 5e-3
        assert abs(lo.c1_sum.value - lo.c1_der) <= 5e-3
        details.append(f"seed {seed}: slack=({lo.slack_lower:.2e},{lo.slack_upper:.2e})")
    announce(3, "; ".join(details))


def test_criterion_4_bowen_formula():
    full2 = thermo.full_shift(2)
    residuals = []
    for c in (1.0, 2.0):
        pd = thermo.period_data_from_shift(
            full2, {"roof": thermo.constant_potential(full2, c)}, [12, 10]
        )
        root = thermo.bowen_solve(pd, "roof")
        assert root.residual <= 1e-10
        assert abs(root.value - math.log(2.0) / c) <= 1e-10
        residuals.append(root.residual)
    pd = thermo.period_data_from_shift(
        full2, {"roof": thermo.symbol_potential(full2, [1.0, 2.0])}, [12, 10]
    )
    root = thermo.bowen_solve(pd, "roof")
    oracle = brentq(
        lambda s: math.exp(-s) + math.exp(-2.0 * s) - 1.0, 0.1, 2.0, xtol=1e-14
    )
    assert abs(root.value - oracle) <= 1e-10
    announce(
        4,
        f"constant-roof residuals {max(residuals):.1e}, two-valued root "
        f"matches e^-s + e^-2s = 1 to {abs(root.value - oracle):.1e}",
    )


def test_criterion_5_abramov_consistency():
    full2 = thermo.full_shift(2)
    golden = thermo.golden_mean_shift()
    cases = [
        (full2, thermo.constant_potential(full2, 2.0), 12),
        (full2, thermo.symbol_potential(full2, [1.0, 2.0]), 12),
        (golden, thermo.constant_potential(golden, 1.0), 20),
        (golden, thermo.symbol_potential(golden, [1.0, 2.0]), 16),
    ]
    worst = 0.0
    for shift, roof, level in cases:
        res = thermo.abramov_check(shift, roof, level)
        assert res.residual <= 1e-8
        worst = max(worst, res.residual)
    announce(5, f"worst residual {worst:.2e} over 4 roof/shift pairs")


def test_criterion_6_pressure_derivatives():
    full2 = thermo.full_shift(2)
    rng = np.random.default_rng(42)
    worst = 0.0
    for _ in range(10):
        f = thermo.symbol_potential(full2, rng.uniform(-1.0, 1.0, 2))
        g = thermo.symbol_potential(full2, rng.uniform(-1.0, 1.0, 2))
        direct = thermo.equilibrium_average(full2, f, g)  # raises beyond 1e-6
        h = 1e-5
        fd = (
            thermo.transfer_pressure(full2, thermo.affine_potential(full2, f, h, g))
            - thermo.transfer_pressure(full2, thermo.affine_potential(full2, f, -h, g))
        ) / (2 * h)
        worst = max(worst, abs(direct - fd))
    assert worst <= 1e-6
    cob = thermo.coboundary_potential(full2, [0.8, -0.5])
    v_cob = thermo.variance(full2, thermo.constant_potential(full2, 0.0), cob)
    assert abs(v_cob) <= 1e-8
    v_coin = thermo.variance(
        full2,
        thermo.constant_potential(full2, 0.0),
        thermo.symbol_potential(full2, [1.0, -1.0]),
    )
    assert abs(v_coin - 1.0) <= 1e-6
    announce(
        6,
        f"10 random potentials worst gap {worst:.2e}; coboundary variance "
        f"{v_cob:.1e}; fair-coin variance off by {abs(v_coin - 1.0):.2e}",
    )


def test_criterion_7_equidistribution():
    golden = thermo.golden_mean_shift()
    pd = thermo.period_data_from_shift(
        golden, {"ind0": thermo.indicator_potential(golden, 0)}, [16]
    )
    got = thermo.equidistribution_average(pd, "ind0", 16)
    want = _parry_frequency(golden, 0)
    assert abs(got - want) < 1e-2
    announce(7, f"symbol-0 frequency {got:.6f} vs eigenvector {want:.6f}")


def test_criterion_8_pressure_metric_consistency():
    gaps = []
    for shift in (thermo.full_shift(2), thermo.golden_mean_shift()):
        ok, detail = _quadratic_family_check(shift)
        assert ok, detail
        gaps.append(detail)
    announce(8, " | ".join(gaps))


def test_criterion_9_germ_ray():
    c = 1.0
    n = 16
    beta = np.full((n, n), c)
    for t in (0.2, 0.5):
        u = germs.solve_gauss(beta, t)
        want = 0.5 * math.log(germs.constant_ray_closed_form(c, t))
        assert np.abs(u - want).max() <= 1e-8
    ray = germs.build_ray(beta, 6 * 0.0025, 6)
    diag = germs.ray_diagnostics(ray)
    assert diag.udot0_max_abs <= 1e-6
    assert (diag.udot_max < 0.0).all()
    assert abs(diag.kappa - 0.5) <= 1e-3
    fold = germs.locate_fold(beta)
    assert abs(fold.tau - 1.0 / (2.0 * c)) <= 1e-4
    assert "kappa = 1" in germs.AF_FACTOR_NOTE  # the competing normalization
    assert "1/2" in germs.AF_FACTOR_NOTE
    announce(
        9,
        f"closed-form match, udot0 {diag.udot0_max_abs:.1e}, kappa "
        f"{diag.kappa:.6f}, fold t^2 {fold.tau:.6f}",
    )


def test_criterion_10_deterministic_artifacts(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text(
        "[group]\nrank = 2\nseparation = 4.0\neps = 0.01\nseed = 2\n"
        "[spectrum]\nn_max = 10\n"
        "[germ]\ngrid = 12\nbeta = constant\nc = 1.0\nt_max = 0.3\nsteps = 20\n"
    )
    pairs = []
    for sub, names in [
        ("spectrum", ["spectrum.csv"]),
        ("stretch", ["stretch.json"]),
        ("germ", ["germ_ray.csv", "germ_uddot0.csv", "germ.json"]),
        ("report", ["report.json", "log_counts.svg", "orbit_pressure.svg"]),
    ]:
        for out in ("o1", "o2"):
            code = cli_main(
                [
                    sub,
                    "--config",
                    str(cfg),
                    "--out",
                    str(tmp_path / out),
                    "--cache",
                    str(tmp_path / "cache"),
                ]
            )
            assert code == 0
        for name in names:
            a = (tmp_path / "o1" / name).read_bytes()
            b = (tmp_path / "o2" / name).read_bytes()
            assert a == b, f"{name} differs between runs"
            pairs.append(name)
    announce(10, f"byte-identical: {', '.join(pairs)}")
