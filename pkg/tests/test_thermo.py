import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from stretchlab.errors import (
    BracketFailure,
    NoOrbits,
    NotInPressureZeroSlice,
)
from stretchlab import thermo
from stretchlab.thermo import (
    MarkovShift,
    Potential,
    abramov_check,
    affine_potential,
    allowed_words,
    bowen_solve,
    coboundary_potential,
    constant_potential,
    equidistribution_average,
    equilibrium_average,
    full_shift,
    gibbs_data,
    golden_mean_shift,
    indicator_potential,
    lift_potential,
    livsic_check,
    markov_entropy,
    orbit_pressure,
    period_data_from_shift,
    pressure_metric_norm,
    scale_potential,
    symbol_potential,
    transfer_pressure,
    variance,
)

FULL2 = full_shift(2)
GOLDEN = golden_mean_shift()
PHI = (1.0 + math.sqrt(5.0)) / 2.0


def symbol_values(m=2, lo=-1.5, hi=1.5):
    return st.lists(
        st.floats(lo, hi, allow_nan=False, allow_infinity=False),
        min_size=m,
        max_size=m,
    )


# ---------------------------------------------------------------------------
# shifts


def test_shift_rejects_reducible_and_periodic():
    with pytest.raises(ValueError):
        MarkovShift(((1, 0), (0, 1)))
    with pytest.raises(ValueError):
        MarkovShift(((0, 1), (1, 0)))


def test_allowed_words_counts():
    assert len(allowed_words(GOLDEN, 1)) == 2
    # Admissible golden-mean words of length n are Fibonacci-many.
    fib = [2, 3, 5, 8, 13]
    for n, f in enumerate(fib, start=1):
        assert len(allowed_words(GOLDEN, n)) == f


def test_free_group_shift_cyclic_counts():
    shift = thermo.free_group_shift(2)
    for n in range(1, 8):
        words = thermo._cyclic_words_array(shift, n)
        assert len(words) == 3**n + 2 + (-1) ** n


# ---------------------------------------------------------------------------
# transfer pressure


def test_pressure_full_shift_zero_potential():
    p = transfer_pressure(FULL2, constant_potential(FULL2, 0.0))
    assert abs(p - math.log(2.0)) <= 1e-12


def test_pressure_full_shift_depth1():
    a, b = 0.4, -0.3
    p = transfer_pressure(FULL2, symbol_potential(FULL2, [a, b]))
    assert abs(p - math.log(math.exp(a) + math.exp(b))) <= 1e-12


def test_pressure_golden_mean_char_poly_oracle():
    # Leading root of x^2 - x - 1 by an independent scalar solve.
    root = brentq(lambda x: x * x - x - 1.0, 1.0, 2.0, xtol=1e-15)
    p = transfer_pressure(GOLDEN, constant_potential(GOLDEN, 0.0))
    assert abs(p - math.log(root)) <= 1e-12


def test_pressure_depth_lift_consistent():
    pot = symbol_potential(GOLDEN, [0.2, -0.5])
    p1 = transfer_pressure(GOLDEN, pot)
    p3 = transfer_pressure(GOLDEN, lift_potential(GOLDEN, pot, 3))
    assert abs(p1 - p3) <= 1e-12


@given(symbol_values(), symbol_values())
@settings(max_examples=40, deadline=None)
def test_pressure_monotone(fv, gv):
    hi = [max(a, b) for a, b in zip(fv, gv)]
    p_hi = transfer_pressure(FULL2, symbol_potential(FULL2, hi))
    p_f = transfer_pressure(FULL2, symbol_potential(FULL2, fv))
    assert p_hi >= p_f - 1e-12


@given(symbol_values(), symbol_values())
@settings(max_examples=25, deadline=None)
def test_pressure_convex_along_lines(fv, gv):
    f = symbol_potential(FULL2, fv)
    g = symbol_potential(FULL2, gv)

    def p(t):
        return transfer_pressure(FULL2, affine_potential(FULL2, f, t, g))

    h = 0.05
    assert p(h) - 2 * p(0.0) + p(-h) >= -1e-9


def test_pressure_coboundary_invariance():
    f = symbol_potential(GOLDEN, [0.3, -0.2])
    cob = coboundary_potential(GOLDEN, [0.9, -1.4])
    p0 = transfer_pressure(GOLDEN, f)
    p1 = transfer_pressure(GOLDEN, affine_potential(GOLDEN, f, 1.0, cob))
    assert abs(p0 - p1) <= 1e-10
    g = indicator_potential(GOLDEN, 1)
    a0 = equilibrium_average(GOLDEN, f, g)
    a1 = equilibrium_average(GOLDEN, affine_potential(GOLDEN, f, 1.0, cob), g)
    assert abs(a0 - a1) <= 1e-8


# ---------------------------------------------------------------------------
# Gibbs data


def test_gibbs_invariants():
    gd = gibbs_data(GOLDEN, symbol_potential(GOLDEN, [0.25, -0.4]))
    assert abs(gd.edge_measure.sum() - 1.0) <= 1e-12
    assert np.abs(gd.edge_measure.sum(0) - gd.node_measure).max() <= 1e-12
    assert np.abs(gd.edge_measure.sum(1) - gd.node_measure).max() <= 1e-12
    assert (gd.edge_measure[GOLDEN.matrix > 0] > 0).all()


def test_equilibrium_average_of_one():
    got = equilibrium_average(GOLDEN, symbol_potential(GOLDEN, [0.7, 0.1]),
                              constant_potential(GOLDEN, 1.0))
    assert abs(got - 1.0) <= 1e-12


def test_equilibrium_average_full2_symmetry():
    got = equilibrium_average(FULL2, constant_potential(FULL2, 0.0),
                              indicator_potential(FULL2, 0))
    assert abs(got - 0.5) <= 1e-12


def test_equilibrium_average_golden_parry_eig_oracle():
    t = GOLDEN.matrix
    w, vr = np.linalg.eig(t)
    i = int(np.argmax(w.real))
    v = np.abs(vr[:, i].real)
    u = np.abs(np.linalg.eig(t.T)[1][:, i].real)
    want = float((u * v)[0] / (u * v).sum())
    got = equilibrium_average(GOLDEN, constant_potential(GOLDEN, 0.0),
                              indicator_potential(GOLDEN, 0))
    assert abs(got - want) <= 1e-10


@given(symbol_values(), symbol_values())
@settings(max_examples=25, deadline=None)
def test_measure_average_equals_pressure_derivative(fv, gv):
    # equilibrium_average raises DerivativeMismatch internally if the two
    # routes drift past 1e-6; surviving the call is the assertion.
    equilibrium_average(
        FULL2, symbol_potential(FULL2, fv), symbol_potential(FULL2, gv)
    )


# ---------------------------------------------------------------------------
# variance and the pressure metric


def test_variance_of_constant_is_zero():
    assert variance(FULL2, constant_potential(FULL2, 0.0),
                    constant_potential(FULL2, 2.2)) == 0.0


def test_variance_of_coboundary_vanishes():
    cob = coboundary_potential(FULL2, [0.8, -0.3])
    assert abs(variance(FULL2, constant_potential(FULL2, 0.0), cob)) <= 1e-8


def test_variance_fair_coin():
    v = variance(FULL2, constant_potential(FULL2, 0.0),
                 symbol_potential(FULL2, [1.0, -1.0]))
    assert abs(v - 1.0) <= 1e-6


def test_pressure_metric_requires_zero_slice():
    with pytest.raises(NotInPressureZeroSlice):
        pressure_metric_norm(FULL2, constant_potential(FULL2, 0.0),
                             symbol_potential(FULL2, [1.0, -1.0]))
    with pytest.raises(NotInPressureZeroSlice):
        pressure_metric_norm(FULL2, constant_potential(FULL2, -math.log(2.0)),
                             constant_potential(FULL2, 1.0))


def test_pressure_metric_fair_coin_value():
    res = pressure_metric_norm(
        FULL2,
        constant_potential(FULL2, -math.log(2.0)),
        symbol_potential(FULL2, [1.0, -1.0]),
    )
    assert abs(res.norm_sq - 1.0 / math.log(2.0)) <= 1e-6


def test_pressure_metric_coboundary_velocity_is_null():
    res = pressure_metric_norm(
        FULL2,
        constant_potential(FULL2, -math.log(2.0)),
        coboundary_potential(FULL2, [0.5, -0.9]),
    )
    assert abs(res.norm_sq) <= 1e-8


# ---------------------------------------------------------------------------
# periodic-orbit data


def test_orbit_pressure_constant_roof():
    pd = period_data_from_shift(FULL2, {"roof": constant_potential(FULL2, 1.3)}, [9])
    got = orbit_pressure(pd, "roof", 0.7, 9)
    assert abs(got - (math.log(2.0) - 0.7 * 1.3)) <= 1e-12


def test_orbit_pressure_missing_level():
    pd = period_data_from_shift(FULL2, {"roof": constant_potential(FULL2, 1.0)}, [4])
    with pytest.raises(NoOrbits):
        orbit_pressure(pd, "roof", 0.0, 5)


@given(st.floats(0.0, 2.0), st.floats(0.01, 1.0))
@settings(max_examples=25, deadline=None)
def test_orbit_pressure_strictly_decreasing(s, ds):
    pd = _GOLDEN_PD
    n = 8
    lo = orbit_pressure(pd, "roof", s + ds, n)
    hi = orbit_pressure(pd, "roof", s, n)
    min_per = pd.level(n).sums["roof"].min() / n
    assert hi - lo >= ds * min_per - 1e-12


_GOLDEN_PD = period_data_from_shift(
    GOLDEN, {"roof": symbol_potential(GOLDEN, [1.0, 2.0])}, [8]
)


def test_bowen_constant_roofs_exact():
    for c in (1.0, 2.0):
        pd = period_data_from_shift(FULL2, {"roof": constant_potential(FULL2, c)}, [12, 10])
        r = bowen_solve(pd, "roof")
        assert abs(r.value - math.log(2.0) / c) <= 1e-10
        assert r.residual <= 1e-10


def test_bowen_two_valued_scalar_oracle():
    pd = period_data_from_shift(FULL2, {"roof": symbol_potential(FULL2, [1.0, 2.0])},
                                [12, 10])
    r = bowen_solve(pd, "roof")
    want = brentq(lambda s: math.exp(-s) + math.exp(-2 * s) - 1.0, 0.1, 1.5,
                  xtol=1e-14)
    assert abs(r.value - want) <= 1e-10
    assert abs(r.value - math.log(PHI)) <= 1e-10


def test_bowen_scaling_covariance():
    lam = 1.7
    pd1 = period_data_from_shift(FULL2, {"roof": symbol_potential(FULL2, [1.0, 2.0])},
                                 [10])
    pd2 = period_data_from_shift(
        FULL2, {"roof": symbol_potential(FULL2, [lam, 2.0 * lam])}, [10]
    )
    r1 = bowen_solve(pd1, "roof")
    r2 = bowen_solve(pd2, "roof")
    assert abs(r2.value - r1.value / lam) <= 1e-9


def test_bowen_rejects_nonpositive_data():
    pd = period_data_from_shift(FULL2, {"roof": symbol_potential(FULL2, [1.0, -1.0])},
                                [8])
    with pytest.raises(BracketFailure):
        bowen_solve(pd, "roof")


def test_equidistribution_trivials():
    pd = period_data_from_shift(
        FULL2,
        {"one": constant_potential(FULL2, 1.0), "ind": indicator_potential(FULL2, 0)},
        [11],
    )
    assert equidistribution_average(pd, "one", 11) == 1.0
    assert abs(equidistribution_average(pd, "ind", 11) - 0.5) <= 1e-14


def test_livsic_verdicts():
    cob = coboundary_potential(FULL2, [1.1, -0.7])
    pd = period_data_from_shift(
        FULL2,
        {"cob": cob, "pos": constant_potential(FULL2, 0.4)},
        [6, 8],
    )
    assert livsic_check(pd, "cob").kind == "all_zero"
    assert livsic_check(pd, "pos").kind == "all_positive"
    mixed = period_data_from_shift(
        FULL2, {"pm": symbol_potential(FULL2, [1.0, -1.0])}, [6]
    )
    v = livsic_check(mixed, "pm")
    assert v.kind == "mixed" and v.witnesses


def test_abramov_residuals():
    assert abramov_check(FULL2, constant_potential(FULL2, 2.0), 12).residual <= 1e-10
    assert abramov_check(FULL2, symbol_potential(FULL2, [1.0, 2.0]), 12).residual <= 1e-8
    r = abramov_check(GOLDEN, constant_potential(GOLDEN, 1.0), 20)
    assert r.residual <= 1e-8
    assert abs(r.h_star - math.log(PHI)) <= 1e-8


def test_markov_entropy_of_maximal_measure():
    gd = gibbs_data(FULL2, constant_potential(FULL2, 0.0))
    assert abs(markov_entropy(gd) - math.log(2.0)) <= 1e-12
