import cmath
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stretchlab import mobius
from stretchlab.errors import InvalidPoint
from stretchlab.mobius import (
    IDENTITY,
    Isometry,
    IsometryType,
    classify,
    compose,
    displacement,
    translation_length,
)


def finite_complex(scale=2.0):
    part = st.floats(-scale, scale, allow_nan=False, allow_infinity=False)
    return st.builds(complex, part, part)


def nondegenerate_matrices():
    # Keep the determinant away from 0 so normalized entries stay O(1).
    return (
        st.tuples(finite_complex(), finite_complex(), finite_complex(), finite_complex())
        .filter(lambda t: abs(t[0] * t[3] - t[1] * t[2]) > 0.5)
        .map(lambda t: Isometry.of(*t))
    )


@given(nondegenerate_matrices())
def test_normalization_gives_unit_determinant(iso):
    assert abs(iso.det - 1.0) <= 1e-12


@given(nondegenerate_matrices(), nondegenerate_matrices(), nondegenerate_matrices())
@settings(max_examples=50)
def test_composition_associative(a, b, c):
    left = compose(compose(a, b), c)
    right = compose(a, compose(b, c))
    for x, y in zip(left.entries(), right.entries()):
        # Normalized products agree up to an overall sign.
        assert min(abs(x - y), abs(x + y)) <= 1e-12


def test_compose_identity():
    a = Isometry.of(2, 1, 1, 1)
    assert compose(IDENTITY, a) == a


def test_compose_diagonal():
    e = math.e
    d = Isometry.of(e, 0, 0, 1 / e)
    sq = compose(d, d)
    assert abs(sq.a - e * e) <= 1e-12 and abs(sq.d - 1 / (e * e)) <= 1e-12


@given(nondegenerate_matrices())
@settings(max_examples=50)
def test_compose_with_adjugate_inverse_is_identity(a):
    assert compose(a, a.inverse()).is_identity(1e-12)


def test_classify_diagonal_length_two():
    d = Isometry.of(math.e, 0, 0, 1 / math.e)
    c = classify(d)
    assert c.tag is IsometryType.LOXODROMIC
    assert abs(c.translation_length - 2.0) <= 1e-12


def test_classify_identity():
    c = classify(IDENTITY)
    assert c.tag is IsometryType.IDENTITY
    assert c.translation_length is None
    assert classify(Isometry.of(-1, 0, 0, -1)).tag is IsometryType.IDENTITY


def test_classify_parabolic_and_elliptic():
    assert classify(Isometry.of(1, 1, 0, 1)).tag is IsometryType.PARABOLIC
    th = 0.7
    rot = Isometry.of(math.cos(th), -math.sin(th), math.sin(th), math.cos(th))
    assert classify(rot).tag is IsometryType.ELLIPTIC


def test_classify_matches_displacement_limit_oracle():
    # Independent oracle: translation length = lim d(p, A^n p)/n, exact for
    # p on the axis; the apex of the half-circle joining the fixed points
    # lies on it.
    a = Isometry.of(2, 1, 1, 1)
    got = classify(a).translation_length
    disc = cmath.sqrt((a.a - a.d) ** 2 + 4 * a.b * a.c)
    p = (a.a - a.d + disc) / (2 * a.c)
    q = (a.a - a.d - disc) / (2 * a.c)
    apex = (complex((p.real + q.real) / 2), abs(p - q) / 2)
    power = a
    n = 12
    for _ in range(n - 1):
        power = compose(power, a)
    oracle = displacement(power, apex) / n
    assert abs(got - 2.0 * math.acosh(1.5)) <= 1e-12
    assert abs(got - oracle) <= 1e-8


def test_displacement_identity_is_zero():
    assert displacement(IDENTITY) == 0.0


def test_displacement_diagonal_axis():
    d = Isometry.of(math.e, 0, 0, 1 / math.e)
    assert abs(displacement(d) - 2.0) <= 1e-12


def test_displacement_dominates_translation_length_near_axis():
    a = Isometry.of(2, 1, 1, 1)
    length = translation_length(a)
    # Axis endpoints are the fixed points on the real line; points near the
    # axis displace by nearly the translation length.
    disc = cmath.sqrt((a.a - a.d) ** 2 + 4 * a.b * a.c)
    p = (a.a - a.d + disc) / (2 * a.c)
    q = (a.a - a.d - disc) / (2 * a.c)
    mid = (p.real + q.real) / 2
    radius = abs(p - q) / 2
    best = math.inf
    for t in (0.999, 0.9999):
        d = displacement(a, (complex(mid), radius * t))
        assert d >= length - 1e-9
        best = min(best, d)
    assert best - length <= 1e-3


def test_displacement_rejects_boundary_points():
    with pytest.raises(InvalidPoint):
        displacement(IDENTITY, (0j, 0.0))
    with pytest.raises(InvalidPoint):
        displacement(IDENTITY, (0j, -1.0))


@given(nondegenerate_matrices(), nondegenerate_matrices())
@settings(max_examples=50)
def test_translation_length_is_conjugacy_invariant(a, b):
    conj = compose(compose(b, a), b.inverse())
    assert abs(translation_length(a) - translation_length(conj)) <= 1e-10


def test_translation_length_power_rule():
    a = Isometry.of(2, 1, 1, 1)
    base = translation_length(a)
    power = a
    for n in range(2, 9):
        power = compose(power, a)
        assert abs(translation_length(power) - n * base) <= 1e-9


@given(nondegenerate_matrices())
@settings(max_examples=30)
def test_displacement_bounded_below_by_translation_length(a):
    length = translation_length(a)
    for p in [(0j, 1.0), (1 + 1j, 0.5), (-2 + 0j, 3.0)]:
        assert displacement(a, p) >= length - 1e-9


def test_length_analytic_in_entries_fuchsian():
    # Real entries: finite differences at two step sizes agree to 1e-5.
    def length_at(t):
        return translation_length(Isometry.of(2 + t, 1, 1, 1 + t / 2))

    h = 1e-4
    d1 = (length_at(h) - length_at(-h)) / (2 * h)
    d2 = (length_at(h / 2) - length_at(-h / 2)) / h
    assert abs(d1 - d2) <= 1e-5
