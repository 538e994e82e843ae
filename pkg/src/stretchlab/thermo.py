"""Thermodynamic formalism over subshifts of finite type and over raw
periodic-orbit data.

Two pressure backends are kept in sync: the transfer operator (exact for
locally constant weights) and periodic-orbit sums (the only backend that
sees genuine geodesic lengths, which are not locally constant at any finite
depth).  Cross-checks between the two appear throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import (
    BracketFailure,
    DerivativeMismatch,
    EigenStall,
    NoOrbits,
    NotInPressureZeroSlice,
    NumericalInstability,
)

POWER_TOL = 1e-13
POWER_CAP = 100_000
FD_FIRST_STEP = 1e-5
FD_SECOND_STEP = 1e-3
BISECT_WIDTH = 1e-10


# ---------------------------------------------------------------------------
# shifts and potentials

@dataclass(frozen=True)
class MarkovShift:
    """Subshift of finite type on symbols 0..m-1 with a 0/1 transition
    matrix, required to be irreducible and aperiodic."""

    transitions: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        t = np.asarray(self.transitions)
        if t.ndim != 2 or t.shape[0] != t.shape[1]:
            raise ValueError("transition matrix must be square")
        if not np.isin(t, (0, 1)).all():
            raise ValueError("transition entries must be 0 or 1")
        if not _is_primitive(t):
            raise ValueError("transition matrix must be irreducible and aperiodic")

    @property
    def m(self) -> int:
        return len(self.transitions)

    @property
    def matrix(self) -> np.ndarray:
        return np.asarray(self.transitions, dtype=float)


def _is_primitive(t: np.ndarray) -> bool:
    m = len(t)
    b = t.astype(bool)
    p = b.copy()
    # Wielandt: a primitive matrix has a fully positive power by (m-1)^2 + 1.
    for _ in range((m - 1) ** 2 + 1):
        if p.all():
            return True
        p = p @ b
    return bool(p.all())


def full_shift(m: int) -> MarkovShift:
    return MarkovShift(tuple(tuple(1 for _ in range(m)) for _ in range(m)))


def golden_mean_shift() -> MarkovShift:
    return MarkovShift(((1, 1), (1, 0)))


def free_group_shift(k: int) -> MarkovShift:
    """Letter shift of the rank-k free group: 2k symbols, transition
    forbidden exactly between a letter and its inverse (codes c, c^1)."""
    m = 2 * k
    rows = []
    for c in range(m):
        rows.append(tuple(0 if d == c ^ 1 else 1 for d in range(m)))
    return MarkovShift(tuple(rows))


def allowed_words(shift: MarkovShift, length: int) -> list[tuple[int, ...]]:
    """All admissible words of the given length, lexicographic order."""
    if length < 1:
        raise ValueError("length must be >= 1")
    t = shift.transitions
    words = [(s,) for s in range(shift.m)]
    for _ in range(length - 1):
        words = [w + (s,) for w in words for s in range(shift.m) if t[w[-1]][s]]
    return words


@dataclass(frozen=True)
class Potential:
    """Locally constant weight of depth r: one value per admissible r-word."""

    depth: int
    weights: dict[tuple[int, ...], float]

    def value(self, word: tuple[int, ...]) -> float:
        return self.weights[word[: self.depth]]


def constant_potential(shift: MarkovShift, c: float) -> Potential:
    return Potential(1, {(s,): float(c) for s in range(shift.m)})


def symbol_potential(shift: MarkovShift, values) -> Potential:
    if len(values) != shift.m:
        raise ValueError("need one value per symbol")
    return Potential(1, {(s,): float(values[s]) for s in range(shift.m)})


def indicator_potential(shift: MarkovShift, symbol: int) -> Potential:
    return symbol_potential(shift, [1.0 if s == symbol else 0.0 for s in range(shift.m)])


def coboundary_potential(shift: MarkovShift, v) -> Potential:
    """The depth-2 observable V(next) - V(current) for depth-1 V."""
    if len(v) != shift.m:
        raise ValueError("need one value per symbol")
    w = {}
    for x, y in allowed_words(shift, 2):
        w[(x, y)] = float(v[y]) - float(v[x])
    return Potential(2, w)


def lift_potential(shift: MarkovShift, pot: Potential, depth: int) -> Potential:
    if depth < pot.depth:
        raise ValueError("cannot lower potential depth")
    if depth == pot.depth:
        return pot
    w = {tuple(u): pot.value(tuple(u)) for u in allowed_words(shift, depth)}
    return Potential(depth, w)


def affine_potential(
    shift: MarkovShift, f: Potential, t: float = 0.0, g: Potential | None = None
) -> Potential:
    """The potential f + t*g at the common depth."""
    if g is None or t == 0.0:
        return f
    depth = max(f.depth, g.depth)
    fl = lift_potential(shift, f, depth)
    gl = lift_potential(shift, g, depth)
    return Potential(depth, {w: fl.weights[w] + t * gl.weights[w] for w in fl.weights})


def scale_potential(pot: Potential, a: float) -> Potential:
    return Potential(pot.depth, {w: a * v for w, v in pot.weights.items()})


# ---------------------------------------------------------------------------
# transfer operator

def _weighted_matrix(shift: MarkovShift, pot: Potential):
    """States are admissible (r-1)-words at depth r = max(pot depth, 2);
    the entry for the edge u -> u' is exp(weight of the overlapping r-word),
    shifted by the max weight (returned separately) to keep entries tame."""
    depth = max(pot.depth, 2)
    pot = lift_potential(shift, pot, depth)
    states = allowed_words(shift, depth - 1)
    index = {s: i for i, s in enumerate(states)}
    wmax = max(pot.weights.values())
    mat = np.zeros((len(states), len(states)))
    for word, w in sorted(pot.weights.items()):
        i = index[word[:-1]]
        j = index[word[1:]]
        mat[i, j] = math.exp(w - wmax)
    return states, mat, wmax


def _power_iteration(mat: np.ndarray):
    """Leading eigenvalue and right eigenvector of a primitive nonnegative
    matrix, to relative tolerance POWER_TOL, by Collatz-Wielandt bounds."""
    v = np.ones(len(mat))
    lam = 1.0
    for _ in range(POWER_CAP):
        w = mat @ v
        ratios = w / v
        lo, hi = ratios.min(), ratios.max()
        lam = 0.5 * (lo + hi)
        v = w / w.max()
        if hi - lo <= POWER_TOL * lam:
            return lam, v
    raise EigenStall(
        f"power iteration stalled after {POWER_CAP} iterations "
        f"(gap {hi - lo:.3e} at eigenvalue {lam:.6g})"
    )


def transfer_pressure(shift: MarkovShift, pot: Potential) -> float:
    """log of the leading eigenvalue of the weighted cylinder operator."""
    _, mat, wmax = _weighted_matrix(shift, pot)
    lam, _ = _power_iteration(mat)
    return math.log(lam) + wmax


@dataclass(frozen=True)
class GibbsData:
    """Spectral data of the weighted operator: pressure, Perron vectors,
    and the stationary cylinder measure they induce."""

    states: tuple[tuple[int, ...], ...]
    depth: int
    pressure: float
    right: np.ndarray
    left: np.ndarray
    node_measure: np.ndarray
    edge_measure: np.ndarray
    chain: np.ndarray  # stochastic transition matrix of the Gibbs chain

    def state_index(self, word: tuple[int, ...]) -> int:
        return self.states.index(word)

    def cylinder_mass(self, word: tuple[int, ...]) -> float:
        i = self.state_index(word[:-1])
        j = self.state_index(word[1:])
        return float(self.edge_measure[i, j])


def gibbs_data(shift: MarkovShift, pot: Potential) -> GibbsData:
    states, mat, wmax = _weighted_matrix(shift, pot)
    lam, v = _power_iteration(mat)
    _, u = _power_iteration(mat.T)
    resid = np.abs(mat @ v - lam * v).max()
    if resid > 1e-12 * lam * v.max():
        raise NumericalInstability(f"eigenvector residual {resid:.3e} too large")
    z = float(u @ v)
    node = u * v / z
    edge = (u[:, None] * mat * v[None, :]) / (lam * z)
    with np.errstate(divide="ignore", invalid="ignore"):
        chain = mat * v[None, :] / (lam * v[:, None])
    chain[mat == 0.0] = 0.0
    if abs(edge.sum() - 1.0) > 1e-12 or np.abs(edge.sum(1) - node).max() > 1e-12:
        raise NumericalInstability("cylinder measure lost marginal consistency")
    return GibbsData(
        tuple(states), max(pot.depth, 2), math.log(lam) + wmax,
        v, u, node, edge, chain,
    )


def _edge_average(shift: MarkovShift, gd: GibbsData, obs: Potential) -> float:
    obs = lift_potential(shift, obs, gd.depth)
    index = {s: i for i, s in enumerate(gd.states)}
    total = 0.0
    for word, w in sorted(obs.weights.items()):
        total += gd.edge_measure[index[word[:-1]], index[word[1:]]] * w
    return total


def equilibrium_average(
    shift: MarkovShift, pot_f: Potential, obs_g: Potential,
    check_tol: float = 1e-6,
) -> float:
    """Integral of obs_g against the equilibrium state of pot_f.

    Computed from the cylinder measure and cross-checked against the central
    finite difference of t -> pressure(f + t g); disagreement beyond
    check_tol raises DerivativeMismatch.
    """
    depth = max(pot_f.depth, obs_g.depth, 2)
    gd = gibbs_data(shift, lift_potential(shift, pot_f, depth))
    direct = _edge_average(shift, gd, obs_g)
    h = FD_FIRST_STEP
    fd = (
        transfer_pressure(shift, affine_potential(shift, pot_f, h, obs_g))
        - transfer_pressure(shift, affine_potential(shift, pot_f, -h, obs_g))
    ) / (2.0 * h)
    if abs(direct - fd) > check_tol:
        raise DerivativeMismatch(
            f"measure average {direct:.12g} vs pressure derivative {fd:.12g}"
        )
    return direct


def variance(shift: MarkovShift, pot_f: Potential, obs_g: Potential) -> float:
    """Dynamical variance of obs_g under the equilibrium state of pot_f:
    second derivative of t -> pressure(f + t (g - mean)), Richardson-
    extrapolated central differences."""
    depth = max(pot_f.depth, obs_g.depth, 2)
    gd = gibbs_data(shift, lift_potential(shift, pot_f, depth))
    mean = _edge_average(shift, gd, obs_g)
    centered = affine_potential(
        shift, obs_g, -mean, constant_potential(shift, 1.0)
    )
    p0 = transfer_pressure(shift, pot_f)

    def second_diff(h: float) -> float:
        pp = transfer_pressure(shift, affine_potential(shift, pot_f, h, centered))
        pm = transfer_pressure(shift, affine_potential(shift, pot_f, -h, centered))
        return (pp - 2.0 * p0 + pm) / (h * h)

    h = FD_SECOND_STEP
    v = (4.0 * second_diff(h / 2.0) - second_diff(h)) / 3.0
    if v < -1e-7:
        raise NumericalInstability(f"variance {v:.3e} is clearly negative")
    if v < 0.0 or abs(v) <= 1e-9:
        return 0.0
    return v


@dataclass(frozen=True)
class PressureMetricResult:
    norm_sq: float          # Var(cdot, m_c0) / (-integral of c0)
    jet_form: float | None  # integral of cddot / integral of c0, when given


def pressure_metric_norm(
    shift: MarkovShift,
    c0: Potential,
    cdot: Potential,
    cddot: Potential | None = None,
    pre_tol: float = 1e-8,
    agree_tol: float = 1e-6,
) -> PressureMetricResult:
    """Squared pressure-metric norm of a velocity at a pressure-zero point.

    Requires pressure(c0) = 0 and mean-zero cdot (within pre_tol).  When the
    full 2-jet of a pressure-zero family is supplied, the second form
    (integral of cddot / integral of c0) must agree within agree_tol.
    """
    p0 = transfer_pressure(shift, c0)
    if abs(p0) > pre_tol:
        raise NotInPressureZeroSlice(f"pressure(c0) = {p0:.3e}")
    depth = max(c0.depth, cdot.depth, cddot.depth if cddot else 1, 2)
    gd = gibbs_data(shift, lift_potential(shift, c0, depth))
    mean_dot = _edge_average(shift, gd, cdot)
    if abs(mean_dot) > pre_tol:
        raise NotInPressureZeroSlice(f"mean of cdot = {mean_dot:.3e}")
    mean_c0 = _edge_average(shift, gd, c0)
    norm_sq = variance(shift, c0, cdot) / (-mean_c0)
    jet = None
    if cddot is not None:
        jet = _edge_average(shift, gd, cddot) / mean_c0
        if abs(norm_sq - jet) > agree_tol:
            raise DerivativeMismatch(
                f"variance form {norm_sq:.12g} vs jet form {jet:.12g}"
            )
    return PressureMetricResult(norm_sq, jet)


def markov_entropy(gd: GibbsData) -> float:
    """Kolmogorov-Sinai entropy of the stationary Gibbs chain,
    -sum pi_i P_ij log P_ij; independent of any pressure computation."""
    p = gd.chain
    with np.errstate(divide="ignore", invalid="ignore"):
        plogp = np.where(p > 0.0, p * np.log(np.where(p > 0.0, p, 1.0)), 0.0)
    return float(-(gd.node_measure * plogp.sum(axis=1)).sum())


def bowen_root_transfer(
    shift: MarkovShift, roof: Potential, tol: float = 1e-12
) -> float:
    """The s with pressure(-s * roof) = 0, by bisection on the transfer
    pressure.  Requires a strictly positive roof."""
    if min(roof.weights.values()) <= 0.0:
        raise BracketFailure("roof must be strictly positive")

    def p(s: float) -> float:
        return transfer_pressure(shift, scale_potential(roof, -s))

    lo, p_lo = 0.0, p(0.0)
    if p_lo <= 0.0:
        return 0.0
    hi = p_lo / min(roof.weights.values()) * 1.0000001 + 1e-9
    if p(hi) >= 0.0:
        raise BracketFailure(f"no sign change in [0, {hi}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if p(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# periodic-orbit data

@dataclass(frozen=True)
class OrbitLevel:
    """Period-n stratum: one row per cyclic word, weighted by the number of
    periodic points it carries (rotations times inversion-fold multiplicity
    where applicable)."""

    mult: np.ndarray
    sums: dict[str, np.ndarray]
    primitive: np.ndarray | None = None


@dataclass(frozen=True)
class PeriodData:
    n_max: int
    levels: dict[int, OrbitLevel] = field(default_factory=dict)

    def level(self, n: int) -> OrbitLevel:
        if n not in self.levels or len(self.levels[n].mult) == 0:
            raise NoOrbits(f"no periodic orbits stored at level {n}")
        return self.levels[n]

    def observables(self) -> tuple[str, ...]:
        any_level = next(iter(self.levels.values()))
        return tuple(sorted(any_level.sums))


def _cyclic_words_array(shift: MarkovShift, n: int) -> np.ndarray:
    t = np.asarray(shift.transitions)
    words = np.arange(shift.m, dtype=np.int8).reshape(shift.m, 1)
    succ = [np.nonzero(t[c])[0].astype(np.int8) for c in range(shift.m)]
    width = [len(s) for s in succ]
    for _ in range(1, n):
        reps = np.array([width[c] for c in words[:, -1]])
        nxt = np.concatenate([succ[c] for c in words[:, -1]]).reshape(-1, 1)
        words = np.hstack([np.repeat(words, reps, axis=0), nxt])
    ok = t[words[:, -1], words[:, 0]] == 1
    return words[ok]


def _cyclic_birkhoff(words: np.ndarray, pot: Potential, m: int) -> np.ndarray:
    n = words.shape[1]
    r = pot.depth
    table = np.full(m**r, np.nan)
    for w, v in pot.weights.items():
        code = 0
        for s in w:
            code = code * m + s
        table[code] = v
    total = np.zeros(len(words))
    idx = np.arange(n)
    for i in range(n):
        code = np.zeros(len(words), dtype=np.int64)
        for j in range(r):
            code = code * m + words[:, (i + j) % n]
        total += table[code]
    return total


def period_data_from_shift(
    shift: MarkovShift,
    observables: dict[str, Potential],
    levels,
) -> PeriodData:
    """Exact periodic-point data of the shift with Birkhoff sums of the
    given observables; every admissible cyclic word counts once."""
    out: dict[int, OrbitLevel] = {}
    n_max = 0
    for n in sorted(set(int(n) for n in levels)):
        if n < 1:
            continue
        words = _cyclic_words_array(shift, n)
        if len(words) == 0:
            continue
        sums = {
            name: _cyclic_birkhoff(words, pot, shift.m)
            for name, pot in observables.items()
        }
        out[n] = OrbitLevel(mult=np.ones(len(words)), sums=sums)
        n_max = max(n_max, n)
    return PeriodData(n_max=n_max, levels=out)


def orbit_pressure(pd: PeriodData, obs: str, s: float, n: int) -> float:
    """Finite-level pressure of -s * obs from period-n data:
    (1/n) log sum over period-n points of exp(-s * Birkhoff sum)."""
    lev = pd.level(n)
    return float(logsumexp(-s * lev.sums[obs], b=lev.mult)) / n


@dataclass(frozen=True)
class BowenRoot:
    value: float
    residual: float
    gap: float
    level: int


def bowen_solve(pd: PeriodData, obs: str, width: float = BISECT_WIDTH) -> BowenRoot:
    """Root in s of the level-n_max orbit pressure of -s * obs.

    The map s -> pressure is strictly decreasing (slope at most
    -min(sum)/n), so bisection brackets a unique root.  The stability gap
    compares against the root two levels down (two, not one, to cancel the
    parity wobble of the point counts)."""
    floor = math.inf
    for n, lev in pd.levels.items():
        if len(lev.mult):
            floor = min(floor, lev.sums[obs].min() / n)
    if not math.isfinite(floor) or floor <= 1e-12:
        raise BracketFailure(
            f"observable {obs!r} is not bounded below by c*n with c > 0"
        )

    def root_at(n: int) -> float:
        lev = pd.level(n)
        p0 = orbit_pressure(pd, obs, 0.0, n)
        if p0 <= 0.0:
            return 0.0
        min_s = float(lev.sums[obs].min())
        lo, hi = 0.0, n * p0 / min_s * 1.0000001 + 1e-9
        if orbit_pressure(pd, obs, hi, n) >= 0.0:
            raise BracketFailure(f"no bracket in [0, {hi}] at level {n}")
        while hi - lo > width:
            mid = 0.5 * (lo + hi)
            if orbit_pressure(pd, obs, mid, n) > 0.0:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    n = pd.n_max
    value = root_at(n)
    residual = abs(orbit_pressure(pd, obs, value, n))
    gap = math.nan
    if n - 2 in pd.levels and len(pd.levels[n - 2].mult):
        gap = abs(value - root_at(n - 2))
    return BowenRoot(value, residual, gap, n)


def equidistribution_average(pd: PeriodData, obs: str, n: int) -> float:
    """Ratio of summed Birkhoff values to summed symbolic periods over all
    period-n points; converges to the maximal-measure average."""
    lev = pd.level(n)
    return float((lev.mult * lev.sums[obs]).sum() / (n * lev.mult.sum()))


@dataclass(frozen=True)
class LivsicVerdict:
    kind: str  # all_zero | all_positive | mixed
    witnesses: tuple[tuple[int, int, float], ...] = ()


def livsic_check(pd: PeriodData, obs: str, tol: float = 1e-8) -> LivsicVerdict:
    """Finite-scale cohomology tests on periodic sums: all zero (to tol*n),
    all positive, or mixed with witnesses."""
    all_zero = True
    all_pos = True
    witnesses = []
    for n in sorted(pd.levels):
        sums = pd.levels[n].sums[obs]
        if len(sums) == 0:
            continue
        zero_here = np.abs(sums) <= tol * n
        all_zero = all_zero and bool(zero_here.all())
        all_pos = all_pos and bool((sums > 0.0).all())
        if not (zero_here.all() or (sums > 0.0).all()):
            for i in np.nonzero(~zero_here & (sums <= 0.0))[0][:3]:
                witnesses.append((n, int(i), float(sums[i])))
    if all_zero:
        return LivsicVerdict("all_zero")
    if all_pos:
        return LivsicVerdict("all_positive")
    return LivsicVerdict("mixed", tuple(witnesses))


@dataclass(frozen=True)
class AbramovResult:
    h_star: float
    residual: float           # |KS entropy - h* . mean roof| at the root
    bowen_residual: float     # orbit pressure residual at the root
    transfer_residual: float  # |transfer pressure of -h* roof|


def abramov_check(shift: MarkovShift, roof: Potential, n_level: int) -> AbramovResult:
    """Reparametrized-entropy consistency for a positive roof.

    h* comes from periodic-orbit sums; the equilibrium state of -h* roof
    comes from the transfer operator; the check compares the chain's KS
    entropy against h* times the mean roof, which the time-change formula
    makes equal at the exact root."""
    if min(roof.weights.values()) <= 0.0:
        raise ValueError("roof must be strictly positive")
    levels = [n_level] + ([n_level - 2] if n_level - 2 >= 1 else [])
    pd = period_data_from_shift(shift, {"roof": roof}, levels)
    root = bowen_solve(pd, "roof")
    depth = max(roof.depth, 2)
    gd = gibbs_data(shift, scale_potential(lift_potential(shift, roof, depth), -root.value))
    mean_roof = _edge_average(shift, gd, roof)
    residual = abs(markov_entropy(gd) - root.value * mean_roof)
    return AbramovResult(
        root.value, residual, root.residual, abs(gd.pressure)
    )
