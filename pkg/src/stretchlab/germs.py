"""Conformal-factor rays of the vanishing-mean-curvature Gauss equation on
a periodic grid.

The unknown u solves  lap(u) + 1 - e^{2u} - (t^2/2) beta e^{-2u} = 0  for a
nonnegative coefficient grid beta and a ray parameter t >= 0; u = 0 at
t = 0.  Newton continuation follows the solution branch up to its fold.
The model domain is a flat 2-torus: every identity verified here (maximum
principle, vanishing first variation, the integrated second variation) is
an integration-by-parts fact that does not see the curvature of the domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import BadRay, BeyondFold, FoldReached

NEWTON_TOL = 1e-10
NEWTON_MAX_ITER = 50

#: kappa := -(mean of u_tt at t=0) / (mean of beta) equals 1/2 for the
#: equation form above.  An alternative normalization in circulation for
#: the second variation, -lap(w) = -2 w - 2 q with q the squared tensor
#: norm, integrates to kappa = 1 instead; it amounts to reading the
#: coefficient of beta as linear rather than quadratic in t (s vs t^2/2)
#: and leaves open whether q means beta or beta/2.  This module takes the
#: quadratic form as ground truth, reports kappa, and does not resolve the
#: intended normalization of q.
AF_FACTOR_NOTE = (
    "kappa = -(integral of u_tt at t=0)/(integral of beta) = 1/2 for the "
    "equation lap(u) + 1 - e^(2u) - (t^2/2) beta e^(-2u) = 0; the variant "
    "second-variation equation -lap(w) = -2w - 2q integrates to kappa = 1 "
    "and is consistent only if q denotes beta/2; reported, not resolved."
)


def constant_ray_closed_form(c: float, t: float) -> float:
    """Conformal factor e^{2u} for constant beta = c: the root of
    x^2 - x + c t^2 / 2 = 0 on the branch with value 1 at t = 0."""
    if c < 0.0:
        raise ValueError("beta must be nonnegative")
    disc = 1.0 - 2.0 * c * t * t
    if disc < -1e-12:
        raise BeyondFold(f"2 c t^2 = {2 * c * t * t} exceeds 1")
    return 0.5 * (1.0 + math.sqrt(max(disc, 0.0)))


def periodic_laplacian(n: int, spacing: float) -> sp.csr_matrix:
    """Five-point Laplacian on an n x n periodic grid."""
    ones = np.ones(n)
    shift = sp.diags([ones[:-1], ones[:-1]], [1, -1], (n, n), format="lil")
    shift[0, -1] = 1.0
    shift[-1, 0] = 1.0
    eye = sp.identity(n, format="csr")
    lap = sp.kron(shift, eye) + sp.kron(eye, shift) - 4.0 * sp.identity(n * n)
    return (lap / spacing**2).tocsr()


def _residual(u, beta, t, lap):
    return lap @ u + 1.0 - np.exp(2.0 * u) - 0.5 * t * t * beta * np.exp(-2.0 * u)


class _NewtonDiverged(Exception):
    pass


def solve_gauss(
    beta: np.ndarray,
    t: float,
    warm_start: np.ndarray | None = None,
    spacing: float | None = None,
    tol: float = NEWTON_TOL,
    max_iter: int = NEWTON_MAX_ITER,
) -> np.ndarray:
    """Newton solve of the discretized equation on the periodic grid.

    The linearization -lap + 2 e^{2u} - t^2 beta e^{-2u} is positive
    definite exactly while t^2 beta e^{-4u} < 2, so Newton is safe on the
    branch this package studies; past the fold it diverges, which callers
    see as FoldReached.
    """
    beta = np.asarray(beta, dtype=float)
    if beta.ndim != 2 or beta.shape[0] != beta.shape[1]:
        raise ValueError("beta must be a square grid")
    if np.any(beta < 0.0):
        raise ValueError("beta must be nonnegative")
    n = beta.shape[0]
    if spacing is None:
        spacing = 2.0 * math.pi / n
    lap = periodic_laplacian(n, spacing)
    b = beta.reshape(-1)
    u = np.zeros(n * n) if warm_start is None else warm_start.reshape(-1).copy()
    try:
        u = _newton(u, b, t, lap, tol, max_iter)
    except _NewtonDiverged as exc:
        raise FoldReached(t) from exc
    return u.reshape(n, n)


def _newton(u, b, t, lap, tol, max_iter):
    for _ in range(max_iter):
        r = _residual(u, b, t, lap)
        rn = float(np.abs(r).max())
        if not math.isfinite(rn):
            raise _NewtonDiverged
        if rn <= tol:
            return u
        diag = -2.0 * np.exp(2.0 * u) + t * t * b * np.exp(-2.0 * u)
        jac = lap + sp.diags(diag)
        try:
            step = spla.spsolve(jac.tocsc(), -r)
        except Exception as exc:  # singular factorization at the fold
            raise _NewtonDiverged from exc
        if not np.all(np.isfinite(step)):
            raise _NewtonDiverged
        u = u + step
    r = _residual(u, b, t, lap)
    if float(np.abs(r).max()) <= tol:
        return u
    raise _NewtonDiverged


@dataclass(frozen=True)
class GermRay:
    """Solutions u_t on a uniform t-grid starting at 0, plus residuals."""

    beta: np.ndarray
    spacing: float
    t_grid: np.ndarray
    u: np.ndarray  # shape (len(t_grid), n, n)
    residuals: np.ndarray

    @property
    def n_grid(self) -> int:
        return self.beta.shape[0]

    def index_of(self, t: float) -> int:
        hits = np.nonzero(np.isclose(self.t_grid, t, rtol=0, atol=1e-12))[0]
        if len(hits) == 0:
            raise KeyError(f"t = {t} is not stored in the ray")
        return int(hits[0])


def build_ray(
    beta: np.ndarray,
    t_max: float,
    steps: int,
    spacing: float | None = None,
    tol: float = NEWTON_TOL,
) -> GermRay:
    """Continuation in t over a uniform grid of `steps` intervals from 0.

    Warm-starts each solve from the previous u; if Newton diverges at some
    t the fold has been reached inside the requested range and FoldReached
    propagates with that t.
    """
    beta = np.asarray(beta, dtype=float)
    n = beta.shape[0]
    if spacing is None:
        spacing = 2.0 * math.pi / n
    lap = periodic_laplacian(n, spacing)
    ts = np.linspace(0.0, t_max, steps + 1)
    us = np.empty((len(ts), n, n))
    res = np.empty(len(ts))
    u = np.zeros(n * n)
    b = beta.reshape(-1)
    for i, t in enumerate(ts):
        try:
            u = _newton(u, b, float(t), lap, tol, NEWTON_MAX_ITER)
        except _NewtonDiverged as exc:
            raise FoldReached(float(t)) from exc
        us[i] = u.reshape(n, n)
        res[i] = float(np.abs(_residual(u, b, float(t), lap)).max())
    return GermRay(beta, spacing, ts, us, res)


@dataclass(frozen=True)
class RayDiagnostics:
    udot0_max_abs: float      # one-sided derivative at t = 0, must vanish
    udot_max: np.ndarray      # max over the grid of du/dt at interior t > 0
    uddot0: np.ndarray        # second t-derivative grid at t = 0
    kappa: float              # -(mean of uddot0) / (mean of beta); nan if beta = 0
    fuchsian: bool            # beta identically zero
    t_interior: np.ndarray    # the t values where udot_max is reported


def ray_diagnostics(ray: GermRay) -> RayDiagnostics:
    """First and second t-derivatives at 0 and the sign report of du/dt.

    Needs at least 4 uniformly spaced samples including t = 0.  The first
    derivative at 0 uses a third-order one-sided stencil; the second uses
    the even symmetry of the branch in t.
    """
    ts = ray.t_grid
    if len(ts) < 4:
        raise BadRay("need at least 4 t-samples")
    dt = ts[1] - ts[0]
    if dt <= 0 or np.abs(np.diff(ts) - dt).max() > 1e-12 * max(dt, 1.0):
        raise BadRay("t-grid must be uniform")
    if abs(ts[0]) > 1e-15:
        raise BadRay("ray must start at t = 0")
    u = ray.u
    udot0 = (
        -11.0 * u[0] + 18.0 * u[1] - 9.0 * u[2] + 2.0 * u[3]
    ) / (6.0 * dt)
    # The branch is even in t, so u(-dt) = u(dt) and the second difference
    # at 0 collapses to 2 (u(dt) - u(0)) / dt^2.
    uddot0 = 2.0 * (u[1] - u[0]) / (dt * dt)
    udot = (u[2:] - u[:-2]) / (2.0 * dt)
    udot_max = udot.reshape(len(udot), -1).max(axis=1)
    beta_mean = float(ray.beta.mean())
    fuchsian = bool(np.all(ray.beta == 0.0))
    kappa = math.nan if fuchsian else float(-uddot0.mean() / beta_mean)
    return RayDiagnostics(
        udot0_max_abs=float(np.abs(udot0).max()),
        udot_max=udot_max,
        uddot0=uddot0,
        kappa=kappa,
        fuchsian=fuchsian,
        t_interior=ts[1:-1].copy(),
    )


def second_variation_grid(beta: np.ndarray, spacing: float | None = None) -> np.ndarray:
    """Direct solve of (-lap + 2) w = -beta, the linearized equation that
    the second t-derivative at 0 satisfies; independent cross-check for
    the finite-difference route."""
    beta = np.asarray(beta, dtype=float)
    n = beta.shape[0]
    if spacing is None:
        spacing = 2.0 * math.pi / n
    lap = periodic_laplacian(n, spacing)
    op = -lap + 2.0 * sp.identity(n * n)
    w = spla.spsolve(op.tocsc(), -beta.reshape(-1))
    return w.reshape(n, n)


@dataclass(frozen=True)
class AFMargin:
    value: float  # 2 - max over the grid of t^2 beta e^{-4 u_t}

    @property
    def almost_fuchsian(self) -> bool:
        return self.value > 0.0


def af_margin(ray: GermRay, t: float) -> AFMargin:
    i = ray.index_of(t)
    u = ray.u[i]
    return AFMargin(float(2.0 - (t * t * ray.beta * np.exp(-4.0 * u)).max()))


@dataclass(frozen=True)
class FoldLocation:
    tau: float  # estimated t^2 at which the margin hits zero
    samples: tuple[tuple[float, float], ...]  # (t^2, margin) pairs used


def locate_fold(
    beta: np.ndarray,
    spacing: float | None = None,
    margin_stop: float = 0.08,
    dt0: float = 0.05,
) -> FoldLocation:
    """March t toward the fold, halving the step on Newton failure, then
    extrapolate where the margin hits zero using margin^2 ~ A (tau_f - tau)
    (the square-root law of a quadratic fold)."""
    beta = np.asarray(beta, dtype=float)
    if float(beta.max()) <= 0.0:
        raise ValueError("beta must be somewhere positive to have a fold")
    n = beta.shape[0]
    if spacing is None:
        spacing = 2.0 * math.pi / n
    lap = periodic_laplacian(n, spacing)
    b = beta.reshape(-1)
    u = np.zeros(n * n)
    t = 0.0
    dt = dt0
    samples: list[tuple[float, float]] = []
    while dt > 1e-9:
        try:
            u_try = _newton(u.copy(), b, t + dt, lap, NEWTON_TOL, NEWTON_MAX_ITER)
        except _NewtonDiverged:
            dt *= 0.5
            continue
        t += dt
        u = u_try
        m = 2.0 - float((t * t * b * np.exp(-4.0 * u)).max())
        samples.append((t * t, m))
        if m < margin_stop:
            break
    if len(samples) < 2:
        raise FoldReached(t)
    (tau1, m1), (tau2, m2) = samples[-2], samples[-1]
    tau_f = (m1 * m1 * tau2 - m2 * m2 * tau1) / (m1 * m1 - m2 * m2)
    return FoldLocation(tau_f, tuple(samples))


# ---------------------------------------------------------------------------
# exports

def export_ray_csv(ray: GermRay, diag: RayDiagnostics, path: str) -> None:
    """(t, min u, max u, min du/dt, AF margin, residual) per stored t;
    du/dt is blank at the endpoints of the stencil."""
    rows = []
    for i, t in enumerate(ray.t_grid):
        u = ray.u[i]
        margin = float(2.0 - (t * t * ray.beta * np.exp(-4.0 * u)).max())
        if 1 <= i < len(ray.t_grid) - 1:
            udot_min = format(
                float(
                    ((ray.u[i + 1] - ray.u[i - 1]) / (2 * (ray.t_grid[1] - ray.t_grid[0]))).min()
                ),
                ".17g",
            )
        else:
            udot_min = ""
        rows.append(
            f"{t:.17g},{u.min():.17g},{u.max():.17g},{udot_min},"
            f"{margin:.17g},{ray.residuals[i]:.17g}"
        )
    with open(path, "w") as f:
        f.write("t,u_min,u_max,udot_min,af_margin,residual\n")
        f.write("\n".join(rows) + "\n")


def export_uddot0_csv(diag: RayDiagnostics, path: str) -> None:
    flat = diag.uddot0.reshape(-1)
    with open(path, "w") as f:
        f.write("uddot0\n")
        f.write("\n".join(format(v, ".17g") for v in flat) + "\n")
