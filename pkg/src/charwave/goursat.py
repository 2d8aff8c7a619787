"""Goursat problem on the wedge between the two characteristics.

The wedge solution is pinned to the side solutions through prescribed jumps
across the characteristics through (0, x0): with phi1(x0), phi2(x0) the
one-sided limits of the data and A the assigned value at the vertex,

    u3(t, x0 - a t) = gamma1(t) = u1(t, x0 - a t) + A - phi1(x0),
    u3(t, x0 + a t) = gamma2(t) = u2(t, x0 + a t) + A - phi2(x0),

and both traces equal A at t = 0.  Interior values follow from the
characteristic parallelogram identity: writing xi = x - a t, eta = x + a t
and H = F - f(., ., u, u_t, u_x),

    u3(C) = gamma1(t_B) + gamma2(t_D) - A
            + 1/(4 a^2) * int_xi^x0 dy int_x0^eta dz H(y, z),

where B and D are the feet of the characteristics through C on the left and
right boundary lines (t_B = (x0 - xi)/(2a), t_D = (eta - x0)/(2a)).  This is
again a fixed-point problem in u3 and is iterated in Picard fashion.

Derivatives come from the Leibniz rule applied to the same identity, using
the exact trace derivatives along the characteristics

    gamma1'(t) = (u_t - a u_x) of side 1 at (t, x0 - a t),
    gamma2'(t) = (u_t + a u_x) of side 2 at (t, x0 + a t),

which the side fields provide directly.  With J_xi = int_xi^x0 H(y, eta) dy
and J_eta = int_x0^eta H(xi, z) dz:

    u_t = (gamma1' + gamma2')/2 + (J_xi + J_eta)/(4a),
    u_x = (gamma2' - gamma1')/(2a) + (J_xi - J_eta)/(4 a^2).

Discretisation: the wedge is the triangle s + r <= n_levels of the lattice
node(s, r) = (t, x) = ((s+r) dt, x0 + (r-s) dx); in (xi, eta) this is a
uniform grid of spacing hc = 2 a dt anchored at the vertex, so the double
integral is a separable 2-D composite trapezoid evaluated by running prefix
sums.  Bands of constant s + r are marched in time exactly like the cauchy
strips, and every band's boundary nodes reproduce the traces identically
(their integral prefix is empty).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import expr as ex
from .cauchy import (
    GridParams,
    PicardParams,
    PicardReport,
    ProblemSpec,
    RegionField,
    SolverGrid,
    _cumtrapz_row,
    _grid_eval,
    build_grid,
    plan_strips,
    resolve_lipschitz,
)
from .errors import ConfigError, CoverageError, NonConvergence
from .geometry import Region

__all__ = [
    "GoursatTraces",
    "goursat_traces",
    "solve_goursat_region",
    "picard_step_goursat",
]


@dataclass(frozen=True)
class GoursatTraces:
    """Boundary data of the wedge problem sampled at internal time levels.

    ``gamma1``/``gamma2`` are the prescribed wedge values on the left/right
    characteristic; ``dgamma1``/``dgamma2`` their time derivatives along the
    lines, read from the side fields' derivative samples.
    """

    grid: SolverGrid
    times: np.ndarray
    gamma1: np.ndarray
    gamma2: np.ndarray
    dgamma1: np.ndarray
    dgamma2: np.ndarray
    apex: float  # the common value gamma1(0) = gamma2(0) = A


def goursat_traces(spec: ProblemSpec, field1: RegionField, field2: RegionField) -> GoursatTraces:
    """Build the wedge boundary traces from the two solved side fields."""
    grid = field1.grid
    if field2.grid != grid:
        raise ConfigError("side fields were solved on different grids")
    m = grid.n_levels
    levels = np.arange(m + 1)
    c1 = -levels - grid.j1_min
    c2 = levels
    if (
        field1.u.shape[0] <= m
        or field2.u.shape[0] <= m
        or c1.min() < 0
        or c1.max() >= field1.u.shape[1]
        or c2.max() >= field2.u.shape[1]
    ):
        raise CoverageError("side fields do not cover the characteristics up to T")
    phi1_x0 = ex.evaluate(spec.phi1, {"x": spec.x0})
    phi2_x0 = ex.evaluate(spec.phi2, {"x": spec.x0})
    u1c = field1.u[levels, c1]
    u2c = field2.u[levels, c2]
    p1c = field1.p[levels, c1]
    p2c = field2.p[levels, c2]
    q1c = field1.q[levels, c1]
    q2c = field2.q[levels, c2]
    arrays = (
        grid.dt * levels.astype(float),
        u1c + (spec.A - phi1_x0),
        u2c + (spec.A - phi2_x0),
        p1c - grid.a * q1c,
        p2c + grid.a * q2c,
    )
    for arr in arrays:
        arr.setflags(write=False)
    times, g1, g2, dg1, dg2 = arrays
    return GoursatTraces(
        grid=grid,
        times=times,
        gamma1=g1,
        gamma2=g2,
        dgamma1=dg1,
        dgamma2=dg2,
        apex=spec.A,
    )


def _wedge_candidates(a: float, hc: float, traces: GoursatTraces, H: np.ndarray, A: float):
    """Full-rectangle candidate (u, p, q) of the parallelogram map given H.

    ``H`` covers lattice rows/columns 0..R-1; the returned arrays are valid
    wherever their integral prefixes stay inside the supplied block, which
    for band marching means all nodes with s + r < R.
    """
    R = H.shape[0]
    jrow = _cumtrapz_row(np.swapaxes(H, 0, 1), hc)
    jrow = np.swapaxes(jrow, 0, 1)  # int over y in [xi_s, x0] at fixed eta_r
    jcol = _cumtrapz_row(H, hc)  # int over z in [x0, eta_r] at fixed xi_s
    p2d = _cumtrapz_row(jrow, hc)  # then over z: the full rectangle integral
    g1 = traces.gamma1[:R, None]
    g2 = traces.gamma2[None, :R]
    dg1 = traces.dgamma1[:R, None]
    dg2 = traces.dgamma2[None, :R]
    u_c = g1 + g2 - A + p2d / (4.0 * a * a)
    p_c = 0.5 * (dg1 + dg2) + (jrow + jcol) / (4.0 * a)
    q_c = (dg2 - dg1) / (2.0 * a) + (jrow - jcol) / (4.0 * a * a)
    return u_c, p_c, q_c


def _wedge_coords(grid: SolverGrid, R: int):
    """(t, x) arrays of the lattice block [0..R-1]^2, t clamped to the band."""
    idx = np.arange(R)
    k = idx[:, None] + idx[None, :]
    t = np.minimum(k * grid.dt, grid.T)  # nodes past the hypotenuse are unused
    x = grid.x0 + (idx[None, :] - idx[:, None]) * grid.dx
    return t, x


def solve_goursat_region(
    spec: ProblemSpec,
    traces: GoursatTraces,
    grid: GridParams | SolverGrid,
    picard: PicardParams = PicardParams(),
) -> RegionField:
    """Solve the wedge problem by Picard iteration on the parallelogram map."""
    g = traces.grid
    if isinstance(grid, SolverGrid):
        if grid != g:
            raise ConfigError("grid does not match the traces' grid")
    else:
        if build_grid(spec, grid) != g:
            raise ConfigError("grid parameters do not match the traces' grid")
    m = g.n_levels
    n = m + 1
    hc = 2.0 * g.a * g.dt
    L = resolve_lipschitz(spec, g)
    bands = plan_strips(g, L, picard)
    feeds_back = bool(ex.free_vars(spec.f) & {"u", "ut", "ux"})

    U = np.zeros((n, n))
    P = np.zeros((n, n))
    Q = np.zeros((n, n))
    idx = np.arange(n)
    K = idx[:, None] + idx[None, :]
    # vertex node: degenerate parallelogram, all integrals empty
    U[0, 0] = traces.gamma1[0]
    P[0, 0] = 0.5 * (traces.dgamma1[0] + traces.dgamma2[0])
    Q[0, 0] = (traces.dgamma2[0] - traces.dgamma1[0]) / (2.0 * g.a)

    iterations: list[int] = []
    all_norms: list[tuple[float, ...]] = []
    for b, e in bands:
        R = e + 1
        band = (K[:R, :R] > b) & (K[:R, :R] <= e)
        t2, x2 = _wedge_coords(g, R)
        shape = (R, R)
        Fg = _grid_eval(spec.F, shape, t=t2, x=x2)
        # warm start: boundary part with the integral dropped
        g1 = traces.gamma1[:R, None]
        g2 = traces.gamma2[None, :R]
        dg1 = traces.dgamma1[:R, None]
        dg2 = traces.dgamma2[None, :R]
        U[:R, :R][band] = np.broadcast_to(g1 + g2 - traces.apex, shape)[band]
        P[:R, :R][band] = np.broadcast_to(0.5 * (dg1 + dg2), shape)[band]
        Q[:R, :R][band] = np.broadcast_to((dg2 - dg1) / (2.0 * g.a), shape)[band]
        norms: list[float] = []
        converged = not feeds_back
        for _ in range(picard.max_iter):
            fg = _grid_eval(
                spec.f, shape, t=t2, x=x2, u=U[:R, :R], ut=P[:R, :R], ux=Q[:R, :R]
            )
            u_c, p_c, q_c = _wedge_candidates(g.a, hc, traces, Fg - fg, traces.apex)
            delta = max(
                float(np.max(np.abs(u_c[band] - U[:R, :R][band]), initial=0.0)),
                float(np.max(np.abs(p_c[band] - P[:R, :R][band]), initial=0.0)),
                float(np.max(np.abs(q_c[band] - Q[:R, :R][band]), initial=0.0)),
            )
            U[:R, :R][band] = u_c[band]
            P[:R, :R][band] = p_c[band]
            Q[:R, :R][band] = q_c[band]
            norms.append(delta)
            if delta <= picard.tol:
                converged = True
                break
        if not converged:
            raise NonConvergence(
                f"Picard iteration stalled on wedge band [{b}, {e}] after "
                f"{len(norms)} sweeps (last update {norms[-1]:.3e} > tol "
                f"{picard.tol:.1e})",
                last_update=norms[-1],
            )
        iterations.append(max(1, len(norms)))
        all_norms.append(tuple(norms))
        # the converged candidates reproduce the traces only up to rounding
        # (they add and subtract the apex value); pin the boundary exactly
        ks = np.arange(b + 1, e + 1)
        U[ks, 0] = traces.gamma1[ks]
        U[0, ks] = traces.gamma2[ks]

    for arr in (U, P, Q):
        arr.setflags(write=False)
    report = PicardReport(
        strips=tuple(bands),
        iterations=tuple(iterations),
        update_norms=tuple(all_norms),
        converged=True,
        lipschitz=L,
    )
    return RegionField(
        region=Region.Q3_STAR,
        grid=g,
        u=U,
        p=P,
        q=Q,
        report=report,
        col_offset=0,
        char_lattice=True,
    )


def picard_step_goursat(
    spec: ProblemSpec, traces: GoursatTraces, iterate: RegionField
) -> RegionField:
    """One global sweep of the parallelogram map reading (u,p,q) from ``iterate``.

    A converged wedge field is a fixed point of this map up to the stopping
    tolerance.
    """
    g = iterate.grid
    n = g.n_levels + 1
    hc = 2.0 * g.a * g.dt
    t2, x2 = _wedge_coords(g, n)
    shape = (n, n)
    Fg = _grid_eval(spec.F, shape, t=t2, x=x2)
    fg = _grid_eval(spec.f, shape, t=t2, x=x2, u=iterate.u, ut=iterate.p, ux=iterate.q)
    u_c, p_c, q_c = _wedge_candidates(g.a, hc, traces, Fg - fg, traces.apex)
    idx = np.arange(n)
    tri = (idx[:, None] + idx[None, :]) <= g.n_levels
    U = np.where(tri, u_c, 0.0)
    P = np.where(tri, p_c, 0.0)
    Q = np.where(tri, q_c, 0.0)
    for arr in (U, P, Q):
        arr.setflags(write=False)
    return replace(iterate, u=U, p=P, q=Q)
