"""Hopf-Lax semigroup on grids.

u(t, x) = min_y { u0(y) + t L((x - y) / t) }

The minimization is a two-level search: a compiled scan over a regular
lattice of candidate y, then a stencil zoom around the winner that calls
the datum's evaluator directly. Backward slopes b = (x - y_x) / t come
straight from the minimizers.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import kernels
from .errors import InputError, NumericError, SearchRadiusError
from .grid import GridFunction, GridSpec, VectorField, gradient
from .hamiltonian import ConvexityModuli, LagrangianView

log = logging.getLogger(__name__)

SEARCH_MARGIN = 0.10
SCAN_FRACTION = 64
LATTICE_BUDGET = 20_000_000
ZOOM_CHUNK = 400_000


# ---------------------------------------------------------------- data


@dataclass(frozen=True)
class InitialDatum:
    """Lipschitz initial datum with declared constants M (Lipschitz) and
    m >= |u0(0)|. ``evaluator`` maps an (n, d) array to n values."""

    evaluator: Callable
    M: float
    m: float
    dim: int
    name: str = "custom"
    params: dict = field(default_factory=dict, compare=False, hash=False)

    def __call__(self, Y) -> np.ndarray:
        Y = np.asarray(Y, dtype=float).reshape(-1, self.dim)
        return np.asarray(self.evaluator(Y), dtype=float).reshape(-1)

    def audit(self, lo, hi, n_pairs: int = 20000, seed: int = 0) -> dict:
        """Sampled Lipschitz quotient on a box and the |u0(0)| <= m check."""
        rng = np.random.default_rng(seed)
        lo = np.broadcast_to(np.asarray(lo, float), (self.dim,))
        hi = np.broadcast_to(np.asarray(hi, float), (self.dim,))
        A = lo + (hi - lo) * rng.random((n_pairs, self.dim))
        B = A + (hi - lo) * 0.02 * rng.standard_normal((n_pairs, self.dim))
        dist = np.linalg.norm(A - B, axis=1)
        ok = dist > 0
        quot = np.abs(self(A[ok]) - self(B[ok])) / dist[ok]
        lip = float(quot.max())
        u00 = float(self(np.zeros((1, self.dim)))[0])
        return {
            "lipschitz_quotient": lip,
            "u0_at_0": u00,
            "lipschitz_ok": lip <= self.M * (1 + 1e-6),
            "bound_ok": abs(u00) <= self.m,
        }


def constant_datum(c: float, dim: int) -> InitialDatum:
    return InitialDatum(lambda Y: np.full(len(Y), float(c)), 0.0, abs(c), dim, "constant", {"c": c})


def linear_datum(a, c0: float = 0.0) -> InitialDatum:
    a = np.asarray(a, dtype=float).reshape(-1)
    return InitialDatum(
        lambda Y: Y @ a + c0, float(np.linalg.norm(a)), abs(c0), len(a), "linear", {"a": a.tolist(), "c0": c0}
    )


def cone_datum(dim: int = 1, slope: float = 1.0) -> InitialDatum:
    """slope * |x|."""
    return InitialDatum(
        lambda Y: slope * np.linalg.norm(Y, axis=1), abs(slope), 0.0, dim, "cone", {"slope": slope}
    )


def semiconvex_datum(pbar, K: float) -> InitialDatum:
    """<pbar, x> - (K/2) (sqrt(1 + |x|^2) - 1): gradients stay in the ball of
    radius K/2 around pbar, second differences are >= -(K/2)|h|^2."""
    pbar = np.asarray(pbar, dtype=float).reshape(-1)

    def f(Y):
        return Y @ pbar - 0.5 * K * (np.sqrt(1.0 + np.sum(Y * Y, axis=1)) - 1.0)

    M = float(np.linalg.norm(pbar)) + 0.5 * K
    return InitialDatum(f, M, 0.0, len(pbar), "semiconvex", {"pbar": pbar.tolist(), "K": K})


def _pl_1d(knots, values, slopes):
    """Piecewise-linear function with linear continuation past the ends."""

    def f(s):
        out = np.interp(s, knots, values)
        left = s < knots[0]
        right = s > knots[-1]
        out = np.where(left, values[0] + slopes[0] * (s - knots[0]), out)
        out = np.where(right, values[-1] + slopes[-1] * (s - knots[-1]), out)
        return out

    return f


def random_piecewise_linear(seed: int, dim: int, M: float = 1.0, n_breaks: int = 8, span: float = 4.0,
                            n_ridges: int = 3, m: float = 1.0) -> InitialDatum:
    """Random Lipschitz-M piecewise-linear datum.

    d = 1: breakpoints uniform on [-span, span], slopes uniform in [-M, M].
    d > 1: convex combination of such profiles along random unit directions.
    """
    rng = np.random.default_rng(seed)
    ridges = []
    n_r = 1 if dim == 1 else n_ridges
    weights = rng.dirichlet(np.ones(n_r)) if n_r > 1 else np.ones(1)
    for _ in range(n_r):
        knots = np.sort(rng.uniform(-span, span, n_breaks))
        slopes = rng.uniform(-M, M, n_breaks + 1)
        values = np.concatenate([[0.0], np.cumsum(slopes[1:-1] * np.diff(knots))])
        if dim == 1:
            theta = np.ones(1)
        else:
            theta = rng.standard_normal(dim)
            theta /= np.linalg.norm(theta)
        ridges.append((theta, _pl_1d(knots, values, slopes)))
    offset = rng.uniform(-m, m)
    raw0 = sum(w * prof(np.zeros(1))[0] for w, (th, prof) in zip(weights, ridges))

    def f(Y):
        out = np.full(len(Y), offset - raw0)
        for w, (th, prof) in zip(weights, ridges):
            out = out + w * prof(Y @ th)
        return out

    return InitialDatum(f, M, m, dim, "random_pl", {"seed": seed, "n_breaks": n_breaks, "span": span})


def tabulated_datum(u: GridFunction, M: float, m: Optional[float] = None, name: str = "tabulated") -> InitialDatum:
    """Multilinear interpolant of grid values, constant-extended outside."""
    interp = u.interpolator()
    lo = np.array(u.spec.lo)
    hi = np.array(u.spec.hi)

    def f(Y):
        return interp(np.clip(Y, lo, hi))

    if m is None:
        m = abs(float(f(np.zeros((1, u.spec.dim)))[0]))
    return InitialDatum(f, float(M), float(m), u.spec.dim, name)


# ---------------------------------------------------------------- engine


@dataclass
class SearchPlan:
    radius: float
    half: np.ndarray
    step: np.ndarray
    anchor: np.ndarray


def _speed(datum, view, moduli, Lambda):
    if Lambda is not None:
        return float(Lambda)
    if datum.M == 0:
        return 0.0
    moduli = moduli or ConvexityModuli(view)
    return moduli.Lambda_M(datum.M)


def plan_search(datum: InitialDatum, view: LagrangianView, t: float, X: np.ndarray, Lambda: float,
                h: Optional[float] = None, coarse_step=None, anchor=None, osc_box: bool = True) -> SearchPlan:
    d = datum.dim
    radius = t * Lambda * (1 + SEARCH_MARGIN)
    half = np.full(d, radius)
    if osc_box and radius > 0:
        # any minimizer satisfies t L((x-y)/t) <= u0(x) - u0(y)
        lo = X.min(axis=0) - radius
        hi = X.max(axis=0) + radius
        sstep = max(radius / 32, float(np.max(hi - lo)) / 400)
        axes = [np.arange(a, b + sstep, sstep) for a, b in zip(lo, hi)]
        S = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
        lower = float(np.min(datum(S))) - datum.M * math.sqrt(d) * sstep
        osc = float(np.max(datum(X))) - lower
        ext = view.axis_extent(osc / t)
        if ext is not None:
            half = np.minimum(half, t * ext * (1 + 1e-9) + 1e-12)
    eff = min(t * Lambda, float(np.max(half)))
    if coarse_step is None:
        base = max(float(h or 0.0), eff / SCAN_FRACTION)
        if base <= 0:
            base = float(h) if h else 1e-3
        step = np.full(d, base)
    else:
        step = np.broadcast_to(np.asarray(coarse_step, dtype=float), (d,)).copy()
    anchor = np.zeros(d) if anchor is None else np.asarray(anchor, dtype=float)
    return SearchPlan(radius, half, step, anchor)


def _scan(X, u_fn, plan: SearchPlan, view: LagrangianView, t: float, use_box=True):
    """Compiled lattice scan. Returns (values, minimizers)."""
    d = X.shape[1]
    half = plan.half if use_box else np.full(d, plan.radius)
    jmin = np.floor((X.min(axis=0) - half - plan.anchor) / plan.step).astype(np.int64) - 1
    jmax = np.ceil((X.max(axis=0) + half - plan.anchor) / plan.step).astype(np.int64) + 1
    shape = jmax - jmin + 1
    if int(np.prod(shape)) > LATTICE_BUDGET:
        raise InputError(f"candidate lattice of {int(np.prod(shape))} nodes exceeds budget")
    lat_lo = plan.anchor + jmin * plan.step
    axes = [lat_lo[i] + plan.step[i] * np.arange(shape[i]) for i in range(d)]
    Y = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    u_lat = u_fn(Y)
    jlo = np.ceil((X - half - lat_lo) / plan.step - 1e-9).astype(np.int64)
    jhi = np.floor((X + half - lat_lo) / plan.step + 1e-9).astype(np.int64)
    jlo = np.clip(jlo, 0, shape - 1)
    jhi = np.clip(jhi, 0, shape - 1)
    kp = view.kernel_params()
    if kp is None:
        code, coef, expo = -1, np.zeros(1), np.zeros(1)
        lag_fn = view.L
    else:
        code, coef, expo = kp
        lag_fn = None
    best, arg = kernels.minplus_scan(X, jlo, jhi, lat_lo, plan.step, shape, u_lat, t, code, coef, expo,
                                     plan.radius, lag_fn=lag_fn)
    if np.any(arg < 0):
        raise SearchRadiusError("no lattice candidate inside the search region")
    return best, Y[arg]


def _zoom(X, Y, best, datum, view, t, plan: SearchPlan, ytol: float):
    """Stencil zoom: 5^d candidates at half the previous step, recentered
    on the lexicographically first best value, until the step is below
    ``ytol``."""
    d = X.shape[1]
    offs = np.stack(np.meshgrid(*[np.arange(-2, 3)] * d, indexing="ij"), axis=-1).reshape(-1, d)
    r2 = plan.radius ** 2
    Y = Y.copy()
    best = best.copy()
    nc = len(offs)
    chunk = max(1, ZOOM_CHUNK // nc)
    step = plan.step.copy()
    while np.max(step) > ytol:
        step = step * 0.5
        for a in range(0, len(X), chunk):
            xs = X[a:a + chunk]
            ys = Y[a:a + chunk]
            cand = ys[:, None, :] + step * offs[None, :, :]
            diff = xs[:, None, :] - cand
            vals = datum(cand.reshape(-1, d)).reshape(len(xs), nc) + t * view.L(diff / t)
            vals = np.where(np.sum(diff * diff, axis=-1) <= r2, vals, np.inf)
            j = np.argmin(vals, axis=1)
            v = vals[np.arange(len(xs)), j]
            upd = v < best[a:a + chunk]
            Y[a:a + chunk][upd] = cand[np.arange(len(xs)), j][upd]
            best[a:a + chunk] = np.where(upd, v, best[a:a + chunk])
    return best, Y


def _neighbour_index(X, grid_shape):
    n, d = X.shape
    if grid_shape is not None and int(np.prod(grid_shape)) == n:
        idx = np.arange(n).reshape(grid_shape)
        cols = []
        for ax in range(d):
            for shift in (-1, 1):
                nb = np.roll(idx, shift, axis=ax)
                # no wrap-around at the box edge: fall back to the point itself
                edge = [slice(None)] * d
                edge[ax] = 0 if shift == 1 else -1
                nb[tuple(edge)] = idx[tuple(edge)]
                cols.append(nb.ravel())
        return np.stack(cols, axis=1)
    from scipy.spatial import cKDTree

    k = min(n, 2 * d + 1)
    _, nb = cKDTree(X).query(X, k)
    return nb.reshape(n, k)


def _borrow_minimizers(X, Y, best, datum, view, t, plan: SearchPlan, ytol, grid_shape, sweeps: int = 8):
    """Adopt a neighbour's minimizer wherever it gives a lower value, then
    re-zoom the adopted points. Any y is admissible at any x, so this only
    ever lowers values toward the true minimum."""
    n, d = X.shape
    nb = _neighbour_index(X, grid_shape)
    r2 = plan.radius ** 2
    Y = Y.copy()
    best = best.copy()
    rows = np.arange(n)
    for _ in range(sweeps):
        cand = Y[nb]
        diff = X[:, None, :] - cand
        vals = datum(cand.reshape(-1, d)).reshape(nb.shape) + t * view.L(diff / t)
        inside = (np.sum(diff * diff, axis=-1) <= r2) & np.all(np.abs(diff) <= plan.half, axis=-1)
        vals = np.where(inside, vals, np.inf)
        j = np.argmin(vals, axis=1)
        v = vals[rows, j]
        upd = v < best - 1e-12 * np.maximum(1.0, np.abs(best))
        if not upd.any():
            break
        log.debug("borrowed %d minimizers from neighbours", int(upd.sum()))
        Y[upd] = cand[rows, j][upd]
        best[upd] = v[upd]
        if ytol is not None:
            gap = np.max(np.abs(X[nb] - X[:, None, :]))
            local = SearchPlan(plan.radius, plan.half, np.full(d, max(gap, ytol)), plan.anchor)
            best[upd], Y[upd] = _zoom(X[upd], Y[upd], best[upd], datum, view, t, local, ytol)
    return best, Y


def hopf_lax_points(datum: InitialDatum, view: LagrangianView, t: float, X, *, moduli=None, Lambda=None,
                    h=None, coarse_step=None, anchor=None, refine: bool = True, ytol: Optional[float] = None,
                    osc_box: bool = True, cross_check: bool = True, grid_shape=None):
    """Values and minimizers of the Hopf-Lax formula at the points X.

    With ``cross_check`` each point also tries the minimizers found for its
    neighbours (grid neighbours when ``grid_shape`` describes X in C order,
    nearest points otherwise). This repairs points where the coarse scan
    picked the wrong one of two nearly tied basins.
    """
    if not t > 0:
        raise InputError("t must be positive")
    X = np.asarray(X, dtype=float).reshape(-1, datum.dim)
    if view.dim != datum.dim:
        raise InputError("datum and Hamiltonian dimensions differ")
    Lam = _speed(datum, view, moduli, Lambda)
    if t * Lam * (1 + SEARCH_MARGIN) <= 1e-12 * max(1.0, float(np.max(np.abs(X), initial=0.0))):
        # constant datum, or a search ball below float resolution at x:
        # y = x is optimal up to M times the ball radius
        return datum(X), X.copy()
    plan = plan_search(datum, view, t, X, Lam, h=h, coarse_step=coarse_step, anchor=anchor, osc_box=osc_box)
    best, Y = _scan(X, datum, plan, view, t)
    if ytol is None:
        ytol = 1e-8 * max(1.0, float(np.max(np.abs(X))))
    if refine:
        best, Y = _zoom(X, Y, best, datum, view, t, plan, ytol)
    if cross_check and len(X) > 1:
        best, Y = _borrow_minimizers(X, Y, best, datum, view, t, plan, ytol if refine else None, grid_shape)
    dist = np.linalg.norm(X - Y, axis=1)
    tol = 1e-9 * max(1.0, plan.radius)
    if np.any(dist >= plan.radius - tol):
        raise SearchRadiusError("minimizer on the search-ball boundary")
    narrowed = plan.half < plan.radius
    if np.any(narrowed):
        gap = np.abs(X - Y)[:, narrowed] >= plan.half[narrowed] - tol
        if np.any(gap):
            raise SearchRadiusError("minimizer on the oscillation-box boundary")
    return best, Y


def hopf_lax_value(datum: InitialDatum, view: LagrangianView, t: float, x, **kw):
    """(value, minimizer) at a single point."""
    x = np.asarray(x, dtype=float).reshape(1, -1)
    v, y = hopf_lax_points(datum, view, t, x, **kw)
    return float(v[0]), y[0]


@dataclass
class SolveResult:
    u: GridFunction
    grad_u: VectorField
    b: VectorField
    minimizers: np.ndarray
    t: float
    b_dual: VectorField
    Lambda_M: float
    meta: dict = field(default_factory=dict)

    def speed_excess(self) -> float:
        """max_x |x - y_x| / t - Lambda_M (negative when the bound holds)."""
        return float(np.max(self.b.norms()) - self.Lambda_M)

    def regular_mask(self, factor: float = 4.0) -> np.ndarray:
        """Points whose stencil neighbours have slopes within ``factor``*h/t:
        a proxy for a unique, stable minimizer."""
        h = float(np.max(self.b.spec.h))
        bv = self.b.vectors
        ok = np.ones(self.b.spec.shape, dtype=bool)
        for ax in range(self.b.spec.dim):
            jump = np.linalg.norm(np.diff(bv, axis=ax), axis=-1) > factor * h / self.t
            pad_lo = [(0, 0)] * self.b.spec.dim
            pad_hi = [(0, 0)] * self.b.spec.dim
            pad_lo[ax] = (1, 0)
            pad_hi[ax] = (0, 1)
            ok &= ~np.pad(jump, pad_lo)
            ok &= ~np.pad(jump, pad_hi)
            # one-sided differences at the box edge are not comparable
            edge = [slice(None)] * self.b.spec.dim
            edge[ax] = 0
            ok[tuple(edge)] = False
            edge[ax] = -1
            ok[tuple(edge)] = False
        return ok

    def consistency(self) -> np.ndarray:
        """|b - DH(grad u)| per grid point."""
        return np.linalg.norm(self.b.vectors - self.b_dual.vectors, axis=-1)


def solve(datum: InitialDatum, view: LagrangianView, t: float, spec: GridSpec, *, moduli=None, **kw) -> SolveResult:
    if spec.dim != datum.dim:
        raise InputError("grid and datum dimensions differ")
    moduli = moduli or ConvexityModuli(view)
    Lam = _speed(datum, view, moduli, kw.pop("Lambda", None))
    X = spec.points()
    kw.setdefault("h", float(np.min(spec.h)))
    kw.setdefault("grid_shape", spec.shape)
    vals, Y = hopf_lax_points(datum, view, t, X, Lambda=Lam, **kw)
    u = GridFunction(spec, vals)
    grad_u = gradient(u)
    b = VectorField(spec, (X - Y) / t)
    b_dual = VectorField(spec, view.model.grad(grad_u.flat()))
    return SolveResult(u, grad_u, b, Y.reshape(spec.shape + (spec.dim,)), float(t), b_dual, Lam,
                       {"model": view.model.describe(), "datum": datum.name, "M": datum.M})


# ---------------------------------------------------------------- checks


def _propagated(datum, view, s, spec, moduli, later_t, Lam, **kw):
    """S_s u0 on a grid large enough to serve as datum for a later step."""
    if s == 0:
        return datum
    margin = later_t * Lam * (1 + SEARCH_MARGIN) + 2 * float(np.max(spec.h))
    ext = spec.expanded(margin)
    res = solve(datum, view, s, ext, moduli=moduli, Lambda=Lam, **kw)
    return tabulated_datum(res.u, datum.M, name=f"S_{s}")


def functional_identity_check(datum, view, s: float, t: float, spec: GridSpec, *, moduli=None, **kw) -> float:
    """max_x | u(t,x) - min_y { u(s,y) + (t-s) L((x-y)/(t-s)) } | with u(s,.)
    interpolated from a grid."""
    if not (0 <= s < t):
        raise InputError("need 0 <= s < t")
    moduli = moduli or ConvexityModuli(view)
    Lam = _speed(datum, view, moduli, None)
    direct = solve(datum, view, t, spec, moduli=moduli, Lambda=Lam, **kw)
    mid = _propagated(datum, view, s, spec, moduli, t - s, Lam, **kw)
    composed = solve(mid, view, t - s, spec, moduli=moduli, Lambda=Lam, **kw)
    return float(np.max(np.abs(direct.u.values - composed.u.values)))


def semigroup_check(datum, view, t: float, s: float, spec: GridSpec, *, moduli=None, **kw) -> float:
    """max-norm defect between S_{t+s} u0 and S_t (S_s u0)."""
    if not (t > 0 and s > 0):
        raise InputError("need t, s > 0")
    return functional_identity_check(datum, view, s, t + s, spec, moduli=moduli, **kw)


def dynamic_programming_check(datum, view, s: float, t: float, x, *, moduli=None, tol: float = 1e-6, **kw) -> bool:
    """The minimizer y at (t, x) also minimizes w -> s L((z-w)/s) + u0(w)
    from the intermediate point z = (s/t) x + (1 - s/t) y."""
    if not (0 < s < t):
        raise InputError("need 0 < s < t")
    x = np.asarray(x, dtype=float).reshape(-1)
    _, y = hopf_lax_value(datum, view, t, x, moduli=moduli, **kw)
    z = (s / t) * x + (1 - s / t) * y
    vz, w = hopf_lax_value(datum, view, s, z, moduli=moduli, **kw)
    at_y = float(datum(y[None, :])[0] + s * view.L((z - y) / s))
    return bool(np.linalg.norm(w - y) <= tol * max(1.0, np.linalg.norm(x)) or at_y - vz <= tol * max(1.0, abs(vz)))


def epsilon_n(n: int, t: float, M: float, view: LagrangianView, moduli=None) -> float:
    """(1/(M Lambda_M)) max_{|q| <= 2^-n / t} [M|q| + L(q)] by radial scan."""
    if n < 1 or t <= 0 or M <= 0:
        raise InputError("need n >= 1, t > 0, M > 0")
    moduli = moduli or ConvexityModuli(view)
    rho = 2.0 ** (-n) / t
    from .hamiltonian import _polar_sample

    Q = _polar_sample(view.dim, rho, n_r=257)
    val = float(np.max(M * np.linalg.norm(Q, axis=1) + view.L(Q)))
    return val / (M * moduli.Lambda_M(M))


def lattice_spacing(n: int, dim: int) -> float:
    return 2.0 ** (-n + 1) / math.sqrt(dim)


def lattice_approximant(datum, view, t: float, n: int, spec: GridSpec, *, moduli=None):
    """u_n(t,x) = min over the lattice (2^{1-n}/sqrt d) Z^d of
    (1 - eps_n) u0(y) + t L((x-y)/t), with b_n = (x - y*)/t."""
    moduli = moduli or ConvexityModuli(view)
    spacing = lattice_spacing(n, spec.dim)
    X = spec.points()
    step = np.full(spec.dim, spacing)
    if datum.M == 0:
        # constant datum: the nearest lattice node wins, no eps_n needed
        Lam, eps = 0.0, 0.0
        radius = spacing * math.sqrt(spec.dim)
    else:
        Lam = moduli.Lambda_M(datum.M)
        eps = epsilon_n(n, t, datum.M, view, moduli)
        radius = t * Lam * (1 + SEARCH_MARGIN)
    plan = SearchPlan(radius, np.full(spec.dim, radius), step, np.zeros(spec.dim))

    def scaled(Y):
        return (1.0 - eps) * datum(Y)

    vals, Y = _scan(X, scaled, plan, view, t, use_box=False)
    bn = (X - Y) / t
    excess = float(np.max(np.linalg.norm(bn, axis=1))) - Lam
    if datum.M > 0 and excess > 1e-9 * max(1.0, Lam):
        raise NumericError(f"|b_n| exceeds Lambda_M by {excess}")
    return GridFunction(spec, vals), VectorField(spec, bn), {"eps_n": eps, "Lambda_M": Lam, "spacing": step[0]}


def lattice_error_bound(n: int, t: float, datum: InitialDatum, view: LagrangianView, x, moduli=None):
    """Pointwise bound on |u_n(t,x) - u(t,x)|:
    (M + sup_{|q| <= Lambda_M + 2^-n/t} |DL|) 2^-n + (|u0(0)| + M|x| + M Lambda_M t) eps_n."""
    moduli = moduli or ConvexityModuli(view)
    M = datum.M
    Lam = moduli.Lambda_M(M)
    eps = epsilon_n(n, t, M, view, moduli)
    sup_dl = moduli.max_DL(Lam + 2.0 ** (-n) / t)
    u00 = abs(float(datum(np.zeros((1, datum.dim)))[0]))
    xn = np.linalg.norm(np.asarray(x, dtype=float).reshape(-1, datum.dim), axis=1)
    return (M + sup_dl) * 2.0 ** (-n) + (u00 + M * xn + M * Lam * t) * eps
