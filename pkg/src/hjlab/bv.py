"""Discrete total variation, divergence defects and the BV-bound verdict.

Domains are closed axis-aligned boxes given as (lo, hi) pairs. All
integrals use the trapezoid rule on the grid nodes inside the box, so a
box whose faces fall on grid lines is integrated without truncation.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateModelError, InputError
from .grid import GridFunction, GridSpec, VectorField, cell_gradient
from .hamiltonian import ConvexityModuli, _inner_offsets

DEFAULT_SLACK_GAIN = 10.0


# ---------------------------------------------------------------- boxes


def _box(omega, dim):
    lo, hi = omega
    lo = np.broadcast_to(np.asarray(lo, dtype=float), (dim,)).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), (dim,)).copy()
    if np.any(hi <= lo):
        raise InputError("empty domain box")
    return lo, hi


def box_measures(omega, dim: int) -> dict:
    """Volume, diameter and boundary measure of a box."""
    lo, hi = _box(omega, dim)
    w = hi - lo
    vol = float(np.prod(w))
    if dim == 1:
        perim = 2.0
    else:
        perim = float(sum(2.0 * np.prod(np.delete(w, i)) for i in range(dim)))
    return {"volume": vol, "diameter": float(np.linalg.norm(w)), "perimeter": perim}


def _index_range(spec: GridSpec, omega, tol=1e-9):
    """Index slices of the nodes inside the closed box (must lie in the grid)."""
    lo, hi = _box(omega, spec.dim)
    glo = np.array(spec.lo)
    ghi = np.array(spec.hi)
    h = spec.h
    if np.any(lo < glo - tol * h) or np.any(hi > ghi + tol * h):
        raise InputError("domain box is not contained in the grid box")
    i0 = np.ceil((lo - glo) / h - tol).astype(int)
    i1 = np.floor((hi - glo) / h + tol).astype(int)
    if np.any(i1 <= i0):
        raise InputError("domain box holds fewer than two nodes per axis")
    return tuple(slice(a, b + 1) for a, b in zip(i0, i1))


def _trapezoid_weights(n, h):
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


def _cell_weights(spec: GridSpec, sl, skip=None):
    """Tensor trapezoid weights over the sliced nodes, omitting axis ``skip``."""
    out = np.ones(())
    for i, s in enumerate(sl):
        n = s.stop - s.start
        w = np.ones(n) if i == skip else _trapezoid_weights(n, spec.h[i])
        out = np.multiply.outer(out, w)
    return out


def integrate(values, spec: GridSpec, omega) -> float:
    sl = _index_range(spec, omega)
    return float(np.sum(values[sl] * _cell_weights(spec, sl)))


# ---------------------------------------------------------------- TV


@dataclass
class TVReport:
    omega: tuple
    tv_estimate: float
    per_axis: list
    h: list

    def to_dict(self) -> dict:
        return {
            "omega": [list(map(float, self.omega[0])), list(map(float, self.omega[1]))],
            "tv_estimate": self.tv_estimate,
            "per_axis": self.per_axis,
            "h": self.h,
        }


def _as_components(field_or_fn):
    if isinstance(field_or_fn, VectorField):
        return field_or_fn.spec, field_or_fn.vectors
    if isinstance(field_or_fn, GridFunction):
        return field_or_fn.spec, field_or_fn.values[..., None]
    raise InputError("expected a VectorField or GridFunction")


def total_variation(field, omega) -> TVReport:
    """Sum over grid faces inside the box of the Euclidean norm of the
    increment, weighted by the transverse cell measure."""
    spec, V = _as_components(field)
    sl = _index_range(spec, omega)
    sub = V[sl]
    per_axis = []
    for i in range(spec.dim):
        jump = np.linalg.norm(np.diff(sub, axis=i), axis=-1)
        w = _cell_weights(spec, sl, skip=i)
        w = np.take(w, np.arange(jump.shape[i]), axis=i)
        per_axis.append(float(np.sum(jump * w)))
    lo, hi = _box(omega, spec.dim)
    return TVReport((tuple(lo), tuple(hi)), float(sum(per_axis)), per_axis, [float(v) for v in spec.h])


def divergence_measure(field: VectorField, omega, t: float) -> float:
    """Discrete |div b - d/t|(omega) with central-difference divergence."""
    if t <= 0:
        raise InputError("t must be positive")
    spec = field.spec
    div = np.zeros(spec.shape)
    for i in range(spec.dim):
        div += np.gradient(field.vectors[..., i], spec.h[i], axis=i, edge_order=1)
    return integrate(np.abs(div - spec.dim / t), spec, omega)


# ---------------------------------------------------------------- verdicts


def slack_factor(h: float, h_ref: float, gain: float = DEFAULT_SLACK_GAIN) -> float:
    return 1.0 + gain * h / h_ref


@dataclass
class BVBoundVerdict:
    lhs: float
    rhs: float
    holds: bool
    applicable: bool
    slack: float
    constants: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "holds": self.holds,
            "applicable": self.applicable,
            "slack": self.slack,
            "constants": self.constants,
        }


def bv_rhs(gamma: float, Lambda: float, t: float, omega, dim: int) -> float:
    """(1/gamma)(Lambda + diam/t) * perimeter + (sqrt(d)/t) |omega|."""
    g = box_measures(omega, dim)
    return (Lambda + g["diameter"] / t) * g["perimeter"] / gamma + math.sqrt(dim) / t * g["volume"]


def bv_bound_check(result, moduli: ConvexityModuli, M: float, omega, h_ref=None) -> BVBoundVerdict:
    """Measured |Db(t)|(omega) against the slope-variation bound.

    Not applicable when the sampled directional-convexity constant at the
    relevant radius degenerates under refinement.
    """
    spec = result.b.spec
    lhs = total_variation(result.b, omega).tv_estimate
    geo = box_measures(omega, spec.dim)
    h = float(np.max(spec.h))
    slack = slack_factor(h, h_ref if h_ref is not None else geo["diameter"])
    t = result.t
    const = dict(geo, t=t, M=M)
    if M == 0:
        # constant datum: the slope ball shrinks to a point
        Lam, radius = 0.0, 1e-6
    else:
        Lam = moduli.Lambda_M(M)
        radius = moduli.gamma_radius(M)
    try:
        audit = moduli.convexity_audit(radius)
    except DegenerateModelError:
        audit = {"degenerate": True, "lambda_fine": 0.0}
    gamma = audit["lambda_fine"]
    const.update(gamma_M=gamma, Lambda_M=Lam, gamma_radius=radius)
    if audit["degenerate"]:
        return BVBoundVerdict(lhs, math.inf, True, False, slack, const)
    rhs = bv_rhs(gamma, Lam, t, omega, spec.dim)
    return BVBoundVerdict(lhs, rhs, lhs <= rhs * slack, True, slack, const)


# ---------------------------------------------------------------- semiconcavity


def semiconcavity_constant(u: GridFunction, omega, steps=(1, 2)) -> float:
    """max over nodes in omega and axis steps of (u(x+h)+u(x-h)-2u(x))/|h|^2.

    Only centres whose whole stencil lies in omega are used.
    """
    spec = u.spec
    sl = _index_range(spec, omega)
    sub = u.values[sl]
    best = -np.inf
    for i in range(spec.dim):
        for k in steps:
            n = sub.shape[i]
            if n <= 2 * k:
                continue
            plus = np.take(sub, np.arange(2 * k, n), axis=i)
            mid = np.take(sub, np.arange(k, n - k), axis=i)
            minus = np.take(sub, np.arange(0, n - 2 * k), axis=i)
            dd = (plus + minus - 2 * mid) / (k * spec.h[i]) ** 2
            best = max(best, float(np.max(dd)))
    if not np.isfinite(best):
        raise InputError("domain too small for the second-difference stencil")
    return best


def semiconvexity_constant(u: GridFunction, omega, steps=(1, 2)) -> float:
    """-K where K is the semiconcavity constant of -u."""
    return -semiconcavity_constant(GridFunction(u.spec, -u.values), omega, steps)


def poincare_check(u: GridFunction, omega, slack: float = 1.0):
    """(lhs, rhs, holds) for int |u - mean| <= (diam/2) |Du|(omega)."""
    spec = u.spec
    vol = box_measures(omega, spec.dim)["volume"]
    mean = integrate(u.values, spec, omega) / vol
    lhs = integrate(np.abs(u.values - mean), spec, omega)
    tv = total_variation(u, omega).tv_estimate
    rhs = 0.5 * box_measures(omega, spec.dim)["diameter"] * tv
    return lhs, rhs, bool(lhs <= rhs * slack + 1e-12)


# ---------------------------------------------------------------- distances


def _same_grid(a, b):
    if a.spec != b.spec:
        raise InputError("fields live on different grids")


def l1_distance(f1, f2, omega) -> float:
    """int |f1 - f2| (Euclidean norm for vector fields)."""
    _same_grid(f1, f2)
    _, A = _as_components(f1)
    _, B = _as_components(f2)
    return integrate(np.linalg.norm(A - B, axis=-1), f1.spec, omega)


def w11_distance(u1: GridFunction, u2: GridFunction, omega) -> float:
    """int |u1 - u2| (trapezoid) + int |Du1 - Du2| (cell-midpoint rule)."""
    _same_grid(u1, u2)
    spec = u1.spec
    diff = u1.values - u2.values
    sl = _index_range(spec, omega)
    g = cell_gradient(diff[sl], spec.h)
    grad_part = float(np.sum(np.linalg.norm(g, axis=-1))) * float(np.prod(spec.h))
    return integrate(np.abs(diff), spec, omega) + grad_part


# ---------------------------------------------------------------- gradient gap


def gradient_gap_check(res1, res2, moduli: ConvexityModuli, M: float, R: float, slack: float = 1.0) -> dict:
    """||Du1 - Du2||_L1 <= (2^d R^d + 1) * Psi_M^{-1}(||b1 - b2||_L1) on the
    cube [-R, R]^d, with b_i = DH(Du_i). The inverse is taken on [0, 2M];
    past the top of its table it saturates at 2M, where the bound holds
    trivially."""
    spec = res1.u.spec
    d = spec.dim
    omega = ([-R] * d, [R] * d)
    _same_grid(res1.u, res2.u)
    lhs = l1_distance(res1.grad_u, res2.grad_u, omega)
    gap = l1_distance(res1.b_dual, res2.b_dual, omega)
    s, v = moduli.psi_table(M, 2 * M)
    beta = 2 * M if gap > v[-1] else moduli.psi_inverse(M, gap, 2 * M)
    rhs = (2 ** d * R ** d + 1) * beta
    return {"lhs": lhs, "rhs": rhs, "b_gap": gap, "beta": beta, "holds": bool(lhs <= rhs * slack)}


def local_phi(model, s: float, p) -> float:
    """s * max over the closed ball B(p, s/2) of the Hessian operator norm."""
    p = np.asarray(p, dtype=float).reshape(1, -1)
    Q = p + _inner_offsets(model.dim, s / 2)
    return float(s * np.max(model.hess_norm(Q)))


def semiconvex_admissible_K(moduli: ConvexityModuli, T: float, M: float, r: float, pbar) -> float:
    """Largest semiconvexity constant K for which solutions started from
    data with subgradients in B(pbar, r/2) stay semiconvex up to time T."""
    pbar = np.asarray(pbar, dtype=float)
    if np.linalg.norm(pbar) > M - r / 2 + 1e-12:
        raise InputError("pbar must lie in the ball of radius M - r/2")
    return moduli.lambda_M(M) / (4 * T) * r / local_phi(moduli.model, r, pbar)


def semiconvex_preserved_C(moduli: ConvexityModuli, K: float, T: float, M: float, r: float, pbar) -> float:
    """C with u(t, x+h) + u(t, x-h) - 2u(t, x) >= -C |h|^2 for t <= T."""
    lam = moduli.lambda_M(M)
    phi = local_phi(moduli.model, r, np.asarray(pbar, dtype=float))
    return 2 * K * (4 + (K * T * phi / r + 20 / lam) ** 2)
