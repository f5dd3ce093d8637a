"""Metric entropy: empirical covering/packing counts and explicit bounds.

Samples are finite sets of functions on a shared grid over the cube
[-R, R]^d. Distances are L1 or W11; gradients use the cell-midpoint rule,
so piecewise-linear members whose kinks sit on grid nodes are measured
exactly.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate as sp_integrate
from scipy.special import gamma as gamma_fn

from . import kernels
from .bv import _trapezoid_weights, semiconcavity_constant
from .errors import InputError, RangeError
from .grid import GridFunction, GridSpec, cell_gradient
from .hamiltonian import ConvexityModuli

log = logging.getLogger(__name__)

MEMBER_BUDGET = 4096
METRICS = ("L1", "W11")
CLASS_TAGS = ("solution_set", "bv_class", "semiconcave", "generic")


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / gamma_fn(d / 2 + 1)


# ---------------------------------------------------------------- samples


@dataclass
class FunctionClassSample:
    spec: GridSpec
    values: np.ndarray  # (n_members, *spec.shape)
    class_tag: str = "generic"
    seed: Optional[int] = None
    meta: dict = field(default_factory=dict)
    _dist: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim == len(self.spec.shape):
            self.values = self.values[None]
        if self.values.shape[1:] != self.spec.shape:
            raise InputError("member shape does not match the grid")
        if len(self.values) > MEMBER_BUDGET:
            raise InputError(f"sample exceeds the {MEMBER_BUDGET}-member budget")
        if self.class_tag not in CLASS_TAGS:
            raise InputError(f"unknown class tag {self.class_tag}")

    def __len__(self):
        return len(self.values)

    def member(self, i: int) -> GridFunction:
        return GridFunction(self.spec, self.values[i])

    def distances(self, metric: str = "W11") -> np.ndarray:
        """Symmetric pairwise distance matrix, cached per metric."""
        if metric not in METRICS:
            raise InputError(f"metric must be one of {METRICS}")
        if metric not in self._dist:
            self._dist[metric] = _pairwise(self, metric)
        return self._dist[metric]


def _node_weights(spec: GridSpec) -> np.ndarray:
    w = np.ones(())
    for n, h in zip(spec.n, spec.h):
        w = np.multiply.outer(w, _trapezoid_weights(n, h))
    return w.reshape(-1)


def _pairwise(sample: FunctionClassSample, metric: str) -> np.ndarray:
    spec = sample.spec
    n = len(sample)
    F = sample.values.reshape(n, -1)
    D = kernels.pairwise_l1(F, _node_weights(spec))
    if metric == "L1":
        return D
    G = np.stack([cell_gradient(v, spec.h) for v in sample.values])
    vol = float(np.prod(spec.h))
    if spec.dim == 1:
        G = G.reshape(n, -1)
        return D + kernels.pairwise_l1(G, np.full(G.shape[1], vol))
    G = G.reshape(n, -1, spec.dim)
    for a in range(n - 1):
        row = np.linalg.norm(G[a] - G[a + 1:], axis=-1).sum(axis=1) * vol
        D[a, a + 1:] += row
        D[a + 1:, a] += row
    return D


def gradient_l1_distances(sample: FunctionClassSample) -> np.ndarray:
    """Pairwise ||Dv - Dw||_L1 (the separation metric of packing families)."""
    spec = sample.spec
    n = len(sample)
    G = np.stack([cell_gradient(v, spec.h) for v in sample.values]).reshape(n, -1, spec.dim)
    vol = float(np.prod(spec.h))
    D = np.zeros((n, n))
    for a in range(n - 1):
        row = np.linalg.norm(G[a] - G[a + 1:], axis=-1).sum(axis=1) * vol
        D[a, a + 1:] = row
        D[a + 1:, a] = row
    return D


# ---------------------------------------------------------------- counts


def _check_count_args(sample, eps):
    if len(sample) == 0:
        raise InputError("empty sample")
    if not eps > 0:
        raise InputError("eps must be positive")


def _greedy_cover(D: np.ndarray, eps: float) -> np.ndarray:
    """Centres of the greedy cover: each step takes the uncovered member
    whose closed eps-ball holds the most uncovered members (lowest index on
    ties)."""
    n = len(D)
    near = D <= eps
    uncovered = np.ones(n, dtype=bool)
    centres = []
    while uncovered.any():
        gain = (near & uncovered[None, :]).sum(axis=1)
        gain = np.where(uncovered, gain, -1)
        c = int(np.argmax(gain))
        centres.append(c)
        uncovered &= ~near[c]
    return np.array(centres, dtype=int)


def covering_count(sample: FunctionClassSample, eps: float, metric: str = "W11") -> int:
    _check_count_args(sample, eps)
    return len(_greedy_cover(sample.distances(metric), eps))


def _greedy_packing(D: np.ndarray, eps: float) -> np.ndarray:
    """Maximal eps-separated subset (pairwise distance > eps), built by
    repeatedly taking the remaining member with the fewest remaining
    neighbours."""
    n = len(D)
    near = D <= eps
    alive = np.ones(n, dtype=bool)
    chosen = []
    while alive.any():
        deg = (near & alive[None, :]).sum(axis=1)
        deg = np.where(alive, deg, n + 1)
        c = int(np.argmin(deg))
        chosen.append(c)
        alive &= ~near[c]
    return np.array(chosen, dtype=int)


def packing_count(sample: FunctionClassSample, eps: float, metric: str = "W11") -> int:
    """Size of an eps-separated subset: the larger of the min-degree greedy
    packing and the greedy cover's centres, which are themselves
    eps-separated. Either set is maximal, hence also an eps-cover."""
    _check_count_args(sample, eps)
    D = sample.distances(metric)
    return max(len(_greedy_packing(D, eps)), len(_greedy_cover(D, eps)))


# ---------------------------------------------------------------- packing family


def _bump_profile(s, a, K):
    """Radial C^{1,1} bump of curvature +-K supported in |s| <= a/2."""
    s = np.abs(s)
    inner = K * a * a / 16 - 0.5 * K * s * s
    outer = 0.5 * K * (s - a / 2) ** 2
    return np.where(s <= a / 4, inner, np.where(s <= a / 2, outer, 0.0))


def bump_gradient_mass(a: float, K: float, d: int) -> float:
    """int |grad bump| over R^d."""
    sphere = d * unit_ball_volume(d)

    def f(s):
        slope = K * s if s <= a / 4 else K * (a / 2 - s)
        return slope * s ** (d - 1)

    val, _ = sp_integrate.quad(f, 0.0, a / 2, points=[a / 4])
    return sphere * val


def packing_eps_max(r: float, K: float, R: float, d: int) -> float:
    return min(r, K) * unit_ball_volume(d) * R ** d / ((d + 1) * 2 ** (d + 8))


def _random_code(n_bits: int, n_words: int, min_dist: int, rng, max_tries: int = 200_000):
    """Random binary code with pairwise Hamming distance >= min_dist; the
    all-zero word comes first."""
    words = [np.zeros(n_bits, dtype=bool)]
    tries = 0
    while len(words) < n_words and tries < max_tries:
        tries += 1
        w = rng.random(n_bits) < 0.5
        W = np.array(words)
        if np.min(np.sum(W != w, axis=1)) >= min_dist:
            words.append(w)
    return np.array(words)


def semiconcave_packing_family(r: float, K: float, R: float, eps: float, dim: int = 1, n_members: int = 256,
                               seed: int = 0, per_cell: int = 16, check: bool = True) -> FunctionClassSample:
    """Lipschitz-r, K-semiconcave functions on [-R, R]^d whose gradients are
    pairwise >= 2 eps apart in L1.

    The cube is cut into N^d cells; each cell carries a radial bump of
    curvature K with sign +1 (bit 0) or -1 (bit 1). Code words are drawn at
    random with pairwise Hamming distance >= N^d / 4, so two members differ
    on at least N^d / 4 cells, each contributing twice the bump's gradient
    mass. N is the largest cell count keeping that separation >= 2 eps.
    """
    if not (r > 0 and K > 0 and R > 0 and eps > 0):
        raise InputError("r, K, R, eps must be positive")
    eps_max = packing_eps_max(r, K, R, dim)
    if eps > eps_max * (1 + 1e-12):
        raise InputError(f"eps {eps} above the admissible {eps_max}")
    if n_members > MEMBER_BUDGET:
        raise InputError("n_members exceeds the sample budget")

    def separation(N):
        a = 2 * R / N
        cells = N ** dim
        return 2 * bump_gradient_mass(a, K, dim) * math.ceil(cells / 4)

    N = 1
    while separation(N + 1) >= 2 * eps:
        N += 1
        if N > 4096:
            break
    a = 2 * R / N
    if K * a / 4 > r:
        raise InputError("bump slope exceeds r; eps too small for this r")
    cells = N ** dim
    spec = GridSpec.cube(R, N * per_cell + 1, dim)
    rng = np.random.default_rng(seed)
    code = _random_code(cells, n_members, math.ceil(cells / 4), rng)
    if len(code) < n_members:
        log.warning("code search found %d of %d words", len(code), n_members)
    # one bump per cell, evaluated on the grid once
    centres_1d = -R + a * (np.arange(N) + 0.5)
    P = spec.points()
    idx = np.clip(((P + R) / a).astype(int), 0, N - 1)
    cell_id = np.ravel_multi_index(tuple(idx.T), (N,) * dim)
    local = P - centres_1d[idx]
    bump = _bump_profile(np.linalg.norm(local, axis=1), a, K)
    signs = np.where(code, -1.0, 1.0)
    values = (signs[:, cell_id] * bump[None, :]).reshape((len(code),) + spec.shape)
    sample = FunctionClassSample(spec, values, "semiconcave", seed,
                                 {"r": r, "K": K, "R": R, "eps": eps, "cells_per_axis": N,
                                  "min_hamming": math.ceil(cells / 4), "separation_bound": separation(N)})
    if check:
        audit = family_audit(sample, eps)
        sample.meta["audit"] = audit
        if not audit["passed"]:
            raise RangeError(f"packing family failed its audit: {audit}")
    return sample


def family_audit(sample: FunctionClassSample, eps: float) -> dict:
    """Pairwise 2 eps separation in gradient L1 plus class membership."""
    D = gradient_l1_distances(sample)
    n = len(sample)
    off = D[~np.eye(n, dtype=bool)] if n > 1 else np.array([np.inf])
    min_sep = float(off.min())
    K = sample.meta["K"]
    r = sample.meta["r"]
    R = sample.meta["R"]
    omega = ([-R] * sample.spec.dim, [R] * sample.spec.dim)
    tolK = 1e-9 * max(1.0, K)
    worst_K = max(semiconcavity_constant(sample.member(i), omega) for i in range(n))
    lip = 0.0
    for i in range(n):
        g = cell_gradient(sample.values[i], sample.spec.h)
        lip = max(lip, float(np.max(np.linalg.norm(g, axis=-1))))
    return {
        "min_separation": min_sep,
        "required": 2 * eps,
        "worst_semiconcavity": worst_K,
        "worst_lipschitz": lip,
        "passed": bool(min_sep >= 2 * eps and worst_K <= K + tolK and lip <= r * (1 + 1e-9)),
    }


# ---------------------------------------------------------------- theory


@dataclass
class BoundConstants:
    d: int
    T: float
    R: float
    m: float
    M: float
    lambda_M: float
    gamma_M: float
    Lambda_M: float
    V_T: float
    m_T: float
    beta_minus: float
    beta_plus: float
    R_minus: float
    R_plus: float
    Gamma_minus: float
    Gamma_plus: float
    eps_window: float
    admissible: bool = True

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def bound_constants(moduli: ConvexityModuli, T: float, R: float, m: float, M: float) -> BoundConstants:
    if min(T, R, m, M) <= 0:
        raise InputError("T, R, m, M must be positive")
    d = moduli.view.dim
    lam = moduli.lambda_M(M)
    gam = moduli.gamma_M(M)
    Lam = moduli.Lambda_M(M)
    sd = math.sqrt(d)
    V_T = d * 2 ** d * R ** (d - 1) / gam * (Lam + 2 * sd * R / T) + sd * 2 ** d * R ** d / T
    m_T = m + sd * M * R + T * moduli.sup_L(Lam)
    beta_m = 2 ** d * R ** d * m
    beta_p = (2 ** (d + 1) * R ** d + 2) * (3 + sd * R) * m_T
    R_m = unit_ball_volume(d) * R ** d / ((d + 1) * 2 ** (d + 9))
    R_p = (2 ** d * R ** d + 1) * (3 + sd * R)
    G_m = (8 * R * lam / (3 * T)) ** d / (8 * math.log(2))
    G_p = 48 * sd * (12 * d * sd * R * V_T) ** d
    # admissibility window; inverses saturate at M past the top of their tables
    arg_psi = min(12 * R * V_T ** 2 / (3 * V_T + 2 * Lam), 4 * V_T * (R * V_T / Lam) ** (1 / d))
    arg_phi = lam / (2 * T)
    win = min(R_p * _saturating_inverse(moduli.psi_table(M), arg_psi, M),
              R_m * _saturating_inverse(moduli.phi_table(M), arg_phi, M))
    return BoundConstants(d, T, R, m, M, lam, gam, Lam, V_T, m_T, beta_m, beta_p, R_m, R_p, G_m, G_p, win)


def _saturating_inverse(table, y, cap):
    s, v = table
    if y >= v[-1]:
        return float(cap)
    from .hamiltonian import _invert

    return _invert(s, v, y)


def theoretical_bounds(moduli: ConvexityModuli, T: float, R: float, m: float, M: float, eps: float):
    """(lower, upper, constants) for the eps-entropy of the solution set in
    W11 on the cube [-R, R]^d. Outside the admissible window the values are
    still returned and ``constants.admissible`` is False."""
    if not eps > 0:
        raise InputError("eps must be positive")
    c = bound_constants(moduli, T, R, m, M)
    d = c.d
    admissible = eps < c.eps_window
    s_phi = eps / c.R_minus
    s_psi = eps / c.R_plus
    if s_phi > M or s_psi > M:
        raise RangeError("eps too large for the gradient-variation moduli")
    fl = math.floor(c.beta_minus / eps)
    log_part = math.log2(fl) if fl >= 1 else -math.inf
    lower = log_part + c.Gamma_minus * moduli.phi_M(M, s_phi) ** (-d)
    upper = math.log2(c.beta_plus / eps) + c.Gamma_plus * moduli.psi_M(M, s_psi) ** (-d)
    c.admissible = bool(admissible)
    return lower, upper, c


def bound_slopes(moduli: ConvexityModuli, T: float, R: float, m: float, M: float, eps_hi: float,
                 decades: float = 2.0, n: int = 9):
    """Least-squares slopes of log2(lower) and log2(upper) against
    log2(1/eps) over [eps_hi 10^-decades, eps_hi]."""
    eps = eps_hi * np.logspace(-decades, 0, n)
    lo, up = [], []
    for e in eps:
        a, b, _ = theoretical_bounds(moduli, T, R, m, M, float(e))
        lo.append(a)
        up.append(b)
    lo = np.array(lo)
    up = np.array(up)
    x = np.log2(1 / eps)
    s_lo = float(np.polyfit(x, np.log2(lo), 1)[0]) if np.all(lo > 0) else math.nan
    s_up = float(np.polyfit(x, np.log2(up), 1)[0])
    return {"eps": eps, "lower": lo, "upper": up, "slope_lower": s_lo, "slope_upper": s_up,
            "ordered": bool(np.all(lo <= up))}


# ---------------------------------------------------------------- empirical


@dataclass
class ExponentFit:
    slope: float
    residual: float
    degenerate: bool
    counts: list

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def empirical_exponent(sample_generator, eps_grid, metric: str = "W11") -> ExponentFit:
    """Slope of log2(log2 N_eps) against log2(1/eps).

    ``sample_generator`` is either a FunctionClassSample (reused for every
    eps) or a callable eps -> FunctionClassSample. Counts of 1 carry no
    entropy and make the fit degenerate.
    """
    eps_grid = np.asarray(sorted(eps_grid), dtype=float)
    if len(eps_grid) < 4:
        raise InputError("need at least 4 eps values")
    if eps_grid[-1] / eps_grid[0] < 10 * (1 - 1e-9):
        raise InputError("eps grid must span at least one decade")
    counts = []
    for e in eps_grid:
        smp = sample_generator(float(e)) if callable(sample_generator) else sample_generator
        counts.append(covering_count(smp, float(e), metric))
    counts = np.array(counts)
    if np.all(counts == counts[0]) or np.any(counts <= 1):
        return ExponentFit(math.nan, math.nan, True, counts.tolist())
    x = np.log2(1 / eps_grid)
    y = np.log2(np.log2(counts))
    coef, res, *_ = np.polyfit(x, y, 1, full=True)
    resid = float(np.sqrt(res[0] / len(x))) if len(res) else 0.0
    return ExponentFit(float(coef[0]), resid, False, counts.tolist())


def constants_sample(values, spec: GridSpec) -> FunctionClassSample:
    vals = np.asarray(values, dtype=float)
    return FunctionClassSample(spec, vals[:, None] * np.ones((len(vals),) + spec.shape), "generic")


def solution_set_sample(view, T: float, R: float, m: float, M: float, n_members: int, n_grid: int,
                        seed: int = 0, moduli=None) -> FunctionClassSample:
    """S_T applied to random piecewise-linear data in U_[m, M]."""
    from .hopflax import random_piecewise_linear, solve

    if n_members > MEMBER_BUDGET:
        raise InputError("n_members exceeds the sample budget")
    moduli = moduli or ConvexityModuli(view)
    spec = GridSpec.cube(R, n_grid, view.dim)
    rng = np.random.default_rng(seed)
    seeds = rng.integers(0, 2 ** 31, n_members)
    vals = []
    for s in seeds:
        datum = random_piecewise_linear(int(s), view.dim, M=M, m=m)
        vals.append(solve(datum, view, T, spec, moduli=moduli).u.values)
    return FunctionClassSample(spec, np.array(vals), "solution_set", seed, {"T": T, "m": m, "M": M})


# ---------------------------------------------------------------- BV class


def staircase_sample(R: float, M: float, V: float, n_members: int, n_grid: int, dim: int = 1, seed: int = 0,
                     max_jumps: int = 6) -> FunctionClassSample:
    """Scalar staircases in the first coordinate with |f| <= M and total
    variation <= V on [-R, R]^d."""
    rng = np.random.default_rng(seed)
    spec = GridSpec.cube(R, n_grid, dim)
    x = spec.axes()[0]
    transverse = (2 * R) ** (dim - 1)
    vals = []
    for _ in range(n_members):
        k = int(rng.integers(0, max_jumps + 1))
        pos = np.sort(rng.uniform(-R, R, k))
        sizes = rng.uniform(-1, 1, k)
        budget = V / transverse
        tot = np.abs(sizes).sum()
        if tot > 0:
            sizes *= budget * rng.uniform(0, 1) / tot
        base = rng.uniform(-M, M)
        prof = base + np.array([sizes[pos <= xi].sum() for xi in x])
        prof = np.clip(prof, -M, M)
        shape = [1] * dim
        shape[0] = len(x)
        vals.append(np.broadcast_to(prof.reshape(shape), spec.shape))
    return FunctionClassSample(spec, np.array(vals), "bv_class", seed, {"R": R, "M": M, "V": V})


def bv_cover_bound_log2(R: float, V: float, eps: float, d: int) -> float:
    """log2 of the covering-number ceiling 2^{48 sqrt(d) (6 d sqrt(d) R V / eps)^d}."""
    sd = math.sqrt(d)
    return 48 * sd * (6 * d * sd * R * V / eps) ** d


def bv_class_hypothesis(R: float, M: float, V: float, eps: float, d: int) -> float:
    if V <= 0:
        return 0.0
    return min(6 * R * V * V / (3 * V + 2 * M), 2 * V * (R * V / M) ** (1 / d))


def quantization_codes(sample: FunctionClassSample, R: float, M: float, V: float, eps: float) -> np.ndarray:
    """Integer codes of cell averages: members with equal codes are within
    eps of each other in L1.

    Cell averages move a member by at most (sqrt(d) kappa / 2) V in L1
    (Poincare on each cell), value rounding by (eta / 2)(2R)^d. Each gets
    eps/4, or all of eps/2 goes to rounding when V = 0.
    """
    spec = sample.spec
    d = spec.dim
    vol = (2 * R) ** d
    if V > 0:
        kappa = eps / (2 * math.sqrt(d) * V)
        eta = eps / (2 * vol)
    else:
        kappa = 2 * R
        eta = eps / vol
    n_cells = max(1, math.ceil(2 * R / kappa - 1e-12))
    # nodes are assigned to cells by position; averages use node weights
    P = spec.points()
    idx = np.clip(((P + R) / (2 * R) * n_cells).astype(int), 0, n_cells - 1)
    cid = np.ravel_multi_index(tuple(idx.T), (n_cells,) * d)
    w = _node_weights(spec)
    wsum = np.bincount(cid, weights=w, minlength=n_cells ** d)
    n_bins = math.ceil(2 * M / eta - 1e-12)
    codes = []
    for v in sample.values.reshape(len(sample), -1):
        avg = np.bincount(cid, weights=w * v, minlength=n_cells ** d) / np.where(wsum > 0, wsum, 1)
        k = np.clip(np.floor((avg + M) / eta).astype(np.int64), 0, n_bins - 1)
        codes.append(k)
    return np.array(codes)


def bv_class_cover(R: float, M: float, V: float, eps: float, dim: int = 1, sample: Optional[FunctionClassSample] = None,
                   n_members: int = 200, n_grid: int = 257, seed: int = 0, check_hypothesis: bool = True,
                   details: bool = False):
    """Number of distinct quantization codes on a sample of the BV class
    (a constructive eps-cover of the sample in L1). Raises if the count
    ever exceeds the class-wide ceiling."""
    if min(R, M, eps) <= 0 or V < 0:
        raise InputError("need R, M, eps > 0 and V >= 0")
    hyp = bv_class_hypothesis(R, M, V, eps, dim)
    if check_hypothesis and not eps < hyp:
        raise InputError(f"eps must be below {hyp}")
    if sample is None:
        sample = staircase_sample(R, M, V, n_members, n_grid, dim, seed)
    codes = quantization_codes(sample, R, M, V, eps)
    count = len({c.tobytes() for c in codes})
    ceiling = bv_cover_bound_log2(R, V, eps, dim)
    if check_hypothesis and math.log2(count) > ceiling:
        raise RangeError("cover count above the class ceiling")
    if details:
        return count, {"log2_ceiling": ceiling, "hypothesis": hyp, "members": len(sample)}
    return count


# ---------------------------------------------------------------- report


@dataclass
class EntropyReport:
    eps: list
    covering: list
    packing: list
    lower: list
    upper: list
    fit: Optional[dict]
    constants: dict
    meta: dict = field(default_factory=dict)

    def sandwich_ok(self, packing_2eps: list) -> bool:
        return all(p2 <= n <= p for p2, n, p in zip(packing_2eps, self.covering, self.packing))

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def entropy_report(sample: FunctionClassSample, eps_grid, metric: str, moduli: Optional[ConvexityModuli] = None,
                   T=None, R=None, m=None, M=None) -> EntropyReport:
    eps_grid = [float(e) for e in sorted(eps_grid)]
    if not eps_grid:
        raise InputError("empty eps grid")
    cov = [covering_count(sample, e, metric) for e in eps_grid]
    pack = [packing_count(sample, e, metric) for e in eps_grid]
    lower, upper, consts = [], [], {}
    if moduli is not None:
        for e in eps_grid:
            try:
                a, b, c = theoretical_bounds(moduli, T, R, m, M, e)
            except RangeError:
                a, b, c = math.nan, math.nan, None
            lower.append(a)
            upper.append(b)
            if c is not None:
                consts = c.to_dict()
    fit = None
    if len(eps_grid) >= 4 and eps_grid[-1] / eps_grid[0] >= 10:
        fit = empirical_exponent(sample, eps_grid, metric).to_dict()
    return EntropyReport(eps_grid, cov, pack, lower, upper, fit, consts,
                         {"metric": metric, "class": sample.class_tag, "members": len(sample),
                          "note": "sampled counts are lower evidence for the full class"})
