"""Slope fields without bounded variation for a quartic Hamiltonian.

H(p) = (27/256) p1^4 + c p2^2 has no uniform directional convexity near
the p2-axis. Starting from a datum whose time-1 solution is the lower
envelope g1(x) = min_i L(x - y_i) over the staggered lattice
y_i = (i1 delta, i2 delta^(2/3)), i1 + i2 even, the backward slope
b(1, x) = x - y_i jumps by about delta^(2/3) across every cell boundary
while cells number about l^2 / delta^(5/3), so |Db(1)| grows like
delta^(-1/3).

The datum is g0 = -S_1(-g1), computed with the same Hopf-Lax engine on
one period of the lattice and clamped to zero outside [-2l, 2l]^2.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .bv import total_variation
from .errors import InputError, RangeError
from .grid import GridFunction, GridSpec, VectorField
from .hamiltonian import LagrangianView, numeric_legendre, quartic2d
from .hopflax import InitialDatum, hopf_lax_points

log = logging.getLogger(__name__)

# q2 coefficient of L for each variant: L = |q1|^(4/3) + q2^2 / (4c)
VARIANTS = {"stated": 0.25, "conjugate": 1.0}
CELL_POINTS = 12


def gamma_curve(qbar, s, c2: float = 1.0):
    """Curve where |q1|^(4/3) + c2 q2^2 takes equal values at q and q - qbar."""
    q1, q2 = float(qbar[0]), float(qbar[1])
    if q2 == 0:
        raise InputError("qbar[1] must be nonzero")
    s = np.asarray(s, dtype=float)
    return (np.abs(s - q1) ** (4 / 3) - np.abs(s) ** (4 / 3)) / (2 * c2 * q2) + q2 / 2


def curve_length(qbar, c2: float = 1.0, n: int = 20001) -> float:
    s = np.linspace(min(0.0, qbar[0]), max(0.0, qbar[0]), n)
    g = gamma_curve(qbar, s, c2)
    return float(np.sum(np.hypot(np.diff(s), np.diff(g))))


@dataclass(frozen=True)
class LatticeDatumSpec:
    delta: float
    ell: float
    variant: str = "stated"
    h: float = None  # grid spacing; default delta^(2/3) / 12

    def __post_init__(self):
        if not (0 < self.delta < self.ell < 1):
            raise InputError("need 0 < delta < ell < 1")
        if self.variant not in VARIANTS:
            raise InputError(f"variant must be one of {sorted(VARIANTS)}")

    @property
    def pitch(self):
        return np.array([self.delta, self.delta ** (2 / 3)])

    @property
    def spacing(self):
        """Lattice-aligned grid steps: an integer number per pitch."""
        h = self.h if self.h is not None else self.delta ** (2 / 3) / CELL_POINTS
        p = self.pitch
        return p / np.ceil(p / h - 1e-9)

    def view(self) -> LagrangianView:
        return LagrangianView(quartic2d(VARIANTS[self.variant]))

    def lipschitz_bound(self) -> float:
        """sup of |DL| over the cell box [-delta, delta] x [-delta^(2/3), delta^(2/3)]."""
        return float(np.linalg.norm(self.view().DL(self.pitch)))


def _nearest_sites(spec: LatticeDatumSpec, X):
    """L-nearest lattice site for each row of X (lowest index on ties)."""
    view = spec.view()
    p = spec.pitch
    base = np.floor(X / p).astype(np.int64)
    best = np.full(len(X), np.inf)
    site = np.zeros_like(X)
    for a in (-1, 0, 1, 2):
        for b in (-1, 0, 1, 2):
            idx = base + np.array([a, b])
            ok = (idx.sum(axis=1) % 2) == 0
            Y = idx * p
            v = np.where(ok, view.L(X - Y), np.inf)
            upd = v < best
            best = np.where(upd, v, best)
            site[upd] = Y[upd]
    return best, site


def envelope(spec: LatticeDatumSpec, X) -> np.ndarray:
    """g1(x) = min_i L(x - y_i)."""
    return _nearest_sites(spec, np.asarray(X, dtype=float).reshape(-1, 2))[0]


@dataclass
class LatticeDatum:
    spec: LatticeDatumSpec
    datum: InitialDatum
    table: GridFunction
    M_delta: float
    meta: dict = field(default_factory=dict)


def _period_table(spec: LatticeDatumSpec):
    """g0 on one period [0, 2 delta] x [0, 2 delta^(2/3)], nodes on the
    lattice-aligned grid."""
    view = spec.view()
    step = spec.spacing
    period = 2 * spec.pitch
    n = np.rint(period / step).astype(int) + 1
    tab = GridSpec((0.0, 0.0), tuple(period), tuple(n))
    M = spec.lipschitz_bound()
    neg = InitialDatum(lambda Y: -envelope(spec, Y), M, 0.0, 2, "neg_envelope")
    # the maximizers are the sharp peaks of the envelope at the sites, so
    # the scan runs on the lattice-aligned nodes, which contain every site
    vals, _ = hopf_lax_points(neg, view, 1.0, tab.points(), h=float(step.min()), coarse_step=step,
                              anchor=np.zeros(2))
    return GridFunction(tab, -vals), n - 1


def build_datum(spec: LatticeDatumSpec) -> LatticeDatum:
    """g0 extended periodically and clamped by M_delta * dist(y, outside of
    [-2l, 2l]^2). The clamp keeps the Lipschitz bound and leaves g0 intact
    wherever g0 is below the cutoff."""
    table, cells = _period_table(spec)
    step = spec.spacing
    M = spec.lipschitz_bound()
    vals = table.values
    g0_max = float(vals.max())
    ell = spec.ell
    interp = table.interpolator()
    period = 2 * spec.pitch

    def g0(Y):
        Y = np.asarray(Y, dtype=float)
        k = Y / step
        kr = np.rint(k)
        on_node = np.all(np.abs(k - kr) < 1e-7, axis=1)
        out = np.empty(len(Y))
        if on_node.any():
            idx = np.mod(kr[on_node].astype(np.int64), cells)
            out[on_node] = vals[idx[:, 0], idx[:, 1]]
        off = ~on_node
        if off.any():
            out[off] = interp(np.mod(Y[off], period))
        return out

    def u0(Y):
        Y = np.asarray(Y, dtype=float).reshape(-1, 2)
        dist = np.min(2 * ell - np.abs(Y), axis=1)
        return np.minimum(g0(Y), M * np.maximum(dist, 0.0))

    # minimizers obey t L(x - y) <= osc; that reach must stay inside the
    # region where the clamp is inactive
    view = spec.view()
    reach = view.axis_extent(g0_max)
    clamp_free = g0_max / M if M > 0 else math.inf
    inner = 1.5 * ell
    ok = bool(np.max(reach) <= ell / 2 and clamp_free <= 2 * ell - inner)
    if not ok:
        raise RangeError(f"lattice datum reach {np.max(reach)} exceeds l/2 = {ell / 2}")
    m = float(abs(u0(np.zeros((1, 2)))[0]))
    datum = InitialDatum(u0, M, m, 2, "lattice", {"delta": spec.delta, "ell": ell, "variant": spec.variant})
    meta = {"g0_max": g0_max, "reach": reach.tolist(), "M_delta": M, "M_delta_le_half_ell": bool(M <= ell / 2)}
    return LatticeDatum(spec, datum, table, M, meta)


@dataclass
class Measurement:
    delta: float
    ell: float
    h: list
    tv_b: float
    tv_b_jump: float
    tv_du: float
    cell_identity: float
    meta: dict = field(default_factory=dict)

    def row(self) -> dict:
        return {"delta": self.delta, "ell": self.ell, "h1": self.h[0], "h2": self.h[1], "tv_b": self.tv_b,
                "tv_b_jump": self.tv_b_jump, "tv_du": self.tv_du, "cell_identity": self.cell_identity}


def default_grid(spec: LatticeDatumSpec) -> GridSpec:
    step = spec.spacing
    n = np.ceil(2 * spec.ell / step - 1e-9).astype(int) + 1
    return GridSpec((-spec.ell, -spec.ell), (spec.ell, spec.ell), tuple(int(k) for k in n))


def solve_and_measure(spec: LatticeDatumSpec, grid: GridSpec = None, lattice: LatticeDatum = None) -> Measurement:
    """TV of b(1, .) and Du(1, .) on [-l, l]^2.

    Candidates are the lattice-aligned table nodes, where the datum is
    exact; sites y_i are among them, so b = x - y_i comes out exactly on
    cell interiors and no zoom refinement is applied.
    """
    lattice = lattice or build_datum(spec)
    grid = grid or default_grid(spec)
    if np.max(grid.h) > spec.delta ** (2 / 3) / 8 * (1 + 1e-9):
        raise InputError("grid does not resolve delta^(2/3) / 8")
    view = spec.view()
    X = grid.points()
    vals, Y = hopf_lax_points(lattice.datum, view, 1.0, X, coarse_step=spec.spacing, anchor=np.zeros(2),
                              refine=False)
    b = VectorField(grid, X - Y)
    du = VectorField(grid, view.DL(X - Y))
    omega = (list(grid.lo), list(grid.hi))
    tv_b = total_variation(b, omega).tv_estimate
    tv_du = total_variation(du, omega).tv_estimate
    # jump part: faces whose endpoints chose different sites
    Ys = Y.reshape(grid.shape + (2,))
    bv = b.vectors
    jump = 0.0
    for i in range(2):
        diff_site = np.any(np.diff(Ys, axis=i) != 0, axis=-1)
        inc = np.linalg.norm(np.diff(bv, axis=i), axis=-1)
        w = np.full(inc.shape, grid.h[1 - i])
        edge = [slice(None)] * 2
        edge[1 - i] = 0
        w[tuple(edge)] *= 0.5
        edge[1 - i] = -1
        w[tuple(edge)] *= 0.5
        jump += float(np.sum(np.where(diff_site, inc * w, 0.0)))
    # cell identity: u(1, x) = g1(x) and b = x - nearest site, away from boundaries
    g1, site = _nearest_sites(spec, X)
    far = _away_from_boundaries(spec, X, float(np.min(grid.h)))
    err = np.linalg.norm((X - Y) - (X - site), axis=1)
    frac = float(np.mean(err[far] <= 5 * float(np.max(grid.h)))) if far.any() else math.nan
    meta = dict(lattice.meta, value_error=float(np.max(np.abs(vals - g1))), points=grid.size)
    return Measurement(spec.delta, spec.ell, [float(v) for v in grid.h], tv_b, jump, tv_du, frac, meta)


def _away_from_boundaries(spec, X, radius: float, probes: int = 16):
    """True where every probe on circles of radius radius/2 and radius
    around x keeps the same nearest site."""
    _, site = _nearest_sites(spec, X)
    keep = np.ones(len(X), dtype=bool)
    th = 2 * np.pi * np.arange(probes) / probes
    for r in (0.5 * radius, radius):
        for u in np.stack([np.cos(th), np.sin(th)], axis=1):
            _, s2 = _nearest_sites(spec, X + r * u)
            keep &= np.all(s2 == site, axis=1)
    return keep


@dataclass
class BlowupFit:
    exponent: float
    intercept: float
    monotone: bool
    rows: list
    jump_exponent: float = math.nan

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def blowup_exponent(ell: float, deltas, variant: str = "stated", cell_points: int = CELL_POINTS) -> BlowupFit:
    """Least-squares slope of log tv_b against log(1/delta)."""
    deltas = [float(d) for d in deltas]
    if len(deltas) < 4:
        raise InputError("need at least 4 delta values")
    if any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise InputError("delta list must be decreasing")
    rows = []
    for d in deltas:
        spec = LatticeDatumSpec(d, ell, variant, h=d ** (2 / 3) / cell_points)
        rows.append(solve_and_measure(spec).row())
        log.info("delta=%g tv_b=%g", d, rows[-1]["tv_b"])
    x = np.log(1 / np.array(deltas))
    tv = np.array([r["tv_b"] for r in rows])
    tj = np.array([r["tv_b_jump"] for r in rows])
    slope, icpt = np.polyfit(x, np.log(tv), 1)
    jslope = float(np.polyfit(x, np.log(tj), 1)[0]) if np.all(tj > 0) else math.nan
    monotone = bool(np.all(np.diff(tv) > 0))
    if not monotone:
        log.warning("tv_b is not increasing as delta decreases; grid may be under-resolved")
    return BlowupFit(float(slope), float(icpt), monotone, rows, jslope)


def legendre_discrepancy(points=None) -> dict:
    """Numeric conjugate of (27/256) p1^4 + p2^2 against both closed forms."""
    model = quartic2d(1.0)
    if points is None:
        points = np.array([[0.3, -0.7], [1.0, 1.0], [-0.5, 2.0], [0.0, 1.5]])
    num = np.array([numeric_legendre(model, q)[0] for q in points])
    stated = np.abs(points[:, 0]) ** (4 / 3) + points[:, 1] ** 2
    conj = np.abs(points[:, 0]) ** (4 / 3) + points[:, 1] ** 2 / 4
    return {
        "numeric": num.tolist(),
        "stated_error": float(np.max(np.abs(num - stated))),
        "conjugate_error": float(np.max(np.abs(num - conj))),
    }
