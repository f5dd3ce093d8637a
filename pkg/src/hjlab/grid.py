"""Uniform axis-aligned grids and fields sampled on them."""

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .errors import InputError

DEFAULT_BUDGET = 4_000_000


@dataclass(frozen=True)
class GridSpec:
    lo: tuple
    hi: tuple
    n: tuple
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if not (len(self.lo) == len(self.hi) == len(self.n)) or len(self.n) == 0:
            raise InputError("lo, hi and n must have the same positive length")
        for a, b, k in zip(self.lo, self.hi, self.n):
            if k < 2:
                raise InputError("need at least 2 points per axis")
            if not b > a:
                raise InputError("empty box")
        if self.size > self.budget:
            raise InputError(f"grid has {self.size} points, budget is {self.budget}")

    @classmethod
    def box(cls, lo: Sequence[float], hi: Sequence[float], n: Sequence[int] | int, budget: int = DEFAULT_BUDGET):
        lo = tuple(float(v) for v in np.atleast_1d(lo))
        hi = tuple(float(v) for v in np.atleast_1d(hi))
        if np.isscalar(n):
            n = (int(n),) * len(lo)
        return cls(lo, hi, tuple(int(k) for k in n), budget)

    @classmethod
    def cube(cls, half_width: float, n: int, dim: int, budget: int = DEFAULT_BUDGET):
        return cls.box([-half_width] * dim, [half_width] * dim, n, budget)

    @property
    def dim(self) -> int:
        return len(self.n)

    @property
    def shape(self) -> tuple:
        return tuple(self.n)

    @property
    def size(self) -> int:
        return int(np.prod(self.n))

    @property
    def h(self) -> np.ndarray:
        return (np.array(self.hi) - np.array(self.lo)) / (np.array(self.n) - 1)

    def axes(self):
        return [np.linspace(a, b, k) for a, b, k in zip(self.lo, self.hi, self.n)]

    def points(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack(mesh, axis=-1).reshape(-1, self.dim)

    def contains_box(self, lo, hi, tol=1e-12) -> bool:
        lo = np.atleast_1d(lo)
        hi = np.atleast_1d(hi)
        return bool(np.all(lo >= np.array(self.lo) - tol) and np.all(hi <= np.array(self.hi) + tol))

    def expanded(self, margin) -> "GridSpec":
        """Same spacing, box grown by at least ``margin`` per side."""
        margin = np.broadcast_to(np.asarray(margin, dtype=float), (self.dim,))
        h = self.h
        extra = np.ceil(margin / h - 1e-9).astype(int)
        lo = np.array(self.lo) - extra * h
        hi = np.array(self.hi) + extra * h
        return GridSpec(tuple(lo), tuple(hi), tuple(np.array(self.n) + 2 * extra), self.budget)

    def describe(self) -> dict:
        return {"lo": list(self.lo), "hi": list(self.hi), "n": list(self.n)}


@dataclass
class GridFunction:
    spec: GridSpec
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).reshape(self.spec.shape)

    def lipschitz_estimate(self) -> float:
        est = 0.0
        for i, h in enumerate(self.spec.h):
            est = max(est, float(np.max(np.abs(np.diff(self.values, axis=i)))) / h)
        return est

    def interpolator(self):
        return RegularGridInterpolator(self.spec.axes(), self.values, method="linear")

    def interpolate(self, X) -> np.ndarray:
        """Multilinear interpolation; points outside are clamped to the box."""
        X = np.asarray(X, dtype=float).reshape(-1, self.spec.dim)
        Xc = np.clip(X, self.spec.lo, self.spec.hi)
        return self.interpolator()(Xc)

    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)


@dataclass
class VectorField:
    spec: GridSpec
    vectors: np.ndarray

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=float).reshape(self.spec.shape + (self.spec.dim,))

    def component(self, i: int) -> GridFunction:
        return GridFunction(self.spec, self.vectors[..., i])

    def flat(self) -> np.ndarray:
        return self.vectors.reshape(-1, self.spec.dim)

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.vectors, axis=-1)


def gradient(u: GridFunction) -> VectorField:
    """Central differences inside, one-sided at the box boundary."""
    parts = np.gradient(u.values, *u.spec.h, edge_order=1)
    if u.spec.dim == 1:
        parts = [parts]
    return VectorField(u.spec, np.stack(parts, axis=-1))


def box_mask(spec: GridSpec, lo, hi, tol=1e-12) -> np.ndarray:
    """Boolean grid mask of points inside the closed box [lo, hi]."""
    P = spec.points()
    lo = np.atleast_1d(lo)
    hi = np.atleast_1d(hi)
    m = np.all((P >= lo - tol) & (P <= hi + tol), axis=1)
    return m.reshape(spec.shape)


def cell_gradient(values: np.ndarray, h) -> np.ndarray:
    """Gradient at cell centres: forward differences averaged over the
    2^(d-1) parallel cell edges. Shape (n_1 - 1, ..., n_d - 1, d)."""
    values = np.asarray(values, dtype=float)
    d = values.ndim
    parts = []
    for i in range(d):
        g = np.diff(values, axis=i) / h[i]
        for j in range(d):
            if j != i:
                g = 0.5 * (np.take(g, np.arange(g.shape[j] - 1), axis=j) + np.take(g, np.arange(1, g.shape[j]), axis=j))
        parts.append(g)
    return np.stack(parts, axis=-1)
