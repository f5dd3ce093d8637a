"""Hot loops, each with a numba kernel and a vectorized numpy twin.

The two paths visit candidates in the same order and use the same strict
``<`` comparison, so they agree on minimizer indices (up to rounding in
``pow``). Callers go through the dispatch functions at the bottom.
"""

import itertools

import numpy as np

from . import _accel
from ._accel import njit

# Lagrangian codes understood by the scan kernel
LAG_RADIAL = 0  # c * |q|**e
LAG_SEPARABLE = 1  # sum_i c_i * |q_i|**e_i


# ---------------------------------------------------------------- numba


@njit
def _pow_nb(a, e):
    # exact shortcuts for the exponents used by the built-in models
    if e == 2.0:
        return a * a
    if e == 1.0:
        return a
    if e == 4.0 / 3.0:
        return a * np.cbrt(a)
    return a ** e


@njit
def _radial_nb(s, c, e):
    """c * |q|**e given s = |q|**2."""
    if s == 0.0:
        return 0.0
    if e == 2.0:
        return c * s
    if e == 4.0 / 3.0:
        r = np.cbrt(s)
        return c * r * r
    return c * np.sqrt(s) ** e


@njit
def _lag_nb(code, coef, expo, q):
    if code == LAG_RADIAL:
        s = 0.0
        for i in range(q.shape[0]):
            s += q[i] * q[i]
        return _radial_nb(s, coef[0], expo[0])
    out = 0.0
    for i in range(q.shape[0]):
        a = abs(q[i])
        if a > 0.0:
            out += coef[i] * _pow_nb(a, expo[i])
    return out


@njit
def _minplus_nb(xs, jlo, jhi, lat_lo, lat_step, lat_shape, u_lat, t, code, coef, expo, r2):
    n, d = xs.shape
    best = np.full(n, np.inf)
    arg = np.full(n, -1, np.int64)
    stride = np.ones(d, np.int64)
    for i in range(d - 2, -1, -1):
        stride[i] = stride[i + 1] * lat_shape[i + 1]
    last = d - 1
    inv_t = 1.0 / t
    j = np.empty(d, np.int64)
    for p in range(n):
        empty = False
        for i in range(d):
            j[i] = jlo[p, i]
            if jlo[p, i] > jhi[p, i]:
                empty = True
        if empty:
            continue
        xl = xs[p, last]
        while True:
            # leading axes are fixed inside the innermost loop
            part2 = 0.0
            part_lag = 0.0
            base = 0
            for i in range(last):
                diff = xs[p, i] - (lat_lo[i] + j[i] * lat_step[i])
                part2 += diff * diff
                base += j[i] * stride[i]
                if code != LAG_RADIAL:
                    a = abs(diff) * inv_t
                    if a > 0.0:
                        part_lag += coef[i] * _pow_nb(a, expo[i])
            if part2 <= r2:
                for jl in range(jlo[p, last], jhi[p, last] + 1):
                    diff = xl - (lat_lo[last] + jl * lat_step[last])
                    dist2 = part2 + diff * diff
                    if dist2 > r2:
                        continue
                    if code == LAG_RADIAL:
                        lag = _radial_nb(dist2 * inv_t * inv_t, coef[0], expo[0])
                    else:
                        a = abs(diff) * inv_t
                        lag = part_lag
                        if a > 0.0:
                            lag += coef[last] * _pow_nb(a, expo[last])
                    val = u_lat[base + jl] + t * lag
                    if val < best[p]:
                        best[p] = val
                        arg[p] = base + jl
            # odometer over the leading axes
            k = last - 1
            while k >= 0:
                j[k] += 1
                if j[k] <= jhi[p, k]:
                    break
                j[k] = jlo[p, k]
                k -= 1
            if k < 0:
                break
    return best, arg


@njit
def _pair_cosine_nb(P, G, floor):
    n, d = P.shape
    best = np.inf
    used = 0
    for a in range(n):
        for b in range(a + 1, n):
            dg2 = 0.0
            dp2 = 0.0
            dot = 0.0
            for i in range(d):
                gi = G[a, i] - G[b, i]
                pi = P[a, i] - P[b, i]
                dg2 += gi * gi
                dp2 += pi * pi
                dot += gi * pi
            ng = np.sqrt(dg2)
            if ng < floor or dp2 == 0.0:
                continue
            c = dot / (ng * np.sqrt(dp2))
            used += 1
            if c < best:
                best = c
    return best, used


@njit
def _pair_quotient_nb(P, G, width, nbins):
    n, d = P.shape
    out = np.full(nbins, np.inf)
    for a in range(n):
        for b in range(a + 1, n):
            dg2 = 0.0
            dp2 = 0.0
            for i in range(d):
                gi = G[a, i] - G[b, i]
                pi = P[a, i] - P[b, i]
                dg2 += gi * gi
                dp2 += pi * pi
            if dp2 == 0.0:
                continue
            dist = np.sqrt(dp2)
            k = int(dist / width)
            if k >= nbins:
                k = nbins - 1
            qv = np.sqrt(dg2) / dist
            if qv < out[k]:
                out[k] = qv
    return out


@njit
def _pairwise_l1_nb(F, w):
    n, m = F.shape
    D = np.zeros((n, n))
    for a in range(n):
        for b in range(a + 1, n):
            s = 0.0
            for k in range(m):
                s += w[k] * abs(F[a, k] - F[b, k])
            D[a, b] = s
            D[b, a] = s
    return D


# ---------------------------------------------------------------- numpy


def _lag_np(code, coef, expo, Q, lag_fn=None):
    if lag_fn is not None:
        return lag_fn(Q)
    if code == LAG_RADIAL:
        s = np.sqrt(np.sum(Q * Q, axis=-1))
        return coef[0] * s ** expo[0]
    return np.sum(coef * np.abs(Q) ** expo, axis=-1)


def _minplus_np(xs, jlo, jhi, lat_lo, lat_step, lat_shape, u_lat, t, code, coef, expo, r2, lag_fn=None):
    n, d = xs.shape
    best = np.full(n, np.inf)
    arg = np.full(n, -1, np.int64)
    if n == 0:
        return best, arg
    stride = np.ones(d, np.int64)
    for i in range(d - 2, -1, -1):
        stride[i] = stride[i + 1] * lat_shape[i + 1]
    span = np.max(jhi - jlo, axis=0) + 1
    span = np.maximum(span, 0)
    for off in itertools.product(*[range(int(s)) for s in span]):
        j = jlo + np.asarray(off, dtype=np.int64)
        valid = np.all(j <= jhi, axis=1)
        y = lat_lo + j * lat_step
        diff = xs - y
        dist2 = np.sum(diff * diff, axis=1)
        valid &= dist2 <= r2
        if not valid.any():
            continue
        flat = np.clip(j @ stride, 0, u_lat.size - 1)
        val = u_lat[flat] + t * _lag_np(code, coef, expo, diff / t, lag_fn)
        better = valid & (val < best)
        best[better] = val[better]
        arg[better] = flat[better]
    return best, arg


def _pair_cosine_np(P, G, floor):
    best = np.inf
    used = 0
    for a in range(P.shape[0] - 1):
        dg = G[a] - G[a + 1:]
        dp = P[a] - P[a + 1:]
        ng = np.linalg.norm(dg, axis=1)
        npn = np.linalg.norm(dp, axis=1)
        ok = (ng >= floor) & (npn > 0)
        if not ok.any():
            continue
        c = np.sum(dg[ok] * dp[ok], axis=1) / (ng[ok] * npn[ok])
        used += int(ok.sum())
        best = min(best, float(c.min()))
    return best, used


def _pair_quotient_np(P, G, width, nbins):
    out = np.full(nbins, np.inf)
    for a in range(P.shape[0] - 1):
        dist = np.linalg.norm(P[a] - P[a + 1:], axis=1)
        ok = dist > 0
        dist = dist[ok]
        qv = np.linalg.norm(G[a] - G[a + 1:][ok], axis=1) / dist
        k = np.minimum((dist / width).astype(np.int64), nbins - 1)
        np.minimum.at(out, k, qv)
    return out


def _pairwise_l1_np(F, w):
    n = F.shape[0]
    D = np.zeros((n, n))
    for a in range(n - 1):
        row = np.abs(F[a] - F[a + 1:]) @ w
        D[a, a + 1:] = row
        D[a + 1:, a] = row
    return D


# ---------------------------------------------------------------- dispatch


def minplus_scan(xs, jlo, jhi, lat_lo, lat_step, lat_shape, u_lat, t, code, coef, expo, radius,
                 lag_fn=None):
    """min over lattice nodes y (per-point index box, within ``radius``) of
    u_lat[y] + t * L((x - y) / t). Returns (values, flat node index).

    ``lag_fn`` replaces the coded Lagrangian by a vectorized callable; it
    forces the numpy path.
    """
    args = (
        np.ascontiguousarray(xs, dtype=np.float64),
        np.ascontiguousarray(jlo, dtype=np.int64),
        np.ascontiguousarray(jhi, dtype=np.int64),
        np.asarray(lat_lo, dtype=np.float64),
        np.asarray(lat_step, dtype=np.float64),
        np.asarray(lat_shape, dtype=np.int64),
        np.ascontiguousarray(u_lat, dtype=np.float64).ravel(),
        float(t),
        int(code),
        np.asarray(coef, dtype=np.float64),
        np.asarray(expo, dtype=np.float64),
        float(radius) ** 2,
    )
    if lag_fn is None and _accel.use_numba():
        return _minplus_nb(*args)
    return _minplus_np(*args, lag_fn=lag_fn)


def pair_cosine_min(P, G, floor=1e-10):
    P = np.ascontiguousarray(P, dtype=np.float64)
    G = np.ascontiguousarray(G, dtype=np.float64)
    if _accel.use_numba():
        return _pair_cosine_nb(P, G, float(floor))
    return _pair_cosine_np(P, G, float(floor))


def pair_quotient_bins(P, G, width, nbins):
    P = np.ascontiguousarray(P, dtype=np.float64)
    G = np.ascontiguousarray(G, dtype=np.float64)
    if _accel.use_numba():
        return _pair_quotient_nb(P, G, float(width), int(nbins))
    return _pair_quotient_np(P, G, float(width), int(nbins))


def pairwise_l1(F, w):
    F = np.ascontiguousarray(F, dtype=np.float64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    if _accel.use_numba():
        return _pairwise_l1_nb(F, w)
    return _pairwise_l1_np(F, w)
