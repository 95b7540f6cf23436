"""Compiled inner loops for the pairwise rank statistics."""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _dense_ranks(v):
    # 1-based dense ranks; equal values share a rank
    n = v.size
    order = np.argsort(v, kind="mergesort")
    out = np.empty(n, dtype=np.int64)
    r = 0
    prev = np.nan
    for t in range(n):
        k = order[t]
        if t == 0 or v[k] != prev:
            r += 1
            prev = v[k]
        out[k] = r
    return out, r


@njit(cache=True)
def _row_dominance(a, b, out_ab, out_a, out_b):
    """For every j: #{k: a_k <= a_j and b_k <= b_j}, #{k: a_k <= a_j}, #{k: b_k <= b_j}."""
    n = a.size
    rb, m = _dense_ranks(b)
    tree = np.zeros(m + 1, dtype=np.int64)
    # counts of b by rank, cumulated, give the marginal b counts
    hist = np.zeros(m + 1, dtype=np.int64)
    for k in range(n):
        hist[rb[k]] += 1
    for r in range(1, m + 1):
        hist[r] += hist[r - 1]
    for k in range(n):
        out_b[k] = hist[rb[k]]
    order = np.argsort(a, kind="mergesort")
    t = 0
    inserted = 0
    while t < n:
        s = t
        while t < n and a[order[t]] == a[order[s]]:
            pos = rb[order[t]]
            while pos <= m:
                tree[pos] += 1
                pos += pos & (-pos)
            t += 1
        inserted = t
        for q in range(s, t):
            j = order[q]
            pos = rb[j]
            c = 0
            while pos > 0:
                c += tree[pos]
                pos -= pos & (-pos)
            out_ab[j] = c
            out_a[j] = inserted


@njit(cache=True)
def dominance_counts(dx, dy):
    """Per-row ball counts from two n x n distance matrices.

    Returns (Axy, Ax, Ay) with ``Axy[i, j] = #{k: dx[i,k] <= dx[i,j], dy[i,k] <= dy[i,j]}``
    and the marginal counts likewise; k ranges over all points including i and j.
    """
    n = dx.shape[0]
    axy = np.empty((n, n), dtype=np.int64)
    ax = np.empty((n, n), dtype=np.int64)
    ay = np.empty((n, n), dtype=np.int64)
    for i in range(n):
        _row_dominance(dx[i], dy[i], axy[i], ax[i], ay[i])
    return axy, ax, ay


@njit(cache=True)
def _pair_scores(a11, ax, ay, m):
    # chi-square and likelihood-ratio scores of one 2x2 table over m = n - 2 points
    a11 = a11 - 2
    a12 = ax - 2 - a11
    a21 = ay - 2 - a11
    a22 = m - a11 - a12 - a21
    r1 = a11 + a12
    r2 = a21 + a22
    c1 = a11 + a21
    c2 = a12 + a22
    if r1 == 0 or r2 == 0 or c1 == 0 or c2 == 0:
        return 0.0, 0.0
    det = float(a11) * a22 - float(a12) * a21
    chisq = m * det * det / (float(r1) * r2 * c1 * c2)
    lr = 0.0
    if a11 > 0:
        lr += a11 * np.log(a11 / (r1 * c1 / m))
    if a12 > 0:
        lr += a12 * np.log(a12 / (r1 * c2 / m))
    if a21 > 0:
        lr += a21 * np.log(a21 / (r2 * c1 / m))
    if a22 > 0:
        lr += a22 * np.log(a22 / (r2 * c2 / m))
    return chisq, lr


@njit(cache=True)
def hhg_scores(axy, ax, ay):
    """Sum over ordered pairs i != j of the 2x2 chi-square and likelihood-ratio scores."""
    n = axy.shape[0]
    chisq = 0.0
    lr = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                c, l = _pair_scores(axy[i, j], ax[i, j], ay[i, j], n - 2)
                chisq += c
                lr += l
    return chisq, lr


@njit(cache=True)
def _row_distances(p, i, out):
    n, d = p.shape
    for k in range(n):
        s = 0.0
        for c in range(d):
            t = p[k, c] - p[i, c]
            s += t * t
        out[k] = np.sqrt(s)


@njit(cache=True)
def hhg_from_points(px, py):
    """HHG scores from raw points, one distance row at a time (O(n) memory)."""
    n = px.shape[0]
    dx = np.empty(n)
    dy = np.empty(n)
    axy = np.empty(n, dtype=np.int64)
    ax = np.empty(n, dtype=np.int64)
    ay = np.empty(n, dtype=np.int64)
    chisq = 0.0
    lr = 0.0
    for i in range(n):
        _row_distances(px, i, dx)
        _row_distances(py, i, dy)
        _row_dominance(dx, dy, axy, ax, ay)
        for j in range(n):
            if i != j:
                c, l = _pair_scores(axy[j], ax[j], ay[j], n - 2)
                chisq += c
                lr += l
    return chisq, lr


@njit(cache=True)
def ball_from_points(px, py):
    """sum over (i, j) of (P_xy - P_x P_y)^2 for two blocks, row by row."""
    n = px.shape[0]
    dx = np.empty(n)
    dy = np.empty(n)
    axy = np.empty(n, dtype=np.int64)
    ax = np.empty(n, dtype=np.int64)
    ay = np.empty(n, dtype=np.int64)
    total = 0.0
    for i in range(n):
        _row_distances(px, i, dx)
        _row_distances(py, i, dy)
        _row_dominance(dx, dy, axy, ax, ay)
        for j in range(n):
            t = axy[j] / n - (ax[j] / n) * (ay[j] / n)
            total += t * t
    return total


@njit(cache=True)
def ball_joint_counts(dists):
    """Joint ball counts for K >= 2 blocks: ``#{k: d_b[i,k] <= d_b[i,j] for all b}``."""
    nb, n, _ = dists.shape
    out = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(n):
            c = 0
            for k in range(n):
                ok = True
                for b in range(nb):
                    if dists[b, i, k] > dists[b, i, j]:
                        ok = False
                        break
                if ok:
                    c += 1
            out[i, j] = c
    return out


@njit(cache=True)
def subcop_extremes_3d(rx, ry, rz, nx, ny, nz, ux, uy, uz):
    """max(S - Pi) and max(Pi - S) of the trivariate empirical subcopula.

    ``rx`` etc. are 0-based dense ranks, ``ux[a]`` the empirical cdf at the
    a-th distinct value.
    """
    n = rx.size
    order = np.argsort(rx, kind="mergesort")
    grid = np.zeros((ny, nz), dtype=np.int64)
    cum = np.zeros((ny, nz), dtype=np.int64)
    hi = -np.inf
    lo = -np.inf
    t = 0
    while t < n:
        a = rx[order[t]]
        while t < n and rx[order[t]] == a:
            k = order[t]
            grid[ry[k], rz[k]] += 1
            t += 1
        for b in range(ny):
            run = 0
            for c in range(nz):
                run += grid[b, c]
                cum[b, c] = run + (cum[b - 1, c] if b > 0 else 0)
        for b in range(ny):
            for c in range(nz):
                diff = cum[b, c] / n - ux[a] * uy[b] * uz[c]
                if diff > hi:
                    hi = diff
                if -diff > lo:
                    lo = -diff
    return hi, lo
