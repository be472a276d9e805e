"""Pure NumPy implementations of the hot kernels.

Same contracts as the compiled module ``sarml.kernels._native``; used when the
extension is unavailable or explicitly disabled.  Cell visit order (row-major
cells, ascending level index per cell) matches the compiled loop so both
backends accumulate in the same order.
"""

import numpy as np

# Edge ids: 0 = bottom (y=0), 1 = top (y=dv), 2 = left (x=0), 3 = right (x=du).
# Per marching-squares case, edges of the (first, second) segment; -1 = none,
# -2 = saddle (resolved by the cell-centre value).
_SEG1 = np.array(
    [
        (-1, -1),  # 0000
        (0, 2),    # 0001  T00 isolated
        (0, 3),    # 0010  T10 isolated
        (2, 3),    # 0011  bottom band
        (2, 1),    # 0100  T01 isolated
        (0, 1),    # 0101  left band
        (-2, -2),  # 0110  saddle
        (3, 1),    # 0111  T11 isolated (below)
        (3, 1),    # 1000  T11 isolated
        (-2, -2),  # 1001  saddle
        (0, 1),    # 1010  right band
        (2, 1),    # 1011  T01 isolated (below)
        (2, 3),    # 1100  top band
        (0, 3),    # 1101  T10 isolated (below)
        (0, 2),    # 1110  T00 isolated (below)
        (-1, -1),  # 1111
    ],
    dtype=np.int8,
)


def level_set_sums(T, VA, GT, du, dv, t0, dt, n_t, grad_eps):
    """Accumulate per-level line integrals of VA/GT over level sets of T.

    For every level ``t0 + k*dt`` (k = 0..n_t-1), extracts the iso-contour of
    the node-sampled field T by marching squares (linear edge interpolation)
    and sums ``VA/GT * segment_length`` with VA, GT interpolated bilinearly at
    segment midpoints.  Segments whose interpolated GT falls at or below
    ``grad_eps`` are skipped and counted.

    Returns ``(vals, skipped)`` with shapes (n_t,), dtypes float64/int64.
    """
    T = np.ascontiguousarray(T, dtype=np.float64)
    VA = np.ascontiguousarray(VA, dtype=np.float64)
    GT = np.ascontiguousarray(GT, dtype=np.float64)
    vals = np.zeros(n_t, dtype=np.float64)
    skipped = np.zeros(n_t, dtype=np.int64)

    c00 = T[:-1, :-1].ravel()
    c10 = T[1:, :-1].ravel()
    c01 = T[:-1, 1:].ravel()
    c11 = T[1:, 1:].ravel()

    tmin = np.minimum(np.minimum(c00, c10), np.minimum(c01, c11))
    tmax = np.maximum(np.maximum(c00, c10), np.maximum(c01, c11))

    klo = np.ceil((tmin - t0) / dt)
    khi = np.floor((tmax - t0) / dt)
    np.clip(klo, 0, n_t - 1, out=klo)
    np.clip(khi, 0, n_t - 1, out=khi)
    # drop cells whose T range misses every level
    khi = np.where((t0 + khi * dt < tmin) | (t0 + klo * dt > tmax), -1.0, khi)
    counts = (khi - klo + 1).astype(np.int64)
    counts[counts < 0] = 0

    hit = np.nonzero(counts > 0)[0]
    if hit.size == 0:
        return vals, skipped
    reps = counts[hit]
    total = int(reps.sum())

    cells = np.repeat(hit, reps)
    starts = np.cumsum(reps) - reps
    ks = np.repeat(klo[hit].astype(np.int64), reps) + (np.arange(total) - np.repeat(starts, reps))
    lev = t0 + ks * dt

    t00 = c00[cells]
    t10 = c10[cells]
    t01 = c01[cells]
    t11 = c11[cells]

    b0 = t00 > lev
    b1 = t10 > lev
    b2 = t01 > lev
    b3 = t11 > lev
    case = (
        b0.astype(np.int8)
        | (b1.astype(np.int8) << 1)
        | (b2.astype(np.int8) << 2)
        | (b3.astype(np.int8) << 3)
    )

    seg = _SEG1[case]
    e1a = seg[:, 0].copy()
    e1b = seg[:, 1].copy()
    e2a = np.full(total, -1, dtype=np.int8)
    e2b = np.full(total, -1, dtype=np.int8)

    saddle = e1a == -2
    if np.any(saddle):
        centre = 0.25 * (t00 + t10 + t01 + t11) > lev
        case9 = case == 9
        # above-region connected through the centre: segments hug the two
        # corners on the other side; otherwise the opposite pairing.
        iso_bl = np.where(case9, ~centre, centre)  # T00 and T11 isolated
        a1 = np.where(iso_bl, 0, 0)
        b1e = np.where(iso_bl, 2, 3)
        a2 = np.where(iso_bl, 3, 2)
        b2e = np.where(iso_bl, 1, 1)
        e1a[saddle] = a1[saddle]
        e1b[saddle] = b1e[saddle]
        e2a[saddle] = a2[saddle]
        e2b[saddle] = b2e[saddle]

    with np.errstate(divide="ignore", invalid="ignore"):
        fb = np.where(b0 != b1, (lev - t00) / (t10 - t00), 0.0)
        ft = np.where(b2 != b3, (lev - t01) / (t11 - t01), 0.0)
        fl = np.where(b0 != b2, (lev - t00) / (t01 - t00), 0.0)
        fr = np.where(b1 != b3, (lev - t10) / (t11 - t10), 0.0)
    np.clip(fb, 0.0, 1.0, out=fb)
    np.clip(ft, 0.0, 1.0, out=ft)
    np.clip(fl, 0.0, 1.0, out=fl)
    np.clip(fr, 0.0, 1.0, out=fr)

    # edge midpoint coordinates in cell-local units, per edge id
    px = np.stack([fb * du, ft * du, np.zeros(total), np.full(total, du)])
    py = np.stack([np.zeros(total), np.full(total, dv), fl * dv, fr * dv])

    va00 = VA[:-1, :-1].ravel()[cells]
    va10 = VA[1:, :-1].ravel()[cells]
    va01 = VA[:-1, 1:].ravel()[cells]
    va11 = VA[1:, 1:].ravel()[cells]
    gt00 = GT[:-1, :-1].ravel()[cells]
    gt10 = GT[1:, :-1].ravel()[cells]
    gt01 = GT[:-1, 1:].ravel()[cells]
    gt11 = GT[1:, 1:].ravel()[cells]

    idx = np.arange(total)

    def _accumulate(ea, eb, active):
        sel = np.nonzero(active)[0]
        if sel.size == 0:
            return
        ia = ea[sel].astype(np.intp)
        ib = eb[sel].astype(np.intp)
        x1 = px[ia, sel]
        y1 = py[ia, sel]
        x2 = px[ib, sel]
        y2 = py[ib, sel]
        length = np.hypot(x2 - x1, y2 - y1)
        wx = 0.5 * (x1 + x2) / du
        wy = 0.5 * (y1 + y2) / dv
        w00 = (1.0 - wx) * (1.0 - wy)
        w10 = wx * (1.0 - wy)
        w01 = (1.0 - wx) * wy
        w11 = wx * wy
        va = w00 * va00[sel] + w10 * va10[sel] + w01 * va01[sel] + w11 * va11[sel]
        gt = w00 * gt00[sel] + w10 * gt10[sel] + w01 * gt01[sel] + w11 * gt11[sel]
        ok = gt > grad_eps
        contrib = np.where(ok, va * length / np.where(ok, gt, 1.0), 0.0)
        vals[:] += np.bincount(ks[idx[sel]], weights=contrib, minlength=n_t)
        bad = ~ok
        if np.any(bad):
            skipped[:] += np.bincount(ks[idx[sel][bad]], minlength=n_t)

    _accumulate(e1a, e1b, e1a >= 0)
    _accumulate(e2a, e2b, e2a >= 0)
    return vals, skipped


def bandlimited_cosine_sum(x, w, omega0, domega, n_omega):
    """Trapezoid-weighted double sum  sum_k w_k sum_j' cos((omega0+j*domega)*x_k).

    The inner sum carries trapezoid end weights 1/2 at j = 0 and j = n_omega-1.
    Evaluated with the three-term cosine recurrence so both backends perform
    the same arithmetic.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    w = np.asarray(w, dtype=np.float64).ravel()
    if n_omega < 2:
        raise ValueError("n_omega must be at least 2")
    two_cd = 2.0 * np.cos(domega * x)
    cprev = np.cos(omega0 * x)
    ccur = np.cos((omega0 + domega) * x)
    acc = 0.5 * cprev
    for _ in range(1, n_omega - 1):
        acc += ccur
        cprev, ccur = ccur, two_cd * ccur - cprev
    acc += 0.5 * ccur
    return float(np.dot(w, acc))
