"""Hot lattice kernels with a numba path and a pure-numpy path.

Both paths evaluate the same floating-point expressions in the same order,
so they agree bit for bit. Set ``COGMAP_DISABLE_NUMBA=1`` before import to
force the numpy path; the selected backend is reported by ``BACKEND``.

All arrays are in cell coordinates (see :mod:`cogmap.core`). ``q`` is a
``uint8`` gate (1 = dynamic cell), ``omega_step`` holds the mental step at
which a cell joined the effective-object set, or -1.
"""

import os

import numpy as np

_DISABLED = os.environ.get("COGMAP_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    if _DISABLED:
        raise ImportError
    from numba import njit
    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False


# ---------------------------------------------------------------- numpy path

def _fhn_substeps_np(r, z, q, d, eps, dtau, nsub):
    qf = q.astype(np.float64)
    for _ in range(nsub):
        p = np.pad(r, 1, mode="edge")
        lap = p[:-2, 1:-1] + p[2:, 1:-1] + p[1:-1, :-2] + p[1:-1, 2:] - 4.0 * r
        f = (-(r * r * r) + 4.0 * (r * r) - 2.0 * r - 2.0) / 7.0
        dr = qf * (f - z + d * lap)
        dz = eps * (r - 7.0 * z - 2.0)
        r += dtau * dr
        z += dtau * dz
    return np.abs(r).max()


def _accrete_np(r, q, omega_step, B, k, lo, hi):
    new = B & (q == 1) & (omega_step < 0) & (r >= lo) & (r <= hi)
    omega_step[new] = k
    q[new] = 0
    return int(new.sum())


def _record_np(r_prev, r, q, c, tval, r_th):
    new = (q == 1) & np.isinf(c) & (r_prev < r_th) & (r >= r_th)
    c[new] = tval
    return int(new.sum())


def _stamp_discs_np(mask, centers, radii):
    n0, n1 = mask.shape
    for m in range(centers.shape[0]):
        u, v, rc = centers[m, 0], centers[m, 1], radii[m]
        i0, i1 = max(int(np.floor(u - rc)), 0), min(int(np.ceil(u + rc)), n0 - 1)
        j0, j1 = max(int(np.floor(v - rc)), 0), min(int(np.ceil(v + rc)), n1 - 1)
        if i0 > i1 or j0 > j1:
            continue
        di = np.arange(i0, i1 + 1)[:, None] - u
        dj = np.arange(j0, j1 + 1)[None, :] - v
        mask[i0:i1 + 1, j0:j1 + 1] |= di * di + dj * dj <= rc * rc


def _stamp_lenses_np(mask, c1, c2, radii):
    n0, n1 = mask.shape
    for m in range(c1.shape[0]):
        rc = radii[m]
        lo_u, hi_u = max(c1[m, 0], c2[m, 0]) - rc, min(c1[m, 0], c2[m, 0]) + rc
        lo_v, hi_v = max(c1[m, 1], c2[m, 1]) - rc, min(c1[m, 1], c2[m, 1]) + rc
        i0, i1 = max(int(np.floor(lo_u)), 0), min(int(np.ceil(hi_u)), n0 - 1)
        j0, j1 = max(int(np.floor(lo_v)), 0), min(int(np.ceil(hi_v)), n1 - 1)
        if i0 > i1 or j0 > j1:
            continue
        ii = np.arange(i0, i1 + 1)[:, None]
        jj = np.arange(j0, j1 + 1)[None, :]
        a_i, a_j = ii - c1[m, 0], jj - c1[m, 1]
        b_i, b_j = ii - c2[m, 0], jj - c2[m, 1]
        mask[i0:i1 + 1, j0:j1 + 1] |= ((a_i * a_i + a_j * a_j <= rc * rc)
                                       & (b_i * b_i + b_j * b_j <= rc * rc))


def _zone_contact_np(r, q, omega_step, centers, headings, zone, cone, body, lo, hi):
    n0, n1 = r.shape
    out = np.zeros(centers.shape[0], dtype=np.int64)
    for m in range(centers.shape[0]):
        u, v, D = centers[m, 0], centers[m, 1], zone[m]
        i0, i1 = max(int(np.floor(u - D)), 0), min(int(np.ceil(u + D)), n0 - 1)
        j0, j1 = max(int(np.floor(v - D)), 0), min(int(np.ceil(v + D)), n1 - 1)
        if i0 > i1 or j0 > j1:
            continue
        di = np.arange(i0, i1 + 1)[:, None] - u
        dj = np.arange(j0, j1 + 1)[None, :] - v
        rr = r[i0:i1 + 1, j0:j1 + 1]
        band = ((q[i0:i1 + 1, j0:j1 + 1] == 1) & (omega_step[i0:i1 + 1, j0:j1 + 1] < 0)
                & (rr >= lo) & (rr <= hi))
        dist2 = di * di + dj * dj
        dot = di * headings[m, 0] + dj * headings[m, 1]
        inside = band & (dist2 <= D * D) & (dot >= 0.0)
        if not inside.any():
            continue
        dist = np.sqrt(dist2)
        cross = np.abs(di * headings[m, 1] - dj * headings[m, 0])
        phi = np.arctan2(cross, dot)
        slack = np.arcsin(np.minimum(body / np.maximum(dist, 1e-12), 1.0))
        seen = inside & (phi < cone + slack)
        out[m] = 2 if seen.any() else 1
    return out


# ---------------------------------------------------------------- numba path

if HAS_NUMBA:
    jit = njit(cache=True, nogil=True)

    @jit
    def _fhn_substeps_nb(r, z, q, d, eps, dtau, nsub):
        n0, n1 = r.shape
        dr = np.empty_like(r)
        dz = np.empty_like(z)
        big = 0.0
        for _ in range(nsub):
            for i in range(n0):
                im = i - 1 if i > 0 else 0
                ip = i + 1 if i < n0 - 1 else n0 - 1
                for j in range(n1):
                    jm = j - 1 if j > 0 else 0
                    jp = j + 1 if j < n1 - 1 else n1 - 1
                    x = r[i, j]
                    lap = r[im, j] + r[ip, j] + r[i, jm] + r[i, jp] - 4.0 * x
                    f = (-(x * x * x) + 4.0 * (x * x) - 2.0 * x - 2.0) / 7.0
                    dr[i, j] = float(q[i, j]) * (f - z[i, j] + d * lap)
                    dz[i, j] = eps * (x - 7.0 * z[i, j] - 2.0)
            big = 0.0
            for i in range(n0):
                for j in range(n1):
                    r[i, j] += dtau * dr[i, j]
                    z[i, j] += dtau * dz[i, j]
                    a = abs(r[i, j])
                    if a > big:
                        big = a
        return big

    @jit
    def _accrete_nb(r, q, omega_step, B, k, lo, hi):
        cnt = 0
        for i in range(r.shape[0]):
            for j in range(r.shape[1]):
                if B[i, j] and q[i, j] == 1 and omega_step[i, j] < 0 \
                        and r[i, j] >= lo and r[i, j] <= hi:
                    omega_step[i, j] = k
                    q[i, j] = 0
                    cnt += 1
        return cnt

    @jit
    def _record_nb(r_prev, r, q, c, tval, r_th):
        cnt = 0
        for i in range(r.shape[0]):
            for j in range(r.shape[1]):
                if q[i, j] == 1 and np.isinf(c[i, j]) and r_prev[i, j] < r_th \
                        and r[i, j] >= r_th:
                    c[i, j] = tval
                    cnt += 1
        return cnt

    @jit
    def _stamp_discs_nb(mask, centers, radii):
        n0, n1 = mask.shape
        for m in range(centers.shape[0]):
            u, v, rc = centers[m, 0], centers[m, 1], radii[m]
            i0, i1 = max(int(np.floor(u - rc)), 0), min(int(np.ceil(u + rc)), n0 - 1)
            j0, j1 = max(int(np.floor(v - rc)), 0), min(int(np.ceil(v + rc)), n1 - 1)
            for i in range(i0, i1 + 1):
                di = i - u
                for j in range(j0, j1 + 1):
                    dj = j - v
                    if di * di + dj * dj <= rc * rc:
                        mask[i, j] = True

    @jit
    def _stamp_lenses_nb(mask, c1, c2, radii):
        n0, n1 = mask.shape
        for m in range(c1.shape[0]):
            rc = radii[m]
            lo_u = max(c1[m, 0], c2[m, 0]) - rc
            hi_u = min(c1[m, 0], c2[m, 0]) + rc
            lo_v = max(c1[m, 1], c2[m, 1]) - rc
            hi_v = min(c1[m, 1], c2[m, 1]) + rc
            i0, i1 = max(int(np.floor(lo_u)), 0), min(int(np.ceil(hi_u)), n0 - 1)
            j0, j1 = max(int(np.floor(lo_v)), 0), min(int(np.ceil(hi_v)), n1 - 1)
            for i in range(i0, i1 + 1):
                a_i = i - c1[m, 0]
                b_i = i - c2[m, 0]
                for j in range(j0, j1 + 1):
                    a_j = j - c1[m, 1]
                    b_j = j - c2[m, 1]
                    if a_i * a_i + a_j * a_j <= rc * rc and b_i * b_i + b_j * b_j <= rc * rc:
                        mask[i, j] = True

    @jit
    def _zone_contact_nb(r, q, omega_step, centers, headings, zone, cone, body, lo, hi):
        n0, n1 = r.shape
        out = np.zeros(centers.shape[0], dtype=np.int64)
        for m in range(centers.shape[0]):
            u, v, D = centers[m, 0], centers[m, 1], zone[m]
            i0, i1 = max(int(np.floor(u - D)), 0), min(int(np.ceil(u + D)), n0 - 1)
            j0, j1 = max(int(np.floor(v - D)), 0), min(int(np.ceil(v + D)), n1 - 1)
            status = 0
            for i in range(i0, i1 + 1):
                di = i - u
                for j in range(j0, j1 + 1):
                    x = r[i, j]
                    if q[i, j] != 1 or omega_step[i, j] >= 0 or x < lo or x > hi:
                        continue
                    dj = j - v
                    dist2 = di * di + dj * dj
                    dot = di * headings[m, 0] + dj * headings[m, 1]
                    if dist2 > D * D or dot < 0.0:
                        continue
                    if status == 0:
                        status = 1
                    dist = np.sqrt(dist2)
                    cross = abs(di * headings[m, 1] - dj * headings[m, 0])
                    phi = np.arctan2(cross, dot)
                    slack = np.arcsin(min(body / max(dist, 1e-12), 1.0))
                    if phi < cone + slack:
                        status = 2
            out[m] = status
        return out

    fhn_substeps = _fhn_substeps_nb
    accrete = _accrete_nb
    record_arrivals = _record_nb
    stamp_discs = _stamp_discs_nb
    stamp_lenses = _stamp_lenses_nb
    zone_contact = _zone_contact_nb
    BACKEND = "numba"
else:
    fhn_substeps = _fhn_substeps_np
    accrete = _accrete_np
    record_arrivals = _record_np
    stamp_discs = _stamp_discs_np
    stamp_lenses = _stamp_lenses_np
    zone_contact = _zone_contact_np
    BACKEND = "numpy"

NUMPY_KERNELS = {
    "fhn_substeps": _fhn_substeps_np,
    "accrete": _accrete_np,
    "record_arrivals": _record_np,
    "stamp_discs": _stamp_discs_np,
    "stamp_lenses": _stamp_lenses_np,
    "zone_contact": _zone_contact_np,
}

NUMBA_KERNELS = {} if not HAS_NUMBA else {
    "fhn_substeps": _fhn_substeps_nb,
    "accrete": _accrete_nb,
    "record_arrivals": _record_nb,
    "stamp_discs": _stamp_discs_nb,
    "stamp_lenses": _stamp_lenses_nb,
    "zone_contact": _zone_contact_nb,
}


# ------------------------------------------------------- gradient descent
# One source for both backends: compiled by numba when available, plain
# Python otherwise. Single traces are cheap either way.

_ORDER = ((0, 0), (1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1))


def _descend_py(c, R, x, y, V, ax, ay, step, max_iter, out):
    """Descend ``c`` from ``(x, y)`` toward the agent cell ``(ax, ay)``.

    Writes ``(u, v, value)`` rows into ``out`` and returns ``(count, status)``
    with status 1 = reached, 0 = iteration cap, -1 = stalled. Gradient steps
    of length ``step`` use the bilinear interpolant and are only taken inside
    squares whose four corners are reachable; otherwise the walk moves to the
    lowest reachable lattice neighbour, avoiding corner cuts when it can.
    """
    n0, n1 = c.shape
    out[0, 0] = x
    out[0, 1] = y
    out[0, 2] = V
    cnt = 1
    status = 0
    for _ in range(max_iter):
        if (x - ax) * (x - ax) + (y - ay) * (y - ay) <= 1.0:
            status = 1
            break
        moved = False
        i0 = min(max(int(np.floor(x)), 0), n0 - 2)
        j0 = min(max(int(np.floor(y)), 0), n1 - 2)
        fx = x - i0
        fy = y - j0
        if R[i0, j0] and R[i0 + 1, j0] and R[i0, j0 + 1] and R[i0 + 1, j0 + 1]:
            gx = (c[i0 + 1, j0] - c[i0, j0]) * (1.0 - fy) + (c[i0 + 1, j0 + 1] - c[i0, j0 + 1]) * fy
            gy = (c[i0, j0 + 1] - c[i0, j0]) * (1.0 - fx) + (c[i0 + 1, j0 + 1] - c[i0 + 1, j0]) * fx
            gn = np.sqrt(gx * gx + gy * gy)
            if gn > 0.0:
                x2 = x - step * gx / gn
                y2 = y - step * gy / gn
                k0 = min(max(int(np.floor(x2)), 0), n0 - 2)
                l0 = min(max(int(np.floor(y2)), 0), n1 - 2)
                if 0.0 <= x2 <= n0 - 1 and 0.0 <= y2 <= n1 - 1 and R[k0, l0] and R[k0 + 1, l0] \
                        and R[k0, l0 + 1] and R[k0 + 1, l0 + 1]:
                    ex = x2 - k0
                    ey = y2 - l0
                    V2 = (c[k0, l0] * (1.0 - ex) * (1.0 - ey) + c[k0 + 1, l0] * ex * (1.0 - ey)
                          + c[k0, l0 + 1] * (1.0 - ex) * ey + c[k0 + 1, l0 + 1] * ex * ey)
                    if V2 < V:
                        x = x2
                        y = y2
                        V = V2
                        moved = True
        if not moved:
            ci = int(np.floor(x + 0.5))
            cj = int(np.floor(y + 0.5))
            at_center = x == ci and y == cj
            best_i = -1
            best_j = -1
            best_c = V
            if not at_center:
                # off-centre: settle on the lowest reachable corner of the square
                for a in range(2):
                    for b in range(2):
                        ii = i0 + a
                        jj = j0 + b
                        if R[ii, jj] and c[ii, jj] <= best_c:
                            if best_i < 0 or c[ii, jj] < best_c:
                                best_i = ii
                                best_j = jj
                                best_c = c[ii, jj]
            else:
                for allow_cut in range(2):
                    for o in range(1, 9):
                        di = _ORDER[o][0]
                        dj = _ORDER[o][1]
                        ii = ci + di
                        jj = cj + dj
                        if ii < 0 or jj < 0 or ii >= n0 or jj >= n1 or not R[ii, jj]:
                            continue
                        if di != 0 and dj != 0 and allow_cut == 0:
                            if not (R[ci + di, cj] and R[ci, cj + dj]):
                                continue
                        if c[ii, jj] < best_c:
                            best_i = ii
                            best_j = jj
                            best_c = c[ii, jj]
                    if best_i >= 0:
                        break
            if best_i < 0:
                status = -1
                break
            x = float(best_i)
            y = float(best_j)
            V = best_c
        out[cnt, 0] = x
        out[cnt, 1] = y
        out[cnt, 2] = V
        cnt += 1
    if status == 0 and (x - ax) * (x - ax) + (y - ay) * (y - ay) <= 1.0:
        status = 1
    return cnt, status


if HAS_NUMBA:
    _descend_nb = njit(cache=True)(_descend_py)
    descend = _descend_nb
    NUMBA_KERNELS["descend"] = _descend_nb
else:
    descend = _descend_py
NUMPY_KERNELS["descend"] = _descend_py
