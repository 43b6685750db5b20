"""Compiled geometric predicates over packed polygon edge arrays.

Edges are stored as a float64 array of shape (E, 4) holding
(x1, y1, x2, y2) per segment, all boundary rings concatenated.
Even-odd parity handles outer rings and holes uniformly.
"""

import numpy as np
from numba import njit

_TANGENT_TOL = 1e-12


@njit(cache=True)
def point_in_polygon(edges, px, py, eps):
    """Even-odd membership test; points within eps of an edge count as inside."""
    inside = False
    for i in range(edges.shape[0]):
        x1, y1, x2, y2 = edges[i, 0], edges[i, 1], edges[i, 2], edges[i, 3]
        dx, dy = x2 - x1, y2 - y1
        # distance to the edge segment
        L2 = dx * dx + dy * dy
        if L2 > 0.0:
            t = ((px - x1) * dx + (py - y1) * dy) / L2
            if t < 0.0:
                t = 0.0
            elif t > 1.0:
                t = 1.0
            qx, qy = x1 + t * dx, y1 + t * dy
            if (px - qx) ** 2 + (py - qy) ** 2 <= eps * eps:
                return True
        # half-open crossing rule avoids double counting shared vertices
        if (y1 > py) != (y2 > py):
            xint = x1 + (py - y1) * dx / dy
            if px < xint:
                inside = not inside
    return inside


@njit(cache=True)
def points_in_polygon(edges, pts, eps):
    out = np.empty(pts.shape[0], dtype=np.bool_)
    for k in range(pts.shape[0]):
        out[k] = point_in_polygon(edges, pts[k, 0], pts[k, 1], eps)
    return out


@njit(cache=True)
def _line_crossings(edges, px, py, dx, dy, ts):
    """Parameters t where the line p + t*d crosses a boundary edge."""
    m = 0
    for i in range(edges.shape[0]):
        rx, ry = edges[i, 2] - edges[i, 0], edges[i, 3] - edges[i, 1]
        den = dx * ry - dy * rx
        if abs(den) < 1e-14:
            continue
        s = (dx * (py - edges[i, 1]) - dy * (px - edges[i, 0])) / den
        if -_TANGENT_TOL <= s <= 1.0 + _TANGENT_TOL:
            ts[m] = ((edges[i, 0] - px) * ry - (edges[i, 1] - py) * rx) / den
            m += 1
    return m


@njit(cache=True)
def chord_span(edges, px, py, dx, dy, eps):
    """Maximal free interval (t_lo, t_hi) of the line p + t*d around t=0.

    p must be inside. Crossing parameters bracket t=0; the bracket is then
    widened across tangency points whose far side is still inside, so ties
    resolve toward the larger interval.
    """
    ts = np.empty(2 * edges.shape[0], dtype=np.float64)
    m = _line_crossings(edges, px, py, dx, dy, ts)
    tt = np.sort(ts[:m])
    lo, hi = 0.0, 0.0
    ilo, ihi = -1, -1
    for j in range(m):
        if tt[j] <= 0.0 and (ilo < 0 or tt[j] > lo):
            lo, ilo = tt[j], j
        if tt[j] >= 0.0 and (ihi < 0 or tt[j] < hi):
            hi, ihi = tt[j], j
    while 0 <= ihi < m - 1:
        mid = 0.5 * (tt[ihi] + tt[ihi + 1])
        if point_in_polygon(edges, px + mid * dx, py + mid * dy, eps):
            ihi += 1
            hi = tt[ihi]
        else:
            break
    while ilo >= 1:
        mid = 0.5 * (tt[ilo] + tt[ilo - 1])
        if point_in_polygon(edges, px + mid * dx, py + mid * dy, eps):
            ilo -= 1
            lo = tt[ilo]
        else:
            break
    return lo, hi


@njit(cache=True)
def first_exit(edges, ax, ay, bx, by, eps):
    """Largest t in [0, 1] with [a, a + t*(b-a)] fully inside; a must be inside.

    Sub-intervals between crossing parameters are classified by midpoint
    membership, which keeps grazing contacts from truncating the segment.
    """
    dx, dy = bx - ax, by - ay
    ts = np.empty(2 * edges.shape[0] + 1, dtype=np.float64)
    m = _line_crossings(edges, ax, ay, dx, dy, ts)
    # keep crossings interior to the segment
    k = 0
    for j in range(m):
        if _TANGENT_TOL < ts[j] < 1.0 - _TANGENT_TOL:
            ts[k] = ts[j]
            k += 1
    tt = np.sort(ts[:k])
    prev = 0.0
    for j in range(k):
        mid = 0.5 * (prev + tt[j])
        if not point_in_polygon(edges, ax + mid * dx, ay + mid * dy, eps):
            return prev
        prev = tt[j]
    mid = 0.5 * (prev + 1.0)
    if not point_in_polygon(edges, ax + mid * dx, ay + mid * dy, eps):
        return prev
    if not point_in_polygon(edges, bx, by, eps):
        return prev
    return 1.0


@njit(cache=True)
def segment_free(edges, ax, ay, bx, by, eps):
    return first_exit(edges, ax, ay, bx, by, eps) >= 1.0


@njit(cache=True)
def segments_free_batch(edges, A, B, eps):
    out = np.empty(A.shape[0], dtype=np.bool_)
    for k in range(A.shape[0]):
        out[k] = first_exit(edges, A[k, 0], A[k, 1], B[k, 0], B[k, 1], eps) >= 1.0
    return out
