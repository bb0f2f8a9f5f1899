"""Numba kernels for convex-polygon clipping used by the geometry hot paths.

All polygons are counterclockwise convex vertex arrays of shape (V, 2).
The batch kernels write one independent float64 per output cell, so results
are bit-identical regardless of the number of worker threads.
"""

import numpy as np
from numba import njit, prange


@njit(cache=True)
def _clip_area(subj, ns, clip, nc, buf_a, buf_b):
    """Area of the intersection of two convex CCW polygons.

    Sutherland-Hodgman clipping of ``subj`` against every edge of ``clip``,
    then the shoelace formula. Points exactly on a clip edge are kept, so
    clipping a polygon against itself returns its own area bit-for-bit.
    """
    n_in = ns
    for i in range(ns):
        buf_a[i, 0] = subj[i, 0]
        buf_a[i, 1] = subj[i, 1]
    cur = buf_a
    nxt = buf_b
    for e in range(nc):
        if n_in == 0:
            return 0.0
        ex0 = clip[e, 0]
        ey0 = clip[e, 1]
        e1 = e + 1
        if e1 == nc:
            e1 = 0
        dx = clip[e1, 0] - ex0
        dy = clip[e1, 1] - ey0
        n_out = 0
        px = cur[n_in - 1, 0]
        py = cur[n_in - 1, 1]
        pc = dx * (py - ey0) - dy * (px - ex0)
        pin = pc >= 0.0
        for k in range(n_in):
            qx = cur[k, 0]
            qy = cur[k, 1]
            qc = dx * (qy - ey0) - dy * (qx - ex0)
            qin = qc >= 0.0
            if qin != pin:
                t = pc / (pc - qc)
                nxt[n_out, 0] = px + t * (qx - px)
                nxt[n_out, 1] = py + t * (qy - py)
                n_out += 1
            if qin:
                nxt[n_out, 0] = qx
                nxt[n_out, 1] = qy
                n_out += 1
            px = qx
            py = qy
            pc = qc
            pin = qin
        tmp = cur
        cur = nxt
        nxt = tmp
        n_in = n_out
    if n_in < 3:
        return 0.0
    s = 0.0
    for k in range(n_in):
        k1 = k + 1
        if k1 == n_in:
            k1 = 0
        s += cur[k, 0] * cur[k1, 1] - cur[k1, 0] * cur[k, 1]
    return 0.5 * abs(s)


@njit(cache=True)
def convex_intersection_area(subj, clip):
    """Scalar wrapper around :func:`_clip_area` for two (V, 2) polygons."""
    cap = subj.shape[0] + clip.shape[0] + 4
    buf_a = np.empty((cap, 2))
    buf_b = np.empty((cap, 2))
    return _clip_area(subj, subj.shape[0], clip, clip.shape[0], buf_a, buf_b)


@njit(cache=True, parallel=True)
def iou_matrix(polys_a, areas_a, boxes_a, polys_b, areas_b, boxes_b, out):
    """Fill out[p, q] with IOU(polys_a[p], polys_b[q]).

    boxes_* are (T, 4) axis-aligned bounding boxes (minx, miny, maxx, maxy)
    used for a cheap disjointness pre-test.
    """
    ta = polys_a.shape[0]
    tb = polys_b.shape[0]
    nva = polys_a.shape[1]
    nvb = polys_b.shape[1]
    cap = nva + nvb + 4
    for p in prange(ta):
        buf_a = np.empty((cap, 2))
        buf_b = np.empty((cap, 2))
        for q in range(tb):
            if (boxes_a[p, 0] > boxes_b[q, 2] or boxes_b[q, 0] > boxes_a[p, 2]
                    or boxes_a[p, 1] > boxes_b[q, 3] or boxes_b[q, 1] > boxes_a[p, 3]):
                out[p, q] = 0.0
                continue
            inter = _clip_area(polys_a[p], nva, polys_b[q], nvb, buf_a, buf_b)
            denom = areas_a[p] + areas_b[q] - inter
            out[p, q] = inter / denom if denom > 0.0 else 0.0


@njit(cache=True)
def cell_overlap_weights(poly, origin_x, origin_y, cell, grid_n):
    """Overlap area of a convex CCW polygon with each cell of a square grid.

    Returns a (grid_n, grid_n) array indexed [ix, iy]; only cells touching
    the polygon's bounding box are clipped.
    """
    nv = poly.shape[0]
    w = np.zeros((grid_n, grid_n))
    minx = poly[0, 0]
    maxx = poly[0, 0]
    miny = poly[0, 1]
    maxy = poly[0, 1]
    for i in range(1, nv):
        if poly[i, 0] < minx:
            minx = poly[i, 0]
        if poly[i, 0] > maxx:
            maxx = poly[i, 0]
        if poly[i, 1] < miny:
            miny = poly[i, 1]
        if poly[i, 1] > maxy:
            maxy = poly[i, 1]
    ix0 = max(0, int(np.floor((minx - origin_x) / cell)))
    ix1 = min(grid_n - 1, int(np.floor((maxx - origin_x) / cell)))
    iy0 = max(0, int(np.floor((miny - origin_y) / cell)))
    iy1 = min(grid_n - 1, int(np.floor((maxy - origin_y) / cell)))
    cap = nv + 8
    buf_a = np.empty((cap, 2))
    buf_b = np.empty((cap, 2))
    square = np.empty((4, 2))
    for ix in range(ix0, ix1 + 1):
        x0 = origin_x + ix * cell
        for iy in range(iy0, iy1 + 1):
            y0 = origin_y + iy * cell
            square[0, 0] = x0
            square[0, 1] = y0
            square[1, 0] = x0 + cell
            square[1, 1] = y0
            square[2, 0] = x0 + cell
            square[2, 1] = y0 + cell
            square[3, 0] = x0
            square[3, 1] = y0 + cell
            w[ix, iy] = _clip_area(poly, nv, square, 4, buf_a, buf_b)
    return w


@njit(cache=True, parallel=True)
def iou_matrix_symmetric(polys, areas, boxes, out):
    """Symmetric variant of :func:`iou_matrix` for one set against itself."""
    t = polys.shape[0]
    nv = polys.shape[1]
    cap = 2 * nv + 4
    for p in prange(t):
        buf_a = np.empty((cap, 2))
        buf_b = np.empty((cap, 2))
        for q in range(p, t):
            if (boxes[p, 0] > boxes[q, 2] or boxes[q, 0] > boxes[p, 2]
                    or boxes[p, 1] > boxes[q, 3] or boxes[q, 1] > boxes[p, 3]):
                out[p, q] = 0.0
                out[q, p] = 0.0
                continue
            inter = _clip_area(polys[p], nv, polys[q], nv, buf_a, buf_b)
            denom = areas[p] + areas[q] - inter
            v = inter / denom if denom > 0.0 else 0.0
            out[p, q] = v
            out[q, p] = v
