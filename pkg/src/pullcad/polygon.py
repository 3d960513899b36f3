"""2D polygon primitives: area, simplicity test, ear-clipping triangulation.

Polygons are sequences of (x, y) pairs, implicitly closed, and must be simple.
Triangulation handles convex and non-convex inputs and always produces n-2
triangles for an n-gon.
"""

from __future__ import annotations

import math

from .errors import GeometryError

# collinearity/degeneracy tolerance, relative to polygon extent
_EPS = 1e-12


def signed_area(points):
    """Shoelace signed area; positive for counter-clockwise winding."""
    total = 0.0
    n = len(points)
    for i in range(n):
        x0, y0 = points[i]
        x1, y1 = points[(i + 1) % n]
        total += x0 * y1 - x1 * y0
    return 0.5 * total


def _orient(ax, ay, bx, by, cx, cy):
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _on_segment(ax, ay, bx, by, px, py):
    return min(ax, bx) <= px <= max(ax, bx) and min(ay, by) <= py <= max(ay, by)


def _segments_intersect(p1, p2, p3, p4):
    """True if closed segments p1p2 and p3p4 intersect."""
    d1 = _orient(*p3, *p4, *p1)
    d2 = _orient(*p3, *p4, *p2)
    d3 = _orient(*p1, *p2, *p3)
    d4 = _orient(*p1, *p2, *p4)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and (
        (d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)
    ):
        return True
    if d1 == 0 and _on_segment(*p3, *p4, *p1):
        return True
    if d2 == 0 and _on_segment(*p3, *p4, *p2):
        return True
    if d3 == 0 and _on_segment(*p1, *p2, *p3):
        return True
    if d4 == 0 and _on_segment(*p1, *p2, *p4):
        return True
    return False


def is_simple(points):
    """True if no two non-adjacent edges intersect and no vertex repeats."""
    n = len(points)
    if n < 3:
        return False
    if len({(x, y) for x, y in points}) != n:
        return False
    for i in range(n):
        a1 = points[i]
        a2 = points[(i + 1) % n]
        for j in range(i + 1, n):
            # skip adjacent edges (they share an endpoint by construction)
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            if _segments_intersect(a1, a2, points[j], points[(j + 1) % n]):
                return False
    return True


def _point_in_triangle(px, py, ax, ay, bx, by, cx, cy, eps):
    d1 = _orient(ax, ay, bx, by, px, py)
    d2 = _orient(bx, by, cx, cy, px, py)
    d3 = _orient(cx, cy, ax, ay, px, py)
    return d1 >= -eps and d2 >= -eps and d3 >= -eps


def triangulate(points):
    """Ear-clip a simple CCW polygon into index triples.

    Returns a list of (i, j, k) triangles over the input vertex indices, in
    deterministic clipping order; exactly len(points) - 2 entries.
    """
    n = len(points)
    if n < 3:
        raise GeometryError("polygon needs at least 3 vertices")
    area = signed_area(points)
    extent = max(
        max(abs(x) for x, _ in points), max(abs(y) for _, y in points), 1.0
    )
    if abs(area) <= _EPS * extent * extent:
        raise GeometryError("polygon has zero area")
    if area < 0:
        raise GeometryError("polygon winding is clockwise, expected counter-clockwise")
    if not is_simple(points):
        raise GeometryError("polygon is self-intersecting or has repeated vertices")

    eps = _EPS * extent * extent
    nxt = {i: (i + 1) % n for i in range(n)}
    prv = {i: (i - 1) % n for i in range(n)}

    def corner_cross(i):
        return _orient(*points[prv[i]], *points[i], *points[nxt[i]])

    # only reflex vertices can block an ear, so containment tests stay cheap
    reflex = {i for i in range(n) if corner_cross(i) <= eps}

    def is_ear(cur):
        if cur in reflex:
            return False
        ax, ay = points[prv[cur]]
        bx, by = points[cur]
        cx, cy = points[nxt[cur]]
        for other in reflex:
            if other in (prv[cur], cur, nxt[cur]):
                continue
            if _point_in_triangle(*points[other], ax, ay, bx, by, cx, cy, eps):
                return False
        return True

    triangles = []
    alive = n
    cur = 0
    steps = 0
    while alive > 3:
        if is_ear(cur):
            p, nx = prv[cur], nxt[cur]
            triangles.append((p, cur, nx))
            nxt[p] = nx
            prv[nx] = p
            reflex.discard(cur)
            alive -= 1
            for neighbor in (p, nx):
                if corner_cross(neighbor) > eps:
                    reflex.discard(neighbor)
                else:
                    reflex.add(neighbor)
            cur = nx
            steps = 0
        else:
            cur = nxt[cur]
            steps += 1
            if steps > alive:
                raise GeometryError("no ear found, polygon has collinear degeneracies")
    a = cur
    b = nxt[a]
    c = nxt[b]
    if _orient(*points[a], *points[b], *points[c]) <= eps:
        raise GeometryError("final triangle is degenerate")
    triangles.append((a, b, c))
    return triangles
