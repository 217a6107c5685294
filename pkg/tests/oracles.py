"""Independent reference implementations used only by the tests."""
from __future__ import annotations

import math


def brute_force_lof(points, k, lrd_cap=1e10):
    """LOF straight from the definitions, one point at a time."""
    pts = [tuple(float(c) for c in p) for p in points]
    n = len(pts)

    def d(i, j):
        return math.sqrt(sum((a - b) ** 2 for a, b in zip(pts[i], pts[j])))

    kdist, hood = [], []
    for p in range(n):
        others = sorted(d(p, o) for o in range(n) if o != p)
        kd = others[k - 1]
        kdist.append(kd)
        hood.append([o for o in range(n) if o != p and d(p, o) <= kd])

    lrd = []
    for p in range(n):
        reach = [max(kdist[o], d(p, o)) for o in hood[p]]
        mean = sum(reach) / len(reach)
        lrd.append(lrd_cap if mean == 0 else min(1.0 / mean, lrd_cap))

    return [sum(lrd[o] / lrd[p] for o in hood[p]) / len(hood[p]) for p in range(n)]


def brute_force_neighbors(points, k):
    pts = [tuple(float(c) for c in p) for p in points]
    out = []
    for p in range(len(pts)):
        dists = {o: math.dist(pts[p], pts[o]) for o in range(len(pts)) if o != p}
        kd = sorted(dists.values())[k - 1]
        out.append((kd, sorted(o for o, v in dists.items() if v <= kd)))
    return out
