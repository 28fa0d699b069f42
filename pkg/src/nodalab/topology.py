"""Epsilon-chains, epsilon-connectivity and lattice corridors.

Pairs of points at distance ``<= eps`` are neighbours in the eps-graph (the
closed condition, with a relative slack of ``1e-12`` so that spacings equal to
``eps`` up to roundoff still count).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .analysis import ball_mask
from .geometry import CROSS, DiscreteDomain, DomainError

EPS_SLACK = 1e-12
CORRIDOR_FACTOR = 1.5


class DisjointSet:
    """Union-find over ``0..n-1``; the root of each set is its smallest index."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.count = n

    def find(self, a: int) -> int:
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.count -= 1
        return True


@dataclass(frozen=True)
class EpsChain:
    points: np.ndarray
    eps: float

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 2)
        object.__setattr__(self, "points", pts)
        if len(pts) > 1:
            gaps = np.hypot(*np.diff(pts, axis=0).T)
            if (gaps > self.eps * (1 + EPS_SLACK)).any():
                raise ValueError("consecutive chain points are farther apart than eps")

    def __len__(self) -> int:
        return len(self.points)


@dataclass(eq=False)
class Region:
    """A set of interior lattice nodes of a domain (4-connectivity)."""

    domain: DiscreteDomain
    mask: np.ndarray

    @property
    def size(self) -> int:
        return int(self.mask.sum())


def _as_points(S) -> np.ndarray:
    pts = np.asarray(S, dtype=float)
    if pts.ndim == 1:
        pts = np.column_stack([pts, np.zeros_like(pts)])
    return pts.reshape(-1, 2)


def eps_pairs(points: np.ndarray, eps: float) -> np.ndarray:
    """Index pairs ``(a, b)``, ``a < b``, at distance at most ``eps``."""
    if len(points) < 2:
        return np.empty((0, 2), dtype=int)
    pairs = cKDTree(points).query_pairs(eps * (1 + EPS_SLACK), output_type="ndarray")
    return pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))] if len(pairs) else pairs


def _find(points: np.ndarray, q) -> int:
    d = np.hypot(*(points - np.asarray(q, dtype=float).reshape(1, 2)).T)
    k = int(np.argmin(d))
    if d[k] > 1e-12 * max(1.0, float(np.abs(points).max())):
        raise ValueError(f"point {q} is not in the set")
    return k


def eps_chain_between(S, x, y, eps: float) -> EpsChain | None:
    """Shortest-hop eps-chain from ``x`` to ``y`` through points of ``S``.

    ``x`` and ``y`` may be given as coordinates; on a line, scalars work too.
    Returns ``None`` when no chain exists.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    pts = _as_points(S)
    a = _find(pts, _as_points([x])[0])
    b = _find(pts, _as_points([y])[0])
    adj: list[list[int]] = [[] for _ in range(len(pts))]
    for i, j in eps_pairs(pts, eps).tolist():
        adj[i].append(j)
        adj[j].append(i)
    prev = {a: -1}
    queue = deque([a])
    while queue and b not in prev:
        v = queue.popleft()
        for w in adj[v]:
            if w not in prev:
                prev[w] = v
                queue.append(w)
    if b not in prev:
        return None
    path = [b]
    while path[-1] != a:
        path.append(prev[path[-1]])
    return EpsChain(pts[path[::-1]], eps)


def eps_components(S, eps: float) -> DisjointSet:
    pts = _as_points(S)
    dsu = DisjointSet(len(pts))
    for i, j in eps_pairs(pts, eps).tolist():
        dsu.union(i, j)
    return dsu


def is_eps_connected(S, eps: float) -> bool:
    """True when every pair of points of ``S`` is joined by an eps-chain."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    pts = _as_points(S)
    if len(pts) == 0:
        raise ValueError("point set is empty")
    return eps_components(pts, eps).count == 1


def connectivity_vs_eps_profile(S, eps_grid) -> list[tuple[float, int]]:
    """Number of eps-graph components for each ``eps`` of an ascending grid."""
    grid = [float(e) for e in eps_grid]
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("eps grid must be sorted ascending")
    pts = _as_points(S)
    return [(e, eps_components(pts, e).count) for e in grid]


def chain_corridor(chain: EpsChain, domain: DiscreteDomain) -> Region:
    """Interior nodes within ``1.5 * eps`` of some chain point.

    Every ball ``B_{1.5 eps}(a_i)`` must lie in the interior; otherwise a
    :class:`DomainError` names the first offending chain index.
    """
    radius = CORRIDOR_FACTOR * chain.eps
    X, Y = domain.xy
    mask = np.zeros(domain.shape, dtype=bool)
    for k, (px, py) in enumerate(chain.points):
        ball = ball_mask(domain, (px, py), radius)
        reach = (
            px - radius >= X[0, 0] and px + radius <= X[0, -1] and py - radius >= Y[0, 0] and py + radius <= Y[-1, 0]
        )
        if not reach or not domain.interior[ball].all():
            raise DomainError(f"corridor ball around chain point {k} leaves the domain")
        mask |= ball
    return Region(domain, mask)


def path_in_region(region: Region, x, y) -> list[tuple[int, int]] | None:
    """Shortest 4-connected lattice path ``[(j, i), ...]`` inside the region.

    ``x`` and ``y`` snap to region nodes within ``h/2``; returns ``None`` when
    they lie in different components.
    """
    dom = region.domain
    start = dom.snap(*x, mask=region.mask)
    goal = dom.snap(*y, mask=region.mask)
    prev = {start: None}
    queue = deque([start])
    ny, nx = region.mask.shape
    offsets = [(dj, di) for dj, di in np.argwhere(CROSS) - 1 if (dj, di) != (0, 0)]
    while queue:
        v = queue.popleft()
        if v == goal:
            break
        for dj, di in offsets:
            w = (v[0] + int(dj), v[1] + int(di))
            if 0 <= w[0] < ny and 0 <= w[1] < nx and region.mask[w] and w not in prev:
                prev[w] = v
                queue.append(w)
    if goal not in prev:
        return None
    path = [goal]
    while path[-1] != start:
        path.append(prev[path[-1]])
    return path[::-1]
