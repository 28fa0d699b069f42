"""Lattice discretizations of bounded planar domains.

A :class:`DiscreteDomain` is a square lattice of spacing ``h`` whose nodes are
classified as interior (strictly inside the domain), boundary (outside, but
8-adjacent to an interior node) or exterior.  Values are stored image-style,
``array[j, i]`` with ``j`` the row (y) index and ``i`` the column (x) index;
flat node indices are ``j * nx + i``.

The boundary nodes are ordered into closed cycles by walking the outline of the
union of interior cells counterclockwise, so boundary data can be treated as a
function on a discrete Jordan curve.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import ndimage

EXTERIOR = 0
BOUNDARY = 1
INTERIOR = 2

CROSS = ndimage.generate_binary_structure(2, 1)
SQUARE = ndimage.generate_binary_structure(2, 2)

# lower-right triangle (i,j),(i+1,j),(i+1,j+1) and upper-left (i,j),(i,j+1),(i+1,j+1);
# gradient = _GRAD[kind] @ u[tri] / h
_GRAD = np.array(
    [
        [[-1.0, 1.0, 0.0], [0.0, -1.0, 1.0]],
        [[0.0, -1.0, 1.0], [-1.0, 1.0, 0.0]],
    ]
)


class DomainError(ValueError):
    """Raised when a domain cannot be discretized at the requested spacing."""


@dataclass(frozen=True, eq=False)
class DiscreteDomain:
    h: float
    nx: int
    ny: int
    x0: float
    y0: float
    kind: np.ndarray
    boundary_cycle: np.ndarray
    cycle_starts: tuple[int, ...]
    tri_nodes: np.ndarray
    tri_kind: np.ndarray
    center: tuple[float, float]
    shape_kind: str = "custom"
    params: dict = field(default_factory=dict)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    @property
    def xy(self) -> tuple[np.ndarray, np.ndarray]:
        """Node coordinate arrays ``(X, Y)`` of shape ``(ny, nx)``."""
        xs = self.x0 + self.h * np.arange(self.nx)
        ys = self.y0 + self.h * np.arange(self.ny)
        return np.meshgrid(xs, ys)

    @property
    def interior(self) -> np.ndarray:
        return self.kind == INTERIOR

    @property
    def boundary(self) -> np.ndarray:
        return self.kind == BOUNDARY

    @property
    def active(self) -> np.ndarray:
        return self.kind != EXTERIOR

    @property
    def n_interior(self) -> int:
        return int(np.count_nonzero(self.interior))

    @property
    def n_cycles(self) -> int:
        return len(self.cycle_starts)

    @property
    def tri_area(self) -> float:
        return 0.5 * self.h * self.h

    def cycles(self) -> list[np.ndarray]:
        """Boundary cycles as separate flat-index arrays (outer cycle first)."""
        bounds = list(self.cycle_starts) + [len(self.boundary_cycle)]
        return [self.boundary_cycle[a:b] for a, b in zip(bounds[:-1], bounds[1:])]

    def boundary_xy(self) -> tuple[np.ndarray, np.ndarray]:
        X, Y = self.xy
        return X.ravel()[self.boundary_cycle], Y.ravel()[self.boundary_cycle]

    def tri_gradient_matrix(self) -> np.ndarray:
        """Per-triangle ``(2, 3)`` maps from vertex values to the gradient."""
        return _GRAD[self.tri_kind] / self.h

    def tri_centroids(self) -> np.ndarray:
        X, Y = self.xy
        cx = X.ravel()[self.tri_nodes].mean(axis=1)
        cy = Y.ravel()[self.tri_nodes].mean(axis=1)
        return np.column_stack([cx, cy])

    def index(self, x: float, y: float) -> tuple[int, int]:
        """Nearest lattice index ``(j, i)`` of a position (may be off-grid)."""
        return int(round((y - self.y0) / self.h)), int(round((x - self.x0) / self.h))

    def snap(self, x: float, y: float, mask: np.ndarray | None = None) -> tuple[int, int]:
        """Nearest node of ``mask`` (default: interior) within ``h/2`` of ``(x, y)``."""
        mask = self.interior if mask is None else mask
        j, i = self.index(x, y)
        if not (0 <= j < self.ny and 0 <= i < self.nx) or not mask[j, i]:
            raise DomainError(f"position ({x}, {y}) does not snap to a node")
        nx_, ny_ = self.x0 + i * self.h, self.y0 + j * self.h
        if np.hypot(nx_ - x, ny_ - y) > 0.5 * self.h * (1 + 1e-9):
            raise DomainError(f"position ({x}, {y}) is farther than h/2 from the lattice")
        return j, i

    def diameter(self) -> float:
        X, Y = self.xy
        act = self.active
        return float(max(np.ptp(X[act]), np.ptp(Y[act])))


@dataclass(frozen=True, eq=False)
class BoundaryData:
    """Dirichlet values in boundary-cycle order."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    def __len__(self) -> int:
        return len(self.values)

    @classmethod
    def from_function(cls, domain: DiscreteDomain, fn: Callable) -> "BoundaryData":
        """Evaluate ``fn(x, y)`` at the boundary-cycle nodes."""
        bx, by = domain.boundary_xy()
        vals = np.broadcast_to(np.asarray(fn(bx, by), dtype=float), bx.shape)
        return cls(np.array(vals))

    @classmethod
    def constant(cls, domain: DiscreteDomain, c: float) -> "BoundaryData":
        return cls(np.full(len(domain.boundary_cycle), float(c)))


def boundary_angle(domain: DiscreteDomain) -> np.ndarray:
    """Polar angle of each boundary-cycle node about the domain center."""
    bx, by = domain.boundary_xy()
    return np.arctan2(by - domain.center[1], bx - domain.center[0])


def boundary_arclength(domain: DiscreteDomain) -> np.ndarray:
    """Normalized arclength in [0, 1) of each boundary node's projection.

    Defined for polygon domains; the parameter starts at the first vertex and
    runs along the vertex order.
    """
    verts = domain.params.get("vertices")
    if verts is None:
        raise DomainError("arclength is only defined for polygon domains")
    verts = np.asarray(verts, dtype=float)
    bx, by = domain.boundary_xy()
    pts = np.column_stack([bx, by])
    a = verts
    b = np.roll(verts, -1, axis=0)
    seg = b - a
    lens = np.hypot(seg[:, 0], seg[:, 1])
    offs = np.concatenate([[0.0], np.cumsum(lens)[:-1]])
    rel = pts[:, None, :] - a[None, :, :]
    t = np.clip((rel * seg[None]).sum(-1) / (lens**2)[None], 0.0, 1.0)
    proj = a[None] + t[..., None] * seg[None]
    d = np.hypot(*(pts[:, None, :] - proj).transpose(2, 0, 1))
    k = np.argmin(d, axis=1)
    s = (offs[k] + t[np.arange(len(pts)), k] * lens[k]) / lens.sum()
    return np.mod(s, 1.0)


def _trace_cycles(interior: np.ndarray) -> list[list[tuple[int, int]]]:
    """Order the non-interior cells touching the interior into closed loops.

    Walks the outline of the union of interior cells with the interior on the
    left (counterclockwise for the outer loop); at diagonal-only contacts the
    walk turns left, so the interior is treated as 4-connected.  Cells are
    ``(j, i)`` pairs; corner ``(a, b)`` is the lower-left corner of cell
    ``(j=b, i=a)``.
    """
    ny, nx = interior.shape

    def isin(i, j):
        return 0 <= i < nx and 0 <= j < ny and interior[j, i]

    out_edges: dict[tuple[int, int], list[tuple[int, int]]] = {}
    js, is_ = np.nonzero(interior)
    for j, i in zip(js.tolist(), is_.tolist()):
        if not isin(i, j - 1):
            out_edges.setdefault((i, j), []).append((1, 0))
        if not isin(i + 1, j):
            out_edges.setdefault((i + 1, j), []).append((0, 1))
        if not isin(i, j + 1):
            out_edges.setdefault((i + 1, j + 1), []).append((-1, 0))
        if not isin(i - 1, j):
            out_edges.setdefault((i, j + 1), []).append((0, -1))

    def right_cell(a, b, d):
        if d == (1, 0):
            return (a, b - 1)
        if d == (0, 1):
            return (a, b)
        if d == (-1, 0):
            return (a - 1, b)
        return (a - 1, b - 1)

    def around(a, b):
        # cells around corner (a, b) in counterclockwise order: LL, LR, UR, UL
        return [(a - 1, b - 1), (a, b - 1), (a, b), (a - 1, b)]

    used: set[tuple[int, int, int, int]] = set()
    loops = []
    starts = sorted(out_edges, key=lambda v: (v[1], v[0]))
    for start in starts:
        for d0 in out_edges[start]:
            if (start[0], start[1], d0[0], d0[1]) in used:
                continue
            seq: list[tuple[int, int]] = []
            v, d = start, d0
            while True:
                used.add((v[0], v[1], d[0], d[1]))
                rc = right_cell(v[0], v[1], d)
                seq.append(rc)
                w = (v[0] + d[0], v[1] + d[1])
                cands = out_edges[w]
                if len(cands) == 1:
                    nd = cands[0]
                else:
                    left = (-d[1], d[0])
                    nd = left if left in cands else cands[0]
                # sweep counterclockwise around w from incoming right cell to outgoing
                ring = around(*w)
                k0 = ring.index(rc)
                k1 = ring.index(right_cell(w[0], w[1], nd))
                k = k0
                while k != k1:
                    k = (k + 1) % 4
                    c = ring[k]
                    if not isin(*c):
                        seq.append(c)
                v, d = w, nd
                if v == start and d == d0:
                    break
            # a cell can be passed twice at one-node notches; keep its first visit
            loops.append([(c[1], c[0]) for c in dict.fromkeys(seq)])
    return loops


def _build(
    inside: Callable[[np.ndarray, np.ndarray], np.ndarray],
    bbox: tuple[float, float, float, float],
    h: float,
    anchor: tuple[float, float],
    center: tuple[float, float],
    jordan: bool,
    shape_kind: str,
    params: dict,
) -> DiscreteDomain:
    if not h > 0:
        raise DomainError("spacing h must be positive")
    xmin, xmax, ymin, ymax = bbox
    ax, ay = anchor
    i0 = int(np.floor((xmin - ax) / h + 1e-9)) - 2
    i1 = int(np.ceil((xmax - ax) / h - 1e-9)) + 2
    j0 = int(np.floor((ymin - ay) / h + 1e-9)) - 2
    j1 = int(np.ceil((ymax - ay) / h - 1e-9)) + 2
    nx, ny = i1 - i0 + 1, j1 - j0 + 1
    x0, y0 = ax + i0 * h, ay + j0 * h
    X, Y = np.meshgrid(x0 + h * np.arange(nx), y0 + h * np.arange(ny))
    interior = np.asarray(inside(X, Y), dtype=bool)

    core = ndimage.binary_erosion(interior, structure=SQUARE)
    if not core.any():
        raise DomainError(f"h={h} is too coarse: interior has no 3x3 core")
    _, ncomp = ndimage.label(interior, structure=CROSS)
    if ncomp != 1:
        raise DomainError(f"h={h} is too coarse: lattice interior has {ncomp} components")
    boundary = ndimage.binary_dilation(interior, structure=SQUARE) & ~interior

    loops = _trace_cycles(interior)
    flat = [j * nx + i for loop in loops for (j, i) in loop]
    if len(flat) != len(set(flat)):
        raise DomainError(f"h={h} is too coarse: boundary cycles overlap")
    cyc = np.array(flat, dtype=np.int64)
    bmask = np.zeros(ny * nx, dtype=bool)
    bmask[cyc] = True
    if not np.array_equal(bmask.reshape(ny, nx), boundary):
        raise DomainError(f"h={h} is too coarse: boundary cycles miss boundary nodes")
    for loop in loops:
        arr = np.array(loop)
        steps = np.abs(arr - np.roll(arr, -1, axis=0)).max(axis=1)
        if len(loop) < 3 or steps.max() > 1:
            raise DomainError(f"h={h} is too coarse: broken boundary cycle")
    if jordan:
        if len(loops) != 1:
            raise DomainError(f"expected one boundary cycle, found {len(loops)}")
        exterior = ~(interior | boundary)
        if (boundary & ~ndimage.binary_dilation(exterior, structure=SQUARE)).any():
            raise DomainError(f"h={h} is too coarse: boundary node enclosed by the domain")
    starts = tuple(np.cumsum([0] + [len(lp) for lp in loops[:-1]]).tolist())

    kind = np.full((ny, nx), EXTERIOR, dtype=np.int8)
    kind[boundary] = BOUNDARY
    kind[interior] = INTERIOR

    tri_nodes, tri_kind = _triangulate(kind, X, Y, inside, h)

    for arr in (kind, cyc, tri_nodes, tri_kind):
        arr.setflags(write=False)
    return DiscreteDomain(
        h=float(h),
        nx=nx,
        ny=ny,
        x0=float(x0),
        y0=float(y0),
        kind=kind,
        boundary_cycle=cyc,
        cycle_starts=starts,
        tri_nodes=tri_nodes,
        tri_kind=tri_kind,
        center=(float(center[0]), float(center[1])),
        shape_kind=shape_kind,
        params=params,
    )


def _triangulate(kind, X, Y, inside, h):
    """Active triangles of the lattice split along the (i,j)-(i+1,j+1) diagonals.

    Every triangle touching an interior node is kept, so interior nodes always
    carry full hat functions.  Triangles made only of boundary nodes are kept
    when their centroid lies in the closed domain; they carry no unknowns and
    only complete the covered area (e.g. the corners of a lattice-aligned
    square).
    """
    ny, nx = kind.shape
    J, I = np.meshgrid(np.arange(ny - 1), np.arange(nx - 1), indexing="ij")
    ll = (J * nx + I).ravel()
    lower = np.column_stack([ll, ll + 1, ll + nx + 1])
    upper = np.column_stack([ll, ll + nx, ll + nx + 1])
    tris = np.concatenate([lower, upper])
    tk = np.concatenate([np.zeros(len(ll), np.int8), np.ones(len(ll), np.int8)])
    flat = kind.ravel()
    tris_ok = (flat[tris] != EXTERIOR).all(axis=1)
    touches = (flat[tris] == INTERIOR).any(axis=1)
    cx = X.ravel()[tris].mean(axis=1)
    cy = Y.ravel()[tris].mean(axis=1)
    closed = inside(cx, cy) | _near_inside(inside, cx, cy, 1e-9 * h)
    keep = tris_ok & (touches | closed)
    tris, tk = tris[keep], tk[keep]
    order = np.lexsort((tk, tris[:, 0]))
    return np.ascontiguousarray(tris[order]), np.ascontiguousarray(tk[order])


def _near_inside(inside, x, y, r):
    hit = np.zeros(x.shape, dtype=bool)
    for dx, dy in ((r, 0), (-r, 0), (0, r), (0, -r)):
        hit |= inside(x + dx, y + dy)
    return hit


def build_disk_domain(radius: float, h: float, center: tuple[float, float] = (0.0, 0.0)) -> DiscreteDomain:
    """Disk of the given radius; the lattice is anchored at the center.

    Raises :class:`DomainError` unless ``0 < h < radius / 4``.
    """
    if not (0 < h < radius / 4):
        raise DomainError(f"h={h} is too coarse for radius {radius} (need 0 < h < radius/4)")
    cx, cy = center

    def inside(x, y):
        return np.hypot(x - cx, y - cy) < radius

    return _build(
        inside,
        (cx - radius, cx + radius, cy - radius, cy + radius),
        h,
        anchor=(cx, cy),
        center=(cx, cy),
        jordan=True,
        shape_kind="disk",
        params={"radius": float(radius)},
    )


def build_annulus_domain(
    r_inner: float, r_outer: float, h: float, center: tuple[float, float] = (0.0, 0.0)
) -> DiscreteDomain:
    """Annulus ``r_inner < |x - center| < r_outer``.

    Not a Jordan domain: the boundary consists of two cycles, outer first.  Used
    for radial solver checks only.
    """
    if not (0 < r_inner < r_outer) or not (0 < h < (r_outer - r_inner) / 4):
        raise DomainError("invalid annulus radii or spacing")
    cx, cy = center

    def inside(x, y):
        r = np.hypot(x - cx, y - cy)
        return (r > r_inner) & (r < r_outer)

    return _build(
        inside,
        (cx - r_outer, cx + r_outer, cy - r_outer, cy + r_outer),
        h,
        anchor=(cx, cy),
        center=(cx, cy),
        jordan=False,
        shape_kind="annulus",
        params={"r_inner": float(r_inner), "r_outer": float(r_outer)},
    )


def _segments_cross(p1, p2, q1, q2) -> bool:
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    def on_seg(a, b, c):
        return min(a[0], b[0]) <= c[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= c[1] <= max(a[1], b[1])

    d1, d2 = orient(q1, q2, p1), orient(q1, q2, p2)
    d3, d4 = orient(p1, p2, q1), orient(p1, p2, q2)
    if ((d1 > 0) != (d2 > 0)) and d1 != 0 and d2 != 0 and ((d3 > 0) != (d4 > 0)) and d3 != 0 and d4 != 0:
        return True
    return (
        (d1 == 0 and on_seg(q1, q2, p1))
        or (d2 == 0 and on_seg(q1, q2, p2))
        or (d3 == 0 and on_seg(p1, p2, q1))
        or (d4 == 0 and on_seg(p1, p2, q2))
    )


def is_simple_polygon(vertices: Sequence[Sequence[float]]) -> bool:
    v = [tuple(map(float, p)) for p in vertices]
    n = len(v)
    if n < 3 or len(set(v)) != n:
        return False
    for a in range(n):
        for b in range(a + 1, n):
            if b == a + 1 or (a == 0 and b == n - 1):
                continue
            if _segments_cross(v[a], v[(a + 1) % n], v[b], v[(b + 1) % n]):
                return False
    return True


def polygon_contains(vertices, x: np.ndarray, y: np.ndarray, tol: float = 0.0) -> np.ndarray:
    """Strict even-odd containment; points within ``tol`` of an edge are outside."""
    v = np.asarray(vertices, dtype=float)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    inside = np.zeros(x.shape, dtype=bool)
    on_edge = np.zeros(x.shape, dtype=bool)
    n = len(v)
    for k in range(n):
        (xa, ya), (xb, yb) = v[k], v[(k + 1) % n]
        crosses = (ya > y) != (yb > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = xa + (y - ya) * (xb - xa) / (yb - ya)
        inside ^= crosses & (x < xint)
        dx, dy = xb - xa, yb - ya
        L2 = dx * dx + dy * dy
        t = np.clip(((x - xa) * dx + (y - ya) * dy) / L2, 0.0, 1.0)
        d = np.hypot(x - (xa + t * dx), y - (ya + t * dy))
        on_edge |= d <= tol
    return inside & ~on_edge


def build_polygon_domain(vertices: Sequence[Sequence[float]], h: float) -> DiscreteDomain:
    """Simple polygon; the lattice is anchored at the lower-left bounding-box corner."""
    v = np.asarray(vertices, dtype=float)
    if v.ndim != 2 or v.shape[1] != 2 or not is_simple_polygon(v):
        raise DomainError("vertices must describe a simple closed polygon")
    xmin, ymin = v.min(axis=0)
    xmax, ymax = v.max(axis=0)
    tol = 1e-9 * h

    def inside(x, y):
        return polygon_contains(v, x, y, tol)

    # area centroid (shoelace)
    xs, ys = v[:, 0], v[:, 1]
    xn, yn = np.roll(xs, -1), np.roll(ys, -1)
    cross = xs * yn - xn * ys
    area = cross.sum() / 2
    cx = ((xs + xn) * cross).sum() / (6 * area)
    cy = ((ys + yn) * cross).sum() / (6 * area)
    return _build(
        inside,
        (xmin, xmax, ymin, ymax),
        h,
        anchor=(xmin, ymin),
        center=(cx, cy),
        jordan=True,
        shape_kind="polygon",
        params={"vertices": v.tolist()},
    )


def _values(g) -> np.ndarray:
    return np.asarray(g.values if isinstance(g, BoundaryData) else g, dtype=float)


def plateau_extrema(g: BoundaryData | Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    """Plateau values of the relative maxima and minima of cyclic data.

    Runs of equal consecutive values are collapsed to one plateau.  A plateau
    is a maximum when both cyclic neighbours are strictly smaller, a minimum
    when both are strictly larger.  Constant data has no extrema.
    """
    v = _values(g)
    if v.ndim != 1 or len(v) < 3:
        raise ValueError("boundary cycle must have at least 3 values")
    change = np.nonzero(v != np.roll(v, 1))[0]
    if len(change) == 0:
        return np.empty(0), np.empty(0)
    v = np.roll(v, -change[0])
    starts = np.nonzero(np.concatenate([[True], v[1:] != v[:-1]]))[0]
    runs = v[starts]
    prev, nxt = np.roll(runs, 1), np.roll(runs, -1)
    return runs[(runs > prev) & (runs > nxt)], runs[(runs < prev) & (runs < nxt)]


def count_relative_extrema(g: BoundaryData | Sequence[float]) -> tuple[int, int]:
    """``(num_maxima, num_minima)`` of cyclic boundary data, see :func:`plateau_extrema`."""
    maxima, minima = plateau_extrema(g)
    return len(maxima), len(minima)
