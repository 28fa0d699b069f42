"""Nodal domains, nodal lines and vanishing sets of lattice fields.

Open sign sets ``{u > tau}`` and ``{u < -tau}`` are labelled with
4-connectivity; the closed zero set ``{|u| <= tau}`` and complements are
treated with 8-connectivity, so a set and its complement never both fail to
separate on a checkerboard.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .analysis import ball_in_domain, ball_mask
from .geometry import CROSS, SQUARE, BoundaryData, DiscreteDomain, plateau_extrema

DEFAULT_TAU_REL = 1e-3


def _values(domain: DiscreteDomain, u) -> np.ndarray:
    vals = np.asarray(getattr(u, "values", u), dtype=float)
    if vals.shape != domain.shape:
        raise ValueError(f"field shape {vals.shape} does not match domain {domain.shape}")
    return vals


def default_tau(domain: DiscreteDomain, u, rel: float = DEFAULT_TAU_REL) -> float:
    vals = _values(domain, u)
    return rel * float(np.abs(vals[domain.active]).max())


@dataclass
class Component:
    label: int
    sign: int
    size: int
    mask: np.ndarray = field(repr=False)
    boundary_contact: bool = False
    simply_connected: bool = True


@dataclass
class NodalDecomposition:
    """Signed 4-connected components of a field plus its zero set.

    ``labels`` holds ``+i`` on the i-th positive component, ``-j`` on the j-th
    negative component and 0 on the zero set and off the interior.
    """

    labels: np.ndarray
    positive: list[Component]
    negative: list[Component]
    zero: np.ndarray
    tau: float
    h: float = np.nan

    @property
    def components(self) -> list[Component]:
        return self.positive + self.negative

    @property
    def counts(self) -> tuple[int, int]:
        return len(self.positive), len(self.negative)


def _simply_connected(mask: np.ndarray) -> bool:
    js, is_ = np.nonzero(mask)
    box = mask[js.min() : js.max() + 1, is_.min() : is_.max() + 1]
    padded = np.pad(box, 1, constant_values=False)
    _, n = ndimage.label(~padded, structure=SQUARE)
    return n == 1


def extract_nodal_decomposition(domain: DiscreteDomain, u, tau: float | None = None) -> NodalDecomposition:
    """Label the positive and negative nodal domains of ``u`` on the interior.

    ``tau`` defaults to ``1e-3 * max|u|``; interior nodes with ``|u| <= tau``
    form the zero set.
    """
    vals = _values(domain, u)
    tau = default_tau(domain, vals) if tau is None else float(tau)
    if tau < 0:
        raise ValueError("tau must be non-negative")
    inner = domain.interior
    bnd_reach = ndimage.binary_dilation(domain.boundary, structure=SQUARE)
    labels = np.zeros(domain.shape, dtype=np.int64)
    comps: dict[int, list[Component]] = {1: [], -1: []}
    for sign in (1, -1):
        lab, n = ndimage.label(inner & (sign * vals > tau), structure=CROSS)
        for k in range(1, n + 1):
            m = lab == k
            labels[m] = sign * k
            comps[sign].append(
                Component(
                    label=sign * k,
                    sign=sign,
                    size=int(m.sum()),
                    mask=m,
                    boundary_contact=bool((m & bnd_reach).any()),
                    simply_connected=_simply_connected(m),
                )
            )
    zero = inner & (np.abs(vals) <= tau)
    return NodalDecomposition(labels, comps[1], comps[-1], zero, tau, domain.h)


@dataclass
class LineVerdict:
    label: int
    ok: bool
    pieces: int
    witness: tuple[float, float] | None = None


def nodal_lines_touch_boundary(decomp: NodalDecomposition, domain: DiscreteDomain) -> list[LineVerdict]:
    """Check that every piece of each component's interior nodal line reaches the boundary.

    The nodal line of a component is the set of interior nodes outside it but
    4-adjacent to it; its 8-connected pieces must each come 8-adjacent to a
    boundary node.
    """
    X, Y = domain.xy
    bnd_reach = ndimage.binary_dilation(domain.boundary, structure=SQUARE)
    out = []
    for comp in decomp.components:
        line = ndimage.binary_dilation(comp.mask, structure=CROSS) & domain.interior & ~comp.mask
        lab, n = ndimage.label(line, structure=SQUARE)
        witness = None
        for k in range(1, n + 1):
            piece = lab == k
            if not (piece & bnd_reach).any():
                j, i = np.argwhere(piece)[0]
                witness = (float(X[j, i]), float(Y[j, i]))
                break
        out.append(LineVerdict(comp.label, witness is None, int(n), witness))
    return out


@dataclass
class CountBoundVerdict:
    ok: bool
    n_positive: int
    n_negative: int
    n_maxima: int
    n_minima: int


def check_nodal_count_bound(decomp: NodalDecomposition, g: BoundaryData) -> CountBoundVerdict:
    """Each nodal domain must own a boundary extremum of the matching sign.

    Passes when ``#positive <= #(relative maxima of g above tau)`` and
    ``#negative <= #(relative minima below -tau)``.  Constant data above
    ``tau`` counts as one maximum (below ``-tau``: one minimum).
    """
    gv = np.asarray(getattr(g, "values", g), dtype=float)
    tau = decomp.tau
    maxima, minima = plateau_extrema(gv)
    n_max = int((maxima > tau).sum())
    n_min = int((minima < -tau).sum())
    if np.all(gv == gv[0]):
        n_max = int(gv[0] > tau)
        n_min = int(gv[0] < -tau)
    npos, nneg = decomp.counts
    return CountBoundVerdict(npos <= n_max and nneg <= n_min, npos, nneg, n_max, n_min)


@dataclass
class VanishingSet:
    mask: np.ndarray
    radii: np.ndarray = field(repr=False)
    size: int = 0
    open: bool = True


def maximal_vanishing_set(domain: DiscreteDomain, u, tau: float) -> VanishingSet | None:
    """Union of maximal lattice disks on which ``|u| <= tau``.

    For each vanishing interior node ``x``, ``r_x`` is its distance to the
    nearest node that is non-vanishing or not interior, so the open disk
    ``B(x, r_x)`` holds only vanishing nodes.  Disks with ``r_x >= 2h`` are
    united and the largest 4-connected piece is returned; ``None`` when no
    node qualifies (the zero set is thin).
    """
    if tau < 0:
        raise ValueError("tau must be non-negative")
    vals = _values(domain, u)
    good = domain.interior & (np.abs(np.where(domain.active, vals, np.inf)) <= tau)
    if not good.any():
        return None
    r = ndimage.distance_transform_edt(good)
    seeds = good & (r >= 2.0)
    if not seeds.any():
        return None
    union = seeds.copy()
    sj, si = np.nonzero(seeds)
    sr = r[seeds]
    cj, ci = np.nonzero(good & ~seeds)
    for a in range(0, len(cj), 256):
        dj = cj[a : a + 256, None] - sj[None, :]
        di = ci[a : a + 256, None] - si[None, :]
        hit = (np.hypot(dj, di) < sr[None, :]).any(axis=1)
        union[cj[a : a + 256][hit], ci[a : a + 256][hit]] = True
    lab, n = ndimage.label(union, structure=CROSS)
    sizes = ndimage.sum_labels(union, lab, index=np.arange(1, n + 1))
    keep = lab == (int(np.argmax(sizes)) + 1)
    radii = np.where(keep, r * domain.h, np.nan)
    return VanishingSet(keep, radii, int(keep.sum()), True)


@dataclass
class UniqueContinuationVerdict:
    ok: bool
    vanishing_size: int
    max_abs: float
    tau: float
    h: float
    branch: str


def check_unique_continuation(domain: DiscreteDomain, u, g: BoundaryData | None, tau: float) -> UniqueContinuationVerdict:
    """A field vanishing on an open set must vanish everywhere.

    Passes when no open vanishing set exists, or when ``max|u| <= 10 tau`` on
    the interior.  A failure on a genuine solution cannot separate a true
    counterexample from a discretization artifact, so ``h`` and ``tau`` are
    carried in the verdict for refinement studies.
    """
    vals = _values(domain, u)
    umax = float(np.abs(vals[domain.interior]).max())
    D = maximal_vanishing_set(domain, vals, tau)
    if D is None:
        return UniqueContinuationVerdict(True, 0, umax, tau, domain.h, "no open vanishing set")
    if umax <= 10 * tau:
        return UniqueContinuationVerdict(True, D.size, umax, tau, domain.h, "vanishes identically")
    return UniqueContinuationVerdict(False, D.size, umax, tau, domain.h, "open vanishing set with non-vanishing field")


@dataclass
class ZeroConnectivity:
    radii: list[float]
    connected: list[bool]
    components: list[int]
    r_x: float


def check_local_zero_connectivity(domain: DiscreteDomain, u, x, radii, tau: float) -> ZeroConnectivity:
    """Is ``{z in B_r(x): |u(z)| <= tau}`` 8-connected for each radius?

    ``r_x`` is the largest radius of the leading run of connected verdicts
    (0 when the smallest radius already fails).
    """
    vals = _values(domain, u)
    radii = [float(r) for r in radii]
    verdicts, counts = [], []
    for r in radii:
        if not ball_in_domain(domain, x, r):
            raise ValueError(f"ball of radius {r} around {tuple(x)} is not contained in the domain")
        zs = ball_mask(domain, x, r) & (np.abs(vals) <= tau)
        _, n = ndimage.label(zs, structure=SQUARE)
        counts.append(int(n))
        verdicts.append(n <= 1)
    r_x = 0.0
    for r, ok in zip(radii, verdicts):
        if not ok:
            break
        r_x = r
    return ZeroConnectivity(radii, verdicts, counts, r_x)
