"""Harnack-ratio measurement and strong maximum principle checks on lattice fields."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import ndimage

from .geometry import DiscreteDomain

# closed-ball membership tolerance, relative to the radius
_BALL_TOL = 1e-9


@dataclass
class HarnackReport:
    center: tuple[float, float]
    r: float
    sup: float = np.nan
    inf: float = np.nan
    ratio: float = np.nan
    unbounded: bool = False
    admissible: bool = False

    def as_row(self) -> dict:
        d = asdict(self)
        d["center_x"], d["center_y"] = d.pop("center")
        return d


@dataclass
class HarnackSweep:
    reports: list[HarnackReport]
    constant: float
    radii: list[float] = field(default_factory=list)

    def ratios(self) -> np.ndarray:
        return np.array([rep.ratio for rep in self.reports])


def _values(domain: DiscreteDomain, u) -> np.ndarray:
    vals = np.asarray(getattr(u, "values", u), dtype=float)
    if vals.shape != domain.shape:
        raise ValueError(f"field shape {vals.shape} does not match domain {domain.shape}")
    return vals


def disk_footprint(radius_nodes: float) -> np.ndarray:
    """Boolean footprint of the closed lattice disk of the given radius (in units of h)."""
    m = int(np.floor(radius_nodes * (1 + _BALL_TOL)))
    o = np.arange(-m, m + 1)
    return np.hypot(*np.meshgrid(o, o)) <= radius_nodes * (1 + _BALL_TOL)


def ball_mask(domain: DiscreteDomain, center, r: float) -> np.ndarray:
    """Nodes at distance ``<= r`` from ``center`` (closed ball)."""
    X, Y = domain.xy
    return np.hypot(X - center[0], Y - center[1]) <= r * (1 + _BALL_TOL)


def ball_in_domain(domain: DiscreteDomain, center, r: float) -> bool:
    """True when the closed ball fits the lattice and all its nodes are interior."""
    cx, cy = center
    X, Y = domain.xy
    inside_box = (
        cx - r >= X[0, 0] and cx + r <= X[0, -1] and cy - r >= Y[0, 0] and cy + r <= Y[-1, 0]
    )
    return bool(inside_box and domain.interior[ball_mask(domain, center, r)].all())


def _ratio(sup: float, inf: float, eta: float) -> tuple[float, bool]:
    if inf <= eta * sup:
        return np.inf, True
    return sup / inf, False


def harnack_ratio(
    domain: DiscreteDomain,
    u,
    center: tuple[float, float],
    r: float,
    tol_neg: float = 0.0,
    eta: float = 1e-12,
) -> HarnackReport:
    """``sup / inf`` of ``u`` over the lattice ball ``B_r(center)``.

    The ball ``B_3r`` must lie in the interior (otherwise the report comes back
    with ``admissible=False`` and no ratio) and ``u`` must be non-negative
    there up to ``tol_neg``.  An infimum below ``eta * sup`` is flagged as
    unbounded instead of producing a huge ratio.
    """
    vals = _values(domain, u)
    rep = HarnackReport(center=(float(center[0]), float(center[1])), r=float(r))
    if not ball_in_domain(domain, center, 3 * r):
        return rep
    big = vals[ball_mask(domain, center, 3 * r)]
    if big.min() < -tol_neg:
        raise ValueError(f"u is negative ({big.min():.3e}) on B_3r; Harnack needs u >= 0")
    small = vals[ball_mask(domain, center, r)]
    rep.sup, rep.inf = float(small.max()), float(small.min())
    rep.ratio, rep.unbounded = _ratio(rep.sup, rep.inf, eta)
    rep.admissible = True
    return rep


def harnack_sweep(
    domain: DiscreteDomain,
    u,
    radii,
    tol_neg: float = 0.0,
    eta: float = 1e-12,
) -> HarnackSweep:
    """Harnack ratios for every lattice center and radius with ``B_3r`` inside.

    Inadmissible balls are skipped.  ``constant`` is the largest finite ratio,
    an empirical Harnack constant for this field.
    """
    vals = _values(domain, u)
    h = domain.h
    X, Y = domain.xy
    # distance (in h) from each node to the nearest non-interior node
    clearance = ndimage.distance_transform_edt(domain.interior)
    filled = np.where(domain.active, vals, 0.0)
    reports: list[HarnackReport] = []
    for r in radii:
        rho = r / h
        ok = domain.interior & (clearance > 3 * rho * (1 + _BALL_TOL))
        if not ok.any():
            continue
        big = disk_footprint(3 * rho)
        low3 = ndimage.minimum_filter(filled, footprint=big, mode="constant", cval=0.0)
        if (low3[ok] < -tol_neg).any():
            raise ValueError("u is negative on an admissible B_3r; Harnack needs u >= 0")
        fp = disk_footprint(rho)
        hi = ndimage.maximum_filter(filled, footprint=fp, mode="constant", cval=0.0)
        lo = ndimage.minimum_filter(filled, footprint=fp, mode="constant", cval=0.0)
        for j, i in zip(*np.nonzero(ok)):
            ratio, unb = _ratio(hi[j, i], lo[j, i], eta)
            reports.append(
                HarnackReport(
                    center=(float(X[j, i]), float(Y[j, i])),
                    r=float(r),
                    sup=float(hi[j, i]),
                    inf=float(lo[j, i]),
                    ratio=float(ratio),
                    unbounded=unb,
                    admissible=True,
                )
            )
    finite = [rep.ratio for rep in reports if np.isfinite(rep.ratio)]
    return HarnackSweep(reports, float(max(finite)) if finite else np.nan, [float(r) for r in radii])


@dataclass
class MaxPrincipleVerdict:
    status: str  # "pass", "fail" or "constant"
    max_margin: float = np.nan
    min_margin: float = np.nan
    strict: bool = False
    witness: tuple[float, float] | None = None
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status in ("pass", "constant")


def check_strong_maximum_principle(domain: DiscreteDomain, u, margin_tol: float = 1e-9) -> MaxPrincipleVerdict:
    """Interior extrema must not exceed boundary extrema, for ``u`` and ``-u``.

    Margins are ``max_boundary - max_interior`` and ``min_interior -
    min_boundary``; both must be non-negative.  A field whose oscillation is
    below ``margin_tol`` times its magnitude is reported as constant.
    """
    vals = _values(domain, u)
    act = vals[domain.active]
    scale = float(np.abs(act).max()) or 1.0
    if np.ptp(act) <= margin_tol * scale:
        return MaxPrincipleVerdict("constant", 0.0, 0.0, False, None, "field is constant")
    inner = np.where(domain.interior, vals, np.nan)
    bnd = vals.ravel()[domain.boundary_cycle]
    max_margin = float(bnd.max() - np.nanmax(inner))
    min_margin = float(np.nanmin(inner) - bnd.min())
    X, Y = domain.xy
    witness = None
    detail = ""
    if max_margin < 0:
        j, i = np.unravel_index(np.nanargmax(inner), inner.shape)
        witness = (float(X[j, i]), float(Y[j, i]))
        detail = "interior maximum exceeds boundary maximum"
    elif min_margin < 0:
        j, i = np.unravel_index(np.nanargmin(inner), inner.shape)
        witness = (float(X[j, i]), float(Y[j, i]))
        detail = "interior minimum below boundary minimum"
    status = "pass" if witness is None else "fail"
    return MaxPrincipleVerdict(status, max_margin, min_margin, bool(max_margin > 0 and min_margin > 0), witness, detail)
