"""Quasilinear operators ``div A(x, grad u) = B(x, grad u)`` and their weak residual.

Flux and source maps are vectorized: ``flux(x, g)`` takes positions and
gradients of shape ``(n, 2)`` and returns ``(n, 2)``; ``source(x, g)`` returns
``(n,)``.  The structural constants are declared, never inferred; use
:func:`validate_structural` to check them on samples.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .geometry import DiscreteDomain

FluxMap = Callable[[np.ndarray, np.ndarray], np.ndarray]
SourceMap = Callable[[np.ndarray, np.ndarray], np.ndarray]

STRUCTURAL = "structural"
STRUCTURAL2 = "structural2"

# roundoff allowance when comparing a map against its bound
_REL_SLACK = 1e-12


def _zero_source(x, g):
    return np.zeros(np.shape(g)[:-1])


@dataclass(frozen=True)
class OperatorSpec:
    p: float
    a0: float
    a1: float
    b1: float
    flux: FluxMap
    source: SourceMap = _zero_source
    b0: float = 0.0
    kind: str = STRUCTURAL
    name: str = "custom"
    source_free: bool = False

    def __post_init__(self):
        if not (1 < self.p < np.inf):
            raise ValueError(f"exponent p must satisfy 1 < p < inf, got {self.p}")
        if not (0 < self.a0 <= self.a1):
            raise ValueError("need 0 < a0 <= a1")
        if not self.b1 > 0:
            raise ValueError("need b1 > 0")
        if self.kind not in (STRUCTURAL, STRUCTURAL2):
            raise ValueError(f"unknown structure kind {self.kind!r}")
        if self.kind == STRUCTURAL and self.b0 != 0:
            raise ValueError("b0 must be 0 under the first structure")
        if self.b0 < 0:
            raise ValueError("need b0 >= 0")


def _p_flux(p: float, c: float = 1.0) -> FluxMap:
    def flux(x, g):
        g = np.asarray(g, dtype=float)
        n = np.linalg.norm(g, axis=-1, keepdims=True)
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.where(n > 0, n ** (p - 2), 0.0)
        return c * w * g

    return flux


def p_laplace_spec(p: float) -> OperatorSpec:
    """The p-Laplace operator, flux ``|g|^(p-2) g`` and no source."""
    if not p > 1:
        raise ValueError(f"p-Laplace needs p > 1, got {p}")
    return OperatorSpec(p=p, a0=1.0, a1=1.0, b1=1.0, flux=_p_flux(p), name="p-laplace", source_free=True)


def scaled_p_laplace_spec(p: float, c: float) -> OperatorSpec:
    if not c > 0:
        raise ValueError("scale must be positive")
    return OperatorSpec(p=p, a0=c, a1=c, b1=1.0, flux=_p_flux(p, c), name=f"scaled-p-laplace({c:g})", source_free=True)


def p_laplace_with_source_spec(p: float, b1: float, sign: float = 1.0) -> OperatorSpec:
    """p-Laplace flux with source ``sign * b1 * |g|^(p-1)``."""
    if not b1 > 0:
        raise ValueError("source coefficient must be positive")
    s = float(np.sign(sign)) or 1.0

    def source(x, g):
        return s * b1 * np.linalg.norm(np.asarray(g, dtype=float), axis=-1) ** (p - 1)

    return OperatorSpec(p=p, a0=1.0, a1=1.0, b1=b1, flux=_p_flux(p), source=source, name=f"p-laplace-with-source({s * b1:g})")


_CATALOG_RE = re.compile(r"^\s*([a-z\-]+)\s*(?:\(\s*([^)]*)\s*\))?\s*$")


def operator_from_name(name: str, p: float, sign: float = 1.0) -> OperatorSpec:
    """Build a catalog operator from ``"p-laplace"``, ``"scaled-p-laplace(c)"`` or
    ``"p-laplace-with-source(b1)"``."""
    m = _CATALOG_RE.match(name)
    if not m:
        raise ValueError(f"unrecognized operator {name!r}")
    base, arg = m.group(1), m.group(2)
    if base == "p-laplace" and not arg:
        return p_laplace_spec(p)
    try:
        val = float(arg) if arg else None
    except ValueError:
        raise ValueError(f"bad operator argument in {name!r}") from None
    if base == "scaled-p-laplace" and val is not None:
        return scaled_p_laplace_spec(p, val)
    if base == "p-laplace-with-source" and val is not None:
        return p_laplace_with_source_spec(p, abs(val), sign=sign * (np.sign(val) or 1.0))
    raise ValueError(f"unrecognized operator {name!r}")


@dataclass
class StructuralReport:
    n_samples: int
    violations: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_structural(spec: OperatorSpec, samples) -> StructuralReport:
    """Check the three structural bounds at each ``(position, gradient)`` sample.

    Returns a report listing every violated bound with its margin
    (``bound - value``, negative when violated).
    """
    samples = list(samples)
    if not samples:
        raise ValueError("need at least one sample")
    x = np.array([s[0] for s in samples], dtype=float).reshape(-1, 2)
    g = np.array([s[1] for s in samples], dtype=float).reshape(-1, 2)
    A = np.asarray(spec.flux(x, g), dtype=float).reshape(-1, 2)
    B = np.asarray(spec.source(x, g), dtype=float).reshape(-1)
    n = np.linalg.norm(g, axis=1)
    p = spec.p

    checks = {
        "coercivity": ((A * g).sum(axis=1), spec.a0 * n**p, +1),
        "flux_bound": (np.linalg.norm(A, axis=1), spec.a1 * n ** (p - 1), -1),
    }
    if spec.kind == STRUCTURAL:
        checks["source_bound"] = (np.abs(B), spec.b1 * n ** (p - 1), -1)
    else:
        checks["source_bound"] = (np.abs(B), spec.b0 * n**p + spec.b1 * n ** (p - 1), -1)

    report = StructuralReport(n_samples=len(samples))
    for name, (value, bound, sense) in checks.items():
        # sense +1: value >= bound; sense -1: value <= bound
        margin = sense * (value - bound)
        slack = _REL_SLACK * np.maximum(np.abs(value), np.abs(bound))
        bad = ~(margin >= -slack)
        for k in np.nonzero(bad)[0]:
            report.violations.append(
                {"sample": int(k), "condition": name, "value": float(value[k]), "bound": float(bound[k]), "margin": float(margin[k])}
            )
    return report


def default_samples(domain: DiscreteDomain | None = None, n: int = 256, seed: int = 0):
    """Deterministic ``(position, gradient)`` samples spanning many gradient scales."""
    rng = np.random.default_rng(seed)
    if domain is not None:
        X, Y = domain.xy
        act = domain.active
        pts = np.column_stack([X[act], Y[act]])
        pos = pts[rng.integers(0, len(pts), n)]
    else:
        pos = rng.uniform(-1, 1, (n, 2))
    mag = 10.0 ** rng.uniform(-6, 6, n)
    ang = rng.uniform(0, 2 * np.pi, n)
    grads = np.column_stack([mag * np.cos(ang), mag * np.sin(ang)])
    grads[0] = 0.0
    return list(zip(pos, grads))


def tri_gradients(domain: DiscreteDomain, values: np.ndarray) -> np.ndarray:
    """Piecewise-constant gradient on each active triangle, shape ``(nt, 2)``."""
    v = np.asarray(values, dtype=float).ravel()[domain.tri_nodes]
    D = domain.tri_gradient_matrix()
    return np.einsum("tkv,tv->tk", D, v)


def assemble_residual(domain: DiscreteDomain, flux_t: np.ndarray, source_t: np.ndarray | None) -> np.ndarray:
    """Scatter per-triangle flux (and centroid source) into nodal residuals.

    Returns a flat array over all lattice nodes; only interior entries are
    meaningful.
    """
    D = domain.tri_gradient_matrix()
    area = domain.tri_area
    local = area * np.einsum("tk,tkv->tv", flux_t, D)
    if source_t is not None:
        local = local + (area / 3.0) * source_t[:, None]
    r = np.zeros(domain.nx * domain.ny)
    np.add.at(r, domain.tri_nodes, local)
    return r


def weak_residual(spec: OperatorSpec, domain: DiscreteDomain, u) -> "ScalarField":
    """Discrete weak residual of ``div A = B`` against the nodal hat functions.

    Entry ``i`` is ``sum_T area_T * (A(x_T, grad u_T) . grad phi_i + B(x_T, grad u_T) / 3)``
    over the active triangles containing node ``i``, with ``x_T`` the triangle
    centroid.  Non-interior entries are NaN.
    """
    from .solver import ScalarField

    vals = _field_values(domain, u)
    g = tri_gradients(domain, vals)
    xc = domain.tri_centroids()
    A = np.asarray(spec.flux(xc, g), dtype=float)
    B = None if spec.source_free else np.asarray(spec.source(xc, g), dtype=float)
    r = assemble_residual(domain, A, B).reshape(domain.shape)
    r[~domain.interior] = np.nan
    return ScalarField(domain, r)


def _field_values(domain: DiscreteDomain, u) -> np.ndarray:
    vals = getattr(u, "values", u)
    vals = np.asarray(vals, dtype=float)
    if getattr(u, "domain", domain) is not domain and vals.shape != domain.shape:
        raise ValueError("field belongs to a different domain")
    if vals.shape != domain.shape:
        raise ValueError(f"field shape {vals.shape} does not match domain shape {domain.shape}")
    if not np.isfinite(vals[domain.active]).all():
        raise ValueError("field must be finite on interior and boundary nodes")
    return np.where(domain.active, vals, 0.0)
