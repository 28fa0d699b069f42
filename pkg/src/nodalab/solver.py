"""Discrete Dirichlet solvers on triangulated lattices.

``solve_p_laplace`` minimizes the regularized p-Dirichlet energy with damped
Newton steps and continuation in the regularization; ``solve_quasilinear``
runs a frozen-coefficient (Picard) iteration for general operators.  Both
return a :class:`ScalarField` holding the boundary data bit-exactly.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import cg

from .geometry import BoundaryData, DiscreteDomain
from .operators import (
    OperatorSpec,
    _field_values,
    assemble_residual,
    default_samples,
    tri_gradients,
    validate_structural,
)

log = logging.getLogger(__name__)


@dataclass(eq=False)
class ScalarField:
    """Nodal values on a domain lattice; NaN on exterior nodes."""

    domain: DiscreteDomain
    values: np.ndarray
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.domain.shape:
            raise ValueError(f"values shape {self.values.shape} != domain shape {self.domain.shape}")

    @classmethod
    def from_function(cls, domain: DiscreteDomain, fn) -> "ScalarField":
        X, Y = domain.xy
        vals = np.broadcast_to(np.asarray(fn(X, Y), dtype=float), X.shape).copy()
        vals[~domain.active] = np.nan
        return cls(domain, vals)

    @property
    def interior_values(self) -> np.ndarray:
        return self.values[self.domain.interior]

    @property
    def boundary_values(self) -> np.ndarray:
        return self.values.ravel()[self.domain.boundary_cycle]

    def __neg__(self) -> "ScalarField":
        return ScalarField(self.domain, -self.values)

    def scaled(self, a: float, b: float = 0.0) -> "ScalarField":
        return ScalarField(self.domain, a * self.values + b)


@dataclass
class SolveOptions:
    """Solver knobs.

    ``eps_reg`` is the final gradient regularization; ``None`` picks
    ``1e-8 * max|g| / diam``.  ``continuation_steps`` is the number of
    tenfold reductions of the regularization before the floor is reached.
    ``damping`` relaxes the frozen-coefficient step; ``None`` picks ``2/p``,
    which balances the spectrum ``[min(1, p-1), max(1, p-1)]`` of the
    preconditioned Jacobian of power-type fluxes.
    """

    eps_reg: float | None = None
    tol: float = 1e-8
    max_iter: int = 500
    continuation_steps: int = 8
    damping: float | None = None
    armijo: float = 1e-4
    cg_rtol: float = 1e-10

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.eps_reg is not None and self.eps_reg < 0:
            raise ValueError("eps_reg must be non-negative")
        if self.damping is not None and not (0 < self.damping < 2):
            raise ValueError("damping must lie in (0, 2)")


class ConvergenceError(RuntimeError):
    """Raised when an iteration stops without meeting the residual contract.

    The last iterate and its diagnostics are attached for inspection.
    """

    def __init__(self, message: str, field: ScalarField | None = None, residual: float = np.nan, iterations: int = 0):
        super().__init__(message)
        self.field = field
        self.residual = residual
        self.iterations = iterations


def _boundary_field(domain: DiscreteDomain, g: BoundaryData | np.ndarray, fill: float = 0.0) -> np.ndarray:
    gv = np.asarray(getattr(g, "values", g), dtype=float)
    if gv.shape != domain.boundary_cycle.shape:
        raise ValueError("boundary data length does not match the boundary cycle")
    if not np.isfinite(gv).all():
        raise ValueError("boundary data must be finite")
    vals = np.full(domain.nx * domain.ny, np.nan)
    vals[domain.interior.ravel()] = fill
    vals[domain.boundary_cycle] = gv
    return vals


def p_energy(domain: DiscreteDomain, u, p: float, eps_reg: float = 0.0) -> float:
    """Discrete p-Dirichlet energy ``sum_T (area/p) (|grad u|^2 + eps^2)^(p/2)``."""
    if not p > 1:
        raise ValueError("p must exceed 1")
    vals = _field_values(domain, u)
    g = tri_gradients(domain, vals)
    s = (g * g).sum(axis=1) + eps_reg**2
    return float(domain.tri_area / p * (s ** (p / 2)).sum())


def _energy_and_gradient(domain, vals, p, eps):
    g = tri_gradients(domain, vals)
    s = (g * g).sum(axis=1) + eps * eps
    energy = domain.tri_area / p * (s ** (p / 2)).sum()
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(s > 0, s ** ((p - 2) / 2), 0.0)
    return energy, assemble_residual(domain, w[:, None] * g, None)


class _Assembler:
    """Sparse assembly restricted to the interior unknowns."""

    def __init__(self, domain: DiscreteDomain):
        self.domain = domain
        self.free = np.flatnonzero(domain.interior.ravel())
        pos = np.full(domain.nx * domain.ny, -1)
        pos[self.free] = np.arange(len(self.free))
        T = pos[domain.tri_nodes]
        rows = np.repeat(T, 3, axis=1)
        cols = np.tile(T, (1, 3))
        self.keep = (rows >= 0) & (cols >= 0)
        self.rows = rows[self.keep]
        self.cols = cols[self.keep]
        self.D = domain.tri_gradient_matrix()
        self.n = len(self.free)

    def matrix(self, M: np.ndarray) -> sp.csr_matrix:
        """Assemble ``sum_T area * D_T^T M_T D_T`` for per-triangle ``(2, 2)`` tensors."""
        local = self.domain.tri_area * np.einsum("tki,tkl,tlj->tij", self.D, M, self.D)
        data = local.reshape(len(local), 9)[self.keep]
        return sp.csr_matrix((data, (self.rows, self.cols)), shape=(self.n, self.n))


def _solve_spd(A: sp.csr_matrix, b: np.ndarray, rtol: float) -> tuple[np.ndarray, int]:
    diag = A.diagonal()
    if (diag <= 0).any():
        return np.zeros_like(b), -1
    M = sp.diags(1.0 / diag)
    x, info = cg(A, b, rtol=rtol, atol=0.0, maxiter=max(1000, 10 * A.shape[0]), M=M)
    return x, info


def harmonic_extension(domain: DiscreteDomain, g: BoundaryData, rtol: float = 1e-10) -> np.ndarray:
    """Discrete harmonic extension of ``g`` as a flat node array (NaN outside)."""
    vals = _boundary_field(domain, g)
    asm = _Assembler(domain)
    if asm.n == 0:
        return vals
    eye = np.broadcast_to(np.eye(2), (len(domain.tri_nodes), 2, 2))
    K = asm.matrix(eye)
    r = assemble_residual(domain, tri_gradients(domain, np.nan_to_num(vals)), None)[asm.free]
    delta, info = _solve_spd(K, -r, rtol)
    if info < 0:
        raise ConvergenceError("linear solve breakdown in harmonic extension")
    vals[asm.free] += delta
    # one refinement pass guards against the relative CG tolerance on large rhs
    r = assemble_residual(domain, tri_gradients(domain, np.nan_to_num(vals)), None)[asm.free]
    delta, _ = _solve_spd(K, -r, rtol)
    vals[asm.free] += delta
    return vals


def _p_hessian_tensors(g: np.ndarray, p: float, eps: float) -> np.ndarray:
    s = (g * g).sum(axis=1) + eps * eps
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(s > 0, s ** ((p - 2) / 2), 0.0)
        w2 = np.where(s > 0, (p - 2) * s ** ((p - 4) / 2), 0.0)
    return w[:, None, None] * np.eye(2) + w2[:, None, None] * np.einsum("ti,tj->tij", g, g)


def _p_residual_norm(domain, vals, p, free) -> float:
    _, r = _energy_and_gradient(domain, vals, p, 0.0)
    return float(np.abs(r[free]).max()) if len(free) else 0.0


def solve_p_laplace(domain: DiscreteDomain, g: BoundaryData, p: float, opts: SolveOptions | None = None) -> ScalarField:
    """Solve ``div(|grad u|^(p-2) grad u) = 0`` with ``u = g`` on the boundary nodes.

    Minimizes ``sum (area/p) (|grad u|^2 + eps^2)^(p/2)`` by Newton steps with
    Armijo backtracking, lowering ``eps`` tenfold per stage down to the floor.
    The returned field meets ``max |weak residual| <= tol * (1 + max|g|)`` for
    the unregularized operator; otherwise :class:`ConvergenceError` is raised.
    """
    if not p > 1:
        raise ValueError(f"p must exceed 1, got {p}")
    opts = opts or SolveOptions()
    gv = np.asarray(getattr(g, "values", g), dtype=float)
    gmax = float(np.abs(gv).max()) if gv.size else 0.0
    target = opts.tol * (1.0 + gmax)
    diam = domain.diameter()
    floor = opts.eps_reg if opts.eps_reg is not None else 1e-8 * gmax / diam
    asm = _Assembler(domain)
    free = asm.free

    vals = harmonic_extension(domain, g, opts.cg_rtol)
    work = np.nan_to_num(vals)

    if p == 2 or floor == 0:
        stages = [floor]
    else:
        stages = [floor * 10.0**k for k in range(opts.continuation_steps, 0, -1)] + [floor]

    iters = 0
    fallbacks = 0
    energy = np.nan
    for n_stage, eps in enumerate(stages):
        final = n_stage == len(stages) - 1
        stage_tol = target if final else max(target, 1e-5 * (1.0 + gmax))
        while True:
            energy, r = _energy_and_gradient(domain, work, p, eps)
            rf = r[free]
            rnorm = float(np.abs(rf).max()) if len(rf) else 0.0
            if rnorm <= stage_tol:
                if not final or _p_residual_norm(domain, work, p, free) <= target:
                    break
            if iters >= opts.max_iter:
                res = _p_residual_norm(domain, work, p, free)
                raise ConvergenceError(
                    f"p-Laplace Newton did not converge in {iters} iterations (residual {res:.3e})",
                    _make_field(domain, work, {"iterations": iters, "residual": res}),
                    res,
                    iters,
                )
            iters += 1
            H = asm.matrix(_p_hessian_tensors(tri_gradients(domain, work), p, eps))
            d, info = _solve_spd(H, -rf, opts.cg_rtol)
            slope = float(rf @ d)
            if info < 0 or not np.isfinite(slope) or slope >= 0:
                # not positive definite in practice: preconditioned steepest descent
                diag = np.abs(H.diagonal())
                d = -rf / np.where(diag > 0, diag, 1.0)
                slope = float(rf @ d)
                fallbacks += 1
            alpha = 1.0
            while True:
                trial = work.copy()
                trial[free] += alpha * d
                e_new, r_new = _energy_and_gradient(domain, trial, p, eps)
                if e_new <= energy + opts.armijo * alpha * slope:
                    break
                # energy differences below roundoff: accept on residual decrease
                if abs(e_new - energy) <= 1e-13 * max(abs(energy), 1e-300) and np.abs(r_new[free]).max() < rnorm:
                    break
                alpha *= 0.5
                if alpha < 1e-12:
                    res = _p_residual_norm(domain, work, p, free)
                    raise ConvergenceError(
                        f"line search failed at iteration {iters} (residual {res:.3e})",
                        _make_field(domain, work, {"iterations": iters, "residual": res}),
                        res,
                        iters,
                    )
            work = trial
        log.debug("stage eps=%.3e done after %d iterations", eps, iters)

    res = _p_residual_norm(domain, work, p, free)
    info = {
        "method": "newton",
        "iterations": iters,
        "residual": res,
        "energy": p_energy(domain, work.reshape(domain.shape), p, 0.0),
        "eps_floor": floor,
        "stages": len(stages),
        "fallback_steps": fallbacks,
    }
    return _make_field(domain, work, info)


def _make_field(domain: DiscreteDomain, work: np.ndarray, info: dict) -> ScalarField:
    vals = work.reshape(domain.shape).copy()
    vals[~domain.active] = np.nan
    return ScalarField(domain, vals, info)


def _secant_weights(spec: OperatorSpec, xc: np.ndarray, g: np.ndarray, eps: float) -> np.ndarray:
    n = np.linalg.norm(g, axis=1)
    small = n < eps
    direction = np.where(n[:, None] > 0, g / np.where(n > 0, n, 1.0)[:, None], np.array([1.0, 0.0]))
    probe = np.where(small[:, None], eps * direction, g)
    pn = np.linalg.norm(probe, axis=1)
    A = np.asarray(spec.flux(xc, probe), dtype=float)
    return np.linalg.norm(A, axis=1) / pn


def _spec_residual(spec: OperatorSpec, domain: DiscreteDomain, work: np.ndarray, xc: np.ndarray):
    g = tri_gradients(domain, work)
    A = np.asarray(spec.flux(xc, g), dtype=float)
    B = None if spec.source_free else np.asarray(spec.source(xc, g), dtype=float)
    return g, assemble_residual(domain, A, B)


def solve_quasilinear(
    spec: OperatorSpec, domain: DiscreteDomain, g: BoundaryData, opts: SolveOptions | None = None
) -> ScalarField:
    """Frozen-coefficient iteration for ``div A(x, grad u) = B(x, grad u)``.

    Each step freezes the scalar coefficient ``a = |A(x, grad u_k)| / |grad u_k|``
    (gradients shorter than ``eps_reg`` are probed at length ``eps_reg``),
    solves ``K(a) delta = -R(u_k)`` for the weak residual ``R`` and updates
    ``u_{k+1} = u_k + damping * delta``.  With ``damping = 1`` and fluxes of
    the form ``a(x, g) g`` this is exactly the Picard iteration
    ``K(a_k) u_{k+1} = -B(u_k)``.
    """
    opts = opts or SolveOptions()
    report = validate_structural(spec, default_samples(domain))
    if not report.ok:
        raise ValueError(f"operator violates its structural bounds: {report.violations[:3]}")
    gv = np.asarray(getattr(g, "values", g), dtype=float)
    gmax = float(np.abs(gv).max()) if gv.size else 0.0
    target = opts.tol * (1.0 + gmax)
    diam = domain.diameter()
    eps = opts.eps_reg if opts.eps_reg else max(1e-8 * gmax / diam, 1e-300)
    asm = _Assembler(domain)
    free = asm.free
    xc = domain.tri_centroids()
    omega = opts.damping if opts.damping is not None else 2.0 / spec.p

    work = np.nan_to_num(harmonic_extension(domain, g, opts.cg_rtol))
    eye = np.eye(2)
    iters = 0
    history = []
    while True:
        grads, r = _spec_residual(spec, domain, work, xc)
        rnorm = float(np.abs(r[free]).max()) if len(free) else 0.0
        history.append(rnorm)
        if rnorm <= target:
            break
        if iters >= opts.max_iter or not np.isfinite(rnorm):
            raise ConvergenceError(
                f"Picard iteration did not converge in {iters} iterations (residual {rnorm:.3e})",
                _make_field(domain, work, {"iterations": iters, "residual": rnorm}),
                rnorm,
                iters,
            )
        iters += 1
        a = _secant_weights(spec, xc, grads, eps)
        K = asm.matrix(a[:, None, None] * eye)
        delta, info = _solve_spd(K, -r[free], opts.cg_rtol)
        if info < 0 or not np.isfinite(delta).all():
            raise ConvergenceError(
                f"linear solve breakdown at Picard iteration {iters} (residual {rnorm:.3e})",
                _make_field(domain, work, {"iterations": iters, "residual": rnorm}),
                rnorm,
                iters,
            )
        work[free] += omega * delta

    info = {"method": "picard", "iterations": iters, "residual": history[-1], "eps_reg": eps, "damping": omega}
    if spec.source_free and getattr(spec, "name", "").startswith("p-laplace"):
        info["energy"] = p_energy(domain, work.reshape(domain.shape), spec.p, 0.0)
    return _make_field(domain, work, info)
