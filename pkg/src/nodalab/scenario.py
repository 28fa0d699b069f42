"""Config-driven scenarios: build a domain, solve, run the verification checks.

A scenario is a YAML mapping::

    name: disk-p2-sin2
    domain: {kind: disk, radius: 1.0}        # or polygon / annulus
    h: 0.03125
    operator: {name: p-laplace, p: 2}        # catalog name, see operators
    boundary: "sin(2*theta)"                 # g on the boundary nodes
    tau: {relative: 1.0e-3, sweep: [1.0e-2, 1.0e-3, 1.0e-4], unique_continuation: 1.0e-6}
    checks: [harnack, max-principle, nodal-count, boundary-contact,
             simply-connected, unique-continuation, zero-connectivity]
    solver: {tol: 1.0e-8, max_iter: 500}

``field:`` replaces the solve by an explicit expression in ``x, y`` (a mock
field used to validate the detectors).  Boundary expressions may use
``theta`` and ``r`` (polar coordinates about the domain center), ``x``, ``y``
and, for polygons, the normalized arclength ``s``.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from dataclasses import field as dc_field
from pathlib import Path

import numpy as np
import yaml

from . import __version__, expr
from .analysis import check_strong_maximum_principle, harnack_sweep
from .export import write_field_csv, write_grid, write_rows_csv, write_sweep_csv
from .geometry import (
    BoundaryData,
    DomainError,
    boundary_angle,
    boundary_arclength,
    build_annulus_domain,
    build_disk_domain,
    build_polygon_domain,
    count_relative_extrema,
)
from .nodal import (
    check_local_zero_connectivity,
    check_nodal_count_bound,
    check_unique_continuation,
    extract_nodal_decomposition,
    nodal_lines_touch_boundary,
)
from .operators import operator_from_name, tri_gradients
from .solver import ConvergenceError, ScalarField, SolveOptions, solve_p_laplace, solve_quasilinear

CHECKS = (
    "harnack",
    "max-principle",
    "nodal-count",
    "boundary-contact",
    "simply-connected",
    "unique-continuation",
    "zero-connectivity",
)
OUT_ENV = "NODALAB_OUT"
DEFAULT_OUT = "nodalab-out"

_TOP_KEYS = {"name", "domain", "h", "operator", "boundary", "field", "tau", "checks", "solver", "harnack"}


class ConfigError(ValueError):
    pass


@dataclass
class Scenario:
    name: str
    domain: dict
    h: float
    operator: dict = dc_field(default_factory=lambda: {"name": "p-laplace", "p": 2.0})
    boundary: str | None = None
    mock_field: str | None = None
    tau_rel: float = 1e-3
    tau_sweep: list[float] = dc_field(default_factory=lambda: [1e-2, 1e-3, 1e-4])
    uc_tau_rel: float = 1e-6
    checks: list[str] = dc_field(default_factory=lambda: list(CHECKS))
    solver: dict = dc_field(default_factory=dict)
    harnack_radii: list[float] | None = None

    def canonical(self) -> dict:
        return asdict(self)

    def config_hash(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()


def _need(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def _number(v, where: str, positive: bool = False) -> float:
    _need(isinstance(v, (int, float)) and not isinstance(v, bool), f"{where}: expected a number, got {v!r}")
    v = float(v)
    _need(math.isfinite(v), f"{where}: must be finite")
    if positive:
        _need(v > 0, f"{where}: must be positive")
    return v


def parse_config(text: str, h: float | None = None, tau: float | None = None) -> Scenario:
    """Parse and validate scenario YAML; ``h`` and ``tau`` override the file."""
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"YAML syntax error{where}: {getattr(exc, 'problem', exc)}") from None
    _need(isinstance(raw, dict), "config must be a mapping")
    unknown = set(raw) - _TOP_KEYS
    _need(not unknown, f"unknown config keys: {sorted(unknown)}")
    _need("name" in raw and isinstance(raw["name"], str) and raw["name"], "name: required non-empty string")
    name = raw["name"]
    _need(all(c.isalnum() or c in "-_." for c in name), f"name: {name!r} may only use letters, digits, '-', '_', '.'")

    dom = raw.get("domain")
    _need(isinstance(dom, dict) and "kind" in dom, "domain: mapping with 'kind' required")
    kind = dom["kind"]
    if kind == "disk":
        _number(dom.get("radius"), "domain.radius", positive=True)
    elif kind == "polygon":
        verts = dom.get("vertices")
        _need(isinstance(verts, list) and len(verts) >= 3, "domain.vertices: list of at least 3 [x, y] pairs")
        for k, v in enumerate(verts):
            _need(isinstance(v, list) and len(v) == 2, f"domain.vertices[{k}]: expected [x, y]")
            _number(v[0], f"domain.vertices[{k}][0]")
            _number(v[1], f"domain.vertices[{k}][1]")
    elif kind == "annulus":
        _number(dom.get("r_inner"), "domain.r_inner", positive=True)
        _number(dom.get("r_outer"), "domain.r_outer", positive=True)
    else:
        raise ConfigError(f"domain.kind: expected disk, polygon or annulus, got {kind!r}")

    hh = _number(h if h is not None else raw.get("h"), "h", positive=True)

    op = raw.get("operator", {"name": "p-laplace", "p": 2.0})
    _need(isinstance(op, dict) and isinstance(op.get("name"), str), "operator: mapping with 'name' required")
    p = _number(op.get("p", 2.0), "operator.p")
    _need(p > 1, "operator.p: must exceed 1")
    sign = _number(op.get("source_sign", 1), "operator.source_sign")
    try:
        operator_from_name(op["name"], p, sign)
    except ValueError as exc:
        raise ConfigError(f"operator.name: {exc}") from None
    op = {"name": op["name"], "p": p, "source_sign": sign}

    bnd, fld = raw.get("boundary"), raw.get("field")
    _need((bnd is None) != (fld is None), "exactly one of 'boundary' or 'field' is required")
    for key, text_ in (("boundary", bnd), ("field", fld)):
        if text_ is None:
            continue
        try:
            used = expr.variables_used(str(text_))
        except expr.ExpressionError as exc:
            raise ConfigError(f"{key}: {exc}") from None
        if "s" in used:
            _need(kind == "polygon" and key == "boundary", f"{key}: arclength 's' is only defined on polygon boundaries")
        if key == "field":
            _need(used <= {"x", "y", "r", "theta"}, "field: may only use x, y, r, theta")

    t = raw.get("tau", {}) or {}
    _need(isinstance(t, dict), "tau: expected a mapping")
    tau_rel = _number(tau if tau is not None else t.get("relative", 1e-3), "tau.relative", positive=True)
    sweep = t.get("sweep", [1e-2, 1e-3, 1e-4])
    _need(isinstance(sweep, list) and len(sweep) >= 2, "tau.sweep: list of at least two levels")
    sweep = [_number(v, "tau.sweep[]", positive=True) for v in sweep]
    uc = _number(t.get("unique_continuation", 1e-6), "tau.unique_continuation", positive=True)

    checks = raw.get("checks", list(CHECKS))
    _need(isinstance(checks, list), "checks: expected a list")
    bad = [c for c in checks if c not in CHECKS]
    _need(not bad, f"checks: unknown check(s) {bad}; known: {list(CHECKS)}")
    _need(len(set(checks)) == len(checks), "checks: duplicates")

    solver = raw.get("solver", {}) or {}
    _need(isinstance(solver, dict), "solver: expected a mapping")
    allowed = {"eps_reg", "tol", "max_iter", "continuation_steps", "damping"}
    _need(set(solver) <= allowed, f"solver: unknown keys {sorted(set(solver) - allowed)}")
    try:
        SolveOptions(**solver)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"solver: {exc}") from None

    radii = (raw.get("harnack") or {}).get("radii")
    if radii is not None:
        _need(isinstance(radii, list) and radii, "harnack.radii: non-empty list")
        radii = [_number(r, "harnack.radii[]", positive=True) for r in radii]

    return Scenario(
        name=name,
        domain=dict(dom),
        h=hh,
        operator=op,
        boundary=None if bnd is None else str(bnd),
        mock_field=None if fld is None else str(fld),
        tau_rel=tau_rel,
        tau_sweep=sweep,
        uc_tau_rel=uc,
        checks=list(checks),
        solver=dict(solver),
        harnack_radii=radii,
    )


def build_domain(sc: Scenario):
    d = sc.domain
    try:
        if d["kind"] == "disk":
            return build_disk_domain(float(d["radius"]), sc.h, tuple(d.get("center", (0.0, 0.0))))
        if d["kind"] == "polygon":
            return build_polygon_domain(d["vertices"], sc.h)
        return build_annulus_domain(float(d["r_inner"]), float(d["r_outer"]), sc.h)
    except DomainError as exc:
        raise ConfigError(f"domain: {exc}") from None


def _env(domain, x, y, arclength=None):
    cx, cy = domain.center
    env = {"x": x, "y": y, "theta": np.arctan2(y - cy, x - cx), "r": np.hypot(x - cx, y - cy)}
    if arclength is not None:
        env["s"] = arclength
    return env


def boundary_data(sc: Scenario, domain) -> BoundaryData:
    bx, by = domain.boundary_xy()
    if sc.mock_field is not None:
        vals = expr.evaluate(sc.mock_field, **_env(domain, bx, by))
    else:
        s = boundary_arclength(domain) if domain.shape_kind == "polygon" else None
        env = _env(domain, bx, by, s)
        env["theta"] = boundary_angle(domain)
        vals = expr.evaluate(sc.boundary, **env)
    vals = np.broadcast_to(np.asarray(vals, dtype=float), bx.shape).copy()
    if not np.isfinite(vals).all():
        raise ConfigError("boundary data is not finite at every boundary node")
    return BoundaryData(vals)


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else str(f)
    return obj


def _verdict(ok: bool, **details) -> dict:
    return {"verdict": "pass" if ok else "fail", **details}


def _skip(reason: str) -> dict:
    return {"verdict": "skip", "reason": reason}


def _nodal_levels(sc, domain, u, g, umax):
    levels = []
    for rel in sc.tau_sweep:
        dec = extract_nodal_decomposition(domain, u, rel * umax)
        lines = nodal_lines_touch_boundary(dec, domain)
        bound = check_nodal_count_bound(dec, g)
        sig = {
            "tau_rel": rel,
            "n_positive": dec.counts[0],
            "n_negative": dec.counts[1],
            "count_bound": bound.ok,
            "n_maxima": bound.n_maxima,
            "n_minima": bound.n_minima,
            "lines_touch": all(v.ok for v in lines),
            "contact": all(c.boundary_contact for c in dec.components),
            "simply_connected": all(c.simply_connected for c in dec.components),
        }
        witness = next((v.witness for v in lines if not v.ok), None)
        levels.append((sig, dec, witness))
    return levels


def _stable_pair(levels):
    keys = ("n_positive", "n_negative", "count_bound", "lines_touch", "contact", "simply_connected")
    for a, b in zip(levels, levels[1:]):
        if all(a[0][k] == b[0][k] for k in keys):
            return a
    return None


def _zero_points(domain, vals, radius, limit=16):
    """Interior nodes next to a sign change whose ball of ``radius`` fits the interior."""
    from scipy import ndimage

    inner = domain.interior
    v = np.where(domain.active, vals, 0.0)
    cand = np.zeros(domain.shape, dtype=bool)
    for axis in (0, 1):
        a = v
        b = np.roll(v, -1, axis=axis)
        both = inner & np.roll(inner, -1, axis=axis)
        change = both & (np.sign(a) * np.sign(b) <= 0) & ((a != 0) | (b != 0))
        pick_a = np.abs(a) <= np.abs(b)
        cand |= change & pick_a
        cand |= np.roll(change & ~pick_a, 1, axis=axis)
    clear = ndimage.distance_transform_edt(inner) * domain.h > radius * (1 + 1e-9)
    idx = np.argwhere(cand & clear)
    if len(idx) > limit:
        idx = idx[np.linspace(0, len(idx) - 1, limit).round().astype(int)]
    return idx


def _run_checks(sc: Scenario, domain, u: ScalarField, g: BoundaryData, is_solution: bool) -> tuple[dict, dict]:
    vals = u.values
    umax = float(np.abs(vals[domain.active]).max())
    checks: dict[str, dict] = {}
    metrics: dict = {"max_abs_u": umax}
    nmax, nmin = count_relative_extrema(g)
    metrics["g_maxima"], metrics["g_minima"] = nmax, nmin

    nodal_needed = {"nodal-count", "boundary-contact", "simply-connected"} & set(sc.checks)
    if nodal_needed:
        levels = _nodal_levels(sc, domain, u, g, umax)
        stable = _stable_pair(levels)
        sweep_info = [lv[0] for lv in levels]
        if stable is None:
            for name in sorted(nodal_needed):
                checks[name] = _verdict(False, reason="no two consecutive tau levels agree", levels=sweep_info)
        else:
            sig, dec, witness = stable
            metrics["n_positive"], metrics["n_negative"] = sig["n_positive"], sig["n_negative"]
            metrics["tau_rel_stable"] = sig["tau_rel"]
            if "nodal-count" in sc.checks:
                checks["nodal-count"] = _verdict(sig["count_bound"], n_positive=sig["n_positive"], n_negative=sig["n_negative"],
                                                 n_maxima=sig["n_maxima"], n_minima=sig["n_minima"], tau_rel=sig["tau_rel"], levels=sweep_info)
            if "boundary-contact" in sc.checks:
                checks["boundary-contact"] = _verdict(sig["lines_touch"] and sig["contact"], lines_touch=sig["lines_touch"],
                                                      contact=sig["contact"], witness=witness, tau_rel=sig["tau_rel"])
            if "simply-connected" in sc.checks:
                bad = [c.label for c in dec.components if not c.simply_connected]
                checks["simply-connected"] = _verdict(sig["simply_connected"], non_simply_connected=bad, tau_rel=sig["tau_rel"])

    if "max-principle" in sc.checks:
        mp = check_strong_maximum_principle(domain, u)
        checks["max-principle"] = _verdict(mp.passed, status=mp.status, max_margin=mp.max_margin, min_margin=mp.min_margin,
                                           strict=mp.strict, witness=mp.witness, detail=mp.detail)

    if "unique-continuation" in sc.checks:
        tau_uc = sc.uc_tau_rel * umax
        uc = check_unique_continuation(domain, u, g, tau_uc)
        checks["unique-continuation"] = _verdict(uc.ok, branch=uc.branch, vanishing_size=uc.vanishing_size, tau=uc.tau, h=uc.h)

    sweep = None
    if "harnack" in sc.checks and np.ptp(vals[domain.active]) == 0:
        checks["harnack"] = _skip("field is constant, every ratio is 0/0")
    elif "harnack" in sc.checks:
        radii = sc.harnack_radii or [2 * sc.h, 4 * sc.h, 8 * sc.h]
        shifted = vals - np.nanmin(vals[domain.active])
        sweep = harnack_sweep(domain, shifted, radii)
        if not sweep.reports:
            checks["harnack"] = _skip("no admissible ball for the requested radii")
        else:
            unbounded = sum(rep.unbounded for rep in sweep.reports)
            metrics["harnack_constant"] = sweep.constant
            op_name = sc.operator["name"].split("(")[0]
            oracle = is_solution and sc.operator["p"] == 2 and op_name in ("p-laplace", "scaled-p-laplace")
            if oracle:
                worst = max(rep.ratio / (4 * (1 + 10 * sc.h / rep.r)) for rep in sweep.reports)
                checks["harnack"] = _verdict(unbounded == 0 and worst <= 1.0, bound="4(1+10h/r)", worst_bound_fraction=worst,
                                             constant=sweep.constant, admissible_balls=len(sweep.reports), unbounded=unbounded)
            else:
                checks["harnack"] = _verdict(unbounded == 0, bound="finite ratios (no analytic constant)", constant=sweep.constant,
                                             admissible_balls=len(sweep.reports), unbounded=unbounded)

    if "zero-connectivity" in sc.checks:
        radii = [2 * sc.h, 3 * sc.h, 4 * sc.h]
        pts = _zero_points(domain, vals, radii[-1])
        if len(pts) == 0:
            checks["zero-connectivity"] = _skip("no sign change with an admissible ball")
        else:
            X, Y = domain.xy
            grads = np.linalg.norm(tri_gradients(domain, np.where(domain.active, vals, 0.0)), axis=1)
            cent = domain.tri_centroids()
            worst_rx, failures = np.inf, []
            for j, i in pts:
                x = (float(X[j, i]), float(Y[j, i]))
                near = np.hypot(cent[:, 0] - x[0], cent[:, 1] - x[1]) <= radii[-1] + sc.h
                tau_local = sc.h * float(grads[near].max())
                zc = check_local_zero_connectivity(domain, vals, x, radii, tau_local)
                worst_rx = min(worst_rx, zc.r_x)
                if not zc.connected[0]:
                    failures.append(x)
            checks["zero-connectivity"] = _verdict(not failures, points=len(pts), min_r_x=worst_rx, failures=failures[:5])
    return checks, metrics, sweep


def load_scenario(config, h: float | None = None, tau: float | None = None) -> Scenario:
    """Scenario from YAML text, a config path or an existing :class:`Scenario`."""
    if isinstance(config, Scenario):
        if h is None and tau is None:
            return config
        return parse_config(yaml.safe_dump(_scenario_yaml(config)), h=h, tau=tau)
    is_path = isinstance(config, Path) or ("\n" not in config and Path(config).is_file())
    return parse_config(Path(config).read_text() if is_path else config, h=h, tau=tau)


def solve_scenario(sc: Scenario, domain=None):
    """Return ``(domain, g, u)``; ``u`` is the mock field or the computed solution.

    Raises :class:`ConvergenceError` when the solver gives up.
    """
    domain = build_domain(sc) if domain is None else domain
    g = boundary_data(sc, domain)
    if sc.mock_field is not None:
        u = ScalarField.from_function(domain, lambda x, y: expr.evaluate(sc.mock_field, **_env(domain, x, y)))
        return domain, g, u
    opts = SolveOptions(**sc.solver)
    spec = operator_from_name(sc.operator["name"], sc.operator["p"], sc.operator["source_sign"])
    if spec.name == "p-laplace":
        return domain, g, solve_p_laplace(domain, g, spec.p, opts)
    return domain, g, solve_quasilinear(spec, domain, g, opts)


def run_scenario(config, out_dir=None, h: float | None = None, tau: float | None = None, write: bool = True) -> dict:
    """Run one scenario from YAML text, a path, or a :class:`Scenario`.

    Returns the report dictionary; when ``write`` is true the report and its
    artifacts go to ``<out_dir>/<name>/``.  Parse errors raise
    :class:`ConfigError` before anything is written.
    """
    sc = load_scenario(config, h, tau)
    domain = build_domain(sc)

    t0 = time.perf_counter()
    solver_info: dict
    u = None
    try:
        domain, g, u = solve_scenario(sc, domain)
        if sc.mock_field is not None:
            solver_info = {"verdict": "skip", "reason": "mock field, no solve"}
        else:
            solver_info = {"verdict": "pass", **u.info}
    except ConvergenceError as exc:
        g = boundary_data(sc, domain)
        solver_info = {"verdict": "fail", "error": str(exc), "iterations": exc.iterations, "residual": exc.residual}
    t_solve = time.perf_counter() - t0

    if u is not None and solver_info["verdict"] != "fail":
        checks, metrics, sweep = _run_checks(sc, domain, u, g, is_solution=sc.mock_field is None)
    else:
        checks = {name: _skip("solver did not converge") for name in sc.checks}
        metrics, sweep = {}, None
    checks = {name: checks[name] for name in sc.checks}
    t_total = time.perf_counter() - t0

    passed = solver_info["verdict"] != "fail" and all(c["verdict"] != "fail" for c in checks.values())
    umax = metrics.get("max_abs_u", 0.0)
    report = {
        "scenario": sc.name,
        "passed": passed,
        "provenance": {
            "config_hash": sc.config_hash(),
            "h": sc.h,
            "tau": sc.tau_rel * umax,
            "tau_rel": sc.tau_rel,
            "tau_unique_continuation": sc.uc_tau_rel * umax,
            "version": __version__,
            "domain": {"kind": sc.domain["kind"], "nx": domain.nx, "ny": domain.ny, "interior_nodes": domain.n_interior},
        },
        "solver": solver_info,
        "checks": checks,
        "metrics": metrics,
        "outputs": {},
    }
    if write:
        out = Path(out_dir or os.environ.get(OUT_ENV, DEFAULT_OUT)) / sc.name
        out.mkdir(parents=True, exist_ok=True)
        if u is not None:
            write_field_csv(out / "solution.csv", domain, u.values)
            write_grid(out / "solution.grid", domain, u.values)
            dec = extract_nodal_decomposition(domain, u, sc.tau_rel * umax if umax else 0.0)
            write_grid(out / "labels.grid", domain, dec.labels, integer=True)
            write_grid(out / "kind.grid", domain, domain.kind, integer=True)
            report["outputs"] = {"solution_csv": "solution.csv", "solution_grid": "solution.grid",
                                 "labels_grid": "labels.grid", "kind_grid": "kind.grid"}
        if sweep is not None:
            write_sweep_csv(out / "harnack.csv", sweep)
            report["outputs"]["harnack_csv"] = "harnack.csv"
        (out / "scenario.yaml").write_text(yaml.safe_dump(_scenario_yaml(sc), sort_keys=True))
        report["outputs"]["config"] = "scenario.yaml"
        (out / "report.json").write_text(json.dumps(_clean(report), indent=2, sort_keys=True) + "\n")
        (out / "timing.json").write_text(json.dumps({"solve_seconds": t_solve, "total_seconds": t_total}, indent=2) + "\n")
    return _clean(report)


def _scenario_yaml(sc: Scenario) -> dict:
    d = {
        "name": sc.name,
        "domain": sc.domain,
        "h": sc.h,
        "operator": {"name": sc.operator["name"], "p": sc.operator["p"], "source_sign": sc.operator["source_sign"]},
        "tau": {"relative": sc.tau_rel, "sweep": sc.tau_sweep, "unique_continuation": sc.uc_tau_rel},
        "checks": sc.checks,
        "solver": sc.solver,
    }
    if sc.boundary is not None:
        d["boundary"] = sc.boundary
    else:
        d["field"] = sc.mock_field
    if sc.harnack_radii:
        d["harnack"] = {"radii": sc.harnack_radii}
    return d


SUMMARY_METRICS = ("n_positive", "n_negative", "g_maxima", "g_minima", "harnack_constant", "max_abs_u")


def _suite_job(args):
    path, out_dir, h, tau = args
    try:
        return run_scenario(Path(path), out_dir, h=h, tau=tau)
    except ConfigError as exc:
        return {"scenario": Path(path).stem, "passed": False, "error": str(exc), "checks": {}, "metrics": {}, "solver": {}}


def run_suite(directory, out_dir=None, jobs: int = 1, h: float | None = None, tau: float | None = None) -> list[dict]:
    """Run every ``*.yaml``/``*.yml`` scenario in ``directory`` and write ``summary.csv``.

    Rows follow the sorted file names, so the summary is identical across
    reruns regardless of ``jobs``.
    """
    paths = sorted(p for p in Path(directory).iterdir() if p.suffix in (".yaml", ".yml"))
    if not paths:
        raise ConfigError(f"{directory}: no scenario configs found")
    out = Path(out_dir or os.environ.get(OUT_ENV, DEFAULT_OUT))
    out.mkdir(parents=True, exist_ok=True)
    args = [(str(p), str(out), h, tau) for p in paths]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(_suite_job, args))
    else:
        reports = [_suite_job(a) for a in args]

    rows = []
    for path, rep in zip(paths, reports):
        row = {"config": path.name, "scenario": rep["scenario"], "passed": rep["passed"], "solver": rep.get("solver", {}).get("verdict", "error")}
        for name in CHECKS:
            row[name] = rep["checks"].get(name, {}).get("verdict", "-")
        for m in SUMMARY_METRICS:
            row[m] = rep["metrics"].get(m, "")
        row["error"] = rep.get("error", "")
        rows.append(row)
    cols = ["config", "scenario", "passed", "solver", *CHECKS, *SUMMARY_METRICS, "error"]
    write_rows_csv(out / "summary.csv", rows, cols)
    return reports
