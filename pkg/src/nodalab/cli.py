"""Command line entry point: ``nodalab run|suite|report|render``.

Exit status is 0 when every verdict passes, 1 when a check or the solver
fails and 2 on configuration or usage errors.  The default output directory
is ``$NODALAB_OUT`` (falling back to ``./nodalab-out``).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .export import label_colors, read_grid, write_pgm, write_ppm
from .scenario import ConfigError, run_scenario, run_suite


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nodalab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="verb", required=True)

    def common(p):
        p.add_argument("--out", help="output directory (default: $NODALAB_OUT or ./nodalab-out)")
        p.add_argument("--h", type=float, help="override the lattice spacing")
        p.add_argument("--tau", type=float, help="override the relative nodal threshold tau/max|u|")

    p = sub.add_parser("run", help="run one scenario config")
    p.add_argument("config")
    common(p)
    p = sub.add_parser("suite", help="run every config in a directory")
    p.add_argument("directory")
    p.add_argument("--jobs", type=int, default=1, help="scenarios run in parallel")
    common(p)
    p = sub.add_parser("report", help="pretty-print a report.json")
    p.add_argument("report")
    p = sub.add_parser("render", help="write labels.ppm and solution.pgm next to a report")
    p.add_argument("report")
    p.add_argument("--out", help="image directory (default: next to the report)")
    return ap


def _print_report(rep: dict, stream=None) -> None:
    stream = stream or sys.stdout
    status = "PASS" if rep.get("passed") else "FAIL"
    print(f"{rep.get('scenario', '?')}: {status}", file=stream)
    if "error" in rep:
        print(f"  error: {rep['error']}", file=stream)
    solver = rep.get("solver", {})
    if solver:
        extras = ", ".join(f"{k}={solver[k]}" for k in ("method", "iterations", "residual", "energy") if k in solver)
        print(f"  solver: {solver.get('verdict')} {extras}".rstrip(), file=stream)
    for name, chk in rep.get("checks", {}).items():
        note = chk.get("reason") or chk.get("branch") or chk.get("status") or ""
        print(f"  {name:<20} {chk['verdict']:<5} {note}".rstrip(), file=stream)
    for k, v in sorted(rep.get("metrics", {}).items()):
        print(f"  {k} = {v}", file=stream)


def _render(report_path: Path, out: Path | None) -> list[Path]:
    rep = json.loads(report_path.read_text())
    base = report_path.parent
    outputs = rep.get("outputs", {})
    if "labels_grid" not in outputs:
        raise ConfigError(f"{report_path}: report has no label grid to render")
    out = out or base
    out.mkdir(parents=True, exist_ok=True)
    _, labels = read_grid(base / outputs["labels_grid"])
    kind = read_grid(base / outputs["kind_grid"])[1].astype(int) if "kind_grid" in outputs else None
    written = [out / "labels.ppm"]
    write_ppm(written[0], label_colors(labels.astype(int), kind))
    if "solution_grid" in outputs:
        _, vals = read_grid(base / outputs["solution_grid"])
        written.append(out / "solution.pgm")
        write_pgm(written[1], np.where(np.isfinite(vals), vals, np.nan))
    return written


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.verb == "run":
            rep = run_scenario(Path(args.config), args.out, h=args.h, tau=args.tau)
            _print_report(rep)
            return 0 if rep["passed"] else 1
        if args.verb == "suite":
            reports = run_suite(args.directory, args.out, jobs=args.jobs, h=args.h, tau=args.tau)
            for rep in reports:
                print(f"{rep['scenario']}: {'PASS' if rep['passed'] else 'FAIL'}")
            return 0 if all(r["passed"] for r in reports) else 1
        if args.verb == "report":
            rep = json.loads(Path(args.report).read_text())
            _print_report(rep)
            return 0 if rep.get("passed") else 1
        for path in _render(Path(args.report), Path(args.out) if args.out else None):
            print(path)
        return 0
    except (ConfigError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"nodalab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
