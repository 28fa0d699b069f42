"""Plain-text exports: CSV tables, lattice grids and PPM images.

Grid format (``*.grid``)::

    # nodalab-grid 1
    # nx ny h x0 y0
    <nx> <ny> <h> <x0> <y0>
    <ny rows of nx whitespace-separated values, bottom row (j = 0) first>

Values off the domain are written as ``nan``.  Label grids use the same
layout with integer entries.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .geometry import DiscreteDomain

GRID_MAGIC = "# nodalab-grid 1"


def write_field_csv(path, domain: DiscreteDomain, values: np.ndarray) -> None:
    """Write ``x, y, u`` rows for every interior and boundary node."""
    X, Y = domain.xy
    act = domain.active
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "u"])
        for x, y, u in zip(X[act], Y[act], np.asarray(values)[act]):
            w.writerow([repr(float(x)), repr(float(y)), repr(float(u))])


def write_grid(path, domain: DiscreteDomain, values: np.ndarray, integer: bool = False) -> None:
    vals = np.asarray(values)
    with open(path, "w") as fh:
        fh.write(GRID_MAGIC + "\n# nx ny h x0 y0\n")
        fh.write(f"{domain.nx} {domain.ny} {domain.h!r} {domain.x0!r} {domain.y0!r}\n")
        for row in vals:
            if integer:
                fh.write(" ".join(str(int(v)) for v in row) + "\n")
            else:
                fh.write(" ".join("nan" if not np.isfinite(v) else repr(float(v)) for v in row) + "\n")


def read_grid(path) -> tuple[dict, np.ndarray]:
    """Return ``(header, values)`` from a grid file."""
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0].strip() != GRID_MAGIC:
        raise ValueError(f"{path}: not a nodalab grid file")
    body = [ln for ln in lines if ln.strip() and not ln.startswith("#")]
    nx, ny, h, x0, y0 = body[0].split()
    header = {"nx": int(nx), "ny": int(ny), "h": float(h), "x0": float(x0), "y0": float(y0)}
    vals = np.array([[float(t) for t in ln.split()] for ln in body[1:]])
    if vals.shape != (header["ny"], header["nx"]):
        raise ValueError(f"{path}: grid body has shape {vals.shape}, header says {(header['ny'], header['nx'])}")
    return header, vals


def write_rows_csv(path, rows: list[dict], columns: list[str]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: _fmt(row.get(k, "")) for k in columns})


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def write_sweep_csv(path, sweep) -> None:
    cols = ["center_x", "center_y", "r", "sup", "inf", "ratio", "admissible"]
    write_rows_csv(path, [rep.as_row() for rep in sweep.reports], cols)


def write_profile_csv(path, profile) -> None:
    write_rows_csv(path, [{"eps": e, "components": c} for e, c in profile], ["eps", "components"])


def read_points_csv(path) -> np.ndarray:
    """Read an ``x, y`` point set (header row optional)."""
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.reader(fh):
            if not rec:
                continue
            try:
                rows.append((float(rec[0]), float(rec[1])))
            except ValueError:
                if rows:
                    raise
    return np.array(rows, dtype=float).reshape(-1, 2)


def label_colors(labels: np.ndarray, kind: np.ndarray | None = None) -> np.ndarray:
    """RGB image for a label grid: zero set white, positives reds, negatives blues.

    Row 0 of the result is the top of the picture (largest y).
    """
    labels = np.asarray(labels, dtype=int)
    img = np.full(labels.shape + (3,), 255, dtype=np.uint8)
    pos = labels > 0
    neg = labels < 0
    # distinct shades per component index
    shade = (37 * np.abs(labels)) % 120
    img[pos] = np.stack([np.full(pos.sum(), 230), 40 + shade[pos], 40 + shade[pos]], axis=1)
    img[neg] = np.stack([40 + shade[neg], 40 + shade[neg], np.full(neg.sum(), 230)], axis=1)
    if kind is not None:
        img[kind == 1] = (120, 120, 120)
        img[kind == 0] = (0, 0, 0)
    return img[::-1]


def write_ppm(path, rgb: np.ndarray) -> None:
    """Plain (P3) portable pixmap."""
    h, w, _ = rgb.shape
    with open(path, "w") as fh:
        fh.write(f"P3\n{w} {h}\n255\n")
        for row in rgb:
            fh.write(" ".join(f"{r} {g} {b}" for r, g, b in row) + "\n")


def write_pgm(path, gray: np.ndarray) -> None:
    """Plain (P2) portable graymap of values scaled to 0..255."""
    g = np.asarray(gray, dtype=float)
    lo, hi = np.nanmin(g), np.nanmax(g)
    scaled = np.zeros(g.shape, dtype=int) if hi == lo else np.round(255 * (g - lo) / (hi - lo))
    scaled = np.nan_to_num(scaled, nan=0).astype(int)[::-1]
    h, w = scaled.shape
    with open(path, "w") as fh:
        fh.write(f"P2\n{w} {h}\n255\n")
        for row in scaled:
            fh.write(" ".join(str(v) for v in row) + "\n")
