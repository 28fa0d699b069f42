import csv

import numpy as np
import pytest

from nodalab.analysis import harnack_sweep
from nodalab.export import (
    label_colors,
    read_grid,
    read_points_csv,
    write_field_csv,
    write_grid,
    write_pgm,
    write_ppm,
    write_profile_csv,
    write_sweep_csv,
)
from nodalab.solver import ScalarField

from conftest import square


def test_grid_roundtrip(tmp_path):
    dom = square(1 / 8)
    u = ScalarField.from_function(dom, lambda x, y: np.sin(x) * y + 1 / 3)
    write_grid(tmp_path / "u.grid", dom, u.values)
    header, vals = read_grid(tmp_path / "u.grid")
    assert header == {"nx": dom.nx, "ny": dom.ny, "h": dom.h, "x0": dom.x0, "y0": dom.y0}
    assert np.array_equal(vals, u.values, equal_nan=True)


def test_integer_grid(tmp_path):
    dom = square(1 / 8)
    write_grid(tmp_path / "k.grid", dom, dom.kind, integer=True)
    assert np.array_equal(read_grid(tmp_path / "k.grid")[1], dom.kind)


def test_grid_rejects_foreign_file(tmp_path):
    (tmp_path / "x.grid").write_text("1 2 3\n")
    with pytest.raises(ValueError):
        read_grid(tmp_path / "x.grid")


def test_field_csv(tmp_path):
    dom = square(1 / 8)
    u = ScalarField.from_function(dom, lambda x, y: x + 2 * y)
    write_field_csv(tmp_path / "u.csv", dom, u.values)
    rows = list(csv.DictReader(open(tmp_path / "u.csv")))
    assert len(rows) == dom.active.sum()
    assert all(float(r["u"]) == pytest.approx(float(r["x"]) + 2 * float(r["y"])) for r in rows)


def test_sweep_csv_columns(tmp_path):
    dom = square(1 / 16)
    sweep = harnack_sweep(dom, np.ones(dom.shape), [1 / 16])
    write_sweep_csv(tmp_path / "s.csv", sweep)
    with open(tmp_path / "s.csv") as fh:
        header = fh.readline().strip().split(",")
    assert header == ["center_x", "center_y", "r", "sup", "inf", "ratio", "admissible"]


def test_points_and_profile(tmp_path):
    (tmp_path / "p.csv").write_text("x,y\n0,0\n1,0.5\n")
    pts = read_points_csv(tmp_path / "p.csv")
    assert pts.tolist() == [[0, 0], [1, 0.5]]
    write_profile_csv(tmp_path / "prof.csv", [(0.5, 2), (1.0, 1)])
    assert (tmp_path / "prof.csv").read_text() == "eps,components\n0.5,2\n1.0,1\n"


def test_images(tmp_path):
    labels = np.array([[0, 1, -1], [2, -2, 0]])
    rgb = label_colors(labels)
    assert rgb.shape == (2, 3, 3)
    assert rgb[1, 0].tolist() == [255, 255, 255]  # zero set, bottom-left after the flip
    assert rgb[1, 1, 0] == 230 and rgb[1, 2, 2] == 230
    write_ppm(tmp_path / "l.ppm", rgb)
    head = (tmp_path / "l.ppm").read_text().split("\n")[:3]
    assert head == ["P3", "3 2", "255"]
    write_pgm(tmp_path / "u.pgm", np.array([[0.0, np.nan], [1.0, 2.0]]))
    body = (tmp_path / "u.pgm").read_text().split("\n")
    assert body[:3] == ["P2", "2 2", "255"] and body[3] == "128 255"
