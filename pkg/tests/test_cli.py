import json
import shutil
from pathlib import Path

import pytest

from nodalab import cli
from nodalab.scenario import CHECKS, ConfigError, parse_config, run_scenario, run_suite

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"

DISK_SIN2 = """\
name: disk-sin2
domain: {kind: disk, radius: 1.0}
h: 0.0625
operator: {name: p-laplace, p: 2}
boundary: "sin(2*theta)"
"""

SQUARE_ZERO = """\
name: square-zero
domain:
  kind: polygon
  vertices: [[0, 0], [1, 0], [1, 1], [0, 1]]
h: 0.0625
operator: {name: p-laplace, p: 3}
boundary: "0"
"""


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestParse:
    def test_defaults(self):
        sc = parse_config(DISK_SIN2)
        assert sc.checks == list(CHECKS)
        assert sc.tau_sweep == [1e-2, 1e-3, 1e-4]
        assert sc.operator == {"name": "p-laplace", "p": 2.0, "source_sign": 1.0}

    def test_overrides(self):
        sc = parse_config(DISK_SIN2, h=0.1, tau=0.05)
        assert sc.h == 0.1 and sc.tau_rel == 0.05

    def test_hash_tracks_content(self):
        assert parse_config(DISK_SIN2).config_hash() == parse_config(DISK_SIN2).config_hash()
        assert parse_config(DISK_SIN2).config_hash() != parse_config(DISK_SIN2, h=0.05).config_hash()

    @pytest.mark.parametrize(
        "patch, message",
        [
            (("sin(2*theta)", "sin("), "boundary"),
            (("sin(2*theta)", "sin(2*s)"), "arclength"),
            (("p: 2", "p: 1"), "operator.p"),
            (("p-laplace", "laplace"), "operator.name"),
            (("h: 0.0625", "h: -1"), "h: must be positive"),
            (("h: 0.0625", "h: 0.5"), "domain"),
            (("kind: disk", "kind: ellipse"), "domain.kind"),
        ],
    )
    def test_errors_name_the_field(self, patch, message):
        text = DISK_SIN2.replace(*patch)
        with pytest.raises(ConfigError, match=message):
            sc = parse_config(text)
            run_scenario(sc, write=False)

    def test_yaml_error_has_line(self):
        with pytest.raises(ConfigError, match="line 3, column 2"):
            parse_config("name: x\ndomain: {kind: disk, radius: 1\nh: 0.1\n")

    def test_unknown_check(self):
        with pytest.raises(ConfigError, match="checks"):
            parse_config(DISK_SIN2 + "checks: [harnack, wiggles]\n")

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="unknown config keys"):
            parse_config(DISK_SIN2 + "colour: red\n")

    def test_boundary_or_field(self):
        with pytest.raises(ConfigError, match="exactly one"):
            parse_config(DISK_SIN2 + 'field: "x"\n')


class TestRunScenario:
    def test_disk_sin2_full_checks(self, tmp_path):
        rep = run_scenario(DISK_SIN2, tmp_path)
        assert rep["passed"]
        assert list(rep["checks"]) == list(CHECKS)
        assert all(c["verdict"] == "pass" for c in rep["checks"].values())
        assert (rep["metrics"]["n_positive"], rep["metrics"]["n_negative"]) == (2, 2)
        out = tmp_path / "disk-sin2"
        for name in ("report.json", "timing.json", "solution.csv", "solution.grid", "labels.grid", "harnack.csv"):
            assert (out / name).exists()
        assert "seconds" not in (out / "report.json").read_text()
        prov = rep["provenance"]
        assert prov["h"] == 0.0625 and len(prov["config_hash"]) == 64 and prov["version"]

    def test_zero_data_vanishes_identically(self, tmp_path):
        rep = run_scenario(SQUARE_ZERO, tmp_path)
        assert rep["passed"]
        assert rep["checks"]["unique-continuation"]["branch"] == "vanishes identically"
        assert rep["checks"]["harnack"]["verdict"] == "skip" and rep["checks"]["harnack"]["reason"]

    def test_parse_error_writes_nothing(self, tmp_path):
        with pytest.raises(ConfigError):
            run_scenario(DISK_SIN2.replace("sin(2*theta)", "sin("), tmp_path)
        assert not any(tmp_path.iterdir())

    def test_nonconvergence_report(self, tmp_path):
        text = DISK_SIN2.replace("p: 2", "p: 3") + "solver: {max_iter: 1}\n"
        rep = run_scenario(text, tmp_path)
        assert not rep["passed"]
        assert rep["solver"]["verdict"] == "fail" and rep["solver"]["iterations"] == 1
        assert all(c["verdict"] == "skip" and c["reason"] for c in rep["checks"].values())
        assert (tmp_path / "disk-sin2" / "report.json").exists()

    def test_subset_of_checks(self, tmp_path):
        rep = run_scenario(DISK_SIN2 + "checks: [unique-continuation, harnack]\n", tmp_path)
        assert list(rep["checks"]) == ["unique-continuation", "harnack"]

    def test_mock_field(self, tmp_path):
        text = DISK_SIN2.replace('boundary: "sin(2*theta)"', 'field: "max(r - 0.4, 0)**2 * cos(theta)"')
        rep = run_scenario(text, tmp_path)
        assert rep["solver"]["verdict"] == "skip"
        assert rep["checks"]["unique-continuation"]["verdict"] == "fail"
        assert not rep["passed"]

    def test_report_is_deterministic(self, tmp_path):
        run_scenario(DISK_SIN2, tmp_path / "a")
        run_scenario(DISK_SIN2, tmp_path / "b")
        a = (tmp_path / "a" / "disk-sin2")
        b = (tmp_path / "b" / "disk-sin2")
        for name in ("report.json", "solution.grid", "labels.grid", "harnack.csv", "solution.csv"):
            assert (a / name).read_bytes() == (b / name).read_bytes()


class TestSuite:
    def make_suite(self, tmp_path):
        src = tmp_path / "cfg"
        src.mkdir()
        write(src, "a.yaml", DISK_SIN2)
        write(src, "b.yaml", SQUARE_ZERO)
        shutil.copy(SCENARIOS / "mocks" / "interior-spike.yaml", src / "c.yaml")
        return src

    def test_one_failing_mock_row(self, tmp_path):
        reports = run_suite(self.make_suite(tmp_path), tmp_path / "out")
        assert [r["passed"] for r in reports] == [True, True, False]
        rows = (tmp_path / "out" / "summary.csv").read_text().splitlines()
        assert rows[0].startswith("config,scenario,passed,solver,harnack")
        assert [r.split(",")[2] for r in rows[1:]] == ["true", "true", "false"]

    def test_rerun_and_jobs_identical(self, tmp_path):
        src = self.make_suite(tmp_path)
        run_suite(src, tmp_path / "o1")
        run_suite(src, tmp_path / "o2", jobs=2)
        assert (tmp_path / "o1" / "summary.csv").read_bytes() == (tmp_path / "o2" / "summary.csv").read_bytes()

    def test_empty_directory(self, tmp_path):
        with pytest.raises(ConfigError, match="no scenario"):
            run_suite(tmp_path, tmp_path / "out")

    def test_bad_config_becomes_failed_row(self, tmp_path):
        src = tmp_path / "cfg"
        src.mkdir()
        write(src, "a.yaml", DISK_SIN2)
        write(src, "z.yaml", "name: [\n")
        reports = run_suite(src, tmp_path / "out")
        assert reports[0]["passed"] and not reports[1]["passed"] and "YAML" in reports[1]["error"]


class TestCommandLine:
    def test_run_exit_codes(self, tmp_path, capsys):
        good = write(tmp_path, "good.yaml", DISK_SIN2)
        bad = write(tmp_path, "bad.yaml", DISK_SIN2.replace("sin(2*theta)", "sin("))
        assert cli.main(["run", str(good), "--out", str(tmp_path / "o")]) == 0
        assert "disk-sin2: PASS" in capsys.readouterr().out
        assert cli.main(["run", str(bad), "--out", str(tmp_path / "o2")]) == 2
        assert "boundary" in capsys.readouterr().err
        assert not (tmp_path / "o2").exists()

    def test_failing_scenario_exit_one(self, tmp_path):
        mock = SCENARIOS / "mocks" / "dead-core.yaml"
        assert cli.main(["run", str(mock), "--out", str(tmp_path)]) == 1

    def test_env_default_output(self, tmp_path, monkeypatch):
        monkeypatch.setenv("NODALAB_OUT", str(tmp_path / "env"))
        cfg = write(tmp_path, "c.yaml", DISK_SIN2)
        assert cli.main(["run", str(cfg), "--h", "0.05", "--tau", "0.002"]) == 0
        rep = json.loads((tmp_path / "env" / "disk-sin2" / "report.json").read_text())
        assert rep["provenance"]["h"] == 0.05 and rep["provenance"]["tau_rel"] == 0.002

    def test_report_and_render(self, tmp_path, capsys):
        cfg = write(tmp_path, "c.yaml", DISK_SIN2)
        cli.main(["run", str(cfg), "--out", str(tmp_path)])
        report = tmp_path / "disk-sin2" / "report.json"
        capsys.readouterr()
        assert cli.main(["report", str(report)]) == 0
        out = capsys.readouterr().out
        assert "nodal-count" in out and "n_positive = 2" in out
        assert cli.main(["render", str(report)]) == 0
        ppm = (tmp_path / "disk-sin2" / "labels.ppm").read_text().split("\n")
        assert ppm[0] == "P3"
        assert (tmp_path / "disk-sin2" / "solution.pgm").exists()

    def test_suite_verb(self, tmp_path):
        src = tmp_path / "cfg"
        src.mkdir()
        write(src, "a.yaml", DISK_SIN2)
        assert cli.main(["suite", str(src), "--out", str(tmp_path / "o"), "--jobs", "2"]) == 0

    def test_missing_file(self, tmp_path):
        assert cli.main(["report", str(tmp_path / "nope.json")]) == 2
