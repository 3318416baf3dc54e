from __future__ import annotations

import json
import xml.etree.ElementTree as ET

import pytest

from pcadde.cli import main

SHOWCASE = {
    "label": "sin_abscos",
    "a": {"kind": "sin_affine", "c0": 1.0, "c1": 1 / 3, "omega": 1.0, "phase": 0.0},
    "r": {"kind": "abs_cos", "q": 1.0},
    "phi": {"kind": "constant", "value": 5.0},
}

OVERFLOW = {
    "label": "boom",
    "a": {"kind": "constant", "value": 1e200},
    "r": {"kind": "table", "points": [[0.0, 0.0], [1000.0, 0.0]], "q": 1.0},
    "phi": {"kind": "constant", "value": 1.0},
}

SIGN_CHANGING = {
    "label": "sign_changing",
    "a": {"kind": "sin_affine", "c0": 0.0, "c1": 1.0, "omega": 1.0, "phase": 0.0},
    "r": {"kind": "constant", "value": 1.0, "q": 1.0},
    "phi": {"kind": "constant", "value": 1.0},
}


@pytest.fixture
def problem_file(tmp_path):
    path = tmp_path / "problem.json"
    path.write_text(json.dumps(SHOWCASE))
    return str(path)


def _assert_self_contained_svg(path):
    tree = ET.parse(path)
    for el in tree.iter():
        assert "script" not in el.tag and "image" not in el.tag
        for attr in el.attrib:
            assert "href" not in attr.lower()


class TestSimulate:
    def test_writes_csv_and_svg(self, problem_file, tmp_path):
        out = tmp_path / "out"
        rc = main(["simulate", "--problem", problem_file, "--T", "20", "--k", "2",
                   "--out", str(out), "--plot"])
        assert rc == 0
        lines = (out / "trajectory.csv").read_text().strip().split("\n")
        assert lines[0] == "n,t,z,A_n,k_n"
        assert len(lines) == 1 + 2 + 40 + 1
        svg = out / "trajectory.svg"
        assert svg.exists()
        _assert_self_contained_svg(svg)
        assert "sin_abscos, h=0.5" in svg.read_text()

    def test_coarsest_step_allowed(self, problem_file, tmp_path):
        rc = main(["simulate", "--problem", problem_file, "--T", "5", "--k", "1",
                   "--out", str(tmp_path / "k1")])
        assert rc == 0

    def test_zero_coefficient_flat_line(self, tmp_path):
        path = tmp_path / "flat.json"
        path.write_text(json.dumps({
            "label": "flat", "a": {"kind": "constant", "value": 0.0},
            "r": {"kind": "constant", "value": 1.0, "q": 1.0},
            "phi": {"kind": "constant", "value": 5.0}}))
        out = tmp_path / "flat_out"
        assert main(["simulate", "--problem", str(path), "--T", "8",
                     "--out", str(out)]) == 0
        rows = (out / "trajectory.csv").read_text().strip().split("\n")[1:]
        assert all(float(row.split(",")[2]) == 5.0 for row in rows)

    def test_third_step_compare(self, problem_file, tmp_path):
        # non-dyadic h = 1/3 through the whole compare pipeline
        out = tmp_path / "k3"
        assert main(["compare", "--problem", problem_file, "--T", "5", "--k", "3",
                     "--out", str(out)]) == 0
        summary = json.loads((out / "compare_summary.json").read_text())
        assert summary["dominated"] is True

    def test_deterministic_bytes(self, problem_file, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        for out in (out1, out2):
            assert main(["simulate", "--problem", problem_file, "--T", "20",
                         "--k", "2", "--out", str(out), "--plot"]) == 0
        assert (out1 / "trajectory.csv").read_bytes() == (out2 / "trajectory.csv").read_bytes()
        assert (out1 / "trajectory.svg").read_bytes() == (out2 / "trajectory.svg").read_bytes()


class TestCompare:
    def test_single_k_outputs(self, problem_file, tmp_path):
        out = tmp_path / "cmp"
        rc = main(["compare", "--problem", problem_file, "--T", "5", "--k", "4",
                   "--out", str(out), "--plot"])
        assert rc == 0
        summary = json.loads((out / "compare_summary.json").read_text())
        assert summary["dominated"] is True
        assert summary["measured_max_error"] > 0
        assert summary["bound"] > summary["measured_max_error"]
        header = (out / "compare.csv").read_text().split("\n")[0]
        assert header == "n,t,z,x,abs_error"
        _assert_self_contained_svg(out / "compare.svg")

    def test_k_list_convergence_table(self, problem_file, tmp_path):
        out = tmp_path / "conv"
        rc = main(["compare", "--problem", problem_file, "--T", "5",
                   "--k-list", "2,4,8", "--out", str(out)])
        assert rc == 0
        lines = (out / "convergence.csv").read_text().strip().split("\n")
        assert lines[0] == "k,h,measured_max_error,bound,ratio_prev"
        assert len(lines) == 4

    def test_needs_k_or_klist(self, problem_file, tmp_path):
        assert main(["compare", "--problem", problem_file,
                     "--out", str(tmp_path)]) == 1

    def test_bad_k_list(self, problem_file, tmp_path):
        assert main(["compare", "--problem", problem_file, "--k-list", "2,x",
                     "--out", str(tmp_path)]) == 1


class TestSweep:
    def test_with_constants_file(self, problem_file, tmp_path):
        constants = tmp_path / "constants.json"
        constants.write_text(json.dumps(
            {"K": 1.14, "sigma": 0.66, "M0": 1.17, "source": "user", "residual": None}))
        out = tmp_path / "sweep"
        rc = main(["sweep", "--problem", problem_file, "--k", "16",
                   "--constants", str(constants), "--out", str(out)])
        assert rc == 0
        lines = (out / "sweep.csv").read_text().strip().split("\n")
        assert lines[0] == "k,h,K1,admissible,eta"
        assert len(lines) == 17
        assert lines[1].split(",")[3] == "false"
        assert lines[-1].split(",")[3] == "true"

    def test_fit_writes_constants(self, problem_file, tmp_path):
        out = tmp_path / "fit"
        rc = main(["sweep", "--problem", problem_file, "--T", "40", "--k", "12",
                   "--fine-step", str(1 / 128), "--fit", "--out", str(out)])
        assert rc == 0
        tc = json.loads((out / "constants.json").read_text())
        assert tc["source"] == "fitted"
        assert tc["sigma"] > 0

    def test_requires_constants_or_fit(self, problem_file, tmp_path):
        assert main(["sweep", "--problem", problem_file,
                     "--out", str(tmp_path)]) == 1


class TestYorke:
    def test_satisfied(self, problem_file, tmp_path):
        out = tmp_path / "y"
        assert main(["yorke", "--problem", problem_file, "--out", str(out)]) == 0
        obj = json.loads((out / "yorke.json").read_text())
        assert set(obj) == {"alpha", "q", "alpha_q", "verdict"}
        assert obj["verdict"] == "satisfied"

    def test_violated(self, tmp_path):
        path = tmp_path / "p.json"
        path.write_text(json.dumps({
            "label": "hot", "a": {"kind": "constant", "value": 2.0},
            "r": {"kind": "constant", "value": 1.0, "q": 1.0},
            "phi": {"kind": "constant", "value": 1.0}}))
        out = tmp_path / "y"
        assert main(["yorke", "--problem", str(path), "--out", str(out)]) == 0
        assert json.loads((out / "yorke.json").read_text())["verdict"] == "violated"

    def test_sign_changing_inconclusive(self, tmp_path):
        path = tmp_path / "p.json"
        path.write_text(json.dumps(SIGN_CHANGING))
        out = tmp_path / "y"
        assert main(["yorke", "--problem", str(path), "--out", str(out)]) == 0
        assert json.loads((out / "yorke.json").read_text())["verdict"] == "inconclusive"


class TestHalanayRoot:
    def test_prints_root(self, capsys):
        assert main(["halanay-root", "--alpha", "1", "--beta", "0.5", "--q", "1"]) == 0
        out = capsys.readouterr().out
        assert "eta = 0.314923057845406" in out

    def test_invalid_constants(self, capsys):
        assert main(["halanay-root", "--alpha", "0.5", "--beta", "1", "--q", "1"]) == 1


class TestExitCodes:
    def test_missing_problem_file_is_config_error(self, tmp_path):
        assert main(["simulate", "--problem", str(tmp_path / "nope.json"),
                     "--out", str(tmp_path)]) == 1

    def test_malformed_json_is_config_error(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        assert main(["simulate", "--problem", str(path), "--out", str(tmp_path)]) == 1

    def test_overflow_is_numeric_error(self, tmp_path):
        path = tmp_path / "boom.json"
        path.write_text(json.dumps(OVERFLOW))
        assert main(["simulate", "--problem", str(path), "--T", "10", "--k", "1",
                     "--out", str(tmp_path)]) == 2

    def test_unwritable_out_is_io_error(self, problem_file, tmp_path):
        blocker = tmp_path / "blocked"
        blocker.write_text("a file, not a directory")
        assert main(["simulate", "--problem", problem_file,
                     "--out", str(blocker)]) == 3
