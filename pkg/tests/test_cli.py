import json

import numpy as np
import pytest

from pwlcycles.cli import main
from pwlcycles.examples import EXAMPLE1_M1_ROOTS, example_one, example_two


@pytest.fixture()
def ex1_path(tmp_path):
    p = tmp_path / "ex1.json"
    p.write_text(example_one().to_json())
    return str(p)


@pytest.fixture()
def ex2_path(tmp_path):
    p = tmp_path / "ex2.json"
    p.write_text(example_two(0.01).to_json())
    return str(p)


class TestAnalyze:
    def test_full_report(self, ex1_path, tmp_path):
        out = str(tmp_path / "out")
        assert main(["analyze", ex1_path, "-o", out]) == 0
        report = json.loads((tmp_path / "out" / "report.json").read_text())
        assert report["hypotheses"]["h3_global_center"] is True
        roots = [r["y0"] for r in report["melnikov"]["roots"]]
        np.testing.assert_allclose(roots, EXAMPLE1_M1_ROOTS, rtol=1e-8)
        assert report["infinity"]["stability"] == "Stable"
        assert report["melnikov"]["roots"][-1]["stability"] == "Unstable"

    def test_constrained_system_gets_sliding_block(self, ex2_path, tmp_path):
        out = str(tmp_path / "out2")
        assert main(["analyze", ex2_path, "-o", out]) == 0
        report = json.loads((tmp_path / "out2" / "report.json").read_text())
        assert report["sliding"]["verdict"] == "simultaneous"
        assert report["sliding"]["sliding"]["cycle"] == "SlidingTypeI"

    def test_malformed_json_exits_one(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"order0": [1, 2')
        assert main(["analyze", str(bad)]) == 1
        err = capsys.readouterr().err
        assert "invalid JSON" in err and ":1:" in err

    def test_schema_violation_exits_one(self, tmp_path, capsys):
        bad = tmp_path / "bad2.json"
        bad.write_text('{"order0": {"plus": {"matrix": [1,2,3], "offset": [0,1]},'
                       ' "minus": {"matrix": [0,-1,1,0], "offset": [0,1]}}}')
        assert main(["analyze", str(bad)]) == 1
        assert "order0.plus.matrix" in capsys.readouterr().err

    def test_bad_grid_rejected(self, ex1_path):
        assert main(["analyze", ex1_path, "--grid", "10"]) == 1


class TestMelnikovCommand:
    def test_csv_and_roots(self, ex1_path, tmp_path):
        out = str(tmp_path / "m")
        assert main(["melnikov", ex1_path, "-o", out,
                     "--y0-range", "0.5", "5", "--grid", "1024"]) == 0
        csv = (tmp_path / "m" / "m1.csv").read_text().splitlines()
        assert csv[0] == "y0,m1"
        vals = np.array([float(line.split(",")[1]) for line in csv[1:]])
        sgn = np.sign(vals)
        changes = int(np.sum(sgn[:-1] * sgn[1:] < 0))
        assert changes == 3
        roots = json.loads((tmp_path / "m" / "roots.json").read_text())["roots"]
        assert len(roots) == 3

    def test_byte_identical_reruns(self, ex1_path, tmp_path):
        out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
        main(["melnikov", ex1_path, "-o", out1, "--grid", "512"])
        main(["melnikov", ex1_path, "-o", out2, "--grid", "512"])
        assert (tmp_path / "a" / "m1.csv").read_bytes() == \
            (tmp_path / "b" / "m1.csv").read_bytes()
        assert (tmp_path / "a" / "roots.json").read_bytes() == \
            (tmp_path / "b" / "roots.json").read_bytes()


class TestSimulateCommand:
    def test_trajectory_csv_and_svg(self, ex1_path, tmp_path):
        out = str(tmp_path / "sim")
        assert main(["simulate", ex1_path, "--start", "0", "1.5",
                     "--t-max", "8", "--svg", "-o", out]) == 0
        csv = (tmp_path / "sim" / "trajectory.csv").read_text().splitlines()
        assert csv[0] == "t,x,y,segment_kind"
        assert len(csv) > 10
        svg = (tmp_path / "sim" / "phase.svg").read_text()
        assert svg.startswith("<svg") and "<polyline" in svg

    def test_svg_deterministic(self, ex1_path, tmp_path):
        a, b = str(tmp_path / "s1"), str(tmp_path / "s2")
        for out in (a, b):
            main(["simulate", ex1_path, "--start", "0", "1.5",
                  "--t-max", "8", "--svg", "-o", out])
        assert (tmp_path / "s1" / "phase.svg").read_bytes() == \
            (tmp_path / "s2" / "phase.svg").read_bytes()


class TestSlidingCommand:
    def test_sweep(self, ex2_path, tmp_path):
        out = str(tmp_path / "sw")
        assert main(["sliding", ex2_path, "-o", out]) == 0
        lines = (tmp_path / "sw" / "sweep.csv").read_text().splitlines()
        assert lines[0] == "tau,ordering,cycle"
        cycles = {line.split(",")[2] for line in lines[1:]}
        # the drift sign is fixed by the system, so the sweep crosses the
        # two sliding windows and the no-cycle region
        assert {"SlidingTypeI", "SlidingTypeII", "None"} <= cycles
