import csv
import hashlib
import json
from pathlib import Path

import pytest

from magclimb.cli import main
from magclimb.config import robot_to_doc
from magclimb.presets import reference_robot

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def write(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


@pytest.fixture
def robot_file(tmp_path):
    return write(tmp_path / "robot.json", robot_to_doc(reference_robot()))


@pytest.fixture
def wall_file(tmp_path):
    return write(tmp_path / "wall.json", {"schema_version": 1, "orientation_deg": 90, "thickness_mm": 10, "friction_mu": 0.6})


def sha(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


class TestFeasibility:
    def test_reference_robot_feasible(self, tmp_path, robot_file, wall_file):
        out = tmp_path / "rep.json"
        assert main(["feasibility", "--robot", robot_file, "--surface", wall_file, "--out", str(out)]) == 0
        rep = json.loads(out.read_text())
        assert rep["adhesion_margin"] == pytest.approx(1.0, abs=1e-3)
        assert rep["torque_margin"] == pytest.approx(1.0, abs=1e-3)
        assert set(rep) == {
            "adhesion_required_total", "adhesion_required_per_wheel", "adhesion_available_total",
            "adhesion_margin", "torque_required", "torque_margin", "corner_torque_min",
            "extreme_adhesion_min", "feasible",
        }
        manifest = json.loads((tmp_path / "rep.json.manifest.json").read_text())
        assert manifest["outputs"] == [{"path": str(out), "sha256": sha(out)}]

    def test_halved_flux_infeasible(self, tmp_path, wall_file):
        doc = robot_to_doc(reference_robot())
        doc["wheels"]["flux_density_T"] /= 2
        out = tmp_path / "rep.json"
        assert main(["feasibility", "--robot", write(tmp_path / "r.json", doc), "--surface", wall_file,
                     "--out", str(out)]) == 1
        assert json.loads(out.read_text())["adhesion_margin"] == pytest.approx(0.25, abs=1e-3)

    def test_missing_field(self, tmp_path, wall_file, capsys):
        doc = robot_to_doc(reference_robot())
        del doc["mass_kg"]
        out = tmp_path / "rep.json"
        code = main(["feasibility", "--robot", write(tmp_path / "r.json", doc), "--surface", wall_file,
                     "--out", str(out)])
        assert code == 2
        assert "mass_kg" in capsys.readouterr().err
        assert not out.exists()

    def test_unknown_field_rejected(self, tmp_path, wall_file, capsys):
        doc = robot_to_doc(reference_robot())
        doc["mass_lbs"] = 60
        code = main(["feasibility", "--robot", write(tmp_path / "r.json", doc), "--surface", wall_file,
                     "--out", str(tmp_path / "o.json")])
        assert code == 2
        assert "mass_lbs" in capsys.readouterr().err

    def test_floor_reports_infinite_margin_as_string(self, tmp_path, robot_file):
        floor = write(tmp_path / "f.json", {"schema_version": 1, "orientation_deg": 0, "thickness_mm": 10, "friction_mu": 0.6})
        out = tmp_path / "rep.json"
        assert main(["feasibility", "--robot", robot_file, "--surface", floor, "--out", str(out)]) == 0
        assert json.loads(out.read_text())["torque_margin"] == "inf"

    def test_bad_json(self, tmp_path, wall_file):
        bad = tmp_path / "r.json"
        bad.write_text("{not json")
        assert main(["feasibility", "--robot", str(bad), "--surface", wall_file, "--out", str(tmp_path / "o")]) == 2

    def test_missing_file(self, tmp_path, wall_file):
        assert main(["feasibility", "--robot", str(tmp_path / "nope.json"), "--surface", wall_file,
                     "--out", str(tmp_path / "o")]) == 2


class TestExperiment:
    def test_speed(self, tmp_path):
        assert main(["experiment", "speed", "--out", str(tmp_path)]) == 0
        with open(tmp_path / "speed_table.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        cell = next(r for r in rows if float(r["payload_kg"]) == 0 and float(r["soc"]) == 1)
        assert float(cell["speed_mps"]) == 0.55

    def test_thickness(self, tmp_path):
        assert main(["experiment", "thickness", "--out", str(tmp_path)]) == 0
        findings = json.loads((tmp_path / "thickness_findings.json").read_text())
        assert {f["name"]: f["passed"] for f in findings["findings"]}["saturates_at_7mm"] is True

    def test_bogus(self, tmp_path):
        assert main(["experiment", "bogus", "--out", str(tmp_path)]) == 2
        assert not any(tmp_path.iterdir())

    def test_failed_finding_exits_1(self, tmp_path, robot_file):
        # the unrated reference robot is already short of margin with no payload
        assert main(["experiment", "load", "--robot", robot_file, "--out", str(tmp_path)]) == 1

    def test_rectangular_and_reproducible(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["experiment", "load", "--out", str(a)]) == 0
        assert main(["experiment", "load", "--out", str(b)]) == 0
        for name in ("load_table.csv", "load_findings.json"):
            assert (a / name).read_bytes() == (b / name).read_bytes()
        with open(a / "load_table.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["payload_kg", "speed_mps", "adhesion_margin", "contact", "stable"]
        assert len(rows) == 9 and all(len(r) == 5 for r in rows)

    def test_calibration_file(self, tmp_path):
        cal = write(tmp_path / "cal.json", {"schema_version": 1, "v_max_mps": 0.6})
        out = tmp_path / "o"
        assert main(["experiment", "speed", "--calibration", cal, "--out", str(out)]) == 0
        assert "\n0,1,0.6," in (out / "speed_table.csv").read_text()

    def test_bad_calibration(self, tmp_path):
        cal = write(tmp_path / "cal.json", {"schema_version": 1, "batt_floor": 3})
        assert main(["experiment", "speed", "--calibration", cal, "--out", str(tmp_path / "o")]) == 2

    def test_bad_dt(self, tmp_path):
        assert main(["experiment", "maneuver", "--dt", "0", "--out", str(tmp_path / "o")]) == 2


def world_doc(orientation=0.0):
    return {
        "schema_version": 1,
        "patches": [{"id": "p", "orientation_deg": orientation, "thickness_mm": 10, "friction_mu": 0.6,
                     "width_m": 2, "height_m": 2}],
    }


class TestSimulate:
    def test_straight_path(self, tmp_path, robot_file):
        world = write(tmp_path / "w.json", world_doc())
        path = write(tmp_path / "p.json", {"schema_version": 1, "waypoints": [[0, 0.5], [1, 0.5]],
                                            "controller": {"speed_mps": 0.3}})
        out = tmp_path / "traj.json"
        assert main(["simulate", "--robot", robot_file, "--world", world, "--path", path, "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["summary"]["total_time"] == pytest.approx(1 / 0.3, abs=0.05)
        assert doc["summary"]["completed"] is True

    def test_ceiling_weak_magnets(self, tmp_path):
        robot = robot_to_doc(reference_robot())
        robot["wheels"]["flux_density_T"] = 0.3
        world = write(tmp_path / "w.json", world_doc(180.0))
        path = write(tmp_path / "p.json", {"schema_version": 1, "waypoints": [[0, 0.5], [1, 0.5]]})
        out = tmp_path / "traj.json"
        code = main(["simulate", "--robot", write(tmp_path / "r.json", robot), "--world", world,
                     "--path", path, "--out", str(out)])
        assert code == 1
        assert json.loads(out.read_text())["samples"][-1]["status"] == "PullOff"

    def test_zero_dt(self, tmp_path, robot_file):
        world = write(tmp_path / "w.json", world_doc())
        path = write(tmp_path / "p.json", {"schema_version": 1, "waypoints": [[0, 0], [1, 0]]})
        out = tmp_path / "traj.json"
        assert main(["simulate", "--robot", robot_file, "--world", world, "--path", path, "--dt", "0",
                     "--out", str(out)]) == 2
        assert not out.exists()

    def test_path_needs_waypoints_or_command(self, tmp_path, robot_file):
        world = write(tmp_path / "w.json", world_doc())
        path = write(tmp_path / "p.json", {"schema_version": 1})
        assert main(["simulate", "--robot", robot_file, "--world", world, "--path", path,
                     "--out", str(tmp_path / "t.json")]) == 2

    def test_bundled_corner_climb(self, tmp_path):
        out = tmp_path / "t.json"
        code = main(["simulate", "--robot", str(CONFIGS / "robot_reference.json"),
                     "--world", str(CONFIGS / "world_floor_wall.json"),
                     "--path", str(CONFIGS / "path_climb.json"), "--out", str(out)])
        assert code == 0
        ids = {s["surface_id"] for s in json.loads(out.read_text())["samples"]}
        assert ids == {"floor", "wall"}

    def test_reproducible(self, tmp_path):
        args = ["simulate", "--robot", str(CONFIGS / "robot_reference.json"),
                "--world", str(CONFIGS / "world_floor_wall.json"), "--path", str(CONFIGS / "path_square.json")]
        assert main(args + ["--out", str(tmp_path / "a.json")]) == 0
        assert main(args + ["--out", str(tmp_path / "b.json")]) == 0
        assert sha(tmp_path / "a.json") == sha(tmp_path / "b.json")


class TestDesign:
    def test_reference_defaults(self, tmp_path):
        out = tmp_path / "d.json"
        assert main(["design", "--requirements", str(CONFIGS / "requirements_reference.json"), "--out", str(out)]) == 0
        rep = json.loads(out.read_text())
        assert rep["required_adhesion_per_wheel"] == pytest.approx(674.45, abs=0.05)
        assert rep["required_torque"] == pytest.approx(80.94, abs=0.01)

    def test_unsatisfiable(self, tmp_path, capsys):
        req = write(tmp_path / "r.json", {"schema_version": 1, "payload_kg": 500, "robot_mass_kg": 27.5,
                                          "wheel_radius_m": 0.1})
        out = tmp_path / "d.json"
        assert main(["design", "--requirements", req, "--out", str(out)]) == 1
        assert "NoSuitableMotor" in capsys.readouterr().err
        assert any("NoSuitableMotor" in n for n in json.loads(out.read_text())["notes"])

    def test_empty_catalog(self, tmp_path):
        cat = tmp_path / "c.csv"
        cat.write_text("")
        assert main(["design", "--requirements", str(CONFIGS / "requirements_reference.json"),
                     "--catalog", str(cat), "--out", str(tmp_path / "d.json")]) == 2


def test_usage_errors_exit_2():
    assert main([]) == 2
    assert main(["feasibility"]) == 2


def test_defaults_file_roundtrip(tmp_path):
    out = tmp_path / "robot.json"
    assert main(["defaults", "--out", str(out)]) == 0
    assert json.loads(out.read_text()) == json.loads((CONFIGS / "robot_reference.json").read_text())
