"""测试命令行界面"""

import csv
import json

import pytest

from pursuit_game.cli import CLIApplication, round_floats
from pursuit_game.config import preset_scenario, write_scenario_file
from pursuit_game.models import TRAJECTORY_COLUMNS, ValueGradient


@pytest.fixture
def app(quiet_console):
    return CLIApplication(console=quiet_console)


def _read_json(path):
    return json.loads(path.read_text(encoding="utf-8"))


class TestSolveCommand:
    """测试 solve 子命令"""

    def test_scenario1(self, app, tmp_path):
        code = app.run(["solve", "--preset", "scenario1", "--out", str(tmp_path)])
        assert code == 0
        record = _read_json(tmp_path / "solution.json")
        assert record["phase"] == "PreSaturation"
        assert record["t_f"] == pytest.approx(2.437, abs=1e-3)
        assert record["command"]["a_P"] == 1.0

    def test_scenario2(self, app, tmp_path):
        code = app.run(["solve", "--preset", "scenario2", "--out", str(tmp_path)])
        assert code == 0
        record = _read_json(tmp_path / "solution.json")
        assert record["phase"] == "PostSaturation"
        assert record["t_f"] == pytest.approx(5.407, abs=1e-3)
        assert record["t_theta_star"] < record["t_f"]

    def test_config_file(self, app, tmp_path):
        scenario = preset_scenario("scenario2", output_path=str(tmp_path / "out"))
        config = write_scenario_file(scenario, tmp_path / "scenario.env")
        assert app.run(["solve", "--config", str(config)]) == 0
        record = _read_json(tmp_path / "out" / "solution.json")
        assert record["t_f"] == pytest.approx(5.407, abs=1e-3)

    def test_slower_pursuer_in_config(self, app, tmp_path):
        """v̄P ≤ v̄E 的场景文件以退出码 1 结束"""
        config = tmp_path / "bad.env"
        config.write_text(
            "x_P=0\ny_P=0\nv_Px=0\nv_Py=0\nx_E=5\ny_E=5\n"
            "a_P_max=1\nv_P_max=0.4\nv_E_max=0.5\n",
            encoding="utf-8",
        )
        code = app.run(["solve", "--config", str(config), "--out", str(tmp_path)])
        assert code == 1
        assert not (tmp_path / "solution.json").exists()

    def test_config_and_preset_conflict(self, app, tmp_path):
        config = write_scenario_file(
            preset_scenario("scenario1"), tmp_path / "scenario.env"
        )
        code = app.run(["solve", "--config", str(config), "--preset", "scenario1"])
        assert code == 1

    def test_missing_config_file(self, app, tmp_path):
        assert app.run(["solve", "--config", str(tmp_path / "nope.env")]) == 1

    def test_no_command(self, app):
        assert app.run([]) == 1


class TestSimulateCommand:
    """测试 simulate 子命令"""

    def test_trajectory_csv(self, app, tmp_path):
        dt = 1e-3
        argv = ["simulate", "--preset", "scenario1", "--dt", str(dt)]
        assert app.run(argv + ["--out", str(tmp_path)]) == 0
        summary = _read_json(tmp_path / "summary.json")
        assert summary["outcome"] == "Captured"
        with open(tmp_path / "trajectory.csv", newline="", encoding="utf-8") as f:
            rows = list(csv.reader(f))
        assert rows[0] == list(TRAJECTORY_COLUMNS)
        assert rows[0] == (
            "t,x_P,y_P,v_Px,v_Py,x_E,y_E,a_P,theta_P,v_E,theta_E".split(",")
        )
        assert len(rows) - 1 == round(summary["capture_time"] / dt) + 1
        assert summary["samples"] == len(rows) - 1

    def test_pure_pursuit_times_out(self, app, tmp_path):
        code = app.run(
            [
                "simulate",
                "--preset",
                "scenario1",
                "--pursuer",
                "pure_pursuit",
                "--replan",
                "every_step",
                "--dt",
                "0.01",
                "--horizon",
                "5",
                "--out",
                str(tmp_path),
            ]
        )
        assert code == 0
        summary = _read_json(tmp_path / "summary.json")
        assert summary["outcome"] == "TimedOut"
        assert summary["capture_time"] is None
        assert summary["policies"] == "pure_pursuit vs optimal"


class TestVerifyCommand:
    """测试 verify 子命令"""

    def test_small_sweep(self, app, tmp_path):
        code = app.run(["verify", "--sweep-size", "2", "--out", str(tmp_path)])
        assert code == 0
        record = _read_json(tmp_path / "verification.json")
        assert record["states_checked"] == {"PreSaturation": 2, "PostSaturation": 2}
        assert record["passed"] is True
        assert record["continuity"]["crossing"] == pytest.approx(1.714, abs=1e-2)

    def test_output_is_deterministic(self, app, tmp_path):
        first, second = tmp_path / "a", tmp_path / "b"
        for out in (first, second):
            code = app.run(
                ["verify", "--sweep-size", "2", "--seed", "3", "--out", str(out)]
            )
            assert code == 0
        assert (first / "verification.json").read_bytes() == (
            second / "verification.json"
        ).read_bytes()

    def test_tolerance_failure_exit_code(self, app, tmp_path, mocker):
        """梯度被破坏时退出码为 2，报告仍然写出"""
        mocker.patch(
            "pursuit_game.core.verification.gradient_phase1",
            return_value=ValueGradient.from_sequence([0.0] * 6),
        )
        code = app.run(["verify", "--sweep-size", "2", "--out", str(tmp_path)])
        assert code == 2
        record = _read_json(tmp_path / "verification.json")
        assert record["passed"] is False
        assert "residual" in record["failures"]


class TestOtherCommands:
    def test_reachable(self, app, tmp_path):
        code = app.run(
            ["reachable", "--preset", "oval", "--time", "8", "--out", str(tmp_path)]
        )
        assert code == 0
        lines = (tmp_path / "reachable.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0] == "theta_P,x,y"
        assert len(lines) == 721

    def test_reachable_negative_time(self, app, tmp_path):
        code = app.run(
            ["reachable", "--preset", "oval", "--time", "-1", "--out", str(tmp_path)]
        )
        assert code == 1

    @pytest.mark.slow
    def test_table1(self, app, tmp_path):
        code = app.run(["table1", "--dt", "0.001", "--out", str(tmp_path)])
        assert code == 0
        record = _read_json(tmp_path / "table1.json")
        assert len(record["cells"]) == 6
        assert all(c["passed"] for c in record["cells"])
        evasion = [
            c for c in record["cells"] if c["policies"] == "optimal vs pure_evasion"
        ]
        assert [c["capture_radius"] for c in evasion] == [0.01, 0.01]
        assert [c["simulated"] for c in evasion] == [
            pytest.approx(2.155, abs=5e-3),
            pytest.approx(5.397, abs=5e-3),
        ]


class TestRoundFloats:
    def test_nine_significant_digits(self):
        assert round_floats(1.0 / 3.0) == 0.333333333
        assert round_floats({"a": [2.0 / 3.0, float("inf")]}) == {
            "a": [0.666666667, None]
        }
        assert round_floats("text") == "text"


class TestPackage:
    def test_version(self):
        import pursuit_game

        assert pursuit_game.get_version() == pursuit_game.__version__ == "1.0.0"
        assert "solve" in pursuit_game.__all__
