"""命令行界面模块

使用 Rich 库输出表格，结果以 JSON / CSV 写入输出目录
"""

import argparse
import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import ValidationError as PydanticValidationError
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.table import Table
from rich.text import Text

from .config import (
    PRESETS,
    build_scenario,
    get_config,
    load_scenario_file,
    preset_scenario,
)
from .core.phase2 import min_semi_axis, oval_center, reachable_set_boundary
from .core.simulation import capture_time_table, run_game, table_tolerance
from .core.solver import solve
from .core.verification import check_report, run_verification
from .exceptions import (
    PursuitGameException,
    ToleranceError,
    ValidationError,
    exit_code_for,
    wrap_exception,
)
from .models import (
    TRAJECTORY_COLUMNS,
    CaptureTimeCell,
    EvaderPolicy,
    Phase,
    PolicyKind,
    PursuerPolicy,
    ReplanMode,
    ScenarioConfig,
    SolverConfig,
    VerificationReport,
)

logger = logging.getLogger("pursuit_game")

# 所有浮点输出保留 9 位有效数字
FLOAT_FORMAT = "%.9g"


def round_floats(value: Any) -> Any:
    """递归地把浮点数截到 9 位有效数字，非有限值写成 null"""
    if isinstance(value, float):
        if not math.isfinite(value):
            return None
        return float(FLOAT_FORMAT % value)
    if isinstance(value, dict):
        return {k: round_floats(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [round_floats(v) for v in value]
    return value


@wrap_exception
def write_json(data: Dict[str, Any], path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(round_floats(data), indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    return path


@wrap_exception
def write_csv(rows: np.ndarray, columns: List[str], path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(
        path,
        rows,
        fmt=FLOAT_FORMAT,
        delimiter=",",
        header=",".join(columns),
        comments="",
    )
    return path


def setup_logging(verbose: bool, debug_mode: bool = False) -> None:
    """在 pursuit_game 日志器上安装 RichHandler"""
    level = logging.DEBUG if verbose or debug_mode else logging.WARNING
    for handler in list(logger.handlers):
        if isinstance(handler, RichHandler):
            logger.removeHandler(handler)
    handler = RichHandler(console=Console(stderr=True), show_path=False)
    handler.setFormatter(logging.Formatter("%(message)s"))
    logger.addHandler(handler)
    logger.setLevel(level)


class CLIApplication:
    """命令行应用程序"""

    def __init__(self, console: Optional[Console] = None) -> None:
        self.console = console or Console()
        self.err_console = Console(stderr=True)

    def create_parser(self) -> argparse.ArgumentParser:
        """创建命令行参数解析器"""
        common = argparse.ArgumentParser(add_help=False)
        common.add_argument("--config", help="key=value 场景文件路径")
        common.add_argument(
            "--preset",
            choices=sorted(PRESETS),
            help="预置场景 (默认: scenario1，与 --config 互斥)",
        )
        common.add_argument("--dt", type=float, help="仿真步长")
        common.add_argument("--horizon", type=float, help="仿真时域")
        common.add_argument("--seed", type=int, help="随机扫描种子")
        common.add_argument("--out", help="输出目录 (默认: 场景的 output_path)")
        common.add_argument("-v", "--verbose", action="store_true", help="显示详细日志")

        parser = argparse.ArgumentParser(
            prog="pursuit-game",
            description="速度受限双积分追击者与单积分逃逸者的追逃博弈求解器",
            formatter_class=argparse.RawDescriptionHelpFormatter,
            epilog="""
使用示例:
  pursuit-game solve --preset scenario1
  pursuit-game simulate --preset scenario2 --dt 1e-3 --out results
  pursuit-game simulate --preset scenario1 --pursuer pure_pursuit --replan every_step
  pursuit-game verify --seed 42 --sweep-size 50
  pursuit-game table1 --dt 1e-3
  pursuit-game reachable --preset oval --time 8
            """,
        )
        parser.add_argument(
            "--version", action="version", version="%(prog)s 1.0.0"
        )
        sub = parser.add_subparsers(dest="command", metavar="COMMAND")

        sub.add_parser("solve", parents=[common], help="求解初始状态的最优策略")

        simulate = sub.add_parser("simulate", parents=[common], help="运行闭环仿真")
        simulate.add_argument(
            "--pursuer", choices=[p.value for p in PursuerPolicy], help="追击者策略"
        )
        simulate.add_argument(
            "--evader", choices=[e.value for e in EvaderPolicy], help="逃逸者策略"
        )
        simulate.add_argument(
            "--replan", choices=[r.value for r in ReplanMode], help="最优玩家重规划方式"
        )

        verify = sub.add_parser("verify", parents=[common], help="运行梯度与 HJI 核验")
        verify.add_argument("--sweep-size", type=int, help="每个阶段的随机状态数")
        verify.add_argument("--workers", type=int, help="并行进程数")

        sub.add_parser("table1", parents=[common], help="复现捕获时间对照表")

        reachable = sub.add_parser(
            "reachable", parents=[common], help="输出追击者可达集边界"
        )
        reachable.add_argument("--time", type=float, required=True, help="时刻 t")
        reachable.add_argument("--samples", type=int, default=720, help="方向采样数")

        return parser

    # ------------------------------------------------------------------
    # 配置
    # ------------------------------------------------------------------

    def load_scenario(self, args: argparse.Namespace) -> ScenarioConfig:
        """按 --config / --preset 载入场景并应用命令行覆盖"""
        if args.config and args.preset:
            raise ValidationError(
                "--config and --preset are mutually exclusive", field="preset"
            )
        if args.config:
            scenario = load_scenario_file(args.config)
        else:
            scenario = preset_scenario(args.preset or "scenario1")

        overrides: Dict[str, Any] = {}
        for key in ("dt", "horizon", "seed"):
            if getattr(args, key, None) is not None:
                overrides[key] = getattr(args, key)
        if getattr(args, "sweep_size", None) is not None:
            overrides["sweep_size"] = args.sweep_size
        if getattr(args, "out", None):
            overrides["output_path"] = args.out
        if getattr(args, "replan", None):
            overrides["replan"] = ReplanMode(args.replan)
        if getattr(args, "pursuer", None) or getattr(args, "evader", None):
            overrides["policies"] = PolicyKind(
                pursuer=PursuerPolicy(args.pursuer or scenario.policies.pursuer),
                evader=EvaderPolicy(args.evader or scenario.policies.evader),
            )
        if not overrides:
            return scenario
        fields = {
            "initial_state": scenario.initial_state,
            "params": scenario.params,
            "policies": scenario.policies,
            "dt": scenario.dt,
            "horizon": scenario.horizon,
            "replan": scenario.replan,
            "seed": scenario.seed,
            "sweep_size": scenario.sweep_size,
            "output_path": scenario.output_path,
        }
        fields.update(overrides)
        return build_scenario(**fields)

    def solver_config(
        self, scenario: ScenarioConfig, args: argparse.Namespace
    ) -> SolverConfig:
        """全局配置叠加场景中的仿真与扫描设置"""
        values = get_config().model_dump()
        values.update(
            dt=scenario.dt,
            horizon=scenario.horizon,
            seed=scenario.seed,
            sweep_size=scenario.sweep_size,
            capture_radius=scenario.params.capture_radius,
            tol_speed=scenario.params.tol_speed,
        )
        if getattr(args, "workers", None) is not None:
            values["workers"] = args.workers
        return SolverConfig(**values)

    # ------------------------------------------------------------------
    # 子命令
    # ------------------------------------------------------------------

    def cmd_solve(self, scenario: ScenarioConfig, cfg: SolverConfig) -> int:
        result = solve(scenario.initial_state, scenario.params, cfg)
        sol = result.solution
        record = {
            "t_f": sol.t_f,
            "phase": sol.phase.value,
            "theta_P_star": sol.theta_P_star,
            "theta_E_star": sol.theta_E_star,
            "capture_point": list(sol.capture_point),
            "t_theta_star": sol.t_theta_star,
            "command": result.command.model_dump(),
            "candidates_examined": [list(pair) for pair in result.candidates_examined],
        }
        path = write_json(record, Path(scenario.output_path) / "solution.json")

        table = Table(title="最优策略", show_header=False, border_style="dim")
        table.add_column("属性", style="bold cyan")
        table.add_column("值", style="white")
        table.add_row("t_f", f"{sol.t_f:.9g}")
        table.add_row("phase", sol.phase.value)
        table.add_row("theta_P*", f"{sol.theta_P_star:.9g}")
        table.add_row("theta_E*", f"{sol.theta_E_star:.9g}")
        table.add_row(
            "capture point", "({:.9g}, {:.9g})".format(*sol.capture_point)
        )
        table.add_row("t_theta*", f"{sol.t_theta_star:.9g}")
        table.add_row("candidates", str(len(result.candidates_examined)))
        self.console.print(table)
        self.console.print(f"📄 {path}")
        return 0

    def cmd_simulate(self, scenario: ScenarioConfig, cfg: SolverConfig) -> int:
        trajectory = run_game(
            scenario.initial_state,
            scenario.params,
            scenario.policies,
            scenario.dt,
            scenario.horizon,
            scenario.replan,
            cfg,
        )
        out = Path(scenario.output_path)
        csv_path = write_csv(
            trajectory.to_rows(), list(TRAJECTORY_COLUMNS), out / "trajectory.csv"
        )
        summary = {
            "policies": scenario.policies.label,
            "replan": scenario.replan.value,
            "dt": scenario.dt,
            "horizon": scenario.horizon,
            "outcome": trajectory.outcome.kind.value,
            "capture_time": trajectory.capture_time,
            "miss_distance": trajectory.outcome.miss_distance,
            "samples": len(trajectory.samples),
            "separation_trend": trajectory.separation_trend(),
            "diverging": trajectory.is_diverging(),
        }
        json_path = write_json(summary, out / "summary.json")

        style = "green" if trajectory.captured else "yellow"
        text = Text(f"{scenario.policies.label}: ", style="bold")
        text.append(trajectory.outcome.kind.value, style=f"bold {style}")
        text.append(f" at t={trajectory.outcome.time:.9g}")
        self.console.print(Panel(text, border_style=style))
        self.console.print(f"📄 {csv_path}\n📄 {json_path}")
        return 0

    def cmd_verify(self, scenario: ScenarioConfig, cfg: SolverConfig) -> int:
        report = run_verification(config=cfg)
        out = Path(scenario.output_path)
        path = write_json(self._report_record(report), out / "verification.json")
        self.print_report(report)
        self.console.print(f"📄 {path}")
        check_report(report)
        return 0

    def cmd_table1(self, scenario: ScenarioConfig, cfg: SolverConfig) -> int:
        cells = capture_time_table(scenario.dt, scenario.horizon, cfg)
        record = {
            "dt": scenario.dt,
            "horizon": scenario.horizon,
            "tolerance": table_tolerance(scenario.dt),
            "cells": [self._cell_record(c) for c in cells],
        }
        path = write_json(record, Path(scenario.output_path) / "table1.json")
        self.print_table(cells)
        self.console.print(f"📄 {path}")
        failed = [c for c in cells if not c.passed]
        if failed:
            raise ToleranceError(
                f"{len(failed)} capture-time cells outside tolerance",
                check="table1",
                context={"cells": [f"{c.scenario}/{c.policies.label}" for c in failed]},
            )
        return 0

    def cmd_reachable(
        self, scenario: ScenarioConfig, args: argparse.Namespace
    ) -> int:
        state, params = scenario.initial_state, scenario.params
        boundary = reachable_set_boundary(state, args.time, params, args.samples)
        out = Path(scenario.output_path)
        path = write_csv(boundary, ["theta_P", "x", "y"], out / "reachable.csv")
        center = oval_center(state, params)
        self.console.print(
            f"c_P' = ({center[0]:.9g}, {center[1]:.9g}), "
            f"d_Pmin = {min_semi_axis(state, args.time, params):.9g}"
        )
        self.console.print(f"📄 {path}")
        return 0

    # ------------------------------------------------------------------
    # 输出
    # ------------------------------------------------------------------

    @staticmethod
    def _cell_record(cell: CaptureTimeCell) -> Dict[str, Any]:
        return {
            "scenario": cell.scenario,
            "policies": cell.policies.label,
            "replan": cell.replan.value,
            "reference": cell.reference,
            "outcome": cell.outcome.kind.value,
            "simulated": cell.simulated,
            "error": cell.error,
            "tolerance": cell.tolerance,
            "diverging": cell.diverging,
            "capture_radius": cell.capture_radius,
            "passed": cell.passed,
        }

    @staticmethod
    def _report_record(report: VerificationReport) -> Dict[str, Any]:
        record: Dict[str, Any] = {
            "seed": report.seed,
            "states_checked": {
                phase.value: report.count(phase) for phase in Phase
            },
            "max_residual": report.max_residual,
            "max_gradient_error": report.max_gradient_error,
            "monitor_disagreements": report.monitor_disagreements,
            "max_monitor_excess": report.max_monitor_excess,
            "continuity": None,
            "failures": report.failures(),
            "passed": report.passed,
        }
        if report.continuity is not None:
            c = report.continuity
            record["continuity"] = {
                "crossing": c.crossing,
                "gap": c.gap,
                "t_f_pre": c.t_f_pre,
                "t_f_post": c.t_f_post,
                "jump": c.jump,
                "theta_gap": c.theta_gap,
            }
        for key in ("residual", "gradient_error"):
            worst = report.worst(key)
            record[f"worst_{key}_state"] = (
                list(worst.state.as_tuple()) if worst is not None else None
            )
        return record

    def print_report(self, report: VerificationReport) -> None:
        table = Table(title="核验结果", border_style="dim")
        table.add_column("检查项", style="bold cyan")
        table.add_column("值", justify="right")
        table.add_column("容差", justify="right")
        for phase in Phase:
            table.add_row(f"states ({phase.value})", str(report.count(phase)), "")
        table.add_row(
            "max |HJI residual|",
            f"{report.max_residual:.3g}",
            f"{report.residual_tol:g}",
        )
        table.add_row(
            "max gradient error",
            f"{report.max_gradient_error:.3g}",
            f"{report.gradient_tol:g}",
        )
        if report.continuity is not None:
            table.add_row(
                "continuity jump",
                f"{report.continuity.jump:.3g}",
                f"{report.jump_tol:g}",
            )
            table.add_row(
                "theta gap",
                f"{report.continuity.theta_gap:.3g}",
                f"{report.theta_tol:g}",
            )
        table.add_row(
            "monitor disagreements", str(report.monitor_disagreements), "report only"
        )
        self.console.print(table)
        if report.passed:
            self.console.print("✅ passed")
        else:
            self.console.print("❌ failed: " + ", ".join(report.failures()))

    def print_table(self, cells: List[CaptureTimeCell]) -> None:
        table = Table(title="捕获时间", border_style="dim")
        table.add_column("场景", style="bold cyan")
        table.add_column("策略")
        table.add_column("参考值", justify="right")
        table.add_column("仿真值", justify="right")
        table.add_column("容差", justify="right")
        table.add_column("结果")
        for cell in cells:
            reference = "+∞" if cell.reference is None else f"{cell.reference:.4g}"
            if cell.simulated is None:
                simulated = "TimedOut" + (" (diverging)" if cell.diverging else "")
            else:
                simulated = f"{cell.simulated:.9g}"
            table.add_row(
                cell.scenario,
                cell.policies.label,
                reference,
                simulated,
                f"{cell.tolerance:g}",
                "[green]pass[/green]" if cell.passed else "[red]fail[/red]",
            )
        self.console.print(table)

    def print_error(self, error: str) -> None:
        """打印错误信息到 stderr"""
        error_text = Text(f"❌ 错误: {error}", style="bold red")
        self.err_console.print(Panel(error_text, border_style="red"))

    # ------------------------------------------------------------------

    def run(self, argv: Optional[List[str]] = None) -> int:
        """主入口函数，返回退出码"""
        parser = self.create_parser()
        args = parser.parse_args(argv)
        if not args.command:
            parser.print_help()
            return 1

        setup_logging(args.verbose)
        try:
            scenario = self.load_scenario(args)
            cfg = self.solver_config(scenario, args)
            if cfg.debug_mode:
                setup_logging(True, cfg.debug_mode)
            if args.command == "solve":
                return self.cmd_solve(scenario, cfg)
            if args.command == "simulate":
                return self.cmd_simulate(scenario, cfg)
            if args.command == "verify":
                return self.cmd_verify(scenario, cfg)
            if args.command == "table1":
                return self.cmd_table1(scenario, cfg)
            return self.cmd_reachable(scenario, args)
        except PursuitGameException as e:
            self.print_error(str(e))
            return exit_code_for(e)
        except PydanticValidationError as e:
            self.print_error(str(e))
            return 1


def main(argv: Optional[List[str]] = None) -> int:
    """CLI 入口点"""
    app = CLIApplication()
    try:
        return app.run(argv)
    except KeyboardInterrupt:
        app.print_error("interrupted")
        return 1


if __name__ == "__main__":
    sys.exit(main())
