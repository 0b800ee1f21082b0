import argparse
import sys
from pathlib import Path
from typing import Any, Callable

import yaml
from pydantic import ValidationError

from extremepy.core.conf import RunConfig
from extremepy.core.exceptions import (
    ConfigurationError,
    DegenerateDataError,
    InsufficientDataError,
    InvalidParameterError,
    NumericalFailure,
    UnsupportedModelError,
)
from extremepy.cli.bootstrap import cmd_bootstrap
from extremepy.cli.diagnose import cmd_diagnose
from extremepy.cli.fit import cmd_fit
from extremepy.cli.io import OutputSession
from extremepy.cli.simulate import cmd_simulate
from extremepy.cli.transform_coords import cmd_transform_coords
from extremepy.logging import LOG


EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2

COMMANDS: dict[str, Callable[[RunConfig, OutputSession], Any]] = {
    "fit": cmd_fit,
    "simulate": cmd_simulate,
    "diagnose": cmd_diagnose,
    "transform-coords": cmd_transform_coords,
    "bootstrap": cmd_bootstrap,
}

CONFIG_ERRORS = (ConfigurationError, FileNotFoundError, ValidationError, InvalidParameterError)
NUMERICAL_ERRORS = (NumericalFailure, InsufficientDataError, DegenerateDataError, UnsupportedModelError)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="extremepy", description="空间极值相依模型的拟合, 模拟与诊断")
    subparsers = parser.add_subparsers(dest="command", required=True)

    helps = {
        "fit": "拟合依赖模型",
        "simulate": "从模型模拟",
        "diagnose": "输出 χ_u/η_u 曲线, 极值图与超越概率曲线",
        "transform-coords": "按各向异性参数变换站点坐标",
        "bootstrap": "平稳自助法估计参数不确定性",
    }
    for name, help_text in helps.items():
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument("--config", type=Path, required=True, help="YAML配置文件")
        sub.add_argument("--seed", type=int, default=None, help="随机种子, 覆盖配置文件")
        sub.add_argument("--threads", type=int, default=None, help="最大线程数, 覆盖配置文件")
        sub.add_argument("--out", type=Path, default=None, help="输出目录, 覆盖配置文件")
    return parser


def load_run_config(args: argparse.Namespace) -> RunConfig:
    if not args.config.exists():
        raise FileNotFoundError(f"配置文件不存在: {args.config}")
    with args.config.open("r", encoding="utf-8") as f:
        data = yaml.safe_load(f) or dict()
    if not isinstance(data, dict):
        raise ConfigurationError(f"配置文件 {args.config} 的顶层必须是映射")

    data["command"] = args.command
    overrides = {"seed": args.seed, "threads": args.threads, "out_dir": args.out}
    data.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig.from_dict(data)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    session: OutputSession | None = None
    try:
        config = load_run_config(args)
        session = OutputSession(config.out_dir)
        COMMANDS[args.command](config, session)
    except CONFIG_ERRORS as exc:
        LOG.error(f"{args.command} 配置错误: {exc}")
        if session is not None:
            session.cleanup()
        return EXIT_CONFIG
    except NUMERICAL_ERRORS as exc:
        LOG.error(f"{args.command} 数值计算失败: {type(exc).__name__}: {exc}")
        if session is not None:
            session.cleanup()
        return EXIT_NUMERICAL
    except Exception as exc:
        LOG.exception(f"{args.command} 意外失败: {type(exc).__name__}: {exc}")
        if session is not None:
            session.cleanup()
        return EXIT_NUMERICAL

    LOG.info(f"{args.command} 完成, 输出目录: {config.out_dir}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
