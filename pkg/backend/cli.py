"""命令行接口。

每个子命令对应 ``ExperimentRunner`` 的一个方法，结果默认以 JSON 写到标准输出；
所有可预期的失败都会变成 ``{"error": {...}}`` 对象并返回对应的退出码。
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, NoReturn

from .config import DEFAULT_SEED, OUTPUT_FORMATS, EngineConfig
from .engine.errors import CloneGameError, ContractError
from .engine.interchange import load_state_file
from .engine.runner import ATTACKS, PARALLEL_MODES, ExperimentRunner
from .engine.report import Report


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        raise ContractError(f"{self.prog}: {message}")


def _seed(text: str) -> int:
    return int(text, 0)


def _common_options() -> argparse.ArgumentParser:
    common = _ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=DEFAULT_SEED, help=f"随机种子，默认 {DEFAULT_SEED:#x}")
    common.add_argument("--out", choices=OUTPUT_FORMATS, default="json", help="输出格式")
    common.add_argument("--tol", type=float, default=1e-9, help="数值比较容差")
    common.add_argument("--workers", type=int, default=1, help="并行线程数")
    common.add_argument("--output", type=Path, default=None, help="将结果写入指定文件 (默认输出到标准输出)")
    common.add_argument("--verbose", action="store_true", help="在标准错误上输出运行日志")
    return common


def _build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = _ArgumentParser(
        prog="clonegame",
        description="量子克隆博弈的数值计算与位置验证协议模拟",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    p = sub.add_parser("value", parents=[common], help="EPR 目标的 k 方克隆博弈值")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--witness", action="store_true", help="同时输出达到最优值的态")

    p = sub.add_parser("psi-value", parents=[common], help="任意目标态的博弈值")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--target", type=Path, default=None, help="目标态 JSON 文件")
    p.add_argument("--random", type=int, default=0, help="随机生成的目标态个数")
    p.add_argument("--strategies", type=int, default=0, help="每个目标态比较的随机策略个数")
    p.add_argument("--seesaw-seeds", type=int, default=0)
    p.add_argument("--max-iters", type=int, default=200)

    p = sub.add_parser("eval", parents=[common], help="计算策略文件的获胜概率")
    p.add_argument("--strategy", type=Path, required=True)

    p = sub.add_parser("optimal-state", parents=[common], help="输出最优态或常见命名态及其获胜概率")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--name", default=None, help="ghz / w / guess / all_zero")

    p = sub.add_parser("parallel", parents=[common], help="并行重复的上下界与数值检验")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mode", choices=PARALLEL_MODES, default="bounds")
    p.add_argument("--samples", type=int, default=50, help="brute 模式的随机策略个数")

    p = sub.add_parser("seesaw", parents=[common], help="交替优化下界（启发式）")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--k", type=int, default=None, help="给出时优化 k 方博弈而不是并行重复")
    p.add_argument("--seeds", type=int, default=1)
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("--ancilla-a", type=int, default=2)
    p.add_argument("--ancilla-b", type=int, default=2)

    p = sub.add_parser("qpv", parents=[common], help="路由位置验证协议的 Monte-Carlo 模拟")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--rounds", type=int, default=10_000)
    p.add_argument("--attack", choices=ATTACKS, default="nope_optimal")
    p.add_argument("--strategy", type=Path, default=None, help="custom 攻击的策略文件")
    p.add_argument("--prepare-measure", action="store_true", help="使用 BB84 制备-测量模型")
    p.add_argument("--transcript", action="store_true", help="输出逐轮记录")

    p = sub.add_parser("rom", parents=[common], help="随机预言机版本的归约实验")
    p.add_argument("--adversary", default="all")
    p.add_argument("--ell", type=int, default=8)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--q-max", type=int, default=4)
    p.add_argument("--runs", type=int, default=10_000)

    p = sub.add_parser("epsilon", parents=[common], help="随机预言机版本的可靠性误差")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    return parser


def _dispatch(runner: ExperimentRunner, args: argparse.Namespace) -> Report:
    command = args.command
    if command == "value":
        return runner.value(args.k, witness=args.witness)
    if command == "psi-value":
        target = load_state_file(args.target) if args.target is not None else None
        return runner.psi_value(
            args.k,
            target=target,
            random_targets=args.random,
            strategies=args.strategies,
            seesaw_seeds=args.seesaw_seeds,
            max_iters=args.max_iters,
        )
    if command == "eval":
        return runner.evaluate(args.strategy)
    if command == "optimal-state":
        return runner.optimal_state(args.k, args.name)
    if command == "parallel":
        return runner.parallel(args.n, args.mode, args.samples)
    if command == "seesaw":
        return runner.seesaw(
            n=args.n,
            k=args.k,
            seeds=args.seeds,
            max_iters=args.max_iters,
            ancilla_a=args.ancilla_a,
            ancilla_b=args.ancilla_b,
        )
    if command == "qpv":
        return runner.qpv(
            n=args.n,
            rounds=args.rounds,
            attack=args.attack,
            strategy_path=args.strategy,
            purified=not args.prepare_measure,
            transcript=args.transcript,
        )
    if command == "rom":
        return runner.rom(args.adversary, ell=args.ell, n=args.n, q_max=args.q_max, runs=args.runs)
    return runner.epsilon(args.q, args.ell, args.n)


def _emit(text: str, output: Path | None) -> None:
    if output is None:
        sys.stdout.write(text)
        return
    with output.open("w", encoding="utf-8") as f:
        f.write(text)


def main(argv: List[str] | None = None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        if args.verbose:
            logging.basicConfig(level=logging.INFO, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
        config = EngineConfig(seed=args.seed, tol=args.tol, workers=args.workers, output=args.out)
        report = _dispatch(ExperimentRunner(config), args)
        _emit(report.render(config.output), args.output)
    except CloneGameError as exc:
        sys.stdout.write(json.dumps(exc.to_dict(), ensure_ascii=False) + "\n")
        return exc.exit_code
    return 0


if __name__ == "__main__":  # pragma: no cover - CLI 入口
    raise SystemExit(main())
