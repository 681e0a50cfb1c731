"""实验运行入口：每个子命令对应一个方法，统一返回 ``Report``。"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Dict, List, Optional

from ..config import DEFAULT_CONFIG, EngineConfig
from .adversaries import available_adversaries, get_adversary
from .cloning_game import (
    GameSpec,
    Strategy,
    closed_form_value,
    evaluate_strategy,
    game_value,
    named_state,
    optimal_state,
    random_strategy,
    seesaw_cloning,
)
from .errors import AttackStructureError, ContractError
from .interchange import NOPE_MODEL, load_strategy_file, state_to_dict
from .oracle import soundness_epsilon
from .parallel import (
    ParallelSpec,
    PermutationFamily,
    analytic_upper_bound,
    lemma2_bound,
    overlap_bound,
    parallel_projector,
    projector_sum_norm,
    random_parallel_strategy,
    relaxed_overlap,
    seesaw_best,
    tensor_lower_bound,
)
from .qpv import AttackModel, NoPEAttack, RoundConfig, nope_attack_strategy, random_nope_attack, simulate
from .report import Report
from .rom_game import HRoutingConfig, compare_games
from .seesaw import SeesawConfig
from .tensor import RegisterLayout, StateVector, random_state
from .utils import bitstrings, derive_rng, map_ordered

logger = logging.getLogger(__name__)

PARALLEL_MODES = ("bounds", "brute", "overlap", "lemma")
ATTACKS = ("honest", "nope_optimal", "random", "custom")
BRUTE_MAX_N = 3
SEESAW_RECOVERY_TOL = 1e-5

# derive_rng 的子流编号
_PSI_TARGET, _PSI_STRATEGY, _BRUTE, _QPV_ATTACK = range(1, 5)


class ExperimentRunner:
    def __init__(self, config: EngineConfig | None = None):
        self.config = config or DEFAULT_CONFIG

    def value(self, k: int, witness: bool = False) -> Report:
        logger.info("value k=%d", k)
        spec = GameSpec(k)
        report = game_value(spec)
        closed = closed_form_value(k)
        summary: Dict[str, object] = {"k": k, **report.to_dict(include_witness=witness)}
        summary["closed_form"] = closed
        summary["matches_closed_form"] = abs(report.value - closed) <= self.config.tol
        return Report("value", summary)

    def psi_value(
        self,
        k: int,
        target: Optional[StateVector] = None,
        random_targets: int = 0,
        strategies: int = 0,
        seesaw_seeds: int = 0,
        max_iters: int = 200,
    ) -> Report:
        """任意目标态的博弈值，可选地与随机策略和 see-saw 结果比较。"""

        logger.info("psi-value k=%d targets=%d", k, random_targets)
        if target is None and random_targets < 1:
            raise ContractError("需要给出目标态文件或 --random 个数")
        if target is not None:
            targets = [(0, target)]
        else:
            layout = RegisterLayout.qubits("R", "P")
            targets = [(i, random_state(layout, derive_rng(self.config.seed, _PSI_TARGET, i))) for i in range(random_targets)]

        def one(item) -> Dict[str, object]:
            index, state = item
            spec = GameSpec(k, state)
            value = game_value(spec).value
            row: Dict[str, object] = {"index": index, "value": value}
            if strategies:
                best = max(
                    evaluate_strategy(
                        spec,
                        random_strategy(spec, derive_rng(self.config.seed, _PSI_STRATEGY, index, j), (1 + j % 2,) * k),
                    )
                    for j in range(strategies)
                )
                row["random_best"] = best
                row["dominated"] = best <= value + self.config.tol
            if seesaw_seeds:
                cfg = SeesawConfig(ancilla_dim_a=2, max_iters=max_iters, seed=self.config.seed)
                best_seesaw = max(seesaw_cloning(spec, cfg, s).value for s in range(seesaw_seeds))
                row["seesaw"] = best_seesaw
                row["recovered"] = abs(best_seesaw - value) <= SEESAW_RECOVERY_TOL
            return row

        rows = map_ordered(one, targets, self.config.workers)
        summary: Dict[str, object] = {"k": k, "targets": len(rows)}
        if strategies:
            summary["all_dominated"] = all(row["dominated"] for row in rows)
        if seesaw_seeds:
            summary["recovered"] = sum(bool(row["recovered"]) for row in rows)
        if target is not None:
            summary.update(rows[0])
            rows = []
        return Report("psi-value", summary, rows)

    def evaluate(self, path: Path) -> Report:
        logger.info("eval %s", path)
        spec, strategy, model = load_strategy_file(path)
        summary: Dict[str, object] = {
            "k": spec.k,
            "value": evaluate_strategy(spec, strategy),
            "game_value": game_value(spec).value,
            "model": model,
        }
        if model == NOPE_MODEL:
            NoPEAttack.from_strategy(spec, strategy)
            summary["nope_valid"] = True
        return Report("eval", summary)

    def optimal_state(self, k: int, name: Optional[str] = None) -> Report:
        logger.info("optimal-state k=%d name=%s", k, name)
        state = optimal_state(k) if name is None else named_state(name, k)
        spec = GameSpec(k)
        summary = {
            "k": k,
            "name": name or "optimal",
            "value": evaluate_strategy(spec, Strategy.trivial(spec, state)),
            "state": state_to_dict(state),
        }
        return Report("optimal-state", summary)

    def parallel(self, n: int, mode: str = "bounds", samples: int = 50) -> Report:
        logger.info("parallel n=%d mode=%s", n, mode)
        if mode not in PARALLEL_MODES:
            raise ContractError(f"未知的模式 {mode!r}，可选 {list(PARALLEL_MODES)}")
        spec = ParallelSpec(n)
        upper = analytic_upper_bound(n)
        lower, _ = tensor_lower_bound(n)
        if mode == "bounds":
            summary = {
                "n": n,
                "lower": lower,
                "upper": upper.value,
                "binomial_sum": upper.binomial_sum,
                "identity_gap": abs(upper.closed_form - upper.binomial_sum),
            }
            return Report("parallel", summary)

        if n > BRUTE_MAX_N:
            raise ContractError(f"模式 {mode} 只支持 n ≤ {BRUTE_MAX_N}，实际 n={n}")

        if mode == "brute":
            _, strategy = tensor_lower_bound(n)
            assert strategy is not None
            values = [
                random_parallel_strategy(spec, derive_rng(self.config.seed, _BRUTE, j)).value(spec) for j in range(samples)
            ]
            random_max = max(values) if values else None
            summary = {
                "n": n,
                "lower": lower,
                "upper": upper.value,
                "tensored": strategy.value(spec),
                "random_samples": samples,
                "random_max": random_max,
                "within_upper": random_max is None or random_max <= upper.value + self.config.tol,
            }
            return Report("parallel", summary)

        if mode == "overlap":
            rows: List[Dict[str, object]] = []
            within = True
            for x in bitstrings(n):
                for x_prime in bitstrings(n):
                    report = overlap_bound(x, x_prime)
                    relaxed = relaxed_overlap(x, x_prime)
                    row = report.to_dict()
                    row["relaxed"] = relaxed.numeric
                    within = within and report.numeric is not None and report.numeric <= report.bound + self.config.tol
                    rows.append(row)
            return Report("parallel", {"n": n, "pairs": len(rows), "all_within": within}, rows)

        projectors = [parallel_projector(spec, x) for x in spec.questions]
        bound = lemma2_bound(projectors, PermutationFamily.xor(n))
        norm = projector_sum_norm(projectors)
        summary = {
            "n": n,
            "bound": bound,
            "norm": norm,
            "holds": norm <= bound + self.config.tol,
            "value": norm / 2**n,
            "value_bound": bound / 2**n,
        }
        return Report("parallel", summary)

    def seesaw(
        self,
        n: int = 1,
        k: Optional[int] = None,
        seeds: int = 1,
        max_iters: int = 100,
        ancilla_a: int = 2,
        ancilla_b: int = 2,
    ) -> Report:
        logger.info("seesaw n=%d k=%s seeds=%d", n, k, seeds)
        cfg = SeesawConfig(
            ancilla_dim_a=ancilla_a,
            ancilla_dim_b=ancilla_b,
            max_iters=max_iters,
            seed=self.config.seed,
        )
        if seeds < 1:
            raise ContractError(f"种子个数必须至少为 1: {seeds}")
        if k is not None:
            spec = GameSpec(k)
            runs = map_ordered(lambda s: seesaw_cloning(spec, cfg, s), range(seeds), self.config.workers)
            best = max(runs, key=lambda run: (run.value, -run.seed_index))
            summary = {
                "k": k,
                "value": closed_form_value(k),
                "seesaw_best": best.value,
                "seeds": seeds,
                "iters": [run.iterations for run in runs],
                "heuristic": True,
            }
            return Report("seesaw", summary)
        result = seesaw_best(ParallelSpec(n), cfg, seeds, self.config.workers)
        return Report("seesaw", result.to_dict())

    def _attack(self, attack: str, strategy_path: Optional[Path]) -> AttackModel:
        if attack == "honest":
            return AttackModel.honest()
        if attack == "nope_optimal":
            return nope_attack_strategy()
        if attack == "random":
            return random_nope_attack(derive_rng(self.config.seed, _QPV_ATTACK))
        if attack == "custom":
            if strategy_path is None:
                raise ContractError("custom 攻击需要 --strategy 文件")
            spec, strategy, model = load_strategy_file(strategy_path)
            if model != NOPE_MODEL:
                raise AttackStructureError(f"攻击文件需要 {{\"model\": \"{NOPE_MODEL}\"}} 标记")
            return AttackModel.custom(NoPEAttack.from_strategy(spec, strategy))
        raise ContractError(f"未知的攻击 {attack!r}，可选 {list(ATTACKS)}")

    def qpv(
        self,
        n: int = 1,
        rounds: int = 10_000,
        attack: str = "nope_optimal",
        strategy_path: Optional[Path] = None,
        purified: bool = True,
        transcript: bool = False,
    ) -> Report:
        logger.info("qpv n=%d rounds=%d attack=%s purified=%s", n, rounds, attack, purified)
        cfg = RoundConfig(n=n, purified=purified, seed=self.config.seed)
        model = self._attack(attack, strategy_path)
        result = simulate(cfg, model, rounds, workers=self.config.workers, keep_transcript=transcript)
        rows = result.transcript_rows() if transcript else None
        return Report("qpv", result.to_dict(), rows)

    def rom(self, adversary: str = "all", ell: int = 8, n: int = 1, q_max: int = 4, runs: int = 10_000) -> Report:
        logger.info("rom adversary=%s ell=%d n=%d q_max=%d runs=%d", adversary, ell, n, q_max, runs)
        cfg = HRoutingConfig(ell=ell, n=n, q_max=q_max, seed=self.config.seed)
        names = available_adversaries() if adversary == "all" else [adversary]
        reports = [compare_games(cfg, get_adversary(name), runs, self.config.workers).to_dict() for name in names]
        if len(reports) == 1:
            return Report("rom", reports[0])
        summary = {"config": cfg.to_dict(), "runs": runs, "adversaries": names}
        return Report("rom", summary, reports)

    def epsilon(self, q: int, ell: int, n: int) -> Report:
        logger.info("epsilon q=%d ell=%d n=%d", q, ell, n)
        bound = soundness_epsilon(q, ell, n)
        return Report("epsilon", bound.to_dict())


__all__ = ["ATTACKS", "ExperimentRunner", "PARALLEL_MODES"]
