"""运行参考数值检查并生成日志。"""

from __future__ import annotations

import json
import math
import sys
from datetime import datetime
from pathlib import Path


PROJECT_ROOT = Path(__file__).resolve().parents[1]
LOG_DIR = PROJECT_ROOT / "tests" / "logs"
EXPECTED_FILE = PROJECT_ROOT / "tests" / "expected_results.json"
ABS_TOL = 1e-9

if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from backend.engine.runner import ExperimentRunner


def load_expected():
    if not EXPECTED_FILE.exists():
        return []
    with EXPECTED_FILE.open("r", encoding="utf-8") as f:
        return json.load(f)


def run() -> Path:
    runner = ExperimentRunner()
    expected = load_expected()

    cache = {}
    results = []
    matched = 0

    for rule in expected:
        key = json.dumps([rule["command"], rule["args"]], sort_keys=True)
        if key not in cache:
            cache[key] = getattr(runner, rule["command"])(**rule["args"]).to_dict()
        actual = _lookup(cache[key], rule["field"])
        ok = _matches(actual, rule)
        matched += ok
        results.append({**rule, "actual": actual, "matched": ok})

    LOG_DIR.mkdir(parents=True, exist_ok=True)
    timestamp = datetime.now().strftime("%Y%m%d-%H%M%S")
    log_path = LOG_DIR / f"reference-log-{timestamp}.json"

    log_data = {
        "generated_at": datetime.now().isoformat(),
        "seed": runner.config.seed,
        "checks": results,
        "metrics": {
            "total": len(expected),
            "matched": matched,
            "mismatched": len(expected) - matched,
        },
        "expected_reference": expected,
    }

    with log_path.open("w", encoding="utf-8") as f:
        json.dump(log_data, f, ensure_ascii=False, indent=2)

    return log_path


def _lookup(record, field):
    value = record
    for part in field.split("."):
        value = value[part]
    return value


def _matches(actual, rule):
    target = rule["expected"]
    if isinstance(target, bool) or not isinstance(target, (int, float)):
        return actual == target
    sigmas = rule.get("sigmas")
    if sigmas is None:
        return abs(actual - target) <= ABS_TOL
    trials = rule["args"].get("rounds") or rule["args"].get("runs")
    return abs(actual - target) <= sigmas * math.sqrt(target * (1 - target) / trials)


if __name__ == "__main__":  # pragma: no cover - 手动执行
    path = run()
    print(f"日志已生成: {path}")
