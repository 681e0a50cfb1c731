"""pytest 公共配置：把项目根目录加入 ``sys.path``。"""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

PROJECT_ROOT = Path(__file__).resolve().parents[1]

if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from backend.config import MAX_DIM_ENV  # noqa: E402


@pytest.fixture(autouse=True)
def _default_dimension_guard(monkeypatch):
    monkeypatch.delenv(MAX_DIM_ENV, raising=False)
