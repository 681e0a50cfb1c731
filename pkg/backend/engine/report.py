"""报告与输出格式。"""

from __future__ import annotations

import csv
import io
import json
from typing import Dict, Iterable, List, Optional

from .utils import normalize_output


def _flatten(record: Dict[str, object], prefix: str = "") -> Dict[str, object]:
    flat: Dict[str, object] = {}
    for key, value in record.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, f"{name}."))
        elif isinstance(value, list):
            flat[name] = json.dumps(value, ensure_ascii=False)
        elif value is None:
            flat[name] = ""
        else:
            flat[name] = value
    return flat


class Report:
    """单个子命令的结果：一个摘要对象加上可选的逐行记录。"""

    def __init__(self, command: str, summary: Dict[str, object], rows: Optional[Iterable[Dict[str, object]]] = None):
        self.command = command
        self.summary = summary
        self.rows: List[Dict[str, object]] = list(rows or [])

    def to_dict(self) -> Dict[str, object]:
        data = dict(self.summary)
        if self.rows:
            data["rows"] = self.rows
        return normalize_output(data)  # type: ignore[return-value]

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        """每条记录一行；没有逐行记录时输出摘要这一行。"""

        records = [normalize_output(row) for row in self.rows] or [normalize_output(self.summary)]
        flat = [_flatten(record) for record in records]  # type: ignore[arg-type]
        fieldnames: List[str] = []
        for record in flat:
            for key in record:
                if key not in fieldnames:
                    fieldnames.append(key)
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=fieldnames, restval="", lineterminator="\n")
        writer.writeheader()
        writer.writerows(flat)
        return buffer.getvalue()

    def render(self, output: str) -> str:
        return self.to_csv() if output == "csv" else self.to_json()


__all__ = ["Report"]
