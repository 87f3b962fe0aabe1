"""JSON-lines report stream with a pandas text summary"""
import json
import logging
import math
import os
from typing import Any, Dict, List, Optional, TextIO

import numpy as np
import pandas as pd

from .errors import ConfigError, HypStructError

logger = logging.getLogger(__name__)


def to_plain(value: Any) -> Any:
    """Convert numpy scalars, tuples and non-finite floats into JSON-safe values."""
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_plain(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if value is None or isinstance(value, (str, int, bool)):
        return value
    if hasattr(value, "to_json"):
        return to_plain(value.to_json())
    return repr(value)


class ReportStream:
    """Collects check records and writes them in key order."""

    def __init__(self, subcommand: str):
        self.subcommand = subcommand
        self.records: List[Dict[str, Any]] = []
        self.artifacts: Dict[str, str] = {}

    def add(self, key: str, check: str, passed: bool, **fields) -> Dict[str, Any]:
        record = {"key": key, "check": check, "passed": bool(passed)}
        record.update(to_plain(fields))
        self.records.append(record)
        if not passed:
            logger.warning("Check %s failed for %s", check, key)
        return record

    def add_error(self, key: str, check: str, error: HypStructError) -> Dict[str, Any]:
        """Record a raised verification error as a violation."""
        return self.add(key, check, False, **error.to_record())

    def attach(self, name: str, text: str):
        """Keep a rendered artifact (DOT text) alongside the records."""
        self.artifacts[name] = text

    @property
    def passed(self) -> bool:
        return all(r["passed"] for r in self.records)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def sorted_records(self) -> List[Dict[str, Any]]:
        return sorted(self.records, key=lambda r: (r["key"], r["check"]))

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.sorted_records())

    def summary(self) -> pd.DataFrame:
        rows = [{"key": r["key"], "check": r["check"], "passed": r["passed"]} for r in self.sorted_records()]
        return pd.DataFrame(rows, columns=["key", "check", "passed"])

    def to_text(self) -> str:
        frame = self.summary()
        status = "PASS" if self.passed else "FAIL"
        body = frame.to_string(index=False) if not frame.empty else "(no checks)"
        return f"{self.subcommand}: {status} ({len(frame)} checks)\n{body}\n"

    def render(self, fmt: str = "json", artifact: Optional[str] = None) -> str:
        if fmt == "json":
            return self.to_jsonl()
        if fmt == "text":
            return self.to_text()
        if fmt == "dot":
            name = artifact or next(iter(sorted(self.artifacts)), None)
            if name is None:
                logger.warning("%s produced no DOT artifact; falling back to JSON lines", self.subcommand)
                return self.to_jsonl()
            return self.artifacts[name]
        raise ConfigError(f"Unknown format {fmt!r}", field="format")

    def write(self, fmt: str = "json", out: Optional[str] = None, stream: Optional[TextIO] = None) -> str:
        text = self.render(fmt)
        if out:
            directory = os.path.dirname(out)
            if directory:
                os.makedirs(directory, exist_ok=True)
            with open(out, "w", encoding="utf-8") as f:
                f.write(text)
            logger.info("Report written to %s", out)
        elif stream is not None:
            stream.write(text)
        return text
