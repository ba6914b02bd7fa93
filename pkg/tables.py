"""
tables - machine-readable artifacts for every squeeze2phase subcommand.

A Table is rendered either as CSV (a leading `# key=value ...` parameter line,
the header, the rows, then one `# key=value` line per summary entry) or as JSON
with "parameters", "columns", "rows" and "summary". Floats are written with 12
significant digits so identical inputs give byte-identical files.
"""

import io
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

FLOAT_FORMAT = ".12g"
FORMATS = ("csv", "json")


def format_value(value: Any) -> str:
    """Text form used in CSV comment lines."""
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format(float(value), FLOAT_FORMAT)
    if isinstance(value, (list, tuple)):
        return ",".join(format_value(v) for v in value)
    if value is None:
        return "none"
    return str(value)


def _json_value(value: Any) -> Any:
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return None
        # Round through the 12-digit text form so JSON and CSV agree.
        return float(format(value, FLOAT_FORMAT))
    if isinstance(value, (list, tuple)):
        return [_json_value(v) for v in value]
    if isinstance(value, Mapping):
        return {str(k): _json_value(v) for k, v in value.items()}
    return value


@dataclass
class Table:
    """Named columns, rows in output order, plus the parameter record and summary values."""

    name: str
    columns: Sequence[str]
    rows: list = field(default_factory=list)
    parameters: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)

    def add_row(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError(
                f"table '{self.name}' has {len(self.columns)} columns, row has {len(values)} values"
            )
        self.rows.append(list(values))

    def to_frame(self) -> pd.DataFrame:
        rows = [[v.value if isinstance(v, Enum) else v for v in row] for row in self.rows]
        return pd.DataFrame(rows, columns=list(self.columns))

    def to_csv(self) -> str:
        buffer = io.StringIO()
        header = " ".join(f"{k}={format_value(v)}" for k, v in self.parameters.items())
        buffer.write(f"# {self.name} {header}".rstrip() + "\n")
        self.to_frame().to_csv(
            buffer, index=False, float_format=f"%{FLOAT_FORMAT}", lineterminator="\n"
        )
        for key, value in self.summary.items():
            buffer.write(f"# {key}={format_value(value)}\n")
        return buffer.getvalue()

    def to_json(self) -> str:
        document = {
            "name": self.name,
            "parameters": _json_value(self.parameters),
            "columns": list(self.columns),
            "rows": [_json_value(row) for row in self.rows],
            "summary": _json_value(self.summary),
        }
        return json.dumps(document, indent=2) + "\n"

    def render(self, fmt: str = "csv") -> str:
        if fmt == "csv":
            return self.to_csv()
        if fmt == "json":
            return self.to_json()
        raise ValueError(f"Unknown output format '{fmt}'. Available formats: {list(FORMATS)}")


def write_output(text: str, out: str | Path | None = None) -> None:
    """Write an artifact to `out`, or to standard output when `out` is None or '-'."""
    if out is None or str(out) == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    # newline="" keeps "\n" on every platform.
    with path.open("w", encoding="utf-8", newline="") as f:
        f.write(text)
    logger.info(f"✓ Wrote {path}")
