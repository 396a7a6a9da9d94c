from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Any, Dict, Optional

from pathmeasure.core.model import ExperimentConfig, ResultTable
from pathmeasure.core.serialization import format_number, table_to_dict

RESULT_FILE = "result.csv"
SUMMARY_FILE = "summary.txt"
SUMMARY_JSON_FILE = "summary.json"


def _format_value(value: Any) -> str:
    if isinstance(value, complex):
        return f"{format_number(value.real)} {'+' if value.imag >= 0 else '-'} {format_number(abs(value.imag))}i"
    if isinstance(value, (list, tuple)):
        return ", ".join(_format_value(v) for v in value)
    if value is None:
        return "none"
    return format_number(value)


def write_result_csv(table: ResultTable, out_dir: Path) -> Path:
    """
    Write the table to result.csv: one '#' comment line naming the title
    and the columns, then data rows only.
    """
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / RESULT_FILE
    with path.open("w", encoding="utf-8", newline="") as f:
        f.write(f"# {table.title}: {','.join(table.columns)}\n")
        writer = csv.writer(f, lineterminator="\n")
        for row in table.rows:
            writer.writerow([format_number(v) for v in row])
    return path


def summary_text(table: ResultTable) -> str:
    lines = [table.title]
    if table.converged is not None:
        lines.append(f"converged={'true' if table.converged else 'false'}")
    for key, value in table.summary.items():
        lines.append(f"{key} = {_format_value(value)}")
    return "\n".join(lines) + "\n"


def write_summary(table: ResultTable, out_dir: Path, config: Optional[ExperimentConfig] = None) -> Dict[str, Path]:
    """summary.txt for people, summary.json (sorted keys) for scripts."""
    out_dir.mkdir(parents=True, exist_ok=True)
    text_path = out_dir / SUMMARY_FILE
    with text_path.open("w", encoding="utf-8") as f:
        f.write(summary_text(table))

    json_path = out_dir / SUMMARY_JSON_FILE
    with json_path.open("w", encoding="utf-8") as f:
        json.dump(table_to_dict(table, config), f, ensure_ascii=False, indent=2, sort_keys=True)
        f.write("\n")
    return {"summary": text_path, "summary_json": json_path}


def write_artifacts(table: ResultTable, out_dir: Path, config: Optional[ExperimentConfig] = None) -> Dict[str, Path]:
    paths = {"result": write_result_csv(table, out_dir)}
    paths.update(write_summary(table, out_dir, config))
    return paths
