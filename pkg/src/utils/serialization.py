"""
File formats: point CSVs, tabular CSVs and JSON result envelopes.

CSV floats are written with repr (shortest round-trip text); JSON uses sorted
keys and two-space indentation, so repeated runs produce identical bytes.
"""

import csv
import json
import math
import os
from typing import Any, Dict, Iterable, List, Optional, Sequence, TextIO

import numpy as np

from .. import __version__
from ..core.cloud import PointCloud
from ..errors import MalformedInput
from .logging import get_logger

logger = get_logger(__name__)


def ensure_parent_dir(path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)


def _parse_row(row: List[str], line: int) -> Optional[List[float]]:
    try:
        values = [float(field) for field in row]
    except ValueError:
        return None
    for value in values:
        if not math.isfinite(value):
            raise MalformedInput(f"line {line}: non-finite coordinate", details={"line": line})
    return values


def read_points_csv(path: str, allow_duplicates: bool = False) -> PointCloud:
    """
    Read a point cloud from CSV.

    One point per row; a non-numeric first row is treated as a header. Blank
    lines and lines starting with '#' are ignored.

    Raises:
        MalformedInput: On unreadable files, ragged or non-numeric rows and NaN/inf values.
    """
    rows: List[List[float]] = []
    try:
        with open(path, newline="") as f:
            lines = ("\n" if text.lstrip().startswith("#") else text for text in f)
            for line, row in enumerate(csv.reader(lines), start=1):
                row = [field.strip() for field in row]
                if not row or not any(row):
                    continue
                values = _parse_row(row, line)
                if values is None:
                    if rows:
                        raise MalformedInput(f"line {line}: non-numeric field in {row}", details={"line": line})
                    continue
                if rows and len(values) != len(rows[0]):
                    raise MalformedInput(
                        f"line {line}: expected {len(rows[0])} coordinates, got {len(values)}", details={"line": line}
                    )
                rows.append(values)
    except OSError as e:
        raise MalformedInput(f"Cannot read '{path}': {e}") from e

    if not rows:
        raise MalformedInput(f"'{path}' contains no points")
    label = os.path.splitext(os.path.basename(path))[0]
    logger.debug(f"Read {len(rows)} points from {path}")
    return PointCloud.from_points(np.array(rows), label=label, allow_duplicates=allow_duplicates)


def write_points_csv(path: str, cloud: PointCloud, comment: Optional[str] = None) -> None:
    """Write a cloud with an x1..xd header, after an optional '#' comment line."""
    ensure_parent_dir(path)
    with open(path, "w", newline="") as f:
        _write_comment(f, comment)
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow([f"x{k + 1}" for k in range(cloud.dim)])
        for point in cloud.points:
            writer.writerow([repr(float(v)) for v in point])
    logger.info(f"Wrote {cloud.n} points to {path}")


def _write_comment(f: TextIO, comment: Optional[str]) -> None:
    if comment:
        f.write("# " + comment.replace("\n", " ") + "\n")


def provenance(config_echo: Dict[str, Any]) -> str:
    """One-line JSON rendering of a config echo for CSV comment headers."""
    return json.dumps({"tool_version": __version__, "config_echo": config_echo}, sort_keys=True, separators=(",", ":"))


def _cell(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_table_csv(
    path: str, rows: Iterable[Dict[str, Any]], columns: Sequence[str], comment: Optional[str] = None
) -> None:
    """Write dict rows under the given column order."""
    ensure_parent_dir(path)
    with open(path, "w", newline="") as f:
        _write_comment(f, comment)
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row[c]) for c in columns])


def write_column_csv(path: str, name: str, values: np.ndarray, comment: Optional[str] = None) -> None:
    """Write one numeric column."""
    ensure_parent_dir(path)
    with open(path, "w", newline="") as f:
        _write_comment(f, comment)
        f.write(name + "\n")
        f.writelines(repr(float(v)) + "\n" for v in values)


def read_table_csv(path: str) -> List[Dict[str, str]]:
    """
    Read a CSV with a header row.

    Raises:
        MalformedInput: If the file cannot be read.
    """
    try:
        with open(path, newline="") as f:
            return list(csv.DictReader(line for line in f if not line.startswith("#")))
    except OSError as e:
        raise MalformedInput(f"Cannot read '{path}': {e}") from e


def envelope(kind: str, result: Dict[str, Any], config_echo: Dict[str, Any]) -> Dict[str, Any]:
    """Wrap a result record with the tool version and the configuration that produced it."""
    return {"kind": kind, "tool_version": __version__, "config_echo": config_echo, "result": result}


def dumps_json(payload: Dict[str, Any]) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def write_json(path: str, payload: Dict[str, Any]) -> None:
    ensure_parent_dir(path)
    with open(path, "w") as f:
        f.write(dumps_json(payload))
    logger.info(f"Wrote {payload.get('kind', 'result')} to {path}")


def read_json(path: str) -> Dict[str, Any]:
    """
    Read a JSON object.

    Raises:
        MalformedInput: If the file cannot be read or is not a JSON object.
    """
    try:
        with open(path) as f:
            payload = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise MalformedInput(f"Cannot read JSON from '{path}': {e}") from e
    if not isinstance(payload, dict):
        raise MalformedInput(f"'{path}' does not hold a JSON object")
    return payload


def unwrap(payload: Dict[str, Any], kind: str) -> Dict[str, Any]:
    """
    Result record of an envelope of the expected kind.

    Raises:
        MalformedInput: If the payload is of another kind.
    """
    if payload.get("kind") != kind or not isinstance(payload.get("result"), dict):
        raise MalformedInput(f"expected a '{kind}' file, got '{payload.get('kind')}'")
    return payload["result"]
