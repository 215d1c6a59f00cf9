"""JSON/CSV writers and trajectory ingestion for the command-line front end."""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from pathlib import Path

import numpy as np

from .exceptions import ConfigurationError

OUTPUT_SCHEMA = "advdecay.output/1"


def _plain(obj):
    """Convert numpy scalars/arrays, enums and tuples into plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def _encode(obj, digits, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_encode(v, digits, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_encode(v, digits, indent, level) for v in obj) + "]"
        items = [pad + _encode(v, digits, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return "null"
        text = format(obj, f".{digits}g")
        if "e" not in text and "." not in text and "n" not in text:
            text += ".0"
        return text
    if isinstance(obj, int):
        return str(obj)
    return json.dumps(str(obj))


def dumps_json(obj, digits: int = 17, indent: int = 2) -> str:
    """JSON text with every float printed to ``digits`` significant digits."""
    return _encode(_plain(obj), digits, indent, 0) + "\n"


def envelope_document(command: str, inputs: dict, results: dict) -> dict:
    return {"schema": OUTPUT_SCHEMA, "command": command, "inputs": inputs, "results": results}


def dumps_csv(header, rows, digits: int = 17) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        out = []
        for v in _plain(list(row)):
            if isinstance(v, float):
                out.append("" if math.isnan(v) else format(v, f".{digits}g"))
            elif v is None:
                out.append("")
            else:
                out.append(v)
        writer.writerow(out)
    return buf.getvalue()


def _find_trajectory(doc):
    """Locate {start_index, values} in an output document or a bare trajectory."""
    if isinstance(doc, dict):
        if "values" in doc and "start_index" in doc:
            return doc
        results = doc.get("results", doc)
        for key in ("trajectory", "solution"):
            if isinstance(results, dict) and isinstance(results.get(key), dict):
                return results[key]
    raise ConfigurationError("seed file holds no trajectory (expected 'start_index' and 'values')")


def read_trajectory(path) -> tuple[int, np.ndarray]:
    """Read (start_index, values) from a JSON output document or a CSV table
    with columns ``n`` and ``x``."""
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise ConfigurationError(f"seed file not found: {path}") from None
    if path.suffix.lower() == ".csv":
        reader = csv.DictReader(io.StringIO(text))
        if reader.fieldnames is None or "n" not in reader.fieldnames or "x" not in reader.fieldnames:
            raise ConfigurationError("seed CSV needs columns 'n' and 'x'")
        rows = [(int(r["n"]), float(r["x"])) for r in reader]
        if not rows:
            raise ConfigurationError("seed CSV has no rows")
        n = np.array([r[0] for r in rows])
        if np.any(np.diff(n) != 1):
            raise ConfigurationError("seed CSV indices must be consecutive")
        return int(n[0]), np.array([r[1] for r in rows])
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"seed file {path} is not valid JSON: {exc}") from None
    traj = _find_trajectory(doc)
    values = np.array([math.nan if v is None else float(v) for v in traj["values"]])
    return int(traj["start_index"]), values
