"""File formats: trajectory JSON, session JSONL logs, analytics CSV and
questionnaire CSVs.

Trajectory files are strict: the top-level fields are exactly
``id, spacing_m, via_points_m, metadata`` (in that order when written) and
anything unknown is rejected with a SchemaViolation naming the offender.
All lengths in files are meters; joint-space errors are written in degrees.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import SchemaViolation
from .geometry import Trajectory

TRAJECTORY_FIELDS = ("id", "spacing_m", "via_points_m", "metadata")
ANALYTICS_HEADER = ("subject", "exercise", "condition", "space", "err")


# -- trajectory JSON -----------------------------------------------------------

def trajectory_to_dict(traj: Trajectory) -> dict:
    return {
        "id": traj.id,
        "spacing_m": float(traj.spacing),
        "via_points_m": [[float(v) for v in p] for p in traj.via_points],
        "metadata": dict(traj.metadata),
    }


def trajectory_from_dict(doc, source: str = "<inline>") -> Trajectory:
    if not isinstance(doc, dict):
        raise SchemaViolation(f"{source}: trajectory document must be an object")
    unknown = set(doc) - set(TRAJECTORY_FIELDS)
    if unknown:
        raise SchemaViolation(f"{source}: unknown field(s) {sorted(unknown)}")
    for required in ("id", "spacing_m", "via_points_m"):
        if required not in doc:
            raise SchemaViolation(f"{source}: missing field {required!r}")
    if not isinstance(doc["id"], str) or not doc["id"]:
        raise SchemaViolation(f"{source}: 'id' must be a non-empty string")
    spacing = doc["spacing_m"]
    if not isinstance(spacing, (int, float)) or isinstance(spacing, bool) or spacing <= 0:
        raise SchemaViolation(f"{source}: 'spacing_m' must be a positive number")
    pts = doc["via_points_m"]
    if not isinstance(pts, list) or len(pts) < 2:
        raise SchemaViolation(f"{source}: 'via_points_m' must list >= 2 points")
    for i, p in enumerate(pts):
        if (not isinstance(p, list) or len(p) != 3
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                           for v in p)):
            raise SchemaViolation(
                f"{source}: via_points_m[{i}] must be [x, y, z] numbers")
    metadata = doc.get("metadata", {})
    if not isinstance(metadata, dict):
        raise SchemaViolation(f"{source}: 'metadata' must be an object")
    try:
        return Trajectory(id=doc["id"], via_points=np.asarray(pts, dtype=np.float64),
                          spacing=float(spacing), metadata=dict(metadata))
    except ValueError as e:
        raise SchemaViolation(f"{source}: {e}") from None


def save_trajectory(traj: Trajectory, path) -> None:
    Path(path).write_text(json.dumps(trajectory_to_dict(traj)) + "\n",
                          encoding="utf-8")


def load_trajectory(path) -> Trajectory:
    p = Path(path)
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise SchemaViolation(f"{p}: malformed JSON at line {e.lineno}: {e.msg}") from None
    return trajectory_from_dict(doc, source=str(p))


# -- session logs ----------------------------------------------------------------

def write_messages_jsonl(messages, path) -> None:
    """Write plain wire messages, one JSON object per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for msg in messages:
            fh.write(json.dumps(msg, separators=(",", ":")) + "\n")


def read_log_records(path) -> list[tuple[str, dict]]:
    """Read a session log; returns (direction, message) pairs.

    Accepts both plain message JSONL (treated as inbound) and server logs
    whose lines wrap the message as {"dir", "ts_ms", "session", "msg"}.
    """
    records: list[tuple[str, dict]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as e:
                raise SchemaViolation(f"{path}:{lineno}: malformed JSON: {e.msg}") from None
            if not isinstance(doc, dict):
                raise SchemaViolation(f"{path}:{lineno}: expected an object")
            if "msg" in doc and "dir" in doc:
                records.append((str(doc["dir"]), doc["msg"]))
            else:
                records.append(("in", doc))
    return records


def read_inbound_messages(path) -> list[dict]:
    return [msg for direction, msg in read_log_records(path) if direction == "in"]


# -- analytics CSV ----------------------------------------------------------------

def write_analytics_csv(rows, path, append: bool = False) -> None:
    """Write per-(subject, exercise, condition) error rows.

    ``err`` is meters in end-effector space and degrees in joint space
    (angles leave the SI-internal representation at this boundary).
    """
    path = Path(path)
    fresh = not (append and path.exists())
    with open(path, "a" if append else "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if fresh:
            writer.writerow(ANALYTICS_HEADER)
        for row in rows:
            err = row["err"]
            if row["space"] == "joint":
                err = float(np.degrees(err))
            writer.writerow([row["subject"], row["exercise"], row["condition"],
                             row["space"], repr(float(err))])


def summary_row(summary) -> dict:
    return {"subject": summary.subject_id, "exercise": summary.exercise_id,
            "condition": summary.condition, "space": summary.space,
            "err": summary.err}


def read_analytics_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != ANALYTICS_HEADER:
            raise SchemaViolation(
                f"{path}: expected header {','.join(ANALYTICS_HEADER)}")
        rows = []
        for i, row in enumerate(reader, 2):
            try:
                row["err"] = float(row["err"])
            except (TypeError, ValueError):
                raise SchemaViolation(f"{path}:{i}: 'err' is not a number") from None
            rows.append(row)
    return rows


# -- questionnaire CSVs --------------------------------------------------------------

def _read_csv_rows(path) -> list[list[str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [row for row in csv.reader(fh) if row and any(c.strip() for c in row)]


def _likert(cell: str, where: str) -> float:
    try:
        v = float(cell)
    except ValueError:
        raise SchemaViolation(f"{where}: {cell!r} is not a number") from None
    if not (1 <= v <= 5):
        raise SchemaViolation(f"{where}: {v} outside the 1..5 Likert range")
    return v


def load_sus_csv(path) -> tuple[list[str], np.ndarray]:
    """Read a SUS answer sheet: optional 'subject' column plus 10 items.

    Item polarity is positional (odd items positive), as in the standard
    instrument, so the header carries no +/- markers.
    """
    rows = _read_csv_rows(path)
    if not rows:
        raise SchemaViolation(f"{path}: empty file")
    header = [c.strip() for c in rows[0]]
    has_subject = header and header[0].lower() == "subject"
    n_items = len(header) - (1 if has_subject else 0)
    if n_items != 10:
        raise SchemaViolation(f"{path}: SUS sheets need 10 item columns, got {n_items}")
    subjects, answers = [], []
    for lineno, row in enumerate(rows[1:], 2):
        cells = [c.strip() for c in row]
        if len(cells) != len(header):
            raise SchemaViolation(f"{path}:{lineno}: expected {len(header)} cells")
        if has_subject:
            subjects.append(cells[0])
            cells = cells[1:]
        else:
            subjects.append(f"s{lineno - 1}")
        answers.append([_likert(c, f"{path}:{lineno}") for c in cells])
    return subjects, np.asarray(answers)


def load_tam_csv(path) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Read a TAM sheet with headers like ``WTU.1+`` / ``PEOU.2-``.

    The suffix is the item polarity; the prefix before the dot names the
    category. Returns {category: (responses, polarity)}.
    """
    rows = _read_csv_rows(path)
    if not rows:
        raise SchemaViolation(f"{path}: empty file")
    header = [c.strip() for c in rows[0]]
    has_subject = header and header[0].lower() == "subject"
    item_cols = header[1:] if has_subject else header
    offset = 1 if has_subject else 0

    columns: list[tuple[str, int]] = []  # (category, polarity)
    for name in item_cols:
        if len(name) < 3 or name[-1] not in "+-" or "." not in name:
            raise SchemaViolation(
                f"{path}: item header {name!r} must look like 'CAT.n+' or 'CAT.n-'")
        columns.append((name.split(".")[0], 1 if name[-1] == "+" else -1))

    data = []
    for lineno, row in enumerate(rows[1:], 2):
        cells = [c.strip() for c in row]
        if len(cells) != len(header):
            raise SchemaViolation(f"{path}:{lineno}: expected {len(header)} cells")
        data.append([_likert(c, f"{path}:{lineno}") for c in cells[offset:]])
    matrix = np.asarray(data)

    categories: dict[str, tuple[list[int], list[int]]] = {}
    for idx, (cat, pol) in enumerate(columns):
        cols, pols = categories.setdefault(cat, ([], []))
        cols.append(idx)
        pols.append(pol)
    return {cat: (matrix[:, cols], np.asarray(pols))
            for cat, (cols, pols) in categories.items()}
