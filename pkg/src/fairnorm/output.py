"""Atomic artifact writers with deterministic formatting."""

import json
import os


def atomic_write_text(path, text):
    """Write whole-file text via a temp file and rename."""
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_json(path, obj):
    """JSON with sorted keys and a trailing newline, for diffability."""
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def format_cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv_rows(path, fieldnames, rows):
    lines = [",".join(fieldnames)]
    for row in rows:
        lines.append(",".join(format_cell(row.get(name)) for name in fieldnames))
    atomic_write_text(path, "\n".join(lines) + "\n")
