"""CSV and JSON serialisation of result tables.

Floats are written with 17 significant digits so a reader recovers the exact
double; nothing depends on the locale.
"""
import csv
import enum
import io
import json
import math


def _cell(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return "%.17g" % value
    return str(value)


def _jsonable(value):
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


def to_csv(columns, records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for rec in records:
        writer.writerow([_cell(rec[c]) for c in columns])
    return buf.getvalue()


def to_json(columns, records) -> str:
    rows = [{c: _jsonable(rec[c]) for c in columns} for rec in records]
    return json.dumps(rows, indent=1) + "\n"


def render(columns, records, fmt="csv") -> str:
    if fmt == "csv":
        return to_csv(columns, records)
    if fmt == "json":
        return to_json(columns, records)
    raise ValueError(f"unknown format {fmt!r}")
