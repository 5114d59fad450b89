"""Serialization helpers: diff-stable JSON and trajectory CSV.

CSV is RFC-4180 style with a header row, '.' decimal separator and 17
significant digits per float.  JSON is pretty-printed with sorted keys so
reruns with identical inputs are byte-identical.
"""

from __future__ import annotations

import json

from .calculus import Curve


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def trajectory_header(chart, n_momenta: int) -> list:
    return ["t"] + [f"q{i+1}" for i in range(chart.dim)] + [f"p{a+1}" for a in range(n_momenta)]


def trajectory_csv(curve: Curve, header) -> str:
    lines = [",".join(header)]
    for t, row in zip(curve.times, curve.points):
        lines.append(",".join([format_float(t)] + [format_float(v) for v in row]))
    return "\n".join(lines) + "\n"


def table_csv(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_float(v) for v in row))
    return "\n".join(lines) + "\n"


def curve_json_dict(curve: Curve, header) -> dict:
    return {
        "columns": list(header),
        "rows": [
            [float(t)] + [float(v) for v in row] for t, row in zip(curve.times, curve.points)
        ],
    }
