"""Rendering of metric reports as JSON, Markdown tables and CSV."""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Callable, Sequence

from .metrics import MetricReport


def _finite(x: float | None) -> bool:
    return x is not None and not math.isnan(x)


def fmt_metric(x: float | None) -> str:
    if x is None:
        return ""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.2f}"


def fmt_small(x: float | None) -> str:
    """Two decimals, or three significant figures below one."""
    if x is None:
        return ""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x != 0 and abs(x) < 1:
        decimals = 2 - math.floor(math.log10(abs(x)))
        return f"{x:.{decimals}f}"
    return f"{x:.2f}"


def fmt_freq(x: float | None) -> str:
    if x is None:
        return ""
    return "0" if x == 0 else f"{x:.3f}"


def fmt_pii(r: MetricReport) -> str:
    p = r.pii
    if p is None:
        return ""
    if p.interval_empty:
        return f"{fmt_metric(p.M)} (empty)"
    return f"{fmt_metric(p.M)} ({fmt_freq(p.omega1)}, {fmt_freq(p.omega2)})"


def _with_unit(fmt, unit):
    return lambda x: "" if x is None else f"{fmt(x)} {unit}"


def _pii_m(r: MetricReport):
    return None if r.pii is None else r.pii.M


ZT_COLUMNS = [
    ("LCS", lambda r: r.lcs, fmt_metric, "min"),
    ("TR", lambda r: r.tr, fmt_metric, "min"),
    ("PII", _pii_m, None, "min"),
    ("LRT", lambda r: r.lrt, fmt_small, "max"),
]

ZB_COLUMNS = [
    ("Bandwidth", lambda r: r.bandwidth, _with_unit(fmt_metric, "rad/s"), "max"),
    # overshoot is displayed in percent
    ("Overshoot", lambda r: r.overshoot, lambda x: "" if x is None else f"{100 * x:.1f}", None),
    ("Rising Time", lambda r: r.rise_time, _with_unit(fmt_metric, "s"), "min"),
]


def _cells(reports: Sequence[MetricReport], columns, mark: Callable[[str], str]) -> list[list[str]]:
    rows = [[r.name] for r in reports]
    for _, get, fmt, best in columns:
        values = [get(r) for r in reports]
        finite = [v for v in values if _finite(v)]
        target = None
        if best and len(reports) > 1 and finite:
            target = min(finite) if best == "min" else max(finite)
        for row, r, v in zip(rows, reports, values):
            text = fmt_pii(r) if fmt is None else fmt(v)
            row.append(mark(text) if target is not None and v == target and text else text)
    return rows


def _markdown_table(reports, columns) -> str:
    header = ["Controller"] + [c[0] for c in columns]
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    for row in _cells(reports, columns, lambda t: f"**{t}**"):
        lines.append("| " + " | ".join(row) + " |")
    return "\n".join(lines)


def render_markdown(reports: Sequence[MetricReport]) -> str:
    """Z_t and Z_b metric tables; the best value per column is bold."""
    parts = ["Z_t metrics", "", _markdown_table(reports, ZT_COLUMNS), "",
             "Z_b metrics", "", _markdown_table(reports, ZB_COLUMNS)]
    flagged = [(r.name, f) for r in reports for f in r.flags]
    if flagged:
        parts += ["", "Flags", ""] + [f"- {name}: {f}" for name, f in flagged]
    return "\n".join(parts) + "\n"


def render_csv(reports: Sequence[MetricReport]) -> str:
    """One combined table, display precision, best value suffixed with '*'."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    columns = ZT_COLUMNS + ZB_COLUMNS
    writer.writerow(["Controller"] + [c[0] for c in columns] + ["Flags"])
    for r, row in zip(reports, _cells(reports, columns, lambda t: t + "*")):
        writer.writerow(row + ["; ".join(r.flags)])
    return buf.getvalue()


def render_json(reports: Sequence[MetricReport] | MetricReport) -> str:
    if isinstance(reports, MetricReport):
        payload = reports.to_dict()
    else:
        payload = [r.to_dict() for r in reports]
    return json.dumps(payload, indent=2) + "\n"


RENDERERS = {"json": render_json, "markdown": render_markdown, "csv": render_csv}
