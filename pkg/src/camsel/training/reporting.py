"""Report rendering: text tables mirroring the per-surgery row layout, plus
a JSONL record stream for downstream tooling."""

from __future__ import annotations

import json
import os
from pathlib import Path

from camsel.training.evaluation import MetricsReport


def render_report(report: MetricsReport) -> str:
    ids = [row.sequence_id for row in report.rows]
    header = ["Method"] + ids + ["Average"]
    acc = [f"{report.method} ({report.protocol})"]
    acc += [f"{row.accuracy:.3f}" for row in report.rows]
    acc += [f"{report.average_accuracy:.3f}"]
    chance = ["chance rate"]
    chance += [f"{row.chance_rate:.3f}" for row in report.rows]
    chance += [f"{report.average_chance_rate:.3f}"]
    widths = [max(len(col[i]) for col in (header, acc, chance)) for i in range(len(header))]

    def fmt(cells):
        return "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()

    rule = "-" * (sum(widths) + 2 * (len(widths) - 1))
    lines = [fmt(header), rule, fmt(acc), fmt(chance), rule,
             f"fingerprint: {report.fingerprint}"]
    return "\n".join(lines)


def render_comparison(reports: list[MetricsReport]) -> str:
    """One table per protocol with one accuracy row per method."""
    out = []
    for protocol in sorted({r.protocol for r in reports}):
        group = [r for r in reports if r.protocol == protocol]
        ids = [row.sequence_id for row in group[0].rows]
        header = ["Method"] + ids + ["Average"]
        body = []
        for rep in group:
            cells = [rep.method]
            by_id = {row.sequence_id: row for row in rep.rows}
            cells += [f"{by_id[i].accuracy:.3f}" if i in by_id else "-" for i in ids]
            cells += [f"{rep.average_accuracy:.3f}"]
            body.append(cells)
        chance = ["chance rate"]
        by_id = {row.sequence_id: row for row in group[0].rows}
        chance += [f"{by_id[i].chance_rate:.3f}" if i in by_id else "-" for i in ids]
        chance += [f"{group[0].average_chance_rate:.3f}"]
        rows = [header] + body + [chance]
        widths = [max(len(r[i]) for r in rows) for i in range(len(header))]

        def fmt(cells):
            return "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()

        rule = "-" * (sum(widths) + 2 * (len(widths) - 1))
        out.append("\n".join(
            [f"== {protocol} ==", fmt(header), rule]
            + [fmt(r) for r in body]
            + [rule, fmt(chance)]
        ))
    return "\n\n".join(out)


def write_records(reports: list[MetricsReport], path: str | os.PathLike) -> Path:
    """Append-friendly JSONL: one record per report."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a", encoding="utf-8") as fh:
        for report in reports:
            fh.write(json.dumps(report.to_dict(), sort_keys=True) + "\n")
    return path


def read_records(path: str | os.PathLike) -> list[dict]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out
