"""Report structures and their JSON / CSV / figure serializations.

A run produces one `RunReport`: a verdict, a summary, named tables, and
provenance (seed, config hash, tool version).  The JSON rendering is
canonical (sorted keys, no timestamps, non-finite floats as strings), so
identical runs are bit-identical on disk regardless of worker count.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

__version__ = "0.1.0"


@dataclass
class Table:
    """Named rectangular result block."""

    name: str
    columns: tuple
    rows: list

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [row[i] for row in self.rows]


@dataclass
class OpReport:
    """Outcome of one operation: verdict, free-form summary, tables."""

    op: str
    verdict: Optional[str]
    summary: dict
    tables: list

    def table(self, name: str) -> Table:
        for t in self.tables:
            if t.name == name:
                return t
        raise KeyError(f"no table named {name!r}")


@dataclass
class RunReport:
    """An OpReport plus reproducibility provenance."""

    report: OpReport
    seed: int
    config_sha256: str
    tool_version: str = __version__

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "op": self.report.op,
            "verdict": self.report.verdict,
            "summary": _sanitize(self.report.summary),
            "tables": {
                t.name: {
                    "columns": list(t.columns),
                    "rows": [[_sanitize(v) for v in row] for row in t.rows],
                }
                for t in self.report.tables
            },
            "provenance": {
                "seed": self.seed,
                "config_sha256": self.config_sha256,
                "tool_version": self.tool_version,
            },
        }


def _sanitize(value):
    """Make a value JSON-safe: numpy scalars to python, non-finite to strings."""
    if isinstance(value, dict):
        return {str(k): _sanitize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_sanitize(v) for v in value]
    if hasattr(value, "item") and not isinstance(value, (str, bytes)):
        value = value.item()
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
    return value


def config_sha256(config: dict) -> str:
    return hashlib.sha256(
        json.dumps(config, sort_keys=True, separators=(",", ":")).encode("utf-8")
    ).hexdigest()


def report_json_bytes(run: RunReport) -> bytes:
    return (json.dumps(run.to_dict(), sort_keys=True, indent=2) + "\n").encode("utf-8")


def _format_cell(value) -> str:
    if hasattr(value, "item") and not isinstance(value, (str, bytes)):
        value = value.item()
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def table_csv_text(table: Table) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_format_cell(v) for v in row])
    return buf.getvalue()


def path_csv_text(path) -> str:
    """Serialize a jump path as (time, component_1..component_d) rows."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    d = path.initial.shape[0]
    writer.writerow(["time"] + [f"component_{i + 1}" for i in range(d)])
    writer.writerow(["0"] + [_format_cell(v) for v in path.initial])
    for t, val in zip(path.times, path.values):
        writer.writerow([_format_cell(t)] + [_format_cell(v) for v in val])
    return buf.getvalue()


def write_report(
    run: RunReport,
    outdir: Path,
    formats: Sequence[str] = ("csv", "json"),
    figures: bool = True,
) -> list[Path]:
    """Write report.json, one CSV per table, and figures; returns the paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    if "json" in formats:
        p = outdir / "report.json"
        p.write_bytes(report_json_bytes(run))
        written.append(p)
    if "csv" in formats:
        for table in run.report.tables:
            p = outdir / f"{table.name}.csv"
            p.write_text(table_csv_text(table), encoding="utf-8")
            written.append(p)
    if figures:
        written.extend(render_figures(run.report, outdir))
    return written


# -- figures -----------------------------------------------------------------

_LINE_STYLE = dict(marker="o", markersize=3.5, linewidth=1.2)


def _group_xy(table: Table, group_col: str, x_col: str, y_col: str):
    gi = table.columns.index(group_col)
    xi = table.columns.index(x_col)
    yi = table.columns.index(y_col)
    series: dict = {}
    for row in table.rows:
        series.setdefault(row[gi], []).append((row[xi], row[yi]))
    return series


def render_figures(report: OpReport, outdir: Path) -> list[Path]:
    """Render one PNG per table where a natural curve exists."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    written: list[Path] = []
    for table in report.tables:
        fig = _figure_for(plt, report, table)
        if fig is None:
            continue
        p = Path(outdir) / f"{table.name}.png"
        fig.savefig(p, dpi=120, bbox_inches="tight")
        plt.close(fig)
        written.append(p)
    return written


def _finite(values):
    return [v if isinstance(v, (int, float)) and math.isfinite(v) else math.nan for v in values]


def _figure_for(plt, report: OpReport, table: Table):
    if len(table.rows) < 2:
        return None
    cols = table.columns
    if table.name == "nontightness_curve" and {"n", "probability"} <= set(cols):
        fig, ax = plt.subplots(figsize=(5.4, 3.4))
        ns = table.column("n")
        ps = table.column("probability")
        ax.plot(ns, _finite(ps), **_LINE_STYLE)
        ax.axhline(0.5, color="grey", linestyle="--", linewidth=0.8)
        delta = report.summary.get("delta")
        if delta:
            ax.axvline(1.0 / delta, color="firebrick", linestyle=":", linewidth=0.8)
        ax.set_xlabel("n")
        ax.set_ylabel("P(w' > rho)")
        ax.set_title("Partition-modulus tail across the family")
        return fig
    if table.name == "theorem3_bound" and {"n", "t", "J"} <= set(cols):
        fig, ax = plt.subplots(figsize=(5.4, 3.4))
        for n_val, pts in sorted(_group_xy(table, "n", "t", "J").items()):
            pts = sorted(pts)
            ax.plot([p[0] for p in pts], _finite([p[1] for p in pts]), label=f"n={n_val}", **_LINE_STYLE)
        ax.set_xscale("log")
        ax.set_xlabel("t")
        ax.set_ylabel("J")
        ax.legend(fontsize=8)
        ax.set_title("Scaled integrated-tail bound")
        return fig
    if set(("u", "t", "value")) <= set(cols) and table.rows:
        fig, ax = plt.subplots(figsize=(5.4, 3.4))
        for u_val, pts in sorted(_group_xy(table, "u", "t", "value").items()):
            pts = sorted((p for p in pts if isinstance(p[0], (int, float))))
            ax.plot([p[0] for p in pts], _finite([p[1] for p in pts]), label=f"u={u_val}", **_LINE_STYLE)
        ax.set_xlabel("t")
        ax.set_ylabel("value")
        if len({r[cols.index('u')] for r in table.rows}) <= 12:
            ax.legend(fontsize=8)
        ax.set_title(report.op)
        return fig
    return None
