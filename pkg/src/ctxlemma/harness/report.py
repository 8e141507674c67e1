"""Report tables, score-vs-context plot data and figures."""

from __future__ import annotations

import csv
import io
import traceback
from pathlib import Path

from .experiment import ReportRow, SweepReport

COLUMNS = ("model", "train_policy", "eval_context", "n", "acc_cs", "acc_ci", "score")
FAILED_MARKER = "FAILED"


def _cells(row: ReportRow) -> list[str]:
    m = row.metrics
    return [row.model, row.train_policy, row.eval_context, str(m.n),
            f"{m.acc_cs:.6f}", f"{m.acc_ci:.6f}", f"{m.score:.6f}"]


def render_table(report: SweepReport, fmt: str) -> str:
    if fmt in ("csv", "tsv"):
        buf = io.StringIO()
        writer = csv.writer(buf, delimiter="," if fmt == "csv" else "\t", lineterminator="\n")
        writer.writerow(COLUMNS)
        for row in report.rows:
            writer.writerow(_cells(row))
        return buf.getvalue()
    if fmt == "markdown":
        parts = []
        for model, rows in report.by_model().items():
            parts.append(f"## {model}\n")
            parts.append("| " + " | ".join(COLUMNS[1:]) + " |")
            parts.append("|" + "---|" * (len(COLUMNS) - 1))
            for row in rows:
                parts.append("| " + " | ".join(_cells(row)[1:]) + " |")
            parts.append("")
        return "\n".join(parts)
    raise ValueError(f"unknown report format {fmt!r}")


def context_length(eval_context: str) -> int | None:
    """0 for no context, k for fixed-k, None for variable context."""
    if eval_context == "none":
        return 0
    if eval_context.startswith("fixed-"):
        return int(eval_context[len("fixed-"):])
    return None


def plot_points(rows: list[ReportRow]) -> tuple[list[tuple[int, float]], list[float]]:
    fixed, variable = [], []
    for row in rows:
        k = context_length(row.eval_context)
        if k is None:
            variable.append(row.metrics.score)
        else:
            fixed.append((k, row.metrics.score))
    return sorted(fixed), variable


def render_plot_data(rows: list[ReportRow]) -> str:
    """``context_length,score`` per fixed point, then a ``variable,score`` record if present."""
    fixed, variable = plot_points(rows)
    lines = ["context_length,score"]
    lines += [f"{k},{s:.6f}" for k, s in fixed]
    lines += [f"variable,{s:.6f}" for s in variable]
    return "\n".join(lines) + "\n"


def read_plot_data(path) -> tuple[list[tuple[int, float]], list[float]]:
    fixed, variable = [], []
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    for line in lines[1:]:
        k, s = line.split(",")
        if k == "variable":
            variable.append(float(s))
        else:
            fixed.append((int(k), float(s)))
    return fixed, variable


def render_figure(model: str, rows: list[ReportRow], path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fixed, variable = plot_points(rows)
    fig, ax = plt.subplots(figsize=(5.0, 3.2))
    if fixed:
        xs, ys = zip(*fixed)
        ax.plot(xs, ys, "o", color="C0", label="fixed context")
    for s in variable:
        ax.axhline(s, linestyle="--", color="C1", label="variable context")
    ax.set_xlabel("context length (words each side)")
    ax.set_ylabel("score")
    ax.set_title(model)
    ax.grid(alpha=0.3)
    if fixed or variable:
        ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="png", dpi=100, metadata={"Software": None})
    plt.close(fig)


def emit_report(report: SweepReport, out_dir, fmt: str = "csv", figures: bool = True) -> list[Path]:
    """Write the table, per-model plot data (and figures) and provenance; returns written paths."""
    if not report.rows:
        raise ValueError("report has no rows")
    out = Path(out_dir)
    if not out.is_dir():
        raise FileNotFoundError(f"output directory {out} does not exist")
    ext = {"csv": "csv", "tsv": "tsv", "markdown": "md"}.get(fmt)
    if ext is None:
        raise ValueError(f"unknown report format {fmt!r}")
    written = []
    table = out / f"report.{ext}"
    table.write_text(render_table(report, fmt), encoding="utf-8")
    written.append(table)
    for model, rows in report.by_model().items():
        p = out / f"plot_{model}.csv"
        p.write_text(render_plot_data(rows), encoding="utf-8")
        written.append(p)
        if figures:
            fig_path = out / f"score_vs_context_{model}.png"
            render_figure(model, rows, fig_path)
            written.append(fig_path)
    prov = out / "provenance.txt"
    lines = [f"{k}={v}" for k, v in report.provenance.items()]
    lines.append(f"complete={'true' if report.complete else 'false'}")
    prov.write_text("\n".join(lines) + "\n", encoding="utf-8")
    written.append(prov)
    return written


def write_failure(out_dir, exc: BaseException) -> Path:
    path = Path(out_dir) / FAILED_MARKER
    path.write_text("".join(traceback.format_exception_only(type(exc), exc)), encoding="utf-8")
    return path
