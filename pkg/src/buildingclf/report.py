"""CSV tables and SVG figures for evaluation reports.

SVG is emitted directly (no plotting library) so repeated runs produce
byte-identical artifacts.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from . import schema
from .eval import EvalReport, ImportanceReport

METRIC_ROWS = ["Overall accuracy", "Cohen's kappa", "Range of F1-scores",
               "Macro F1-score"]


def _fmt(value: float, std: float, n_runs: int) -> str:
    if n_runs > 1:
        return f"{value:.4f} ± {std:.4f}"
    return f"{value:.4f}"


def metrics_csv(reports: dict[str, EvalReport], path) -> None:
    """Performance table: metric rows, one column per report."""
    cols = list(reports)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["Metric"] + cols)
        w.writerow(["Overall accuracy"] +
                   [_fmt(reports[c].oa, reports[c].oa_std, reports[c].n_runs)
                    for c in cols])
        w.writerow(["Cohen's kappa"] +
                   [_fmt(reports[c].kappa, reports[c].kappa_std,
                         reports[c].n_runs) for c in cols])
        w.writerow(["Range of F1-scores"] +
                   [f"[{reports[c].f1_range[0]:.4f}-{reports[c].f1_range[1]:.4f}]"
                    for c in cols])
        w.writerow(["Macro F1-score"] +
                   [_fmt(reports[c].macro_f1, reports[c].macro_f1_std,
                         reports[c].n_runs) for c in cols])


def per_class_csv(report: EvalReport, path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["class", "precision", "recall", "f1", "support",
                    "present", "precision_defined"])
        for row in report.per_class:
            w.writerow([row["class"], f"{row['precision']:.6f}",
                        f"{row['recall']:.6f}", f"{row['f1']:.6f}",
                        row["support"], row["present"],
                        row["precision_defined"]])


def breakdown_csv(report: EvalReport, name: str, path) -> None:
    table = report.breakdowns.get(name, {})
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow([name, "oa", "n", "low_support"])
        for key in sorted(table):
            row = table[key]
            w.writerow([key, f"{row['oa']:.6f}", row["n"], row["low_support"]])


def compare_settings_csv(table: dict[str, dict[str, str]], columns, path):
    """Rows are tasks, columns subgraph-generation settings."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["task"] + list(columns))
        for task in table:
            w.writerow([task] + [table[task].get(c, "") for c in columns])


# ---------------------------------------------------------------------------
# SVG
# ---------------------------------------------------------------------------

def _svg_header(width, height):
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
            f'height="{height}" viewBox="0 0 {width} {height}" '
            f'font-family="sans-serif">\n')


def confusion_svg(report: EvalReport, path) -> None:
    """Row-normalized confusion matrix heatmap with counts."""
    cm = np.asarray(report.confusion, dtype=float)
    k = len(cm)
    names = schema.task_class_names(report.task)
    cell = 46
    left, top = 130, 60
    width = left + k * cell + 20
    height = top + k * cell + 90
    out = [_svg_header(width, height)]
    out.append(f'<text x="{left}" y="24" font-size="15">'
               f'Confusion matrix ({report.task}, n={report.n_test})</text>\n')
    row_sums = cm.sum(axis=1, keepdims=True)
    frac = np.divide(cm, np.where(row_sums == 0, 1, row_sums))
    for i in range(k):
        for j in range(k):
            shade = int(round(255 - 200 * frac[i, j]))
            x, y = left + j * cell, top + i * cell
            out.append(
                f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" '
                f'fill="rgb({shade},{shade},255)" stroke="#888"/>\n')
            out.append(
                f'<text x="{x + cell / 2}" y="{y + cell / 2 + 4}" '
                f'font-size="10" text-anchor="middle">{int(cm[i, j])}</text>\n')
    for i, name in enumerate(names):
        out.append(f'<text x="{left - 6}" y="{top + i * cell + cell / 2 + 4}" '
                   f'font-size="10" text-anchor="end">{name}</text>\n')
        out.append(
            f'<text x="{left + i * cell + cell / 2}" '
            f'y="{top + k * cell + 12}" font-size="10" text-anchor="middle" '
            f'transform="rotate(45 {left + i * cell + cell / 2} '
            f'{top + k * cell + 12})">{name}</text>\n')
    out.append(f'<text x="{left - 110}" y="{top - 10}" font-size="11">'
               'truth \\ prediction</text>\n')
    out.append("</svg>\n")
    Path(path).write_text("".join(out))


def _bar_chart(title, labels, values, path, color="#4477aa"):
    n = len(labels)
    bar_h, gap = 18, 6
    left, top = 230, 50
    vmax = max(max(values), 1e-12)
    width = 640
    height = top + n * (bar_h + gap) + 30
    out = [_svg_header(width, height)]
    out.append(f'<text x="20" y="26" font-size="15">{title}</text>\n')
    for i, (lab, val) in enumerate(zip(labels, values)):
        y = top + i * (bar_h + gap)
        w = max(0.0, (width - left - 90) * val / vmax)
        out.append(f'<text x="{left - 8}" y="{y + bar_h - 5}" font-size="11" '
                   f'text-anchor="end">{lab}</text>\n')
        out.append(f'<rect x="{left}" y="{y}" width="{w:.2f}" '
                   f'height="{bar_h}" fill="{color}"/>\n')
        out.append(f'<text x="{left + w + 6:.2f}" y="{y + bar_h - 5}" '
                   f'font-size="11">{val:.4f}</text>\n')
    out.append("</svg>\n")
    Path(path).write_text("".join(out))


def importance_svg(report: ImportanceReport, top_path, group_path,
                   top_n: int = 10) -> None:
    drops = np.asarray(report.per_feature)
    order = np.argsort(-drops)[:top_n]
    _bar_chart(f"Top {top_n} features by permutation importance "
               f"(kappa drop, base {report.base_kappa:.4f})",
               [schema.FEATURE_NAMES[i] for i in order],
               [float(drops[i]) for i in order], top_path)
    groups = list(report.per_group)
    _bar_chart("Feature-group permutation importance (kappa drop)",
               groups, [report.per_group[g] for g in groups], group_path,
               color="#aa7744")


def f1_bars_svg(report: EvalReport, path) -> None:
    labels = [row["class"] for row in report.per_class if row["present"]]
    values = [row["f1"] for row in report.per_class if row["present"]]
    _bar_chart(f"Per-class F1 ({report.task})", labels, values, path,
               color="#44aa77")
