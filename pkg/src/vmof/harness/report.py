"""Per-problem comparison tables in the usual layout of EMO result tables."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from vmof.errors import MissingCell
from vmof.harness.stats import wilcoxon_rank_sum

LOWER_IS_BETTER = {"igd": True, "hv": False}


@dataclass
class TableRow:
    """Medians per algorithm, marks of each algorithm against the baseline.

    A mark of ``'+'`` means that algorithm is significantly better than the
    baseline, ``'-'`` significantly worse. ``roc`` is the baseline's
    relative improvement over the best other algorithm (positive when the
    baseline wins) and is ``nan`` when undefined.
    """

    problem: str
    medians: dict[str, float]
    marks: dict[str, str] = field(default_factory=dict)
    p_values: dict[str, float] = field(default_factory=dict)
    best: str = ""
    roc: float = math.nan


def compare_table(records, baseline: str, metric: str = "igd", alpha: float = 0.05) -> list[TableRow]:
    if metric not in LOWER_IS_BETTER:
        raise ValueError(f"metric must be one of {sorted(LOWER_IS_BETTER)}")
    low = LOWER_IS_BETTER[metric]
    sign = 1.0 if low else -1.0
    values: dict[str, dict[str, list[float]]] = {}
    for r in records:
        if r.error:
            continue
        values.setdefault(r.problem, {}).setdefault(r.algorithm, []).append(float(getattr(r, metric)))
    algorithms = sorted({r.algorithm for r in records})
    rows = []
    for problem in sorted(values):
        cell = values[problem]
        for a in algorithms:
            if len(cell.get(a, [])) < 2:
                raise MissingCell(f"{a} on {problem} has fewer than two successful seeds")
        medians = {a: float(np.median(cell[a])) for a in algorithms}
        row = TableRow(problem, medians)
        row.best = min(algorithms, key=lambda a: (sign * medians[a], a))
        others = [a for a in algorithms if a != baseline]
        for a in others:
            # the test minimises, so flip the sign for metrics to maximise
            p, mark = wilcoxon_rank_sum(sign * np.asarray(cell[a]), sign * np.asarray(cell[baseline]), alpha)
            row.p_values[a] = p
            row.marks[a] = mark
        if others:
            best_other = min((medians[a] for a in others), key=lambda v: sign * v)
            if best_other != 0:
                roc = (best_other - medians[baseline]) / best_other
                row.roc = roc if low else -roc
            elif medians[baseline] == 0:
                row.roc = 0.0
        rows.append(row)
    return rows


def format_table(rows: list[TableRow], baseline: str, metric: str) -> str:
    """CSV text: median and mark per algorithm, then best and ROC columns."""
    if not rows:
        return ""
    algorithms = [baseline] + [a for a in rows[0].medians if a != baseline]
    head = ["problem"]
    for a in algorithms:
        head += [f"{a}_median", f"{a}_mark"] if a != baseline else [f"{a}_median"]
    head += ["best", f"roc_{baseline}_vs_best_other"]
    lines = [",".join(head)]
    for r in rows:
        cols = [f'"{r.problem}"' if "," in r.problem else r.problem]
        for a in algorithms:
            cols.append(format(r.medians[a], ".6g"))
            if a != baseline:
                cols.append(r.marks.get(a, ""))
        cols.append(r.best)
        cols.append("" if math.isnan(r.roc) else f"{100 * r.roc:.2f}%")
        lines.append(",".join(cols))
    lines.append(f"# metric={metric}; marks compare each algorithm with {baseline}: + better, - worse, = no significant difference")
    lines.append("# roc = (best_other - baseline) / best_other, positive when the baseline is better")
    return "\n".join(lines) + "\n"
