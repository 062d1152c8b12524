"""Aggregate metrics: instruction satisfaction rate by level, per-type and
per-category constraint satisfaction, satisfied-count histograms, and
multi-label tool-selection quality.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .constraints import ConstraintType
from .orchestrator import RunResult

REPORT_SCHEMA_VERSION = "v1"

ALL_TYPE_IDS = tuple(t.value for t in ConstraintType)


class EmptyInput(ValueError):
    """Metrics were requested over zero results."""


class LengthMismatch(ValueError):
    """Predicted and truth selection lists differ in length."""


@dataclass(frozen=True)
class SelectionScores:
    hamming_loss: float
    subset_accuracy: float
    precision: float
    recall: float
    f1: float
    averaging: str = "micro"

    def to_json(self) -> dict:
        return {
            "hamming_loss": self.hamming_loss,
            "subset_accuracy": self.subset_accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "averaging": self.averaging,
        }


@dataclass
class EvalReport:
    n_instructions: int
    isr_overall: float
    isr_by_level: dict[int, float] = field(default_factory=dict)
    per_type_rate: dict[str, float] = field(default_factory=dict)
    per_category_rate: dict[str, float] = field(default_factory=dict)
    histogram: dict[int, int] = field(default_factory=dict)
    selection: Optional[SelectionScores] = None

    def to_json(self) -> dict:
        return {
            "version": REPORT_SCHEMA_VERSION,
            "n_instructions": self.n_instructions,
            "isr_overall": self.isr_overall,
            "isr_by_level": {str(k): v for k, v in sorted(self.isr_by_level.items())},
            "per_type_rate": dict(sorted(self.per_type_rate.items())),
            "per_category_rate": dict(sorted(self.per_category_rate.items())),
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
            "selection": self.selection.to_json() if self.selection else None,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "EvalReport":
        selection = None
        if obj.get("selection"):
            sel = obj["selection"]
            selection = SelectionScores(
                hamming_loss=sel["hamming_loss"],
                subset_accuracy=sel["subset_accuracy"],
                precision=sel["precision"],
                recall=sel["recall"],
                f1=sel["f1"],
                averaging=sel.get("averaging", "micro"),
            )
        return cls(
            n_instructions=obj["n_instructions"],
            isr_overall=obj["isr_overall"],
            isr_by_level={int(k): v for k, v in obj.get("isr_by_level", {}).items()},
            per_type_rate=dict(obj.get("per_type_rate", {})),
            per_category_rate=dict(obj.get("per_category_rate", {})),
            histogram={int(k): v for k, v in obj.get("histogram", {}).items()},
            selection=selection,
        )


def isr(results: Sequence[RunResult]) -> float:
    """Fraction of instructions whose every constraint is satisfied."""
    if not results:
        raise EmptyInput("no results to aggregate")
    return sum(1 for r in results if r.satisfied_all) / len(results)


def isr_by_level(results: Sequence[RunResult]) -> dict[int, float]:
    by_level: dict[int, list[RunResult]] = {}
    for res in results:
        by_level.setdefault(res.level, []).append(res)
    return {level: isr(group) for level, group in sorted(by_level.items())}


def per_type_rates(
    results: Sequence[RunResult],
) -> tuple[dict[str, float], dict[str, float]]:
    """Constraint-level satisfaction per type and per general category."""
    type_pass: dict[str, int] = {}
    type_total: dict[str, int] = {}
    cat_pass: dict[str, int] = {}
    cat_total: dict[str, int] = {}
    for res in results:
        for type_id, ok in zip(res.constraint_types, res.verdicts):
            type_total[type_id] = type_total.get(type_id, 0) + 1
            type_pass[type_id] = type_pass.get(type_id, 0) + int(ok)
            try:
                category = ConstraintType(type_id).category.value
            except ValueError:
                category = type_id  # content kinds form their own group
            cat_total[category] = cat_total.get(category, 0) + 1
            cat_pass[category] = cat_pass.get(category, 0) + int(ok)
    types = {t: type_pass[t] / type_total[t] for t in type_total}
    cats = {c: cat_pass[c] / cat_total[c] for c in cat_total}
    return types, cats


def satisfied_histogram(results: Sequence[RunResult]) -> dict[int, int]:
    """How many instructions satisfied exactly k constraints."""
    histogram: dict[int, int] = {}
    for res in results:
        k = sum(res.verdicts)
        histogram[k] = histogram.get(k, 0) + 1
    return histogram


def tool_selection_metrics(
    predicted: Sequence[Iterable[str]],
    truth: Sequence[Iterable[str]],
    averaging: str = "micro",
) -> SelectionScores:
    """Multi-label selection quality over the 21-tool label space."""
    if len(predicted) != len(truth):
        raise LengthMismatch(f"{len(predicted)} predictions vs {len(truth)} truths")
    if not predicted:
        raise EmptyInput("no selection pairs")
    if averaging not in ("micro", "macro"):
        raise ValueError(f"averaging must be micro or macro, got {averaging!r}")
    labels = ALL_TYPE_IDS
    n = len(predicted)
    pred_sets = [set(p) & set(labels) for p in predicted]
    true_sets = [set(t) & set(labels) for t in truth]

    mismatched = 0
    exact = 0
    for p, t in zip(pred_sets, true_sets):
        mismatched += len(p.symmetric_difference(t))
        exact += int(p == t)
    hamming = mismatched / (n * len(labels))
    subset_acc = exact / n

    def prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = (
            2 * precision * recall / (precision + recall)
            if precision + recall
            else 0.0
        )
        return precision, recall, f1

    if averaging == "micro":
        tp = sum(len(p & t) for p, t in zip(pred_sets, true_sets))
        fp = sum(len(p - t) for p, t in zip(pred_sets, true_sets))
        fn = sum(len(t - p) for p, t in zip(pred_sets, true_sets))
        precision, recall, f1 = prf(tp, fp, fn)
    else:
        per_label = []
        for label in labels:
            tp = sum(1 for p, t in zip(pred_sets, true_sets) if label in p and label in t)
            fp = sum(1 for p, t in zip(pred_sets, true_sets) if label in p and label not in t)
            fn = sum(1 for p, t in zip(pred_sets, true_sets) if label not in p and label in t)
            per_label.append(prf(tp, fp, fn))
        precision = sum(x[0] for x in per_label) / len(labels)
        recall = sum(x[1] for x in per_label) / len(labels)
        f1 = sum(x[2] for x in per_label) / len(labels)

    return SelectionScores(hamming, subset_acc, precision, recall, f1, averaging)


def build_report(
    results: Sequence[RunResult],
    truth_selection: Optional[Sequence[Iterable[str]]] = None,
    predicted_selection: Optional[Sequence[Iterable[str]]] = None,
    averaging: str = "micro",
) -> EvalReport:
    if not results:
        raise EmptyInput("no results to aggregate")
    types, cats = per_type_rates(results)
    selection = None
    if truth_selection is not None:
        predicted = (
            predicted_selection
            if predicted_selection is not None
            else [r.selected_types for r in results]
        )
        selection = tool_selection_metrics(predicted, truth_selection, averaging)
    return EvalReport(
        n_instructions=len(results),
        isr_overall=isr(results),
        isr_by_level=isr_by_level(results),
        per_type_rate=types,
        per_category_rate=cats,
        histogram=satisfied_histogram(results),
        selection=selection,
    )


def render_report(report: EvalReport, fmt: str = "table") -> str:
    """A single report as a level table or as versioned JSON."""
    if fmt == "json":
        return json.dumps(report.to_json(), indent=2, ensure_ascii=False)
    if fmt != "table":
        raise ValueError(f"unknown format {fmt!r}")
    lines = [
        f"Instructions: {report.n_instructions}",
        f"Overall ISR: {100 * report.isr_overall:.1f}",
    ]
    if report.isr_by_level:
        header = "Level    " + "  ".join(
            f"{level:>7}" for level in sorted(report.isr_by_level)
        )
        row = "ISR      " + "  ".join(
            f"{100 * report.isr_by_level[level]:>7.1f}"
            for level in sorted(report.isr_by_level)
        )
        lines += [header, row]
    if report.per_category_rate:
        lines.append("Per-category satisfaction:")
        for cat, rate in sorted(report.per_category_rate.items()):
            lines.append(f"  {cat:<20} {100 * rate:>6.2f}")
    if report.selection:
        sel = report.selection
        lines.append(
            "Tool selection:  hamming_loss {:.4f}  accuracy {:.4f}  "
            "precision {:.4f}  recall {:.4f}  f1 {:.4f}".format(
                sel.hamming_loss, sel.subset_accuracy, sel.precision,
                sel.recall, sel.f1,
            )
        )
    return "\n".join(lines)


def render_method_table(reports: dict[str, EvalReport]) -> str:
    """Methods-by-levels ISR table for side-by-side strategy comparison."""
    levels = sorted({lvl for rep in reports.values() for lvl in rep.isr_by_level})
    header = f"{'Method':<22}" + "".join(f"  Level {lvl}" for lvl in levels)
    lines = [header, "-" * len(header)]
    for method, rep in reports.items():
        cells = "".join(
            f"  {100 * rep.isr_by_level[lvl]:>7.1f}" if lvl in rep.isr_by_level else "        -"
            for lvl in levels
        )
        lines.append(f"{method:<22}{cells}")
    return "\n".join(lines)
