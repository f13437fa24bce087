"""Multi-label evaluation: pooled confusion counts, P/R/F1, accuracies, reports."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

__all__ = [
    "ConfusionCounts",
    "EvaluationReport",
    "confusion",
    "prf1",
    "subset_accuracy",
    "per_label_accuracy",
    "build_report",
    "render_table",
]


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


def _pair(y_true, y_pred):
    a = np.asarray(y_true, dtype=int)
    b = np.asarray(y_pred, dtype=int)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    if a.ndim == 1:
        a, b = a[:, None], b[:, None]
    return a, b


def confusion(y_true, y_pred, positive_class: int = 1) -> ConfusionCounts:
    """Counts pooled over every (sample, label) cell."""
    a, b = _pair(y_true, y_pred)
    t = a == positive_class
    p = b == positive_class
    return ConfusionCounts(
        tp=int(np.sum(t & p)),
        fp=int(np.sum(~t & p)),
        fn=int(np.sum(t & ~p)),
        tn=int(np.sum(~t & ~p)),
    )


def _ratio(num, den):
    return num / den if den else 0.0


def prf1(c: ConfusionCounts) -> tuple[float, float, float]:
    """Precision, recall, F1; any 0/0 is taken as 0."""
    p = _ratio(c.tp, c.tp + c.fp)
    r = _ratio(c.tp, c.tp + c.fn)
    return p, r, _ratio(2 * p * r, p + r)


def subset_accuracy(y_true, y_pred) -> float:
    a, b = _pair(y_true, y_pred)
    return float(np.mean(np.all(a == b, axis=1)))


def per_label_accuracy(y_true, y_pred) -> list[float]:
    a, b = _pair(y_true, y_pred)
    return np.mean(a == b, axis=0).tolist()


@dataclass(frozen=True)
class ClassRow:
    cls: int
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class EvaluationReport:
    model: str
    rows: tuple
    subset_accuracy: float
    per_label_accuracy: tuple
    per_label: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def render(self) -> str:
        return render_table([self])


def build_report(model_name: str, y_true, y_pred, label_names=None, extra=None) -> EvaluationReport:
    """Table-style report: one row per class (0 and 1) pooled over labels."""
    a, b = _pair(y_true, y_pred)
    rows = []
    for cls in (0, 1):
        c = confusion(a, b, cls)
        rows.append(ClassRow(cls, *prf1(c), support=c.tp + c.fn))
    names = label_names or [f"label{j}" for j in range(a.shape[1])]
    per_label = {}
    for j, name in enumerate(names):
        per_label[name] = {
            str(cls): dict(zip(("precision", "recall", "f1"), prf1(confusion(a[:, j], b[:, j], cls))))
            for cls in (0, 1)
        }
    return EvaluationReport(
        model_name,
        tuple(rows),
        subset_accuracy(a, b),
        tuple(per_label_accuracy(a, b)),
        per_label,
        dict(extra or {}),
    )


def render_table(reports) -> str:
    lines = [f"{'model':<26}{'class':>6}{'precision':>11}{'recall':>9}{'f1-score':>10}{'support':>9}"]
    for rep in reports:
        for i, row in enumerate(rep.rows):
            name = rep.model if i == 0 else ""
            lines.append(
                f"{name:<26}{row.cls:>6}{row.precision:>11.2f}{row.recall:>9.2f}{row.f1:>10.2f}{row.support:>9}"
            )
        accs = ", ".join(f"{v:.4f}" for v in rep.per_label_accuracy)
        lines.append(f"{'':<26}subset accuracy {rep.subset_accuracy:.4f}; per-label accuracy [{accs}]")
        for key, val in rep.extra.items():
            lines.append(f"{'':<26}{key}: {val}")
    return "\n".join(lines)
