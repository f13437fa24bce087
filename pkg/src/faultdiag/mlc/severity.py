"""Vibration severity grading by velocity RMS, and the parallel severity tree."""
from __future__ import annotations

import enum
import math
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from .tree import DecisionTreeModel, train_tree, tree_predict

__all__ = [
    "Severity",
    "ISO_VELOCITY_ROWS_MM_S",
    "CLASS_ROW_SHIFT",
    "severity_thresholds",
    "iso_severity_lookup",
    "SeverityModel",
    "train_severity_tree",
    "severity_predict",
]


class Severity(enum.IntEnum):
    GOOD = 0
    SATISFACTORY = 1
    UNSATISFACTORY = 2
    UNACCEPTABLE = 3

    @property
    def label(self) -> str:
        return self.name.capitalize()

    @classmethod
    def parse(cls, text: str) -> "Severity":
        key = str(text).strip().strip("'\"").upper()
        try:
            return cls[key]
        except KeyError:
            raise ValueError(f"unknown severity {text!r}") from None


# Velocity RMS rows of the severity chart, mm/s.
ISO_VELOCITY_ROWS_MM_S = (0.28, 0.45, 0.71, 1.12, 1.80, 2.80, 4.50, 7.71, 11.20, 18.00, 28.00, 45.90)
# Row index where Satisfactory starts for Class I; Unsatisfactory and
# Unacceptable start two and four rows later.
_CLASS_I_FIRST_ROW = 4
CLASS_ROW_SHIFT = {"I": 0, "II": 1, "III": 2, "IV": 3}


def severity_thresholds(machine_class: str = "I", row_shift: dict | None = None) -> tuple[float, float, float]:
    """Lower bounds of Satisfactory, Unsatisfactory and Unacceptable in mm/s."""
    shifts = CLASS_ROW_SHIFT if row_shift is None else row_shift
    if machine_class not in shifts:
        raise ValueError(f"unknown machine class {machine_class!r}")
    first = _CLASS_I_FIRST_ROW + shifts[machine_class]
    return tuple(ISO_VELOCITY_ROWS_MM_S[first + 2 * i] for i in range(3))


def iso_severity_lookup(v_rms_mm_s: float, machine_class: str = "I", row_shift: dict | None = None) -> Severity:
    """Severity band of a vibration velocity RMS; band lower bounds are inclusive."""
    if not (math.isfinite(v_rms_mm_s) and v_rms_mm_s >= 0):
        raise ValueError(f"velocity RMS must be finite and >= 0, got {v_rms_mm_s!r}")
    return Severity(bisect_right(severity_thresholds(machine_class, row_shift), v_rms_mm_s))


@dataclass(frozen=True)
class SeverityModel:
    tree: DecisionTreeModel
    feature_names: tuple = ()


def train_severity_tree(X_vib, y, criterion="gini", max_depth=None, feature_names=()) -> SeverityModel:
    """Four-class tree over vibration-derived features (velocity RMS among them)."""
    y = np.asarray([int(v) for v in y], dtype=int)
    if np.any((y < 0) | (y > 3)):
        raise ValueError("severity labels must be in 0..3")
    return SeverityModel(train_tree(X_vib, y, criterion, max_depth, n_classes=4), tuple(feature_names))


def severity_predict(model: SeverityModel, X_vib) -> list[Severity]:
    X_vib = np.atleast_2d(np.asarray(X_vib, dtype=float))
    return [Severity(tree_predict(model.tree, x)[0]) for x in X_vib]
