"""End-to-end flow: simulate, featurize, build dataset, train, evaluate, diagnose."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import dataset as dsmod
from .config import RunConfig
from .dataset import VIB_FEATURE_NAMES, Dataset, Scaler
from .features import N_FEATURES
from .metrics import EvaluationReport, build_report
from .mlc import (
    Severity,
    chain_predict_batch,
    mlknn_predict_batch,
    model_from_dict,
    model_to_dict,
    severity_predict,
    train_binary_relevance,
    train_chain,
    train_mlknn,
    train_severity_tree,
)

__all__ = [
    "MODEL_TITLES",
    "Bundle",
    "feature_mask",
    "build",
    "manifest",
    "fit",
    "predict_labels",
    "evaluate",
    "run_benchmark",
    "diagnose_observation",
    "save_bundle",
    "load_bundle",
]

MODEL_TITLES = {"brtree": "Binarized Decision Tree", "chain": "Classifier Chain", "mlknn": "ML-kNN"}
BUNDLE_VERSION = 1


def feature_mask(drop_distances: bool) -> np.ndarray:
    """Column indices fed to the classifiers; optionally without the signature distances."""
    return np.arange(N_FEATURES - 3 if drop_distances else N_FEATURES)


def build(cfg: RunConfig) -> Dataset:
    return dsmod.build_dataset(cfg.scenarios(), cfg["per_condition"], cfg.current_noise(), cfg.seed, cfg.setup())


def manifest(cfg: RunConfig, csv_path) -> dict:
    digest = hashlib.sha256(Path(csv_path).read_bytes()).hexdigest()
    return {"seed": cfg.seed, "config": cfg.data, "dataset_csv": Path(csv_path).name, "sha256": digest}


@dataclass(frozen=True)
class Bundle:
    """A trained fault model plus everything needed to apply it."""

    name: str
    model: object
    severity: object
    scaler: Scaler
    columns: np.ndarray
    train_ids: tuple
    test_ids: tuple
    params: dict

    def to_dict(self) -> dict:
        return {
            "format": "faultdiag-bundle",
            "version": BUNDLE_VERSION,
            "name": self.name,
            "params": self.params,
            "columns": self.columns.tolist(),
            "scaler": self.scaler.to_dict(),
            "train_ids": list(self.train_ids),
            "test_ids": list(self.test_ids),
            "model": model_to_dict(self.model),
            "severity": model_to_dict(self.severity),
        }

    @classmethod
    def from_dict(cls, d) -> "Bundle":
        if d.get("format") != "faultdiag-bundle" or d.get("version") != BUNDLE_VERSION:
            raise ValueError("not a supported faultdiag model bundle")
        return cls(
            d["name"],
            model_from_dict(d["model"]),
            model_from_dict(d["severity"]),
            Scaler.from_dict(d["scaler"]),
            np.array(d["columns"], dtype=int),
            tuple(d["train_ids"]),
            tuple(d["test_ids"]),
            d["params"],
        )


def save_bundle(bundle: Bundle, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(bundle.to_dict(), indent=1))
    return path


def load_bundle(path) -> Bundle:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"model file not found: {path}")
    return Bundle.from_dict(json.loads(path.read_text()))


def _train_model(name, X, Y, params):
    if name == "brtree":
        return train_binary_relevance(X, Y, params["criterion"], params["max_depth"])
    if name == "chain":
        return train_chain(X, Y, params["chain_order"])
    if name == "mlknn":
        return train_mlknn(X, Y, params["knn_k"], params["knn_s"])
    raise ValueError(f"unknown model {name!r}")


def fit(ds: Dataset, cfg: RunConfig, name: str | None = None, **param_overrides) -> Bundle:
    """Split, scale on the training part, train the fault model and the severity tree."""
    params = dict(cfg.classifier, **param_overrides)
    name = name or params["model"]
    params["model"] = name
    train, test = dsmod.split(ds, float(cfg["split"]), cfg.seed)
    scaler, train_n = dsmod.normalize(train)
    cols = feature_mask(bool(params["drop_distances"]))
    model = _train_model(name, train_n.X[:, cols], train_n.Y, params)
    severity = train_severity_tree(train.X_vib, train.severities, feature_names=VIB_FEATURE_NAMES)
    return Bundle(name, model, severity, scaler, cols, tuple(train.ids.tolist()), tuple(test.ids.tolist()), params)


def predict_labels(bundle: Bundle, X_raw) -> np.ndarray:
    X = bundle.scaler.transform(np.atleast_2d(X_raw))[:, bundle.columns]
    if bundle.name == "brtree":
        return bundle.model.predict(X)
    if bundle.name == "chain":
        return chain_predict_batch(bundle.model, X)
    return mlknn_predict_batch(bundle.model, X)


def evaluate(bundle: Bundle, ds: Dataset) -> EvaluationReport:
    """Table-style report on the bundle's held-out samples."""
    test = ds.subset(bundle.test_ids)
    pred = predict_labels(bundle, test.X)
    sev_pred = np.array([int(s) for s in severity_predict(bundle.severity, test.X_vib)])
    extra = {"severity_accuracy": float(np.mean(sev_pred == test.severities)), "n_test": len(test)}
    if bundle.name == "mlknn":
        extra["k"] = bundle.params["knn_k"]
    if bundle.name == "brtree":
        extra["criterion"] = bundle.params["criterion"]
        extra["max_depth"] = bundle.params["max_depth"]
    return build_report(MODEL_TITLES[bundle.name], test.Y, pred, list(dsmod.LABEL_NAMES), extra)


def run_benchmark(cfg: RunConfig, ds: Dataset | None = None, k_values=range(1, 11)) -> dict:
    """Train and evaluate all three fault models; ML-kNN reports its best k."""
    ds = ds if ds is not None else build(cfg)
    reports = {}
    for name in ("brtree", "chain"):
        reports[name] = evaluate(fit(ds, cfg, name), ds)
    best = None
    for k in k_values:
        rep = evaluate(fit(ds, cfg, "mlknn", knn_k=int(k)), ds)
        if best is None or rep.subset_accuracy > best.subset_accuracy:
            best = rep
    reports["mlknn"] = best
    return reports


def diagnose_observation(bundle: Bundle, cfg: RunConfig, condition: str, sample_id: int, disturbed: bool) -> dict:
    """Simulate one observation of ``condition`` and run it through a trained bundle."""
    setup = cfg.setup()
    scenarios = {s.name: s for s in cfg.scenarios()}
    if condition not in scenarios:
        raise ValueError(f"unknown condition {condition!r}; choose from {sorted(scenarios)}")
    noise = cfg.current_noise()
    baseline = dsmod.build_reference(setup, noise, cfg.seed)
    sample = dsmod.make_sample(setup, scenarios[condition], noise, cfg.seed, sample_id, not disturbed, baseline)
    labels = predict_labels(bundle, sample.features.values)[0]
    sev = severity_predict(bundle.severity, [sample.vibration])[0]
    return {
        "condition": condition,
        "sample_id": sample_id,
        "isUnbalance": int(labels[0]),
        "isMisalignment": int(labels[1]),
        "severity": Severity(sev).label,
        "iso_severity": sample.severity.label,
        "vib_rms_mm_s": round(sample.vibration[0], 6),
        "true_labels": list(sample.labels),
    }
