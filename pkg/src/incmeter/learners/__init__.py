"""Regression and neural predictors of inconsistency values."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .linear import ALPHA_GRID, LinearModel, fit_lasso, fit_ols, fit_ridge, lasso_alpha_max
from .mlp import (
    HIDDEN_SIZES,
    LEARNING_RATES,
    PARAM_NAMES,
    WEIGHT_DECAYS,
    MlpModel,
    TrainingDiverged,
    TrainingLog,
    TrainSpec,
    custom_loss,
    loss_and_grads,
    mae,
    mlp_backward,
    mlp_forward,
    train_mlp,
)

__all__ = [
    "ALPHA_GRID", "HIDDEN_SIZES", "LEARNING_RATES", "WEIGHT_DECAYS",
    "LinearModel", "MlpModel", "TrainSpec", "TrainingLog", "TrainingDiverged",
    "fit_ols", "fit_ridge", "fit_lasso", "lasso_alpha_max",
    "mlp_forward", "mlp_backward", "custom_loss", "loss_and_grads", "train_mlp",
    "predict", "mae", "save_model", "load_model",
]


def predict(model, X) -> np.ndarray:
    """Deterministic predictions, one per row of ``X``; dropout is never applied."""
    return np.asarray(model.predict(X), dtype=float).ravel()


def save_model(model, path, spec: TrainSpec | None = None, fingerprint: str | None = None) -> None:
    """JSON checkpoint with shapes and flattened row-major parameters."""
    if isinstance(model, LinearModel):
        doc = {
            "kind": model.kind,
            "shapes": {"coefficients": [len(model.coefficients)]},
            "params": {"coefficients": model.coefficients.tolist(), "intercept": model.intercept},
            "alpha": model.alpha,
        }
    elif isinstance(model, MlpModel):
        doc = {
            "kind": "mlp",
            "shapes": {k: list(v.shape) for k, v in model.params().items()},
            "params": {k: v.ravel().tolist() for k, v in model.params().items()},
            "dropout": model.dropout,
        }
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    doc["train_spec"] = spec.to_dict() if spec is not None else None
    doc["fingerprint"] = fingerprint
    Path(path).write_text(json.dumps(doc) + "\n")


def load_model(path):
    """Inverse of ``save_model``; returns ``(model, metadata)``."""
    doc = json.loads(Path(path).read_text())
    kind = doc.get("kind")
    if kind == "mlp":
        arrays = {
            k: np.array(doc["params"][k], dtype=float).reshape(doc["shapes"][k])
            for k in PARAM_NAMES
        }
        model = MlpModel(**arrays, dropout=doc.get("dropout", 0.2))
    elif kind in ("ols", "ridge", "lasso"):
        model = LinearModel(
            kind=kind,
            coefficients=np.array(doc["params"]["coefficients"], dtype=float),
            intercept=float(doc["params"]["intercept"]),
            alpha=doc.get("alpha"),
        )
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    meta = {"train_spec": doc.get("train_spec"), "fingerprint": doc.get("fingerprint")}
    return model, meta
