"""Three-layer tanh perceptron trained with hand-written backpropagation.

    h1  = dropout(tanh(X W1 + b1))
    h2  = dropout(tanh(h1 W2 + b2))
    out = h2 W3 + b3

Training minimizes mean absolute error, optionally scaled by the batch means
of the symbolic flag columns (``custom_loss``), with Adam and decoupled
weight decay, and stops early on validation MAE.
"""

from __future__ import annotations

import copy
import logging
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

log = logging.getLogger(__name__)

PARAM_NAMES = ("W1", "b1", "W2", "b2", "W3", "b3")

# hyperparameter grid searched by cross-validation
LEARNING_RATES = (0.001, 0.002, 0.003)
WEIGHT_DECAYS = (0.01, 0.03, 0.05)
HIDDEN_SIZES = (32, 64, 128)


class TrainingDiverged(RuntimeError):
    """The training loss became NaN or infinite."""


@dataclass
class MlpModel:
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    W3: np.ndarray
    b3: np.ndarray
    dropout: float = 0.2

    @classmethod
    def init(cls, n_inputs: int, hidden: int, rng: np.random.Generator, dropout: float = 0.2):
        def glorot(fan_in, fan_out):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            return rng.uniform(-limit, limit, size=(fan_in, fan_out))

        return cls(
            W1=glorot(n_inputs, hidden), b1=np.zeros(hidden),
            W2=glorot(hidden, hidden), b2=np.zeros(hidden),
            W3=glorot(hidden, 1), b3=np.zeros(1),
            dropout=dropout,
        )

    @property
    def n_inputs(self) -> int:
        return self.W1.shape[0]

    @property
    def hidden_size(self) -> int:
        return self.W1.shape[1]

    def params(self) -> dict:
        return {name: getattr(self, name) for name in PARAM_NAMES}

    def predict(self, X) -> np.ndarray:
        return mlp_forward(self, X, training=False)[0]


def _dropout_mask(rng, shape, rate):
    return (rng.random(shape) >= rate) / (1.0 - rate)


def mlp_forward(model: MlpModel, X, training: bool = False, rng=None):
    """Forward pass for a batch (or a single row).

    Returns ``(out, cache)`` where ``out`` has one entry per row.  Dropout is
    only applied when ``training`` is true, using inverted scaling.
    """
    single = not sp.issparse(X) and np.ndim(X) == 1
    if single:
        X = np.asarray(X, dtype=float)[None, :]
    if X.shape[1] != model.n_inputs:
        raise ValueError(f"expected {model.n_inputs} inputs, got {X.shape[1]}")
    a1 = np.tanh(np.asarray(X @ model.W1) + model.b1)
    m1 = m2 = None
    if training and model.dropout > 0:
        m1 = _dropout_mask(rng, a1.shape, model.dropout)
        h1 = a1 * m1
    else:
        h1 = a1
    a2 = np.tanh(h1 @ model.W2 + model.b2)
    if training and model.dropout > 0:
        m2 = _dropout_mask(rng, a2.shape, model.dropout)
        h2 = a2 * m2
    else:
        h2 = a2
    out = (h2 @ model.W3 + model.b3).ravel()
    cache = (X, a1, m1, h1, a2, m2, h2)
    return out, cache


class RowGrad:
    """Gradient that is zero outside ``rows`` of a parameter matrix."""

    __slots__ = ("rows", "values")

    def __init__(self, rows: np.ndarray, values: np.ndarray):
        self.rows = rows
        self.values = values

    def dense(self, shape) -> np.ndarray:
        out = np.zeros(shape)
        out[self.rows] = self.values
        return out


def _sparse_input_grad(X: sp.csr_matrix, dz: np.ndarray) -> RowGrad:
    rows, inverse = np.unique(X.indices, return_inverse=True)
    owner = np.repeat(np.arange(X.shape[0]), np.diff(X.indptr))
    values = np.zeros((len(rows), dz.shape[1]))
    np.add.at(values, inverse, dz[owner] * X.data[:, None])
    return RowGrad(rows, values)


def mlp_backward(model: MlpModel, cache, dout: np.ndarray, sparse_w1: bool = False) -> dict:
    """Parameter gradients given ``dout`` = dLoss/dout.

    With ``sparse_w1`` and a sparse input batch the ``W1`` gradient is
    returned as a ``RowGrad`` over the input columns present in the batch.
    """
    X, a1, m1, h1, a2, m2, h2 = cache
    dout = dout.reshape(-1, 1)
    dW3 = h2.T @ dout
    db3 = dout.sum(axis=0)
    dh2 = dout @ model.W3.T
    da2 = dh2 * m2 if m2 is not None else dh2
    dz2 = da2 * (1.0 - a2 * a2)
    dW2 = h1.T @ dz2
    db2 = dz2.sum(axis=0)
    dh1 = dz2 @ model.W2.T
    da1 = dh1 * m1 if m1 is not None else dh1
    dz1 = da1 * (1.0 - a1 * a1)
    if sparse_w1 and sp.issparse(X):
        dW1 = _sparse_input_grad(X.tocsr(), dz1)
    else:
        dW1 = np.asarray(X.T @ dz1)
    db1 = dz1.sum(axis=0)
    return {"W1": dW1, "b1": db1, "W2": dW2, "b2": db2, "W3": dW3, "b3": db3}


def custom_loss(pred, target, flags: Sequence = (), mode: str = "batch"):
    """L1 loss scaled by symbolic flag means; returns ``(loss, dloss/dpred)``.

    ``flags`` holds one array per heuristic, shaped ``(batch,)`` or
    ``(batch, J)`` for a heuristic described by ``J`` binary features.  In
    ``"batch"`` mode every feature adds ``L_pred * mean_batch(x_j)``, so the
    loss is ``L_pred * (1 + sum_j mean(x_j))`` and the factor is a constant
    of the batch.  ``"instance"`` mode instead weights each row's absolute
    error by ``1 + sum_j x_j`` for that row.
    """
    pred = np.asarray(pred, dtype=float).ravel()
    target = np.asarray(target, dtype=float).ravel()
    if pred.shape != target.shape:
        raise ValueError(f"{len(pred)} predictions for {len(target)} targets")
    n = len(pred)
    if n == 0:
        raise ValueError("empty batch")
    blocks = []
    for block in flags:
        block = np.asarray(block, dtype=float)
        block = block.reshape(n, -1)
        blocks.append(block)
    resid = pred - target
    sign = np.sign(resid)
    if mode == "batch":
        factor = 1.0 + sum(float(b.mean(axis=0).sum()) for b in blocks)
        l_pred = np.abs(resid).mean()
        return l_pred * factor, sign * (factor / n)
    if mode == "instance":
        weights = np.ones(n)
        for b in blocks:
            weights += b.sum(axis=1)
        return float((np.abs(resid) * weights).mean()), sign * weights / n
    raise ValueError(f"unknown loss mode {mode!r}")


def loss_and_grads(model: MlpModel, X, y, flags=(), constraints=False, mode="batch",
                   training=False, rng=None):
    out, cache = mlp_forward(model, X, training=training, rng=rng)
    loss, dout = custom_loss(out, y, flags if constraints else (), mode)
    return loss, mlp_backward(model, cache, dout)


@dataclass
class TrainSpec:
    hidden_size: int = 64
    learning_rate: float = 0.002
    weight_decay: float = 0.03
    constraints: bool = False
    heuristics: Optional[tuple] = None
    loss_mode: str = "batch"
    lazy_adam: bool = True
    restore_best: bool = True
    dropout: float = 0.2
    max_epochs: int = 200
    patience: int = 10
    batch_size: int = 32
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["heuristics"] is not None:
            d["heuristics"] = list(d["heuristics"])
        return d


@dataclass
class TrainingLog:
    train_loss: list = field(default_factory=list)
    val_mae: list = field(default_factory=list)
    best_epoch: int = -1
    stopped_early: bool = False

    @property
    def best_val_mae(self) -> float:
        return self.val_mae[self.best_epoch]

    @property
    def epochs(self) -> int:
        return len(self.val_mae)


class AdamW:
    """Adam with weight decay applied directly to the parameters.

    A ``RowGrad`` gradient triggers the lazy variant for that parameter: only
    the listed rows get moment updates.  The weight decay skipped by other
    rows is applied exactly, as a power of the per-step factor, the next time
    a row is touched or when ``flush`` is called.
    """

    def __init__(self, params: dict, lr, weight_decay, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.wd = lr, weight_decay
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.last = {}
        self.t = 0

    def step(self, params: dict, grads: dict) -> None:
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        step = self.lr / c1
        decay = 1.0 - self.lr * self.wd
        for k, p in params.items():
            g = grads[k]
            if isinstance(g, RowGrad):
                self._lazy_step(k, p, g, step, c2, decay)
                continue
            m, v = self.m[k], self.v[k]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p *= decay
            p -= step * m / (np.sqrt(v / c2) + self.eps)

    def _lazy_step(self, k, p, g: RowGrad, step, c2, decay) -> None:
        last = self.last.setdefault(k, np.zeros(p.shape[0], dtype=np.int64))
        rows = g.rows
        p[rows] *= (decay ** (self.t - last[rows]))[:, None]
        last[rows] = self.t
        m = self.beta1 * self.m[k][rows] + (1.0 - self.beta1) * g.values
        v = self.beta2 * self.v[k][rows] + (1.0 - self.beta2) * (g.values * g.values)
        self.m[k][rows] = m
        self.v[k][rows] = v
        p[rows] -= step * m / (np.sqrt(v / c2) + self.eps)

    def flush(self, params: dict) -> None:
        """Bring lazily decayed parameters up to date with the current step."""
        decay = 1.0 - self.lr * self.wd
        for k, last in self.last.items():
            params[k] *= (decay ** (self.t - last))[:, None]
            last[:] = self.t


def _flag_blocks(data, names) -> list[np.ndarray]:
    out = []
    for name, cols in data.heuristic_columns():
        if names is None or name in names:
            out.append(data.X[:, cols].toarray())
    return out


def mae(y_true, y_pred) -> float:
    y_true = np.asarray(y_true, dtype=float).ravel()
    y_pred = np.asarray(y_pred, dtype=float).ravel()
    if y_true.shape != y_pred.shape:
        raise ValueError(f"length mismatch: {len(y_true)} vs {len(y_pred)}")
    if len(y_true) == 0:
        raise ValueError("MAE of an empty sequence")
    return float(np.abs(y_true - y_pred).mean())


def train_mlp(train, val, spec: TrainSpec = TrainSpec()):
    """Mini-batch training with early stopping on validation MAE.

    ``train`` and ``val`` are encoded datasets sharing one column layout.
    Returns the parameters of the best validation epoch (the last epoch if
    ``spec.restore_best`` is off) and the log.
    """
    if train.n_features != val.n_features:
        raise ValueError("train and validation widths differ")
    rng = np.random.default_rng(spec.seed)
    model = MlpModel.init(train.n_features, spec.hidden_size, rng, spec.dropout)
    params = model.params()
    opt = AdamW(params, spec.learning_rate, spec.weight_decay, spec.beta1, spec.beta2, spec.eps)
    X = train.X.tocsr()
    y = train.y
    flags = _flag_blocks(train, spec.heuristics) if spec.constraints else []

    history = TrainingLog()
    best = copy.deepcopy(model)
    best_mae = np.inf
    wait = 0
    n = len(y)
    for epoch in range(spec.max_epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, spec.batch_size):
            idx = order[start:start + spec.batch_size]
            out, cache = mlp_forward(model, X[idx], training=True, rng=rng)
            loss, dout = custom_loss(out, y[idx], [f[idx] for f in flags], spec.loss_mode)
            if not np.isfinite(loss):
                raise TrainingDiverged(f"non-finite loss at epoch {epoch}")
            opt.step(params, mlp_backward(model, cache, dout, sparse_w1=spec.lazy_adam))
            total += loss * len(idx)
        history.train_loss.append(total / n)
        opt.flush(params)
        val_mae = mae(val.y, mlp_forward(model, val.X)[0])
        history.val_mae.append(val_mae)
        if val_mae < best_mae:
            best_mae = val_mae
            best = copy.deepcopy(model)
            history.best_epoch = epoch
            wait = 0
        else:
            wait += 1
            if wait >= spec.patience:
                history.stopped_early = True
                break
    log.debug("trained %d epochs, best %d (val MAE %.4f)",
              history.epochs, history.best_epoch, best_mae)
    return (best if spec.restore_best else model), history
