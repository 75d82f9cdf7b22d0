"""Small MLP with backprop, SGD + momentum, and a finite-difference check.

ReLU hidden layers, linear output, MSE loss.  Everything is float64 numpy;
training is deterministic given (seed, data order, config).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

WEIGHTS_MAGIC = b"HFNN"
WEIGHTS_VERSION = 1


class DivergenceError(RuntimeError):
    """A parameter or loss went non-finite during training."""


class NetFormatError(ValueError):
    pass


@dataclass
class SgdConfig:
    learning_rate: float = 1e-3
    momentum: float = 0.9
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if not 0 <= self.momentum < 1:
            raise ValueError("momentum must be in [0, 1)")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


class Mlp:
    def __init__(self, layer_sizes: list[int], seed: int = 0):
        if len(layer_sizes) < 2 or any(n < 1 for n in layer_sizes):
            raise ValueError(f"bad layer sizes {layer_sizes}")
        self.layer_sizes = list(layer_sizes)
        rng = np.random.default_rng(seed)
        self.weights = []
        self.biases = []
        last = len(layer_sizes) - 2
        for i, (n_in, n_out) in enumerate(zip(layer_sizes, layer_sizes[1:])):
            # Xavier-uniform weights; hidden biases slightly positive so no
            # layer starts fully dead (exact-kink pre-activations break both
            # learning and finite-difference checks)
            bound = np.sqrt(6.0 / (n_in + n_out))
            self.weights.append(rng.uniform(-bound, bound, size=(n_out, n_in)))
            self.biases.append(np.full(n_out, 0.0 if i == last else 0.01))
        self._velocity = None  # momentum state, lazily allocated

    @property
    def in_dim(self) -> int:
        return self.layer_sizes[0]

    @property
    def out_dim(self) -> int:
        return self.layer_sizes[-1]

    def copy(self) -> "Mlp":
        m = Mlp.__new__(Mlp)
        m.layer_sizes = list(self.layer_sizes)
        m.weights = [w.copy() for w in self.weights]
        m.biases = [b.copy() for b in self.biases]
        m._velocity = None
        return m

    def check_finite(self):
        for p in self.weights + self.biases:
            if not np.isfinite(p).all():
                raise DivergenceError("non-finite parameter detected")


def forward(m: Mlp, x: np.ndarray) -> np.ndarray:
    """Feedforward; accepts a single input vector or a batch (N, in_dim)."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    a = x[None, :] if single else x
    if a.shape[1] != m.in_dim:
        raise ValueError(f"input dim {a.shape[1]} != {m.in_dim}")
    last = len(m.weights) - 1
    for i, (w, b) in enumerate(zip(m.weights, m.biases)):
        a = a @ w.T + b
        if i != last:
            a = np.maximum(a, 0.0)
    return a[0] if single else a


def _forward_cached(m: Mlp, x: np.ndarray):
    activations = [x]
    last = len(m.weights) - 1
    a = x
    for i, (w, b) in enumerate(zip(m.weights, m.biases)):
        a = a @ w.T + b
        if i != last:
            a = np.maximum(a, 0.0)
        activations.append(a)
    return activations


def mse_loss(pred: np.ndarray, target: np.ndarray) -> float:
    return float(np.mean((pred - target) ** 2))


def gradients(m: Mlp, x: np.ndarray, y: np.ndarray):
    """Backprop gradients of mean squared error over the batch.

    Returns (loss, dW list, db list); loss is the pre-step MSE.
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    acts = _forward_cached(m, x)
    pred = acts[-1]
    loss = mse_loss(pred, y)
    n = pred.size
    delta = 2.0 * (pred - y) / n
    dws, dbs = [], []
    for i in range(len(m.weights) - 1, -1, -1):
        dws.append(delta.T @ acts[i])
        dbs.append(delta.sum(axis=0))
        if i > 0:
            delta = (delta @ m.weights[i]) * (acts[i] > 0)
    dws.reverse()
    dbs.reverse()
    return loss, dws, dbs


def train_step(m: Mlp, batch, cfg: SgdConfig) -> tuple[Mlp, float]:
    """One SGD-with-momentum step on MSE over the batch; returns pre-step loss."""
    if not len(batch):
        raise ValueError("empty batch")
    if isinstance(batch, tuple) and len(batch) == 2:
        x, y = batch
    else:
        x = np.stack([np.asarray(b[0], dtype=np.float64) for b in batch])
        y = np.stack([np.atleast_1d(np.asarray(b[1], dtype=np.float64)) for b in batch])
    loss, dws, dbs = gradients(m, x, y)
    if not np.isfinite(loss):
        raise DivergenceError(f"loss is {loss}")
    if m._velocity is None:
        m._velocity = [np.zeros_like(p) for p in m.weights + m.biases]
    params = m.weights + m.biases
    grads = dws + dbs
    for p, g, v in zip(params, grads, m._velocity):
        v *= cfg.momentum
        v -= cfg.learning_rate * g
        p += v
    m.check_finite()
    return m, loss


def gradient_check(m: Mlp, x, y, epsilon: float = 1e-5) -> float:
    """Max relative error between backprop and central finite differences."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    _, dws, dbs = gradients(m, x, y)
    analytic = dws + dbs
    params = m.weights + m.biases
    worst = 0.0
    for p, g in zip(params, analytic):
        flat = p.reshape(-1)
        gflat = g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + epsilon
            up = mse_loss(forward(m, x), y)
            flat[i] = orig - epsilon
            down = mse_loss(forward(m, x), y)
            flat[i] = orig
            fd = (up - down) / (2 * epsilon)
            denom = max(abs(fd) + abs(gflat[i]), 1e-8)
            worst = max(worst, abs(fd - gflat[i]) / denom)
    return worst


def save_weights(m: Mlp, path: str | Path) -> None:
    """Versioned binary: magic, version, layer sizes, float64 LE row-major."""
    parts = [WEIGHTS_MAGIC, struct.pack("<II", WEIGHTS_VERSION, len(m.layer_sizes))]
    parts.append(struct.pack(f"<{len(m.layer_sizes)}I", *m.layer_sizes))
    for w, b in zip(m.weights, m.biases):
        parts.append(np.ascontiguousarray(w, dtype="<f8").tobytes())
        parts.append(np.ascontiguousarray(b, dtype="<f8").tobytes())
    Path(path).write_bytes(b"".join(parts))


def load_weights(path: str | Path) -> Mlp:
    raw = Path(path).read_bytes()
    if len(raw) < 12 or raw[:4] != WEIGHTS_MAGIC:
        raise NetFormatError("not a weight file")
    version, n_layers = struct.unpack("<II", raw[4:12])
    if version != WEIGHTS_VERSION:
        raise NetFormatError(f"unsupported weight file version {version}")
    offset = 12 + 4 * n_layers
    if len(raw) < offset:
        raise NetFormatError("weight file truncated in header")
    sizes = list(struct.unpack(f"<{n_layers}I", raw[12:offset]))
    expected = offset + 8 * sum(
        n_out * n_in + n_out for n_in, n_out in zip(sizes, sizes[1:])
    )
    if len(raw) != expected:
        raise NetFormatError(f"weight file has {len(raw)} bytes, expected {expected}")
    m = Mlp(sizes, seed=0)
    pos = offset
    for i, (n_in, n_out) in enumerate(zip(sizes, sizes[1:])):
        w_bytes = 8 * n_out * n_in
        m.weights[i] = np.frombuffer(raw[pos : pos + w_bytes], dtype="<f8").reshape(
            n_out, n_in
        ).copy()
        pos += w_bytes
        m.biases[i] = np.frombuffer(raw[pos : pos + 8 * n_out], dtype="<f8").copy()
        pos += 8 * n_out
    return m
