"""Dense feed-forward networks with exact reverse-mode gradients and Adam.

Small batched numpy networks sized for the policy heads (binary decision
logit, 4-way action logits) and the value head. Gradients returned by
``backward`` are exact sums over the batch of the upstream-weighted
Jacobians; loss-level scaling (1/B etc.) belongs to the caller.
"""

from __future__ import annotations

import json
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .rng import RandomStream

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

HEAD_SIZES = {"scalar": 1, "binary-logit": 1, "4-way-logits": 4}

Gradients = List[Tuple[np.ndarray, np.ndarray]]


def _xavier_uniform(rng: RandomStream, fan_in: int, fan_out: int
                    ) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    w = np.empty((fan_in, fan_out))
    for i in range(fan_in):
        for j in range(fan_out):
            w[i, j] = (2.0 * rng.uniform() - 1.0) * limit
    return w


class DenseNet:
    """Fully-connected net: hidden activations + linear (logit) head."""

    def __init__(self, layer_sizes: Sequence[int], *,
                 activation: str = "relu", head: str = "scalar",
                 learning_rate: float = 3e-4,
                 rng: Optional[RandomStream] = None):
        layer_sizes = [int(s) for s in layer_sizes]
        if len(layer_sizes) < 2:
            raise ValueError("need at least an input and an output layer")
        if activation not in ("relu", "tanh"):
            raise ValueError(f"unknown activation {activation!r}")
        if head not in HEAD_SIZES:
            raise ValueError(f"unknown head {head!r}")
        if layer_sizes[-1] != HEAD_SIZES[head]:
            raise ValueError(
                f"head {head!r} requires output width {HEAD_SIZES[head]}, "
                f"got {layer_sizes[-1]}")
        self.layer_sizes = layer_sizes
        self.activation = activation
        self.head = head
        self.learning_rate = float(learning_rate)
        rng = rng or RandomStream(0)
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
            self.weights.append(_xavier_uniform(rng, fan_in, fan_out))
            self.biases.append(np.zeros(fan_out))
        self.adam_m = [(np.zeros_like(w), np.zeros_like(b))
                       for w, b in zip(self.weights, self.biases)]
        self.adam_v = [(np.zeros_like(w), np.zeros_like(b))
                       for w, b in zip(self.weights, self.biases)]
        self.adam_t = 0

    # -- forward/backward -----------------------------------------------------

    def _act(self, z: np.ndarray) -> np.ndarray:
        if self.activation == "relu":
            return np.maximum(z, 0.0)
        return np.tanh(z)

    def _act_grad(self, z: np.ndarray, a: np.ndarray) -> np.ndarray:
        if self.activation == "relu":
            return (z > 0.0).astype(np.float64)
        return 1.0 - a * a

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Forward pass; accepts (features,) or (batch, features)."""
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        h = x.reshape(1, -1) if single else x
        if h.shape[1] != self.layer_sizes[0]:
            raise ValueError(
                f"expected {self.layer_sizes[0]} features, got {h.shape[1]}")
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            h = self._act(h @ w + b)
        out = h @ self.weights[-1] + self.biases[-1]
        return out[0] if single else out

    def backward(self, x: np.ndarray, grad_out: np.ndarray) -> Gradients:
        """Exact reverse-mode parameter gradients for the given upstream.

        ``grad_out`` has the output's shape; the returned gradients are
        sums over the batch.
        """
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        h = x.reshape(1, -1) if single else x
        g = np.asarray(grad_out, dtype=np.float64).reshape(
            h.shape[0], self.layer_sizes[-1])
        acts = [h]
        pre = []
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            z = acts[-1] @ w + b
            pre.append(z)
            acts.append(self._act(z))
        grads: Gradients = [None] * len(self.weights)
        grads[-1] = (acts[-1].T @ g, g.sum(axis=0))
        for layer in range(len(self.weights) - 2, -1, -1):
            g = g @ self.weights[layer + 1].T
            g = g * self._act_grad(pre[layer], acts[layer + 1])
            grads[layer] = (acts[layer].T @ g, g.sum(axis=0))
        return grads

    # -- optimisation ----------------------------------------------------------

    def adam_step(self, grads: Gradients) -> None:
        """One Adam update with bias correction; rejects non-finite grads."""
        for dw, db in grads:
            if not (np.all(np.isfinite(dw)) and np.all(np.isfinite(db))):
                raise ValueError("non-finite gradient passed to adam_step")
        self.adam_t += 1
        c1 = 1.0 - ADAM_BETA1 ** self.adam_t
        c2 = 1.0 - ADAM_BETA2 ** self.adam_t
        for layer, (dw, db) in enumerate(grads):
            mw, mb = self.adam_m[layer]
            vw, vb = self.adam_v[layer]
            mw *= ADAM_BETA1
            mw += (1.0 - ADAM_BETA1) * dw
            mb *= ADAM_BETA1
            mb += (1.0 - ADAM_BETA1) * db
            vw *= ADAM_BETA2
            vw += (1.0 - ADAM_BETA2) * dw * dw
            vb *= ADAM_BETA2
            vb += (1.0 - ADAM_BETA2) * db * db
            self.weights[layer] -= self.learning_rate * (mw / c1) / (
                np.sqrt(vw / c2) + ADAM_EPS)
            self.biases[layer] -= self.learning_rate * (mb / c1) / (
                np.sqrt(vb / c2) + ADAM_EPS)

    def zero_grads(self) -> Gradients:
        return [(np.zeros_like(w), np.zeros_like(b))
                for w, b in zip(self.weights, self.biases)]

    # -- parameter plumbing ------------------------------------------------------

    @property
    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def get_flat(self) -> np.ndarray:
        parts = []
        for w, b in zip(self.weights, self.biases):
            parts.append(w.ravel())
            parts.append(b.ravel())
        return np.concatenate(parts)

    def set_flat(self, flat: np.ndarray) -> None:
        flat = np.asarray(flat, dtype=np.float64)
        if flat.size != self.n_params:
            raise ValueError("flat parameter size mismatch")
        pos = 0
        for layer, (w, b) in enumerate(zip(self.weights, self.biases)):
            self.weights[layer] = flat[pos:pos + w.size].reshape(w.shape)
            pos += w.size
            self.biases[layer] = flat[pos:pos + b.size].copy()
            pos += b.size

    @staticmethod
    def flatten_grads(grads: Gradients) -> np.ndarray:
        parts = []
        for dw, db in grads:
            parts.append(dw.ravel())
            parts.append(db.ravel())
        return np.concatenate(parts)

    # -- checkpointing ------------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "layer_sizes": self.layer_sizes,
            "activation": self.activation,
            "head": self.head,
            "learning_rate": self.learning_rate,
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
            "adam_m": [[mw.tolist(), mb.tolist()]
                       for mw, mb in self.adam_m],
            "adam_v": [[vw.tolist(), vb.tolist()]
                       for vw, vb in self.adam_v],
            "adam_t": self.adam_t,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "DenseNet":
        net = cls(doc["layer_sizes"], activation=doc["activation"],
                  head=doc["head"], learning_rate=doc["learning_rate"])
        net.weights = [np.asarray(w, dtype=np.float64)
                       for w in doc["weights"]]
        net.biases = [np.asarray(b, dtype=np.float64) for b in doc["biases"]]
        net.adam_m = [(np.asarray(mw), np.asarray(mb))
                      for mw, mb in doc["adam_m"]]
        net.adam_v = [(np.asarray(vw), np.asarray(vb))
                      for vw, vb in doc["adam_v"]]
        net.adam_t = int(doc["adam_t"])
        return net

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path) -> "DenseNet":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))
