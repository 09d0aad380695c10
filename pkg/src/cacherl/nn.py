"""Small fully-connected net with hand-written backprop.

Hidden layers use the rectifier; the output head is linear by default or
softmax. Training minimizes a masked squared error, so gradients flow
only through unmasked output entries. No learning framework involved:
forward, backward, and the SGD step are a few matrix products.
"""

from __future__ import annotations

import json
import struct

import numpy as np


def masked_l2_loss(output: np.ndarray, target: np.ndarray, mask: np.ndarray) -> float:
    """Sum over entries of mask * (target - output)^2."""
    d = (np.asarray(target, dtype=np.float64) - np.asarray(output, dtype=np.float64))
    return float(np.sum(np.asarray(mask, dtype=np.float64) * d * d))


class FeedforwardNet:
    def __init__(
        self,
        sizes: list[int],
        head: str = "linear",
        rng: np.random.Generator | None = None,
    ):
        if len(sizes) < 2:
            raise ValueError("need at least input and output sizes")
        if head not in ("linear", "softmax"):
            raise ValueError("head must be 'linear' or 'softmax'")
        self.sizes = list(int(s) for s in sizes)
        self.head = head
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for fan_in, fan_out in zip(self.sizes[:-1], self.sizes[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            if rng is None:
                w = np.zeros((fan_out, fan_in))
                b = np.zeros(fan_out)
            else:
                w = rng.uniform(-bound, bound, size=(fan_out, fan_in))
                b = rng.uniform(-bound, bound, size=fan_out)
            self.weights.append(w)
            self.biases.append(b)

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    def _forward_batch(self, x: np.ndarray) -> tuple[np.ndarray, list[np.ndarray], list[np.ndarray]]:
        """Returns (output, per-layer inputs, per-layer pre-activations)."""
        h = np.asarray(x, dtype=np.float64)
        inputs = []
        pres = []
        for k in range(self.n_layers):
            inputs.append(h)
            z = h @ self.weights[k].T + self.biases[k]
            pres.append(z)
            if k < self.n_layers - 1:
                h = np.maximum(z, 0.0)
            elif self.head == "softmax":
                shifted = z - z.max(axis=1, keepdims=True)
                e = np.exp(shifted)
                h = e / e.sum(axis=1, keepdims=True)
            else:
                h = z
        return h, inputs, pres

    def forward(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.sizes[0],):
            raise ValueError(f"input must have shape ({self.sizes[0]},)")
        out, _, _ = self._forward_batch(x[None, :])
        return out[0]

    def forward_batch(self, x: np.ndarray) -> np.ndarray:
        out, _, _ = self._forward_batch(x)
        return out

    def gradients(
        self,
        x: np.ndarray,
        target: np.ndarray,
        mask: np.ndarray,
    ) -> tuple[list[np.ndarray], list[np.ndarray]]:
        """Mean gradients of the masked loss over a batch.

        x, target, mask all (B, dim); single vectors are promoted. The
        batch mean (not sum) keeps the learning rate batch-size invariant.
        """
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        target = np.atleast_2d(np.asarray(target, dtype=np.float64))
        mask = np.atleast_2d(np.asarray(mask, dtype=np.float64))
        batch = x.shape[0]
        out, inputs, pres = self._forward_batch(x)
        d_out = -2.0 * mask * (target - out)
        if self.head == "softmax":
            # rows of the softmax Jacobian: diag(o) - o o'
            dot = np.sum(d_out * out, axis=1, keepdims=True)
            delta = out * (d_out - dot)
        else:
            delta = d_out
        grad_w = [np.empty(0)] * self.n_layers
        grad_b = [np.empty(0)] * self.n_layers
        for k in range(self.n_layers - 1, -1, -1):
            grad_w[k] = delta.T @ inputs[k] / batch
            grad_b[k] = delta.mean(axis=0)
            if k > 0:
                delta = (delta @ self.weights[k]) * (pres[k - 1] > 0.0)
        return grad_w, grad_b

    def sgd_step(self, grad_w: list[np.ndarray], grad_b: list[np.ndarray], lr: float) -> None:
        if lr <= 0:
            raise ValueError("learning rate must be positive")
        for k in range(self.n_layers):
            self.weights[k] -= lr * grad_w[k]
            self.biases[k] -= lr * grad_b[k]

    def train_step(self, x: np.ndarray, target: np.ndarray, mask: np.ndarray, lr: float) -> None:
        gw, gb = self.gradients(x, target, mask)
        self.sgd_step(gw, gb, lr)

    def clone(self) -> "FeedforwardNet":
        other = FeedforwardNet(self.sizes, self.head)
        self.clone_into(other)
        return other

    def clone_into(self, target: "FeedforwardNet") -> None:
        if target.sizes != self.sizes or target.head != self.head:
            raise ValueError("architecture mismatch")
        for k in range(self.n_layers):
            target.weights[k] = self.weights[k].copy()
            target.biases[k] = self.biases[k].copy()

    def flat_params(self) -> np.ndarray:
        parts = []
        for w, b in zip(self.weights, self.biases):
            parts.append(w.ravel())
            parts.append(b.ravel())
        return np.concatenate(parts)

    def save(self, path: str) -> None:
        """JSON header line, then all parameters as little-endian float64."""
        header = json.dumps({"sizes": self.sizes, "head": self.head})
        flat = self.flat_params().astype("<f8")
        with open(path, "wb") as fh:
            fh.write(header.encode("utf-8") + b"\n")
            fh.write(struct.pack("<q", flat.size))
            fh.write(flat.tobytes())

    @classmethod
    def load(cls, path: str) -> "FeedforwardNet":
        with open(path, "rb") as fh:
            header = json.loads(fh.readline().decode("utf-8"))
            (count,) = struct.unpack("<q", fh.read(8))
            flat = np.frombuffer(fh.read(count * 8), dtype="<f8").astype(np.float64)
        net = cls(header["sizes"], header["head"])
        offset = 0
        for k in range(net.n_layers):
            w_size = net.weights[k].size
            net.weights[k] = flat[offset : offset + w_size].reshape(net.weights[k].shape).copy()
            offset += w_size
            b_size = net.biases[k].size
            net.biases[k] = flat[offset : offset + b_size].copy()
            offset += b_size
        if offset != flat.size:
            raise ValueError("parameter count mismatch in checkpoint")
        return net
