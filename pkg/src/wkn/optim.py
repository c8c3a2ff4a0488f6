"""Learnable-parameter container and the two optimizers used for training."""

from dataclasses import dataclass

import numpy as np

__all__ = ["Parameter", "SGD", "Adam"]


@dataclass
class Parameter:
    """A named learnable array with a same-shape gradient buffer.

    ``bounds``, when set, is a (lo, hi) interval the value is clamped to
    after every optimizer step (used for the scale vector of the wavelet
    layer, which must stay positive).
    """

    name: str
    value: np.ndarray
    grad: np.ndarray
    bounds: tuple | None = None

    def zero_grad(self):
        self.grad.fill(0.0)

    def clamp(self):
        if self.bounds is not None:
            np.clip(self.value, self.bounds[0], self.bounds[1], out=self.value)


class SGD:
    """Plain gradient descent: p <- p - lr * grad."""

    def __init__(self, lr=1e-3):
        self.lr = float(lr)

    def step(self, params):
        for p in params:
            p.value -= self.lr * p.grad
            p.clamp()


class Adam:
    """Adam with bias correction; deterministic given the gradient stream.

    m <- b1*m + (1-b1)*g,  v <- b2*v + (1-b2)*g^2,  t <- t+1
    p <- p - lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
    """

    def __init__(self, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = float(lr)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.eps = float(eps)
        self.t = 0
        self._m = None
        self._v = None

    def step(self, params):
        if self._m is None:
            self._m = [np.zeros_like(p.value) for p in params]
            self._v = [np.zeros_like(p.value) for p in params]
        elif len(self._m) != len(params):
            raise ValueError("parameter list changed between optimizer steps")
        self.t += 1
        c1 = 1.0 - self.beta1**self.t
        c2 = 1.0 - self.beta2**self.t
        for p, m, v in zip(params, self._m, self._v):
            m *= self.beta1
            m += (1.0 - self.beta1) * p.grad
            v *= self.beta2
            v += (1.0 - self.beta2) * p.grad * p.grad
            p.value -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)
            p.clamp()
