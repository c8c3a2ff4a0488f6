"""Continuous-wavelet convolutional layer.

The layer owns a translation u_k and a scale s_k per filter.  On every
forward pass it materializes an (F, L) kernel bank by sampling the wavelet
dictionary on a fixed, centered tap grid and runs a valid stride-1
cross-correlation against a single-channel input.  Backward propagates to
u, s (chain rule through the sampled atoms) and optionally to the input.

Learnable parameter count is 2*F regardless of kernel length.
"""

import numpy as np

from wkn import ops
from wkn.optim import Parameter
from wkn.wavelets import WaveletFamily, get_family

__all__ = ["CWConv1d", "SCALE_MIN", "init_scales", "tap_grid"]

SCALE_MIN = 0.1
INIT_SCALE_LO = 0.5


def tap_grid(kernel_len):
    """Centered grid of sample times: i - (L-1)/2 for i = 0..L-1."""
    return np.arange(kernel_len, dtype=np.float64) - (kernel_len - 1) / 2.0


def init_scales(filters, kernel_len):
    """Log-uniformly spaced initial scales over [0.5, L/2]."""
    if filters == 1:
        return np.array([INIT_SCALE_LO])
    return np.geomspace(INIT_SCALE_LO, kernel_len / 2.0, filters)


class CWConv1d:
    """Wavelet filter bank with learnable per-filter translation and scale.

    ``seed`` is accepted for interface uniformity with the other layers;
    the initialization itself is deterministic (u = 0, s log-spaced).
    """

    def __init__(self, family, filters, kernel_len, seed=0):
        if isinstance(family, str):
            family = get_family(family)
        if not isinstance(family, WaveletFamily):
            raise TypeError(f"expected a wavelet family, got {type(family)!r}")
        if filters < 1:
            raise ValueError(f"need at least 1 filter, got {filters}")
        if kernel_len < 2:
            raise ValueError(f"kernel length must be >= 2, got {kernel_len}")
        self.family = family
        self.filters = int(filters)
        self.kernel_len = int(kernel_len)
        self.tap_grid = tap_grid(kernel_len)
        self.u = Parameter("u", np.zeros(filters), np.zeros(filters))
        self.s = Parameter(
            "s",
            init_scales(filters, kernel_len),
            np.zeros(filters),
            bounds=(SCALE_MIN, 2.0 * kernel_len),
        )
        self._cache = None

    def params(self):
        return [self.u, self.s]

    def param_count(self):
        return 2 * self.filters

    def materialize(self):
        """Sample the dictionary on the tap grid: bank[k, i] = atom_k(t_i)."""
        bank = self.family.dictionary(
            self.tap_grid[None, :], self.u.value[:, None], self.s.value[:, None]
        )
        if not np.all(np.isfinite(bank)):
            raise ValueError("materialized kernel bank contains non-finite values")
        return bank

    # -- time-major path (used by Network) --------------------------------

    def forward_tm(self, x):
        """x: (B, N, 1) time-major, single channel.  Returns (B, T, F)."""
        if x.ndim != 3 or x.shape[2] != 1:
            raise ValueError(
                f"wavelet layer expects a single-channel input, got shape {tuple(x.shape)}"
            )
        bank = self.materialize()
        y = ops.conv1d_forward_tm(x, bank[:, None, :], np.zeros(self.filters))
        self._cache = (x, bank)
        return y

    def backward_tm(self, grad_out, need_grad_x=False):
        """Returns grad_x (or None); accumulates into u.grad and s.grad."""
        if self._cache is None:
            raise RuntimeError("backward called before forward")
        x, bank = self._cache
        gw, _, gx = ops.conv1d_backward_tm(
            grad_out, x, bank[:, None, :], stride=1, need_grad_x=need_grad_x
        )
        d_du, d_ds = self.family.dictionary_grad(
            self.tap_grid[None, :], self.u.value[:, None], self.s.value[:, None]
        )
        self.u.grad += (gw[:, 0, :] * d_du).sum(axis=1)
        self.s.grad += (gw[:, 0, :] * d_ds).sum(axis=1)
        return gx

    # -- standard-layout surface ------------------------------------------

    def forward(self, x):
        """x: (B, 1, N) -> (B, F, N - L + 1)."""
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 3:
            raise ValueError(f"expected (batch, channels, length) input, got {x.shape}")
        y = self.forward_tm(np.ascontiguousarray(x.transpose(0, 2, 1)))
        return np.ascontiguousarray(y.transpose(0, 2, 1))

    def backward(self, grad_out, need_grad_x=True):
        """grad_out: (B, F, T).  Returns (grad_u, grad_s, grad_x).

        grad_u and grad_s are the increments for this call (the layer's
        ``.grad`` buffers accumulate them as well).
        """
        grad_out = np.asarray(grad_out, dtype=np.float64)
        u0, s0 = self.u.grad.copy(), self.s.grad.copy()
        gx = self.backward_tm(
            np.ascontiguousarray(grad_out.transpose(0, 2, 1)), need_grad_x=need_grad_x
        )
        if gx is not None:
            gx = np.ascontiguousarray(gx.transpose(0, 2, 1))
        return self.u.grad - u0, self.s.grad - s0, gx
