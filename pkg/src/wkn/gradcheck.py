"""Finite-difference verification suites.

Three levels, mirroring how gradients compose:

* wavelet: analytic dictionary partials vs central differences at random
  (t, u, s) tuples.
* layer:   wavelet-bank layer gradients (u, s and the input) under a
  sum-of-squares loss.
* network: end-to-end loss gradients for every parameter array of a
  shrunken model (input 64, F=4, L=8, 3 classes), all first-layer
  parameters exhaustively and large backbone arrays at sampled coordinates
  (pass ``coords_per_array=None`` for a full sweep).

Central differences use h = 1e-6 * max(1, |value|).
"""

from dataclasses import dataclass

import numpy as np

from wkn import network as net_mod
from wkn import ops
from wkn.cwconv import CWConv1d
from wkn.wavelets import FAMILY_NAMES, get_family

__all__ = [
    "SuiteResult",
    "relative_errors",
    "check_wavelet_gradients",
    "check_layer_gradients",
    "check_network_gradients",
    "run_all",
    "WAVELET_TOL",
    "LAYER_TOL",
    "NETWORK_TOL",
]

WAVELET_TOL = 1e-5
LAYER_TOL = 1e-6
NETWORK_TOL = 1e-4

SHRUNKEN = dict(filters=4, kernel_len=8, num_classes=3, input_length=64)


@dataclass(frozen=True)
class SuiteResult:
    suite: str
    variant: str
    worst: float
    tol: float

    @property
    def passed(self):
        return self.worst <= self.tol


def _step(value):
    return 1e-6 * max(1.0, abs(float(value)))


def relative_errors(analytic, numeric, floor_frac=1e-3):
    """Elementwise |a - n| / max(|a|, |n|, floor).

    The floor is ``floor_frac`` of the largest magnitude in either array, so
    near-zero entries are held to a proportional absolute tolerance instead
    of amplifying finite-difference roundoff.
    """
    a = np.asarray(analytic, dtype=np.float64)
    n = np.asarray(numeric, dtype=np.float64)
    scale = max(np.abs(a).max(initial=0.0), np.abs(n).max(initial=0.0))
    if scale == 0.0:
        return np.zeros_like(a)
    denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor_frac * scale)
    return np.abs(a - n) / denom


def check_wavelet_gradients(family_name, n=100, seed=0, s_range=(0.1, 50.0)):
    """Worst relative error of dictionary_grad vs central differences."""
    fam = get_family(family_name)
    rng = np.random.default_rng(seed)
    u = rng.uniform(-10.0, 10.0, n)
    s = rng.uniform(s_range[0], s_range[1], n)
    # Sample within the oscillatory support; keep |tau| away from the
    # unilateral family's support boundary so differences stay one-sided.
    tau = rng.uniform(0.05, 3.0, n) * rng.choice((-1.0, 1.0), n)
    t = u + tau * s
    d_du, d_ds = fam.dictionary_grad(t, u, s)
    fd_du = np.empty(n)
    fd_ds = np.empty(n)
    for i in range(n):
        hu = _step(u[i])
        fd_du[i] = (
            fam.dictionary(t[i], u[i] + hu, s[i]) - fam.dictionary(t[i], u[i] - hu, s[i])
        ) / (2 * hu)
        hs = _step(s[i])
        fd_ds[i] = (
            fam.dictionary(t[i], u[i], s[i] + hs) - fam.dictionary(t[i], u[i], s[i] - hs)
        ) / (2 * hs)
    worst = max(
        relative_errors(d_du, fd_du).max(),
        relative_errors(d_ds, fd_ds).max(),
    )
    return float(worst)


def check_layer_gradients(family_name, filters=3, kernel_len=8, length=32, batch=2, seed=0):
    """Worst relative error of the wavelet layer's u, s and input gradients
    under loss = 0.5 * sum(output**2)."""
    rng = np.random.default_rng(seed)
    layer = CWConv1d(family_name, filters, kernel_len)
    taps = layer.tap_grid
    u = rng.uniform(-2.0, 2.0, filters)
    # keep translations off the tap grid (support-boundary safety margin)
    for k in range(filters):
        while np.min(np.abs(taps - u[k])) < 1e-3:
            u[k] = rng.uniform(-2.0, 2.0)
    layer.u.value[:] = u
    layer.s.value[:] = rng.uniform(0.5, 4.0, filters)
    x = rng.standard_normal((batch, 1, length))

    def loss_of(xa):
        y = layer.forward(xa)
        return 0.5 * float((y * y).sum())

    y = layer.forward(x)
    layer.u.zero_grad()
    layer.s.zero_grad()
    grad_u, grad_s, grad_x = layer.backward(y, need_grad_x=True)

    fd_u = np.empty(filters)
    fd_s = np.empty(filters)
    for k in range(filters):
        for vec, fd in ((layer.u.value, fd_u), (layer.s.value, fd_s)):
            orig = vec[k]
            h = _step(orig)
            vec[k] = orig + h
            lp = loss_of(x)
            vec[k] = orig - h
            lm = loss_of(x)
            vec[k] = orig
            fd[k] = (lp - lm) / (2 * h)
    fd_x = np.empty_like(x)
    flat_x, flat_fd = x.reshape(-1), fd_x.reshape(-1)
    for i in range(flat_x.size):
        orig = flat_x[i]
        h = _step(orig)
        flat_x[i] = orig + h
        lp = loss_of(x)
        flat_x[i] = orig - h
        lm = loss_of(x)
        flat_x[i] = orig
        flat_fd[i] = (lp - lm) / (2 * h)
    worst = max(
        relative_errors(grad_u, fd_u).max(),
        relative_errors(grad_s, fd_s).max(),
        relative_errors(grad_x, fd_x).max(),
    )
    return float(worst)


def check_network_gradients(variant, seed=0, coords_per_array=20, batch=2):
    """Worst relative error of end-to-end analytic gradients on the
    shrunken configuration, for one model variant."""
    cfg = net_mod.variant_config(variant, **SHRUNKEN)
    net = net_mod.build(cfg, seed=seed)
    rng = np.random.default_rng(seed + 1)
    x = rng.standard_normal((batch, 1, cfg.input_length))
    labels = rng.integers(0, cfg.num_classes, batch)

    def loss_of():
        losses, _ = ops.softmax_cross_entropy(net.forward(x), labels)
        return float(np.mean(losses))

    net.zero_grad()
    net.forward(x)
    net.backward(labels)
    analytic = {p.name: p.grad.copy() for p in net.params()}

    worst = 0.0
    pick = np.random.default_rng(seed + 2)
    for p in net.params():
        flat = p.value.reshape(-1)
        if coords_per_array is None or flat.size <= max(64, coords_per_array):
            idxs = np.arange(flat.size)
        else:
            idxs = np.sort(pick.choice(flat.size, coords_per_array, replace=False))
        fd = np.empty(idxs.size)
        for j, i in enumerate(idxs):
            orig = flat[i]
            h = _step(orig)
            flat[i] = orig + h
            lp = loss_of()
            flat[i] = orig - h
            lm = loss_of()
            flat[i] = orig
            fd[j] = (lp - lm) / (2 * h)
        ana = analytic[p.name].reshape(-1)[idxs]
        scale = max(np.abs(analytic[p.name]).max(), np.abs(fd).max(initial=0.0))
        if scale == 0.0:
            continue
        denom = np.maximum(np.maximum(np.abs(ana), np.abs(fd)), 1e-3 * scale)
        worst = max(worst, float((np.abs(ana - fd) / denom).max()))
    return worst


def run_all(seed=0, coords_per_array=20, variants=None):
    """All three suites; returns a list of SuiteResult rows."""
    results = []
    for fam in FAMILY_NAMES:
        results.append(
            SuiteResult("wavelet", fam, check_wavelet_gradients(fam, seed=seed), WAVELET_TOL)
        )
    for fam in FAMILY_NAMES:
        results.append(
            SuiteResult("layer", fam, check_layer_gradients(fam, seed=seed), LAYER_TOL)
        )
    for variant in variants or sorted(net_mod.VARIANTS):
        results.append(
            SuiteResult(
                "network",
                variant,
                check_network_gradients(variant, seed=seed, coords_per_array=coords_per_array),
                NETWORK_TOL,
            )
        )
    return results
