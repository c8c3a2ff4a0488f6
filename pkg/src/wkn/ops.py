"""Deterministic numeric kernels: batched 1-D cross-correlation, adaptive
average pooling, ReLU, linear layers and softmax cross-entropy, each with an
explicit backward pass.

Conventions
-----------
* A signal batch is a float64 array of shape ``(batch, channels, length)``.
* "Convolution" throughout means valid cross-correlation (no padding, no
  kernel flip): ``y[b, f, j] = sum_{c,i} w[f, c, i] * x[b, c, j*stride + i]``.
* Every function is pure: identical inputs give bit-identical outputs.

For the training hot path there are time-major variants (``*_tm``) operating
on ``(batch, length, channels)`` arrays.  They avoid large transpose copies
on layer boundaries; the standard-layout functions are thin wrappers around
them, so both share one code path.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

__all__ = [
    "conv1d_forward",
    "conv1d_backward",
    "conv1d_forward_tm",
    "conv1d_backward_tm",
    "avgpool1d_forward",
    "avgpool1d_backward",
    "avgpool1d_forward_tm",
    "avgpool1d_backward_tm",
    "relu_forward",
    "relu_backward",
    "linear_forward",
    "linear_backward",
    "softmax",
    "softmax_cross_entropy",
]


def _check_conv_args(n, c, w, stride):
    f, cw, l = w.shape
    if cw != c:
        raise ValueError(
            f"channel mismatch: input has {c} channels, kernel bank {w.shape} expects {cw}"
        )
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    if n < l:
        raise ValueError(f"input length {n} shorter than kernel length {l}")


def conv1d_forward_tm(x, w, b, stride=1):
    """Valid cross-correlation on a time-major batch.

    x: (B, N, C), w: (F, C, L), b: (F,).  Returns (B, T, F) with
    T = (N - L)//stride + 1.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    B, N, C = x.shape
    F, _, L = w.shape
    _check_conv_args(N, C, w, stride)
    T = (N - L) // stride + 1
    if C == 1:
        win = sliding_window_view(x[:, :, 0], L, axis=1)[:, ::stride]
        win = np.ascontiguousarray(win)  # (B, T, L)
        y = (win.reshape(B * T, L) @ w[:, 0, :].T).reshape(B, T, F)
    else:
        # One fat gemm over channels, then fold the L shifted tap planes.
        p = x.reshape(B * N, C) @ w.transpose(1, 0, 2).reshape(C, F * L)
        p = p.reshape(B, N, F, L)
        end = (T - 1) * stride + 1
        y = p[:, 0:end:stride, :, 0].copy()
        for i in range(1, L):
            y += p[:, i : i + end : stride, :, i]
    return y + b


def conv1d_backward_tm(grad_out, x, w, stride=1, need_grad_x=True):
    """Backward pass of ``conv1d_forward_tm``.

    grad_out: (B, T, F).  Returns (grad_w, grad_b, grad_x) with grad_x None
    when ``need_grad_x`` is false.
    """
    grad_out = np.ascontiguousarray(grad_out, dtype=np.float64)
    x = np.ascontiguousarray(x, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    B, N, C = x.shape
    F, _, L = w.shape
    _check_conv_args(N, C, w, stride)
    T = (N - L) // stride + 1
    if grad_out.shape != (B, T, F):
        raise ValueError(
            f"grad_out shape {grad_out.shape} does not match forward output {(B, T, F)}"
        )
    grad_b = grad_out.sum(axis=(0, 1))
    end = (T - 1) * stride + 1
    grad_x = None
    if C == 1:
        win = sliding_window_view(x[:, :, 0], L, axis=1)[:, ::stride]
        win = np.ascontiguousarray(win).reshape(B * T, L)
        go2 = grad_out.reshape(B * T, F)
        grad_w = (go2.T @ win).reshape(F, 1, L)
        if need_grad_x:
            q = (go2 @ w[:, 0, :]).reshape(B, T, L)
            gx = np.zeros((B, N))
            for i in range(L):
                gx[:, i : i + end : stride] += q[:, :, i]
            grad_x = gx.reshape(B, N, 1)
    else:
        # Scatter grad_out into the (N, F, L) tap planes, then two gemms.
        g4 = np.zeros((B, N, F, L))
        for i in range(L):
            g4[:, i : i + end : stride, :, i] = grad_out
        g2 = g4.reshape(B * N, F * L)
        grad_w = (g2.T @ x.reshape(B * N, C)).reshape(F, L, C).transpose(0, 2, 1)
        grad_w = np.ascontiguousarray(grad_w)
        if need_grad_x:
            grad_x = (g2 @ w.transpose(0, 2, 1).reshape(F * L, C)).reshape(B, N, C)
    return grad_w, grad_b, grad_x


def conv1d_forward(x, w, b, stride=1):
    """Valid cross-correlation: x (B, C, N), w (F, C, L), b (F,) -> (B, F, T)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3:
        raise ValueError(f"expected (batch, channels, length) input, got shape {x.shape}")
    y = conv1d_forward_tm(x.transpose(0, 2, 1), w, b, stride)
    return np.ascontiguousarray(y.transpose(0, 2, 1))


def conv1d_backward(grad_out, x, w, stride=1, need_grad_x=True):
    """Backward pass of ``conv1d_forward``; returns (grad_w, grad_b, grad_x)."""
    grad_out = np.asarray(grad_out, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    gw, gb, gx = conv1d_backward_tm(
        grad_out.transpose(0, 2, 1), x.transpose(0, 2, 1), w, stride, need_grad_x
    )
    if gx is not None:
        gx = np.ascontiguousarray(gx.transpose(0, 2, 1))
    return gw, gb, gx


def _pool_bounds(n, out_len):
    if out_len < 1:
        raise ValueError(f"pool output length must be >= 1, got {out_len}")
    if n < out_len:
        raise ValueError(f"cannot pool length {n} down to {out_len}")
    bounds = (np.arange(out_len + 1, dtype=np.int64) * n) // out_len
    return bounds, np.diff(bounds).astype(np.float64)


def avgpool1d_forward(x, out_len):
    """Adaptive average pooling along the last axis.

    Output bin j averages x over index range [floor(j*n/m), floor((j+1)*n/m)).
    """
    x = np.asarray(x, dtype=np.float64)
    bounds, sizes = _pool_bounds(x.shape[-1], out_len)
    return np.add.reduceat(x, bounds[:-1], axis=-1) / sizes


def avgpool1d_backward(grad_out, in_len):
    """Each input position receives grad_out[j] / bin_size(j) for its bin."""
    grad_out = np.asarray(grad_out, dtype=np.float64)
    _, sizes = _pool_bounds(in_len, grad_out.shape[-1])
    return np.repeat(grad_out / sizes, sizes.astype(np.int64), axis=-1)


def avgpool1d_forward_tm(x, out_len):
    """Adaptive average pooling along axis 1 of a (B, N, C) array."""
    x = np.asarray(x, dtype=np.float64)
    bounds, sizes = _pool_bounds(x.shape[1], out_len)
    return np.add.reduceat(x, bounds[:-1], axis=1) / sizes[:, None]


def avgpool1d_backward_tm(grad_out, in_len):
    grad_out = np.asarray(grad_out, dtype=np.float64)
    _, sizes = _pool_bounds(in_len, grad_out.shape[1])
    return np.repeat(grad_out / sizes[:, None], sizes.astype(np.int64), axis=1)


def relu_forward(x):
    return np.maximum(np.asarray(x, dtype=np.float64), 0.0)


def relu_backward(grad_out, x):
    """Pass gradient where x > 0; subgradient 0 at x = 0."""
    return np.asarray(grad_out, dtype=np.float64) * (np.asarray(x) > 0)


def linear_forward(x, w, b):
    """y = x @ w.T + b for x (B, in), w (out, in), b (out,)."""
    x = np.asarray(x, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if x.shape[-1] != w.shape[1]:
        raise ValueError(f"feature mismatch: input {x.shape} vs weights {w.shape}")
    return x @ w.T + np.asarray(b, dtype=np.float64)


def linear_backward(grad_out, x, w):
    """Returns (grad_w, grad_b, grad_x) for ``linear_forward``."""
    grad_out = np.asarray(grad_out, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if grad_out.shape != (x.shape[0], w.shape[0]):
        raise ValueError(
            f"grad_out shape {grad_out.shape} does not match output {(x.shape[0], w.shape[0])}"
        )
    grad_w = grad_out.T @ x
    grad_b = grad_out.sum(axis=0)
    grad_x = grad_out @ w
    return grad_w, grad_b, grad_x


def softmax(logits):
    """Row-wise softmax with the max-subtraction trick."""
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_cross_entropy(logits, labels):
    """Cross-entropy of softmax(logits) against integer class labels.

    Accepts a single sample (logits (K,), int label) or a batch
    (logits (B, K), labels (B,)).  Returns (loss, grad_logits) where
    grad_logits = softmax(logits) - one_hot(labels), per sample.
    """
    logits = np.asarray(logits, dtype=np.float64)
    single = logits.ndim == 1
    z = np.atleast_2d(logits)
    lab = np.atleast_1d(np.asarray(labels))
    B, K = z.shape
    if K < 2:
        raise ValueError(f"need at least 2 classes, got {K}")
    if lab.shape != (B,):
        raise ValueError(f"labels shape {lab.shape} does not match batch size {B}")
    if np.any((lab < 0) | (lab >= K)):
        bad = lab[(lab < 0) | (lab >= K)][0]
        raise ValueError(f"label {bad} out of range for {K} classes")
    shifted = z - z.max(axis=1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=1))
    rows = np.arange(B)
    losses = lse - shifted[rows, lab]
    grad = np.exp(shifted - lse[:, None])
    grad[rows, lab] -= 1.0
    if single:
        return float(losses[0]), grad[0]
    return losses, grad
