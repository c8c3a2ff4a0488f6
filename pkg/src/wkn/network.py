"""Model assembly, training and evaluation.

The backbone is fixed: first layer (wavelet bank or plain conv, F filters of
length L) -> ReLU -> Conv(F->6, k=5) -> ReLU -> Conv(6->16, k=5, stride 2)
-> ReLU -> adaptive average pool to 16 -> flatten (256) -> Linear 120 ->
ReLU -> Linear 84 -> ReLU -> Linear num_classes.

With the defaults (F=100, L=16, input 1000, 7 classes) the per-layer
learnable parameter counts are [1700, 3006, 496, 0, 30840, 10164, 595] for
a plain conv first layer and 200 instead of 1700 for a wavelet first layer.

Internally activations flow time-major, (batch, length, channels); the
public surface uses (batch, channels, length).
"""

from dataclasses import dataclass

import numpy as np

from wkn import ops
from wkn.cwconv import CWConv1d
from wkn.optim import Adam, Parameter, SGD  # noqa: F401  (re-exported)

__all__ = [
    "NumericError",
    "ModelConfig",
    "Network",
    "EpochStats",
    "EvalResult",
    "build",
    "variant_config",
    "VARIANTS",
    "loss",
    "train",
    "evaluate",
    "export_first_layer",
    "export_feature_map",
    "penultimate_features",
]

POOL_LEN = 16
CONV2_CHANNELS, CONV2_KERNEL = 6, 5
CONV3_CHANNELS, CONV3_KERNEL, CONV3_STRIDE = 16, 5, 2
HIDDEN_1, HIDDEN_2 = 120, 84


class NumericError(RuntimeError):
    """Non-finite values appeared during a forward pass."""


@dataclass(frozen=True)
class ModelConfig:
    first_layer: str = "cwconv"  # "cwconv" or "conv"
    family: str = "laplace"
    filters: int = 100
    kernel_len: int = 16
    num_classes: int = 7
    input_length: int = 1000


# Named model variants used by the comparison harness.
VARIANTS = {
    "morlet": ("cwconv", "morlet"),
    "mexhat": ("cwconv", "mexhat"),
    "laplace": ("cwconv", "laplace"),
    "sin": ("cwconv", "sin"),
    "cnn": ("conv", "laplace"),
}


def variant_config(name, **overrides):
    """ModelConfig for a named variant ('morlet', 'mexhat', 'laplace', 'sin', 'cnn')."""
    if name not in VARIANTS:
        raise ValueError(f"unknown variant {name!r}; choose from {sorted(VARIANTS)}")
    first, family = VARIANTS[name]
    return ModelConfig(first_layer=first, family=family, **overrides)


class PlainConv1d:
    """Standard conv layer; weights and bias uniform in +-1/sqrt(C*L)."""

    def __init__(self, in_channels, out_channels, kernel_len, stride, rng, prefix):
        lim = 1.0 / np.sqrt(in_channels * kernel_len)
        self.stride = stride
        self.w = Parameter(
            f"{prefix}.w", rng.uniform(-lim, lim, (out_channels, in_channels, kernel_len)),
            np.zeros((out_channels, in_channels, kernel_len)),
        )
        self.b = Parameter(f"{prefix}.b", rng.uniform(-lim, lim, out_channels),
                           np.zeros(out_channels))
        self._x = None

    def params(self):
        return [self.w, self.b]

    def forward_tm(self, x):
        self._x = x
        return ops.conv1d_forward_tm(x, self.w.value, self.b.value, self.stride)

    def backward_tm(self, grad_out, need_grad_x=True):
        gw, gb, gx = ops.conv1d_backward_tm(
            grad_out, self._x, self.w.value, self.stride, need_grad_x
        )
        self.w.grad += gw
        self.b.grad += gb
        return gx


class ReLU:
    def __init__(self):
        self._mask = None

    def params(self):
        return []

    def forward_tm(self, x):
        self._mask = x > 0
        return np.maximum(x, 0.0)

    def backward_tm(self, grad_out):
        return grad_out * self._mask


class AdaptiveAvgPool:
    def __init__(self, out_len):
        self.out_len = out_len
        self._in_len = None

    def params(self):
        return []

    def forward_tm(self, x):
        self._in_len = x.shape[1]
        return ops.avgpool1d_forward_tm(x, self.out_len)

    def backward_tm(self, grad_out):
        return ops.avgpool1d_backward_tm(grad_out, self._in_len)


class Flatten:
    def __init__(self):
        self._shape = None

    def params(self):
        return []

    def forward_tm(self, x):
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward_tm(self, grad_out):
        return grad_out.reshape(self._shape)


class Linear:
    def __init__(self, in_features, out_features, rng, prefix):
        lim = 1.0 / np.sqrt(in_features)
        self.w = Parameter(
            f"{prefix}.w", rng.uniform(-lim, lim, (out_features, in_features)),
            np.zeros((out_features, in_features)),
        )
        self.b = Parameter(f"{prefix}.b", rng.uniform(-lim, lim, out_features),
                           np.zeros(out_features))
        self._x = None

    def params(self):
        return [self.w, self.b]

    def forward_tm(self, x):
        self._x = x
        return ops.linear_forward(x, self.w.value, self.b.value)

    def backward_tm(self, grad_out):
        gw, gb, gx = ops.linear_backward(grad_out, self._x, self.w.value)
        self.w.grad += gw
        self.b.grad += gb
        return gx


class Network:
    """Ordered layer stack with per-parameter gradient buffers."""

    def __init__(self, config, layers, table_rows):
        self.config = config
        self.layers = layers  # list of (name, layer)
        self.table_rows = table_rows  # names of the seven parameter-table rows
        self._acts = None

    def params(self):
        out = []
        for _, layer in self.layers:
            out.extend(layer.params())
        return out

    def zero_grad(self):
        for p in self.params():
            p.zero_grad()

    def layer_param_counts(self):
        """Learnable parameter count per table row (pool row included as 0)."""
        by_name = dict(self.layers)
        return [
            sum(p.value.size for p in by_name[name].params()) for name in self.table_rows
        ]

    def param_count(self):
        return sum(p.value.size for p in self.params())

    def forward(self, batch):
        """(B, 1, input_length) -> logits (B, num_classes)."""
        x = np.asarray(batch, dtype=np.float64)
        want = (1, self.config.input_length)
        if x.ndim != 3 or x.shape[1:] != want:
            raise ValueError(
                f"expected batch of shape (B, 1, {self.config.input_length}), got {x.shape}"
            )
        if not np.all(np.isfinite(x)):
            raise NumericError("non-finite values in the input batch")
        a = x.transpose(0, 2, 1)  # time-major
        acts = []
        for _, layer in self.layers:
            a = layer.forward_tm(a)
            acts.append(a)
        self._acts = acts
        logits = acts[-1]
        if not np.all(np.isfinite(logits)):
            for (name, _), act in zip(self.layers, acts):
                if not np.all(np.isfinite(act)):
                    raise NumericError(f"non-finite values in output of layer {name!r}")
            raise NumericError("non-finite logits")
        return logits

    def backward(self, labels):
        """Accumulate gradients of the mean cross-entropy loss over the batch."""
        if self._acts is None:
            raise RuntimeError("backward called before forward")
        logits = self._acts[-1]
        _, g = ops.softmax_cross_entropy(logits, labels)
        g = g / logits.shape[0]
        for i in range(len(self.layers) - 1, -1, -1):
            _, layer = self.layers[i]
            if isinstance(layer, (PlainConv1d, CWConv1d)):
                g = layer.backward_tm(g, need_grad_x=i > 0)
            else:
                g = layer.backward_tm(g)

    def activation(self, name):
        """Cached time-major output of the named layer from the last forward."""
        if self._acts is None:
            raise RuntimeError("no forward pass cached")
        for (lname, _), act in zip(self.layers, self._acts):
            if lname == name:
                return act
        raise KeyError(name)


def _conv_out(n, k, stride, name):
    if n < k:
        raise ValueError(f"layer {name!r}: input length {n} shorter than kernel {k}")
    return (n - k) // stride + 1


def build(config, seed=0):
    """Construct a network per config; deterministic given seed."""
    if config.first_layer not in ("cwconv", "conv"):
        raise ValueError(f"unknown first layer kind {config.first_layer!r}")
    if config.num_classes < 2:
        raise ValueError(f"need at least 2 classes, got {config.num_classes}")
    rng = np.random.default_rng(seed)

    if config.first_layer == "cwconv":
        first = CWConv1d(config.family, config.filters, config.kernel_len, seed=seed)
    else:
        first = PlainConv1d(1, config.filters, config.kernel_len, 1, rng, "first")
    n = _conv_out(config.input_length, config.kernel_len, 1, "first")
    conv2 = PlainConv1d(config.filters, CONV2_CHANNELS, CONV2_KERNEL, 1, rng, "conv2")
    n = _conv_out(n, CONV2_KERNEL, 1, "conv2")
    conv3 = PlainConv1d(CONV2_CHANNELS, CONV3_CHANNELS, CONV3_KERNEL, CONV3_STRIDE, rng, "conv3")
    n = _conv_out(n, CONV3_KERNEL, CONV3_STRIDE, "conv3")
    if n < POOL_LEN:
        raise ValueError(f"layer 'pool': input length {n} shorter than pool size {POOL_LEN}")
    flat = POOL_LEN * CONV3_CHANNELS
    layers = [
        ("first", first),
        ("relu1", ReLU()),
        ("conv2", conv2),
        ("relu2", ReLU()),
        ("conv3", conv3),
        ("relu3", ReLU()),
        ("pool", AdaptiveAvgPool(POOL_LEN)),
        ("flatten", Flatten()),
        ("fc1", Linear(flat, HIDDEN_1, rng, "fc1")),
        ("relu4", ReLU()),
        ("fc2", Linear(HIDDEN_1, HIDDEN_2, rng, "fc2")),
        ("relu5", ReLU()),
        ("fc3", Linear(HIDDEN_2, config.num_classes, rng, "fc3")),
    ]
    rows = ["first", "conv2", "conv3", "pool", "fc1", "fc2", "fc3"]
    return Network(config, layers, rows)


def loss(logits, labels):
    """Mean cross-entropy over the batch."""
    losses, _ = ops.softmax_cross_entropy(logits, labels)
    return float(np.mean(losses))


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    loss: float
    accuracy: float


def train(net, dataset, epochs, batch_size=64, optimizer=None, seed=0, after_epoch=None):
    """Minibatch training; returns per-epoch (epoch, mean loss, train accuracy).

    Shuffles with a seeded generator each epoch; deterministic given
    (seed, data, config).  ``after_epoch(net, stats)`` is an optional hook.
    """
    n = len(dataset.labels)
    if n == 0:
        raise ValueError("training set is empty")
    if batch_size < 1:
        raise ValueError(f"batch size must be >= 1, got {batch_size}")
    if optimizer is None:
        optimizer = Adam()
    rng = np.random.default_rng(seed)
    x_all = np.asarray(dataset.windows, dtype=np.float64)[:, None, :]
    y_all = np.asarray(dataset.labels)
    history = []
    for epoch in range(epochs):
        perm = rng.permutation(n)
        loss_sum = 0.0
        correct = 0
        for start in range(0, n, batch_size):
            idx = perm[start : start + batch_size]
            xb, yb = x_all[idx], y_all[idx]
            net.zero_grad()
            logits = net.forward(xb)
            losses, _ = ops.softmax_cross_entropy(logits, yb)
            loss_sum += float(losses.sum())
            correct += int((logits.argmax(axis=1) == yb).sum())
            net.backward(yb)
            optimizer.step(net.params())
        stats = EpochStats(epoch, loss_sum / n, correct / n)
        history.append(stats)
        if after_epoch is not None:
            after_epoch(net, stats)
    return history


@dataclass
class EvalResult:
    accuracy: float
    confusion: np.ndarray  # rows = true class, columns = predicted
    per_class: np.ndarray


def evaluate(net, dataset, batch_size=256):
    """Accuracy, confusion matrix and per-class accuracy on a dataset."""
    k = net.config.num_classes
    confusion = np.zeros((k, k), dtype=np.int64)
    x_all = np.asarray(dataset.windows, dtype=np.float64)[:, None, :]
    y_all = np.asarray(dataset.labels)
    for start in range(0, len(y_all), batch_size):
        logits = net.forward(x_all[start : start + batch_size])
        preds = logits.argmax(axis=1)
        for t, p in zip(y_all[start : start + batch_size], preds):
            confusion[t, p] += 1
    total = confusion.sum()
    counts = confusion.sum(axis=1)
    per_class = np.divide(
        np.diag(confusion), counts, out=np.zeros(k, dtype=np.float64), where=counts > 0
    )
    accuracy = float(np.trace(confusion) / total) if total else 0.0
    return EvalResult(accuracy, confusion, per_class)


def export_first_layer(net):
    """First-layer waveforms as an (F, L) matrix.

    For a wavelet first layer this is the materialized kernel bank; for a
    plain conv layer, the raw weights.
    """
    first = dict(net.layers)["first"]
    if isinstance(first, CWConv1d):
        return first.materialize()
    return first.w.value[:, 0, :].copy()


def export_feature_map(net, sample):
    """First-layer pre-activation output for one sample: (F, length - L + 1)."""
    sample = np.asarray(sample, dtype=np.float64).reshape(-1)
    first = dict(net.layers)["first"]
    y = first.forward_tm(sample[None, :, None])
    return np.ascontiguousarray(y[0].T)


def penultimate_features(net, windows, batch_size=256):
    """Features feeding the final classifier layer (post-ReLU, width 84)."""
    x_all = np.asarray(windows, dtype=np.float64)[:, None, :]
    chunks = []
    for start in range(0, len(x_all), batch_size):
        net.forward(x_all[start : start + batch_size])
        chunks.append(net.activation("relu5").copy())
    return np.concatenate(chunks, axis=0)
