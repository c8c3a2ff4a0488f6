"""Synthetic fault signals, windowing, normalization, splits and dataset I/O.

Fault classes are periodic damped-sinusoid impulse trains (one resonance /
damping / period signature per class) buried in Gaussian noise; the healthy
class is a low-frequency sinusoid plus the same noise.  Long per-class
signals are cut into non-overlapping fixed-length windows, min-max
normalized to [-1, +1] per window, and split stratified per class.

Dataset files ("WKND") are little-endian binary:
    magic "WKND" | version u32 | num_classes u32 | window_length u32 |
    N u64 | N records {label u16, window float32[window_length]} |
    class-name table (count u32, then per name: length u32, UTF-8 bytes).
"""

import hashlib
import struct
from dataclasses import dataclass, field

import numpy as np

from wkn._binio import Reader

__all__ = [
    "ClassSignature",
    "SyntheticSpec",
    "Dataset",
    "default_spec",
    "generate",
    "window",
    "normalize",
    "normalize_all",
    "split",
    "make_dataset",
    "save",
    "load",
    "load_csv",
    "MAGIC",
    "VERSION",
]

MAGIC = b"WKND"
VERSION = 1

# Decay span: beyond exp(-760) every contribution is exactly 0.0 in float64,
# so truncating there keeps superposition bit-exact.
_DECAY_CUTOFF = 760.0


@dataclass(frozen=True)
class ClassSignature:
    """One class of signal content.

    Impulse classes repeat a damped sinusoid A*exp(-damping*d)*sin(omega*d)
    every ``period`` samples (with timing jitter); the healthy class is a
    plain sinusoid of the same omega/amplitude.
    """

    name: str
    period: float = 100.0  # samples between impulses
    omega: float = 1.0  # resonance, radians/sample
    damping: float = 0.05  # 1/samples
    amplitude: float = 1.0
    healthy: bool = False


@dataclass(frozen=True)
class SyntheticSpec:
    signatures: tuple
    train_per_class: int = 400
    test_per_class: int = 100
    window_length: int = 1000
    noise_std: float = 1.0
    jitter: float = 2.0  # impulse-time jitter, uniform +-jitter samples
    seed: int = 0

    @property
    def num_classes(self):
        return len(self.signatures)

    def validate(self):
        if self.num_classes < 2:
            raise ValueError(f"need at least 2 classes, got {self.num_classes}")
        if self.train_per_class < 1 or self.test_per_class < 0:
            raise ValueError("per-class window counts must be positive")
        if self.window_length < 2:
            raise ValueError(f"window length must be >= 2, got {self.window_length}")
        if self.noise_std < 0:
            raise ValueError(f"noise_std must be >= 0, got {self.noise_std}")
        if self.jitter < 0:
            raise ValueError(f"jitter must be >= 0, got {self.jitter}")
        for sig in self.signatures:
            if not sig.healthy:
                if sig.period < 2:
                    raise ValueError(f"class {sig.name!r}: period must be >= 2")
                if sig.damping <= 0:
                    raise ValueError(f"class {sig.name!r}: damping must be > 0")
        keys = [
            (s.healthy, s.period if not s.healthy else 0.0, s.omega, s.damping, s.amplitude)
            for s in self.signatures
        ]
        if len(set(keys)) != len(keys):
            raise ValueError("class signatures must be pairwise distinct")

    def digest(self):
        """Short deterministic hash of the generation parameters."""
        return hashlib.sha256(repr(self).encode()).hexdigest()[:12]


# Signature pools for procedurally built class sets: distinct periods,
# resonances and dampings so every fault class has its own time scale.
_PERIODS = (120.0, 190.0, 75.0, 150.0, 100.0, 220.0)
_OMEGAS = (0.9, 0.45, 1.8, 1.2, 2.4, 0.65)
_DAMPINGS = (0.04, 0.02, 0.08, 0.03, 0.06, 0.025)


def default_spec(num_classes=4, train_per_class=400, test_per_class=100,
                 window_length=1000, noise_std=1.0, jitter=2.0, seed=0):
    """Desk-scale synthetic task: a healthy class plus distinct impulse classes."""
    if num_classes < 2:
        raise ValueError(f"need at least 2 classes, got {num_classes}")
    if num_classes - 1 > len(_PERIODS):
        raise ValueError(f"at most {len(_PERIODS) + 1} default classes available")
    sigs = [ClassSignature(name="healthy", omega=0.02, amplitude=0.8, healthy=True)]
    for c in range(num_classes - 1):
        sigs.append(
            ClassSignature(
                name=f"fault{c + 1}",
                period=_PERIODS[c],
                omega=_OMEGAS[c],
                damping=_DAMPINGS[c],
                amplitude=1.0,
            )
        )
    return SyntheticSpec(
        signatures=tuple(sigs),
        train_per_class=train_per_class,
        test_per_class=test_per_class,
        window_length=window_length,
        noise_std=noise_std,
        jitter=jitter,
        seed=seed,
    )


def _impulse_train(sig, total, jitter, rng):
    out = np.zeros(total)
    span = min(total, int(np.ceil(_DECAY_CUTOFF / sig.damping)) + 1)
    t = 0.0
    while t < total:
        t_j = t + (rng.uniform(-jitter, jitter) if jitter > 0 else 0.0)
        n0 = max(0, int(np.ceil(t_j)))
        if n0 < total:
            d = np.arange(n0, min(total, n0 + span), dtype=np.float64) - t_j
            out[n0 : n0 + d.size] += (
                sig.amplitude * np.exp(-sig.damping * d) * np.sin(sig.omega * d)
            )
        t += sig.period
    return out


def generate(spec):
    """Long per-class raw signals, shape (num_classes, total_length).

    total_length = (train_per_class + test_per_class) * window_length, so the
    signal windows into exactly the requested per-class counts.
    """
    spec.validate()
    total = (spec.train_per_class + spec.test_per_class) * spec.window_length
    rng = np.random.default_rng(spec.seed)
    signals = np.empty((spec.num_classes, total))
    for c, sig in enumerate(spec.signatures):
        if sig.healthy:
            base = sig.amplitude * np.sin(sig.omega * np.arange(total, dtype=np.float64))
        else:
            base = _impulse_train(sig, total, spec.jitter, rng)
        if spec.noise_std > 0:
            base = base + rng.normal(0.0, spec.noise_std, total)
        signals[c] = base
    return signals


def window(signal, length, overlap=0):
    """Cut a 1-D signal into floor(len/length) non-overlapping windows.

    Trailing remainder is discarded.  Overlapping windows are not supported.
    """
    signal = np.asarray(signal, dtype=np.float64)
    if length < 1:
        raise ValueError(f"window length must be >= 1, got {length}")
    if overlap != 0:
        raise ValueError("only non-overlapping windows are supported")
    n = signal.shape[-1] // length
    if n == 0:
        raise ValueError(f"signal of length {signal.shape[-1]} shorter than window {length}")
    return signal[: n * length].reshape(n, length)


def normalize(w):
    """Affine map of [min, max] onto [-1, +1]; constant windows map to zeros."""
    w = np.asarray(w, dtype=np.float64)
    lo, hi = w.min(), w.max()
    if hi == lo:
        return np.zeros_like(w)
    return -1.0 + 2.0 * (w - lo) / (hi - lo)


def normalize_all(windows):
    """Row-wise min-max normalization of a (N, L) window matrix."""
    windows = np.asarray(windows, dtype=np.float64)
    lo = windows.min(axis=1, keepdims=True)
    hi = windows.max(axis=1, keepdims=True)
    rng = hi - lo
    flat = rng[:, 0] == 0
    rng[flat] = 1.0
    out = -1.0 + 2.0 * (windows - lo) / rng
    out[flat] = 0.0
    return out


@dataclass
class Dataset:
    windows: np.ndarray  # (N, window_length)
    labels: np.ndarray  # (N,) int
    class_names: list
    provenance: str = ""

    def __len__(self):
        return len(self.labels)

    @property
    def num_classes(self):
        return len(self.class_names)

    @property
    def window_length(self):
        return self.windows.shape[1]

    def validate(self):
        if self.windows.ndim != 2 or self.windows.shape[0] != self.labels.shape[0]:
            raise ValueError(
                f"windows {self.windows.shape} and labels {self.labels.shape} disagree"
            )
        if len(self.labels) and (self.labels.min() < 0 or self.labels.max() >= self.num_classes):
            raise ValueError("labels out of range for the class-name table")


def split(windows, labels, train_fraction, seed=0, class_names=None, provenance=""):
    """Stratified random split into disjoint train/test datasets."""
    windows = np.asarray(windows, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if not 0.0 < train_fraction <= 1.0:
        raise ValueError(f"train fraction must be in (0, 1], got {train_fraction}")
    rng = np.random.default_rng(seed)
    classes = np.unique(labels)
    if class_names is None:
        class_names = [f"class{c}" for c in range(int(classes.max()) + 1)]
    train_idx, test_idx = [], []
    for c in classes:
        idx = np.flatnonzero(labels == c)
        idx = idx[rng.permutation(len(idx))]
        n_train = int(train_fraction * len(idx) + 1e-9)
        train_idx.append(idx[:n_train])
        test_idx.append(idx[n_train:])
    train_idx = np.sort(np.concatenate(train_idx))
    test_idx = np.sort(np.concatenate(test_idx)) if any(len(i) for i in test_idx) \
        else np.array([], dtype=np.int64)
    mk = lambda ix: Dataset(windows[ix], labels[ix], list(class_names), provenance)
    return mk(train_idx), mk(test_idx)


def make_dataset(spec):
    """Full pipeline: generate -> window -> normalize -> stratified split."""
    signals = generate(spec)
    per_class = spec.train_per_class + spec.test_per_class
    all_windows = []
    all_labels = []
    for c in range(spec.num_classes):
        w = normalize_all(window(signals[c], spec.window_length))
        all_windows.append(w)
        all_labels.append(np.full(per_class, c, dtype=np.int64))
    windows = np.concatenate(all_windows)
    labels = np.concatenate(all_labels)
    names = [s.name for s in spec.signatures]
    frac = spec.train_per_class / per_class
    return split(windows, labels, frac, seed=spec.seed, class_names=names,
                 provenance=f"synthetic:{spec.digest()}")


def save(dataset, path):
    """Write the WKND binary format (values stored as float32)."""
    dataset.validate()
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<III", VERSION, dataset.num_classes, dataset.window_length))
        f.write(struct.pack("<Q", len(dataset)))
        for label, w in zip(dataset.labels, dataset.windows):
            f.write(struct.pack("<H", int(label)))
            f.write(np.asarray(w, dtype="<f4").tobytes())
        f.write(struct.pack("<I", dataset.num_classes))
        for name in dataset.class_names:
            raw = name.encode("utf-8")
            f.write(struct.pack("<I", len(raw)))
            f.write(raw)


def load(path):
    """Read a WKND file; values come back at float32 precision."""
    with open(path, "rb") as f:
        r = Reader(f)
        magic = r.read(4, "magic")
        if magic != MAGIC:
            raise ValueError(f"bad magic {magic!r} at offset 0, expected {MAGIC!r}")
        version = r.u32("version")
        if version != VERSION:
            raise ValueError(f"unsupported dataset version {version} at offset 4")
        num_classes = r.u32("num_classes")
        window_length = r.u32("window_length")
        n = r.u64("record count")
        labels = np.empty(n, dtype=np.int64)
        windows = np.empty((n, window_length))
        for i in range(n):
            labels[i] = r.u16(f"label of record {i}")
            raw = r.read(4 * window_length, f"window of record {i}")
            windows[i] = np.frombuffer(raw, dtype="<f4")
        count = r.u32("class-name count")
        if count != num_classes:
            raise ValueError(
                f"class-name table has {count} entries, header says {num_classes}"
            )
        names = []
        for i in range(count):
            ln = r.u32(f"length of class name {i}")
            names.append(r.read(ln, f"class name {i}").decode("utf-8"))
    ds = Dataset(windows, labels, names, provenance=str(path))
    ds.validate()
    return ds


def load_csv(path):
    """Plain numeric CSV import: one window per row, last column = label."""
    table = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    if table.shape[1] < 3:
        raise ValueError(f"need at least 2 signal columns plus a label, got {table.shape[1]}")
    labels = table[:, -1]
    if not np.all(labels == np.round(labels)):
        raise ValueError("last CSV column must hold integer class labels")
    labels = labels.astype(np.int64)
    if labels.min() < 0:
        raise ValueError("labels must be non-negative")
    names = [f"class{c}" for c in range(int(labels.max()) + 1)]
    return Dataset(table[:, :-1].copy(), labels, names, provenance=str(path))
