"""Model checkpoints: binary, little-endian, bit-exact round trip.

Layout:
    magic "WKNM" | version u32 | first-layer kind u8 (0 conv, 1 cwconv) |
    family tag u8 | filters u32 | kernel_len u32 | num_classes u32 |
    input_length u32 | parameter records until EOF.

Each record: name length u32, name bytes (UTF-8), element count u64,
float64 values.
"""

import struct

import numpy as np

from wkn._binio import Reader
from wkn.network import ModelConfig, build
from wkn.wavelets import FAMILY_NAMES

__all__ = ["save_checkpoint", "load_checkpoint", "MAGIC", "VERSION"]

MAGIC = b"WKNM"
VERSION = 1
_KINDS = ("conv", "cwconv")


def save_checkpoint(net, path):
    cfg = net.config
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", VERSION))
        f.write(struct.pack("<BB", _KINDS.index(cfg.first_layer),
                            FAMILY_NAMES.index(cfg.family)))
        f.write(struct.pack("<IIII", cfg.filters, cfg.kernel_len,
                            cfg.num_classes, cfg.input_length))
        for p in net.params():
            name = p.name.encode("utf-8")
            f.write(struct.pack("<I", len(name)))
            f.write(name)
            f.write(struct.pack("<Q", p.value.size))
            f.write(np.ascontiguousarray(p.value, dtype="<f8").tobytes())


def load_checkpoint(path):
    """Rebuild a network from a checkpoint; parameters restored bit-exactly."""
    with open(path, "rb") as f:
        r = Reader(f)
        magic = r.read(4, "magic")
        if magic != MAGIC:
            raise ValueError(f"bad magic {magic!r} at offset 0, expected {MAGIC!r}")
        version = r.u32("version")
        if version != VERSION:
            raise ValueError(f"unsupported checkpoint version {version} at offset 4")
        kind = r.u8("first-layer kind")
        family = r.u8("family tag")
        if kind >= len(_KINDS):
            raise ValueError(f"unknown first-layer kind {kind}")
        if family >= len(FAMILY_NAMES):
            raise ValueError(f"unknown family tag {family}")
        filters = r.u32("filters")
        kernel_len = r.u32("kernel_len")
        num_classes = r.u32("num_classes")
        input_length = r.u32("input_length")
        cfg = ModelConfig(
            first_layer=_KINDS[kind],
            family=FAMILY_NAMES[family],
            filters=filters,
            kernel_len=kernel_len,
            num_classes=num_classes,
            input_length=input_length,
        )
        net = build(cfg, seed=0)
        by_name = {p.name: p for p in net.params()}
        seen = set()
        while not r.at_eof():
            name_len = r.u32("parameter name length")
            name = r.read(name_len, "parameter name").decode("utf-8")
            count = r.u64("element count")
            raw = r.read(8 * count, f"values of {name!r}")
            if name not in by_name:
                raise ValueError(f"checkpoint parameter {name!r} not in model")
            p = by_name[name]
            if count != p.value.size:
                raise ValueError(
                    f"parameter {name!r}: checkpoint has {count} elements, model expects "
                    f"{p.value.size}"
                )
            p.value[...] = np.frombuffer(raw, dtype="<f8").reshape(p.value.shape)
            seen.add(name)
        missing = set(by_name) - seen
        if missing:
            raise ValueError(f"checkpoint missing parameters: {sorted(missing)}")
    return net
