"""Wavelet-kernel networks for 1-D signal classification.

The central piece is a convolutional layer whose kernels are sampled from a
closed-form wavelet dictionary: only a per-filter translation and scale are
learned, so a bank of F filters costs 2*F parameters instead of F*L.  Around
it sit a small deterministic numeric engine with hand-written backward
passes, a fixed conv/pool/linear backbone, a synthetic fault-signal
generator, and a CLI for training, evaluation and filter inspection.
"""

from wkn.wavelets import get_family, FAMILY_NAMES
from wkn.cwconv import CWConv1d
from wkn.network import (
    ModelConfig,
    Network,
    build,
    train,
    evaluate,
    Adam,
    SGD,
    export_first_layer,
    export_feature_map,
)
from wkn.data import SyntheticSpec, Dataset, make_dataset

__version__ = "0.1.0"
