"""2D sparse FFT via frequency-bin hashing, with adaptive sparsity detection.

Public surface: the dense transforms and oracle (`fft2d`, `ifft2d`,
`dft2d_naive`), the hash front end (`hashing`), the fixed-sparsity engine
(`sfft2d`), the sparsity-detecting variant (`atsfft2d`), planted test
signals (`signals`), and the benchmark harness (`bench`).
"""

__version__ = "0.1.0"

from .corefft import dft2d_naive, fft2d, ifft2d, mod_inverse
from .engine import ConfigurationError, SfftConfig, sfft2d
from .hashing import (
    FlatWindow,
    PermutationParams,
    build_flat_window,
    draw_permutation,
    hash_coord,
    offset_coord,
    unhash_bin,
)
from .signals import PlantedSignal, error_metric, generate_planted, load_signal, save_signal
from .tuner import TunerConfig, TunerState, atsfft2d, count_local_maxima, detect_sparsity

__all__ = [
    "__version__",
    "fft2d",
    "ifft2d",
    "dft2d_naive",
    "mod_inverse",
    "PermutationParams",
    "FlatWindow",
    "draw_permutation",
    "build_flat_window",
    "hash_coord",
    "offset_coord",
    "unhash_bin",
    "ConfigurationError",
    "SfftConfig",
    "sfft2d",
    "TunerConfig",
    "TunerState",
    "count_local_maxima",
    "detect_sparsity",
    "atsfft2d",
    "PlantedSignal",
    "generate_planted",
    "error_metric",
    "save_signal",
    "load_signal",
]
