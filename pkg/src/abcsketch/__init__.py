"""Streaming and communication algorithms for the bilinear form a^T B c.

Submodules: :mod:`~abcsketch.linalg` (sampling and the exact oracle),
:mod:`~abcsketch.hashing` (k-wise independent signs), :mod:`~abcsketch.sketch`
(streaming estimators), :mod:`~abcsketch.protocol` (three-player protocol
simulator), :mod:`~abcsketch.divergence` (Rényi divergence laboratory) and
:mod:`~abcsketch.harness` (CLI and file formats).
"""
from .linalg import (DimensionError, PromiseInstance, exact_bilinear, make_promise_instance,
                     sample_haar_orthogonal, sample_on_equator, sample_unit_vector)
from .rng import Rng
from .sketch import AbcStreamer, ams_inner_product, naive_bilinear_estimate, streaming_abc_decide
from .protocol import run_protocol_approx, run_protocol_decision, tradeoff_sweep

__version__ = "0.1.0"

__all__ = [
    "DimensionError", "PromiseInstance", "exact_bilinear", "make_promise_instance",
    "sample_haar_orthogonal", "sample_on_equator", "sample_unit_vector", "Rng",
    "AbcStreamer", "ams_inner_product", "naive_bilinear_estimate", "streaming_abc_decide",
    "run_protocol_approx", "run_protocol_decision", "tradeoff_sweep",
]
