"""Enumerative sphere shaping and probabilistic amplitude shaping tools."""

__version__ = "0.1.0"

from .codecs import (
    Composition,
    cc_decode,
    cc_encode,
    cc_rate,
    ess_decode,
    ess_encode,
    find_cc_composition,
    input_length,
    laroia_decode,
    laroia_encode,
    mb_composition,
    multinomial,
    operational_energy,
    summarize,
)
from .errors import ShapingError
from .trellis import (
    FULL,
    AmplitudeAlphabet,
    EnergyTrellis,
    ForwardTrellis,
    Precision,
    amplitude_distribution,
    average_energy,
    build_forward_trellis,
    build_trellis,
    sequence_count,
    trim_top_level,
)

__all__ = [
    "__version__",
    "AmplitudeAlphabet",
    "Composition",
    "EnergyTrellis",
    "ForwardTrellis",
    "FULL",
    "Precision",
    "ShapingError",
    "amplitude_distribution",
    "average_energy",
    "build_forward_trellis",
    "build_trellis",
    "cc_decode",
    "cc_encode",
    "cc_rate",
    "ess_decode",
    "ess_encode",
    "find_cc_composition",
    "input_length",
    "laroia_decode",
    "laroia_encode",
    "mb_composition",
    "multinomial",
    "operational_energy",
    "sequence_count",
    "summarize",
    "trim_top_level",
]
