"""Secret-key generation by packet superposition (the AAA method).

Submodules: :mod:`gf2`, :mod:`sources`, :mod:`keygen`, :mod:`equivocation`,
:mod:`leakage`, :mod:`baseline`, :mod:`cli`.
"""

from .gf2 import BitMatrix, BitVec, binary_entropy, rank, xor_into
from .keygen import KeyState, SessionReport, absorb, cascade, run_session
from .sources import MarkovParams, ObservationSeq, apply_erasure, gen_leakage, gen_trace, select_bits

__version__ = "0.1.0"

__all__ = [
    "BitMatrix",
    "BitVec",
    "KeyState",
    "MarkovParams",
    "ObservationSeq",
    "SessionReport",
    "absorb",
    "apply_erasure",
    "binary_entropy",
    "cascade",
    "gen_leakage",
    "gen_trace",
    "rank",
    "run_session",
    "select_bits",
    "xor_into",
]
