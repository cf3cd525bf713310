"""Bounded algorithmic randomness over Cantor space, in exact dyadic arithmetic.

Submodules:

* :mod:`brk.core` -- bitstrings, dyadic rationals, string/set codes, clopen sets
* :mod:`brk.mltests` -- bounded Martin-Loef tests and the concrete test families
* :mod:`brk.martingales` -- martingales, Kraft's inequality, test/martingale conversions
* :mod:`brk.machines` -- the stack DSL, plain complexity, compressor constructions
* :mod:`brk.generators` -- diagonal reals, oscillating reals, joins, counterexample pairs
* :mod:`brk.cli` -- the ``brk`` command line
"""

from brk.core import (
    ClopenSet,
    Dyadic,
    SequencePrefix,
    decode_set,
    decode_string,
    encode_set,
    encode_string,
    measure,
)

__all__ = [
    "ClopenSet",
    "Dyadic",
    "SequencePrefix",
    "decode_set",
    "decode_string",
    "encode_set",
    "encode_string",
    "measure",
]

__version__ = "0.1.0"
