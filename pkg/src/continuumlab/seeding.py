"""Deterministic seed derivation.

All randomness in the library flows from 64-bit seeds derived here.  A
derived seed is a hash of the parent seed and a tuple of integer labels
(a purpose tag plus indices), so independent components get independent
streams and reruns are reproducible regardless of evaluation order or
process layout.
"""

from ._kernels_py import MASK64, mix64

# purpose tags; keep values stable, they are part of the reproducibility
# contract for recorded seeds
PATH = 1
NEG_STREAM = 2
WALK_LEVEL = 3
EXP_REFLECTION = 10
EXP_OSC_DIRECT = 11
EXP_OSC_PRODUCT = 12
EXP_LOG_MOMENTS = 13
EXP_TAILS = 14
EXP_LIMIT = 15
EXP_WITNESS = 16
EXP_WALK_TOWER = 17
EXP_WALK_INVARIANTS = 18
EXP_THREADS = 19


def derive(seed: int, *labels: int) -> int:
    """Derive a child seed from a parent seed and integer labels."""
    h = seed & MASK64
    for lab in labels:
        h = mix64((h ^ (lab & MASK64)) & MASK64)
    return h
