"""Storage and bit-operation bounds for sphere-shaping realisations.

Bit operations are one-bit additions/subtractions; a product of two k-bit
numbers counts as k**2 of them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from ..trellis import FULL, EnergyTrellis, Precision

METHODS = ("ESS", "Laroia1", "SM")


@dataclass(frozen=True)
class ComplexityBounds:
    method: str
    bit_ops_per_dim: float
    storage_bits: float


def _width(N: int, Rs: float) -> int:
    return math.ceil(N * Rs - 1e-9)


def complexity_bounds(
    method: str,
    N: int,
    Rs: float,
    L: int,
    alphabet_size: int,
    precision: Precision = FULL,
    count_bits: int = None,
) -> ComplexityBounds:
    """Upper bounds per method and precision.

    ``count_bits`` overrides ``ceil(N Rs)``, e.g. with the exact bit length of
    the trellis' largest count.
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    w = count_bits if count_bits is not None else _width(N, Rs)
    A = alphabet_size
    log_cols = math.log2(N) + 1
    if precision.is_full:
        if method == "ESS":
            return ComplexityBounds(method, (A - 1) * w, L * (N + 1) * w)
        if method == "Laroia1":
            # shell search: up to L-1 compare/subtract steps per N-block
            return ComplexityBounds(method, (A - 1) * w + (L - 1) * w / N, L * (N + 1) * w)
        return ComplexityBounds(method, L * w**2, L * log_cols * w)
    nm, npx = precision.n_m, precision.n_p
    if method == "ESS":
        return ComplexityBounds(method, nm * (A - 1), L * (N + 1) * (nm + npx))
    if method == "Laroia1":
        return ComplexityBounds(method, nm * (A - 1) + (L - 1) * nm / N, L * (N + 1) * (nm + npx))
    return ComplexityBounds(method, nm**2 * L, L * log_cols * (nm + npx))


def sm_bit_ops_sum(N: int, Rs: float, L: int) -> float:
    """Stage-by-stage shell-mapping cost, (1/N) sum_n 2**(n-1) L ceil(N Rs)**2."""
    w = _width(N, Rs)
    stages = int(round(math.log2(N)))
    return sum(2 ** (n - 1) * L * w**2 for n in range(1, stages + 1)) / N


def trellis_complexity(trellis: EnergyTrellis, method: str = "ESS", precision: Precision = None):
    """Bounds for a built trellis, with ceil(N Rs) taken from its exact count."""
    precision = precision or trellis.precision
    return complexity_bounds(
        method,
        trellis.N,
        trellis.rate,
        trellis.L,
        trellis.alphabet.size,
        precision,
        count_bits=(trellis.size - 1).bit_length(),
    )
