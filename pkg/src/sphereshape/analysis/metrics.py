"""Maxwell-Boltzmann distributions, rate loss and shaping gain."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from ..errors import FitRangeError
from ..trellis import AmplitudeAlphabet

FIT_TOL = 1e-10


def entropy_bits(pmf: Sequence[float]) -> float:
    p = np.asarray(pmf, dtype=float)
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


@dataclass(frozen=True)
class MBDistribution:
    """P(a) = K(lam) exp(-lam a^2) over an amplitude alphabet."""

    alphabet: AmplitudeAlphabet
    lam: float
    pmf: np.ndarray

    @property
    def entropy(self) -> float:
        return entropy_bits(self.pmf)

    @property
    def mean_energy(self) -> float:
        sq = np.array(self.alphabet.amplitudes, dtype=float) ** 2
        return float(self.pmf @ sq)

    def as_dict(self):
        return {a: float(p) for a, p in zip(self.alphabet.amplitudes, self.pmf)}


def mb_pmf(alphabet: AmplitudeAlphabet, lam: float) -> MBDistribution:
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    sq = np.array(alphabet.amplitudes, dtype=float) ** 2
    # shifted by the smallest energy so large lambda does not underflow
    w = np.exp(-lam * (sq - sq[0]))
    pmf = w / w.sum()
    pmf.setflags(write=False)
    return MBDistribution(alphabet, float(lam), pmf)


def _bracket(f, target):
    hi = 1.0
    while f(hi) > target:
        hi *= 2
        if hi > 1e6:
            raise FitRangeError("target too close to the point-mass limit")
    return hi


def _fit(alphabet, target, f, upper, lower, what):
    if target > upper + 1e-12 or target <= lower:
        raise FitRangeError(f"{what} {target} outside ({lower}, {upper}]")
    if abs(target - upper) <= 1e-12:
        return 0.0
    hi = _bracket(f, target)
    lam = brentq(lambda x: f(x) - target, 0.0, hi, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=500)
    if abs(f(lam) - target) > FIT_TOL:
        # fall back to plain bisection for the last few digits
        lo_, hi_ = 0.0, hi
        for _ in range(200):
            mid = 0.5 * (lo_ + hi_)
            if f(mid) > target:
                lo_ = mid
            else:
                hi_ = mid
        lam = 0.5 * (lo_ + hi_)
    return lam


def mb_fit_energy(alphabet: AmplitudeAlphabet, energy: float) -> float:
    """lambda whose MB distribution has mean symbol energy ``energy``."""
    sq = np.array(alphabet.amplitudes, dtype=float) ** 2
    return _fit(
        alphabet, energy, lambda x: mb_pmf(alphabet, x).mean_energy,
        float(sq.mean()), float(sq[0]), "energy",
    )


def mb_fit_entropy(alphabet: AmplitudeAlphabet, entropy: float) -> float:
    """lambda whose MB distribution has entropy ``entropy`` bits."""
    return _fit(
        alphabet, entropy, lambda x: mb_pmf(alphabet, x).entropy,
        float(alphabet.m - 1), 0.0, "entropy",
    )


def rate_loss(Rs: float, energy: float, alphabet: AmplitudeAlphabet) -> float:
    """H(A_MB) - Rs, with A_MB matched to per-symbol ``energy``."""
    sq = np.array(alphabet.amplitudes, dtype=float) ** 2
    if abs(energy - sq.mean()) <= 1e-12:
        h = float(alphabet.m - 1)
    else:
        h = mb_pmf(alphabet, mb_fit_energy(alphabet, energy)).entropy
    return h - Rs


def shaping_gain(Rs: float, Eav: float, N: int) -> float:
    """Energy saving in dB relative to uniform signalling at rate Rs + 1."""
    if Eav <= 0:
        raise ValueError("average energy must be positive")
    return 10 * math.log10((2 ** (2 * (Rs + 1)) - 1) / (3 * Eav / N))


def bp_rate_loss_bound(n_m: int) -> float:
    """Upper bound on the rate loss of an n_m-bit mantissa trellis, bit/1-D."""
    if n_m < 2:
        raise ValueError("n_m must be >= 2")
    return -math.log2(1 - 2.0 ** (1 - n_m))
