"""Bit-metric decoding rate over the AWGN channel and gap-to-capacity curves."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy import integrate
from scipy.optimize import brentq, minimize_scalar

from ..errors import IntegrationError, UnreachableRateError
from ..labeling import ask_points, brgc_labels
from ..trellis import AmplitudeAlphabet
from .metrics import entropy_bits, mb_fit_entropy, mb_pmf

QUAD_TOL = 1e-6
WINDOW_SIGMAS = 8.0
RATE_TOL = 1e-4
DELTA_SNR_CAP_DB = 40.0

__all__ = [
    "symbol_pmf",
    "rbmd",
    "rbmd_montecarlo",
    "awgn_capacity_snr",
    "snr_at_rate",
    "WachsmannPoint",
    "wachsmann_point",
    "wachsmann_sweep",
    "wachsmann_optimum",
]


def symbol_pmf(amplitude_pmf: Sequence[float]) -> np.ndarray:
    """P_X(x) = P_A(|x|) / 2 over the ASK points in increasing order."""
    pa = np.asarray(amplitude_pmf, dtype=float)
    pa = pa / pa.sum()
    return np.concatenate([pa[::-1], pa]) / 2


def _check_pmf(px: np.ndarray) -> int:
    m = int(round(math.log2(len(px))))
    if 2**m != len(px) or m < 1:
        raise ValueError("PMF length must be a power of two")
    if not np.allclose(px, px[::-1], atol=1e-12):
        raise ValueError("symbol PMF must be symmetric (sign-uniform)")
    return m


class _BitEntropyIntegrand:
    """sum_i H(B_i | Y = y) p(y), in bits, as a function of y."""

    def __init__(self, px: np.ndarray, sigma2: float):
        m = _check_pmf(px)
        self.x = ask_points(m).astype(float)
        labels = brgc_labels(m).astype(bool)
        with np.errstate(divide="ignore"):
            self.logp = np.log(px)
        self.ones = labels.astype(float)
        self.zeros = (~labels).astype(float)
        self.sigma2 = sigma2
        self.lognorm = -0.5 * math.log(2 * math.pi * sigma2)

    def __call__(self, y: float) -> float:
        lj = self.logp - (y - self.x) ** 2 / (2 * self.sigma2)
        top = lj.max()
        if not np.isfinite(top):
            return 0.0
        w = np.exp(lj - top)
        s = w.sum()
        sb = np.concatenate([w @ self.zeros, w @ self.ones])
        sb = sb[sb > 0]
        # p(y) and p(b, y) share the factor exp(top + lognorm)
        total = float((sb * (math.log(s) - np.log(sb))).sum())
        return total * math.exp(top + self.lognorm) / math.log(2)


def rbmd(snr_db: float, px: Sequence[float]) -> float:
    """Achievable rate of a bit-metric decoder, bits per real dimension.

    ``px`` is the symbol PMF over 2**m-ASK points in increasing order; labels
    are BRGC with the sign as first bit. SNR is E[X^2] / sigma^2.
    """
    px = np.asarray(px, dtype=float)
    m = _check_pmf(px)
    hx = entropy_bits(px)
    if snr_db == math.inf:
        return hx
    x = ask_points(m).astype(float)
    energy = float(px @ x**2)
    sigma2 = energy / 10 ** (snr_db / 10)
    f = _BitEntropyIntegrand(px, sigma2)
    sigma = math.sqrt(sigma2)
    upper = x[-1] + WINDOW_SIGMAS * sigma
    # integrand is even in y: sign-symmetric PMF, sign bit flips with y
    pts = [p for p in np.arange(0.0, x[-1] + 1, 1.0) if 0 < p < upper]
    val, err = integrate.quad(f, 0.0, upper, points=pts or None, limit=400, epsabs=QUAD_TOL / 4, epsrel=1e-10)
    if err > QUAD_TOL / 2:
        raise IntegrationError(f"quadrature error {err:.2e} above tolerance at {snr_db} dB")
    return max(0.0, hx - 2 * val)


def rbmd_montecarlo(
    snr_db: float, px: Sequence[float], samples: int, rng: np.random.Generator
) -> float:
    """Monte Carlo estimate of the same quantity, E[-log2 P(B_i | Y)]."""
    px = np.asarray(px, dtype=float)
    m = _check_pmf(px)
    x = ask_points(m).astype(float)
    labels = brgc_labels(m).astype(bool)
    sigma2 = float(px @ x**2) / 10 ** (snr_db / 10)
    with np.errstate(divide="ignore"):
        logp = np.log(px)
    ones = labels.astype(float)
    total = 0.0
    chunk = 500_000
    done = 0
    while done < samples:
        n = min(chunk, samples - done)
        idx = rng.choice(len(px), size=n, p=px)
        y = x[idx] + rng.normal(scale=math.sqrt(sigma2), size=n)
        lj = logp[None, :] - (y[:, None] - x[None, :]) ** 2 / (2 * sigma2)
        w = np.exp(lj - lj.max(axis=1, keepdims=True))
        s = w.sum(axis=1, keepdims=True)
        s1 = w @ ones
        # mass of the transmitted bit value at every level
        own = np.where(labels[idx], s1, s - s1)
        total += float((np.log(s) - np.log(np.maximum(own, 1e-300))).sum())
        done += n
    return max(0.0, entropy_bits(px) - total / samples / math.log(2))


def awgn_capacity_snr(rate: float) -> float:
    """SNR in dB at which 0.5 log2(1 + SNR) equals ``rate``."""
    return 10 * math.log10(2 ** (2 * rate) - 1)


def snr_at_rate(px: Sequence[float], rate: float, max_gap_db: float = DELTA_SNR_CAP_DB) -> float:
    """SNR (dB) at which the BMD rate reaches ``rate``; inf beyond the gap cap."""
    px = np.asarray(px, dtype=float)
    hx = entropy_bits(px)
    if rate <= 0:
        raise ValueError("rate must be positive")
    if rate >= hx:
        raise UnreachableRateError(f"rate {rate} >= H(X) = {hx:.6f}")
    lo = awgn_capacity_snr(rate)
    hi = lo + max_gap_db

    def g(s):
        return rbmd(s, px) - rate

    if g(hi) < 0:
        return math.inf
    # R_BMD <= C, so the capacity SNR brackets from below
    if g(lo) >= 0:
        return lo
    s = brentq(g, lo, hi, xtol=1e-7, rtol=1e-12, maxiter=200)
    if abs(g(s)) > RATE_TOL:
        raise IntegrationError(f"root refinement stalled at {s} dB")
    return s


@dataclass(frozen=True)
class WachsmannPoint:
    Hx: float
    delta_snr: float  # dB; inf when the target needs more than the cap
    code_rate: float
    gamma: float


def wachsmann_point(m: int, rate: float, hx: float) -> WachsmannPoint:
    """Gap to capacity of MB-shaped 2**m-ASK with input entropy ``hx``."""
    alphabet = AmplitudeAlphabet(m)
    lam = mb_fit_entropy(alphabet, hx - 1)
    px = symbol_pmf(mb_pmf(alphabet, lam).pmf)
    cap = awgn_capacity_snr(rate)
    try:
        gap = snr_at_rate(px, rate) - cap
    except UnreachableRateError:
        gap = math.inf
    code_rate = (m + rate - hx) / m
    gamma = m * code_rate - (m - 1)
    return WachsmannPoint(hx, gap, code_rate, gamma)


def wachsmann_sweep(m: int, rate: float, hx_grid: Sequence[float]) -> List[WachsmannPoint]:
    for h in hx_grid:
        if not rate < h <= m + 1e-12:
            raise ValueError(f"H(X)={h} outside ({rate}, {m}]")
    return [wachsmann_point(m, rate, float(h)) for h in hx_grid]


def wachsmann_optimum(
    m: int, rate: float, lower: Optional[float] = None, step: float = 0.05, xatol: float = 1e-4
) -> WachsmannPoint:
    """Entropy minimising the gap to capacity.

    A coarse grid locates the basin (the gap is infinite near ``H(X) = rate``),
    then a bounded scalar search refines within one grid step.
    """
    lo = lower if lower is not None else rate + step
    grid = np.append(np.arange(lo, m, step), float(m))
    coarse = [wachsmann_point(m, rate, float(h)) for h in grid]
    j = int(np.argmin([p.delta_snr for p in coarse]))
    a, b = max(lo, grid[j] - step), min(float(m), grid[j] + step)
    res = minimize_scalar(
        lambda h: wachsmann_point(m, rate, h).delta_snr,
        bounds=(a, b),
        method="bounded",
        options={"xatol": xatol},
    )
    best = wachsmann_point(m, rate, float(res.x))
    return best if best.delta_snr <= coarse[j].delta_snr else coarse[j]
