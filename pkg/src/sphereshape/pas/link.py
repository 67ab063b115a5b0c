"""PAS transmitter and receiver around the 802.11 convolutional code.

Frame layout: the punctured encoder output stream fills the label bits
``B1 .. Bm`` of consecutive symbols. At every time step exactly one output is
pinned by the input selector:

* the only kept output, or
* when both are kept, the one landing on an amplitude bit (``v2`` if both
  land on sign bits).

Pinned outputs on amplitude positions carry the shaper's amplitude bits,
pinned outputs on sign positions carry extra data bits, and the remaining
sign positions carry parity. With termination on, zero inputs are appended
until the tail fills whole symbols; those tail symbols are unshaped.

The interleaver is omitted; it would permute the stream between encoder and
mapper.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np
from scipy.special import logsumexp

from ..codecs import ess_decode, ess_encode, input_length
from ..errors import ConfigError, InvalidSequenceError
from ..labeling import amplitude_bits, amplitude_index_from_bits, ask_points, brgc_labels
from ..trellis import (
    FULL,
    AmplitudeAlphabet,
    ApproximationWarning,
    EnergyTrellis,
    Precision,
    amplitude_distribution,
    build_trellis,
)
from .conv import MEMORY, LLRFrame, conv_encode, input_select, keep_mask, next_state, parse_rate, viterbi_decode

MIN_NOISE_VAR = 1e-12


@dataclass(frozen=True)
class PASConfig:
    """Link parameters. ``shaping="uniform"`` ignores ``Emax`` and codes all bits."""

    m: int = 3
    N: int = 96
    Emax: int = 1120
    alpha: int = 8
    code_rate: str = "5/6"
    terminate: bool = True
    seed: int = 0
    shaping: str = "ess"
    n_m: Optional[int] = None  # bounded-precision trellis when set
    n_p: Optional[int] = None

    def __post_init__(self):
        errors = []
        if self.shaping not in ("ess", "uniform"):
            errors.append(f"shaping must be 'ess' or 'uniform', got {self.shaping!r}")
        if not isinstance(self.m, int) or self.m < 2:
            errors.append("m must be an integer >= 2")
        if not isinstance(self.N, int) or self.N < 1:
            errors.append("N must be a positive integer")
        if not isinstance(self.alpha, int) or self.alpha < 1:
            errors.append("alpha must be a positive integer")
        try:
            rate = parse_rate(self.code_rate)
        except (ValueError, ZeroDivisionError) as exc:
            errors.append(str(exc))
            rate = None
        if (self.n_m is None) != (self.n_p is None):
            errors.append("n_m and n_p must be given together")
        if rate is not None and self.shaping == "ess" and isinstance(self.m, int):
            g = self.m * rate - (self.m - 1)
            if not 0 <= g <= 1:
                errors.append(f"gamma = m*R_c - (m-1) = {g} outside [0, 1]")
        if errors:
            raise ConfigError("; ".join(errors))

    @property
    def rate(self) -> Fraction:
        return parse_rate(self.code_rate)

    @property
    def gamma(self) -> Fraction:
        return self.m * self.rate - (self.m - 1)

    @property
    def frame_symbols(self) -> int:
        return self.alpha * self.N

    @property
    def precision(self) -> Precision:
        return FULL if self.n_m is None else Precision.bounded(self.n_m, self.n_p)

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class FrameLayout:
    """Where every encoder output lands and which one the selector pins."""

    T: int  # data-carrying time steps
    tail: int  # zero inputs appended for termination
    stream_t: np.ndarray  # time step of each stream bit
    stream_branch: np.ndarray  # 0 for v1, 1 for v2
    kept1: np.ndarray  # (T + tail,)
    kept2: np.ndarray
    pos1: np.ndarray  # stream index of v1[t] or -1
    pos2: np.ndarray
    pinned: np.ndarray  # (T,) branch pinned at each data time step
    pinned_pos: np.ndarray  # (T,) stream index of the pinned output
    n_symbols: int  # including tail symbols

    @property
    def n_bits(self) -> int:
        return len(self.stream_t)


def _walk(rate: Fraction, n_bits: int, phase: int = 0) -> Tuple[int, int]:
    """Fewest time steps whose kept outputs reach ``n_bits``, and their count."""
    T, count = 0, 0
    while count < n_bits:
        k1, k2 = keep_mask(rate, 1, phase + T)
        count += int(k1[0]) + int(k2[0])
        T += 1
    return T, count


def build_layout(cfg: PASConfig) -> FrameLayout:
    m, rate = cfg.m, cfg.rate
    n_bits = m * cfg.frame_symbols
    T, count = _walk(rate, n_bits)
    if count != n_bits:
        raise ConfigError(f"frame of {cfg.frame_symbols} symbols does not fit whole code steps at R_c={rate}")
    tail = 0
    tail_bits = 0
    if cfg.terminate:
        tail = MEMORY
        k1, k2 = keep_mask(rate, tail, T)
        tail_bits = int(k1.sum() + k2.sum())
        while tail_bits % m:
            k1, k2 = keep_mask(rate, 1, T + tail)
            tail_bits += int(k1[0]) + int(k2[0])
            tail += 1
    total = T + tail
    kept1, kept2 = keep_mask(rate, total)
    pos1 = np.full(total, -1, dtype=np.int64)
    pos2 = np.full(total, -1, dtype=np.int64)
    st, sb = [], []
    q = 0
    for t in range(total):
        if kept1[t]:
            pos1[t] = q
            st.append(t)
            sb.append(0)
            q += 1
        if kept2[t]:
            pos2[t] = q
            st.append(t)
            sb.append(1)
            q += 1
    # uniform signalling feeds data straight into the encoder: nothing is pinned
    pinned = np.empty(T, dtype=np.int64)
    for t in range(T if cfg.shaping == "ess" else 0):
        if kept1[t] and kept2[t]:
            amp1, amp2 = pos1[t] % m != 0, pos2[t] % m != 0
            if amp1 and amp2:
                raise ConfigError(
                    f"R_c={rate} with m={m} puts two amplitude bits on one code step; unsupported layout"
                )
            pinned[t] = 0 if amp1 else 1
        else:
            pinned[t] = 0 if kept1[t] else 1
    if cfg.shaping != "ess":
        pinned[:] = 0
    pinned_pos = np.where(pinned == 0, pos1[:T], pos2[:T])
    return FrameLayout(
        T, tail, np.array(st), np.array(sb), kept1, kept2, pos1, pos2,
        pinned, pinned_pos, (n_bits + tail_bits) // m,
    )


class PASLink:
    """Precomputed trellis, layout and mapping tables for one configuration."""

    def __init__(self, cfg: PASConfig):
        self.cfg = cfg
        self.layout = build_layout(cfg)
        m = cfg.m
        self.alphabet = AmplitudeAlphabet(m)
        self.points = ask_points(m).astype(float)
        labels = brgc_labels(m)
        w = 1 << np.arange(m - 1, -1, -1)
        self._label_to_point = np.empty(2**m, dtype=np.int64)
        self._label_to_point[labels.astype(np.int64) @ w] = np.arange(2**m)
        self._labels = labels
        lay = self.layout
        self.sign_pinned = (lay.pinned_pos % m) == 0
        if cfg.shaping == "ess":
            self.trellis: Optional[EnergyTrellis] = build_trellis(self.alphabet, cfg.N, cfg.Emax, cfg.precision)
            self.k = input_length(self.trellis.size)
            self.n_extra = int(self.sign_pinned.sum())
            self.n_data = cfg.alpha * self.k + self.n_extra
            dist = self._amplitude_distribution()
            pa = np.array([float(dist[a]) for a in self.alphabet.amplitudes])
            if cfg.gamma * cfg.frame_symbols != self.n_extra:
                raise ConfigError(
                    f"layout carries {self.n_extra} extra bits, gamma * N_c = {cfg.gamma * cfg.frame_symbols}"
                )
        else:
            self.trellis = None
            self.k = 0
            self.n_extra = 0
            self.n_data = lay.T
            pa = np.full(self.alphabet.size, 1.0 / self.alphabet.size)
        self.amplitude_pmf = pa
        self.symbol_pmf = np.concatenate([pa[::-1], pa]) / 2
        self.energy = float(self.symbol_pmf @ self.points**2)

    def _amplitude_distribution(self):
        # the bounded-precision marginal is approximate, which is fine for a prior
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ApproximationWarning)
            return amplitude_distribution(self.trellis)

    @property
    def transmission_rate(self) -> float:
        """Data bits per data-carrying symbol."""
        return self.n_data / self.cfg.frame_symbols

    # ------------------------------------------------------------------
    def transmit(self, data: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Symbols (frames, n_symbols) and encoder inputs for data (frames, n_data)."""
        data = np.atleast_2d(np.asarray(data, dtype=np.uint8))
        if data.shape[1] != self.n_data:
            raise ConfigError(f"expected {self.n_data} data bits per frame, got {data.shape[1]}")
        cfg, lay, m = self.cfg, self.layout, self.cfg.m
        B = data.shape[0]
        if cfg.shaping == "uniform":
            u = data
        else:
            amps = self.shape(data[:, : cfg.alpha * self.k])
            abits = amplitude_bits(m)[(amps - 1) // 2]  # (B, Nc, m-1)
            pinned_bits = np.empty((B, lay.T), dtype=np.uint8)
            amp_t = ~self.sign_pinned
            sym = lay.pinned_pos[amp_t] // m
            lvl = lay.pinned_pos[amp_t] % m - 1
            pinned_bits[:, amp_t] = abits[:, sym, lvl]
            pinned_bits[:, self.sign_pinned] = data[:, cfg.alpha * self.k:]
            u = np.empty((B, lay.T), dtype=np.uint8)
            state = np.zeros(B, dtype=np.int64)
            for t in range(lay.T):
                par = "odd" if lay.pinned[t] == 1 else "even"
                u[:, t] = input_select(pinned_bits[:, t], state, par)
                state = next_state(state, u[:, t])
        return self._modulate(u), u

    def shape(self, bits: np.ndarray) -> np.ndarray:
        """ESS amplitudes (frames, alpha*N) for alpha*k bits per frame."""
        cfg, k = self.cfg, self.k
        out = np.empty((bits.shape[0], cfg.frame_symbols), dtype=np.int64)
        weights = [1 << (k - 1 - j) for j in range(k)]
        for f in range(bits.shape[0]):
            for j in range(cfg.alpha):
                blk = bits[f, j * k:(j + 1) * k]
                index = sum(w for w, b in zip(weights, blk.tolist()) if b)
                out[f, j * cfg.N:(j + 1) * cfg.N] = ess_encode(self.trellis, index)
        return out

    def _stream(self, u: np.ndarray) -> np.ndarray:
        lay = self.layout
        full = np.concatenate([u, np.zeros((u.shape[0], lay.tail), dtype=np.uint8)], axis=1)
        v1, v2 = conv_encode(full)
        return np.where(lay.stream_branch == 0, v1[:, lay.stream_t], v2[:, lay.stream_t])

    def _modulate(self, u: np.ndarray) -> np.ndarray:
        m = self.cfg.m
        stream = self._stream(u).reshape(u.shape[0], -1, m).astype(np.int64)
        w = 1 << np.arange(m - 1, -1, -1)
        return self.points[self._label_to_point[stream @ w]]

    # ------------------------------------------------------------------
    def priors(self) -> np.ndarray:
        """Per-symbol log prior, (n_symbols, 2**m): shaped on data, uniform on tail."""
        n, Nc = self.layout.n_symbols, self.cfg.frame_symbols
        with np.errstate(divide="ignore"):
            logp = np.log(self.symbol_pmf)
        out = np.empty((n, len(self.points)))
        out[:Nc] = logp
        out[Nc:] = -math.log(len(self.points))
        return out

    def demap(self, y: np.ndarray, noise_var: float) -> np.ndarray:
        return llr_demap(y, noise_var, self.priors(), self._labels)

    def llr_frame(self, llr: np.ndarray) -> LLRFrame:
        lay = self.layout
        flat = llr.reshape(llr.shape[0], -1)
        l1 = np.where(lay.kept1, flat[:, np.maximum(lay.pos1, 0)], 0.0)
        l2 = np.where(lay.kept2, flat[:, np.maximum(lay.pos2, 0)], 0.0)
        return LLRFrame(l1, l2, lay.kept1, lay.kept2)

    def receive(self, y: np.ndarray, noise_var: float) -> Tuple[np.ndarray, np.ndarray]:
        """Data estimates (frames, n_data) and a per-frame validity flag."""
        y = np.atleast_2d(y)
        frame = self.llr_frame(self.demap(y, noise_var))
        u_hat = viterbi_decode(frame, terminate=self.cfg.terminate)
        if self.cfg.terminate:
            u_hat = u_hat[:, : self.layout.T]
        return self.recover(u_hat)

    def recover(self, u: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Invert the input selector and the shaper from encoder inputs."""
        cfg, lay, m = self.cfg, self.layout, self.cfg.m
        B = u.shape[0]
        valid = np.ones(B, dtype=bool)
        if cfg.shaping == "uniform":
            return u.copy(), valid
        stream = self._stream(u)
        data = np.zeros((B, self.n_data), dtype=np.uint8)
        data[:, cfg.alpha * self.k:] = stream[:, lay.pinned_pos[self.sign_pinned]]
        Nc = cfg.frame_symbols
        sym_bits = stream[:, : Nc * m].reshape(B, Nc, m)[:, :, 1:]
        amps = 2 * amplitude_index_from_bits(m, sym_bits) + 1
        k = self.k
        for f in range(B):
            try:
                for j in range(cfg.alpha):
                    seq = tuple(amps[f, j * cfg.N:(j + 1) * cfg.N].tolist())
                    index = ess_decode(self.trellis, seq)
                    data[f, j * k:(j + 1) * k] = [(index >> (k - 1 - i)) & 1 for i in range(k)]
            except InvalidSequenceError:
                valid[f] = False
        return data, valid


def awgn_add(x: np.ndarray, snr_db: float, rng: np.random.Generator, energy: float) -> Tuple[np.ndarray, float]:
    """Noisy copy of ``x`` and the noise variance, with SNR = energy / sigma^2."""
    if snr_db == math.inf:
        return np.array(x, dtype=float), 0.0
    var = energy / 10 ** (snr_db / 10)
    return x + rng.normal(scale=math.sqrt(var), size=np.shape(x)), var


def llr_demap(y: np.ndarray, noise_var: float, log_prior: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Bitwise LLRs log P(B_i=0|y)/P(B_i=1|y), shape y.shape + (m,).

    ``log_prior`` is either one row over the constellation or one row per
    symbol position (broadcast against the last axis of ``y``).
    """
    y = np.asarray(y, dtype=float)
    M, m = labels.shape
    x = ask_points(m).astype(float)
    var = max(noise_var, MIN_NOISE_VAR)
    lj = np.asarray(log_prior) - (y[..., None] - x) ** 2 / (2 * var)
    out = np.empty(y.shape + (m,))
    for i in range(m):
        one = labels[:, i].astype(bool)
        out[..., i] = logsumexp(lj[..., ~one], axis=-1) - logsumexp(lj[..., one], axis=-1)
    return out


def pas_transmit(data: np.ndarray, link: PASLink) -> np.ndarray:
    return link.transmit(data)[0]


def pas_receive(y: np.ndarray, link: PASLink, noise_var: float) -> Tuple[np.ndarray, np.ndarray]:
    return link.receive(y, noise_var)
