"""Monte Carlo frame-error-rate simulation over AWGN.

Frame ``i`` draws its data and noise from ``default_rng([seed, i])``, so a
run is reproducible and independent of the batch size.
"""
from __future__ import annotations

import csv
import json
import math
import subprocess
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import IO, Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import beta

from ..errors import ConfigError
from .link import PASConfig, PASLink

FER_HEADER = ("snr_db", "frames", "frame_errors", "fer", "ci_low", "ci_high")


@dataclass(frozen=True)
class FERPoint:
    snr_db: float
    frames: int
    frame_errors: int

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames if self.frames else math.nan

    @property
    def ci(self) -> Tuple[float, float]:
        return clopper_pearson(self.frame_errors, self.frames)


def clopper_pearson(k: int, n: int, level: float = 0.95) -> Tuple[float, float]:
    """Exact binomial confidence interval for k successes in n trials."""
    if n == 0:
        return 0.0, 1.0
    a = (1 - level) / 2
    lo = 0.0 if k == 0 else float(beta.ppf(a, k, n - k + 1))
    hi = 1.0 if k == n else float(beta.ppf(1 - a, k + 1, n - k))
    return lo, hi


def _frame_draws(link: PASLink, seed: int, start: int, count: int) -> Tuple[np.ndarray, np.ndarray]:
    n_sym = link.layout.n_symbols
    data = np.empty((count, link.n_data), dtype=np.uint8)
    noise = np.empty((count, n_sym))
    for j in range(count):
        rng = np.random.default_rng([seed, start + j])
        data[j] = rng.integers(0, 2, size=link.n_data, dtype=np.uint8)
        noise[j] = rng.standard_normal(n_sym)
    return data, noise


def simulate_point(
    link: PASLink,
    snr_db: float,
    max_frames: int,
    target_errors: int,
    seed: int,
    batch: int = 256,
) -> FERPoint:
    """Run frames until ``target_errors`` errors or ``max_frames`` frames."""
    var = 0.0 if snr_db == math.inf else link.energy / 10 ** (snr_db / 10)
    frames = errors = 0
    while frames < max_frames and errors < target_errors:
        count = min(batch, max_frames - frames)
        data, z = _frame_draws(link, seed, frames, count)
        x, _ = link.transmit(data)
        y = x + math.sqrt(var) * z
        est, valid = link.receive(y, var)
        bad = ~valid | np.any(est != data, axis=1)
        cum = np.cumsum(bad)
        if errors + cum[-1] >= target_errors:
            # stop exactly at the frame that reached the target
            used = int(np.searchsorted(cum, target_errors - errors)) + 1
            return FERPoint(snr_db, frames + used, target_errors)
        frames += count
        errors += int(cum[-1])
    return FERPoint(snr_db, frames, errors)


def fer_sim(
    cfg: PASConfig,
    snr_list: Sequence[float],
    max_frames: int,
    target_errors: int,
    seed: Optional[int] = None,
    batch: int = 256,
    progress: Optional[Callable[[FERPoint], None]] = None,
) -> List[FERPoint]:
    link = PASLink(cfg)
    seed = cfg.seed if seed is None else seed
    out = []
    for s in snr_list:
        p = simulate_point(link, float(s), max_frames, target_errors, seed, batch)
        out.append(p)
        if progress:
            progress(p)
    return out


def snr_at_fer(points: Sequence[FERPoint], target: float = 1e-2) -> float:
    """SNR where log10(FER) crosses ``target``, by linear interpolation."""
    pts = sorted((p.snr_db, p.fer) for p in points if p.frames)
    lt = math.log10(target)
    for (s0, f0), (s1, f1) in zip(pts, pts[1:]):
        if f0 >= target >= f1 and f1 > 0:
            if f0 == f1:
                return s0
            l0, l1 = math.log10(f0), math.log10(f1)
            return s0 + (lt - l0) * (s1 - s0) / (l1 - l0)
    raise ValueError(f"FER curve does not bracket {target}")


# --------------------------------------------------------------------------
# files


def write_fer_csv(points: Sequence[FERPoint], fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(FER_HEADER)
    for p in points:
        lo, hi = p.ci
        w.writerow([repr(p.snr_db), p.frames, p.frame_errors, repr(p.fer), repr(lo), repr(hi)])


def version_string() -> str:
    from .. import __version__

    try:
        rev = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True, text=True, timeout=5,
        )
        if rev.returncode == 0 and rev.stdout.strip():
            return f"{__version__}+{rev.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


@dataclass(frozen=True)
class SimConfig:
    link: PASConfig
    snr_db: Tuple[float, ...]
    max_frames: int
    target_errors: int
    batch: int = 256


_SIM_KEYS = {"snr_db", "max_frames", "target_errors", "batch"}
_LINK_TYPES = {f.name: f.type for f in fields(PASConfig)}


def parse_sim_config(raw: dict) -> SimConfig:
    """Validate a decoded config; every problem is reported in one ConfigError."""
    errors = []
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - _SIM_KEYS - set(_LINK_TYPES)
    for key in sorted(unknown):
        errors.append(f"unknown key {key!r}")
    for key in ("snr_db", "max_frames", "target_errors"):
        if key not in raw:
            errors.append(f"missing required key {key!r}")
    snr = raw.get("snr_db", [])
    if not isinstance(snr, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in snr):
        errors.append("snr_db must be a list of numbers")
        snr = []
    for key in ("max_frames", "target_errors", "batch"):
        v = raw.get(key, 1)
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            errors.append(f"{key} must be a positive integer")
    ints = ("m", "N", "Emax", "alpha", "seed")
    for key in ints:
        if key in raw and (not isinstance(raw[key], int) or isinstance(raw[key], bool)):
            errors.append(f"{key} must be an integer")
    for key in ("n_m", "n_p"):
        if key in raw and raw[key] is not None and (not isinstance(raw[key], int) or isinstance(raw[key], bool)):
            errors.append(f"{key} must be an integer or null")
    if "terminate" in raw and not isinstance(raw["terminate"], bool):
        errors.append("terminate must be true or false")
    for key in ("code_rate", "shaping"):
        if key in raw and not isinstance(raw[key], str):
            errors.append(f"{key} must be a string")
    link = None
    if not errors:
        try:
            link = PASConfig(**{k: v for k, v in raw.items() if k in _LINK_TYPES})
        except ConfigError as exc:
            errors.append(str(exc))
    if errors:
        raise ConfigError("invalid config:\n  " + "\n  ".join(errors))
    return SimConfig(link, tuple(float(v) for v in snr), raw["max_frames"], raw["target_errors"], raw.get("batch", 256))


def load_sim_config(path) -> SimConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    return parse_sim_config(raw)


def run_metadata(sim: SimConfig, seed: int) -> dict:
    echo = dict(sim.link.as_dict())
    echo.update(snr_db=list(sim.snr_db), max_frames=sim.max_frames, target_errors=sim.target_errors, batch=sim.batch)
    return {"seed": seed, "version": version_string(), "python": sys.version.split()[0], "config": echo}
