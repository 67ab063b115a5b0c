"""Rate loss, shaping gain, complexity bounds and BMD-rate analysis."""

from .bmd import (
    WachsmannPoint,
    awgn_capacity_snr,
    rbmd,
    rbmd_montecarlo,
    snr_at_rate,
    symbol_pmf,
    wachsmann_optimum,
    wachsmann_point,
    wachsmann_sweep,
)
from .complexity import ComplexityBounds, complexity_bounds, sm_bit_ops_sum, trellis_complexity
from .metrics import (
    MBDistribution,
    bp_rate_loss_bound,
    entropy_bits,
    mb_fit_energy,
    mb_fit_entropy,
    mb_pmf,
    rate_loss,
    shaping_gain,
)
from .sweeps import RateLossRow, rate_loss_sweep, write_rate_loss_csv, write_wachsmann_csv
