"""Acceptance criteria 1-11, each at its stated tolerance and time budget.

Every test prints one ``ACCEPTANCE n: PASS|FAIL ...`` line (also collected in
the terminal summary) before asserting.
"""
import math
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

import conftest
from oracles import sphere_sequences
from sphereshape.analysis.bmd import wachsmann_optimum, wachsmann_point
from sphereshape.analysis.complexity import complexity_bounds, sm_bit_ops_sum, trellis_complexity
from sphereshape.analysis.metrics import bp_rate_loss_bound, shaping_gain
from sphereshape.analysis.sweeps import (
    cc_for_size,
    min_codebook_size,
    rate_loss_sweep,
    shell_for_size,
    sphere_for_size,
)
from sphereshape.codecs import (
    Composition,
    ess_decode,
    ess_encode,
    laroia_decode,
    laroia_encode,
    operational_energy,
    summarize,
)
from sphereshape.labeling import amplitude_bits
from sphereshape.pas.link import PASConfig, PASLink, pas_receive
from sphereshape.pas.sim import fer_sim, load_sim_config, snr_at_fer
from sphereshape.trellis import (
    AmplitudeAlphabet,
    Precision,
    amplitude_distribution,
    average_energy,
    build_forward_trellis,
    build_trellis,
    trim_top_level,
)

A3 = AmplitudeAlphabet(3)
CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def report(n, checks, elapsed, budget, detail=""):
    """Record and print the verdict of criterion ``n``; returns the failures."""
    failed = [name for name, ok in checks if not ok]
    if elapsed > budget:
        failed.append(f"runtime {elapsed:.1f}s > {budget}s")
    verdict = "PASS" if not failed else "FAIL"
    line = f"ACCEPTANCE {n}: {verdict} ({elapsed:.2f}s) {detail}".rstrip()
    if failed:
        line += " | failed: " + "; ".join(failed)
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    return failed


def test_acceptance_1_trellis_exactness():
    t0 = time.perf_counter()
    t = build_trellis(A3, 4, 28)
    pa = amplitude_distribution(t)
    trimmed = trim_top_level(t)
    elapsed = time.perf_counter() - t0
    checks = [
        ("T_0^0 = 19", t.count(0, 0) == 19),
        ("T_3^11 = 2", t.count(3, 11) == 2),
        ("P_A", [pa[a] for a in (1, 3, 5, 7)] == [Fraction(11, 19), Fraction(7, 19), Fraction(1, 19), 0]),
        ("E_av = 20.84", abs(average_energy(t) - 20.84) <= 0.01),
        ("trimmed T_0^0 = 17", trimmed.count(0, 0) == 17),
        ("trimmed E_av = 20", average_energy(trimmed) == 20),
    ]
    detail = f"|S|={t.size} E_av={average_energy(t):.4f} trimmed |S|={trimmed.size} E_av={average_energy(trimmed)}"
    assert not report(1, checks, elapsed, 1.0, detail)


def test_acceptance_2_worked_mapping():
    t0 = time.perf_counter()
    t = build_trellis(A3, 4, 28)
    oracle = sorted(sphere_sequences(3, 4, 28))
    bijective = [ess_encode(t, i) for i in range(t.size)] == oracle
    inverse = [ess_decode(t, s) for s in oracle] == list(range(len(oracle)))
    elapsed = time.perf_counter() - t0
    checks = [
        ("decode(1,3,1,3) = 7", ess_decode(t, (1, 3, 1, 3)) == 7),
        ("encode(7) = (1,3,1,3)", ess_encode(t, 7) == (1, 3, 1, 3)),
        ("lexicographic bijection", bijective and inverse and len(oracle) == 19),
    ]
    assert not report(2, checks, elapsed, 1.0, "19 sequences checked against the lexicographic oracle")


def test_acceptance_3_running_example():
    t0 = time.perf_counter()
    t = build_trellis(A3, 96, 1120)
    s = summarize(t)
    cc = Composition.of(A3, [37, 30, 19, 10])
    cc_gain = shaping_gain(1.75, cc.energy, 96)
    elapsed = time.perf_counter() - t0
    checks = [
        ("k = 168", s.k == 168),
        ("R_s = 1.7503", abs(t.rate - 1.7503) <= 1e-4),
        ("E_av = 1096.9", abs(s.Eav - 1096.9) <= 0.1),
        ("G_s = 1.11", abs(s.Gs - 1.11) <= 0.01),
        ("CC E_av = 1272", cc.energy == 1272),
        ("CC G_s = 0.47", abs(cc_gain - 0.47) <= 0.01),
        ("CC carries 168 bits", cc.size >= 2**168),
    ]
    detail = f"k={s.k} R_s={t.rate:.5f} E_av={s.Eav:.3f} G_s={s.Gs:.4f} dB; CC E_av={cc.energy} G_s={cc_gain:.4f} dB"
    assert not report(3, checks, elapsed, 5.0, detail)


def test_acceptance_4_long_block():
    t0 = time.perf_counter()
    cc = Composition.of(A3, [89, 69, 40, 18])
    t = build_trellis(A3, 216, 2456)
    eav = average_energy(t)
    used = operational_energy(t, 378, mode="exact").mean
    elapsed = time.perf_counter() - t0
    checks = [
        ("CC E_av = 2592", cc.energy == 2592),
        ("CC carries 378 bits", cc.size >= 2**378),
        ("sphere holds 2**378", t.size >= 2**378),
        ("sphere E_av = 2432 +- 1", abs(eav - 2432) <= 1),
    ]
    detail = f"CC E_av={cc.energy}; sphere E_av={eav:.3f} (over the 2**378 used indices: {used:.3f})"
    assert not report(4, checks, elapsed, 10.0, detail)


def test_acceptance_5_bounded_precision():
    t0 = time.perf_counter()
    full = build_trellis(A3, 96, 1120)
    bp = build_trellis(A3, 96, 1120, Precision.bounded(12, 8))
    s = summarize(bp)
    rng = np.random.default_rng(5)
    ok = True
    for _ in range(1000):
        i = int(rng.integers(0, 2**62)) << 106 | int(rng.integers(0, 2**62)) << 44 | int(rng.integers(0, 2**44))
        ok &= ess_decode(bp, ess_encode(bp, i)) == i
    loss = full.rate - bp.rate
    elapsed = time.perf_counter() - t0
    checks = [
        ("k = 168", s.k == 168),
        ("R_s = 1.7500", abs(bp.rate - 1.75) <= 1e-4),
        ("E_av = 1097.1 +- 0.1", abs(s.Eav - 1097.1) <= 0.1),
        ("1000 round trips", ok),
        ("rate loss bound", 0 <= loss <= bp_rate_loss_bound(12)),
    ]
    detail = f"k={s.k} R_s={bp.rate:.5f} E_av={s.Eav:.3f} rate loss={loss:.2e} <= {bp_rate_loss_bound(12):.2e}"
    assert not report(5, checks, elapsed, 5.0, detail)


def test_acceptance_6_complexity():
    t0 = time.perf_counter()
    t = build_trellis(A3, 96, 1120)
    ess_full = trellis_complexity(t, "ESS").bit_ops_per_dim
    ess_bp = trellis_complexity(t, "ESS", Precision.bounded(12, 8)).bit_ops_per_dim
    small = build_trellis(A3, 32, 408)
    sm = complexity_bounds("SM", 32, 1.7557, small.L, 4).bit_ops_per_dim
    sm_sum = sm_bit_ops_sum(32, 1.7557, small.L)
    elapsed = time.perf_counter() - t0
    checks = [
        ("ESS full 507", ess_full == 507),
        ("ESS bounded 36", ess_bp == 36),
        ("SM example: k=56, R_s=1.7557, E_av=384",
         small.k == 56 and abs(small.rate - 1.7557) <= 1e-4 and abs(average_energy(small) - 384) <= 0.5),
        ("SM <= 155952", sm <= 155952 and sm_sum <= 155952),
    ]
    assert not report(6, checks, elapsed, 1.0, f"ESS {ess_full} / {ess_bp}; SM bound {sm}, exact sum {sm_sum:.0f}")


def test_acceptance_7_rate_loss_ordering():
    t0 = time.perf_counter()
    Ns = list(range(16, 257, 8))
    rows = rate_loss_sweep(3, 1.75, Ns)
    by_n = {r.N: r for r in rows}
    ordered = all(r.rate_loss_sphere <= r.rate_loss_shell <= r.rate_loss_cc for r in rows)
    # rows without a shell or CC code at the target rate: those families
    # have unbounded loss, and the sphere must still exist
    skipped = [N for N in Ns if N not in by_n]
    skipped_ok = True
    for N in skipped:
        target = min_codebook_size(N, 1.75)
        ft = build_forward_trellis(A3, N, N * 49)
        skipped_ok &= sphere_for_size(ft, target) is not None
        shell, cc = shell_for_size(ft, target), cc_for_size(A3, N, target)
        skipped_ok &= cc is None or shell is None
        if shell is not None and cc is None:
            skipped_ok &= sphere_for_size(ft, target).energy <= shell.energy
    ratio = by_n[96].rate_loss_cc / by_n[96].rate_loss_sphere
    elapsed = time.perf_counter() - t0
    checks = [
        ("sphere <= shell <= CC", ordered),
        ("N without shell/CC code", skipped_ok),
        ("CC/sphere ratio >= 4 at N=96", ratio >= 4),
    ]
    detail = f"{len(rows)} rows, N={skipped} lack a shell or CC code at the rate; ratio at N=96 = {ratio:.2f}"
    assert not report(7, checks, elapsed, 120.0, detail)


def test_acceptance_8_wachsmann():
    t0 = time.perf_counter()
    best = wachsmann_optimum(3, 1.5)
    uniform = wachsmann_point(3, 1.5, 3.0)
    gain = uniform.delta_snr - best.delta_snr
    elapsed = time.perf_counter() - t0
    checks = [
        ("H(X) in [2.15, 2.35]", 2.15 <= best.Hx <= 2.35),
        ("gain 0.97 +- 0.05 dB", abs(gain - 0.97) <= 0.05),
        ("R_c 0.75 +- 0.01", abs(best.code_rate - 0.75) <= 0.01),
    ]
    detail = f"H(X)*={best.Hx:.4f} gain={gain:.4f} dB R_c={best.code_rate:.4f}"
    assert not report(8, checks, elapsed, 300.0, detail)


def test_acceptance_9_systematic_property():
    t0 = time.perf_counter()
    rng = np.random.default_rng(99)
    checks = []
    for rate in ("2/3", "5/6"):
        link = PASLink(PASConfig(code_rate=rate))
        lay = link.layout
        data = rng.integers(0, 2, size=(1000, link.n_data), dtype=np.uint8)
        x, u = link.transmit(data)
        stream = link._stream(u)
        amps = link.shape(data[:, : link.cfg.alpha * link.k])
        abits = amplitude_bits(3)[(amps - 1) // 2]
        q = np.asarray(lay.pinned_pos)
        sym, lvl = np.divmod(q, 3)
        on_amp = lvl > 0
        prescribed = abits[:, sym[on_amp], lvl[on_amp] - 1]
        checks.append((f"designated positions at {rate}", np.array_equal(stream[:, q[on_amp]], prescribed)))
        est, valid = pas_receive(x, link, 0.0)
        checks.append((f"zero-noise recovery at {rate}", bool(valid.all()) and np.array_equal(est, data)))
    elapsed = time.perf_counter() - t0
    assert not report(9, checks, elapsed, 60.0, "1000 frames per rate")


@pytest.mark.slow
def test_acceptance_10_link_gain():
    t0 = time.perf_counter()
    ess = load_sim_config(CONFIGS / "ess_awgn.json")
    uni = load_sim_config(CONFIGS / "uniform_awgn.json")
    curves = {}
    for name, sim in (("ESS", ess), ("uniform", uni)):
        curves[name] = fer_sim(sim.link, sim.snr_db, sim.max_frames, sim.target_errors, batch=sim.batch)
    elapsed = time.perf_counter() - t0
    enough = all(p.frame_errors >= 100 for pts in curves.values() for p in pts)
    try:
        s_ess = snr_at_fer(curves["ESS"], 1e-2)
        s_uni = snr_at_fer(curves["uniform"], 1e-2)
        gap = s_uni - s_ess
    except ValueError:
        s_ess = s_uni = gap = math.nan
    rates = (PASLink(ess.link).transmission_rate, PASLink(uni.link).transmission_rate)
    checks = [
        ("R_t = 2.25 for both", all(abs(r - 2.25) < 1e-12 for r in rates)),
        (">= 100 frame errors per point", enough),
        ("gap 1.2 +- 0.4 dB", abs(gap - 1.2) <= 0.4),
    ]
    pts = "; ".join(
        f"{n} " + ", ".join(f"{p.snr_db:g}dB {p.frame_errors}/{p.frames}" for p in c) for n, c in curves.items()
    )
    detail = f"SNR@1e-2 ESS={s_ess:.3f} uniform={s_uni:.3f} gap={gap:.3f} dB [{pts}]"
    assert not report(10, checks, elapsed, 1800.0, detail)


def test_acceptance_11_laroia_equivalence():
    t0 = time.perf_counter()
    same = monotone = True
    cases = 0
    for m in (2, 3):
        amax2 = (2**m - 1) ** 2
        for N in range(1, 7):
            for Emax in sorted({N, N + 8, N * amax2 // 3, N * amax2 // 2, N * amax2}):
                if m == 3 and N == 6 and Emax > 150:
                    continue  # keep the enumeration within budget
                alphabet = AmplitudeAlphabet(m)
                t = build_trellis(alphabet, N, Emax)
                ft = build_forward_trellis(alphabet, N, Emax)
                ess_set = {ess_encode(t, i) for i in range(t.size)}
                lar = [laroia_encode(ft, i) for i in range(ft.size)]
                same &= ess_set == set(lar) and len(lar) == t.size
                energies = [sum(a * a for a in s) for s in lar]
                monotone &= all(a <= b for a, b in zip(energies, energies[1:]))
                step = max(1, len(lar) // 50)
                monotone &= all(laroia_decode(ft, lar[i]) == i for i in range(0, len(lar), step))
                cases += 1
    elapsed = time.perf_counter() - t0
    checks = [("identical sets", same), ("index monotone in energy", monotone)]
    assert not report(11, checks, elapsed, 60.0, f"{cases} (m, N, Emax) cases, N <= 6")
