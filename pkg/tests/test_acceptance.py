"""Acceptance criteria 1-12, one test per criterion.

Each test records a PASS/FAIL line that is printed in the terminal summary.
The L = 12 exact runs take several minutes each on a single core.
"""
import math
import time
import warnings

import numpy as np
import pytest

from acceptance_report import record
from hpdecode.brickwork import CircuitSpec, Floquet, RandomGates
from hpdecode.hpcore import HPPartition, choi_purity, decoding_series, delta_from_otoc, otoc_average, saturation_window
from hpdecode.brickwork import build_evolution
from hpdecode.membrane import (
    asymptotic_relaxation,
    build_dw_transfer,
    dw_spectrum,
    front_width,
    haar_mc_series,
    infinite_size_plateau,
    membrane_delta,
    relaxation_series,
    saturation_delta,
)
from hpdecode.predictions import duc_plateau, f_alternating_exact, f_beta, integrable_du_delta, perturbed_decay
from hpdecode.qgates import random_dressing, xxz_gate
from hpdecode.runner import fit_power_law

L12 = 12
PI = math.pi


@pytest.fixture(scope="module")
def du_chaotic_series():
    """Dressed dual-unitary XXZ Floquet circuit, L = 12, open chain, L_D = 1, 2, 3."""
    g = xxz_gate(PI / 4, -0.3 * PI / 4, dressing=random_dressing(2, 1234))
    spec = CircuitSpec(L12, 2, "open", Floquet(g))
    times = sorted(set(saturation_window(L12)) | {L12 - 1, L12})
    t0 = time.perf_counter()
    series = decoding_series(spec, [HPPartition(L12, 1, ld) for ld in (1, 2, 3)], times)
    return series, time.perf_counter() - t0


def test_criterion_01_chaotic_du_plateau(du_chaotic_series):
    series, secs = du_chaotic_series
    s = series[0].check()
    mean = s.window_mean(5 * L12, 10 * L12)
    rel = abs(mean - 0.75) / 0.75
    ok = rel <= 0.05 and secs < 600
    assert record(1, ok, f"plateau {mean:.5f} vs 0.75 (rel {rel:.2%}), {secs:.0f} s")


def test_criterion_02_plateau_scaling(du_chaotic_series):
    series, _ = du_chaotic_series
    parts = []
    ok = True
    for s in series:
        ld = s.partition.L_D
        mean = s.window_mean(5 * L12, 10 * L12)
        target = (1 - 2.0**-2) * 2.0 ** (-2 * (ld - 1))
        rel = abs(mean - target) / target
        ok &= rel <= 0.10
        parts.append(f"L_D={ld}: {mean:.5f}/{target:.5f} ({rel:.1%})")
    assert record(2, ok, "; ".join(parts))


def test_criterion_03_perfect_decoding_dip(du_chaotic_series):
    s = du_chaotic_series[0][0]
    at = {int(t): float(d) for t, d in zip(s.t, s.delta)}
    dips = {t: at[t] for t in (L12 - 1, L12)}
    t_star = min(dips, key=dips.get)
    ok = dips[t_star] <= 1e-9
    assert record(3, ok, f"t* = {t_star}, delta(t*) = {dips[t_star]:.2e}; delta(L-1), delta(L) = {dips[L12 - 1]:.2e}, {dips[L12]:.2e}")


def test_criterion_04_integrable_revivals():
    g = xxz_gate(PI / 4, math.sqrt(2) / 2 * PI / 4)
    spec = CircuitSpec(L12, 2, "open", Floquet(g))
    revivals = [L12 - 1, L12, 3 * L12 - 1, 3 * L12, 5 * L12 - 1, 5 * L12]
    between = [t for t in range(L12 + 2, 5 * L12 - 1, 4) if t not in revivals]
    s = decoding_series(spec, HPPartition(L12, 1, 1), revivals + between)[0]
    vals = dict(zip(s.t.tolist(), s.delta.tolist()))
    worst_rev = max(vals[t] for t in revivals)
    worst_mid = max(abs(vals[t] - integrable_du_delta(g, t, L12)) for t in between)
    ok = worst_rev <= 1e-9 and worst_mid <= 1e-8
    assert record(4, ok, f"max delta at revivals {worst_rev:.2e}; max deviation between revivals {worst_mid:.2e} over {len(between)} times")


def test_criterion_05_membrane_spectrum():
    worst = 0.0
    for N in (10, 50, 200):
        num = np.sort(np.linalg.eigvals(build_dw_transfer(2 * N, 2).matrix).real)
        z = 0.16
        ref = np.sort(np.concatenate([[1.0, 1.0], 2 * z * (1 + np.cos(np.pi * np.arange(1, N) / N))]))
        worst = max(worst, float(np.max(np.abs(num - ref))))
        assert np.allclose(np.sort(dw_spectrum(N, 2)), ref, atol=1e-15, rtol=0)
    assert record(5, worst <= 1e-12, f"max eigenvalue deviation {worst:.1e} for N in (10, 50, 200)")


def test_criterion_06_membrane_saturation():
    worst = 0.0
    for L, la, ld in [(8, 1, 1), (8, 1, 3), (12, 2, 3), (20, 1, 2)]:
        worst = max(worst, abs(membrane_delta(L, la, ld, 2, 4001) - saturation_delta(L, la, ld)))
    lim = max(abs(saturation_delta(2000, la, ld) - (2.0 ** (2 * la) - 1) / 2.0 ** (2 * ld)) for la, ld in [(1, 1), (1, 2), (2, 3)])
    lim = max(lim, abs(infinite_size_plateau(2, 1, 2) - 3 / 16))
    ok = worst <= 1e-12 and lim <= 1e-12
    assert record(6, ok, f"iterated vs closed form {worst:.1e}; large-L limit vs (q^2L_A-1)/q^2L_D {lim:.1e}")


def test_criterion_07_membrane_vs_monte_carlo():
    t0 = time.perf_counter()
    res = haar_mc_series(8, HPPartition(8, 1, 1), [7, 15, 31], 2000, 20240607)
    secs = time.perf_counter() - t0
    zs = {t: (r.mean - membrane_delta(8, 1, 1, 2, t)) / r.sem for t, r in res.items()}
    ok = all(abs(z) <= 3 for z in zs.values()) and secs <= 600
    detail = ", ".join(f"t={t}: {z:+.2f} sigma" for t, z in zs.items())
    assert record(7, ok, f"{detail}; {secs:.0f} s")


def test_criterion_08_diffusive_front():
    t0 = time.perf_counter()
    Ls = [100, 200, 400, 800, 1600]
    fit = fit_power_law(Ls, [front_width(L) for L in Ls])
    secs = time.perf_counter() - t0
    ok = 0.45 <= fit.exponent <= 0.56
    assert record(8, ok, f"alpha = {fit.exponent:.4f} (r2 {fit.r2:.4f}), {secs:.1f} s")


def test_criterion_09_scrambling_identity():
    rng = np.random.default_rng(99)
    shapes = [(1, 1), (1, 2), (2, 2), (1, 3), (2, 3)]
    worst = 0.0
    for _ in range(10):
        seed = int(rng.integers(2**32))
        la, ld = shapes[int(rng.integers(len(shapes)))]
        t = int(rng.integers(1, 17))
        spec = CircuitSpec(8, 2, "open", RandomGates(seed))
        p = HPPartition(8, la, ld)
        d = p.d_A * p.d_C * choi_purity(build_evolution(spec, t), p) - 1
        worst = max(worst, abs(d - delta_from_otoc(p, otoc_average(spec, p, t))))
    assert record(9, worst <= 1e-9, f"max |delta - delta(F)| = {worst:.1e} over 10 random (circuit, t) pairs")


def test_criterion_10_relaxation_asymptotics():
    L = 60
    ts, logs = relaxation_series(L, 1, 1, 2, 16 * L + 1)
    sel = (ts >= 8 * L) & (ts <= 16 * L)
    log_ratio = logs[sel] - np.array([asymptotic_relaxation(L, float(t), 2, 1, 1, log=True) for t in ts[sel]])
    ratio = np.exp(log_ratio - log_ratio.mean())
    spread = float(ratio.max() / ratio.min())
    ok = ratio.max() <= 1.1 and ratio.min() >= 0.9
    assert record(10, ok, f"ratio exact/closed form varies by a factor {spread:.2f} over t/L in [8, 16] (needs <= 1.1/0.9)")


def test_criterion_11_integrable_vs_chaotic():
    gates = {
        "su2": xxz_gate(PI / 5, PI / 5),
        "nonsym": xxz_gate(PI / 5, math.sqrt(2) / 2 * PI / 5),
        "chaotic": xxz_gate(PI / 5, -0.3 * PI / 5, dressing=random_dressing(2, 1234)),
    }
    lds = [2, 3, 4, 5, 6]
    plateaus = {}
    for name, g in gates.items():
        spec = CircuitSpec(L12, 2, "periodic", Floquet(g))
        ss = decoding_series(spec, [HPPartition(L12, 1, ld) for ld in lds], saturation_window(L12))
        plateaus[name] = [s.window_mean(5 * L12, 10 * L12) for s in ss]
    i4 = lds.index(4)
    sep = min(plateaus["su2"][i4], plateaus["nonsym"][i4]) / plateaus["chaotic"][i4]
    k_su2 = fit_power_law(lds, plateaus["su2"]).exponent * -1
    k_ns = fit_power_law(lds, plateaus["nonsym"]).exponent * -1
    soft = 0.9 <= k_su2 <= 1.5 and 1.2 <= k_ns <= 1.8
    if not soft:
        warnings.warn(f"kappa outside soft bands: su2 {k_su2:.2f}, nonsym {k_ns:.2f}")
    ok = sep >= 10
    detail = f"L_D=4 ratio integrable/chaotic {sep:.1f}; kappa su2 {k_su2:.2f} [0.9,1.5], nonsym {k_ns:.2f} [1.2,1.8] ({'in' if soft else 'outside'} soft bands)"
    assert record(11, ok, detail)


def test_criterion_12_perturbed_formula_internals():
    from fractions import Fraction

    worst = 0.0
    for z in (0.05, 0.3, 0.7, 0.95):
        for n in range(1, 16):
            for m in range(n, 16):
                worst = max(worst, abs(f_beta(z, n, m) - float(f_alternating_exact(Fraction(z), n, m))))
    zero = max(abs(perturbed_decay(2, n, 20, 0.0)) for n in range(1, 11))
    ok = worst <= 1e-10 and zero == 0.0
    assert record(12, ok, f"beta vs alternating sum {worst:.1e}; z1 = 0 correction {zero}")
