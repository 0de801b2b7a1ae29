"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line with its diagnostics (with
output capture switched off, so the line shows up in any pytest log) and then
asserts the same condition.  Criterion 6 fails on purpose: the target it
names is off by sqrt 2, see the README.
"""

import json
import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from oracles import min_u_between_axes, random_sl2
from orthospec.fuchsian import ortho_spectrum
from orthospec.hypgeo import MoebiusElement, delta_invariant
from orthospec.rtf import geometric_side, next_order_coefficient, orbital_integral_exp, orbital_integral_general
from orthospec.specfun import C_UNIFORM, KernelSpec, k_imag_order, k_real_order, uniform_asymptotic
from orthospec.spectra import (
    count_bounds_report,
    good_slope,
    laplace_sum,
    small_t_asymptotic,
    synthetic_spectrum,
)

VOL = 4 * math.pi


@pytest.fixture
def report(pytestconfig):
    capman = pytestconfig.pluginmanager.getplugin("capturemanager")

    def emit(n, ok, seconds, limit, detail):
        ok = ok and seconds < limit
        with capman.global_and_fixture_disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {detail} [{seconds:.2f}s of {limit:g}s]")
        assert ok, detail

    return emit


def test_c1_half_order_closed_form(report):
    t0 = time.perf_counter()
    zs = np.geomspace(0.1, 50.0, 50)
    err = max(abs(k_real_order(0.5, z) / (math.sqrt(math.pi / (2 * z)) * math.exp(-z)) - 1) for z in zs)
    report(1, err < 1e-10, time.perf_counter() - t0, 1.0, f"max rel err {err:.2e} (< 1e-10)")


def test_c2_uniform_asymptotic(report):
    t0 = time.perf_counter()
    worst_excess, worst_ratio, n = 0.0, 0.0, 0
    for r in (4, 8, 16, 32):
        for z in (1e2, 1e3, 1e4):
            if r > math.sqrt(z):
                continue
            u, reg = uniform_asymptotic(r, z, scaled=True)
            q = k_imag_order(r, z, scaled=True)
            gap = abs(u - q)
            worst_excess = max(worst_excess, gap / reg.error_estimate)
            worst_ratio = max(worst_ratio, gap / (r * z**-2.0))
            n += 1
    ok = worst_excess <= 1.0 and worst_ratio <= C_UNIFORM
    report(2, ok, time.perf_counter() - t0, 30.0,
           f"{n} points, max |d|/estimate {worst_excess:.3f}, max ratio {worst_ratio:.4f} (C = {C_UNIFORM})")


def test_c3_cross_form_identity(report):
    t0 = time.perf_counter()
    worst = 0.0
    for d in (0.0, 1.0, 3.0, 10.0):
        for t in (0.5, 1.0, 2.0):
            a = orbital_integral_general(d, KernelSpec.exponential(t))
            b = orbital_integral_exp(d, t)
            worst = max(worst, abs(a - b) / abs(b))
    report(3, worst <= 1e-7, time.perf_counter() - t0, 60.0, f"max rel disagreement {worst:.2e} (<= 1e-7)")


def test_c4_minimum_distance(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(100):
        g = random_sl2(rng)
        d = delta_invariant(MoebiusElement(*g)).delta
        u = min_u_between_axes(g)
        worst = max(worst, abs(u - (max(2.0, d) - 2.0)) / (1 + d))
    report(4, worst <= 1e-6, time.perf_counter() - t0, 60.0, f"max |u - (max(2,d)-2)|/(1+d) {worst:.2e} (<= 1e-6)")


def test_c5_large_t_limit(report, bolza, systole):
    t0 = time.perf_counter()
    spec500 = ortho_spectrum(bolza, systole, 500.0)
    t = 50.0
    res = geometric_side(spec500, kernel=KernelSpec.exponential(t), rtol=1e-6)
    gap = res.total * math.sqrt(t / math.pi) / spec500.lenC - 1
    bound_ok = res.truncation_certified and res.truncation_bound < 1e-6 * res.total
    detail = f"t=50 gap {gap:+.2e}, truncation {res.truncation_bound:.1e}"
    ok = abs(gap) <= 0.02 and bound_ok
    if len(spec500.exceptional_delta):
        fitted, predicted = next_order_coefficient(spec500, [20.0, 40.0, 80.0])
        ok = ok and abs(fitted / predicted - 1) <= 0.1
        detail += f", next order {fitted:.4f} vs {predicted:.4f}"
    else:
        detail += ", systole is simple so no next-order term"
    report(5, ok, time.perf_counter() - t0, 300.0, detail)


def test_c6_small_t_growth(report, bolza, systole):
    t0 = time.perf_counter()
    spec500 = ortho_spectrum(bolza, systole, 500.0)
    rows = small_t_asymptotic(spec500, VOL, [0.2, 0.1, 0.05])
    vals = [r["t_total"] for r in rows]
    target = rows[0]["target_sqrt2"]
    gaps = [abs(v / target - 1) for v in vals]
    monotone = gaps[0] > gaps[1] > gaps[2]
    certified = all(r["certified"] for r in rows)
    ok = monotone and gaps[2] <= 0.2 and certified
    detail = (f"t*G = {', '.join(f'{v:.4f}' for v in vals)} vs {target:.4f}, gap at 0.05 {gaps[2]:.1%}, "
              f"monotone {monotone}; lenC^2 pi/vol = {rows[0]['target']:.4f} is {abs(vals[2] / rows[0]['target'] - 1):.1%} off")
    report(6, ok, time.perf_counter() - t0, 600.0, detail)


def test_c7_synthetic_laplace_limit(report, spec60):
    t0 = time.perf_counter()
    lenC = spec60.lenC
    s = synthetic_spectrum(VOL, lenC, 1e6)
    v = laplace_sum(s, 1e4)
    gap = v / (lenC / 2) - 1
    report(7, abs(gap) <= 0.05, time.perf_counter() - t0, 10.0, f"z=1e4 value {v:.5f} vs {lenC / 2:.5f}, gap {gap:+.2%}")


def test_c8_synthetic_partial_sums(report, spec60):
    t0 = time.perf_counter()
    lenC = spec60.lenC
    s = synthetic_spectrum(VOL, lenC, 1e6)
    exact = lenC / math.pi * np.sqrt(s.lam)
    resid = float(np.max(np.abs(s.partial_sums() / exact - 1)))
    counts = np.array([s.counting(float(x)) for x in s.lam[::997]])
    weyl = bool(np.array_equal(counts, np.arange(0, len(s), 997) + 1))
    report(8, resid < 1e-9 and weyl, time.perf_counter() - t0, 1.0,
           f"{len(s)} eigenvalues, max rel residual {resid:.1e}, N(lam_j) = j {weyl}")


def test_c9_counting(report, bolza, systole):
    t0 = time.perf_counter()
    spec3000 = ortho_spectrum(bolza, systole, 3000.0)
    rep = count_bounds_report(spec3000)
    slope = good_slope(spec3000.lenC, spec3000.lenC, VOL)
    rel = rep["mean_slope"] / slope - 1
    ok = rep["x2_decreasing"] and rep["cv"] < 0.3 and abs(rel) <= 0.3
    report(9, ok, time.perf_counter() - t0, 600.0,
           f"pi/x^2 decreasing {rep['x2_decreasing']}, cv {rep['cv']:.3f}, "
           f"mean pi/x {rep['mean_slope']:.4f} vs {slope:.4f} ({rel:+.1%})")


BOLZA = {"builtin": "bolza", "geodesic": {"word": [1]}}
CONFIGS = {
    "ortho-spectrum": {**BOLZA, "params": {"cutoff_X": 200}},
    "pair-spectrum": {**BOLZA, "geodesic2": {"word": [2, -3]}, "params": {"cutoff_X": 100}},
    "geom-side": {**BOLZA, "characters": {"j": 1, "k": 1}, "params": {"cutoff_X": 200, "t_ladder": [1, 4]}},
    "spectral-side": {"params": {"spectral_csv": "spec.csv", "t_ladder": [0.5, 2]}},
    "limit-check": {**BOLZA, "params": {"cutoff_X": 60, "t_ladder": [4, 8, 16, 32]}},
    "small-t": {**BOLZA, "params": {"cutoff_X": 500, "t_ladder": [0.5, 0.2]}},
    "bessel": {"params": {"r_ladder": [0, 3, 40, 400], "z_ladder": [1, 100]}},
    "kloosterman": {**BOLZA, "params": {"cutoff_X": 200, "m": 1, "n": 1, "x_ladder": [4, 8]}},
    "basmajian": {**BOLZA, "geodesic2": {"word": [2, -3]}, "params": {"cutoff_X": 100, "cutoff_ladder": [30, 100]}},
    "synthetic": {"params": {"volX": VOL, "lenC": 3.0571418389619964, "lambda_max": 1e4, "z_ladder": [10, 100]}},
}


def test_c10_determinism(report, tmp_path):
    t0 = time.perf_counter()
    (tmp_path / "spec.csv").write_text("lambda,p\n0,1.5\n2.5,0.25\n9.25,0.5+0.1j\n")
    bad = []
    for command, cfg in CONFIGS.items():
        path = tmp_path / f"{command}.json"
        path.write_text(json.dumps(cfg))
        outs = []
        for threads in ("1", "1", "4", "4"):
            env = dict(os.environ, ORTHOSPEC_THREADS=threads)
            res = subprocess.run([sys.executable, "-m", "orthospec.cli", command, "--config", str(path)],
                                 env=env, capture_output=True)
            outs.append((res.returncode, res.stdout))
        if outs[0][0] != 0 or len(set(outs)) != 1:
            bad.append(command)
    report(10, not bad, time.perf_counter() - t0, 60.0,
           f"{len(CONFIGS)} commands x 4 runs, mismatched or failing: {bad or 'none'}")
