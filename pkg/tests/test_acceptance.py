"""Acceptance gate: one PASS/FAIL line per criterion, at the stated tolerances.

The sweeps are shared between criteria through module-scoped fixtures.  A
full run takes roughly half an hour on one core.  Verdicts are collected
into an "acceptance criteria" section of the terminal summary (and appear
live under ``-s``).
"""

import subprocess
import sys
import time
from pathlib import Path

import pytest

from excitedconc.analysis import (
    alpha_grid,
    assign_sides,
    energy_levels,
    fit_loglog,
    fit_rational_22,
    gaps_across,
    locate_discontinuities,
    locate_zero_onset,
    sweep,
)
from excitedconc.lattice import ModelSpec

from conftest import ACCEPTANCE_LINES

CHAIN_GRID = (0.0, 0.35, 0.005)
SQUARE_GRID = (0.0, 0.8, 0.005)
SS_GRID = (1.4, 1.6, 0.005)
RESOLUTION = 1e-8
ODD_THRESHOLD = 0.005

TABLE_EVEN = {8: 0.24630, 10: 0.24449, 12: 0.24349, 16: 0.24248}
N14_PRINTED, N14_TREND = 0.25288, 0.2429
TABLE_ODD = {
    9: (0.10855, 0.33049),
    11: (0.14910, 0.29944),
    13: (0.17465, 0.28243),
    15: (0.19145, 0.27199),
}
ALPHA_C = 0.24116
BETA = {"even": -1.962, "odd_right": -1.92, "odd_left": -2.082}
SSE_EVEN = 5.5561e-5


def verdict(number, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line, file=sys.__stdout__, flush=True)
    assert ok, line


def chain(n):
    return ModelSpec("chain1d", n)


# ----------------------------------------------------------------------------- shared runs


@pytest.fixture(scope="module")
def even_chains():
    start = time.perf_counter()
    runs = {}
    for n in (8, 10, 12, 14, 16):
        result = sweep(chain(n), alpha_grid(*CHAIN_GRID))
        runs[n] = (result, locate_discontinuities(result, resolution=RESOLUTION))
    return runs, time.perf_counter() - start


@pytest.fixture(scope="module")
def odd_chains():
    runs = {}
    for n in TABLE_ODD:
        result = sweep(chain(n), alpha_grid(*CHAIN_GRID))
        rep = locate_discontinuities(result, ODD_THRESHOLD, RESOLUTION)
        runs[n] = (result, assign_sides(rep, n))
    return runs


@pytest.fixture(scope="module")
def even_points(even_chains):
    runs, _ = even_chains
    return {n: rep.locations[0].alpha_star for n, (_, rep) in runs.items() if len(rep) == 1}


@pytest.fixture(scope="module")
def rational(even_points):
    return fit_rational_22(even_points)


@pytest.fixture(scope="module")
def square():
    start = time.perf_counter()
    result = sweep(ModelSpec("square2d", 16), alpha_grid(*SQUARE_GRID))
    rep = locate_discontinuities(result)
    return result, rep, time.perf_counter() - start


@pytest.fixture(scope="module")
def shastry_sutherland():
    result = sweep(ModelSpec("ss", 16), alpha_grid(*SS_GRID))
    return result, locate_discontinuities(result)


# ----------------------------------------------------------------------------- criteria


def test_criterion_1_even_chains(even_chains):
    runs, elapsed = even_chains
    parts, ok = [], elapsed <= 600
    for n, ref in TABLE_EVEN.items():
        locs = runs[n][1].alphas
        good = len(locs) == 1 and abs(locs[0] - ref) <= 2e-4
        ok &= good
        parts.append(f"N={n} " + (", ".join(f"{a:.5f}" for a in locs) or "none") + f" vs {ref}")
    locs14 = runs[14][1].alphas
    if len(locs14) == 1:
        a14 = locs14[0]
        near = "printed" if abs(a14 - N14_PRINTED) <= 2e-4 else (
            "trend" if abs(a14 - N14_TREND) <= 2e-4 else "neither")
        parts.append(f"N=14 {a14:.5f} (|d| printed {abs(a14 - N14_PRINTED):.1e}, "
                     f"trend {abs(a14 - N14_TREND):.1e}: matches {near})")
    else:
        parts.append(f"N=14 {len(locs14)} locations")
    parts.append(f"runtime {elapsed:.0f}s")
    verdict(1, ok, "; ".join(parts))


def test_criterion_2_odd_chains(odd_chains):
    ok, parts = True, []
    for n, refs in TABLE_ODD.items():
        locs = odd_chains[n][1].alphas
        good = len(locs) == 2 and all(abs(a - r) <= 2e-4 for a, r in zip(locs, refs))
        ok &= good
        parts.append(f"N={n} " + ", ".join(f"{a:.5f}" for a in locs) + f" vs {refs}")
    verdict(2, ok, "; ".join(parts))


def test_criterion_3_extrapolation(even_points, rational):
    ok = len(even_points) == 5 and abs(rational.p1 - ALPHA_C) <= 5e-4
    verdict(3, ok, f"p1 = {rational.p1:.6f} vs {ALPHA_C} from N={sorted(even_points)}, "
                   f"SSE {rational.sse:.2e}")


def test_criterion_4_scaling_exponents(even_points, odd_chains, rational):
    series = {
        "even": (even_points, "above"),
        "odd_right": ({n: r.alphas[0] for n, (_, r) in odd_chains.items() if len(r) == 2}, "below"),
        "odd_left": ({n: r.alphas[1] for n, (_, r) in odd_chains.items() if len(r) == 2}, "above"),
    }
    ok, parts = True, []
    # the reference exponents and SSE were obtained with alpha_c = 0.24116, so the
    # gate holds alpha_c there and varies only the points; the self-consistent
    # extrapolated value is reported alongside
    for alpha_c, gate in ((ALPHA_C, True), (rational.p1, False)):
        fits = {name: fit_loglog(pts, alpha_c, side) for name, (pts, side) in series.items()}
        sse_ok = SSE_EVEN / 2 <= fits["even"].sse <= 2 * SSE_EVEN
        betas_ok = all(abs(fits[s].beta - BETA[s]) <= 0.05 for s in BETA)
        text = ", ".join(f"beta_{s} {fits[s].beta:.4f}" for s in BETA)
        parts.append(f"alpha_c={alpha_c:.6f}{'' if gate else ' (own extrapolation)'}: {text}, "
                     f"SSE_even {fits['even'].sse:.3e} vs {SSE_EVEN:.4e}")
        if gate:
            ok = sse_ok and betas_ok
    verdict(4, ok, "; ".join(parts))


def test_criterion_5_square_lattice(square):
    result, rep, elapsed = square
    drops = [d for d in rep.locations if result.solve(d.bracket[1]).C1 <= 1e-12]
    c1 = drops[0].alpha_star if drops else None
    c0 = locate_zero_onset(result, "C0", resolution=1e-6)
    ok = (c1 is not None and abs(c1 - 0.4078) <= 2e-3 and c0 is not None
          and abs(c0 - 0.58) <= 0.01 and elapsed <= 900)
    verdict(5, ok, f"C1 drops to 0 at {c1} (0.4078 +/- 2e-3); C0 reaches 0 at {c0} "
                   f"(0.58 +/- 0.01); sweep {elapsed:.0f}s")


def test_criterion_6_shastry_sutherland(shastry_sutherland):
    result, rep = shastry_sutherland
    onset = locate_zero_onset(result, "C1", resolution=1e-6)
    ok = onset is not None and abs(onset - 1.52798) <= 2e-3
    jumps = ", ".join(f"{d.alpha_star:.5f}" for d in rep.locations)
    verdict(6, ok, f"C1 zero from {onset} (1.52798 +/- 2e-3); C1 jumps at {jumps}")


def _consistent(spec, result, rep):
    """Each discontinuity needs an excited crossing overlapping it and a gap sign change."""
    diagram = energy_levels(spec, None, result=result, resolution=RESOLUTION, include_ground=True)
    out = []
    for d in rep.locations:
        lo, hi = d.bracket
        slack = 1e-9
        hits = [c for c in diagram.crossings
                if c.bracket[0] <= hi + slack and c.bracket[1] >= lo - slack]
        excited = [c for c in hits if c.levels == (1, 2)]
        below, above = gaps_across(spec, d.bracket)
        flips = (below is not None and above is not None
                 and below.difference * above.difference < 0)
        kinds = ",".join(f"{c.levels[0]}-{c.levels[1]}" for c in hits) or "none"
        good = bool(excited) and flips
        out.append((good, f"{spec.kind.value} N={spec.n_sites} {d.alpha_star:.5f}: "
                          f"crossing {kinds}, gap sign change {'yes' if flips else 'no'}"))
    return out


def test_criterion_7_crossing_consistency(even_chains, odd_chains, square, shastry_sutherland):
    checks = []
    for n, (result, rep) in {**even_chains[0], **odd_chains}.items():
        checks += _consistent(chain(n), result, rep)
    checks += _consistent(ModelSpec("square2d", 16), square[0], square[1])
    checks += _consistent(ModelSpec("ss", 16), *shastry_sutherland)
    failed = [text for good, text in checks if not good]
    detail = f"{len(checks) - len(failed)}/{len(checks)} discontinuities consistent"
    if failed:
        detail += "; inconsistent: " + "; ".join(failed)
    verdict(7, not failed and bool(checks), detail)


def test_criterion_8_property_suites():
    suite = Path(__file__).with_name("test_properties.py")
    start = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", str(suite)],
                          capture_output=True, text=True, cwd=suite.parent.parent, check=False)
    elapsed = time.perf_counter() - start
    summary = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr[-200:]
    verdict(8, proc.returncode == 0 and elapsed < 120, f"{summary} ({elapsed:.0f}s wall)")
