"""Acceptance criteria, each run at its stated tolerance.

Every test records one PASS/FAIL line through the ``acceptance`` fixture;
the lines are repeated in the pytest terminal summary.
"""

import math
import time

import numpy as np
import pytest

from leray_alpha.besov import (
    build_filter_bank,
    lp_block,
    paraproduct_decompose,
    partial_sum,
    verify_product_est_chemin,
    verify_product_est_standard,
)
from leray_alpha.fields import SpectralVectorField, random_coeffs
from leray_alpha.grid import TorusGrid
from leray_alpha.multipliers import verify_semigroup_lp_lq, verify_sobolev_smoothing
from leray_alpha.solver import (
    AdmissibilityParams,
    SolverConfig,
    check_admissibility,
    global_criterion_monitor,
    integrate,
    make_initial_data,
    picard_iterate,
    smoothing_diagnostic,
    taylor_green_exact,
)
from leray_alpha.solver.monitors import growth_ratio
from leray_alpha.spectral import dealiased_product, semigroup_apply
from leray_alpha.symbols import registered_g
from oracles import literal_variant_a, literal_variant_b

ONE = registered_g("constant_one", gamma=2.0)
LOG = registered_g("log_half", gamma=2.0)


def test_1_heat_kernel_reduction(acceptance):
    grid = TorusGrid(2, 64)
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        k = rng.integers(-31, 32, size=2)
        t = float(rng.uniform(1e-4, 0.05))
        c = np.zeros((2,) + grid.shape, complex)
        c[(slice(None),) + grid.mode_index(k)] = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        out = semigroup_apply(SpectralVectorField(grid, c), t, ONE).coeffs
        mask = c != 0
        exact = c[mask] * math.exp(-t * float(k @ k))
        worst = max(worst, float(np.max(np.abs(out[mask] / exact - 1))))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-12 and elapsed < 1.0
    acceptance("1", ok, f"max relative error {worst:.2e} over 1000 modes, {elapsed:.2f} s")
    assert ok


def _taylor_green(dt):
    cfg = SolverConfig(n=2, N=64, T=1.0, dt=dt, nu=0.1, alpha=0.0, output_every=10**6)
    start = time.perf_counter()
    tr = integrate(make_initial_data("taylor_green_2d", cfg.grid), cfg, diagnostics=False)
    elapsed = time.perf_counter() - start
    err = (tr.final - taylor_green_exact(cfg.grid, 1.0, 0.1, ONE)).l2_norm()
    return err, elapsed, tr.fields[0].l2_norm()


def test_2a_taylor_green_accuracy(acceptance):
    err, elapsed, _ = _taylor_green(1e-3)
    ok = err <= 1e-6 and elapsed < 30
    acceptance("2a", ok, f"L2 error {err:.2e} at dt=1e-3, {elapsed:.1f} s")
    assert ok


@pytest.mark.xfail(
    strict=True,
    reason="W(u,u) is a pure gradient for Taylor-Green, so the scheme is exact up to roundoff and the error "
    "does not scale with dt",
)
def test_2b_taylor_green_halving(acceptance):
    e1, _, norm = _taylor_green(1e-3)
    e2, _, _ = _taylor_green(5e-4)
    floor = 1e-12 * norm
    ratio = e1 / e2 if e2 > 0 else math.inf
    ok = e2 > floor and 3.0 <= ratio <= 5.0
    acceptance("2b", ok, f"errors {e1:.2e} -> {e2:.2e} (ratio {ratio:.2f}), roundoff floor {floor:.1e}")
    assert ok


def test_2b_supplement_second_order(acceptance):
    # the halving ratio measured where the time error is visible: a perturbed Taylor-Green flow
    base = SolverConfig(n=2, N=32, T=0.5, dt=0.01, nu=0.05, alpha=0.5, output_every=10**6)
    u0 = make_initial_data("taylor_green_2d", base.grid) + make_initial_data(
        "random_divfree", base.grid, {"sigma": 2.0, "amplitude": 0.5, "kcut": 8}, 3
    )
    ref = integrate(u0, base.replace(dt=0.5 / 1600), diagnostics=False).final
    errs = [(integrate(u0, base.replace(dt=dt), diagnostics=False).final - ref).l2_norm() for dt in (0.01, 0.005)]
    ratio = errs[0] / errs[1]
    ok = 3.5 <= ratio <= 4.5
    acceptance("2b (supplement)", ok, f"perturbed flow halving ratio {ratio:.3f}")
    assert ok


def test_3_semigroup_rates(acceptance):
    grid = TorusGrid(2, 128)
    start = time.perf_counter()
    reports = [verify_semigroup_lp_lq(ONE.with_gamma(g), grid, 2, math.inf) for g in (1.5, 2.0, 3.0)]
    log_rep = verify_semigroup_lp_lq(LOG, grid, 2, math.inf)
    elapsed = time.perf_counter() - start
    within = all(abs(r.exponent - r.predicted) <= 0.1 for r in reports)
    ok = within and all(r.passed for r in reports) and log_rep.passed and elapsed < 120
    slopes = ", ".join(f"{r.exponent:.3f}/{r.predicted:.3f}" for r in reports)
    acceptance(
        "3", ok, f"slopes (fit/pred) {slopes}; log_half {log_rep.exponent:.3f} in band; {elapsed:.1f} s"
    )
    assert ok


def test_4_sobolev_smoothing(acceptance):
    grid = TorusGrid(2, 64)
    tuples = [(0, 1, 2.0), (0, 1.5, 1.5), (0.5, 1.0, 2.0), (0, 2, 3.0), (1, 2, 1.5)]
    reports = [verify_sobolev_smoothing(ONE.with_gamma(g), grid, s1, s2) for s1, s2, g in tuples]
    dev = max(abs(r.exponent - r.predicted) for r in reports)
    ok = dev <= 0.1 and all(r.passed for r in reports)
    acceptance("4", ok, f"5 tuples, max |slope - predicted| {dev:.3f}")
    assert ok


def test_5_littlewood_paley_identities(acceptance):
    partition = max(build_filter_bank(TorusGrid(n, N)).partition_residual for n, N in ((2, 32), (2, 64), (3, 16)))
    grid = TorusGrid(2, 32)
    bank = build_filter_bank(grid)
    rng = np.random.default_rng(5)
    ortho = recon = 0.0
    for _ in range(100):
        f, g = random_coeffs(grid, 2.0, rng), random_coeffs(grid, 2.0, rng)
        fb = {j: lp_block(f, j, bank) for j in bank.indices}
        gb = {j: lp_block(g, j, bank) for j in bank.indices}
        for k in bank.indices:
            low_high = dealiased_product(partial_sum(f, k - 3, bank), gb[k], grid)
            for j in bank.indices:
                if abs(j - k) >= 4:
                    ortho = max(ortho, float(np.max(np.abs(lp_block(low_high, j, bank)))))
            for i in bank.indices:
                if abs(i - k) <= 2:
                    hh = dealiased_product(fb[k], gb[i], grid)
                    for j in bank.indices:
                        if j > k + 4:
                            ortho = max(ortho, float(np.max(np.abs(lp_block(hh, j, bank)))))
        parts = paraproduct_decompose(f, g, bank)
        recon = max(recon, float(np.max(np.abs(sum(parts) - dealiased_product(f, g, grid)))))
    ok = partition <= 1e-12 and ortho <= 1e-10 and recon <= 1e-10
    acceptance(
        "5", ok, f"partition {partition:.1e}, almost-orthogonality {ortho:.1e}, reconstruction {recon:.1e} (100 pairs)"
    )
    assert ok


def test_6_product_constants_refinement(acceptance):
    const = {"standard": [], "chemin": []}
    for N in (32, 64):
        grid = TorusGrid(2, N)
        bank = build_filter_bank(grid)
        rng = np.random.default_rng(0)
        pairs = [(random_coeffs(grid, 2.5, rng), random_coeffs(grid, 2.5, rng)) for _ in range(100)]
        const["standard"].append(verify_product_est_standard(pairs, 1.0, 2, 2, (math.inf, 2, 2, math.inf), bank).constant)
        const["chemin"].append(verify_product_est_chemin(pairs, 0.4, 0.4, 2, 2, 2, 2, bank).constant)
    change = {k: abs(v[1] / v[0] - 1) for k, v in const.items()}
    ok = all(c < 0.2 for c in change.values())
    acceptance("6", ok, f"N=32->64 change: standard {change['standard']:.1%}, Chemin {change['chemin']:.1%}")
    assert ok


def test_7_admissibility(acceptance):
    examples = [
        (AdmissibilityParams(3, 0.5, 3, 2, 0.3, 0.6), "A", True),
        (AdmissibilityParams(2, 0.5, 3, 2, 0.3, 0.6), "A", False),
        (AdmissibilityParams(3, 1, 3, 2, -0.4, 0.5), "B", True),
    ]
    exact = all(check_admissibility(p, v).admissible == want for p, v, want in examples)
    rng = np.random.default_rng(7)
    agree = 0
    for _ in range(50):
        g1, g2 = rng.uniform(0.8, 5), rng.uniform(0.05, 3)
        n, p = int(rng.choice([2, 3])), float(rng.choice([1.5, 2, 3, 4]))
        s1 = rng.uniform(-2, 2)
        s2 = s1 + rng.uniform(-0.2, 1.5)
        pr = AdmissibilityParams(g1, g2, n, p, s1, s2)
        agree += check_admissibility(pr, "A").admissible == literal_variant_a(g1, g2, n, p, s1, s2) and (
            check_admissibility(pr, "B").admissible == literal_variant_b(g1, g2, n, p, s1, s2)
        )
    ok = exact and agree == 50
    acceptance("7", ok, f"3 instantiated verdicts {'reproduced' if exact else 'MISMATCH'}, {agree}/50 random agree")
    assert ok


def test_8_picard_contraction(acceptance):
    cfg = SolverConfig(n=2, N=16, T=0.5, dt=0.01, alpha=1.0, s1=0.3, s2=0.6)
    u0 = make_initial_data("random_divfree", cfg.grid, {"sigma": 2.0, "amplitude": 1e-2}, 1)
    res = picard_iterate(u0, cfg, 6)
    direct = integrate(u0, cfg, diagnostics=False).final
    rel = (res.iterates[-1][-1] - direct).l2_norm() / direct.l2_norm()
    ok = len(res.ratios) == 5 and all(r < 1 for r in res.ratios) and rel <= 1e-6
    acceptance("8", ok, f"rho_1..5 = {', '.join(f'{r:.1e}' for r in res.ratios)}; Picard vs integrate {rel:.1e}")
    assert ok


def test_9_global_regime(acceptance):
    def verdict(g1, g2):
        cfg = SolverConfig(n=3, N=8, T=1, dt=0.1, L1=ONE.with_gamma(g1), L2=ONE.with_gamma(g2))
        return global_criterion_monitor(cfg).verdict

    v1, v2 = verdict(2.0, 1.0), verdict(1.5, 1.0)
    cfg = SolverConfig(
        n=3, N=32, T=5.0, dt=0.02, nu=1.0, alpha=1.0, L1=ONE, L2=ONE.with_gamma(1.0), s1=0.5, s2=1.0, output_every=5
    )
    u0 = make_initial_data("random_divfree", cfg.grid, {"sigma": 2.0, "amplitude": 0.1}, 11)
    start = time.perf_counter()
    tr = integrate(u0, cfg)
    elapsed = time.perf_counter() - start
    growth = growth_ratio(tr)
    ok = v1 == "GLOBAL-REGIME" and v2 == "LOCAL-ONLY" and not tr.blew_up and growth <= 2.0
    acceptance("9", ok, f"(2,1) {v1}, (1.5,1) {v2}; 3D N=32 T=5 H^s1 growth {growth:.3f} ({elapsed:.0f} s)")
    assert ok


def test_10_smoothing_diagnostic(acceptance):
    runs = [
        ("taylor_green_2d", (32, 64), dict(alpha=0.0, nu=0.1, T=1.0, dt=1e-3, output_every=10)),
        ("random_divfree", (16, 32), dict(alpha=1.0, nu=1.0, T=0.5, dt=0.005, output_every=1)),
    ]
    r_list = [0.3 + 0.5 * i for i in range(5)]
    worst, finite = 0.0, True
    for kind, Ns, kw in runs:
        sups = []
        for N in Ns:
            cfg = SolverConfig(n=2, N=N, s1=0.3, s2=0.6, refine_start=20, **kw)
            u0 = make_initial_data(kind, cfg.grid, {"sigma": 1.0, "amplitude": 0.5, "kcut": 4}, 3)
            sups.append([row.sup for row in smoothing_diagnostic(integrate(u0, cfg), r_list)])
        sups = np.array(sups)
        finite &= bool(np.all(np.isfinite(sups)))
        worst = max(worst, float(np.max(np.abs(sups[1] / sups[0] - 1))))
    ok = finite and worst <= 0.05
    acceptance("10", ok, f"r = s1..s1+2, finite {finite}, max refinement change {worst:.1e}")
    assert ok
