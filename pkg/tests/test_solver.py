import json
import math

import numpy as np
import pytest

from leray_alpha.fields import SpectralVectorField
from leray_alpha.grid import TorusGrid
from leray_alpha.solver import (
    AdmissibilityParams,
    ConfigError,
    SolverConfig,
    check_admissibility,
    global_criterion_monitor,
    integrate,
    make_initial_data,
    monitor_X_norm,
    picard_iterate,
    smoothing_diagnostic,
    taylor_green_exact,
)
from leray_alpha.solver.monitors import growth_ratio
from leray_alpha.spectral import divergence, leray_project, tensor_product
from leray_alpha.symbols import registered_g
from oracles import literal_variant_a, literal_variant_b

ONE2 = registered_g("constant_one", gamma=2.0)
ONE1 = registered_g("constant_one", gamma=1.0)


def cfg2(**kw):
    base = dict(n=2, N=16, T=0.2, dt=0.01, nu=1.0, alpha=1.0, L1=ONE2, L2=ONE1, s1=0.3, s2=0.6, output_every=1)
    base.update(kw)
    return SolverConfig(**base)


def small_random(cfg, amplitude=1e-2, seed=1, kcut=None):
    return make_initial_data("random_divfree", cfg.grid, {"sigma": 2.0, "amplitude": amplitude, "kcut": kcut}, seed)


class TestConfig:
    doc = {
        "n": 2,
        "N": 32,
        "T": 1.0,
        "dt": 0.01,
        "nu": 0.1,
        "alpha": 0.5,
        "L1": {"gamma": 2.0, "g": {"id": "log_half"}},
        "L2": {"gamma": 1.0},
        "besov": {"s1": 0.2, "s2": 0.7, "p": 2, "q": "inf"},
        "initial": {"kind": "taylor_green_2d"},
    }

    def test_round_trip(self):
        cfg = SolverConfig.from_dict(self.doc)
        assert cfg.q == math.inf and cfg.L1.g_id == "log_half"
        again = SolverConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
        assert again.to_dict() == cfg.to_dict()
        assert cfg.a == pytest.approx(0.25)

    @pytest.mark.parametrize("dt", [0.0, -1.0])
    def test_bad_dt_names_path(self, dt):
        with pytest.raises(ConfigError) as exc:
            SolverConfig.from_dict(self.doc | {"dt": dt})
        assert "dt" in exc.value.path

    def test_dt_above_horizon(self):
        with pytest.raises(ConfigError, match="dt"):
            SolverConfig.from_dict(self.doc | {"dt": 5.0})

    def test_unknown_key(self):
        with pytest.raises(ConfigError):
            SolverConfig.from_dict(self.doc | {"bogus": 1})

    def test_rate_checks_need_gamma_above_one(self):
        with pytest.raises(ConfigError) as exc:
            SolverConfig.from_dict(self.doc | {"L1": {"gamma": 0.9}, "rate_checks": True})
        assert exc.value.path == "$.L1.gamma"

    def test_unreadable(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text("{not json")
        with pytest.raises(ConfigError):
            SolverConfig.load(p)
        with pytest.raises(ConfigError):
            SolverConfig.load(tmp_path / "missing.json")


class TestAdmissibility:
    def test_variant_a_admissible(self):
        res = check_admissibility(AdmissibilityParams(3, 0.5, 3, 2, 0.3, 0.6), "A")
        assert res.verdict == "ADMISSIBLE"
        assert 0 < res.witness["k"] <= 0.5

    def test_variant_a_rejected(self):
        res = check_admissibility(AdmissibilityParams(2, 0.5, 3, 2, 0.3, 0.6), "A")
        assert res.verdict == "REJECTED"
        assert res.failed() == ["γ₁ ≥ s₂−s₁+1+n/p−k"]

    def test_variant_b_admissible(self):
        res = check_admissibility(AdmissibilityParams(3, 1, 3, 2, -0.4, 0.5), "B")
        assert res.verdict == "ADMISSIBLE"
        lhs = {i.text: i for i in res.inequalities}["γ₁ ≥ 2s₂−s₁−γ₂+n/p+1"]
        assert lhs.rhs == pytest.approx(2.9)

    def test_variant_b_witness(self):
        res = check_admissibility(AdmissibilityParams(4, 1, 3, 2, -0.4, 0.7), "B")
        assert res.admissible and res.witness is not None
        w = res.witness
        assert w["r"] == pytest.approx(-1 + 1 + w["M"] - 1.5)
        assert w["r1"] + w["r2"] > 0

    def test_verdict_is_conjunction(self):
        for g1 in (1.5, 2.0, 3.0, 4.0):
            res = check_admissibility(AdmissibilityParams(g1, 0.5, 3, 2, 0.3, 0.6), "A")
            assert res.admissible == all(i.holds for i in res.inequalities)

    def test_log_variant_tightens_boundary(self):
        # gamma1 exactly on the bound 2 s2 - s1 - gamma2 + n/p + 1 = 2.9
        pr = AdmissibilityParams(2.9, 1, 3, 2, -0.4, 0.5)
        assert check_admissibility(pr, "B").admissible
        assert not check_admissibility(pr, "B", log_variant=True).admissible

    def test_randomized_against_literal_lists(self):
        rng = np.random.default_rng(2024)
        for _ in range(50):
            g1, g2 = rng.uniform(0.8, 5), rng.uniform(0.05, 3)
            n, p = int(rng.choice([2, 3])), float(rng.choice([1.5, 2, 3, 4]))
            s1 = rng.uniform(-2, 2)
            s2 = s1 + rng.uniform(-0.2, 1.5)
            pr = AdmissibilityParams(g1, g2, n, p, s1, s2)
            assert check_admissibility(pr, "A").admissible == literal_variant_a(g1, g2, n, p, s1, s2)
            assert check_admissibility(pr, "B").admissible == literal_variant_b(g1, g2, n, p, s1, s2)

    def test_table_lists_every_inequality(self):
        res = check_admissibility(AdmissibilityParams(2, 0.5, 3, 2, 0.3, 0.6), "A")
        text = res.table()
        assert all(i.text in text for i in res.inequalities)
        assert "REJECTED" in text


class TestInitialData:
    def test_taylor_green_four_modes(self):
        g = TorusGrid(2, 16)
        u = make_initial_data("taylor_green_2d", g)
        x, y = g.x
        np.testing.assert_allclose(u.physical()[0], np.sin(x) * np.cos(y), atol=1e-14)
        np.testing.assert_allclose(u.physical()[1], -np.cos(x) * np.sin(y), atol=1e-14)
        assert np.sum(np.abs(u.coeffs) > 1e-12) == 8  # 4 modes in each component
        assert u.divergence_residual() < 1e-14

    def test_taylor_green_needs_2d(self):
        with pytest.raises(ValueError):
            make_initial_data("taylor_green_2d", TorusGrid(3, 8))

    def test_single_mode_unchanged(self):
        g = TorusGrid(2, 16)
        u = make_initial_data("single_mode", g, {"k": [1, 0], "amplitude": [0, 1]})
        np.testing.assert_array_equal(leray_project(u).coeffs, u.coeffs)
        np.testing.assert_allclose(u.physical()[1], np.cos(g.x[0]), atol=1e-14)

    def test_random_divfree(self):
        g = TorusGrid(3, 16)
        u = make_initial_data("random_divfree", g, {"sigma": 2.0, "amplitude": 0.3}, seed=4)
        assert u.divergence_residual() <= 1e-12
        assert u.l2_norm() == pytest.approx(0.3, rel=1e-12)
        v = make_initial_data("random_divfree", g, {"sigma": 2.0, "amplitude": 0.3}, seed=4)
        np.testing.assert_array_equal(u.coeffs, v.coeffs)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            make_initial_data("vortex_ring", TorusGrid(2, 16))


def reference_ns_step(u, h, E, Eh):
    """Plain pseudo-spectral Navier-Stokes IF-midpoint step, no Leray-alpha operators."""

    def rhs(v):
        return -leray_project(divergence(tensor_product(v, v))).coeffs

    mid = u.replace(Eh * (u.coeffs + 0.5 * h * rhs(u)))
    return leray_project(u.replace(E * u.coeffs + h * Eh * rhs(mid)))


class TestIntegrate:
    def test_zero_data(self):
        cfg = cfg2()
        tr = integrate(SpectralVectorField.zeros(cfg.grid), cfg)
        assert all(not np.any(u.coeffs) for u in tr.fields)
        assert not tr.blew_up

    @pytest.mark.parametrize("g_id", ["constant_one", "log_half"])
    def test_linear_single_mode_decay(self, g_id):
        L1 = registered_g(g_id, gamma=1.5)
        cfg = cfg2(L1=L1, T=0.5, dt=1e-3, nu=0.7, output_every=100)
        u0 = make_initial_data("single_mode", cfg.grid, {"k": [3, 0], "amplitude": [0, 1]})
        tr = integrate(u0, cfg, linear_only=True, diagnostics=False)
        for t, u in zip(tr.times, tr.fields):
            exact = math.exp(-0.7 * t * 3**1.5 / float(L1.g(3.0)))
            assert u.l2_norm() / u0.l2_norm() == pytest.approx(exact, rel=1e-6)

    def test_taylor_green(self):
        cfg = cfg2(N=32, T=0.5, dt=1e-3, nu=0.1, alpha=0.0, output_every=100)
        tr = integrate(make_initial_data("taylor_green_2d", cfg.grid), cfg, diagnostics=False)
        exact = taylor_green_exact(cfg.grid, 0.5, 0.1, ONE2)
        assert (tr.final - exact).l2_norm() <= 1e-6

    def test_second_order_on_perturbed_flow(self):
        # oracle: the same scheme at dt/16; the observed error ratio under halving should be ~4
        base = cfg2(N=16, T=0.5, nu=0.05, alpha=0.5, output_every=10**6)
        g = base.grid
        u0 = make_initial_data("taylor_green_2d", g) + small_random(base, amplitude=0.5, seed=3)
        ref = integrate(u0, base.replace(dt=0.5 / 1600), diagnostics=False).final
        errs = [(integrate(u0, base.replace(dt=dt), diagnostics=False).final - ref).l2_norm() for dt in (0.01, 0.005)]
        assert 3.5 < errs[0] / errs[1] < 4.5

    def test_invariants_along_run(self):
        cfg = cfg2(N=16, T=0.3, dt=0.01, nu=0.2, output_every=1)
        u0 = small_random(cfg, amplitude=0.5)
        mean = np.zeros_like(u0.coeffs)
        mean[:, 0, 0] = [0.3, -0.1]
        u0 = u0.replace(u0.coeffs + mean)
        tr = integrate(u0, cfg)
        for u in tr.fields:
            assert u.divergence_residual() <= 1e-10
            np.testing.assert_allclose(u.zero_mode(), [0.3, -0.1], atol=1e-12)
            assert u.hermitian_residual() <= 1e-14

    def test_alpha_zero_bit_identical_to_plain_navier_stokes(self):
        cfg = cfg2(N=16, T=0.05, dt=0.01, nu=0.1, alpha=0.0, L2=registered_g("log_half", gamma=3.0))
        u0 = small_random(cfg, amplitude=1.0)
        tr = integrate(u0, cfg, diagnostics=False)
        sym = 0.1 * ONE2.symbol(cfg.grid.kmag)
        E, Eh = np.exp(0.01 * sym), np.exp(0.005 * sym)
        u = u0
        for t, v in zip(tr.times[1:], tr.fields[1:]):
            u = reference_ns_step(u, 0.01, E, Eh)
            np.testing.assert_array_equal(u.coeffs, v.coeffs)

    def test_blow_up_flagged(self):
        cfg = cfg2(N=16, T=5.0, dt=0.2, nu=1e-4, alpha=0.0, output_every=1)
        tr = integrate(small_random(cfg, amplitude=200.0), cfg)
        assert tr.blew_up
        assert "blow-up" in tr.message
        assert tr.times[-1] < cfg.T

    def test_refined_start_is_geometric(self):
        cfg = cfg2(T=0.05, dt=0.01, refine_start=10, output_every=1)
        tr = integrate(small_random(cfg), cfg, diagnostics=False)
        t = np.array(tr.times)
        assert t[1] == pytest.approx(0.01 * 2.0**-10)
        np.testing.assert_allclose(t[2:12] / t[1:11], 2.0)
        assert t[11] == pytest.approx(0.01)
        assert np.all(np.diff(t) > 0)

    def test_grid_mismatch(self):
        cfg = cfg2()
        with pytest.raises(ValueError):
            integrate(SpectralVectorField.zeros(TorusGrid(2, 32)), cfg)


class TestPicard:
    def test_zero_data(self):
        cfg = cfg2(T=0.05)
        res = picard_iterate(SpectralVectorField.zeros(cfg.grid), cfg, 3)
        assert res.ratios == [0.0, 0.0]
        assert all(not np.any(u.coeffs) for it in res.iterates for u in it)

    def test_small_data_contracts_and_matches_integrate(self):
        cfg = cfg2(T=0.3)
        u0 = small_random(cfg)
        res = picard_iterate(u0, cfg, 6)
        assert len(res.ratios) == 5
        assert all(0 <= r < 1 for r in res.ratios)
        direct = integrate(u0, cfg, diagnostics=False).final
        assert (res.iterates[-1][-1] - direct).l2_norm() <= 1e-6 * u0.l2_norm()

    def test_shorter_horizon_contracts_no_worse(self):
        u0 = small_random(cfg2(), amplitude=0.5)
        rho = [max(picard_iterate(u0, cfg2(T=T), 3).ratios) for T in (0.4, 0.2, 0.05)]
        assert rho[0] >= rho[1] >= rho[2]

    def test_n_iter_validation(self):
        cfg = cfg2()
        with pytest.raises(ValueError):
            picard_iterate(small_random(cfg), cfg, 1)


class TestMonitors:
    def test_linear_run_has_zero_deviation(self):
        cfg = cfg2(T=0.2)
        tr = integrate(small_random(cfg, amplitude=1.0), cfg, linear_only=True)
        xn = monitor_X_norm(tr)
        assert xn.sup_deviation <= 1e-13 * xn.sup_weighted

    def test_heat_flow_weighted_sup_refinement_stable(self):
        vals = []
        for N in (16, 32):
            cfg = cfg2(N=N, T=0.3, dt=0.01)
            u0 = make_initial_data("random_divfree", cfg.grid, {"sigma": 1.0, "amplitude": 1.0, "kcut": 5}, 7)
            vals.append(monitor_X_norm(integrate(u0, cfg, linear_only=True)).sup_weighted)
        assert math.isfinite(vals[0])
        assert vals[1] == pytest.approx(vals[0], rel=1e-10)

    def test_small_time_weight_vanishes(self):
        cfg = cfg2(T=0.2, dt=0.01, refine_start=60)
        tr = integrate(small_random(cfg, amplitude=1.0), cfg, linear_only=True)
        xn = monitor_X_norm(tr)
        assert xn.t0_time == pytest.approx(0.01 * 2.0**-60)
        assert xn.t0_weighted <= 1e-2 * xn.sup_weighted

    def test_smoothing_r_equals_s1(self):
        cfg = cfg2(T=0.2)
        tr = integrate(small_random(cfg, amplitude=0.5), cfg)
        row = smoothing_diagnostic(tr, [cfg.s1])[0]
        assert row.exponent == 0
        assert row.sup == pytest.approx(max(tr.column("B_s1")), rel=1e-12)

    def test_smoothing_heat_mode_oracle(self):
        # |k| = 4 is dyadic, so ||u(t)||_{B^r_{2,2}} = 2^{2r} ||cos||_2 e^{-16 t}
        cfg = cfg2(T=0.5, dt=0.005, s1=0.0, output_every=1)
        u0 = make_initial_data("single_mode", cfg.grid, {"k": [4, 0], "amplitude": [0, 1]})
        tr = integrate(u0, cfg, linear_only=True)
        row = smoothing_diagnostic(tr, [1.0])[0]
        t = np.array(tr.times)
        oracle = np.max(np.sqrt(t) * 4.0 * math.pi * math.sqrt(2) * np.exp(-16 * t))
        assert row.sup == pytest.approx(oracle, rel=1e-10)
        # continuous sup_t t^{1/2} e^{-16 t} = (1/32)^{1/2} e^{-1/2}
        assert row.sup == pytest.approx(4 * math.pi * math.sqrt(2) * math.sqrt(1 / 32) * math.exp(-0.5), rel=1e-3)

    def test_smoothing_nonlinear_refinement_stable(self):
        sups = []
        for N in (16, 32):
            cfg = cfg2(N=N, T=0.3, dt=0.01)
            u0 = make_initial_data("random_divfree", cfg.grid, {"sigma": 1.0, "amplitude": 0.5, "kcut": 4}, 9)
            tr = integrate(u0, cfg)
            sups.append([r.sup for r in smoothing_diagnostic(tr, [cfg.s2, cfg.s2 + 0.5, cfg.s2 + 1])])
        sups = np.array(sups)
        assert np.all(np.isfinite(sups))
        np.testing.assert_allclose(sups[1], sups[0], rtol=0.05)

    def test_smoothing_rejects_low_r(self):
        cfg = cfg2(T=0.05)
        tr = integrate(small_random(cfg), cfg)
        with pytest.raises(ValueError):
            smoothing_diagnostic(tr, [cfg.s1 - 0.1])

    @pytest.mark.parametrize(
        "g1,g2,L1_id,expected",
        [(2.0, 1.0, "constant_one", "GLOBAL-REGIME"), (1.5, 1.0, "constant_one", "LOCAL-ONLY")],
    )
    def test_global_criterion(self, g1, g2, L1_id, expected):
        cfg = SolverConfig(n=3, N=8, T=1, dt=0.1, L1=registered_g(L1_id, gamma=g1), L2=registered_g("constant_one", gamma=g2))
        v = global_criterion_monitor(cfg)
        assert v.verdict == expected
        assert v.advisories == []

    def test_global_criterion_convergent_integral(self):
        L1 = registered_g("power", {"eps": 0.5}, gamma=2.0)
        cfg = SolverConfig(n=3, N=8, T=1, dt=0.1, L1=L1, L2=ONE1)
        v = global_criterion_monitor(cfg)
        assert v.exponent_ok and v.verdict == "LOCAL-ONLY"
        assert v.integral.details["classification"] == "CONVERGENT"

    def test_global_criterion_advisory(self):
        v = global_criterion_monitor(cfg2())
        assert any("n = 3" in a for a in v.advisories)

    def test_growth_ratio(self):
        cfg = cfg2(T=0.5, dt=0.01)
        tr = integrate(small_random(cfg, amplitude=0.1), cfg)
        assert 1.0 <= growth_ratio(tr) <= 2.0
