import math

import numpy as np
import pytest

from seasonal_dispersal import (BoundaryCondition, BracketError, Grid,
                                LaplaceKernel, Regime, ValidationError,
                                assemble, critical_length,
                                periodic_eigenfunction, principal_eigenpair,
                                threshold)

from helpers import P1, P2, P3, dense_sigma1, dirichlet_op, params

NEU = BoundaryCondition.NEUMANN


def test_single_node_eigenproblem_by_hand():
    # 1x1 problem: r = d K00 = 0.5, sigma1 = d - a - r = 0.5
    op = dirichlet_op(LaplaceKernel(1.0), 1.0, 1, d=1.0)
    pair = principal_eigenpair(op, a=0.0)
    assert pair.sigma1 == pytest.approx(1.0 - op.d * op.K[0, 0], abs=1e-14)
    assert pair.sigma1 == pytest.approx(0.5, abs=1e-14)
    assert pair.phi1[0] == pytest.approx(1.0)


def test_sigma1_below_d_minus_a_and_residual():
    rng = np.random.default_rng(5)
    for _ in range(10):
        d = rng.uniform(0.2, 2.0)
        a = rng.uniform(0.1, 2.0)
        scale = rng.uniform(0.5, 10.0)
        length = rng.uniform(0.3, 4.0) * scale
        op = dirichlet_op(LaplaceKernel(scale), length, int(rng.integers(16, 64)), d)
        pair = principal_eigenpair(op, a)
        assert pair.sigma1 < d - a
        assert pair.residual <= 1e-8
        assert np.all(pair.phi1 > 0)
        assert np.max(pair.phi1) == pytest.approx(1.0)


def test_eigen_identity_residual_in_sup_norm():
    p = params(P1)
    op = dirichlet_op(LaplaceKernel(20.0), 0.4, 64, p.d)
    pair = principal_eigenpair(op, p.a)
    defect = op.d * (op.K @ pair.phi1 - pair.phi1) + p.a * pair.phi1 \
        + pair.sigma1 * pair.phi1
    assert np.max(np.abs(defect)) <= 1e-8


def test_against_dense_full_spectrum_oracle():
    for d, a, scale, length, n in [(0.6, 1.2, 1.0, 2.0, 128),
                                   (1.0, 1.2, 20.0, 0.4, 96),
                                   (0.9, 0.3, 2.0, 7.0, 160)]:
        op = dirichlet_op(LaplaceKernel(scale), length, n, d)
        pair = principal_eigenpair(op, a)
        assert pair.sigma1 == pytest.approx(dense_sigma1(op, a), abs=1e-7)


def test_grid_refinement_stability():
    p = params(P2)
    vals = []
    for n in (256, 512):
        op = dirichlet_op(LaplaceKernel(1.0), 2.0, n, p.d)
        vals.append(principal_eigenpair(op, p.a).sigma1)
    assert abs(vals[0] - vals[1]) <= 1e-4


def test_requires_dirichlet():
    op = assemble(LaplaceKernel(1.0), Grid.centered(1.0, 8), NEU, d=1.0)
    with pytest.raises(ValidationError, match="Dirichlet"):
        principal_eigenpair(op, a=1.0)


class TestThreshold:
    def test_neumann_closed_form_P1(self):
        p = params(P1)
        op = assemble(LaplaceKernel(20.0), Grid.centered(0.4, 16), NEU, p.d)
        rep = threshold(p, op)
        assert rep.sigma1 is None
        assert rep.lambda1 == pytest.approx(0.6 * 0.2 - 1.2 * 0.4, abs=1e-15)
        assert rep.lambda1 == pytest.approx(-0.36)

    def test_dirichlet_affine_in_rho(self):
        # with sigma1 held fixed, lambda1 interpolates sigma1 (rho -> 0)
        # and delta (rho -> 1) affinely
        op = dirichlet_op(LaplaceKernel(2.0), 2.0, 64, d=0.6)
        pair = principal_eigenpair(op, a=1.2)
        s = pair.sigma1
        for rho in (0.05, 0.3, 0.5, 0.8, 0.95):
            p = params(d=0.6, a=1.2, rho=rho)
            rep = threshold(p, op, pair)
            assert rep.lambda1 == pytest.approx(s + rho * (p.delta - s), rel=1e-12)

    def test_dirichlet_lower_bound(self):
        p = params(P1)
        op = dirichlet_op(LaplaceKernel(20.0), 0.4, 64, p.d)
        rep = threshold(p, op)
        assert rep.lambda1 > p.rho * p.delta - (1 - p.rho) * p.a

    def test_P2_opposite_signs_with_oracle(self):
        p = params(P2)
        k = LaplaceKernel(20.0)
        lams = {}
        for length in (0.4, 8.0):
            n = 512
            op = dirichlet_op(k, length, n, p.d)
            rep = threshold(p, op)
            oracle = (1 - p.rho) * dense_sigma1(op, p.a) + p.rho * p.delta
            assert rep.lambda1 == pytest.approx(oracle, abs=1e-7)
            lams[length] = rep.lambda1
        assert lams[0.4] > 0 > lams[8.0]

    def test_rate_mismatch_rejected(self):
        p = params(P1)
        op = dirichlet_op(LaplaceKernel(20.0), 0.4, 16, d=0.7)
        with pytest.raises(ValidationError, match="dispersal"):
            threshold(p, op)


class TestPeriodicEigenfunction:
    def setup_method(self):
        self.p = params(P1)
        self.op = dirichlet_op(LaplaceKernel(20.0), 0.4, 48, self.p.d)
        self.pair = principal_eigenpair(self.op, self.p.a)

    def test_initial_value_is_phi1(self):
        phi = periodic_eigenfunction(self.p, self.pair, 0.0)
        assert np.array_equal(phi.values, self.pair.phi1)

    def test_bad_season_end_exponent_by_hand(self):
        p, pair = self.p, self.pair
        t = p.rho * p.omega
        expected = math.exp((1 - p.rho) * (pair.sigma1 - p.delta) * p.rho * p.omega)
        phi = periodic_eigenfunction(p, pair, t)
        assert np.allclose(phi.values, expected * pair.phi1, rtol=1e-12)

    def test_periodicity(self):
        phi = periodic_eigenfunction(self.p, self.pair, self.p.omega)
        assert np.max(np.abs(phi.values - self.pair.phi1)) <= 1e-10 * np.max(self.pair.phi1)

    def test_outside_period_rejected(self):
        with pytest.raises(ValidationError):
            periodic_eigenfunction(self.p, self.pair, -0.1)
        with pytest.raises(ValidationError):
            periodic_eigenfunction(self.p, self.pair, 1.5 * self.p.omega)


class TestSpectralProperties:
    def test_sigma1_strictly_decreasing_in_length(self):
        p = params(P1)
        k = LaplaceKernel(1.0)
        sig = []
        for ell in (1.0, 2.0, 4.0, 8.0, 16.0):
            n = max(256, math.ceil(64 * ell))
            sig.append(principal_eigenpair(dirichlet_op(k, ell, n, p.d), p.a).sigma1)
        assert all(b < a for a, b in zip(sig, sig[1:]))

    def test_limits_small_and_large_domain(self):
        d, a = 0.6, 1.2
        k = LaplaceKernel(1.0)
        s_small = principal_eigenpair(dirichlet_op(k, 1e-3, 256, d), a).sigma1
        assert abs(s_small - (d - a)) <= 1e-2
        s_large = principal_eigenpair(dirichlet_op(k, 200.0, 1024, d), a).sigma1
        assert abs(s_large - (-a)) <= 5e-2

    def test_translation_invariance(self):
        rng = np.random.default_rng(9)
        p = params(P2)
        k = LaplaceKernel(1.5)
        base = principal_eigenpair(
            assemble(k, Grid(-1.0, 2.0, 96), BoundaryCondition.DIRICHLET, p.d), p.a)
        for _ in range(4):
            c = rng.uniform(-30.0, 30.0)
            shifted = principal_eigenpair(
                assemble(k, Grid(-1.0 + c, 2.0 + c, 96), BoundaryCondition.DIRICHLET,
                         p.d), p.a)
            assert abs(shifted.sigma1 - base.sigma1) <= 1e-10

    def test_linear_scaling_in_d_at_zero_growth(self):
        k = LaplaceKernel(1.0)
        s1 = principal_eigenpair(dirichlet_op(k, 2.0, 128, 0.7), a=0.0).sigma1
        s2 = principal_eigenpair(dirichlet_op(k, 2.0, 128, 1.4), a=0.0).sigma1
        assert abs(s2 / s1 - 2.0) <= 1e-8


def test_threshold_is_linear_period_map_decay_rate():
    # the linearized model (b ~ 0) maps phi1 to e^{-lambda1 omega} phi1 over
    # one period: exact decay through the bad season and, since phi1 is an
    # eigenfunction of the frozen good-season operator, pure exponential
    # growth at rate -sigma1 through the good one
    from seasonal_dispersal import StateVector, StepControl, period_map

    p = params(P1, b=1e-30)
    op = dirichlet_op(LaplaceKernel(2.0), 3.0, 64, p.d)
    pair = principal_eigenpair(op, p.a, tol_residual=1e-12)
    lam1 = threshold(p, op, pair).lambda1
    out = period_map(StateVector(pair.phi1), p, op, StepControl.for_params(p, 2000))
    expected = math.exp(-lam1 * p.omega) * pair.phi1
    assert np.max(np.abs(out.values - expected)) <= 1e-9 * np.max(expected)


def test_tabulated_kernel_eigen_matches_dense_oracle():
    from helpers import tent_kernel_table
    from seasonal_dispersal import TabulatedKernel

    k = TabulatedKernel(tent_kernel_table(1.0, m=81), half_width=1.0)
    op = assemble(k, Grid.centered(1.5, 96), BoundaryCondition.DIRICHLET, 0.8)
    pair = principal_eigenpair(op, a=1.1)
    assert pair.sigma1 == pytest.approx(dense_sigma1(op, 1.1), abs=1e-7)
    assert np.all(pair.phi1 > 0)


def test_eigen_iteration_budget_error():
    from seasonal_dispersal import EigenConvergenceError

    op = dirichlet_op(LaplaceKernel(1.0), 4.0, 64, 0.6)
    with pytest.raises(EigenConvergenceError) as err:
        principal_eigenpair(op, a=1.2, max_iter=2)
    assert err.value.iterations == 2
    assert err.value.last_residual > 0


class TestCriticalLength:
    def test_P1_persists_everywhere(self):
        # margin 0.36 > (1 - rho) d = 0.24
        res = critical_length(params(P1), LaplaceKernel(20.0))
        assert res.verdict is Regime.PERSIST_ALL_DOMAINS
        assert res.ell_star is None

    def test_P3_extinct_everywhere(self):
        # margin = 0.48 - 0.48 = 0
        res = critical_length(params(P3), LaplaceKernel(20.0))
        assert res.verdict is Regime.EXTINCT_ALL_DOMAINS

    def test_P2_finite_critical_length(self):
        p = params(P2)
        res = critical_length(p, LaplaceKernel(20.0), tol=1e-4)
        assert res.verdict is Regime.CRITICAL_LENGTH
        lo, hi = res.bracket
        assert hi - lo <= 1e-4
        assert res.lambda_lo > 0 > res.lambda_hi
        assert lo < res.ell_star < hi
        # independent sign check at the bracket endpoints via dense solves
        for ell, expect_positive in ((lo, True), (hi, False)):
            n = max(256, math.ceil(64 * ell / 20.0))
            op = dirichlet_op(LaplaceKernel(20.0), ell, n, p.d)
            lam = (1 - p.rho) * dense_sigma1(op, p.a) + p.rho * p.delta
            assert (lam > 0) is expect_positive

    def test_invalid_tol(self):
        with pytest.raises(ValidationError):
            critical_length(params(P2), LaplaceKernel(20.0), tol=0.0)

    def test_degenerate_regime_boundary_reports_bracket_failure(self):
        # margin exactly equal to (1-rho) d (dyadic values, so the equality
        # is bit-exact): the middle regime applies but lambda1(ell) < 0 for
        # every ell, so no sign change exists
        p = params(delta=0.5, a=1.0, b=0.6, d=0.5, rho=0.5, omega=1.0)
        assert p.growth_margin == (1 - p.rho) * p.d
        with pytest.raises(BracketError, match="degenerate"):
            critical_length(p, LaplaceKernel(1.0))

    def test_expansion_cap_reported(self):
        # weak growth pushes ell* to tens of kernel scales; a small expansion
        # cap must fail loudly instead of extrapolating
        p = params(a=0.4, d=1.0)
        assert 0 < p.growth_margin <= (1 - p.rho) * p.d
        with pytest.raises(BracketError, match="no sign change"):
            critical_length(p, LaplaceKernel(1.0), expand_cap=4.0)
