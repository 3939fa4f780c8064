import numpy as np
import pytest

from mblaser import kernels
from mblaser.errors import ValidationError

PI = np.pi
TWO_PI = 2.0 * np.pi


class TestFundamentalSolution:
    def test_retardation(self):
        assert kernels.fundamental_solution(-0.5, 1e-3) == 0.0

    def test_unit_peak_at_quarter_period(self):
        assert kernels.fundamental_solution(PI / 2, 0.0) == pytest.approx(1.0)

    @pytest.mark.parametrize("kappa", [1e-7, 1e-5, 1e-4, 1e-3])
    def test_exact_vs_leading(self, kappa):
        tau = np.linspace(1e-6, TWO_PI, 300)
        gap = np.max(np.abs(kernels.fundamental_solution(tau, kappa, "exact")
                            - kernels.fundamental_solution(tau, kappa, "leading")))
        assert gap <= 10.0 * kappa ** 2

    @pytest.mark.parametrize("tau,kappa", [(1.0, 1e-7), (3.0, 1e-3), (6.0, 0.0)])
    def test_ode_residual_examples(self, tau, kappa):
        assert abs(kernels.residual_of_ode(tau, kappa)) <= 1e-12

    def test_ode_residual_random(self):
        rng = np.random.default_rng(8)
        for _ in range(100):
            tau = rng.uniform(1e-3, TWO_PI)
            kappa = rng.uniform(0.0, 1e-2)
            assert abs(kernels.residual_of_ode(tau, kappa)) <= 1e-12

    def test_domain(self):
        with pytest.raises(ValidationError):
            kernels.fundamental_solution(1.0, 0.2)


class TestQuadrature:
    def test_sine_period(self):
        assert abs(kernels.quadrature(np.sin, 0.0, TWO_PI)) <= 1e-12

    def test_tau_exp(self):
        val = kernels.quadrature(lambda t: t * np.exp(1j * t), 0.0, TWO_PI)
        assert abs(val - (-2j * PI)) <= 1e-11

    def test_tau2_exp2(self):
        val = kernels.quadrature(lambda t: t * t * np.exp(2j * t), 0.0, TWO_PI)
        assert abs(val - (PI - 2j * PI ** 2)) <= 1e-11

    def test_bad_tol(self):
        with pytest.raises(ValidationError):
            kernels.quadrature(np.sin, 0.0, 1.0, tol=0.0)

    def test_nonconvergence_raises(self):
        import warnings
        from mblaser.errors import NumericsError
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            with pytest.raises(NumericsError):
                # non-integrable endpoint singularity
                kernels.quadrature(lambda t: 1.0 / t, 0.0, 1.0, tol=1e-12)


class TestRunningIntegrals:
    def test_empty_range(self):
        assert kernels.integral_I(0.0, 1e-3, 1) == 0.0
        assert kernels.integral_I(0.0, 1e-3, 2) == 0.0

    def test_i2_full_period_undamped(self):
        # quadrature of (tau'/2) cos tau' sin(2pi - tau') gives pi/4
        val = kernels.integral_I(TWO_PI, 0.0, 2)
        assert val.real == pytest.approx(PI / 4, abs=1e-12)
        assert abs(val.imag) <= 1e-14

    def test_i1_full_period_undamped(self):
        assert abs(kernels.integral_I(TWO_PI, 0.0, 1) - PI * 1j) <= 1e-12

    @pytest.mark.parametrize("kappa", [0.0, 1e-5, 1e-3])
    @pytest.mark.parametrize("which", [1, 2])
    def test_exact_matches_oracle(self, kappa, which):
        for tau in (0.7, 2.5, TWO_PI):
            closed = kernels.integral_I(tau, kappa, which)
            oracle = kernels.integral_I_oracle(tau, kappa, which)
            assert abs(closed - oracle) <= 10.0 * kappa ** 2 + 1e-10

    def test_leading_i1_is_second_order(self):
        for kappa in (1e-5, 1e-3):
            for tau in (1.0, 3.0, TWO_PI):
                gap = abs(kernels.integral_I(tau, kappa, 1)
                          - kernels.integral_I(tau, kappa, 1, form="leading"))
                assert gap <= 50.0 * kappa ** 2

    def test_leading_i2_residual_orders(self):
        # the leading I2 drops its damping prefactor: O(kappa) mid-period,
        # second order again at the full period
        for kappa in (1e-5, 1e-3):
            mid = max(abs(kernels.integral_I(t, kappa, 2)
                          - kernels.integral_I(t, kappa, 2, form="leading"))
                      for t in (1.0, 3.0, 4.6))
            assert mid <= 6.0 * kappa
            end = abs(kernels.integral_I(TWO_PI, kappa, 2)
                      - kernels.integral_I(TWO_PI, kappa, 2, form="leading"))
            assert end <= 50.0 * kappa ** 2


class TestPeriodConstants:
    def test_j_at_working_kappa(self):
        j1, j2 = kernels.constants_J(1e-7)
        assert abs(j1) <= 1e-6
        assert abs(j2 - PI ** 2 / 12.0) <= 1e-6

    def test_j2_undamped_exact(self):
        _, j2 = kernels.constants_J(0.0)
        assert j2 == PI ** 2 / 12.0

    @pytest.mark.parametrize("kappa", [1e-5, 1e-3])
    def test_j_oracle(self, kappa):
        j1, j2 = kernels.constants_J(kappa)
        j1o, j2o = kernels.constants_J_oracle(kappa)
        assert abs(j1 - j1o) <= 10.0 * kappa ** 2
        assert abs(j2 - j2o) <= 10.0 * kappa ** 2

    def test_j1_is_first_order(self):
        # J1 = kappa/4 + O(kappa^2): the quadrature oracle rules out J1 ~ 0
        j1o, _ = kernels.constants_J_oracle(1e-3)
        assert abs(j1o - 0.25e-3) <= 1e-5
        assert abs(j1o) > 2e-4

    def test_undamped_values(self):
        kc = kernels.constants_AB(0.0)
        assert abs(kc.A1 - PI * 1j) <= 1e-13
        assert abs(kc.A2 - (PI / 2 + 1j * PI ** 2)) <= 1e-12
        assert kc.A3 == pytest.approx(PI / 2, abs=1e-12)
        assert abs(kc.B1 - PI) <= 1e-13
        assert abs(kc.B2 - (PI ** 2 + 1j * PI / 2)) <= 1e-12

    @pytest.mark.parametrize("kappa", [0.0, 1e-5, 1e-3])
    def test_closed_vs_oracle(self, kappa):
        kc = kernels.constants_AB(kappa)
        oracle = kernels.constants_AB_oracle(kappa)
        tol = 10.0 * kappa ** 2 + 1e-10
        for name in ("A1", "A2", "A3", "B1", "B2", "B3"):
            assert abs(getattr(kc, name) - oracle[name]) <= tol, name

    @pytest.mark.parametrize("kappa", [0.0, 1e-5, 1e-3])
    def test_structural_identities(self, kappa):
        kc = kernels.constants_AB(kappa)
        # exact identities of the defining integrals
        assert kc.A3 == kc.A2.real
        assert kc.B3 == kc.B2.real
        assert abs(kc.B2 - (kc.A1 - 1j * kc.A2)) <= 1e-13
        e2pi = kernels.fundamental_solution(TWO_PI, kappa)
        assert abs(kc.B1 - (-1j * kc.A1 + e2pi)) <= 1e-13
        # the leading components satisfy them by construction
        assert kc.B11 == kc.A12 and kc.B12 == -kc.A11
        assert kc.B21 == kc.A11 + kc.A22 and kc.B22 == kc.A12 - kc.A21

    def test_b3_sign_decided_by_oracle(self):
        # Re B2, not -Im B2
        oracle = kernels.constants_AB_oracle(1e-3)
        assert abs(oracle["B3"] - oracle["B2"].real) <= 1e-10
        assert abs(oracle["B3"] - (-oracle["B2"].imag)) > 1.0

    @pytest.mark.parametrize("kappa", [1e-5, 1e-3])
    def test_leading_components_are_second_order(self, kappa):
        kc = kernels.constants_AB(kappa)
        assert abs(kc.A1 - complex(kc.A11, kc.A12)) <= 50.0 * kappa ** 2
        assert abs(kc.A2 - complex(kc.A21, kc.A22)) <= 50.0 * kappa ** 2
        assert abs(kc.B1 - complex(kc.B11, kc.B12)) <= 50.0 * kappa ** 2
        assert abs(kc.B2 - complex(kc.B21, kc.B22)) <= 50.0 * kappa ** 2


class TestCollectiveKernels:
    def test_response_kernel_oracle(self):
        assert abs(kernels.response_kernel_oracle() - kernels.RESPONSE_XI) <= 1e-9

    def test_border_dressing_oracle(self):
        wa = kernels.border_dressing_oracle("a")
        wb = kernels.border_dressing_oracle("b")
        assert abs(wa - kernels.W_DRESS_A) <= 1e-5
        assert abs(wb - kernels.W_DRESS_B) <= 1e-5
