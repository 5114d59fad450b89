import math

import numpy as np
import pytest

from algebroid_mech import Chart, Curve, NumericFailure, ScalarField, fd_gradient, integrate_rk4
from algebroid_mech.calculus import check_gradient, fd_jacobian

from conftest import seeded_points


class TestChart:
    def test_basic(self):
        c = Chart(dim=2, coord_names=("x", "theta"), periodic=(False, True))
        assert c.dim == 2 and c.periodic == (False, True)

    def test_invalid_dim(self):
        with pytest.raises(ValueError):
            Chart(dim=0, coord_names=())

    def test_duplicate_names(self):
        with pytest.raises(ValueError):
            Chart(dim=2, coord_names=("x", "x"))

    def test_wrap_only_touches_periodic_axes(self):
        c = Chart(dim=2, coord_names=("x", "phi"), periodic=(False, True))
        w = c.wrap(np.array([7.0, 2.0 * math.pi + 0.25]))
        assert w[0] == 7.0
        assert abs(w[1] - 0.25) < 1e-12


class TestFdGradient:
    def test_constant_field_zero(self):
        g = fd_gradient(lambda q: 5.0, np.array([0.3, -2.0]))
        assert np.all(g == 0.0)

    def test_product_field(self):
        g = fd_gradient(lambda q: q[0] * q[1], np.array([2.0, 3.0]))
        assert np.allclose(g, [3.0, 2.0], atol=1e-9)

    def test_sin(self):
        g = fd_gradient(lambda q: math.sin(q[0]), np.array([0.7]))
        assert abs(g[0] - math.cos(0.7)) < 1e-9

    def test_linear_fields_recover_coefficients(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            coeffs = rng.normal(size=3)
            q = rng.normal(size=3) * 2.0
            g = fd_gradient(lambda x: float(coeffs @ x), q, h=1e-5)
            assert np.max(np.abs(g - coeffs)) < 1e-9

    def test_analytic_gradient_preferred(self):
        marker = np.array([10.0, 20.0])
        f = ScalarField(eval=lambda q: 0.0, grad=lambda q: marker)
        assert np.all(fd_gradient(f, np.zeros(2)) == marker)

    def test_non_finite_raises(self):
        with pytest.raises(NumericFailure):
            fd_gradient(lambda q: float("inf"), np.array([0.0]))

    def test_check_gradient_flags_mismatch(self):
        bad = ScalarField(eval=lambda q: float(q[0] ** 2), grad=lambda q: np.array([1.0]))
        with pytest.raises(ValueError):
            check_gradient(bad, seeded_points(1, n=8))

    def test_check_gradient_accepts_consistent(self):
        good = ScalarField(eval=lambda q: float(q[0] ** 2), grad=lambda q: np.array([2.0 * q[0]]))
        assert check_gradient(good, seeded_points(1, n=8)) < 1e-8


def test_fd_jacobian_matches_hand_value():
    J = fd_jacobian(lambda q: np.array([q[0] * q[1], math.sin(q[1])]), np.array([2.0, 0.5]))
    expect = np.array([[0.5, 2.0], [0.0, math.cos(0.5)]])
    assert np.max(np.abs(J - expect)) < 1e-9


class TestCurve:
    def test_rejects_decreasing_times(self):
        with pytest.raises(ValueError):
            Curve(times=np.array([0.0, 0.0]), points=np.zeros((2, 1)))

    def test_rejects_length_mismatch(self):
        with pytest.raises(ValueError):
            Curve(times=np.array([0.0, 1.0]), points=np.zeros((3, 1)))


class TestRK4:
    def test_zero_field_constant(self):
        c = integrate_rk4(lambda t, x: np.zeros(2), np.array([1.0, 2.0]), 0.0, 1.0, 0.1)
        assert np.all(c.points == np.array([1.0, 2.0]))

    def test_exponential(self):
        c = integrate_rk4(lambda t, x: x, np.array([1.0]), 0.0, 1.0, 1e-3)
        assert abs(c.points[-1, 0] - math.e) < 1e-10

    def test_harmonic_oscillator_against_circle(self):
        # independent oracle: the analytic circle (cos t, -sin t)
        rhs = lambda t, x: np.array([x[1], -x[0]])
        c = integrate_rk4(rhs, np.array([1.0, 0.0]), 0.0, 10.0, 1e-3)
        energy = 0.5 * np.sum(c.points**2, axis=1)
        assert np.max(np.abs(energy - energy[0])) < 1e-9
        exact = np.column_stack([np.cos(c.times), -np.sin(c.times)])
        assert np.max(np.abs(c.points - exact)) < 1e-9

    def test_fourth_order_convergence(self):
        errs = []
        for dt in (1e-2, 5e-3, 2.5e-3):
            c = integrate_rk4(lambda t, x: x, np.array([1.0]), 0.0, 1.0, dt)
            errs.append(abs(c.points[-1, 0] - math.e))
        assert errs[0] / errs[1] >= 12.0
        assert errs[1] / errs[2] >= 12.0

    def test_deterministic_bitwise(self):
        rhs = lambda t, x: np.array([math.sin(x[0]) + t])
        a = integrate_rk4(rhs, np.array([0.3]), 0.0, 2.0, 1e-2)
        b = integrate_rk4(rhs, np.array([0.3]), 0.0, 2.0, 1e-2)
        assert np.array_equal(a.points, b.points) and np.array_equal(a.times, b.times)

    def test_partial_final_step_lands_on_t1(self):
        c = integrate_rk4(lambda t, x: x, np.array([1.0]), 0.0, 0.95, 0.1)
        assert c.times[-1] == 0.95
        assert np.allclose(np.diff(c.times)[:-1], 0.1)
        assert abs(c.points[-1, 0] - math.exp(0.95)) < 1e-5

    @pytest.mark.filterwarnings("ignore:overflow")
    def test_blowup_reports_last_good_time(self):
        # dx/dt = x^2 from x(0)=1 blows up at t=1
        with pytest.raises(NumericFailure) as err:
            integrate_rk4(lambda t, x: x**2, np.array([1.0]), 0.0, 2.0, 1e-3)
        assert err.value.last_good_time is not None
        assert 0.9 < err.value.last_good_time < 1.1

    def test_usage_errors(self):
        with pytest.raises(ValueError):
            integrate_rk4(lambda t, x: x, np.array([1.0]), 0.0, 1.0, -0.1)
        with pytest.raises(ValueError):
            integrate_rk4(lambda t, x: x, np.array([1.0]), 1.0, 0.0, 0.1)
