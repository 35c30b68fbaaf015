import math

import numpy as np
import pytest

from gentensor import Chart, Diffeo, SmoothMap, VectorFieldFlow, flow, jacobian_at
from gentensor.errors import DomainExitError
from gentensor.geometry import (compose_diffeos, fd_jacobian, fd_mixed,
                                fd_partial, flow_diffeo, flow_with_jacobian)


def unit_x(chart):
    return VectorFieldFlow((lambda p: 1.0,), chart, partials=lambda p, i, j: 0.0,
                           name="unit_x")


def linear_x(chart):
    return VectorFieldFlow((lambda p: float(p[0]),), chart,
                           partials=lambda p, i, j: 1.0, name="linear_x")


class TestChart:
    def test_validation(self):
        with pytest.raises(ValueError):
            Chart(4, [0.0] * 4, [1.0] * 4)
        with pytest.raises(ValueError):
            Chart(1, [1.0], [0.0])
        with pytest.raises(ValueError):
            Chart(2, [0.0], [1.0])

    def test_contains(self, chart1):
        assert chart1.contains(np.array([1.5]))
        assert not chart1.contains(np.array([2.5]))
        with pytest.raises(DomainExitError):
            chart1.require_inside(np.array([3.0]))

    def test_grid_inside(self, chart2):
        grid = chart2.grid(5)
        assert grid.shape == (25, 2)
        assert all(chart2.contains(p) for p in grid)


class TestFlow:
    def test_constant_field_translates(self, chart1):
        # constant field: exact translation
        p = flow(unit_x(chart1), 1.0, np.array([0.0]))
        assert abs(p[0] - 1.0) < 1e-12

    def test_zero_time_is_identity(self, chart1):
        vf = linear_x(chart1)
        p0 = np.array([0.7])
        assert np.array_equal(flow(vf, 0.0, p0), p0)

    def test_exponential_oracle(self, chart1):
        # x d_x flows to x e^tau; closed-form solution as oracle
        p = flow(linear_x(chart1), 0.1, np.array([1.0]))
        assert abs(p[0] - math.exp(0.1)) < 1e-8

    def test_group_property(self, chart1):
        vf = linear_x(chart1)
        p0 = np.array([0.5])
        direct = flow(vf, 0.3, p0)
        stacked = flow(vf, 0.2, flow(vf, 0.1, p0))
        assert np.max(np.abs(direct - stacked)) < 1e-10  # O(h_flow^4)

    def test_reversal(self, chart1):
        vf = linear_x(chart1)
        p0 = np.array([0.8])
        back = flow(vf, -0.2, flow(vf, 0.2, p0))
        assert np.max(np.abs(back - p0)) < 1e-10

    def test_domain_exit(self, chart1):
        with pytest.raises(DomainExitError):
            flow(unit_x(chart1), 1.0, np.array([1.5]))

    def test_variational_jacobian(self, chart1):
        # d flow/dx for x d_x is e^tau
        _, jac = flow_with_jacobian(linear_x(chart1), 0.2, np.array([0.5]))
        assert abs(jac[0, 0] - math.exp(0.2)) < 1e-9

    def test_flow_diffeo_roundtrip(self, chart1):
        mu = flow_diffeo(linear_x(chart1), 0.15)
        p = np.array([0.4])
        assert np.max(np.abs(mu.inv(mu(p)) - p)) < 1e-10


class TestJacobian:
    def test_linear_scaling(self):
        mu = Diffeo(lambda p: 2 * p, lambda q: q / 2, lambda p: np.array([[2.0]]))
        assert np.allclose(jacobian_at(mu, np.array([0.7])), [[2.0]])

    def test_identity(self):
        mu = Diffeo(lambda p: p, lambda q: q, None)
        assert np.allclose(jacobian_at(mu, np.array([0.3, -0.2])), np.eye(2), atol=1e-9)

    def test_hand_differentiated(self):
        # (x, y) -> (x + y^2, y) has Jacobian [[1, 2y], [0, 1]]
        mu = Diffeo(lambda p: np.array([p[0] + p[1] ** 2, p[1]]),
                    lambda q: np.array([q[0] - q[1] ** 2, q[1]]))
        jac = jacobian_at(mu, np.array([0.0, 1.0]))
        assert np.allclose(jac, [[1.0, 2.0], [0.0, 1.0]], atol=1e-8)
        # cross-check the closed form against finite differences
        fd = fd_jacobian(mu.forward, np.array([0.0, 1.0]))
        assert np.allclose(jac, fd, atol=1e-8)


class TestDiffeo:
    def test_roundtrip_invariant(self, chart1):
        mu = Diffeo(lambda p: np.sinh(p), lambda q: np.arcsinh(q),
                    lambda p: np.array([[math.cosh(p[0])]]), name="sinh")
        assert mu.validate(chart1, tol=1e-10) < 1e-10

    def test_bad_inverse_caught(self, chart1):
        broken = Diffeo(lambda p: 2 * p, lambda q: q / 2.01, lambda p: np.array([[2.0]]))
        with pytest.raises(ValueError):
            broken.validate(chart1, tol=1e-10)

    def test_composition(self, chart1):
        two = Diffeo(lambda p: 2 * p, lambda q: q / 2, lambda p: np.array([[2.0]]))
        three = Diffeo(lambda p: 3 * p, lambda q: q / 3, lambda p: np.array([[3.0]]))
        both = compose_diffeos(two, three)
        p = np.array([0.2])
        assert abs(both(p)[0] - 6 * p[0]) < 1e-14
        assert abs(both.jac(p)[0, 0] - 6.0) < 1e-14


class TestSmoothMap:
    def test_closed_form_vs_fd(self):
        # second-order central differences: O(fd_step^2) agreement
        m = SmoothMap(lambda p: math.sin(p[0]) * p[1],
                      partials=lambda p, a: math.cos(p[0]) * p[1] if a == 0 else math.sin(p[0]))
        bare = SmoothMap(m.fn)
        p = np.array([0.4, 1.3])
        for axis in range(2):
            assert abs(m.derivative(p, axis) - bare.derivative(p, axis)) < 1e-9

    def test_fd_orders(self):
        fn = lambda p: math.exp(2 * p[0])
        p = np.array([0.1])
        expected = [2, 4, 8]  # d^k e^{2x} = 2^k e^{2x}
        for order, factor in zip((1, 2, 3), expected):
            got = fd_partial(fn, p, 0, order=order)
            assert abs(got - factor * math.exp(0.2)) < 1e-5 * factor

    def test_fd_mixed(self):
        fn = lambda p: p[0] ** 2 * p[1] ** 3
        p = np.array([1.5, 0.7])
        got = fd_mixed(fn, p, (1, 2))  # d_x d_y^2 -> 2x * 6y
        assert abs(got - 2 * p[0] * 6 * p[1]) < 1e-5
