import math

import numpy as np
import pytest
from scipy.integrate import quad

from gentensor import quadrature
from gentensor.errors import QuadratureBudgetError


def bump(t):
    return math.exp(-1.0 / (1.0 - t * t)) if abs(t) < 1.0 else 0.0


def test_box_rule_matches_scipy_on_bump():
    ref, _ = quad(bump, -1, 1, epsabs=1e-14, epsrel=1e-14, limit=200)
    val = quadrature.integrate(lambda p: bump(p[0]), [-1.0], [1.0], nodes=64)
    assert abs(val - ref) < 1e-11


def test_polynomial_is_exact():
    # GL with m nodes integrates degree 2m-1 exactly
    val = quadrature.integrate(lambda p: p[0] ** 7 - 3 * p[0] ** 2 + 1, [-1.0], [2.0], nodes=8)
    exact = (2.0 ** 8 - 1.0) / 8 - (2.0 ** 3 + 1.0) + 3.0
    assert abs(val - exact) < 1e-12


def test_2d_separable():
    val = quadrature.integrate(lambda p: bump(p[0]) * bump(p[1]),
                               [-1.0, -1.0], [1.0, 1.0], nodes=64)
    ref, _ = quad(bump, -1, 1, epsabs=1e-14, epsrel=1e-14, limit=200)
    assert abs(val - ref ** 2) < 1e-10


def test_vectorized_path_agrees():
    def fn(p):
        return math.sin(p[0]) + p[0] ** 2

    def fn_vec(points):
        return np.sin(points[:, 0]) + points[:, 0] ** 2

    a = quadrature.integrate(fn, [0.0], [1.5], nodes=32)
    b = quadrature.integrate(fn_vec, [0.0], [1.5], nodes=32, vectorized=True)
    assert abs(a - b) < 1e-14


def test_doubling_check_warns_when_underresolved():
    # 4 nodes cannot integrate a narrow bump accurately (8 nodes see it)
    spike = lambda p: bump(p[0] / 0.3) / 0.3
    with pytest.warns(RuntimeWarning):
        quadrature.integrate(spike, [-1.0], [1.0], nodes=4, doubling_check=True)


def test_doubling_check_quiet_when_resolved():
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        quadrature.integrate(lambda p: bump(p[0]), [-1.0], [1.0], nodes=64,
                             doubling_check=True)


def test_budget_error():
    with pytest.raises(QuadratureBudgetError):
        quadrature.box_rule([-1.0, -1.0, -1.0], [1.0, 1.0, 1.0], 2048)


def test_composite_rule_resolves_spike():
    eps = 0.01
    spike = lambda p: bump((p[0] - 0.3) / eps) / eps
    ref, _ = quad(lambda t: bump(t / eps) / eps, -eps, eps,
                  epsabs=1e-14, epsrel=1e-14, limit=400)
    pts, wts = quadrature.composite_box_rule([-1.0], [1.0], eps)
    val = float(np.dot(wts, [spike(p) for p in pts]))
    assert abs(val - ref) < 1e-7


def test_default_nodes_by_dim():
    assert quadrature.default_nodes(1) == 64
    assert quadrature.default_nodes(2) == 64
    assert quadrature.default_nodes(3) == 24
