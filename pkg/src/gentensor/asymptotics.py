"""Scaling-rate estimation, association tests, and the two obstruction
demonstrators (non-multiplicative embedding, basis-dependent coordinate-wise
embedding).

Growth and decay verdicts are heuristic estimates of asymptotic order under
the mollifier scaling, with the transport slot held fixed per experiment.
They are never reported when the log-log fit is poor: a fit with r^2 below
the threshold is flagged inconclusive instead of being classified.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import quadrature
from .distributions import (NFormDensity, Regular, ScalarDistribution,
                            TensorDistribution, apply_scalar,
                            change_basis_representation, premultiplied,
                            scalar_distribution_field)
from .embedding import (BasicSpaceElement, embed_iota_distribution,
                        pointwise_product)
from .errors import TypeMismatchError
from .geometry import Chart, Point, SmoothMap, as_point
from .mollifiers import BumpProfile, make_mollifier
from .tensors import BasisChange, TensorAtPoint, zero_tensor
from .transport import TransportOperator

DEFAULT_BOUNDED_BAND = 0.25
DEFAULT_GROWTH_THRESHOLD = 0.75
DEFAULT_Q_MAX = 4
R2_THRESHOLD = 0.99
_ZERO_FLOOR = 1e-290


# ---------------------------------------------------------------------------
# log-log fits and verdicts
# ---------------------------------------------------------------------------


def fit_loglog(eps_grid: Sequence[float], values: Sequence[float]) -> tuple[float, float, float]:
    """Least-squares slope, intercept and r^2 of log(values) vs log(eps).

    Exactly constant data fits slope 0 with r^2 = 1; all-zero data returns
    slope +inf (decay below the floor at every eps).
    """
    eps = np.asarray(eps_grid, dtype=float)
    vals = np.asarray(values, dtype=float)
    if np.all(np.abs(vals) <= _ZERO_FLOOR):
        return math.inf, -math.inf, 1.0
    if np.any(vals <= 0.0):
        return math.nan, math.nan, 0.0
    x = np.log(eps)
    y = np.log(vals)
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 if ss_tot < 1e-28 else 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), r2


def classify_slope(slope: float, r_squared: float,
                   bounded_band: float = DEFAULT_BOUNDED_BAND,
                   growth_threshold: float = DEFAULT_GROWTH_THRESHOLD,
                   q_max: int = DEFAULT_Q_MAX) -> str:
    """Map a fitted slope to a verdict string.

    bounded              |slope| inside the bounded band
    power_growth(N)      slope <= -growth_threshold, N = round(-slope)
    decays_all_tested_orders(q_max)   slope >= q_max (or identically zero)
    decay_power(k)       positive slope below q_max
    inconclusive         poor fit or slope in the unclassified gap
    """
    if math.isinf(slope):
        return f"decays_all_tested_orders({q_max})"
    if math.isnan(slope) or r_squared < R2_THRESHOLD:
        return "inconclusive"
    if -bounded_band < slope < bounded_band:
        return "bounded"
    if slope <= -growth_threshold:
        return f"power_growth({round(-slope)})"
    if slope >= q_max:
        return f"decays_all_tested_orders({q_max})"
    if slope >= bounded_band:
        return f"decay_power({round(slope)})"
    return "inconclusive"


@dataclass(frozen=True)
class ScalingReport:
    """Sup-norm samples over a decreasing eps grid with a fitted rate."""

    eps_grid: tuple[float, ...]
    norms: tuple[float, ...]
    fitted_slope: float
    r_squared: float
    verdict: str
    grid_norms: tuple[float, ...] | None = None
    thresholds: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.eps_grid) < 4:
            raise ValueError("need at least 4 eps samples for a rate estimate")
        if not all(a > b > 0.0 for a, b in zip(self.eps_grid, self.eps_grid[1:])):
            raise ValueError("eps grid must be strictly decreasing and positive")

    def to_dict(self) -> dict:
        return {
            "eps_grid": list(self.eps_grid),
            "norms": list(self.norms),
            "fitted_slope": None if not math.isfinite(self.fitted_slope) else self.fitted_slope,
            "r_squared": self.r_squared,
            "verdict": self.verdict,
            "grid_norms": None if self.grid_norms is None else list(self.grid_norms),
            "thresholds": dict(self.thresholds),
        }


def _report(eps_grid, norms, grid_norms=None, bounded_band=DEFAULT_BOUNDED_BAND,
            growth_threshold=DEFAULT_GROWTH_THRESHOLD, q_max=DEFAULT_Q_MAX) -> ScalingReport:
    norms = tuple(float(v) for v in norms)
    if len(set(norms)) == 1 and norms[0] > _ZERO_FLOOR:
        # exactly eps-independent samples: slope 0 by definition
        slope, r2 = 0.0, 1.0
    else:
        slope, _, r2 = fit_loglog(eps_grid, norms)
    verdict = classify_slope(slope, r2, bounded_band, growth_threshold, q_max)
    return ScalingReport(tuple(float(e) for e in eps_grid), norms, slope, r2, verdict,
                         grid_norms,
                         {"bounded_band": bounded_band,
                          "growth_threshold": growth_threshold, "q_max": q_max})


# ---------------------------------------------------------------------------
# scaling estimate
# ---------------------------------------------------------------------------


def scaling_estimate(t: BasicSpaceElement, p: Point, transport: TransportOperator,
                     profile: BumpProfile, eps_grid: Sequence[float], chart: Chart,
                     nodes: int | None = None,
                     p_grid: Sequence[Point] | None = None,
                     bounded_band: float = DEFAULT_BOUNDED_BAND,
                     growth_threshold: float = DEFAULT_GROWTH_THRESHOLD,
                     q_max: int = DEFAULT_Q_MAX) -> ScalingReport:
    """Sample ||t(omega_{eps,p}, p, A)||_inf over the eps grid and fit the
    log-log rate.  With p_grid given, also report the sup over those points.
    """
    p = as_point(p)
    norms = []
    grid_norms = [] if p_grid is not None else None
    for eps in eps_grid:
        omega = make_mollifier(profile, p, eps, chart, nodes)
        norms.append(t(omega, p, transport).norm_inf())
        if p_grid is not None:
            worst = 0.0
            for pp in p_grid:
                om = make_mollifier(profile, as_point(pp), eps, chart, nodes)
                worst = max(worst, t(om, as_point(pp), transport).norm_inf())
            grid_norms.append(worst)
    return _report(eps_grid, norms,
                   None if grid_norms is None else tuple(grid_norms),
                   bounded_band, growth_threshold, q_max)


# ---------------------------------------------------------------------------
# non-multiplicativity demonstrator
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CommutatorResult:
    """Pointwise and weak gaps of iota(f) iota(u) - iota(f u)."""

    pointwise_gap: float
    weak_gaps: tuple[float, ...]
    weak_slope: float
    weak_r_squared: float
    eps_grid: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "pointwise_gap": self.pointwise_gap,
            "weak_gaps": list(self.weak_gaps),
            "weak_slope": None if not math.isfinite(self.weak_slope) else self.weak_slope,
            "weak_r_squared": self.weak_r_squared,
            "eps_grid": list(self.eps_grid),
        }


def schwartz_commutator(f: SmoothMap, u: ScalarDistribution, p: Point,
                        transport: TransportOperator, profile: BumpProfile,
                        eps_grid: Sequence[float], test_density: NFormDensity,
                        chart: Chart, nodes: int | None = None) -> CommutatorResult:
    """Measure how far the distributional embedding is from being
    multiplicative over smooth functions.

    The gap element is iota(f) iota(u) - iota(f u), with f u formed on the
    variant structure (f folded as a premultiplier).  The pointwise gap is
    its value at (omega_{eps_max, p}, p, A); the weak gaps integrate the gap
    at (omega_{eps, pp}, pp, A) against the fixed test density over pp, one
    value per eps.
    """
    dim = chart.dim
    t_f = embed_iota_distribution(scalar_distribution_field(Regular(f), dim))
    t_u = embed_iota_distribution(scalar_distribution_field(u, dim))
    t_fu = embed_iota_distribution(
        scalar_distribution_field(premultiplied(f, u), dim))
    gap = pointwise_product(t_f, t_u) - t_fu

    eps_max = max(eps_grid)
    omega0 = make_mollifier(profile, p, eps_max, chart, nodes)
    pointwise = gap(omega0, p, transport).item()

    weak = []
    for eps in eps_grid:
        # the gap concentrates on an eps-neighborhood in pp, so the outer
        # integral needs an eps-resolving composite rule
        points, weights = quadrature.composite_box_rule(
            test_density.support_lo, test_density.support_hi, eps)
        acc = 0.0
        for pp, w in zip(points, weights):
            om = make_mollifier(profile, pp, eps, chart, nodes)
            acc += w * gap(om, pp, transport).item() * test_density(pp)
        weak.append(acc)
    slope, _, r2 = fit_loglog(eps_grid, np.abs(weak))
    return CommutatorResult(float(pointwise), tuple(float(w) for w in weak),
                            slope, r2, tuple(float(e) for e in eps_grid))


# ---------------------------------------------------------------------------
# basis dependence demonstrator
# ---------------------------------------------------------------------------


def basis_dependence(u: TensorDistribution, bc: BasisChange, omega: NFormDensity,
                     p: Point, transport: TransportOperator,
                     via_transport: bool = False) -> TensorAtPoint:
    """Difference of embedding u coordinate-wise in the given basis versus in
    the basis changed by bc.

    With via_transport=False each scalar coefficient is embedded on its own
    (the value u^i(omega) times the basis field at p, no transport slot); the
    result depends on the chosen basis.  With via_transport=True both
    representations go through the transport-based distributional embedding,
    whose pairing never decomposes u into a basis, and the difference is zero
    up to roundoff.
    """
    p = as_point(p)
    u_hat = change_basis_representation(u, bc)
    if via_transport:
        left = embed_iota_distribution(u)(omega, p, transport)
        right = embed_iota_distribution(u_hat)(omega, p, transport)
        return left - right

    def coordinatewise(dist: TensorDistribution) -> TensorAtPoint:
        total = zero_tensor(dist.ttype, p)
        for ui, ei in dist.terms:
            total = total + apply_scalar(ui, omega) * ei.value(p)
        return total

    return coordinatewise(u) - coordinatewise(u_hat)


# ---------------------------------------------------------------------------
# association
# ---------------------------------------------------------------------------


def association_test(t1: BasicSpaceElement, t2: BasicSpaceElement,
                     test_density: NFormDensity, profile: BumpProfile,
                     transport: TransportOperator, eps_grid: Sequence[float],
                     chart: Chart, nodes: int | None = None,
                     q_max: int = DEFAULT_Q_MAX) -> ScalingReport:
    """Decay of the weak difference between two elements:

        w(eps) = sup_K | integral of (t1 - t2)(omega_{eps,pp}, pp, A)_K
                                     psi(pp) dpp |

    reported as a scaling fit over the eps grid."""
    if t1.ttype != t2.ttype:
        raise TypeMismatchError("association test requires elements of equal type")
    diff = t1 - t2
    shape = (t1.dim,) * t1.ttype.rank
    values = []
    for eps in eps_grid:
        points, weights = quadrature.composite_box_rule(
            test_density.support_lo, test_density.support_hi, eps)
        acc = np.zeros(shape) if shape else 0.0
        for pp, w in zip(points, weights):
            om = make_mollifier(profile, pp, eps, chart, nodes)
            acc = acc + (w * test_density(pp)) * diff(om, pp, transport).components
        values.append(float(np.max(np.abs(acc))) if shape else abs(float(acc)))
    return _report(eps_grid, values, q_max=q_max)
