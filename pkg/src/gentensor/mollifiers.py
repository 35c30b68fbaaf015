"""Unit-integral bump profiles and their scaled, centered mollifier forms.

Profiles are separable: an n-dimensional shape is a product of per-axis 1-D
shapes supported in [-1, 1], so the support is the unit box and tensor
Gauss-Legendre rules inherit their 1-D accuracy.  Scaling by eps about a
center p gives the density eps^-n shape((q - p)/eps) on the box p +/- eps;
the unit integral is preserved exactly by the change of variables.

First and second moments are cached at construction; asymptotic experiments
use them to separate first-order from second-order convergence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import quadrature
from .distributions import NFormDensity
from .errors import SupportOverflowError, UnknownNameError
from .geometry import Chart, Point, SmoothMap, as_point


# ---------------------------------------------------------------------------
# 1-D building blocks
# ---------------------------------------------------------------------------


def _bump_raw(t: float) -> float:
    if abs(t) >= 1.0:
        return 0.0
    return math.exp(-1.0 / (1.0 - t * t))


def _bump_raw_d(t: float) -> float:
    if abs(t) >= 1.0:
        return 0.0
    u = 1.0 - t * t
    return _bump_raw(t) * (-2.0 * t) / (u * u)


def _poly4_raw(t: float) -> float:
    if abs(t) >= 1.0:
        return 0.0
    return (1.0 - t * t) ** 4


def _poly4_raw_d(t: float) -> float:
    if abs(t) >= 1.0:
        return 0.0
    return -8.0 * t * (1.0 - t * t) ** 3


def smooth_step(t: float) -> float:
    """C-infinity monotone step: 0 for t <= 0, 1 for t >= 1."""
    if t <= 0.0:
        return 0.0
    if t >= 1.0:
        return 1.0
    a = math.exp(-1.0 / t)
    b = math.exp(-1.0 / (1.0 - t))
    return a / (a + b)


def plateau(x: float, outer_lo: float, inner_lo: float,
            inner_hi: float, outer_hi: float) -> float:
    """C-infinity cutoff: 1 on [inner_lo, inner_hi], 0 outside [outer_lo, outer_hi]."""
    up = smooth_step((x - outer_lo) / (inner_lo - outer_lo))
    down = smooth_step((outer_hi - x) / (outer_hi - inner_hi))
    return up * down


@dataclass(frozen=True)
class _AxisShape:
    fn: Callable[[float], float]
    dfn: Callable[[float], float]
    norm: float          # integral of fn over [-1, 1]
    moment1: float       # first moment of fn / norm
    moment2: float       # second moment of fn / norm
    even: bool


def _make_axis(fn, dfn) -> _AxisShape:
    norm = quadrature.integrate_1d_reference(fn, -1.0, 1.0)
    m1 = quadrature.integrate_1d_reference(lambda t: t * fn(t), -1.0, 1.0) / norm
    m2 = quadrature.integrate_1d_reference(lambda t: t * t * fn(t), -1.0, 1.0) / norm
    return _AxisShape(fn, dfn, norm, m1, m2, even=abs(m1) < 1e-13)


def _moment_tilted_axis(base: _AxisShape, m1: float) -> _AxisShape:
    """Shape t -> base(t) (1 + a t) with a = m1 / m2 of the base.

    For an even base the tilt moves the first moment to exactly m1 while
    keeping the support, the normalization, and the second moment unchanged.
    Unlike translating-and-compressing the bump, this preserves the full
    smoothness scale, so Gauss-Legendre keeps its spectral accuracy (the
    density may go negative near the support edge, which unit-integral
    n-forms are free to do).
    """
    if not -1.0 < m1 < 1.0:
        raise ValueError("first moment must lie in (-1, 1)")
    if not base.even:
        raise ValueError("moment tilt needs an even base shape")
    a = m1 / base.moment2

    def fn(t, base=base, a=a):
        return base.fn(t) * (1.0 + a * t)

    def dfn(t, base=base, a=a):
        return base.dfn(t) * (1.0 + a * t) + base.fn(t) * a

    return _make_axis(fn, dfn)


# ---------------------------------------------------------------------------
# profiles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BumpProfile:
    """A normalized bump shape on the unit box with cached moment data."""

    name: str
    dim: int
    axes: tuple[_AxisShape, ...]
    symmetric: bool
    c_infinity: bool

    def __post_init__(self):
        if len(self.axes) != self.dim:
            raise ValueError("profile needs one axis shape per dimension")
        # Normalization sanity: the reference-rule integral of the
        # normalized shape must be 1 to well below 1e-10.
        for ax in self.axes:
            check = quadrature.integrate_1d_reference(ax.fn, -1.0, 1.0) / ax.norm
            if abs(check - 1.0) > 1e-12:
                raise ValueError(f"profile {self.name}: axis normalization off by "
                                 f"{abs(check - 1.0):.3e}")

    @property
    def normalization(self) -> float:
        out = 1.0
        for ax in self.axes:
            out *= ax.norm
        return out

    def shape(self, x: Point) -> float:
        """Normalized shape value (unit integral over the unit box)."""
        x = as_point(x)
        out = 1.0
        for k, ax in enumerate(self.axes):
            out *= ax.fn(x[k]) / ax.norm
        return out

    def shape_partial(self, x: Point, axis: int) -> float:
        x = as_point(x)
        out = 1.0
        for k, ax in enumerate(self.axes):
            factor = ax.dfn(x[k]) if k == axis else ax.fn(x[k])
            out *= factor / ax.norm
        return out

    @property
    def first_moment(self) -> np.ndarray:
        return np.array([ax.moment1 for ax in self.axes])

    @property
    def second_moment(self) -> np.ndarray:
        m1 = self.first_moment
        m2 = np.outer(m1, m1)
        for k, ax in enumerate(self.axes):
            m2[k, k] = ax.moment2
        return m2


def profile_catalog(name: str, dim: int = 1) -> BumpProfile:
    """Built-in profiles: ``bump_sym``, ``bump_shift:<m1>``, ``poly4``.

    ``bump_shift`` tilts the first axis so that the first moment along it is
    exactly the given value; remaining axes stay symmetric.  ``poly4`` is a
    polynomial bump, C^3 but not C-infinity at the support boundary, and is
    flagged accordingly via ``c_infinity``.
    """
    base = name.split(":", 1)[0]
    bump = _make_axis(_bump_raw, _bump_raw_d)
    if base == "bump_sym":
        return BumpProfile("bump_sym", dim, (bump,) * dim, symmetric=True, c_infinity=True)
    if base == "bump_shift":
        try:
            m1 = float(name.split(":", 1)[1])
        except (IndexError, ValueError):
            raise UnknownNameError(f"bump_shift needs a numeric first moment, got {name!r}")
        axes = (_moment_tilted_axis(bump, m1),) + (bump,) * (dim - 1)
        return BumpProfile(name, dim, axes, symmetric=False, c_infinity=True)
    if base == "poly4":
        axis = _make_axis(_poly4_raw, _poly4_raw_d)
        return BumpProfile("poly4", dim, (axis,) * dim, symmetric=True, c_infinity=False)
    raise UnknownNameError(f"unknown profile {name!r}")


# ---------------------------------------------------------------------------
# scaled mollifiers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScaledMollifier:
    """An eps-scaled, p-centered instance of a profile."""

    profile: BumpProfile
    center: np.ndarray
    eps: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        if self.eps <= 0.0:
            raise ValueError("eps must be positive")

    def density_at(self, q: Point) -> float:
        q = as_point(q)
        return self.profile.shape((q - self.center) / self.eps) / self.eps ** self.center.size


def make_mollifier(profile: BumpProfile, p: Point, eps: float, chart: Chart,
                   nodes: int | None = None) -> NFormDensity:
    """The n-form density of the scaled mollifier, supported on p +/- eps.

    Raises SupportOverflowError when the support box does not fit the chart.
    """
    p = as_point(p)
    if profile.dim != chart.dim:
        raise UnknownNameError(
            f"profile dimension {profile.dim} does not match chart dimension {chart.dim}")
    scaled = ScaledMollifier(profile, p, eps)
    lo, hi = p - eps, p + eps
    if not chart.contains_box(lo, hi):
        raise SupportOverflowError(
            f"mollifier support [{lo}, {hi}] exceeds the chart box")
    inv_scale = eps ** (-chart.dim)

    def fn(q, p=p, eps=eps, profile=profile, inv_scale=inv_scale):
        return inv_scale * profile.shape((as_point(q) - p) / eps)

    def partials(q, axis, p=p, eps=eps, profile=profile, inv_scale=inv_scale):
        return inv_scale / eps * profile.shape_partial((as_point(q) - p) / eps, axis)

    density = SmoothMap(fn, partials=partials, name=f"{profile.name}@eps={eps}")
    meta = {"profile": profile.name, "eps": eps, "center": [float(c) for c in p]}
    return NFormDensity(density, lo, hi, chart, nodes, meta)
