"""Box charts, points, smooth maps, diffeomorphisms, and vector-field flows.

The manifold is described by one global axis-aligned box chart (a second
chart enters only through a diffeomorphism between two boxes).  Points are
plain float arrays of length ``chart.dim``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainExitError

Point = np.ndarray


def as_point(x) -> Point:
    p = np.atleast_1d(np.asarray(x, dtype=float))
    if p.ndim != 1:
        raise ValueError(f"a point must be a flat coordinate vector, got shape {p.shape}")
    return p


# ---------------------------------------------------------------------------
# finite differences
# ---------------------------------------------------------------------------

# Central-difference steps per derivative order, balancing truncation against
# roundoff for O(h^2) stencils.
_FD_STEPS = {1: 1e-5, 2: 1e-4, 3: 8e-4}


def fd_partial(fn: Callable[[Point], float], p: Point, axis: int, order: int = 1,
               step: float | None = None) -> float:
    """Central finite-difference partial of given order along one axis."""
    if order == 0:
        return fn(p)
    if order not in _FD_STEPS:
        raise ValueError(f"unsupported derivative order {order}")
    h = (step if step is not None else _FD_STEPS[order]) * max(1.0, abs(p[axis]))

    def shift(k: float) -> float:
        q = p.copy()
        q[axis] += k * h
        return fn(q)

    if order == 1:
        return (shift(1) - shift(-1)) / (2 * h)
    if order == 2:
        return (shift(1) - 2 * fn(p) + shift(-1)) / (h * h)
    return (shift(2) - 2 * shift(1) + 2 * shift(-1) - shift(-2)) / (2 * h ** 3)


# Central product stencils per axis order: (offset, coefficient) pairs; the
# coefficient divisor h^order is applied per axis.
_STENCILS = {
    0: ((0, 1.0),),
    1: ((-1, -0.5), (1, 0.5)),
    2: ((-1, 1.0), (0, -2.0), (1, 1.0)),
    3: ((-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)),
}


def fd_mixed(fn: Callable[[Point], float], p: Point, alpha: Sequence[int]) -> float:
    """Mixed partial d^alpha fn(p) from one tensor-product central stencil.

    A single step size keyed to the total order balances truncation against
    the roundoff amplification eps / h^|alpha| (nesting one-axis stencils
    would let the inner noise blow up through the outer difference).
    """
    alpha = tuple(int(a) for a in alpha)
    total = sum(alpha)
    if total == 0:
        return fn(as_point(p))
    if any(a < 0 or a > 3 for a in alpha) or total > 3:
        raise ValueError(f"unsupported mixed order {alpha}")
    p = as_point(p)
    h = _FD_STEPS[total]
    steps = [h * max(1.0, abs(p[k])) for k in range(p.size)]
    total_val = 0.0
    axis_stencils = [_STENCILS[a] for a in alpha]
    for combo in itertools.product(*axis_stencils):
        q = p.copy()
        coeff = 1.0
        for k, (offset, c) in enumerate(combo):
            q[k] += offset * steps[k]
            coeff *= c / steps[k] ** alpha[k] if alpha[k] else c
        total_val += coeff * fn(q)
    return total_val


def fd_jacobian(fn: Callable[[Point], Point], p: Point, step: float = 1e-6) -> np.ndarray:
    """Jacobian of a vector map by central differences."""
    p = as_point(p)
    n = p.size
    f0 = as_point(fn(p))
    jac = np.empty((f0.size, n))
    for k in range(n):
        h = step * max(1.0, abs(p[k]))
        qp, qm = p.copy(), p.copy()
        qp[k] += h
        qm[k] -= h
        jac[:, k] = (as_point(fn(qp)) - as_point(fn(qm))) / (2 * h)
    return jac


# ---------------------------------------------------------------------------
# chart
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Chart:
    """An axis-aligned box chart in dimension 1, 2 or 3."""

    dim: int
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lo", as_point(self.lo))
        object.__setattr__(self, "hi", as_point(self.hi))
        if self.dim not in (1, 2, 3):
            raise ValueError(f"chart dimension must be 1, 2 or 3, got {self.dim}")
        if self.lo.size != self.dim or self.hi.size != self.dim:
            raise ValueError("chart corners must match the chart dimension")
        if not np.all(self.lo < self.hi):
            raise ValueError("chart box is empty (need lo < hi componentwise)")

    def contains(self, p: Point, margin: float = 0.0) -> bool:
        p = as_point(p)
        return bool(np.all(p >= self.lo - margin) and np.all(p <= self.hi + margin))

    def contains_box(self, lo, hi) -> bool:
        return bool(np.all(as_point(lo) >= self.lo) and np.all(as_point(hi) <= self.hi))

    def require_inside(self, p: Point, what: str = "point") -> Point:
        p = as_point(p)
        if not self.contains(p):
            raise DomainExitError(f"{what} {p} left the chart box [{self.lo}, {self.hi}]")
        return p

    def shrink(self, factor: float) -> tuple[np.ndarray, np.ndarray]:
        """Inner box with half-widths scaled by factor about the center."""
        c = 0.5 * (self.lo + self.hi)
        h = 0.5 * (self.hi - self.lo) * factor
        return c - h, c + h

    def grid(self, per_axis: int = 10) -> np.ndarray:
        """Uniform sample grid of shape (per_axis^dim, dim), strictly inside."""
        axes = [np.linspace(self.lo[k], self.hi[k], per_axis + 2)[1:-1] for k in range(self.dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)


# ---------------------------------------------------------------------------
# smooth scalar maps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SmoothMap:
    """A scalar function on the chart, with optional closed-form partials.

    Derivative queries fall back to second-order central differences with
    ``fd_step`` scaled by the coordinate magnitude.
    """

    fn: Callable[[Point], float]
    partials: Callable[[Point, int], float] | None = None
    fd_step: float = 1e-5
    name: str = ""

    def __call__(self, p: Point) -> float:
        return float(self.fn(as_point(p)))

    def derivative(self, p: Point, axis: int) -> float:
        p = as_point(p)
        if self.partials is not None:
            return float(self.partials(p, axis))
        return fd_partial(self.fn, p, axis, order=1, step=self.fd_step)


def smooth_const(c: float, name: str = "") -> SmoothMap:
    return SmoothMap(lambda p, c=float(c): c, partials=lambda p, a: 0.0,
                     name=name or f"const({c})")


def smooth_product(f: SmoothMap, g: SmoothMap) -> SmoothMap:
    """Pointwise product; product-rule partials when both factors have them."""
    partials = None
    if f.partials is not None and g.partials is not None:
        def partials(p, a, f=f, g=g):
            return f.derivative(p, a) * g(p) + f(p) * g.derivative(p, a)
    return SmoothMap(lambda p: f(p) * g(p), partials=partials,
                     name=f"({f.name})*({g.name})" if f.name and g.name else "")


def smooth_directional(vf: "VectorFieldFlow", g: SmoothMap) -> SmoothMap:
    """The derivative of g along the vector field, X(g) = sum_k X^k d_k g."""

    def fn(p, vf=vf, g=g):
        x = vf.value(p)
        return float(sum(x[k] * g.derivative(p, k) for k in range(len(x))))

    return SmoothMap(fn, name=f"X({g.name})" if g.name else "")


# ---------------------------------------------------------------------------
# diffeomorphisms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Diffeo:
    """A diffeomorphism between two box charts, with closed-form pieces.

    ``jacobian`` is the Jacobian of ``forward``; when omitted, derivative
    queries use central differences.
    """

    forward: Callable[[Point], Point]
    inverse: Callable[[Point], Point]
    jacobian: Callable[[Point], np.ndarray] | None = None
    name: str = ""

    def __call__(self, p: Point) -> Point:
        return as_point(self.forward(as_point(p)))

    def inv(self, q: Point) -> Point:
        return as_point(self.inverse(as_point(q)))

    def jac(self, p: Point) -> np.ndarray:
        p = as_point(p)
        if self.jacobian is not None:
            return np.asarray(self.jacobian(p), dtype=float)
        return fd_jacobian(self.forward, p)

    def jac_inv(self, p: Point) -> np.ndarray:
        return np.linalg.inv(self.jac(p))

    def inverted(self) -> "Diffeo":
        def jac_of_inverse(q, self=self):
            return np.linalg.inv(self.jac(self.inv(q)))

        return Diffeo(self.inverse, self.forward, jac_of_inverse,
                      name=f"{self.name}^-1" if self.name else "")

    def validate(self, chart: Chart, tol: float = 1e-10, per_axis: int = 10) -> float:
        """Max round-trip defect over a sample grid; raises if above tol or if
        the Jacobian is singular anywhere on the grid."""
        worst = 0.0
        for p in chart.grid(per_axis):
            back = self.inv(self(p))
            worst = max(worst, float(np.max(np.abs(back - p))))
            if abs(np.linalg.det(self.jac(p))) < 1e-12:
                raise ValueError(f"{self.name or 'diffeo'}: singular Jacobian at {p}")
        if worst > tol:
            raise ValueError(
                f"{self.name or 'diffeo'}: round-trip defect {worst:.3e} exceeds {tol:.3e}")
        return worst


def jacobian_at(mu: Diffeo, p: Point) -> np.ndarray:
    """Jacobian matrix of the forward map at p."""
    return mu.jac(p)


def compose_diffeos(mu: Diffeo, nu: Diffeo) -> Diffeo:
    """The composition mu o nu (apply nu first)."""

    def jac(p, mu=mu, nu=nu):
        return mu.jac(nu(p)) @ nu.jac(p)

    return Diffeo(lambda p: mu(nu(p)), lambda q: nu.inv(mu.inv(q)), jac,
                  name=f"{mu.name}o{nu.name}")


def identity_diffeo(dim: int) -> Diffeo:
    eye = np.eye(dim)
    return Diffeo(lambda p: p, lambda q: q, lambda p: eye, name="identity")


# ---------------------------------------------------------------------------
# vector fields and flows
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VectorFieldFlow:
    """A vector field on the chart together with its flow integrator.

    The flow uses the classical fixed-step fourth-order one-step scheme with
    maximum step ``h_flow``; the time-tau map is deterministic for fixed step
    control, is the identity exactly at tau = 0, and inverts to O(h_flow^4)
    under time reversal.
    """

    components: tuple[Callable[[Point], float], ...]
    chart: Chart
    partials: Callable[[Point, int, int], float] | None = None  # (p, comp, axis)
    h_flow: float = 1e-3
    name: str = ""

    def __post_init__(self):
        if len(self.components) != self.chart.dim:
            raise ValueError("vector field needs one component per chart axis")

    def value(self, p: Point) -> np.ndarray:
        p = as_point(p)
        return np.array([float(c(p)) for c in self.components])

    def d_matrix(self, p: Point) -> np.ndarray:
        """DX[i, j] = d_j X^i, closed-form when available."""
        p = as_point(p)
        n = self.chart.dim
        out = np.empty((n, n))
        for i in range(n):
            for j in range(n):
                if self.partials is not None:
                    out[i, j] = float(self.partials(p, i, j))
                else:
                    out[i, j] = fd_partial(self.components[i], p, j)
        return out

    def scaled(self, factor: float) -> "VectorFieldFlow":
        comps = tuple((lambda p, c=c: factor * c(p)) for c in self.components)
        partials = None
        if self.partials is not None:
            def partials(p, i, j, base=self.partials):
                return factor * base(p, i, j)
        return VectorFieldFlow(comps, self.chart, partials, self.h_flow,
                               name=f"{factor}*{self.name}")


def flow(vf: VectorFieldFlow, tau: float, p: Point) -> Point:
    """Time-tau flow of the field starting at p.

    Raises DomainExitError if any substep (including internal stages) leaves
    the chart box.
    """
    y, _ = _integrate_flow(vf, tau, p, with_jacobian=False)
    return y


def flow_with_jacobian(vf: VectorFieldFlow, tau: float, p: Point) -> tuple[Point, np.ndarray]:
    """Flow point and the Jacobian of the flow map, via the variational system."""
    return _integrate_flow(vf, tau, p, with_jacobian=True)


def _integrate_flow(vf, tau, p, with_jacobian):
    p = vf.chart.require_inside(as_point(p), "flow start")
    n = p.size
    jac = np.eye(n)
    if tau == 0.0:
        return p.copy(), jac
    steps = max(1, math.ceil(abs(tau) / vf.h_flow))
    h = tau / steps
    y = p.copy()

    def rhs(state):
        yv = state[:n]
        vf.chart.require_inside(yv, "flow stage")
        dy = vf.value(yv)
        if with_jacobian:
            dj = vf.d_matrix(yv) @ state[n:].reshape(n, n)
            return np.concatenate([dy, dj.ravel()])
        return dy

    state = np.concatenate([y, jac.ravel()]) if with_jacobian else y
    for _ in range(steps):
        k1 = rhs(state)
        k2 = rhs(state + 0.5 * h * k1)
        k3 = rhs(state + 0.5 * h * k2)
        k4 = rhs(state + h * k3)
        state = state + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        vf.chart.require_inside(state[:n], "flow step")
    if with_jacobian:
        return state[:n], state[n:].reshape(n, n)
    return state, np.eye(n)


def flow_diffeo(vf: VectorFieldFlow, tau: float) -> Diffeo:
    """The time-tau flow map as a diffeomorphism of the chart."""

    def jac(p, vf=vf, tau=tau):
        return flow_with_jacobian(vf, tau, p)[1]

    return Diffeo(lambda p: flow(vf, tau, p), lambda q: flow(vf, -tau, q), jac,
                  name=f"flow({vf.name},{tau})")
