"""Scalar and tensor distributions acting on compactly supported n-forms.

A scalar distribution is a functional on n-form densities; the variants are
a regular (continuous) density, a point mass, a derivative of a point mass
of order at most three, and finite linear combinations with optional smooth
premultipliers.  A tensor distribution is a finite sum of scalar
distributions times smooth tensor basis fields, acting on arguments
``tt (x) omega`` through the pointwise full contraction.

Point-mass conventions are chart-dependent: ``Dirac(x0)`` applied to a
density phi returns phi(x0), and a derivative of order alpha returns
(-1)^|alpha| d^alpha phi(x0).  Smooth premultipliers are never expanded;
they are folded into the test density at application time, which keeps
point-mass evaluations exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import quadrature
from .errors import SupportOverflowError, TypeMismatchError
from .geometry import (Chart, Point, SmoothMap, VectorFieldFlow, as_point,
                       fd_mixed, smooth_directional, smooth_product)
from .tensors import (SmoothTensorField, TensorType, contraction_scalar_map,
                      scalar_field_one)

MAX_DELTA_ORDER = 3


# ---------------------------------------------------------------------------
# n-form densities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NFormDensity:
    """A compactly supported n-form in chart coordinates, omega = phi dx.

    ``density`` is the chart density phi; it must vanish outside the support
    box.  ``nodes`` fixes the per-axis quadrature resolution used whenever
    this form is integrated against (None picks the dimension default).
    """

    density: SmoothMap
    support_lo: np.ndarray
    support_hi: np.ndarray
    chart: Chart
    nodes: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "support_lo", as_point(self.support_lo))
        object.__setattr__(self, "support_hi", as_point(self.support_hi))
        if not self.chart.contains_box(self.support_lo, self.support_hi):
            raise SupportOverflowError(
                f"support box [{self.support_lo}, {self.support_hi}] exceeds the chart")

    @property
    def dim(self) -> int:
        return self.chart.dim

    def __call__(self, q: Point) -> float:
        return self.density(q)

    def in_support(self, q: Point) -> bool:
        q = as_point(q)
        return bool(np.all(q >= self.support_lo) and np.all(q <= self.support_hi))

    def quad_nodes(self) -> int:
        return self.nodes if self.nodes is not None else quadrature.default_nodes(self.dim)

    def integral(self, doubling_check: bool = False) -> float:
        return quadrature.integrate(self.density, self.support_lo, self.support_hi,
                                    self.quad_nodes(), doubling_check=doubling_check)

    def boundary_max(self, per_face: int = 7) -> float:
        """Largest |density| sampled on the faces of the support box."""
        worst = 0.0
        for axis in range(self.dim):
            for bound in (self.support_lo[axis], self.support_hi[axis]):
                others = [np.linspace(self.support_lo[k], self.support_hi[k], per_face)
                          for k in range(self.dim)]
                others[axis] = np.array([bound])
                mesh = np.meshgrid(*others, indexing="ij")
                for q in np.stack([m.ravel() for m in mesh], axis=-1):
                    worst = max(worst, abs(self.density(q)))
        return worst

    def scaled_by(self, g: SmoothMap) -> "NFormDensity":
        """The density g * phi on the same support (premultiplier folding)."""
        return NFormDensity(smooth_product(g, self.density), self.support_lo,
                            self.support_hi, self.chart, self.nodes, dict(self.meta))


# ---------------------------------------------------------------------------
# scalar distributions
# ---------------------------------------------------------------------------


class ScalarDistribution:
    """Base class; concrete variants implement ``_apply``."""

    def apply(self, nu: NFormDensity) -> float:
        return self._apply(nu)

    def _apply(self, nu: NFormDensity) -> float:  # pragma: no cover
        raise NotImplementedError

    def __mul__(self, a: float):
        return Combination(((float(a), None, self),))

    __rmul__ = __mul__

    def __add__(self, other: "ScalarDistribution"):
        return Combination(((1.0, None, self), (1.0, None, other)))

    def __sub__(self, other: "ScalarDistribution"):
        return Combination(((1.0, None, self), (-1.0, None, other)))


@dataclass(frozen=True)
class Regular(ScalarDistribution):
    """The regular distribution of a continuous function g: omega -> int g phi."""

    g: SmoothMap

    def _apply(self, nu: NFormDensity) -> float:
        return quadrature.integrate(
            lambda q: self.g(q) * nu.density(q),
            nu.support_lo, nu.support_hi, nu.quad_nodes())


@dataclass(frozen=True)
class Dirac(ScalarDistribution):
    """Point mass at x0 in the fixed working chart: omega -> phi(x0)."""

    x0: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x0", as_point(self.x0))

    def _apply(self, nu: NFormDensity) -> float:
        if not nu.in_support(self.x0):
            return 0.0
        return nu.density(self.x0)


@dataclass(frozen=True)
class DiracDerivative(ScalarDistribution):
    """Derivative of a point mass: omega -> (-1)^|alpha| d^alpha phi(x0)."""

    x0: np.ndarray
    alpha: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "x0", as_point(self.x0))
        object.__setattr__(self, "alpha", tuple(int(a) for a in self.alpha))
        if len(self.alpha) != self.x0.size or any(a < 0 for a in self.alpha):
            raise ValueError("alpha must list a nonnegative order per axis")
        if self.order > MAX_DELTA_ORDER:
            raise ValueError(f"point-mass derivative order capped at {MAX_DELTA_ORDER}")

    @property
    def order(self) -> int:
        return sum(self.alpha)

    def _apply(self, nu: NFormDensity) -> float:
        if not nu.in_support(self.x0):
            return 0.0
        sign = -1.0 if self.order % 2 else 1.0
        return sign * fd_mixed(nu.density, self.x0, self.alpha)


@dataclass(frozen=True)
class Combination(ScalarDistribution):
    """Finite sum of (coefficient, optional smooth premultiplier, variant)."""

    terms: tuple  # of (float, SmoothMap | None, ScalarDistribution)

    def _apply(self, nu: NFormDensity) -> float:
        total = 0.0
        for coef, premul, dist in self.terms:
            arg = nu if premul is None else nu.scaled_by(premul)
            total += coef * dist.apply(arg)
        return total


def premultiplied(g: SmoothMap, u: ScalarDistribution) -> ScalarDistribution:
    """The distribution g * u, with g kept unexpanded."""
    return Combination(((1.0, g, u),))


def apply_scalar(u: ScalarDistribution, nu: NFormDensity) -> float:
    """Evaluate a scalar distribution on an n-form density."""
    return u.apply(nu)


# ---------------------------------------------------------------------------
# tensor distributions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TensorDistribution:
    """Finite sum u = sum_i u^i (x) e_i of scalar distributions times smooth
    (r, s)-fields, acting on smooth (s, r)-fields tensored with n-forms."""

    ttype: TensorType
    terms: tuple  # of (ScalarDistribution, SmoothTensorField)

    def __post_init__(self):
        for _, e in self.terms:
            if e.ttype != self.ttype:
                raise TypeMismatchError(
                    f"basis field of type {e.ttype} in a {self.ttype} distribution")

    @property
    def dim(self) -> int:
        return self.terms[0][1].dim if self.terms else 0

    def __add__(self, other: "TensorDistribution") -> "TensorDistribution":
        if self.ttype != other.ttype:
            raise TypeMismatchError("tensor-distribution sum requires equal types")
        return TensorDistribution(self.ttype, self.terms + other.terms)

    def __mul__(self, a: float) -> "TensorDistribution":
        return TensorDistribution(
            self.ttype, tuple((float(a) * u, e) for u, e in self.terms))

    __rmul__ = __mul__


def scalar_distribution_field(u: ScalarDistribution, dim: int) -> TensorDistribution:
    """Wrap a scalar distribution as a (0,0) tensor distribution."""
    return TensorDistribution(TensorType(0, 0), ((u, scalar_field_one(dim)),))


def apply_tensor(u: TensorDistribution, tt: SmoothTensorField, nu: NFormDensity) -> float:
    """Evaluate u on the simple argument tt (x) nu.

    tt must have the transpose type of u; each term contributes
    apply_scalar(u^i, (e_i . tt) nu) with the contraction folded into the
    test density.
    """
    if tt.ttype != u.ttype.transpose:
        raise TypeMismatchError(
            f"argument type {tt.ttype} does not pair with {u.ttype}")
    total = 0.0
    for ui, ei in u.terms:
        folded = nu.scaled_by(contraction_scalar_map(ei, tt))
        total += ui.apply(folded)
    return total


# ---------------------------------------------------------------------------
# Lie derivative on the variant structure
# ---------------------------------------------------------------------------


def _lie_scalar(u: ScalarDistribution, x_field: VectorFieldFlow) -> ScalarDistribution:
    """Lie derivative of a scalar distribution along a vector field.

    Defined through the adjoint pairing <L_X u, omega> = -<u, L_X omega>,
    realized term-by-term on the variant structure.  In the chart,
    L_X omega = div(X phi) dx, which gives

      Regular(g)        -> Regular(X g)
      Dirac(x0)         -> -div X(x0) Dirac(x0)
                           + sum_k X^k(x0) DiracDerivative(x0, e_k)
      point-mass deriv. -> Leibniz expansion, order grows by one.
    """
    n = x_field.chart.dim
    if isinstance(u, Regular):
        return Regular(smooth_directional(x_field, u.g))
    if isinstance(u, Dirac):
        x0 = u.x0
        dx = x_field.d_matrix(x0)
        xv = x_field.value(x0)
        terms = [(-float(np.trace(dx)), None, Dirac(x0))]
        for k in range(n):
            if xv[k] != 0.0:
                alpha = tuple(1 if j == k else 0 for j in range(n))
                terms.append((float(xv[k]), None, DiracDerivative(x0, alpha)))
        return Combination(tuple(terms))
    if isinstance(u, DiracDerivative):
        return _lie_dirac_derivative(u, x_field)
    if isinstance(u, Combination):
        out = []
        for coef, premul, dist in u.terms:
            if premul is None:
                inner = _lie_scalar(dist, x_field)
                out.append((coef, None, inner))
            else:
                # L_X(g u) = (X g) u + g L_X u
                out.append((coef, smooth_directional(x_field, premul), dist))
                out.append((coef, premul, _lie_scalar(dist, x_field)))
        return Combination(tuple(out))
    raise TypeMismatchError(f"unsupported distribution variant {type(u).__name__}")


def _multi_indices_leq(beta: tuple[int, ...]):
    if not beta:
        yield ()
        return
    for head in range(beta[0] + 1):
        for tail in _multi_indices_leq(beta[1:]):
            yield (head,) + tail


def _binom_multi(beta, gamma) -> float:
    out = 1.0
    for b, c in zip(beta, gamma):
        out *= math.comb(b, c)
    return out


def _lie_dirac_derivative(u: DiracDerivative, x_field: VectorFieldFlow) -> ScalarDistribution:
    """<L_X d^alpha delta, omega> = -(-1)^|alpha| sum_k d^(alpha+e_k)(X^k phi)(x0),
    expanded by the Leibniz rule into point-mass derivatives of phi with
    constant coefficients built from derivatives of X at x0."""
    n = x_field.chart.dim
    x0 = u.x0
    alpha = u.alpha
    if sum(alpha) + 1 > MAX_DELTA_ORDER:
        raise TypeMismatchError(
            f"Lie derivative would exceed the point-mass order cap {MAX_DELTA_ORDER}")
    sign_a = -1.0 if sum(alpha) % 2 else 1.0
    terms: list = []
    for k in range(n):
        beta = tuple(a + (1 if j == k else 0) for j, a in enumerate(alpha))
        comp = x_field.components[k]
        for gamma in _multi_indices_leq(beta):
            rest = tuple(b - c for b, c in zip(beta, gamma))
            dx_k = fd_mixed(comp, x0, gamma) if sum(gamma) else float(comp(x0))
            if dx_k == 0.0:
                continue
            # phi-derivative of order rest at x0, expressed via the variant
            sign_rest = -1.0 if sum(rest) % 2 else 1.0
            coef = -sign_a * _binom_multi(beta, gamma) * dx_k * sign_rest
            if sum(rest) == 0:
                terms.append((coef, None, Dirac(x0)))
            else:
                terms.append((coef, None, DiracDerivative(x0, rest)))
    return Combination(tuple(terms))


def lie_derivative_distribution(u: TensorDistribution,
                                x_field: VectorFieldFlow) -> TensorDistribution:
    """Lie derivative of a tensor distribution, term by term:

        L_X (u^i (x) e_i) = (L_X u^i) (x) e_i + u^i (x) (L_X e_i).

    For regular coefficients with closed-form partials this reproduces the
    classical Leibniz expansion of L_X(g e).
    """
    from .calculus import lie_classical

    out = []
    for ui, ei in u.terms:
        out.append((_lie_scalar(ui, x_field), ei))
        out.append((ui, lie_classical(ei, x_field)))
    return TensorDistribution(u.ttype, tuple(out))


# ---------------------------------------------------------------------------
# basis changes of the module representation
# ---------------------------------------------------------------------------


def change_basis_representation(u: TensorDistribution, bc) -> TensorDistribution:
    """Re-express u = u^i (x) e_i in the hatted basis ehat_j defined by
    e_i = sum_j a[j][i] ehat_j: the new coefficients are
    uhat^j = sum_i a[j][i] u^i (premultiplied, unexpanded) and the new basis
    fields are ehat_j = sum_i (a^-1)[i][j] e_i.

    The represented functional is unchanged; only the decomposition moves.
    """
    m = len(u.terms)
    if bc.size != m:
        raise TypeMismatchError(
            f"basis change of size {bc.size} applied to {m} terms")
    old_dists = [t[0] for t in u.terms]
    old_fields = [t[1] for t in u.terms]
    dim = u.dim

    new_terms = []
    for j in range(m):
        parts = tuple((1.0, bc.coeffs[j][i], old_dists[i]) for i in range(m))
        uhat_j = Combination(parts)

        def e_hat_fn(p, j=j):
            inv = bc.inverse_matrix(p)
            return sum(inv[i, j] * old_fields[i].fn(p) for i in range(m))

        e_hat = SmoothTensorField(u.ttype, dim, e_hat_fn, name=f"ehat_{j}")
        new_terms.append((uhat_j, e_hat))
    return TensorDistribution(u.ttype, tuple(new_terms))
