"""The three-slot basic space and the embeddings into it.

A basic-space element is an evaluable map (omega, p, A) -> tensor value at p,
where omega is a compactly supported unit-integral n-form (slot 1), p a chart
point (slot 2), and A a transport operator (slot 3).  Membership means the
returned value is an (r, s)-tensor based at the queried point; this is
asserted on every evaluation in debug mode.

Three embeddings are provided:

* ``embed_sigma``: smooth fields by pointwise evaluation, ignoring omega, A;
* ``embed_iota_field``: continuous fields by the transported average
      eval(omega, p, A) = integral over q of  gather_A(g(q) -> p) phi(q) dq,
  computed componentwise on the support of omega;
* ``embed_iota_distribution``: tensor distributions through the contraction
  pairing: component K of the value is the distribution applied to
  (adjoint transport of the K-th dual basis tensor at p) (x) omega.

On regular distributions the two iota forms agree (up to the quadrature
rule), which is exercised by the acceptance suite.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import quadrature
from .distributions import NFormDensity, TensorDistribution, apply_tensor
from .errors import TypeMismatchError
from .geometry import Point, as_point
from .tensors import (SmoothTensorField, TensorAtPoint, TensorType,
                      all_indices, basis_dual_tensor, scalar_tensor,
                      tensor_product, zero_tensor)
from .transport import TransportOperator, transport_dual, transport_tensor

PROVENANCES = ("sigma", "iota_continuous", "iota_distribution",
               "algebraic", "lie", "diffeo")


@dataclass(frozen=True)
class BasicSpaceElement:
    """An evaluable member of the three-slot basic space."""

    ttype: TensorType
    dim: int
    eval_fn: Callable[[NFormDensity, Point, TransportOperator], TensorAtPoint]
    provenance: str = "algebraic"

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")

    def __call__(self, omega: NFormDensity, p: Point,
                 transport: TransportOperator) -> TensorAtPoint:
        p = as_point(p)
        value = self.eval_fn(omega, p, transport)
        if __debug__:
            assert isinstance(value, TensorAtPoint)
            assert value.ttype == self.ttype, \
                f"element of type {self.ttype} produced a {value.ttype} value"
            assert np.allclose(value.base, p, atol=1e-12), \
                f"value based at {value.base}, queried at {p}"
        return value

    def _combine(self, other: "BasicSpaceElement", sign: float) -> "BasicSpaceElement":
        if self.ttype != other.ttype or self.dim != other.dim:
            raise TypeMismatchError("element arithmetic requires matching types")

        def eval_fn(omega, p, transport):
            return self(omega, p, transport) + sign * other(omega, p, transport)

        return BasicSpaceElement(self.ttype, self.dim, eval_fn, "algebraic")

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __mul__(self, a: float) -> "BasicSpaceElement":
        def eval_fn(omega, p, transport, a=float(a)):
            return self(omega, p, transport) * a

        return BasicSpaceElement(self.ttype, self.dim, eval_fn, "algebraic")

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    @property
    def is_scalar(self) -> bool:
        return self.ttype.rank == 0


class GeneralizedScalar(BasicSpaceElement):
    """A basic-space element of type (0, 0)."""

    def __post_init__(self):
        super().__post_init__()
        if self.ttype.rank != 0:
            raise TypeMismatchError("a generalized scalar must have type (0,0)")


# ---------------------------------------------------------------------------
# embeddings
# ---------------------------------------------------------------------------


def embed_sigma(f: SmoothTensorField) -> BasicSpaceElement:
    """Pointwise embedding of a smooth field: eval(omega, p, A) = f(p)."""

    def eval_fn(omega, p, transport):
        return f.value(p)

    cls = GeneralizedScalar if f.ttype.rank == 0 else BasicSpaceElement
    return cls(f.ttype, f.dim, eval_fn, "sigma")


def _flag_support(omega: NFormDensity, transport: TransportOperator):
    if transport is not None and not transport.supports_box(omega.support_lo,
                                                            omega.support_hi):
        warnings.warn(
            "mollifier support leaves the transport support region; "
            "outside contributions are zero by compact support",
            RuntimeWarning, stacklevel=3)


def embed_iota_field(g: SmoothTensorField) -> BasicSpaceElement:
    """Embed a continuous tensor field through the transported average.

    The value at (omega, p, A) is the componentwise quadrature over the
    support of omega of the field value at q gathered to p, weighted by the
    chart density of omega.  For scalars no transport factors occur and the
    formula reduces to the plain average against omega.
    """
    ttype = g.ttype

    def eval_fn(omega, p, transport):
        if ttype.rank == 0:
            value = quadrature.integrate(
                lambda q: float(g.fn(q)) * omega.density(q),
                omega.support_lo, omega.support_hi, omega.quad_nodes())
            return scalar_tensor(value, p)
        _flag_support(omega, transport)
        points, weights = quadrature.box_rule(
            omega.support_lo, omega.support_hi, omega.quad_nodes())
        acc = np.zeros((g.dim,) * ttype.rank)
        for q, w in zip(points, weights):
            moved = transport_tensor(transport, g.value(q), p)
            acc += (w * omega.density(q)) * moved.components
        return TensorAtPoint(ttype, p, acc)

    cls = GeneralizedScalar if ttype.rank == 0 else BasicSpaceElement
    return cls(ttype, g.dim, eval_fn, "iota_continuous")


def embed_iota_distribution(u: TensorDistribution) -> BasicSpaceElement:
    """Embed a tensor distribution through the contraction pairing.

    For each multi-index K the K-th component of the value at (omega, p, A)
    is u applied to the argument field

        q -> adjoint transport to q of the K-th dual basis tensor at p,

    tensored with omega.  The dual basis is the one extracting component K
    under the full contraction, so the assembled array is the unique tensor
    whose contractions against all (s, r)-tensors reproduce the pairing.
    """
    ttype = u.ttype
    dim = u.dim

    def eval_fn(omega, p, transport):
        if ttype.rank == 0:
            # No transport factors: the pairing is u against 1 (x) omega.
            one = SmoothTensorField.constant(TensorType(0, 0), dim, 1.0)
            return scalar_tensor(apply_tensor(u, one, omega), p)
        _flag_support(omega, transport)
        comp = np.zeros((dim,) * ttype.rank)
        for index in all_indices(dim, ttype.rank):
            dual_at_p = basis_dual_tensor(ttype, p, index)

            def arg_fn(q, dual_at_p=dual_at_p):
                return transport_dual(transport, dual_at_p, q).components

            arg = SmoothTensorField(ttype.transpose, dim, arg_fn)
            comp[index] = apply_tensor(u, arg, omega)
        return TensorAtPoint(ttype, p, comp)

    cls = GeneralizedScalar if ttype.rank == 0 else BasicSpaceElement
    return cls(ttype, dim, eval_fn, "iota_distribution")


def zero_element(ttype: TensorType, dim: int) -> BasicSpaceElement:
    def eval_fn(omega, p, transport):
        return zero_tensor(ttype, p)

    return BasicSpaceElement(ttype, dim, eval_fn, "algebraic")


# ---------------------------------------------------------------------------
# pointwise algebra
# ---------------------------------------------------------------------------


def pointwise_product(t1: BasicSpaceElement, t2: BasicSpaceElement) -> BasicSpaceElement:
    """Slotwise product of two elements at the same (omega, p, A).

    Scalar times anything multiplies components; two tensor factors combine
    by the tensor product (contravariant blocks first).  The combined rank
    must respect the desk-scale cap.
    """
    if t1.dim != t2.dim:
        raise TypeMismatchError("pointwise product requires a common chart dimension")
    if not (t1.is_scalar or t2.is_scalar):
        out_type = t1.ttype + t2.ttype  # raises RankCapError beyond the cap
    else:
        out_type = t2.ttype if t1.is_scalar else t1.ttype

    def eval_fn(omega, p, transport):
        v1 = t1(omega, p, transport)
        v2 = t2(omega, p, transport)
        if t1.is_scalar and t2.is_scalar:
            return scalar_tensor(v1.item() * v2.item(), p)
        if t1.is_scalar:
            return v2 * v1.item()
        if t2.is_scalar:
            return v1 * v2.item()
        return tensor_product(v1, v2)

    cls = GeneralizedScalar if out_type.rank == 0 else BasicSpaceElement
    return cls(out_type, t1.dim, eval_fn, "algebraic")
