"""Two-point transport operators and their induced tensor transports.

A transport operator is a compactly supported smooth field of linear maps
A(p, q): T_p M -> T_q M over pairs of chart points (matrix convention:
column index in the T_p basis, row index in the T_q basis).  It moves tensor
values at q into the tensor space at p so that they can be averaged there:

* contravariant slots of an (r, s)-value at q are mapped by A(q, p),
* covariant slots are mapped by the adjoint of A(p, q),

and the adjoint transport is the unique map on (s, r)-values at p satisfying

    <gather(g_q, p), tt_p> = <g_q, spread_dual(tt_p, q)>

for the full contraction pairing.  The adjoint applies A(p, q) to the
contravariant slots of tt_p and the adjoint of A(q, p) to its covariant
slots; the duality is pinned by tests rather than asserted.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import UnknownNameError
from .geometry import Chart, Point, as_point
from .mollifiers import plateau
from .tensors import TensorAtPoint, TensorType, apply_slotwise, zero_tensor


@dataclass(frozen=True)
class TransportOperator:
    """A smooth compactly supported two-point matrix field.

    ``matrix(p, q)`` returns the n x n matrix of A(p, q).  Outside the
    support boxes the field vanishes; ``diag_identity`` advertises that
    A(p, p) = Id on the working region (needed by consistency experiments,
    not by the construction itself).
    """

    matrix: Callable[[Point, Point], np.ndarray]
    dim: int
    support_p: tuple[np.ndarray, np.ndarray]
    support_q: tuple[np.ndarray, np.ndarray]
    diag_identity: bool = False
    working_box: tuple[np.ndarray, np.ndarray] | None = None
    name: str = ""

    def __call__(self, p: Point, q: Point) -> np.ndarray:
        return np.asarray(self.matrix(as_point(p), as_point(q)), dtype=float)

    def in_support(self, p: Point, q: Point) -> bool:
        p, q = as_point(p), as_point(q)
        (plo, phi), (qlo, qhi) = self.support_p, self.support_q
        return bool(np.all(p >= plo) and np.all(p <= phi)
                    and np.all(q >= qlo) and np.all(q <= qhi))

    def supports_box(self, lo, hi) -> bool:
        """Whether a q-side box lies inside the support region."""
        (qlo, qhi) = self.support_q
        return bool(np.all(as_point(lo) >= qlo) and np.all(as_point(hi) <= qhi))

    def smoothness_defect(self, p: Point, q: Point, step: float = 1e-4) -> float:
        """Finite-difference stability spot-check: largest relative change of
        entrywise central differences under step halving."""
        p, q = as_point(p), as_point(q)
        worst = 0.0
        for h in (step,):
            for axis in range(self.dim):
                for which in (0, 1):
                    d1 = self._entry_diff(p, q, axis, which, h)
                    d2 = self._entry_diff(p, q, axis, which, h / 2)
                    scale = max(np.max(np.abs(d1)), 1e-8)
                    worst = max(worst, float(np.max(np.abs(d2 - d1)) / scale))
        return worst

    def _entry_diff(self, p, q, axis, which, h):
        def at(offset):
            pp, qq = p.copy(), q.copy()
            if which == 0:
                pp[axis] += offset
            else:
                qq[axis] += offset
            return self(pp, qq)

        return (at(h) - at(-h)) / (2 * h)


@dataclass(frozen=True)
class TensorTransport:
    """The action of a transport operator on (r, s)-tensor values."""

    op: TransportOperator
    ttype: TensorType

    def gather(self, g_q: TensorAtPoint, p: Point) -> TensorAtPoint:
        return transport_tensor(self.op, g_q, p)

    def spread_dual(self, tt_p: TensorAtPoint, q: Point) -> TensorAtPoint:
        return transport_dual(self.op, tt_p, q)


def transport_tensor(op: TransportOperator, g_q: TensorAtPoint, p: Point) -> TensorAtPoint:
    """Move an (r, s)-tensor value at q to the tensor space at p.

    Componentwise this is the slot sandwich

        out^K_L(p) = prod_a A(q,p)^{k_a}_{i_a} prod_b A(p,q)^{j_b}_{l_b} g^I_J(q),

    linear in g_q, and zero outside the support region.  Scalars carry no
    slots and pass through unchanged.
    """
    p = as_point(p)
    q = g_q.base
    r, s = g_q.ttype.r, g_q.ttype.s
    if r + s == 0:
        return TensorAtPoint(g_q.ttype, p, g_q.components)
    if not op.in_support(q, p):
        return zero_tensor(g_q.ttype, p)
    a_qp = op(q, p)
    a_pq = op(p, q)
    comp = apply_slotwise(g_q.components, r, s, m_contra=a_qp, m_cov=a_pq)
    return TensorAtPoint(g_q.ttype, p, comp)


def transport_dual(op: TransportOperator, tt_p: TensorAtPoint, q: Point) -> TensorAtPoint:
    """The adjoint transport, moving an (s, r)-tensor value at p to q.

    Satisfies <transport_tensor(g_q, p), tt_p> = <g_q, transport_dual(tt_p, q)>
    for every g_q; realized by the transposed index sandwich (contravariant
    slots get A(p, q), covariant slots contract against A(q, p)).
    """
    q = as_point(q)
    p = tt_p.base
    s, r = tt_p.ttype.r, tt_p.ttype.s  # tt has type (s, r) when g has (r, s)
    if r + s == 0:
        return TensorAtPoint(tt_p.ttype, q, tt_p.components)
    if not op.in_support(q, p):
        return zero_tensor(tt_p.ttype, q)
    a_qp = op(q, p)
    a_pq = op(p, q)
    comp = apply_slotwise(tt_p.components, s, r, m_contra=a_pq, m_cov=a_qp)
    return TensorAtPoint(tt_p.ttype, q, comp)


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------


def _cutoff_factory(chart: Chart, working_fraction: float):
    inner_lo, inner_hi = chart.shrink(working_fraction)

    def cut(x: Point) -> float:
        out = 1.0
        for k in range(chart.dim):
            out *= plateau(x[k], chart.lo[k], inner_lo[k], inner_hi[k], chart.hi[k])
        return out

    return cut, (inner_lo, inner_hi)


def _nilpotent(dim: int) -> np.ndarray:
    # Superdiagonal ones; in dimension 1 there is no nilpotent direction, so
    # the shear degenerates to the scalar field 1 + lam (q - p) instead.
    if dim == 1:
        return np.array([[1.0]])
    mat = np.zeros((dim, dim))
    for k in range(dim - 1):
        mat[k, k + 1] = 1.0
    return mat


def transport_catalog(name: str, chart: Chart,
                      working_fraction: float = 0.5) -> TransportOperator:
    """Built-in transports on a chart.

    ``identity_cut``      the identity matrix times a smooth cutoff that is
                          exactly 1 when both points lie in the working box
                          (the chart shrunk by ``working_fraction``).
    ``shear:<lam>``       Id + lam (q_1 - p_1) N with a fixed nilpotent N
                          (in dimension 1: the scalar 1 + lam (q - p)).
    ``rotation:<theta>``  rotation by the angle theta |q - p| (dimension 2).

    All entries carry the shared cutoff, so they are compactly supported and
    have identity diagonal inside the working box.
    """
    base, _, param = name.partition(":")
    cut, working = _cutoff_factory(chart, working_fraction)
    support = (chart.lo.copy(), chart.hi.copy())
    dim = chart.dim

    if base == "identity_cut":
        eye = np.eye(dim)

        def matrix(p, q, cut=cut, eye=eye):
            return (cut(p) * cut(q)) * eye

        return TransportOperator(matrix, dim, support, support, True, working,
                                 name="identity_cut")

    if base == "shear":
        try:
            lam = float(param) if param else 1.0
        except ValueError:
            raise UnknownNameError(f"shear needs a numeric parameter, got {name!r}")
        eye = np.eye(dim)
        nil = _nilpotent(dim)

        def matrix(p, q, cut=cut, eye=eye, nil=nil, lam=lam):
            return (cut(p) * cut(q)) * (eye + lam * (q[0] - p[0]) * nil)

        return TransportOperator(matrix, dim, support, support, True, working,
                                 name=f"shear:{lam}")

    if base == "rotation":
        if dim != 2:
            raise UnknownNameError("rotation transport is only defined in dimension 2")
        try:
            theta = float(param) if param else 1.0
        except ValueError:
            raise UnknownNameError(f"rotation needs a numeric parameter, got {name!r}")

        def matrix(p, q, cut=cut, theta=theta):
            ang = theta * float(np.linalg.norm(q - p))
            c, s = np.cos(ang), np.sin(ang)
            return (cut(p) * cut(q)) * np.array([[c, -s], [s, c]])

        return TransportOperator(matrix, dim, support, support, True, working,
                                 name=f"rotation:{theta}")

    raise UnknownNameError(f"unknown transport {name!r}")
