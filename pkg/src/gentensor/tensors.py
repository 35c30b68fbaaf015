"""Dense multi-index tensors at points and smooth tensor fields.

Components are stored dense, row-major, with the contravariant index block
before the covariant block: an (r, s)-tensor in dimension n is an ndarray of
shape (n,)*(r+s) whose first r axes are contravariant.  Scalars ((0,0)) use a
0-d array.  The full contraction pairs contravariant slot k of one factor
with covariant slot k of the other, in order.
"""

from __future__ import annotations

import itertools
import string
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import RankCapError, SingularBasisChangeError, TypeMismatchError
from .geometry import Chart, Point, SmoothMap, as_point, fd_partial, smooth_const

RANK_CAP = 4

_LETTERS = string.ascii_lowercase


@dataclass(frozen=True)
class TensorType:
    """(r, s): r contravariant and s covariant slots."""

    r: int
    s: int

    def __post_init__(self):
        if self.r < 0 or self.s < 0:
            raise ValueError("tensor type indices must be nonnegative")
        if self.rank > RANK_CAP:
            raise RankCapError(f"rank {self.rank} exceeds the cap {RANK_CAP}")

    @property
    def rank(self) -> int:
        return self.r + self.s

    @property
    def transpose(self) -> "TensorType":
        return TensorType(self.s, self.r)

    def __add__(self, other: "TensorType") -> "TensorType":
        return TensorType(self.r + other.r, self.s + other.s)

    def __str__(self):
        return f"({self.r},{self.s})"


@dataclass(frozen=True)
class TensorAtPoint:
    """Components of an (r, s)-tensor attached to a chart point."""

    ttype: TensorType
    base: Point
    components: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "base", as_point(self.base))
        comp = np.asarray(self.components, dtype=float)
        n = self.base.size
        if comp.shape != (n,) * self.ttype.rank:
            raise TypeMismatchError(
                f"components of a {self.ttype} tensor in dimension {n} must have "
                f"shape {(n,) * self.ttype.rank}, got {comp.shape}")
        object.__setattr__(self, "components", comp)

    @property
    def dim(self) -> int:
        return self.base.size

    def norm_inf(self) -> float:
        return float(np.max(np.abs(self.components))) if self.components.size else 0.0

    def item(self) -> float:
        if self.ttype.rank != 0:
            raise TypeMismatchError("item() is only defined for scalars")
        return float(self.components)

    def _check_compatible(self, other: "TensorAtPoint"):
        if self.ttype != other.ttype:
            raise TypeMismatchError(f"tensor types differ: {self.ttype} vs {other.ttype}")
        if not np.allclose(self.base, other.base, atol=1e-12):
            raise TypeMismatchError(f"base points differ: {self.base} vs {other.base}")

    def __add__(self, other: "TensorAtPoint") -> "TensorAtPoint":
        self._check_compatible(other)
        return TensorAtPoint(self.ttype, self.base, self.components + other.components)

    def __sub__(self, other: "TensorAtPoint") -> "TensorAtPoint":
        self._check_compatible(other)
        return TensorAtPoint(self.ttype, self.base, self.components - other.components)

    def __mul__(self, a: float) -> "TensorAtPoint":
        return TensorAtPoint(self.ttype, self.base, self.components * float(a))

    __rmul__ = __mul__

    def __neg__(self) -> "TensorAtPoint":
        return self * -1.0


def zero_tensor(ttype: TensorType, base: Point) -> TensorAtPoint:
    base = as_point(base)
    return TensorAtPoint(ttype, base, np.zeros((base.size,) * ttype.rank))


def scalar_tensor(value: float, base: Point) -> TensorAtPoint:
    return TensorAtPoint(TensorType(0, 0), base, np.asarray(float(value)))


# ---------------------------------------------------------------------------
# index bookkeeping
# ---------------------------------------------------------------------------


def flatten_index(idx: Sequence[int], n: int) -> int:
    """Row-major position of a multi-index."""
    flat = 0
    for i in idx:
        flat = flat * n + int(i)
    return flat


def unflatten_index(flat: int, n: int, rank: int) -> tuple[int, ...]:
    idx = []
    for _ in range(rank):
        idx.append(flat % n)
        flat //= n
    return tuple(reversed(idx))


def all_indices(n: int, rank: int):
    return itertools.product(range(n), repeat=rank)


# ---------------------------------------------------------------------------
# contraction and products
# ---------------------------------------------------------------------------


def contract_full(t: TensorAtPoint, tt: TensorAtPoint) -> float:
    """Full contraction of an (r, s)-tensor with an (s, r)-tensor at the same
    point: sum over all multi-indices of t^I_J tt^J_I."""
    if tt.ttype != t.ttype.transpose:
        raise TypeMismatchError(
            f"full contraction needs transposed types, got {t.ttype} and {tt.ttype}")
    if not np.allclose(t.base, tt.base, atol=1e-12):
        raise TypeMismatchError("full contraction requires a common base point")
    r, s = t.ttype.r, t.ttype.s
    if r + s == 0:
        return float(t.components) * float(tt.components)
    up = _LETTERS[:r]
    down = _LETTERS[r:r + s]
    return float(np.einsum(f"{up}{down},{down}{up}->", t.components, tt.components))


def tensor_product(u: TensorAtPoint, v: TensorAtPoint) -> TensorAtPoint:
    """Outer product with the contravariant blocks of both factors first."""
    if not np.allclose(u.base, v.base, atol=1e-12):
        raise TypeMismatchError("tensor product requires a common base point")
    ttype = u.ttype + v.ttype  # RankCapError if over the cap
    r1, s1 = u.ttype.r, u.ttype.s
    r2, s2 = v.ttype.r, v.ttype.s
    a = _LETTERS[:r1 + s1]
    b = _LETTERS[r1 + s1:r1 + s1 + r2 + s2]
    out = a[:r1] + b[:r2] + a[r1:] + b[r2:]
    comp = np.einsum(f"{a},{b}->{out}", u.components, v.components) \
        if out else np.asarray(u.components * v.components)
    return TensorAtPoint(ttype, u.base, comp)


def basis_dual_tensor(ttype: TensorType, base: Point, index: tuple[int, ...]) -> TensorAtPoint:
    """The (s, r)-tensor extracting component ``index`` under full contraction.

    For index (I, J) of an (r, s)-tensor this is the transpose-type tensor
    with a single unit entry at position (J, I).
    """
    base = as_point(base)
    n = base.size
    r, s = ttype.r, ttype.s
    comp = np.zeros((n,) * (r + s))
    swapped = tuple(index[r:]) + tuple(index[:r])
    if r + s == 0:
        comp = np.asarray(1.0)
    else:
        comp[swapped] = 1.0
    return TensorAtPoint(ttype.transpose, base, comp)


def apply_slotwise(components: np.ndarray, r: int, s: int,
                   m_contra: np.ndarray, m_cov: np.ndarray) -> np.ndarray:
    """Apply m_contra to every contravariant slot and m_cov (from the right)
    to every covariant slot:

        out[K, L] = prod_a m_contra[k_a, i_a] prod_b m_cov[j_b, l_b] comp[I, J]
    """
    if r + s == 0:
        return np.asarray(components)
    src_up = _LETTERS[:r]
    src_down = _LETTERS[r:r + s]
    dst_up = _LETTERS[r + s:r + s + r]
    dst_down = _LETTERS[2 * r + s:2 * r + 2 * s]
    operands = [components]
    spec = src_up + src_down
    for a in range(r):
        operands.append(m_contra)
        spec += f",{dst_up[a]}{src_up[a]}"
    for b in range(s):
        operands.append(m_cov)
        spec += f",{src_down[b]}{dst_down[b]}"
    return np.einsum(f"{spec}->{dst_up}{dst_down}", *operands)


# ---------------------------------------------------------------------------
# smooth tensor fields
# ---------------------------------------------------------------------------


class SmoothTensorField:
    """A smooth (r, s)-tensor field given by a dense component callable.

    ``fn(p)`` returns the full component array; ``partial_fn(p, axis)``, when
    provided, returns the componentwise partial derivative array (otherwise
    central differences are used).
    """

    def __init__(self, ttype: TensorType, dim: int,
                 fn: Callable[[Point], np.ndarray],
                 partial_fn: Callable[[Point, int], np.ndarray] | None = None,
                 name: str = ""):
        self.ttype = ttype
        self.dim = dim
        self.fn = fn
        self.partial_fn = partial_fn
        self.name = name

    @classmethod
    def from_component_maps(cls, ttype: TensorType, dim: int,
                            maps: Sequence[SmoothMap], name: str = "") -> "SmoothTensorField":
        shape = (dim,) * ttype.rank
        maps = list(maps)
        want = int(np.prod(shape)) if shape else 1
        if len(maps) != want:
            raise TypeMismatchError(f"need {want} component maps, got {len(maps)}")

        def fn(p):
            vals = np.array([m(p) for m in maps])
            return vals.reshape(shape) if shape else np.asarray(vals[0])

        def partial_fn(p, axis):
            vals = np.array([m.derivative(p, axis) for m in maps])
            return vals.reshape(shape) if shape else np.asarray(vals[0])

        return cls(ttype, dim, fn, partial_fn, name)

    @classmethod
    def constant(cls, ttype: TensorType, dim: int, components, name: str = "") -> "SmoothTensorField":
        comp = np.asarray(components, dtype=float).reshape((dim,) * ttype.rank)
        zero = np.zeros_like(comp)
        return cls(ttype, dim, lambda p: comp, lambda p, a: zero, name)

    def value(self, p: Point) -> TensorAtPoint:
        return TensorAtPoint(self.ttype, as_point(p), self.fn(as_point(p)))

    def partial(self, p: Point, axis: int) -> np.ndarray:
        p = as_point(p)
        if self.partial_fn is not None:
            return np.asarray(self.partial_fn(p, axis), dtype=float)
        shape = (self.dim,) * self.ttype.rank
        if not shape:
            return np.asarray(fd_partial(lambda q: float(self.fn(q)), p, axis))
        flat = np.empty(int(np.prod(shape)))
        for k, idx in enumerate(all_indices(self.dim, self.ttype.rank)):
            flat[k] = fd_partial(lambda q, idx=idx: float(self.fn(q)[idx]), p, axis)
        return flat.reshape(shape)

    def scale_by(self, g: SmoothMap) -> "SmoothTensorField":
        """The field g * e (smooth scalar times this field)."""
        partial_fn = None
        if self.partial_fn is not None and g.partials is not None:
            def partial_fn(p, axis, self=self, g=g):
                return g.derivative(p, axis) * self.fn(p) + g(p) * self.partial_fn(p, axis)
        return SmoothTensorField(self.ttype, self.dim,
                                 lambda p: g(p) * self.fn(p), partial_fn,
                                 name=f"({g.name})*{self.name}" if g.name else self.name)

    def __add__(self, other: "SmoothTensorField") -> "SmoothTensorField":
        if self.ttype != other.ttype or self.dim != other.dim:
            raise TypeMismatchError("field sum requires matching type and dimension")
        partial_fn = None
        if self.partial_fn is not None and other.partial_fn is not None:
            def partial_fn(p, axis):
                return self.partial_fn(p, axis) + other.partial_fn(p, axis)
        return SmoothTensorField(self.ttype, self.dim,
                                 lambda p: self.fn(p) + other.fn(p), partial_fn)

    def __mul__(self, a: float) -> "SmoothTensorField":
        partial_fn = None
        if self.partial_fn is not None:
            def partial_fn(p, axis):
                return float(a) * self.partial_fn(p, axis)
        return SmoothTensorField(self.ttype, self.dim, lambda p: float(a) * self.fn(p),
                                 partial_fn, name=self.name)

    __rmul__ = __mul__


def scalar_field_one(dim: int) -> SmoothTensorField:
    return SmoothTensorField.constant(TensorType(0, 0), dim, 1.0, name="1")


def contraction_scalar_map(e: SmoothTensorField, tt: SmoothTensorField) -> SmoothMap:
    """The smooth function p -> full contraction e(p) . tt(p)."""
    if tt.ttype != e.ttype.transpose or e.dim != tt.dim:
        raise TypeMismatchError("contraction needs transposed field types")

    def fn(p):
        return contract_full(e.value(p), tt.value(p))

    return SmoothMap(fn, name=f"{e.name}.{tt.name}" if e.name and tt.name else "")


# ---------------------------------------------------------------------------
# basis changes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BasisChange:
    """Pointwise-invertible smooth coefficients a[j][i] relating a module
    basis e_i = sum_j a[j][i] ehat_j of (r, s)-fields."""

    coeffs: tuple  # tuple of tuples of SmoothMap, shape (m, m)

    @property
    def size(self) -> int:
        return len(self.coeffs)

    def matrix(self, p: Point) -> np.ndarray:
        return np.array([[m(p) for m in row] for row in self.coeffs])

    def inverse_matrix(self, p: Point) -> np.ndarray:
        mat = self.matrix(p)
        if abs(np.linalg.det(mat)) < 1e-12:
            raise SingularBasisChangeError(f"basis change singular at {as_point(p)}")
        return np.linalg.inv(mat)

    def validate(self, chart: Chart, per_axis: int = 6):
        for p in chart.grid(per_axis):
            self.inverse_matrix(p)

    @classmethod
    def identity(cls, m: int) -> "BasisChange":
        return cls(tuple(tuple(smooth_const(1.0 if i == j else 0.0) for i in range(m))
                         for j in range(m)))

    def compose(self, first: "BasisChange") -> "BasisChange":
        """Coefficients of applying ``first`` then ``self``: (self @ first)."""
        if self.size != first.size:
            raise TypeMismatchError("basis-change sizes differ")
        m = self.size

        def entry(j, i):
            def fn(p, j=j, i=i):
                return sum(self.coeffs[j][k](p) * first.coeffs[k][i](p) for k in range(m))
            return SmoothMap(fn)

        return BasisChange(tuple(tuple(entry(j, i) for i in range(m)) for j in range(m)))


# ---------------------------------------------------------------------------
# JSON component dumps
# ---------------------------------------------------------------------------


def tensor_to_json(t: TensorAtPoint) -> dict:
    """Serializable dump with explicit shape header [n, r, s]."""
    return {
        "shape": [t.dim, t.ttype.r, t.ttype.s],
        "base": [float(x) for x in t.base],
        "components": t.components.tolist(),
    }


def tensor_from_json(d: dict) -> TensorAtPoint:
    n, r, s = d["shape"]
    comp = np.asarray(d["components"], dtype=float).reshape((n,) * (r + s))
    return TensorAtPoint(TensorType(r, s), np.asarray(d["base"], dtype=float), comp)
