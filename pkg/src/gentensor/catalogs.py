"""Named catalogs of charts, fields, distributions, transports, profiles,
diffeomorphisms and vector fields, addressable from experiment configs.

Catalog names may carry parameters after a colon or at-sign, for example
``shear:0.5``, ``bump_shift:0.3``, ``dirac@0``, ``regular:poly:1+x^2``.
User code can register additional entries with the ``register_*`` functions;
``list-catalogs`` prints every registered name with its parameter schema.
"""

from __future__ import annotations

import math
import re
from typing import Callable

import numpy as np

from .errors import UnknownNameError
from .geometry import Chart, Diffeo, SmoothMap, VectorFieldFlow, smooth_const
from .distributions import (Dirac, DiracDerivative, Regular,
                            ScalarDistribution, premultiplied)
from .mollifiers import BumpProfile, profile_catalog
from .tensors import SmoothTensorField, TensorType
from .transport import TransportOperator, transport_catalog

_VARS = "xyz"


# ---------------------------------------------------------------------------
# tiny polynomial expressions (for names like "poly:1+x^2")
# ---------------------------------------------------------------------------


class _PolyParser:
    """Recursive-descent parser for polynomials in x, y, z with +, -, *, ^."""

    def __init__(self, text: str, dim: int):
        self.tokens = re.findall(r"\d+\.\d+|\d+|[xyz]|\*\*|[-+*^()]", text.replace(" ", ""))
        if "".join(self.tokens).replace("**", "^") != text.replace(" ", "").replace("**", "^"):
            raise UnknownNameError(f"cannot parse polynomial {text!r}")
        self.pos = 0
        self.dim = dim

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def parse(self) -> dict:
        terms = self.expr()
        if self.peek() is not None:
            raise UnknownNameError(f"trailing tokens in polynomial near {self.peek()!r}")
        return terms

    def expr(self) -> dict:
        sign = 1.0
        if self.peek() in ("+", "-"):
            sign = -1.0 if self.next() == "-" else 1.0
        total = _poly_scale(self.term(), sign)
        while self.peek() in ("+", "-"):
            op = self.next()
            rhs = self.term()
            total = _poly_add(total, _poly_scale(rhs, -1.0 if op == "-" else 1.0))
        return total

    def term(self) -> dict:
        out = self.factor()
        while self.peek() == "*":
            self.next()
            out = _poly_mul(out, self.factor())
        return out

    def factor(self) -> dict:
        base = self.atom()
        if self.peek() in ("^", "**"):
            self.next()
            tok = self.next()
            if tok is None or not tok.isdigit():
                raise UnknownNameError("polynomial exponent must be a nonnegative integer")
            power = int(tok)
            out = {(0,) * self.dim: 1.0}
            for _ in range(power):
                out = _poly_mul(out, base)
            return out
        return base

    def atom(self) -> dict:
        tok = self.next()
        if tok == "(":
            inner = self.expr()
            if self.next() != ")":
                raise UnknownNameError("unbalanced parentheses in polynomial")
            return inner
        if tok in _VARS:
            axis = _VARS.index(tok)
            if axis >= self.dim:
                raise UnknownNameError(
                    f"variable {tok!r} not available in dimension {self.dim}")
            exp = [0] * self.dim
            exp[axis] = 1
            return {tuple(exp): 1.0}
        if tok is None:
            raise UnknownNameError("unexpected end of polynomial")
        try:
            return {(0,) * self.dim: float(tok)}
        except ValueError:
            raise UnknownNameError(f"unexpected token {tok!r} in polynomial")


def _poly_add(a: dict, b: dict) -> dict:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0.0) + v
    return out


def _poly_scale(a: dict, c: float) -> dict:
    return {k: c * v for k, v in a.items()}


def _poly_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for ka, va in a.items():
        for kb, vb in b.items():
            key = tuple(i + j for i, j in zip(ka, kb))
            out[key] = out.get(key, 0.0) + va * vb
    return out


def polynomial_map(text: str, dim: int) -> SmoothMap:
    """A SmoothMap with exact partials from a polynomial expression."""
    terms = _PolyParser(text, dim).parse()

    def fn(p):
        total = 0.0
        for exps, coef in terms.items():
            mono = coef
            for k, e in enumerate(exps):
                if e:
                    mono *= p[k] ** e
            total += mono
        return total

    def partials(p, axis):
        total = 0.0
        for exps, coef in terms.items():
            e_ax = exps[axis]
            if e_ax == 0:
                continue
            mono = coef * e_ax * p[axis] ** (e_ax - 1)
            for k, e in enumerate(exps):
                if k != axis and e:
                    mono *= p[k] ** e
            total += mono
        return total

    return SmoothMap(fn, partials=partials, name=f"poly:{text}")


# ---------------------------------------------------------------------------
# scalar functions
# ---------------------------------------------------------------------------

_SCALAR_FNS: dict[str, tuple[str, Callable[[str, int], SmoothMap]]] = {}


def register_scalar(name: str, schema: str, factory: Callable[[str, int], SmoothMap]):
    _SCALAR_FNS[name] = (schema, factory)


def scalar_map(name: str, dim: int) -> SmoothMap:
    base = name.split(":", 1)[0]
    if base not in _SCALAR_FNS:
        raise UnknownNameError(f"unknown scalar function {name!r}")
    return _SCALAR_FNS[base][1](name, dim)


register_scalar("one", "one", lambda name, dim: smooth_const(1.0, "one"))
register_scalar("x", "x", lambda name, dim: polynomial_map("x", dim))
register_scalar("x2", "x2", lambda name, dim: polynomial_map("x^2", dim))
register_scalar("one_plus_x2", "one_plus_x2", lambda name, dim: polynomial_map("1+x^2", dim))
register_scalar("poly", "poly:<expression in x,y,z>",
                lambda name, dim: polynomial_map(name.split(":", 1)[1], dim))
register_scalar("sinx", "sinx", lambda name, dim: SmoothMap(
    lambda p: math.sin(p[0]),
    partials=lambda p, a: math.cos(p[0]) if a == 0 else 0.0, name="sinx"))
register_scalar("expx", "expx", lambda name, dim: SmoothMap(
    lambda p: math.exp(p[0]),
    partials=lambda p, a: math.exp(p[0]) if a == 0 else 0.0, name="expx"))
register_scalar("exp_negx", "exp_negx", lambda name, dim: SmoothMap(
    lambda p: math.exp(-p[0]),
    partials=lambda p, a: -math.exp(-p[0]) if a == 0 else 0.0, name="exp_negx"))


# ---------------------------------------------------------------------------
# tensor fields
# ---------------------------------------------------------------------------

_FIELDS: dict[str, tuple[str, Callable[[str, int], SmoothTensorField]]] = {}


def register_field(name: str, schema: str, factory: Callable[[str, int], SmoothTensorField]):
    _FIELDS[name] = (schema, factory)


def tensor_field(name: str, dim: int) -> SmoothTensorField:
    base = name.split(":", 1)[0]
    if base not in _FIELDS:
        raise UnknownNameError(f"unknown tensor field {name!r}")
    return _FIELDS[base][1](name, dim)


def _unit_vector_field(axis: int, dim: int, name: str) -> SmoothTensorField:
    comp = np.zeros(dim)
    comp[axis] = 1.0
    return SmoothTensorField.constant(TensorType(1, 0), dim, comp, name=name)


def _scaled_unit_field(g: SmoothMap, axis: int, dim: int, name: str) -> SmoothTensorField:
    return _unit_vector_field(axis, dim, name).scale_by(g)


register_field("scalar", "scalar:<scalar fn>", lambda name, dim: SmoothTensorField(
    TensorType(0, 0), dim,
    (lambda m: (lambda p: np.asarray(m(p))))(scalar_map(name.split(":", 1)[1], dim)),
    (lambda m: (lambda p, a: np.asarray(m.derivative(p, a))))(scalar_map(name.split(":", 1)[1], dim)),
    name=name))
register_field("dx", "dx (constant first unit vector)",
               lambda name, dim: _unit_vector_field(0, dim, "dx"))
register_field("x_dx", "x_dx (x times first unit vector)",
               lambda name, dim: _scaled_unit_field(polynomial_map("x", dim), 0, dim, "x_dx"))
register_field("x2_dx", "x2_dx",
               lambda name, dim: _scaled_unit_field(polynomial_map("x^2", dim), 0, dim, "x2_dx"))
register_field("sin_dx", "sin_dx",
               lambda name, dim: _scaled_unit_field(scalar_map("sinx", dim), 0, dim, "sin_dx"))
register_field("exp_dx", "exp_dx (e^x times first unit vector)",
               lambda name, dim: _scaled_unit_field(scalar_map("expx", dim), 0, dim, "exp_dx"))
register_field("dx_form", "dx_form (constant first unit covector)",
               lambda name, dim: SmoothTensorField.constant(
                   TensorType(0, 1), dim, np.eye(dim)[0], name="dx_form"))


# ---------------------------------------------------------------------------
# scalar distributions
# ---------------------------------------------------------------------------

_DISTS: dict[str, tuple[str, Callable[[str, int], ScalarDistribution]]] = {}


def register_distribution(name: str, schema: str,
                          factory: Callable[[str, int], ScalarDistribution]):
    _DISTS[name] = (schema, factory)


def scalar_distribution(name: str, dim: int) -> ScalarDistribution:
    base = re.split(r"[@:]", name, 1)[0]
    if base not in _DISTS:
        raise UnknownNameError(f"unknown distribution {name!r}")
    return _DISTS[base][1](name, dim)


def _parse_coords(text: str, dim: int) -> np.ndarray:
    parts = [float(v) for v in text.split(",")]
    if len(parts) == 1 and dim > 1:
        parts = parts * dim
    if len(parts) != dim:
        raise UnknownNameError(f"point {text!r} does not match dimension {dim}")
    return np.asarray(parts)


def _dirac_factory(name: str, dim: int) -> ScalarDistribution:
    try:
        coords = _parse_coords(name.split("@", 1)[1], dim)
    except IndexError:
        raise UnknownNameError(f"dirac needs a center, e.g. dirac@0, got {name!r}")
    return Dirac(coords)


def _dirac_deriv_factory(name: str, dim: int) -> ScalarDistribution:
    try:
        rest = name.split("@", 1)[1]
        point_text, alpha_text = rest.split(":", 1)
    except (IndexError, ValueError):
        raise UnknownNameError(
            f"dirac_deriv needs center and orders, e.g. dirac_deriv@0:1, got {name!r}")
    coords = _parse_coords(point_text, dim)
    alpha = tuple(int(a) for a in alpha_text.split(","))
    if len(alpha) == 1 and dim > 1:
        alpha = alpha + (0,) * (dim - 1)
    return DiracDerivative(coords, alpha)


def _regular_factory(name: str, dim: int) -> ScalarDistribution:
    try:
        inner = name.split(":", 1)[1]
    except IndexError:
        raise UnknownNameError(f"regular needs a scalar function name, got {name!r}")
    return Regular(scalar_map(inner, dim))


def _scaled_factory(name: str, dim: int) -> ScalarDistribution:
    # scaled:<scalar fn>:<distribution>, the smooth premultiplier kept unexpanded
    try:
        _, fn_name, dist_name = name.split(":", 2)
    except ValueError:
        raise UnknownNameError(
            f"scaled needs a function and a distribution, e.g. scaled:x:dirac@0, got {name!r}")
    return premultiplied(scalar_map(fn_name, dim), scalar_distribution(dist_name, dim))


register_distribution("dirac", "dirac@<x0[,y0,z0]>", _dirac_factory)
register_distribution("dirac_deriv", "dirac_deriv@<x0>:<orders per axis>", _dirac_deriv_factory)
register_distribution("regular", "regular:<scalar fn>", _regular_factory)
register_distribution("scaled", "scaled:<scalar fn>:<distribution>", _scaled_factory)


# ---------------------------------------------------------------------------
# transports, profiles, diffeos, vector fields
# ---------------------------------------------------------------------------

_TRANSPORTS: dict[str, tuple[str, Callable[[str, Chart], TransportOperator]]] = {
    "identity_cut": ("identity_cut", lambda name, chart: transport_catalog(name, chart)),
    "shear": ("shear:<lambda>", lambda name, chart: transport_catalog(name, chart)),
    "rotation": ("rotation:<theta> (dimension 2)",
                 lambda name, chart: transport_catalog(name, chart)),
}


def register_transport(name: str, schema: str,
                       factory: Callable[[str, Chart], TransportOperator]):
    _TRANSPORTS[name] = (schema, factory)


def transport(name: str, chart: Chart) -> TransportOperator:
    base = name.split(":", 1)[0]
    if base not in _TRANSPORTS:
        raise UnknownNameError(f"unknown transport {name!r}")
    return _TRANSPORTS[base][1](name, chart)


_PROFILES: dict[str, tuple[str, Callable[[str, int], BumpProfile]]] = {
    "bump_sym": ("bump_sym", lambda name, dim: profile_catalog(name, dim)),
    "bump_shift": ("bump_shift:<first moment>", lambda name, dim: profile_catalog(name, dim)),
    "poly4": ("poly4 (C^3 at the boundary, limited regularity)",
              lambda name, dim: profile_catalog(name, dim)),
}


def register_profile(name: str, schema: str, factory: Callable[[str, int], BumpProfile]):
    _PROFILES[name] = (schema, factory)


def profile(name: str, dim: int) -> BumpProfile:
    base = name.split(":", 1)[0]
    if base not in _PROFILES:
        raise UnknownNameError(f"unknown profile {name!r}")
    return _PROFILES[base][1](name, dim)


def _scaling_diffeo(name: str, dim: int) -> Diffeo:
    try:
        k = float(name.split(":", 1)[1])
    except (IndexError, ValueError):
        raise UnknownNameError(f"scaling needs a factor, e.g. scaling:2, got {name!r}")
    if k == 0.0:
        raise UnknownNameError("scaling factor must be nonzero")
    eye = np.eye(dim)
    return Diffeo(lambda p: k * p, lambda q: q / k, lambda p: k * eye, name=name)


def _sinh_diffeo(name: str, dim: int) -> Diffeo:
    if dim != 1:
        raise UnknownNameError("sinh diffeo is only defined in dimension 1")
    return Diffeo(lambda p: np.sinh(p), lambda q: np.arcsinh(q),
                  lambda p: np.array([[math.cosh(p[0])]]), name="sinh")


def _shear_quad_diffeo(name: str, dim: int) -> Diffeo:
    if dim != 2:
        raise UnknownNameError("shear_quad diffeo is only defined in dimension 2")
    return Diffeo(
        lambda p: np.array([p[0] + p[1] ** 2, p[1]]),
        lambda q: np.array([q[0] - q[1] ** 2, q[1]]),
        lambda p: np.array([[1.0, 2.0 * p[1]], [0.0, 1.0]]),
        name="shear_quad")


_DIFFEOS: dict[str, tuple[str, Callable[[str, int], Diffeo]]] = {
    "identity": ("identity", lambda name, dim: Diffeo(
        lambda p: p, lambda q: q, lambda p: np.eye(dim), name="identity")),
    "scaling": ("scaling:<factor>", _scaling_diffeo),
    "sinh": ("sinh (dimension 1, nonlinear)", _sinh_diffeo),
    "shear_quad": ("shear_quad (dimension 2: (x + y^2, y))", _shear_quad_diffeo),
}


def register_diffeo(name: str, schema: str, factory: Callable[[str, int], Diffeo]):
    _DIFFEOS[name] = (schema, factory)


def diffeo(name: str, dim: int) -> Diffeo:
    base = name.split(":", 1)[0]
    if base not in _DIFFEOS:
        raise UnknownNameError(f"unknown diffeomorphism {name!r}")
    return _DIFFEOS[base][1](name, dim)


def _unit_x_field(name: str, chart: Chart) -> VectorFieldFlow:
    comps = [lambda p: 1.0] + [lambda p: 0.0] * (chart.dim - 1)
    return VectorFieldFlow(tuple(comps), chart,
                           partials=lambda p, i, j: 0.0, name="unit_x")


def _linear_x_field(name: str, chart: Chart) -> VectorFieldFlow:
    # x d_x: the flow along the first axis is exponential
    comps = [lambda p: float(p[0])] + [lambda p: 0.0] * (chart.dim - 1)
    return VectorFieldFlow(tuple(comps), chart,
                           partials=lambda p, i, j: 1.0 if i == 0 and j == 0 else 0.0,
                           name="linear_x")


def _rotation_field(name: str, chart: Chart) -> VectorFieldFlow:
    if chart.dim != 2:
        raise UnknownNameError("rotation2 field is only defined in dimension 2")

    def partials(p, i, j):
        if i == 0 and j == 1:
            return -1.0
        if i == 1 and j == 0:
            return 1.0
        return 0.0

    return VectorFieldFlow((lambda p: -float(p[1]), lambda p: float(p[0])),
                           chart, partials=partials, name="rotation2")


_VECTORFIELDS: dict[str, tuple[str, Callable[[str, Chart], VectorFieldFlow]]] = {
    "unit_x": ("unit_x (constant first unit vector)", _unit_x_field),
    "linear_x": ("linear_x (x d_x, exponential flow)", _linear_x_field),
    "rotation2": ("rotation2 (dimension 2: (-y, x))", _rotation_field),
}


def register_vector_field(name: str, schema: str,
                          factory: Callable[[str, Chart], VectorFieldFlow]):
    _VECTORFIELDS[name] = (schema, factory)


def vector_field(name: str, chart: Chart) -> VectorFieldFlow:
    base = name.split(":", 1)[0]
    if base not in _VECTORFIELDS:
        raise UnknownNameError(f"unknown vector field {name!r}")
    return _VECTORFIELDS[base][1](name, chart)


# ---------------------------------------------------------------------------
# listing
# ---------------------------------------------------------------------------


def list_catalogs(include_builtin: bool = True) -> str:
    """Human-readable listing of all registered catalog entries."""
    sections = [
        ("scalar functions", _SCALAR_FNS),
        ("tensor fields", _FIELDS),
        ("distributions", _DISTS),
        ("transports", _TRANSPORTS),
        ("profiles", _PROFILES),
        ("diffeomorphisms", _DIFFEOS),
        ("vector fields", _VECTORFIELDS),
    ]
    lines = []
    for title, registry in sections:
        lines.append(f"{title}:")
        if include_builtin:
            for name in sorted(registry):
                lines.append(f"  {registry[name][0]}")
        lines.append("")
    return "\n".join(lines)
