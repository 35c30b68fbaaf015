"""Experiment configs, runners, and deterministic artifact writing.

A config is a JSON object with an ``experiment`` kind plus catalog references
and numeric knobs.  Running it produces three artifacts in the output
directory: ``results.csv`` (fixed column contract per kind), ``report.json``
(validated against the shipped schema), and ``summary.txt``.  All outputs are
deterministic for a fixed config, seed, and package version: summation orders
are fixed and no wall-clock data is recorded.
"""

from __future__ import annotations

import csv
import io
import json
import platform
import sys
from pathlib import Path

import numpy as np

from . import __version__, catalogs, quadrature
from .asymptotics import (association_test, basis_dependence,
                          scaling_estimate, schwartz_commutator)
from .calculus import mu_hat, pullback_field, pushforward_field
from .distributions import Regular, TensorDistribution, scalar_distribution_field
from .embedding import (BasicSpaceElement, embed_iota_distribution,
                        embed_iota_field, embed_sigma)
from .errors import ConfigError
from .geometry import Chart, as_point, smooth_const
from .mollifiers import make_mollifier
from .tensors import BasisChange
from .validation import load_report_schema, validate_schema

EXPERIMENT_KINDS = ("embed", "commutator", "basis", "scaling", "association",
                    "lie_check", "diffeo_check", "chart_check")

_CSV_COLUMNS = {
    "scaling": ["eps", "norm", "grid_norm"],
    "embed": ["eps", "norm", "diff"],
    "commutator": ["eps", "norm", "weak_gap"],
    "basis": ["eps", "coordwise_norm", "transport_norm"],
    "association": ["eps", "weak_norm"],
    "lie_check": ["case", "diff_norm"],
    "diffeo_check": ["triple", "diff_norm", "rel_diff"],
    "chart_check": ["point", "diff_norm", "rel_diff"],
}


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------


def _require(config: dict, key: str, kinds=None):
    if key not in config:
        raise ConfigError(f"config is missing the key {key!r}")
    value = config[key]
    if kinds is not None and not isinstance(value, kinds):
        raise ConfigError(f"config key {key!r} has the wrong type")
    return value


def parse_chart(config: dict) -> Chart:
    spec = _require(config, "chart", dict)
    dim = _require(spec, "dim", int)
    lo = _require(spec, "lo", list)
    hi = _require(spec, "hi", list)
    try:
        return Chart(dim, np.asarray(lo, dtype=float), np.asarray(hi, dtype=float))
    except ValueError as exc:
        raise ConfigError(str(exc))


def parse_eps_grid(config: dict, key: str = "eps_grid") -> list[float]:
    grid = _require(config, key, list)
    try:
        grid = [float(e) for e in grid]
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be a list of numbers")
    if not all(a > b > 0.0 for a, b in zip(grid, grid[1:])) or not grid or grid[-1] <= 0:
        raise ConfigError(f"{key} must be strictly decreasing and positive")
    return grid


def build_tensor_distribution(spec: dict, dim: int) -> TensorDistribution:
    dist = catalogs.scalar_distribution(_require(spec, "distribution", str), dim)
    basis_name = spec.get("basis_field")
    if basis_name is None:
        return scalar_distribution_field(dist, dim)
    return TensorDistribution(
        catalogs.tensor_field(basis_name, dim).ttype,
        ((dist, catalogs.tensor_field(basis_name, dim)),))


def build_element(spec: dict, dim: int) -> BasicSpaceElement:
    """Element recipe: {embed: sigma | iota, field: name} or
    {embed: iota, distribution: name[, basis_field: name]}."""
    embed = _require(spec, "embed", str)
    if embed == "sigma":
        return embed_sigma(catalogs.tensor_field(_require(spec, "field", str), dim))
    if embed == "iota":
        if "field" in spec:
            return embed_iota_field(catalogs.tensor_field(spec["field"], dim))
        return embed_iota_distribution(build_tensor_distribution(spec, dim))
    raise ConfigError(f"unknown embedding {embed!r} (use sigma or iota)")


# ---------------------------------------------------------------------------
# checks
# ---------------------------------------------------------------------------


def _profile_info(profile) -> dict:
    return {
        "name": profile.name,
        "symmetric": profile.symmetric,
        "c_infinity": profile.c_infinity,
        "first_moment": [float(v) for v in profile.first_moment],
        "second_moment": [[float(v) for v in row] for row in profile.second_moment],
    }


# Asymptotic verdicts say nothing about how the transport slot would be
# scaled; every eps sweep holds it fixed and the reports state that.
FIXED_TRANSPORT_NOTE = "transport slot held fixed across the eps grid"


def _check(name: str, value, passed: bool, target=None, tolerance=None) -> dict:
    out = {"name": name, "value": _json_num(value), "passed": bool(passed)}
    if target is not None:
        out["target"] = _json_num(target)
    if tolerance is not None:
        out["tolerance"] = _json_num(tolerance)
    return out


def _json_num(v):
    if isinstance(v, (np.floating, np.integer)):
        v = v.item()
    if isinstance(v, float) and not np.isfinite(v):
        return None
    return v


def _band_check(name, value, target, tol):
    return _check(name, value, abs(value - target) <= tol, target, tol)


# ---------------------------------------------------------------------------
# runners per kind
# ---------------------------------------------------------------------------


def _run_scaling(config, chart, nodes, rng):
    dim = chart.dim
    element = build_element(_require(config, "element", dict), dim)
    transport = catalogs.transport(_require(config, "transport", str), chart)
    profile = catalogs.profile(_require(config, "profile", str), dim)
    point = as_point(_require(config, "point", list))
    eps_grid = parse_eps_grid(config)
    p_grid = None
    if config.get("p_grid"):
        p_grid = [as_point(pp) for pp in config["p_grid"]]
    report = scaling_estimate(element, point, transport, profile, eps_grid, chart,
                              nodes=nodes, p_grid=p_grid,
                              q_max=int(config.get("q_max", 4)))
    rows = []
    for k, eps in enumerate(report.eps_grid):
        rows.append({"eps": eps, "norm": report.norms[k],
                     "grid_norm": "" if report.grid_norms is None else report.grid_norms[k]})
    checks = []
    declared = config.get("checks", {})
    if "slope" in declared:
        checks.append(_band_check("slope", report.fitted_slope,
                                  float(declared["slope"]),
                                  float(declared.get("slope_tol", 0.05))))
    if "verdict" in declared:
        checks.append(_check("verdict", report.verdict,
                             report.verdict == declared["verdict"], declared["verdict"]))
    if "all_norms_equal" in declared:
        equal = len(set(report.norms)) == 1
        checks.append(_check("all_norms_equal", equal, equal == bool(declared["all_norms_equal"])))
    results = {"scaling": report.to_dict(), "profile": _profile_info(profile),
               "note": FIXED_TRANSPORT_NOTE}
    return rows, results, checks


def _run_embed(config, chart, nodes, rng):
    dim = chart.dim
    element = build_element(_require(config, "element", dict), dim)
    reference = None
    if config.get("reference"):
        reference = build_element(config["reference"], dim)
    transport = catalogs.transport(_require(config, "transport", str), chart)
    profile = catalogs.profile(_require(config, "profile", str), dim)
    point = as_point(_require(config, "point", list))
    eps_grid = parse_eps_grid(config)
    rows = []
    max_diff = 0.0
    for eps in eps_grid:
        omega = make_mollifier(profile, point, eps, chart, nodes)
        value = element(omega, point, transport)
        diff = ""
        if reference is not None:
            other = reference(omega, point, transport)
            diff = (value - other).norm_inf()
            max_diff = max(max_diff, diff)
        rows.append({"eps": eps, "norm": value.norm_inf(), "diff": diff})
    checks = []
    declared = config.get("checks", {})
    if "max_diff" in declared:
        checks.append(_check("max_diff", max_diff, max_diff <= float(declared["max_diff"]),
                             tolerance=float(declared["max_diff"])))
    results = {"max_diff": _json_num(max_diff) if reference is not None else None,
               "profile": _profile_info(profile)}
    return rows, results, checks


def _test_density(config, chart, nodes):
    spec = _require(config, "test_density", dict)
    prof = catalogs.profile(_require(spec, "profile", str), chart.dim)
    center = as_point(_require(spec, "center", list))
    width = float(_require(spec, "width", (int, float)))
    return make_mollifier(prof, center, width, chart, nodes)


def _run_commutator(config, chart, nodes, rng):
    dim = chart.dim
    f = catalogs.scalar_map(_require(config, "f", str), dim)
    u = catalogs.scalar_distribution(_require(config, "u", str), dim)
    transport = catalogs.transport(_require(config, "transport", str), chart)
    profile = catalogs.profile(_require(config, "profile", str), dim)
    point = as_point(_require(config, "point", list))
    eps_grid = parse_eps_grid(config)
    psi = _test_density(config, chart, nodes)
    result = schwartz_commutator(f, u, point, transport, profile, eps_grid,
                                 psi, chart, nodes)

    # per-eps pointwise gap for the CSV rows
    from .embedding import pointwise_product
    from .distributions import premultiplied
    t_f = embed_iota_distribution(scalar_distribution_field(Regular(f), dim))
    t_u = embed_iota_distribution(scalar_distribution_field(u, dim))
    t_fu = embed_iota_distribution(scalar_distribution_field(premultiplied(f, u), dim))
    gap = pointwise_product(t_f, t_u) - t_fu
    rows = []
    for k, eps in enumerate(eps_grid):
        omega = make_mollifier(profile, point, eps, chart, nodes)
        rows.append({"eps": eps, "norm": abs(gap(omega, point, transport).item()),
                     "weak_gap": result.weak_gaps[k]})

    checks = []
    declared = config.get("checks", {})
    if "pointwise_gap" in declared:
        target = float(declared["pointwise_gap"])
        rel = float(declared.get("pointwise_rel_tol", 0.02))
        ok = abs(result.pointwise_gap - target) <= rel * abs(target)
        checks.append(_check("pointwise_gap", result.pointwise_gap, ok, target, rel))
    if declared.get("pointwise_nonzero"):
        checks.append(_check("pointwise_nonzero", result.pointwise_gap,
                             abs(result.pointwise_gap) > 1e-6))
    if "weak_slope_min" in declared:
        need = float(declared["weak_slope_min"])
        checks.append(_check("weak_slope", result.weak_slope,
                             result.weak_slope >= need, need))
    results = {"commutator": result.to_dict(), "profile": _profile_info(profile),
               "note": FIXED_TRANSPORT_NOTE}
    return rows, results, checks


def _run_basis(config, chart, nodes, rng):
    dim = chart.dim
    u = build_tensor_distribution(_require(config, "u", dict), dim)
    coeff_names = _require(config, "basis_change", list)
    coeffs = tuple(tuple(catalogs.scalar_map(n, dim) for n in row) for row in coeff_names)
    bc = BasisChange(coeffs)
    transport = catalogs.transport(_require(config, "transport", str), chart)
    profile = catalogs.profile(_require(config, "profile", str), dim)
    point = as_point(_require(config, "point", list))
    eps = float(_require(config, "eps", (int, float)))
    omega = make_mollifier(profile, point, eps, chart, nodes)
    coord_diff = basis_dependence(u, bc, omega, point, transport, via_transport=False)
    trans_diff = basis_dependence(u, bc, omega, point, transport, via_transport=True)
    rows = [{"eps": eps, "coordwise_norm": coord_diff.norm_inf(),
             "transport_norm": trans_diff.norm_inf()}]
    checks = []
    declared = config.get("checks", {})
    if "coordwise_gap" in declared:
        target = float(declared["coordwise_gap"])
        rel = float(declared.get("rel_tol", 0.02))
        ok = abs(coord_diff.norm_inf() - target) <= rel * abs(target)
        checks.append(_check("coordwise_gap", coord_diff.norm_inf(), ok, target, rel))
    if "transport_max" in declared:
        tol = float(declared["transport_max"])
        checks.append(_check("transport_gap", trans_diff.norm_inf(),
                             trans_diff.norm_inf() <= tol, tolerance=tol))
    results = {"coordwise_norm": coord_diff.norm_inf(),
               "transport_norm": trans_diff.norm_inf(),
               "profile": _profile_info(profile)}
    return rows, results, checks


def _run_association(config, chart, nodes, rng):
    dim = chart.dim
    t1 = build_element(_require(config, "element1", dict), dim)
    t2 = build_element(_require(config, "element2", dict), dim)
    transport = catalogs.transport(_require(config, "transport", str), chart)
    profile = catalogs.profile(_require(config, "profile", str), dim)
    eps_grid = parse_eps_grid(config)
    psi = _test_density(config, chart, nodes)
    report = association_test(t1, t2, psi, profile, transport, eps_grid, chart, nodes)
    rows = [{"eps": eps, "weak_norm": report.norms[k]}
            for k, eps in enumerate(report.eps_grid)]
    checks = []
    declared = config.get("checks", {})
    if "slope" in declared:
        checks.append(_band_check("slope", report.fitted_slope, float(declared["slope"]),
                                  float(declared.get("slope_tol", 0.2))))
    if "slope_min" in declared:
        need = float(declared["slope_min"])
        checks.append(_check("slope_min", report.fitted_slope,
                             report.fitted_slope >= need, need))
    results = {"association": report.to_dict(), "profile": _profile_info(profile),
               "note": FIXED_TRANSPORT_NOTE}
    return rows, results, checks


def _run_lie_check(config, chart, nodes, rng):
    import dataclasses

    from .calculus import lie_hat
    from .distributions import lie_derivative_distribution
    dim = chart.dim
    transport = catalogs.transport(_require(config, "transport", str), chart)
    profile = catalogs.profile(_require(config, "profile", str), dim)
    point = as_point(_require(config, "point", list))
    eps = float(_require(config, "eps", (int, float)))
    tau_lie = float(config.get("tau_lie", 1e-3))
    h_flow = config.get("h_flow")
    omega = make_mollifier(profile, point, eps, chart, nodes)
    rows = []
    worst = 0.0
    for case in _require(config, "cases", list):
        x_field = catalogs.vector_field(_require(case, "vectorfield", str), chart)
        if h_flow is not None:
            x_field = dataclasses.replace(x_field, h_flow=float(h_flow))
        u = build_tensor_distribution(case, dim)
        left = lie_hat(x_field, embed_iota_distribution(u), tau_lie)(omega, point, transport)
        right = embed_iota_distribution(
            lie_derivative_distribution(u, x_field))(omega, point, transport)
        diff = (left - right).norm_inf()
        worst = max(worst, diff)
        rows.append({"case": f"{case['vectorfield']}|{case.get('distribution')}"
                             f"|{case.get('basis_field', '')}",
                     "diff_norm": diff})
    checks = []
    declared = config.get("checks", {})
    if "max_diff" in declared:
        tol = float(declared["max_diff"])
        checks.append(_check("max_diff", worst, worst <= tol, tolerance=tol))
    budget = {"central_difference": tau_lie ** 2, "quadrature": 1e-10,
              "tau_lie": tau_lie}
    results = {"max_diff": worst, "tolerance_budget": budget,
               "profile": _profile_info(profile)}
    return rows, results, checks


def _random_triple(rng, chart, profile, transport, nodes, eps_range=(0.05, 0.1)):
    inner_lo, inner_hi = chart.shrink(0.4)
    p = inner_lo + rng.random(chart.dim) * (inner_hi - inner_lo)
    center = inner_lo + rng.random(chart.dim) * (inner_hi - inner_lo)
    eps = eps_range[0] + rng.random() * (eps_range[1] - eps_range[0])
    omega = make_mollifier(profile, center, eps, chart, nodes)
    return omega, p, transport


def _run_diffeo_check(config, chart, nodes, rng):
    dim = chart.dim
    mu = catalogs.diffeo(_require(config, "diffeo", str), dim)
    codomain = parse_chart({"chart": _require(config, "codomain_chart", dict)})
    transport = catalogs.transport(_require(config, "transport", str), chart)
    profile = catalogs.profile(_require(config, "profile", str), dim)
    g = catalogs.scalar_map(_require(config, "g", str), dim)
    e = catalogs.tensor_field(_require(config, "basis_field", str), dim)
    n_triples = int(config.get("n_triples", 10))

    u_n = TensorDistribution(e.ttype, ((Regular(g), e),))
    left_el = mu_hat(mu, embed_iota_distribution(u_n), codomain)
    pulled = pullback_field(mu, e.scale_by(g))
    u_m = TensorDistribution(pulled.ttype, ((Regular(smooth_const(1.0)), pulled),))
    right_el = embed_iota_distribution(u_m)

    rows = []
    worst = 0.0
    for k in range(n_triples):
        omega, p, transport_k = _random_triple(rng, chart, profile, transport, nodes)
        lhs = left_el(omega, p, transport_k)
        rhs = right_el(omega, p, transport_k)
        diff = (lhs - rhs).norm_inf()
        scale = max(lhs.norm_inf(), rhs.norm_inf(), 1e-30)
        rel = diff / scale
        worst = max(worst, rel)
        rows.append({"triple": k, "diff_norm": diff, "rel_diff": rel})
    checks = []
    declared = config.get("checks", {})
    if "max_rel_diff" in declared:
        tol = float(declared["max_rel_diff"])
        checks.append(_check("max_rel_diff", worst, worst <= tol, tolerance=tol))
    return rows, {"max_rel_diff": worst, "profile": _profile_info(profile)}, checks


def _run_chart_check(config, chart, nodes, rng):
    dim = chart.dim
    mu = catalogs.diffeo(_require(config, "diffeo", str), dim)
    codomain = parse_chart({"chart": _require(config, "codomain_chart", dict)})
    transport = catalogs.transport(_require(config, "transport", str), chart)
    profile = catalogs.profile(_require(config, "profile", str), dim)
    g = catalogs.tensor_field(_require(config, "field", str), dim)
    point = as_point(_require(config, "point", list))
    eps = float(_require(config, "eps", (int, float)))
    omega = make_mollifier(profile, point, eps, chart, nodes)

    base_value = embed_iota_field(g)(omega, point, transport)
    pushed_field = pushforward_field(mu, g)
    via_image = mu_hat(mu, embed_iota_field(pushed_field), codomain)(omega, point, transport)
    diff = (base_value - via_image).norm_inf()
    scale = max(base_value.norm_inf(), via_image.norm_inf(), 1e-30)
    rel = diff / scale
    rows = [{"point": "|".join(_fmt(float(c)) for c in point),
             "diff_norm": diff, "rel_diff": rel}]
    checks = []
    declared = config.get("checks", {})
    if "max_rel_diff" in declared:
        tol = float(declared["max_rel_diff"])
        checks.append(_check("max_rel_diff", rel, rel <= tol, tolerance=tol))
    return rows, {"rel_diff": rel, "profile": _profile_info(profile)}, checks


_RUNNERS = {
    "scaling": _run_scaling,
    "embed": _run_embed,
    "commutator": _run_commutator,
    "basis": _run_basis,
    "association": _run_association,
    "lie_check": _run_lie_check,
    "diffeo_check": _run_diffeo_check,
    "chart_check": _run_chart_check,
}


# ---------------------------------------------------------------------------
# top-level run
# ---------------------------------------------------------------------------


def load_config(path: str | Path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}")
    try:
        config = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")
    if not isinstance(config, dict):
        raise ConfigError("config must be a JSON object")
    return config


def validate_config(config: dict):
    kind = _require(config, "experiment", str)
    if kind not in EXPERIMENT_KINDS:
        raise ConfigError(f"unknown experiment kind {kind!r}")
    parse_chart(config)
    return kind


def run_experiment(config: dict, quad_nodes: int | None = None,
                   seed: int | None = None) -> tuple[dict, list[dict]]:
    """Execute one experiment; returns the report dictionary and CSV rows."""
    kind = validate_config(config)
    chart = parse_chart(config)
    nodes = quad_nodes if quad_nodes is not None else config.get("quad_nodes")
    if nodes is not None:
        nodes = int(nodes)
    used_seed = int(seed if seed is not None else config.get("seed", 0))
    rng = np.random.default_rng(used_seed)
    rows, results, checks = _RUNNERS[kind](config, chart, nodes, rng)
    passed = all(c["passed"] for c in checks) if checks else True
    report = {
        "experiment": kind,
        "config": config,
        "results": results,
        "checks": checks,
        "passed": passed,
        "metadata": {
            "package_version": __version__,
            "seed": used_seed,
            "quad_nodes": nodes if nodes is not None else quadrature.default_nodes(chart.dim),
            "python": platform.python_version(),
            "numpy": np.__version__,
            "platform": sys.platform,
        },
    }
    errors = validate_schema(report, load_report_schema())
    if errors:
        raise ConfigError("internal error: report violates the shipped schema: "
                          + "; ".join(errors))
    return report, rows


def render_csv(kind: str, rows: list[dict]) -> str:
    columns = _CSV_COLUMNS[kind]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row.get(c, "")) for c in columns])
    return buf.getvalue()


def render_summary(report: dict) -> str:
    lines = [f"experiment: {report['experiment']}",
             f"passed: {'yes' if report['passed'] else 'no'}"]
    for check in report["checks"]:
        status = "PASS" if check["passed"] else "FAIL"
        extra = ""
        if "target" in check:
            extra += f" target={check['target']}"
        if "tolerance" in check:
            extra += f" tol={check['tolerance']}"
        lines.append(f"[{status}] {check['name']}: value={check['value']}{extra}")
    if not report["checks"]:
        lines.append("(no declared checks)")
    return "\n".join(lines) + "\n"


def write_artifacts(report: dict, rows: list[dict], out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "results.csv").write_text(render_csv(report["experiment"], rows))
    (out / "report.json").write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n")
    (out / "summary.txt").write_text(render_summary(report))
    return out


def run(config_path: str | Path, out_dir: str | Path,
        quad_nodes: int | None = None, seed: int | None = None) -> dict:
    """Load, execute, and write artifacts; returns the report."""
    config = load_config(config_path)
    report, rows = run_experiment(config, quad_nodes, seed)
    write_artifacts(report, rows, out_dir)
    return report
