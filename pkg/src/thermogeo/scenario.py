"""Scenario files: parsing, validation, canonical serialization and dispatch.

A scenario is one JSON document::

    {"kind": "axisym", "parameters": {...}, "output_dir": "out"}

Parameters are validated against a per-kind schema before anything runs;
omitted optional parameters are filled with their defaults so that the
canonical form of a scenario is unique.  All written floats use ``%.12e``
and every file ends lines with LF.
"""
from __future__ import annotations

import json
import math
import re
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import analytic, axisym, embedding, frames, geometry, linearized, stress_free
from .errors import ParseError, ValidationError
from .fields import Chart, MetricField, ScalarField
from .thermal_metric import ExpansionLaw

REQUIRED = object()
TOP_LEVEL_KEYS = ("kind", "parameters", "output_dir")


@dataclass(frozen=True)
class Param:
    kind: str  # float, int, str, vec3, bc, float_or_null
    default: Any = REQUIRED
    choices: tuple = ()
    positive: bool = False
    minimum: float | None = None


_BC = ("displacement", "traction")

SCHEMAS: dict[str, dict[str, Param]] = {
    "flatness2d": {
        "omega": Param("str", "beta_log_r", ("beta_log_r", "r_squared", "random_fourier")),
        "chart": Param("str", "polar", ("polar", "cartesian")),
        "mode": Param("str", "analytic", ("analytic", "grid")),
        "beta": Param("float", -0.5),
        "gamma": Param("float", 1.0, positive=True),
        "R0": Param("float", 0.5, positive=True),
        "R1": Param("float", 2.0, positive=True),
        "sector": Param("float", 2 * math.pi, positive=True),
        "n": Param("int", 33, minimum=5),
        "seed": Param("int", 0, minimum=0),
    },
    "flatness3d": {
        "omega": Param("str", "closed_form_3d", ("closed_form_3d", "perturbed_closed_form")),
        "mode": Param("str", "analytic", ("analytic", "grid")),
        "c0": Param("float", 1.0, positive=True),
        "origin": Param("vec3", [0.0, 0.0, 0.0]),
        "lower": Param("float", 0.5),
        "upper": Param("float", 1.5),
        "perturbation": Param("float", 0.01),
        "n": Param("int", 9, minimum=5),
    },
    "inverse_alpha": {
        "profile": Param("str", "linear", ("linear", "reciprocal", "logarithmic")),
        "T0": Param("float", 300.0),
        "T1": Param("float", 400.0),
        "R0": Param("float", 1.0, positive=True),
        "R1": Param("float", 2.0, positive=True),
        "alpha0": Param("float", 1e-3, positive=True),
        "samples": Param("int", 65, minimum=5),
    },
    "embed": {
        "beta": Param("float", -0.5),
        "gamma": Param("float", 1.0, positive=True),
        "R0": Param("float", 1.0, positive=True),
        "R1": Param("float", 2.0, positive=True),
        "samples": Param("int", 1000, minimum=2),
        "angular_samples": Param("int", 64, minimum=3),
    },
    "axisym": {
        "R1": Param("float", positive=True),
        "R2": Param("float", positive=True),
        "mu": Param("float", positive=True),
        "alpha": Param("float"),
        "T0": Param("float", 0.0),
        "k": Param("float", 0.0),
        "T_ref": Param("float", 0.0),
        "bc": Param("str", "traction_free", axisym.BC_MODES),
        "panels": Param("int", axisym.DEFAULT_PANELS, minimum=4),
        "r1": Param("float_or_null", None),
    },
    "linearized": {
        "lambda": Param("float"),
        "mu": Param("float", positive=True),
        "alpha": Param("float"),
        "dT0": Param("float", 1.0),
        "dT1": Param("float", 0.0),
        "dT2": Param("float", 0.0),
        "left": Param("bc", ["displacement", 0.0]),
        "right": Param("bc", ["traction", 0.0]),
        "n": Param("int", 101, minimum=16),
        "length": Param("float", 1.0, positive=True),
        "draws": Param("int", 10, minimum=1),
        "seed": Param("int", 0, minimum=0),
    },
    "decomposition": {
        "vartheta_coeff": Param("float", 0.1),
        "half_width": Param("float", 1.0, positive=True),
        "n": Param("int", 7, minimum=5),
    },
}

# residual name -> default pass threshold, per kind
THRESHOLDS: dict[str, dict[str, float]] = {
    "inverse_alpha": {"zero_stress": 1e-8, "inversion": 1e-8},
    "embed": {"induced_metric": 1e-6},
    "axisym": {"equilibrium": 1e-6, "incompressibility": 1e-8, "boundary": 1e-8},
    "linearized": {"equivalence": 1e-10, "b_contraction": 1e-12, "bc_condition": 1e-6},
    "decomposition": {"ap_riemann": 1e-8, "levi_civita_torsion": 1e-10,
                      "orthonormality": 1e-12},
}


@dataclass(frozen=True)
class Scenario:
    kind: str
    parameters: dict
    output_dir: str
    name: str = "scenario"

    def canonical(self) -> dict:
        return {"kind": self.kind, "output_dir": self.output_dir,
                "parameters": dict(sorted(self.parameters.items()))}


@dataclass
class RunReport:
    scenario: Scenario
    residuals: dict[str, float]
    verdicts: dict[str, str]
    artifact_paths: list[str]
    wall_time_ms: int = 0
    notes: dict[str, Any] = field(default_factory=dict)

    def passed(self) -> bool:
        return all(v not in ("fail", "not_flat") for v in self.verdicts.values())


# ---------------------------------------------------------------------------
# validation


def _line_of(text: str | None, key: str) -> str:
    if not text:
        return ""
    m = re.search(r'"' + re.escape(key) + r'"\s*:', text)
    return f" (line {text.count(chr(10), 0, m.start()) + 1})" if m else ""


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _coerce(name: str, p: Param, v):
    where = f"parameters.{name}"
    if p.kind in ("float", "float_or_null"):
        if v is None and p.kind == "float_or_null":
            return None
        if not _is_number(v):
            raise ValidationError(f"{where}: expected a number, got {v!r}")
        v = float(v)
        if not math.isfinite(v):
            raise ValidationError(f"{where}: must be finite")
    elif p.kind == "int":
        if isinstance(v, bool) or not (isinstance(v, int) or (isinstance(v, float) and v.is_integer())):
            raise ValidationError(f"{where}: expected an integer, got {v!r}")
        v = int(v)
    elif p.kind == "str":
        if not isinstance(v, str):
            raise ValidationError(f"{where}: expected a string, got {v!r}")
        if p.choices and v not in p.choices:
            raise ValidationError(f"{where}: {v!r} is not one of {list(p.choices)}")
    elif p.kind == "vec3":
        if not (isinstance(v, list) and len(v) == 3 and all(_is_number(x) for x in v)):
            raise ValidationError(f"{where}: expected a list of three numbers")
        v = [float(x) for x in v]
    elif p.kind == "bc":
        if not (isinstance(v, list) and len(v) == 2 and v[0] in _BC and _is_number(v[1])):
            raise ValidationError(f"{where}: expected [\"displacement\"|\"traction\", number]")
        v = [v[0], float(v[1])]
    if p.positive and v is not None and not v > 0:
        raise ValidationError(f"{where}: must be positive")
    if p.minimum is not None and v < p.minimum:
        raise ValidationError(f"{where}: must be at least {p.minimum}")
    return v


def _cross_checks(kind: str, prm: dict):
    if "R0" in prm and "R1" in prm and not prm["R0"] < prm["R1"]:
        raise ValidationError("parameters.R1: must exceed R0")
    if kind == "axisym" and not prm["R1"] < prm["R2"]:
        raise ValidationError("parameters.R2: must exceed R1")
    if kind == "flatness3d" and not prm["lower"] < prm["upper"]:
        raise ValidationError("parameters.upper: must exceed lower")
    if kind == "linearized" and not 3 * prm["lambda"] + 2 * prm["mu"] > 0:
        raise ValidationError("parameters.lambda: 3*lambda + 2*mu must be positive")


def validate_scenario(doc: Any, text: str | None = None, name: str = "scenario") -> Scenario:
    """Check a decoded scenario document and fill in defaults.

    Raises
    ------
    ValidationError
        Naming the offending field (and its line when ``text`` is given).
    """
    if not isinstance(doc, dict):
        raise ValidationError("scenario must be a JSON object")
    for key in doc:
        if key not in TOP_LEVEL_KEYS:
            raise ValidationError(f"{key}: unknown top-level key{_line_of(text, key)}")
    kind = doc.get("kind")
    if kind is None:
        raise ValidationError("kind: missing")
    if kind not in SCHEMAS:
        raise ValidationError(f"kind: {kind!r} is not one of {sorted(SCHEMAS)}{_line_of(text, 'kind')}")
    out = doc.get("output_dir", "out")
    if not isinstance(out, str) or not out:
        raise ValidationError("output_dir: expected a non-empty string")
    params = doc.get("parameters", {})
    if not isinstance(params, dict):
        raise ValidationError("parameters: expected an object")
    schema = SCHEMAS[kind]
    for key in params:
        if key not in schema:
            raise ValidationError(f"parameters.{key}: unknown parameter for {kind}"
                                  f"{_line_of(text, key)}")
    filled = {}
    for key, p in schema.items():
        if key in params:
            try:
                filled[key] = _coerce(key, p, params[key])
            except ValidationError as exc:
                raise ValidationError(f"{exc}{_line_of(text, key)}") from None
        elif p.default is REQUIRED:
            raise ValidationError(f"parameters.{key}: missing required parameter for {kind}")
        else:
            filled[key] = p.default
    _cross_checks(kind, filled)
    return Scenario(kind, filled, out, name)


def parse_scenario(path) -> Scenario:
    """Read and validate a scenario file.

    Raises
    ------
    ParseError
        Unreadable file or malformed JSON (with line and column).
    ValidationError
        Unknown, missing or ill-typed keys.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: cannot read ({exc.strerror})") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return validate_scenario(doc, text, path.stem)


def serialize_scenario(sc: Scenario) -> str:
    """Canonical text: sorted keys, two-space indent, defaults filled, trailing LF."""
    return json.dumps(sc.canonical(), indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# deterministic writers


def format_float(x: float) -> str:
    return "%.12e" % x


def _json_value(v, indent: int) -> str:
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(v, dict):
        if not v:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {_json_value(v[k], indent + 1)}" for k in sorted(v)]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(v, (list, tuple)):
        if not v:
            return "[]"
        return "[" + ", ".join(_json_value(x, indent + 1) for x in v) + "]"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if v is None:
        return "null"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return format_float(v) if math.isfinite(v) else json.dumps(str(v))
    return json.dumps(str(v))


def dumps_json(obj) -> str:
    """Deterministic JSON: sorted keys, ``%.12e`` floats, LF newlines."""
    return _json_value(obj, 0) + "\n"


def dumps_csv(columns: dict[str, np.ndarray]) -> str:
    names = list(columns)
    data = np.column_stack([np.asarray(columns[k], dtype=float) for k in names])
    lines = [",".join(names)] + [",".join(format_float(x) for x in row) for row in data]
    return "\n".join(lines) + "\n"


def _write(out: Path, name: str, text: str, paths: list[str]):
    p = out / name
    with open(p, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    paths.append(str(p))


# ---------------------------------------------------------------------------
# runners: each returns (residuals, verdicts, notes, files{name: text})


def _verdicts(kind: str, residuals: dict, tol: float | None) -> dict:
    out = {}
    for name, default in THRESHOLDS.get(kind, {}).items():
        if name in residuals:
            limit = default if tol is None else tol
            out[name] = "pass" if residuals[name] < limit else "fail"
    return out


def _run_flatness2d(prm, tol):
    if prm["chart"] == "polar":
        chart = Chart.box([(prm["R0"], prm["R1"]), (0.0, prm["sector"])], prm["n"], "polar")
    else:
        chart = Chart.box([(prm["R0"], prm["R1"])] * 2, prm["n"])
    if prm["omega"] == "beta_log_r":
        om = stress_free.RadialStressFreeFamily(prm["gamma"], prm["beta"], prm["R0"],
                                                prm["R1"]).omega_field(chart)
    elif prm["omega"] == "r_squared":
        om = analytic.polynomial_radial(chart, 1.0, 2.0)
    else:
        om = analytic.random_fourier_field(chart, np.random.default_rng(prm["seed"]))
    if prm["mode"] == "grid":
        om = ScalarField.from_samples(chart, om.values)
    rep = stress_free.check_stress_free_2d(om, tol)
    notes = {"notes": rep.notes, "tolerance": rep.tolerance}
    if prm["omega"] == "beta_log_r" and prm["beta"] != -1:
        cone = stress_free.cone_from_beta(prm["beta"])
        notes.update(cone_c=cone.c, deficit_angle=cone.deficit_angle,
                     embeddable_in_R3=cone.embeddable_in_R3)
    return rep.residual_norms, {"flatness": rep.verdict}, notes, {}


def _run_flatness3d(prm, tol):
    chart = Chart.box([(prm["lower"], prm["upper"])] * 3, prm["n"])
    om = stress_free.closed_form_3d(prm["c0"], prm["origin"], chart)
    if prm["omega"] == "perturbed_closed_form":
        e = prm["perturbation"]
        om = analytic.add_fields(om, analytic.quadratic_form_field(
            chart, [[0, e, 0], [e, 0, 0], [0, 0, 0]]))
    if prm["mode"] == "grid":
        om = ScalarField.from_samples(chart, om.values)
    rep = stress_free.check_stress_free_3d(om, tol)
    return rep.residual_norms, {"flatness": rep.verdict}, {"tolerance": rep.tolerance}, {}


def _run_inverse_alpha(prm, tol):
    pairs = {p[0]: p[1:] for p in stress_free.closed_form_alpha_pairs(
        prm["T0"], prm["T1"], prm["R0"], prm["R1"], prm["alpha0"])}
    T, dT, d2T, al, dal = pairs[prm["profile"]]
    beta = prm["alpha0"] * prm["R0"] * float(dT(np.array(prm["R0"])))
    inv = stress_free.inverse_alpha_radial(T, dT, beta, prm["R0"], prm["R1"], d2T)
    R = np.linspace(prm["R0"], prm["R1"], prm["samples"])
    Ts = T(R)
    a_closed, a_num = al(Ts), inv.alpha_of_T(Ts)
    chart = Chart.box([(prm["R0"], prm["R1"]), (0.0, 1.0)], (prm["samples"], 5), "polar")
    law = ExpansionLaw.from_alpha(al, prm["T0"], dal)
    zs = stress_free.zero_stress_residual(analytic.radial_field(chart, T, dT, d2T), law).sup_norm()
    res = {"zero_stress": zs,
           "inversion": float(np.max(np.abs(a_num - a_closed) / np.abs(a_closed)))}
    files = {"alpha.csv": dumps_csv({"R": R, "T": Ts, "alpha_closed": a_closed,
                                     "alpha_numeric": a_num})}
    return res, {}, {"beta": beta}, files


def _run_embed(prm, tol):
    b, s = prm["beta"], 0.5 * math.log(prm["gamma"])
    om = lambda r: b * np.log(r) + s  # noqa: E731
    omp = lambda r: b / np.asarray(r, dtype=float)  # noqa: E731
    prof = embedding.embed_radial(om, omp, prm["R0"], prm["R1"], prm["samples"])
    mesh = embedding.export_surface(prof, prm["angular_samples"])
    res = {"induced_metric": embedding.induced_metric_error(prof, om)}
    notes = {"apex_angle_defect": embedding.apex_angle_defect(mesh),
             "vertices": len(mesh.vertices), "faces": len(mesh.faces)}
    if b != -1:
        notes["deficit_angle"] = stress_free.cone_from_beta(b).deficit_angle
    files = {"profile.csv": dumps_csv({"R": prof.R_samples, "rho": prof.rho, "z": prof.z,
                                       "slope": prof.slope}),
             "surface.obj": mesh.to_obj()}
    return res, {}, notes, files


def _run_axisym(prm, tol):
    T0, k = prm["T0"], prm["k"]
    prob = axisym.AxisymProblem(prm["R1"], prm["R2"], lambda R: T0 + k * np.log(R),
                                ExpansionLaw.constant(prm["alpha"], prm["T_ref"]),
                                axisym.NeoHookean2D(prm["mu"]), bc=prm["bc"],
                                T_derivative=lambda R: k / np.asarray(R, dtype=float),
                                r1=prm["r1"], panels=prm["panels"])
    sol = axisym.solve_axisym(prob)
    scale = prm["mu"] / prm["R1"]
    res = {"equilibrium": sol.residual_equilibrium / scale,
           "incompressibility": sol.incompressibility_error,
           "boundary": sol.residual_bc / prm["mu"]}
    notes = {"r1": sol.r1, "p_inner": sol.p0, "newton_iterations": sol.iterations}
    return res, {}, notes, {"solution.csv": dumps_csv(sol.columns())}


def _run_linearized(prm, tol):
    from .acceptance import equivalence_residual

    m = linearized.SVKModuli(prm["lambda"], prm["mu"])
    c0, c1, c2 = prm["dT0"], prm["dT1"], prm["dT2"]
    sol = linearized.solve_linearized_1d(
        m, prm["alpha"], lambda x: c0 + c1 * x + c2 * x ** 2,
        {"left": tuple(prm["left"]), "right": tuple(prm["right"])}, prm["n"], prm["length"])
    rng = np.random.default_rng(prm["seed"])
    chart = Chart.box([(-1, 1)] * 3, 5)
    eq = max(equivalence_residual(rng, chart) for _ in range(prm["draws"]))
    t = linearized.svk_tensors(m)
    res = {"equivalence": eq,
           "b_contraction": float(np.max(np.abs(t.b_contraction()
                                                + (3 * m.lam + 2 * m.mu) / 2 * np.eye(3)))),
           "bc_condition": linearized.bc_condition_check(linearized.svk_energy(m)).residual}
    return res, {}, {}, {"rod.csv": dumps_csv(sol.columns())}


def _run_decomposition(prm, tol):
    w = prm["half_width"]
    chart = Chart.box([(-w, w)] * 3, prm["n"])
    theta = analytic.shifted(analytic.polynomial_radial(chart, prm["vartheta_coeff"], 2.0), 1.0)
    if np.min(theta.values) <= 0:
        raise ValidationError("parameters.vartheta_coeff: vartheta must stay positive")
    G = MetricField.conformal_to(MetricField.identity(chart),
                                 theta.map(np.log, lambda t: 1 / t, lambda t: -1 / t ** 2))
    res = {}
    for form in ("expansion", "orthonormal"):
        b = geometry.curvature(frames.thermal_ap_connection(theta, form), G)
        res[f"ap_riemann_{form}"] = b.sup_norms["riemann"]
        res[f"ap_torsion_{form}"] = b.sup_norms["torsion"]
    res["ap_riemann"] = max(res["ap_riemann_expansion"], res["ap_riemann_orthonormal"])
    lc = geometry.levi_civita(G)
    fr = frames.orthonormal_frame(G)
    nc = frames.noncoordinate_torsion(frames.frame_connection(fr, lc),
                                      frames.commutation_coefficients(fr)).sup_norm()
    res["levi_civita_torsion"] = max(geometry.curvature(lc, G).sup_norms["torsion"], nc)
    res["orthonormality"] = fr.orthonormality_residual(G)
    return res, {}, {}, {}


RUNNERS = {
    "flatness2d": _run_flatness2d, "flatness3d": _run_flatness3d,
    "inverse_alpha": _run_inverse_alpha, "embed": _run_embed, "axisym": _run_axisym,
    "linearized": _run_linearized, "decomposition": _run_decomposition,
}


def run(scenario: Scenario, out_dir=None, tol: float | None = None) -> RunReport:
    """Dispatch ``scenario`` and write its artifacts plus ``report.json``.

    ``out_dir`` overrides ``scenario.output_dir``; ``tol`` replaces every
    default tolerance.  Module errors propagate unchanged.
    """
    start = time.perf_counter()
    out = Path(out_dir if out_dir is not None else scenario.output_dir)
    residuals, verdicts, notes, files = RUNNERS[scenario.kind](scenario.parameters, tol)
    verdicts = {**verdicts, **_verdicts(scenario.kind, residuals, tol)}
    out.mkdir(parents=True, exist_ok=True)
    paths: list[str] = []
    for name in sorted(files):
        _write(out, name, files[name], paths)
    report = {"scenario": scenario.canonical(), "residuals": residuals, "verdicts": verdicts,
              "notes": notes, "artifacts": sorted(files) + ["report.json"],
              "tolerance_override": tol}
    _write(out, "report.json", dumps_json(report), paths)
    wall = int(round(1000 * (time.perf_counter() - start)))
    return RunReport(scenario, residuals, verdicts, paths, wall, notes)
