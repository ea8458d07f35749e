"""Scenario layer: validated run configurations, named presets, and the
task runners that emit deterministic CSV/JSON artifacts.

Exit-code contract: 0 = success, 2 = the method's verification failed
(e.g. no interior vector in the normal/recession overlap, convexification
rejected), 1 = usage or schema error.  Identical scenario + seed produces
byte-identical artifacts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError

from . import __version__, cones, convexity, fields, geodesics, splitting
from .errors import (
    ConnectionNotFound,
    FailedVerification,
    GeolabError,
    SchemaError,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFICATION = 2


class Scenario(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str
    task: Literal["connect", "convexify", "cone", "splitting", "curvature", "degree"]
    field: str = "hyperboloid"
    seed: int = 0
    tol: float = 1e-10
    residual_tol: float = 1e-6
    pairs: int = 20
    samples: int = 2000
    box: float = 3.0
    level: Optional[float] = None
    directions: int = 256
    body: Optional[str] = None  # cone task: rn-counterexample | capped-cylinder | graph
    chart: Literal["level", "boost"] = "level"
    scan: bool = True
    sigma: str = "soft"


PRESETS: dict[str, dict] = {
    "hyperboloid": {
        "name": "hyperboloid",
        "task": "connect",
        "field": "hyperboloid",
        "pairs": 20,
    },
    "warbled": {
        "name": "warbled",
        "task": "convexify",
        "field": "warbled:soft",
        "samples": 1000,
    },
    "rn-counterexample": {
        "name": "rn-counterexample",
        "task": "cone",
        "body": "rn-counterexample",
    },
    "hyperboloid-cone": {
        "name": "hyperboloid-cone",
        "task": "cone",
        "body": "graph",
        "field": "hyperboloid",
    },
    "capped-cylinder": {
        "name": "capped-cylinder",
        "task": "cone",
        "body": "capped-cylinder",
    },
    "appendix-splitting": {
        "name": "appendix-splitting",
        "task": "splitting",
        "chart": "level",
    },
    "boost": {"name": "boost", "task": "splitting", "chart": "boost"},
    "curvature": {"name": "curvature", "task": "curvature", "samples": 2000},
    "degree": {"name": "degree", "task": "degree", "directions": 256},
}


def get_preset(name: str) -> Scenario:
    if name not in PRESETS:
        raise SchemaError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return Scenario(**PRESETS[name])


def parse_config(source) -> list[Scenario]:
    """Validate a scenario config: a dict, a JSON string, or a path to a
    JSON file holding one scenario object or a list of them.  Unknown keys
    are rejected."""
    if isinstance(source, (str, Path)) and Path(str(source)).is_file():
        source = Path(source).read_text()
    if isinstance(source, str):
        try:
            source = json.loads(source)
        except json.JSONDecodeError as e:
            raise SchemaError(f"invalid JSON: {e}") from e
    items = source if isinstance(source, list) else [source]
    out = []
    for item in items:
        try:
            out.append(Scenario(**item))
        except ValidationError as e:
            raise SchemaError(str(e)) from e
    return out


# ---------------------------------------------------------------------------
# Artifact emission


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


@dataclass
class Artifact:
    name: str
    content: str

    def write(self, out_dir: Path) -> Path:
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / self.name
        path.write_text(self.content)
        return path


@dataclass
class RunOutcome:
    exit_code: int
    report: dict
    artifacts: list = dc_field(default_factory=list)


def _csv_artifact(s: Scenario, stem: str, columns, rows) -> Artifact:
    lines = [
        f"# scenario={s.name}",
        f"# seed={s.seed}",
        f"# version={__version__}",
        ",".join(columns),
    ]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return Artifact(f"{stem}.csv", "\n".join(lines) + "\n")


def _json_artifact(s: Scenario, stem: str, payload: dict) -> Artifact:
    doc = {"scenario": s.name, "seed": s.seed, "version": __version__, **payload}
    return Artifact(f"{stem}.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# Task runners


def _run_connect(s: Scenario) -> RunOutcome:
    u = fields.get_field(s.field)
    rng = np.random.default_rng(s.seed)
    d = u.domain.dim
    rows, residuals, failures = [], [], 0
    for i in range(s.pairs):
        p = rng.uniform(-s.box, s.box, size=d)
        q = rng.uniform(-s.box, s.box, size=d)
        try:
            traj = geodesics.connect(
                u, p, q, residual_tol=s.residual_tol, tol=s.tol, seed=s.seed + i
            )
        except ConnectionNotFound as e:
            failures += 1
            residuals.append(e.best_residual)
            continue
        resid = float(np.linalg.norm(traj.bases[-1] - q))
        residuals.append(resid)
        for t, b in zip(traj.params, traj.bases):
            rows.append([i, float(t), *map(float, b), float(u.value(b))])
    rate = 1.0 - failures / s.pairs
    report = {
        "pairs": s.pairs,
        "success_rate": rate,
        "max_residual": max((r for r in residuals if r is not None), default=0.0),
        "failures": failures,
    }
    code = EXIT_OK if rate >= 0.99 else EXIT_VERIFICATION
    cols = ["pair", "param", *[f"x{j+1}" for j in range(d - 1)], "t", "u"]
    return RunOutcome(
        code,
        report,
        [_csv_artifact(s, f"{s.name}_connect", cols, rows), _json_artifact(s, f"{s.name}_report", report)],
    )


def _run_convexify(s: Scenario) -> RunOutcome:
    u = fields.get_field(s.field)
    try:
        result = convexity.convexify(u, seed=s.seed, n_probes=s.samples, box=s.box)
    except (FailedVerification, GeolabError) as e:
        report = {"error": type(e).__name__, "message": str(e)}
        return RunOutcome(
            EXIT_VERIFICATION, report, [_json_artifact(s, f"{s.name}_error", report)]
        )
    rep = result.report.to_dict()
    rho_rows = [
        [float(a), float(r), float(result.rho.rho_prime(a))]
        for a, r in zip(result.rho.grid[::40], result.rho.rho_vals[::40])
    ]
    arts = [
        _csv_artifact(s, f"{s.name}_mu", ["level", "mu"], rep["mu_table"]),
        _csv_artifact(s, f"{s.name}_rho", ["a", "rho", "rho_prime"], rho_rows),
        _json_artifact(s, f"{s.name}_report", rep),
    ]
    return RunOutcome(EXIT_OK, rep, arts)


def _cone_body(s: Scenario):
    if s.body == "rn-counterexample":
        return cones.rn_counterexample_body()
    if s.body == "capped-cylinder":
        return cones.capped_cylinder_body()
    if s.body == "graph" or s.body is None:
        u = fields.get_field(s.field)
        surf = fields.GraphSurface(u)
        g = np.linspace(-s.box, s.box, 9)
        probes = np.stack(np.meshgrid(*[g] * u.domain.dim, indexing="ij"), axis=-1)
        return surf, probes.reshape(-1, u.domain.dim)
    raise SchemaError(f"unknown cone body {s.body!r}")


def _run_cone(s: Scenario) -> RunOutcome:
    body = _cone_body(s)
    if isinstance(body, tuple):
        R_hat, N_hat = cones.recession_normal(*body)
    else:
        R_hat, N_hat = cones.recession_normal(body)
    v0res = cones.find_v0(N_hat, R_hat)
    report = {
        "v0": None if v0res.v0 is None else list(map(float, v0res.v0)),
        "certificate": None
        if v0res.certificate is None
        else list(map(float, v0res.certificate)),
        "normal_cone": cones.cone_predicates(N_hat),
        "recession_cone": cones.cone_predicates(R_hat),
    }
    if isinstance(body, tuple) and v0res.v0 is not None:
        # spot-check the height function along a few geodesics
        surf, _ = body
        u = surf.u
        rng = np.random.default_rng(s.seed)
        trajs = []
        for _ in range(10):
            p0 = rng.uniform(-1.5, 1.5, size=u.domain.dim)
            v = rng.normal(size=u.domain.dim)
            v /= np.linalg.norm(v)
            trajs.append(geodesics.integrate(u, geodesics.GeodesicState(p0, v), 4.0, s.tol))
        conv = convexity.geodesic_convexity_report(
            lambda b: surf.height(b, v0res.v0), trajs
        )
        report["height_function"] = {
            "min_second_difference": conv.min_second_difference,
            "classification": conv.classification,
        }
    code = EXIT_OK if v0res.v0 is not None else EXIT_VERIFICATION
    return RunOutcome(code, report, [_json_artifact(s, f"{s.name}_cone", report)])


def _run_splitting(s: Scenario) -> RunOutcome:
    if s.chart == "boost":
        chart = splitting.boost_chart()
        xs = np.linspace(-s.box, s.box, 41)
        taus = np.linspace(-3.0, 3.0, 13)
        rows = [
            [float(x), float(t), float(chart.A(x, t)), float(chart.beta(x, t))]
            for x in xs
            for t in taus
        ]
        scan = splitting.bound_scan(chart, (-s.box, s.box), (-3.0, 3.0), grid=15)
        report = {
            "chart": "boost",
            "A_inf": scan.A_inf,
            "A_sup": scan.A_sup,
            "beta_inf": scan.beta_inf,
            "beta_sup": scan.beta_sup,
            "flags": scan.flags,
        }
        arts = [
            _csv_artifact(s, f"{s.name}_boost", ["x", "tau", "A", "beta"], rows),
            _json_artifact(s, f"{s.name}_scan", report),
        ]
        return RunOutcome(EXIT_OK, report, arts)

    rows = []
    cross = 0.0
    for i, x0 in enumerate([0.0, 0.5, 1.0, 2.0]):
        res = splitting.level_flow(x0, (-6.0, 6.0), tol=s.tol)
        cross = max(cross, res.cross_max)
        for row in res.rows():
            rows.append([i, *map(float, row)])
    report = {"chart": "level-flow", "trajectories": 4, "max_cross_term": cross}
    if s.scan:
        chart = splitting.level_chart(tol=max(s.tol, 1e-9))
        scan = splitting.bound_scan(chart, (0.0, 2.0), (-3.0, 3.0), grid=9)
        report.update(
            {
                "A_inf": scan.A_inf,
                "A_sup": scan.A_sup,
                "beta_inf": scan.beta_inf,
                "beta_sup": scan.beta_sup,
                "flags": scan.flags,
            }
        )
    arts = [
        _csv_artifact(
            s,
            f"{s.name}_level",
            ["trajectory", "tau", "x1", "x2", "t", "beta", "A"],
            rows,
        ),
        _json_artifact(s, f"{s.name}_scan", report),
    ]
    return RunOutcome(EXIT_OK, report, arts)


def _run_curvature(s: Scenario) -> RunOutcome:
    u = fields.get_field(s.field)
    rng = np.random.default_rng(s.seed)
    d = u.domain.dim
    rows = []
    violations = 0
    for _ in range(s.samples):
        p = rng.uniform(-s.box, s.box, size=d)
        x = rng.normal(size=d)
        y = rng.normal(size=d)
        try:
            R, plane = fields.graph_curvature(u, p, x, y)
        except GeolabError:
            continue
        if R < -1e-9:
            violations += 1
        rows.append([*map(float, p), float(R), plane])
    report = {"samples": len(rows), "negative_R": violations}
    code = EXIT_OK if violations == 0 else EXIT_VERIFICATION
    cols = [*[f"p{j+1}" for j in range(d)], "R", "plane_type"]
    return RunOutcome(
        code,
        report,
        [_csv_artifact(s, f"{s.name}_curvature", cols, rows), _json_artifact(s, f"{s.name}_report", report)],
    )


def _run_degree(s: Scenario) -> RunOutcome:
    u = fields.get_field(s.field)
    p_min, u_min = convexity._find_minimizer(u)
    a = s.level if s.level is not None else u_min + 0.2
    deg = geodesics.winding_degree(u, p_min, a, m=s.directions, tol=s.tol)
    report = {
        "level": float(a),
        "directions": s.directions,
        "degree": int(deg),
        "minimizer": list(map(float, p_min)),
    }
    code = EXIT_OK if deg == 1 else EXIT_VERIFICATION
    return RunOutcome(code, report, [_json_artifact(s, f"{s.name}_degree", report)])


_RUNNERS = {
    "connect": _run_connect,
    "convexify": _run_convexify,
    "cone": _run_cone,
    "splitting": _run_splitting,
    "curvature": _run_curvature,
    "degree": _run_degree,
}


def run_scenario(s: Scenario, out_dir=None) -> RunOutcome:
    """Run one scenario; artifacts are written under out_dir when given,
    and always returned inline on the outcome."""
    outcome = _RUNNERS[s.task](s)
    if out_dir is not None:
        for art in outcome.artifacts:
            art.write(Path(out_dir))
    return outcome
