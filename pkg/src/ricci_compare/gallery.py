"""Builtin model manifolds and JSON scenario parsing."""
from __future__ import annotations

import copy
import json
import math
import os
from dataclasses import dataclass, field

from .comparison import DEFAULT_GRID_SIZE, DEFAULT_HORIZONS, Tolerance, find_best_constant_kappa
from .errors import ConfigError
from .model_functions import KappaProfile, solve_jacobi
from .model_manifold import ModelManifold, RadialProfile
from .rigidity import RadialPotential, build_cheng_model

#: every check name understood by the runner
CHECKS = (
    "ricci_hypothesis",
    "laplacian",
    "riccati",
    "blowup",
    "myers",
    "completeness",
    "ambrose",
    "volume_element",
    "bg_s",
    "bg_r",
    "ball_growth",
    "kappa0",
    "best_kappa",
    "equality",
    "pole_smoothness",
)
#: checks whose outcome never fails a run
INFORMATIONAL = frozenset({"completeness", "ambrose", "best_kappa"})
CHENG_ONLY = frozenset({"equality", "pole_smoothness"})

_EXTENT = {"type": "number", "default": 20.0, "doc": "radial extent of the tables"}

BUILTINS = {
    "euclidean": {
        "description": "flat space, f = r, v = 0",
        "params": {"extent": _EXTENT},
        "n": 3,
        "m": 0,
        "kappa": {"kind": "constant", "value": 0.0},
        "checks": ["ricci_hypothesis", "laplacian", "riccati", "volume_element", "bg_s", "bg_r",
                   "ball_growth", "kappa0", "completeness", "ambrose"],
    },
    "sphere": {
        "description": "round sphere, f = sin r, v = 0",
        "params": {},
        "n": 3,
        "m": 1,
        "kappa": {"kind": "constant", "value": 1.0},
        "checks": ["ricci_hypothesis", "laplacian", "riccati", "volume_element", "bg_s", "bg_r",
                   "myers", "blowup", "ambrose"],
    },
    "hyperbolic": {
        "description": "hyperbolic space, f = sinh r, v = 0",
        "params": {"extent": {"type": "number", "default": 10.0, "doc": "radial extent of the tables"}},
        "n": 3,
        "m": 0,
        "kappa": {"kind": "constant", "value": -1.0},
        "checks": ["ricci_hypothesis", "laplacian", "riccati", "volume_element", "bg_s", "bg_r",
                   "completeness", "ambrose"],
    },
    "gaussian": {
        "description": "Gaussian drift, f = r, v = c r",
        "params": {"c": {"type": "number", "default": 1.0, "doc": "drift slope"}, "extent": _EXTENT},
        "n": 3,
        "m": 0,
        "kappa": {"kind": "best_constant"},
        "checks": ["ricci_hypothesis", "laplacian", "riccati", "volume_element", "bg_s", "bg_r",
                   "ball_growth", "kappa0", "myers", "completeness", "ambrose", "best_kappa"],
    },
    "log-weight": {
        "description": "logarithmic weight, f = r, v = c / (1 + r)",
        "params": {"c": {"type": "number", "default": 1.0, "doc": "weight strength"}, "extent": _EXTENT},
        "n": 3,
        "m": 0,
        "kappa": {"kind": "best_constant"},
        "checks": ["ricci_hypothesis", "laplacian", "riccati", "volume_element", "bg_s", "bg_r",
                   "completeness", "ambrose", "best_kappa"],
    },
    "cheng-model": {
        "description": "maximal-diameter equality model with potential phi = a r^2 + b (m = 1)",
        "params": {
            "a": {"type": "number", "default": 0.05, "doc": "quadratic coefficient of phi"},
            "b": {"type": "number", "default": 0.0, "doc": "phi(0)"},
        },
        "n": 3,
        "m": 1,
        "kappa": {"kind": "constant", "value": 1.0},
        "checks": ["ricci_hypothesis", "laplacian", "riccati", "volume_element", "bg_s", "bg_r",
                   "myers", "blowup", "equality", "pole_smoothness"],
    },
}


def list_builtins():
    """Catalog of builtin manifolds with parameter schemas and defaults."""
    return copy.deepcopy(BUILTINS)


def builtin_config(name):
    """A complete scenario document for the builtin ``name`` with its default checks."""
    if name not in BUILTINS:
        raise ConfigError(f"unknown builtin {name!r}", "manifold.builtin")
    b = BUILTINS[name]
    params = {k: v["default"] for k, v in b["params"].items()}
    return {
        "name": name,
        "manifold": {"builtin": name, "params": params},
        "n": b["n"],
        "m": b["m"],
        "kappa": copy.deepcopy(b["kappa"]),
        "checks": list(b["checks"]),
    }


@dataclass
class Scenario:
    name: str
    manifold: dict
    n: int
    m: float
    kappa: dict
    checks: list
    grid_size: int = DEFAULT_GRID_SIZE
    R: float | None = None
    tolerance: Tolerance = field(default_factory=Tolerance)
    horizons: list = field(default_factory=lambda: list(DEFAULT_HORIZONS))
    ball_pairs: list = field(default_factory=lambda: [[1.0, 2.0], [1.0, 4.0], [2.0, 3.0]])
    allow_inconclusive: bool = False
    output: str | None = None
    base_dir: str = field(default=".", compare=False)

    @classmethod
    def from_dict(cls, doc, base_dir="."):
        if not isinstance(doc, dict):
            raise ConfigError("scenario must be a JSON object")
        known = {"name", "manifold", "n", "m", "kappa", "checks", "grid", "tolerance", "horizons",
                 "ball_pairs", "allow_inconclusive", "output"}
        extra = sorted(set(doc) - known)
        if extra:
            raise ConfigError(f"unknown field(s): {', '.join(extra)}", extra[0])
        for key in ("manifold", "n", "m", "kappa", "checks"):
            if key not in doc:
                raise ConfigError("required field is missing", key)
        n = doc["n"]
        if isinstance(n, bool) or not isinstance(n, int) or n < 2:
            raise ConfigError("must be an integer >= 2", "n")
        m = doc["m"]
        if isinstance(m, bool) or not isinstance(m, (int, float)) or m > 1 or not math.isfinite(m):
            raise ConfigError("must be a number <= 1", "m")
        if m == n:
            raise ConfigError("m must differ from n", "m")
        manifold = _check_manifold(doc["manifold"])
        kappa = _check_kappa(doc["kappa"])
        checks = doc["checks"]
        if not isinstance(checks, list) or not checks:
            raise ConfigError("must be a non-empty list", "checks")
        for i, c in enumerate(checks):
            if c not in CHECKS:
                raise ConfigError(f"unknown check {c!r}; known: {', '.join(CHECKS)}", f"checks[{i}]")
            if c in CHENG_ONLY and manifold.get("builtin") != "cheng-model":
                raise ConfigError(f"check {c!r} needs the cheng-model builtin", f"checks[{i}]")
        if manifold.get("builtin") == "cheng-model" and m != 1:
            raise ConfigError("the cheng-model builtin has m = 1", "m")
        grid = doc.get("grid", {})
        if not isinstance(grid, dict):
            raise ConfigError("must be an object", "grid")
        size = grid.get("size", DEFAULT_GRID_SIZE)
        if isinstance(size, bool) or not isinstance(size, int) or size < 2:
            raise ConfigError("must be an integer >= 2", "grid.size")
        R = grid.get("R")
        if R is not None and not (_is_number(R) and R > 0):
            raise ConfigError("must be a positive number", "grid.R")
        tol = doc.get("tolerance", {})
        if not isinstance(tol, dict):
            raise ConfigError("must be an object", "tolerance")
        for key in ("atol", "rtol"):
            if key in tol and not (_is_number(tol[key]) and tol[key] > 0):
                raise ConfigError("must be a positive number", f"tolerance.{key}")
        tolerance = Tolerance(float(tol.get("atol", 1e-8)), float(tol.get("rtol", 1e-8)))
        horizons = doc.get("horizons", list(DEFAULT_HORIZONS))
        if not isinstance(horizons, list) or len(horizons) < 2 or not all(_is_number(h) and h > 0 for h in horizons):
            raise ConfigError("must list at least two positive numbers", "horizons")
        pairs = doc.get("ball_pairs", [[1.0, 2.0], [1.0, 4.0], [2.0, 3.0]])
        if not isinstance(pairs, list) or not pairs or not all(
            isinstance(p, list) and len(p) == 2 and all(_is_number(x) for x in p) and 0 < p[0] <= p[1] for p in pairs
        ):
            raise ConfigError("must be a list of [r1, r2] with 0 < r1 <= r2", "ball_pairs")
        allow = doc.get("allow_inconclusive", False)
        if not isinstance(allow, bool):
            raise ConfigError("must be true or false", "allow_inconclusive")
        output = doc.get("output")
        if output is not None and not isinstance(output, str):
            raise ConfigError("must be a string", "output")
        return cls(
            name=str(doc.get("name", manifold.get("builtin", "custom"))),
            manifold=manifold,
            n=n,
            m=float(m),
            kappa=kappa,
            checks=list(checks),
            grid_size=size,
            R=None if R is None else float(R),
            tolerance=tolerance,
            horizons=[float(h) for h in horizons],
            ball_pairs=[[float(a), float(b)] for a, b in pairs],
            allow_inconclusive=allow,
            output=output,
            base_dir=base_dir,
        )

    @classmethod
    def load(cls, path):
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
        return cls.from_dict(doc, os.path.dirname(os.path.abspath(path)))

    def to_dict(self):
        doc = {
            "name": self.name,
            "manifold": copy.deepcopy(self.manifold),
            "n": self.n,
            "m": self.m,
            "kappa": copy.deepcopy(self.kappa),
            "checks": list(self.checks),
            "grid": {"size": self.grid_size},
            "tolerance": {"atol": self.tolerance.atol, "rtol": self.tolerance.rtol},
            "horizons": list(self.horizons),
            "ball_pairs": [list(p) for p in self.ball_pairs],
            "allow_inconclusive": self.allow_inconclusive,
        }
        if self.R is not None:
            doc["grid"]["R"] = self.R
        if self.output is not None:
            doc["output"] = self.output
        return doc


def _is_number(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _check_manifold(spec):
    if not isinstance(spec, dict):
        raise ConfigError("must be an object", "manifold")
    if "builtin" in spec:
        name = spec["builtin"]
        if name not in BUILTINS:
            raise ConfigError(f"unknown builtin {name!r}; known: {', '.join(BUILTINS)}", "manifold.builtin")
        schema = BUILTINS[name]["params"]
        params = spec.get("params", {})
        if not isinstance(params, dict):
            raise ConfigError("must be an object", "manifold.params")
        for key, val in params.items():
            if key not in schema:
                raise ConfigError(f"unknown parameter for {name}", f"manifold.params.{key}")
            if not _is_number(val):
                raise ConfigError("must be a number", f"manifold.params.{key}")
        full = {k: float(params.get(k, v["default"])) for k, v in schema.items()}
        if "extent" in full and full["extent"] <= 0:
            raise ConfigError("must be positive", "manifold.params.extent")
        return {"builtin": name, "params": full}
    if "f_csv" in spec:
        out = {"f_csv": str(spec["f_csv"])}
        if spec.get("v_csv") is not None:
            out["v_csv"] = str(spec["v_csv"])
        return out
    if "warping" in spec:
        w = spec["warping"]
        if w not in ("r", "sin", "sinh"):
            raise ConfigError("must be one of r, sin, sinh", "manifold.warping")
        d = spec.get("drift", "zero")
        if d not in ("zero", "constant", "linear", "log"):
            raise ConfigError("must be one of zero, constant, linear, log", "manifold.drift")
        c = spec.get("c", 1.0)
        if not _is_number(c):
            raise ConfigError("must be a number", "manifold.c")
        out = {"warping": w, "drift": d, "c": float(c)}
        if "extent" in spec:
            if not (_is_number(spec["extent"]) and spec["extent"] > 0):
                raise ConfigError("must be a positive number", "manifold.extent")
            out["extent"] = float(spec["extent"])
        return out
    raise ConfigError("needs one of 'builtin', 'warping' or 'f_csv'", "manifold")


def _check_kappa(spec):
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError("must be an object with a 'kind'", "kappa")
    kind = spec["kind"]
    if kind == "best_constant":
        return {"kind": kind}
    try:
        kappa_from_config(spec)
    except ConfigError:
        raise
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"missing or malformed entry {exc}", "kappa") from exc
    except ValueError as exc:
        raise ConfigError(str(exc), "kappa") from exc
    return copy.deepcopy(spec)


def kappa_from_config(spec):
    kind = spec["kind"]
    horizon = spec.get("horizon", math.inf)
    sym = spec.get("symmetric_about")
    if kind == "constant":
        if not _is_number(spec.get("value")):
            raise ConfigError("must be a number", "kappa.value")
        return KappaProfile.constant(spec["value"], horizon, sym)
    if kind == "piecewise_polynomial":
        return KappaProfile.piecewise_polynomial(spec["breakpoints"], spec["coefficients"], spec.get("horizon"), sym)
    if kind == "sampled":
        return KappaProfile.sampled(spec["s"], spec["kappa"], spec.get("horizon"), sym)
    raise ConfigError(f"unknown kappa kind {kind!r}", "kappa.kind")


@dataclass
class Built:
    """Objects a scenario resolves to."""

    mm: ModelManifold
    mf: object
    kappa: KappaProfile
    model: object = None
    best_kappa: float | None = None


def _solve_range(kappa, s_sup):
    if kappa.is_constant:
        k = kappa.params["value"]
        top = 1.001 * s_sup + 1e-3
        if k > 0:
            top = max(top, 1.001 * math.pi / math.sqrt(k))
    else:
        top = 2.0 * s_sup + 1.0
    return min(kappa.horizon, top)


def build_manifold(scn):
    """ModelManifold (and Cheng model, if any) described by ``scn.manifold``."""
    spec = scn.manifold
    if "builtin" in spec:
        name, p = spec["builtin"], spec["params"]
        if name == "cheng-model":
            return None, p
        sel = {
            "euclidean": ("r", "zero", 0.0),
            "sphere": ("sin", "zero", 0.0),
            "hyperbolic": ("sinh", "zero", 0.0),
            "gaussian": ("r", "linear", p.get("c", 1.0)),
            "log-weight": ("r", "log", p.get("c", 1.0)),
        }[name]
        prof = RadialProfile.from_selectors(*sel, label=name)
        return ModelManifold(scn.n, scn.m, prof, extent=p.get("extent")), p
    if "f_csv" in spec:
        base = scn.base_dir
        f_path = os.path.join(base, spec["f_csv"])
        v_path = os.path.join(base, spec["v_csv"]) if "v_csv" in spec else None
        try:
            prof = RadialProfile.from_csv(f_path, v_path, label="custom")
        except OSError as exc:
            raise ConfigError(f"cannot read sample file: {exc}", "manifold.f_csv") from exc
        except ValueError as exc:
            raise ConfigError(str(exc), "manifold.f_csv") from exc
        return ModelManifold(scn.n, scn.m, prof), {}
    prof = RadialProfile.from_selectors(spec["warping"], spec["drift"], spec["c"])
    return ModelManifold(scn.n, scn.m, prof, extent=spec.get("extent")), {}


def build_scenario(scn):
    mm, params = build_manifold(scn)
    if mm is None:
        kappa = kappa_from_config(scn.kappa)
        phi = RadialPotential.quadratic(params["a"], params["b"])
        model = build_cheng_model(scn.n, kappa, phi)
        return Built(model.base, model.mf, kappa, model)
    best = None
    if scn.kappa["kind"] == "best_constant":
        best = find_best_constant_kappa(mm, scn.R, scn.grid_size)
        kappa = KappaProfile.constant(best)
    else:
        kappa = kappa_from_config(scn.kappa)
    mf = solve_jacobi(kappa, _solve_range(kappa, mm.geodesic.s_sup))
    return Built(mm, mf, kappa, None, best)
