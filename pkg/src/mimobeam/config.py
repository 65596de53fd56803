"""Run configuration: JSON schema, defaults and problem construction."""

from __future__ import annotations

import copy
import json
from pathlib import Path

import jsonschema
import numpy as np

from .array_model import AngleGrid, ArrayGeometry
from .constraints import ConstModulus, Energy, EnergyPar, ModulusSimilarity
from .objective import PatternSpec
from .solver import Problem, SolverOptions


class ConfigError(ValueError):
    pass


DEFAULT_CONFIG = {
    "array": {"M": 10, "spacing": 1.0},
    "waveform": {"N": 32, "energy": 1.0},
    "pattern": {
        "grid": {"min_deg": -90.0, "max_deg": 90.0, "step_deg": 1.0},
        "mainlobes": [
            {"center_deg": -40.0, "width_deg": 20.0},
            {"center_deg": 0.0, "width_deg": 20.0},
            {"center_deg": 40.0, "width_deg": 20.0},
        ],
        "weights": 1.0,
    },
    "targets": {"angles_deg": [-40.0, 0.0, 40.0]},
    "sidelobe_weight": 0.0,
    "constraint": {"type": "const_modulus", "params": {}},
    "solver": {
        "max_iters": 1000,
        "rel_tol": 1e-8,
        "seed": 0,
        "replicates": 10,
        "psi_bound": "sphere",
    },
}

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_angle = {"type": "number", "minimum": -90, "maximum": 90}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "array": {
            "type": "object", "additionalProperties": False, "required": ["M"],
            "properties": {"M": {"type": "integer", "minimum": 1}, "spacing": _pos},
        },
        "waveform": {
            "type": "object", "additionalProperties": False, "required": ["N"],
            "properties": {"N": {"type": "integer", "minimum": 1}, "energy": _pos},
        },
        "pattern": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "grid": {
                    "type": "object", "additionalProperties": False,
                    "required": ["min_deg", "max_deg", "step_deg"],
                    "properties": {"min_deg": _angle, "max_deg": _angle, "step_deg": _pos},
                },
                "mainlobes": {
                    "type": "array",
                    "items": {
                        "type": "object", "additionalProperties": False,
                        "required": ["center_deg", "width_deg"],
                        "properties": {"center_deg": _angle,
                                       "width_deg": {"type": "number", "minimum": 0}},
                    },
                },
                "weights": {
                    "oneOf": [
                        {"type": "number", "minimum": 0},
                        {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1},
                    ]
                },
            },
        },
        "targets": {
            "type": "object", "additionalProperties": False,
            "properties": {"angles_deg": {"type": "array", "items": _angle}},
        },
        "sidelobe_weight": {"type": "number", "minimum": 0},
        "constraint": {
            "type": "object", "additionalProperties": False, "required": ["type"],
            "properties": {
                "type": {"enum": ["energy", "const_modulus", "energy_par", "modulus_similarity"]},
                "params": {
                    "type": "object", "additionalProperties": False,
                    "properties": {
                        "par": {"type": "number", "minimum": 1},
                        "c_p": _pos,
                        "c_eps": {"type": "number", "minimum": 0},
                        "c_eps_rel": {"type": "number", "minimum": 0, "maximum": 2},
                        "reference": {
                            "oneOf": [
                                {"type": "object", "additionalProperties": False,
                                 "required": ["seed"],
                                 "properties": {"seed": {"type": "integer", "minimum": 0}}},
                                {"type": "array",
                                 "items": {"type": "array", "items": _num,
                                           "minItems": 2, "maxItems": 2}},
                            ]
                        },
                    },
                },
            },
        },
        "solver": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "max_iters": {"type": "integer", "minimum": 1},
                "rel_tol": {"type": "number", "minimum": 0},
                "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
                "replicates": {"type": "integer", "minimum": 1},
                "psi_bound": {"enum": ["sphere", "global"]},
            },
        },
    },
}


def _merge(base, override):
    # lists (mainlobes, targets) replace the defaults wholesale
    out = copy.deepcopy(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _path(err) -> str:
    parts = [str(p) for p in err.absolute_path]
    return "/".join(parts) or "<root>"


def _validate(doc):
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        raise ConfigError("; ".join(f"{_path(e)}: {e.message}" for e in errors))


def resolve_config(user: dict | None = None, **overrides) -> dict:
    """Validate ``user`` against the schema and fill in defaults.

    Keyword overrides are applied to the ``solver`` section (``seed``,
    ``replicates``) after merging.
    """
    user = {} if user is None else user
    if not isinstance(user, dict):
        raise ConfigError("<root>: config must be a JSON object")
    _validate(user)
    cfg = _merge(DEFAULT_CONFIG, user)
    for k, v in overrides.items():
        if v is not None:
            cfg["solver"][k] = v
    _validate(cfg)
    _semantic_checks(cfg)
    return cfg


def _semantic_checks(cfg):
    grid = cfg["pattern"]["grid"]
    if grid["max_deg"] < grid["min_deg"]:
        raise ConfigError("pattern/grid: max_deg must be >= min_deg")
    for i, lobe in enumerate(cfg["pattern"]["mainlobes"]):
        if not grid["min_deg"] <= lobe["center_deg"] <= grid["max_deg"]:
            raise ConfigError(f"pattern/mainlobes/{i}/center_deg: lobe center outside the grid range")
    w = cfg["pattern"]["weights"]
    n = len(_grid_angles(grid))
    if isinstance(w, list) and len(w) != n:
        raise ConfigError(f"pattern/weights: expected {n} per-angle weights, got {len(w)}")
    ctype = cfg["constraint"]["type"]
    params = cfg["constraint"].get("params", {})
    if ctype == "energy_par" and ("par" in params) == ("c_p" in params):
        raise ConfigError("constraint/params: energy_par needs exactly one of 'par' or 'c_p'")
    if ctype == "modulus_similarity" and ("c_eps" in params) == ("c_eps_rel" in params):
        raise ConfigError("constraint/params: modulus_similarity needs exactly one of 'c_eps' or 'c_eps_rel'")
    mn = cfg["array"]["M"] * cfg["waveform"]["N"]
    if ctype == "energy_par" and params.get("par", 1.0) > mn:
        raise ConfigError(f"constraint/params/par: must be <= MN = {mn}")
    ref = params.get("reference")
    if ctype == "modulus_similarity" and isinstance(ref, list) and len(ref) != mn:
        raise ConfigError(f"constraint/params/reference: expected {mn} entries, got {len(ref)}")


def load_config(path, **overrides) -> dict:
    if path is None:
        return resolve_config({}, **overrides)
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        user = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return resolve_config(user, **overrides)


def _grid_angles(grid):
    n = int(np.floor((grid["max_deg"] - grid["min_deg"]) / grid["step_deg"] + 1e-9)) + 1
    return grid["min_deg"] + grid["step_deg"] * np.arange(n)


def build_desired_pattern(cfg: dict) -> PatternSpec:
    """Rectangular mainlobes: ``p = 1`` on each closed interval ``[c - w/2, c + w/2]``."""
    pat = cfg["pattern"]
    angles = _grid_angles(pat["grid"])
    if angles.size == 0:
        raise ConfigError("pattern/grid: empty grid")
    grid = AngleGrid(angles, pat["weights"])
    desired = np.zeros(angles.size)
    for lobe in pat["mainlobes"]:
        half = 0.5 * lobe["width_deg"]
        desired[np.abs(angles - lobe["center_deg"]) <= half + 1e-9] = 1.0
    return PatternSpec(grid, desired, cfg["targets"]["angles_deg"], cfg["sidelobe_weight"])


def build_constraint(cfg: dict):
    M, N = cfg["array"]["M"], cfg["waveform"]["N"]
    mn = M * N
    c_e = float(np.sqrt(cfg["waveform"]["energy"]))
    ctype = cfg["constraint"]["type"]
    params = cfg["constraint"].get("params", {})
    if ctype == "energy":
        return Energy(c_e)
    if ctype == "const_modulus":
        return ConstModulus.from_energy(c_e, mn)
    if ctype == "energy_par":
        try:
            if "par" in params:
                if params["par"] > mn:
                    raise ConfigError(f"constraint/params/par: must be <= MN = {mn}")
                return EnergyPar.from_par(c_e, params["par"], mn)
            c = EnergyPar(c_e, params["c_p"])
            c.validate(mn)
            return c
        except ValueError as exc:
            raise ConfigError(f"constraint/params: {exc}") from exc
    c_d = c_e / np.sqrt(mn)
    ref = params.get("reference", {"seed": 0})
    if isinstance(ref, dict):
        phases = np.random.default_rng(ref["seed"]).uniform(0, 2 * np.pi, mn)
        x_ref = c_d * np.exp(1j * phases)
    else:
        x_ref = np.array([complex(re, im) for re, im in ref])
    c_eps = params["c_eps"] if "c_eps" in params else params["c_eps_rel"] * c_d
    try:
        return ModulusSimilarity(c_d, x_ref, c_eps)
    except ValueError as exc:
        raise ConfigError(f"constraint/params: {exc}") from exc


def build_problem(cfg: dict) -> Problem:
    geometry = ArrayGeometry(cfg["array"]["M"], cfg["array"].get("spacing", 1.0))
    return Problem(geometry, build_desired_pattern(cfg), build_constraint(cfg), cfg["waveform"]["N"])


def solver_options(cfg: dict) -> SolverOptions:
    s = cfg["solver"]
    return SolverOptions(max_iters=s["max_iters"], rel_tol=s["rel_tol"], seed=s["seed"],
                         psi_bound=s["psi_bound"])
