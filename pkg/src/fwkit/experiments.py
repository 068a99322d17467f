"""Experiment configs, instance builders and the built-in catalog.

A config is a flat mapping of dotted keys read from ``key = value`` lines::

    # comments start with '#'
    runs = fw, afw
    max_iters = 500
    step.kind = linesearch
    objective.kind = quadratic
    objective.target = face
    region.kind = simplex
    region.n = 20
    run.afw.step.kind = short

Every built-in experiment is such a config; a config file may start from one
with ``experiment = <name>`` and override any key.
"""
from __future__ import annotations

import difflib
import inspect
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import deterministic as det
from . import stochastic as sto
from ._plumbing import RunConfig
from .applications import DOptimal, dopt_design, meb_coreset
from .core import ConfigError, ContractViolation, FwkitError
from .objectives import LpDistance, Quadratic
from .regions import make_region
from .steps import StepRule

FLOAT_FMT = "%.17g"

TOP_KEYS = {"experiment", "description", "runs", "seeds", "max_iters", "tol", "record_every",
            "out", "timing", "keep_iterates"}
SECTIONS = ("step.", "objective.", "region.", "run.")
STOCHASTIC = ("sfw", "momentum", "spider", "svrf", "one_sample")
ALGORITHM_NAMES = tuple(det.ALGORITHMS) + STOCHASTIC + ("scgs",)


# ---------------------------------------------------------------------------
# parsing

def parse_value(text: str) -> Any:
    s = text.strip()
    if ";" in s:
        return [[parse_value(tok) for tok in row.replace(",", " ").split()]
                for row in s.split(";") if row.strip()]
    if "," in s:
        return [parse_value(tok) for tok in s.split(",") if tok.strip()]
    low = s.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    if low in ("none", "null"):
        return None
    for conv in (int, float):
        try:
            return conv(s)
        except ValueError:
            pass
    return s


def format_value(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "none"
    if isinstance(v, float):
        return FLOAT_FMT % v
    if isinstance(v, (list, tuple)):
        if v and isinstance(v[0], (list, tuple)):
            return "; ".join(" ".join(format_value(e) for e in row) for row in v)
        return ", ".join(format_value(e) for e in v)
    return str(v)


def parse_config_text(text: str, origin: str = "<config>") -> dict:
    cfg: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{origin}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{origin}:{lineno}: empty key")
        cfg[key] = parse_value(value)
    return cfg


def dump_config(cfg: dict) -> str:
    return "".join(f"{k} = {format_value(cfg[k])}\n" for k in sorted(cfg))


# ---------------------------------------------------------------------------
# built-in catalog

BUILTINS: dict[str, dict] = {
    "scalar-quadratic": {
        "description": "f(x) = x^2 on [-1, 1] from x0 = 1 with open-loop steps; closed-form zigzag",
        "runs": ["fw"], "max_iters": 100, "tol": 1e-300, "step.kind": "open_loop",
        "keep_iterates": True, "objective.kind": "sq_norm", "objective.x0": [1.0],
        "region.kind": "box", "region.lower": [-1.0], "region.upper": [1.0],
    },
    "lower-bound-simplex": {
        "description": "|x|^2 over the 1000-simplex; primal gap stays above 1/(t+1) - 1/n",
        "runs": ["fw", "afw", "pfw", "lazy_fw"], "max_iters": 1000, "tol": 1e-300,
        "step.kind": "linesearch", "objective.kind": "sq_norm", "objective.x0": "vertex0",
        "region.kind": "simplex", "region.n": 1000,
    },
    "zigzag-triangle": {
        "description": "2x^2 + y^2 over a triangle with the optimum on an edge; FW zigzags",
        "runs": ["fw", "afw", "pfw", "fcfw", "boostfw"], "max_iters": 200, "tol": 1e-9,
        "step.kind": "linesearch", "objective.kind": "diag_quadratic",
        "objective.weights": [2.0, 1.0], "objective.x0": [0.0, 1.0],
        "region.kind": "polytope", "region.vertices": [[-1.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
    },
    "stepsize-comparison-l1": {
        "description": "strongly convex quadratic over the l1 ball; open-loop vs short vs line search vs adaptive",
        "runs": ["open_loop", "short", "linesearch", "adaptive"], "max_iters": 1000, "tol": 1e-12,
        "run.open_loop.algorithm": "fw", "run.open_loop.step.kind": "open_loop",
        "run.short.algorithm": "fw", "run.short.step.kind": "short",
        "run.linesearch.algorithm": "fw", "run.linesearch.step.kind": "linesearch",
        "run.adaptive.algorithm": "fw", "run.adaptive.step.kind": "adaptive",
        "objective.kind": "quadratic", "objective.L": 10.0, "objective.mu": 1.0,
        "objective.target": "exterior", "objective.shift": 2.0, "objective.seed": 1,
        "region.kind": "l1_ball", "region.n": 100,
    },
    "stepsize-comparison-l2": {
        "description": "strongly convex quadratic over the l2 ball; open-loop vs short vs line search vs adaptive",
        "runs": ["open_loop", "short", "linesearch", "adaptive"], "max_iters": 1000, "tol": 1e-12,
        "run.open_loop.algorithm": "fw", "run.open_loop.step.kind": "open_loop",
        "run.short.algorithm": "fw", "run.short.step.kind": "short",
        "run.linesearch.algorithm": "fw", "run.linesearch.step.kind": "linesearch",
        "run.adaptive.algorithm": "fw", "run.adaptive.step.kind": "adaptive",
        "objective.kind": "quadratic", "objective.L": 10.0, "objective.mu": 1.0,
        "objective.target": "exterior", "objective.shift": 2.0, "objective.seed": 1,
        "region.kind": "lp_ball", "region.n": 100, "region.p": 2.0,
    },
    "birkhoff-quadratic": {
        "description": "distance to a doubly stochastic target over birkhoff(8); pairwise vs decomposition-invariant",
        "runs": ["pfw", "dipfw"], "max_iters": 5000, "tol": 1e-6, "step.kind": "linesearch",
        "objective.kind": "quadratic", "objective.L": 1.0, "objective.mu": 1.0,
        "objective.target": "face", "objective.face_dim": 6, "objective.seed": 2,
        "region.kind": "birkhoff", "region.n": 8,
    },
    "lazy-spectrahedron": {
        "description": "quadratic over the 10x10 spectrahedron; FW vs lazified FW",
        "runs": ["fw", "lazy_fw"], "max_iters": 500, "tol": 1e-6, "step.kind": "short",
        "objective.kind": "quadratic", "objective.L": 1.0, "objective.mu": 1.0,
        "objective.target": "exterior", "objective.shift": 1.0, "objective.seed": 3,
        "region.kind": "spectrahedron", "region.n": 10,
    },
    "nep-hypercube": {
        "description": "quadratic over [0,1]^32 with the optimum on a 5-dim face; FW vs NEP-FW",
        "runs": ["fw", "nepfw"], "max_iters": 200, "tol": 1e-12, "step.kind": "open_loop",
        "objective.kind": "quadratic", "objective.L": 1.0, "objective.mu": 1.0,
        "objective.target": "face", "objective.face_dim": 5, "objective.seed": 4,
        "region.kind": "hypercube01", "region.n": 32,
    },
    "nep-simplex": {
        "description": "quadratic over the 32-simplex with the optimum on a 5-vertex face; FW vs NEP-FW",
        "runs": ["fw", "nepfw"], "max_iters": 200, "tol": 1e-12, "step.kind": "open_loop",
        "objective.kind": "quadratic", "objective.L": 1.0, "objective.mu": 1.0,
        "objective.target": "face", "objective.face_dim": 5, "objective.seed": 4,
        "region.kind": "simplex", "region.n": 32,
    },
    "cgs-vs-fw": {
        "description": "interior-optimum quadratic over the l1 ball in R^50; gradient calls of sliding vs FW",
        "runs": ["fw", "cgs"], "max_iters": 2000, "tol": 1e-8, "step.kind": "short",
        "objective.kind": "quadratic", "objective.L": 1.0, "objective.mu": 0.1,
        "objective.target": "center", "objective.seed": 5,
        "region.kind": "l1_ball", "region.n": 50,
    },
    "bcg-vs-afw": {
        "description": "strongly convex quadratic over the 20-simplex, optimum on a face; BCG vs AFW vs PFW",
        "runs": ["bcg", "afw", "pfw", "fw"], "max_iters": 2000, "tol": 1e-10, "step.kind": "short",
        "objective.kind": "quadratic", "objective.L": 10.0, "objective.mu": 1.0,
        "objective.target": "face", "objective.face_dim": 5, "objective.seed": 6,
        "region.kind": "simplex", "region.n": 20,
    },
    "stochastic-quadratic": {
        "description": "Gaussian-noise quadratic on the 20-simplex; the stochastic estimators and sliding",
        "runs": ["sfw", "momentum", "spider", "svrf", "one_sample", "scgs"], "seeds": [0, 1, 2],
        "max_iters": 100, "tol": 1e-12,
        "objective.kind": "quadratic", "objective.L": 1.0, "objective.mu": 1.0,
        "objective.target": "face", "objective.face_dim": 5, "objective.seed": 7,
        "objective.noise": 0.5, "region.kind": "simplex", "region.n": 20,
    },
    "caratheodory-birkhoff": {
        "description": "sparse approximation of a 5-permutation mixture in birkhoff(4) with open-loop FW",
        "runs": ["fw"], "max_iters": 2000, "tol": 1e-12, "step.kind": "open_loop",
        "run.fw.track_active": True, "objective.kind": "mixture_distance", "objective.atoms": 5, "objective.seed": 8,
        "region.kind": "birkhoff", "region.n": 4,
    },
    "meb-random": {
        "description": "minimum enclosing ball dual for 200 Gaussian points in R^3; FW vs AFW",
        "runs": ["fw", "afw"], "max_iters": 2000, "tol": 1e-9, "step.kind": "linesearch",
        "objective.kind": "meb_dual", "objective.points": 200, "objective.dim": 3,
        "objective.seed": 9, "region.kind": "simplex", "region.n": 200,
    },
    "dopt-gaussian": {
        "description": "D-optimal design for 50 Gaussian vectors in R^5; FW vs AFW with line search",
        "runs": ["fw", "afw"], "max_iters": 500, "tol": 1e-8, "step.kind": "linesearch",
        "objective.kind": "dopt", "objective.points": 50, "objective.dim": 5,
        "objective.seed": 10, "objective.x0": "uniform", "region.kind": "simplex", "region.n": 50,
    },
}

DEFAULTS = {"seeds": [0], "max_iters": 1000, "tol": 1e-7, "record_every": 1,
            "timing": False, "keep_iterates": False, "step.kind": "short"}


def list_experiments() -> list[tuple[str, str]]:
    return [(name, entry["description"]) for name, entry in BUILTINS.items()]


def nearest(name: str, options, n: int = 3) -> list[str]:
    return difflib.get_close_matches(name, list(options), n=n, cutoff=0.3)


def resolve_config(source: str | dict, overrides: dict | None = None) -> dict:
    """Builds the full flat config from a built-in name, a config path or a dict."""
    if isinstance(source, dict):
        user = dict(source)
    elif source in BUILTINS:
        user = {"experiment": source}
    elif Path(source).is_file():
        user = parse_config_text(Path(source).read_text(), str(source))
    else:
        hint = nearest(str(source), BUILTINS)
        msg = f"unknown experiment {source!r}"
        if hint:
            msg += "; did you mean: " + ", ".join(hint)
        raise ConfigError(msg)
    cfg = dict(DEFAULTS)
    base = user.get("experiment")
    if base is not None:
        if base not in BUILTINS:
            hint = nearest(str(base), BUILTINS)
            raise ConfigError(f"experiment: unknown built-in {base!r}"
                              + ("; did you mean: " + ", ".join(hint) if hint else ""))
        cfg.update(BUILTINS[base])
    cfg.update(user)
    cfg.update(overrides or {})
    cfg.setdefault("experiment", "custom")
    cfg.setdefault("description", "")
    cfg.setdefault("out", f"runs/{cfg['experiment']}")
    validate_config(cfg)
    return cfg


def _as_list(v):
    return list(v) if isinstance(v, (list, tuple)) else [v]


def validate_config(cfg: dict) -> None:
    for key in cfg:
        if key not in TOP_KEYS and not key.startswith(SECTIONS):
            hint = nearest(key, sorted(TOP_KEYS) + ["step.kind", "objective.kind", "region.kind"])
            raise ConfigError(f"{key}: unknown field" + (f"; did you mean: {', '.join(hint)}" if hint else ""))
    for key in ("objective.kind", "region.kind"):
        if key not in cfg:
            raise ConfigError(f"{key}: required field missing")
    if cfg["objective.kind"] not in OBJECTIVE_BUILDERS:
        raise ConfigError(f"objective.kind: unknown kind {cfg['objective.kind']!r}; choose from "
                          + ", ".join(sorted(OBJECTIVE_BUILDERS)))
    for key in ("max_iters", "record_every"):
        if not isinstance(cfg[key], int) or isinstance(cfg[key], bool) or cfg[key] < 1:
            raise ConfigError(f"{key}: must be a positive integer, got {cfg[key]!r}")
    if not isinstance(cfg["tol"], (int, float)) or not cfg["tol"] > 0:
        raise ConfigError(f"tol: must be a positive number, got {cfg['tol']!r}")
    for s in _as_list(cfg["seeds"]):
        if not isinstance(s, int) or s < 0:
            raise ConfigError(f"seeds: must be nonnegative integers, got {s!r}")
    runs = _as_list(cfg.get("runs", []))
    if not runs:
        raise ConfigError("runs: at least one run is required")
    for label in runs:
        alg = cfg.get(f"run.{label}.algorithm", label)
        if alg not in ALGORITHM_NAMES:
            hint = nearest(str(alg), ALGORITHM_NAMES)
            raise ConfigError(f"run.{label}.algorithm: unknown algorithm {alg!r}"
                              + (f"; did you mean: {', '.join(hint)}" if hint else ""))
    for key in cfg:
        if key.startswith("run.") and key.split(".")[1] not in runs:
            raise ConfigError(f"{key}: refers to a run that is not listed in 'runs'")
    try:
        _step_rule(cfg, "step.")
        for label in runs:
            _step_rule(cfg, "step.", f"run.{label}.step.")
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"step: {exc}") from None


# ---------------------------------------------------------------------------
# instances

@dataclass
class Instance:
    objective: Any
    region: Any
    x0: Any = None
    oracle: Any = None
    meta: dict = field(default_factory=dict)


def _section(cfg: dict, prefix: str) -> dict:
    return {k[len(prefix):]: v for k, v in cfg.items() if k.startswith(prefix) and "." not in k[len(prefix):]}


def build_region(cfg: dict):
    params = _section(cfg, "region.")
    kind = params.pop("kind")
    for key in ("lower", "upper", "vertices"):
        if key in params:
            params[key] = np.asarray(params[key], dtype=float)
    try:
        return make_region(kind, **params)
    except (TypeError, ValueError, ContractViolation) as exc:
        raise ConfigError(f"region: {exc}") from None


def _spd(rng, n, L, mu):
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    q = q * np.sign(np.diag(r))
    eig = np.linspace(mu, L, n)
    return (q * eig) @ q.T


def _reference_min(objective, region, x0=None):
    """Optimal value by a long away-step (polytopes) or FW (smooth sets) run."""
    cfg = RunConfig(max_iters=20000, tol=1e-13, step=StepRule("linesearch"), x0=x0)
    run = det.run_afw if region.polyhedral else det.run_fw
    return float(np.min(run(objective, region, cfg).column("f")))


def _target(region, rng, target, shift, face_dim):
    n = region.dim
    if target == "center":
        return region.center(), True
    if target == "vertex":
        return region.lmo(rng.standard_normal(n)), True
    if target == "exterior":
        u = rng.standard_normal(n)
        return region.center() + shift * u / np.linalg.norm(u), False
    if target == "face":
        if region.kind == "hypercube01":
            x = rng.integers(0, 2, n).astype(float)
            free = rng.choice(n, size=face_dim, replace=False)
            x[free] = rng.uniform(0.2, 0.8, face_dim)
            return x, True
        V = np.array([region.lmo(rng.standard_normal(n)) for _ in range(face_dim)])
        return rng.dirichlet(np.ones(face_dim)) @ V, True
    raise ConfigError(f"objective.target: unknown target {target!r}")


def _quadratic(region, rng, L=1.0, mu=1.0, target="center", shift=1.0, face_dim=5, **_):
    Q = _spd(rng, region.dim, L, mu)
    xs, inside = _target(region, rng, target, shift, face_dim)
    obj = Quadratic.centered(Q, xs, 0.0)
    obj.L, obj.mu = float(L), float(mu)
    obj.f_star = 0.0 if inside else _reference_min(obj, region)
    return Instance(obj, region, meta={"target": xs})


def _sq_norm(region, rng, scale=1.0, **_):
    obj = Quadratic(np.full(region.dim, 2.0 * scale))
    if region.kind == "simplex":
        obj.f_star = scale / region.dim
    elif region.contains(np.zeros(region.dim)):
        obj.f_star = 0.0
    else:
        obj.f_star = _reference_min(obj, region)
    return Instance(obj, region)


def _diag_quadratic(region, rng, weights=None, **_):
    w = np.asarray(_as_list(weights), dtype=float)
    if w.size != region.dim:
        raise ConfigError(f"objective.weights: need {region.dim} entries, got {w.size}")
    obj = Quadratic(2.0 * w)
    try:
        inside = region.contains(np.zeros(region.dim))
    except FwkitError:
        inside = False
    obj.f_star = 0.0 if inside else _reference_min(obj, region)
    return Instance(obj, region)


def _mixture_distance(region, rng, atoms=5, p=2.0, **_):
    V = np.array([region.lmo(rng.standard_normal(region.dim)) for _ in range(atoms)])
    u = rng.dirichlet(np.ones(atoms)) @ V
    obj = LpDistance(u, p)
    obj.f_star = 0.0
    return Instance(obj, region, meta={"target": u})


def _meb_dual(region, rng, points=200, dim=3, **_):
    if region.kind != "simplex" or region.dim != points:
        raise ConfigError("objective.kind: meb_dual needs region.kind = simplex with region.n = objective.points")
    A = rng.standard_normal((points, dim))
    sq = np.einsum("ij,ij->i", A, A)
    obj = Quadratic(2.0 * A @ A.T, -sq)
    ref = meb_coreset(A, eps=1e-13)
    obj.f_star = -ref.radius_sq
    return Instance(obj, region, meta={"meb_radius_sq": ref.radius_sq,
                                       "meb_coreset_size": int(ref.coreset_indices.size)})


def _dopt(region, rng, points=50, dim=5, **_):
    if region.kind != "simplex" or region.dim != points:
        raise ConfigError("objective.kind: dopt needs region.kind = simplex with region.n = objective.points")
    A = rng.standard_normal((points, dim))
    obj = DOptimal(A)
    ref = dopt_design(A, tol=1e-12, variant="afw")
    obj.f_star = -ref.log_det
    return Instance(obj, region, meta={"dopt_log_det": ref.log_det,
                                       "dopt_iterations": ref.iterations})


OBJECTIVE_BUILDERS = {
    "quadratic": _quadratic, "sq_norm": _sq_norm, "diag_quadratic": _diag_quadratic,
    "mixture_distance": _mixture_distance, "meb_dual": _meb_dual, "dopt": _dopt,
}


def _radius_sq(region):
    """max |x + 1|^2 over the region, for the noise variance bound."""
    try:
        V = region.enumerate_vertices()
    except FwkitError:
        V = None
    if V is not None and len(V) <= 10 ** 5:
        return float(np.max(np.sum((V + 1.0) ** 2, axis=1)))
    r = region.diameter + np.linalg.norm(region.center() + 1.0)
    return float(r * r)


def build_instance(cfg: dict) -> Instance:
    region = build_region(cfg)
    params = _section(cfg, "objective.")
    kind = params.pop("kind")
    x0 = params.pop("x0", None)
    noise = params.pop("noise", None)
    seed = params.pop("seed", 0)
    builder = OBJECTIVE_BUILDERS[kind]
    allowed = set(inspect.signature(builder).parameters) - {"region", "rng", "_"}
    for key in params:
        if key not in allowed:
            raise ConfigError(f"objective.{key}: not a parameter of {kind!r} "
                              f"(expected one of: {', '.join(sorted(allowed)) or 'none'})")
    inst = builder(region, np.random.default_rng(seed), **params)
    if x0 == "vertex0":
        x0 = np.eye(region.dim)[0]
    elif x0 == "uniform":
        x0 = np.full(region.dim, 1.0 / region.dim)
    elif x0 is not None:
        x0 = np.asarray(_as_list(x0), dtype=float)
        if x0.size != region.dim:
            raise ConfigError(f"objective.x0: need {region.dim} entries, got {x0.size}")
    inst.x0 = x0
    if noise is not None or any(cfg.get(f"run.{r}.algorithm", r) in STOCHASTIC + ("scgs",)
                                for r in _as_list(cfg["runs"])):
        inst.oracle = sto.NoisyOracle(inst.objective, float(noise or 0.0), _radius_sq(region))
    return inst


# ---------------------------------------------------------------------------
# running

_STEP_FIELDS = ("kind", "shift", "L", "tau", "eta", "alpha", "L0")


def _step_rule(cfg, *prefixes) -> StepRule:
    kw = {}
    for prefix in prefixes:
        for f in _STEP_FIELDS:
            if prefix + f in cfg:
                kw[f] = cfg[prefix + f]
    return StepRule(**kw)


def _algorithm_kwargs(cfg, label) -> dict:
    prefix = f"run.{label}."
    return {k[len(prefix):]: v for k, v in cfg.items()
            if k.startswith(prefix) and not k[len(prefix):].startswith("step.")
            and k[len(prefix):] != "algorithm"}


def run_one(inst: Instance, alg: str, config: RunConfig, kwargs: dict):
    kwargs = dict(kwargs)
    try:
        if alg in STOCHASTIC:
            return sto.run_stochastic_fw(alg, inst.oracle, inst.region, config, **kwargs)
        if alg == "scgs":
            return sto.run_scgs(inst.oracle, inst.region, config, **kwargs)
        if alg == "boostfw":
            kwargs = {"boost": det.BoostConfig(**kwargs)} if kwargs else {}
        if alg == "cgs" and kwargs:
            kwargs = {"schedule": det.CgsSchedule(**kwargs)}
        return det.ALGORITHMS[alg](inst.objective, inst.region, config, **kwargs)
    except TypeError as exc:
        raise ConfigError(f"run parameters for {alg}: {exc}") from None


SUMMARY_FIELDS = ("t", "f", "fw_gap", "primal_gap", "lmo_calls", "foo_calls", "sfo_calls",
                  "active_set_size", "wall_time_ns")


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return FLOAT_FMT % float(v)
    return str(v)


def run_experiment(cfg: dict, out_dir: str | Path | None = None, timing: bool | None = None):
    """Runs every (run, seed) pair; writes traces, summary.txt and config.resolved.txt.

    Returns (traces dict keyed by (label, seed), summary text).
    """
    timing = cfg["timing"] if timing is None else timing
    out = Path(out_dir if out_dir is not None else cfg["out"])
    inst = build_instance(cfg)
    traces = {}
    lines = [f"experiment = {cfg['experiment']}"]
    for label in _as_list(cfg["runs"]):
        alg = cfg.get(f"run.{label}.algorithm", label)
        try:
            step = _step_rule(cfg, "step.", f"run.{label}.step.")
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"run.{label}.step: {exc}") from None
        for seed in _as_list(cfg["seeds"]):
            rc = RunConfig(max_iters=cfg["max_iters"], tol=float(cfg["tol"]), step=step, seed=seed,
                           record_every=cfg["record_every"], x0=inst.x0,
                           keep_iterates=bool(cfg["keep_iterates"]), timing=bool(timing))
            trace = run_one(inst, alg, rc, _algorithm_kwargs(cfg, label))
            traces[(label, seed)] = trace
            key = f"{label}.seed{seed}"
            for name in SUMMARY_FIELDS:
                lines.append(f"{key}.{name} = {_fmt(trace.last(name))}")
            nbytes = trace.extra.get("active_set_bytes")
            if nbytes is None:
                nbytes = trace.active.nbytes() if trace.active is not None else 0
            lines.append(f"{key}.active_set_bytes = {_fmt(int(nbytes))}")
            lines.append(f"{key}.reached_tol = {_fmt(trace.last('fw_gap') <= rc.tol)}")
    for k in sorted(inst.meta):
        v = inst.meta[k]
        if np.isscalar(v):
            lines.append(f"instance.{k} = {_fmt(v)}")
    for name, ok in CHECKS.get(cfg["experiment"], lambda c, i, t: {})(cfg, inst, traces).items():
        lines.append(f"check.{name} = {'pass' if ok else 'fail'}")
    summary = "\n".join(lines) + "\n"
    out.mkdir(parents=True, exist_ok=True)
    for (label, seed), trace in traces.items():
        (out / f"{label}_seed{seed}.csv").write_text(trace.to_csv(timing=bool(timing)))
    (out / "summary.txt").write_text(summary)
    (out / "config.resolved.txt").write_text(dump_config(cfg))
    return traces, summary


# ---------------------------------------------------------------------------
# experiment-specific checks

ULP_SLACK = 8


def scalar_closed_form(t: int) -> float:
    """x_t for FW with 2/(t+2) steps on x^2 over [-1, 1] from x0 = 1."""
    if t == 0:
        return 1.0
    if t % 2 == 0:
        return 1.0 / (t + 1)
    return -1.0 / t


def _check_scalar(cfg, inst, traces):
    """Iterates equal the closed form to within a few ulps (rounding accumulates)."""
    out = {}
    for (label, seed), tr in traces.items():
        ok = tr.iterates is not None
        if ok:
            xs = np.array([x[0] for x in tr.iterates])
            ref = np.array([scalar_closed_form(int(k)) for k in tr.column("t")])
            ok = bool(np.all(np.abs(xs - ref) <= ULP_SLACK * np.spacing(np.abs(ref))))
        out[f"{label}.seed{seed}.closed_form"] = ok
    return out


def _check_lower_bound(cfg, inst, traces):
    n = inst.region.dim
    out = {}
    for (label, seed), tr in traces.items():
        t = tr.column("t")
        h = tr.column("primal_gap")
        m = t < n
        out[f"{label}.seed{seed}.primal_gap_lower_bound"] = bool(
            np.all(h[m] >= 1.0 / (t[m] + 1) - 1.0 / n - 1e-12))
    return out


def _check_birkhoff(cfg, inst, traces):
    out = {}
    for (label, seed), tr in traces.items():
        out[f"{label}.seed{seed}.reached_tol"] = bool(tr.last("fw_gap") <= cfg["tol"])
        if cfg.get(f"run.{label}.algorithm", label) == "dipfw":
            out[f"{label}.seed{seed}.no_active_set"] = tr.extra.get("active_set_bytes", 0) == 0
    return out


def _check_caratheodory(cfg, inst, traces):
    out = {}
    for (label, seed), tr in traces.items():
        sizes = tr.column("active_set_size")
        out[f"{label}.seed{seed}.sparsity"] = bool(np.all(sizes <= tr.column("t") + 1))
    return out


CHECKS = {
    "scalar-quadratic": _check_scalar,
    "lower-bound-simplex": _check_lower_bound,
    "birkhoff-quadratic": _check_birkhoff,
    "caratheodory-birkhoff": _check_caratheodory,
}
