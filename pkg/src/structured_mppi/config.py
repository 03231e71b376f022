"""INI experiment files.

Layout::

    [experiment]        trials, base_seed (or seeds), output, plus method defaults
    [task:<label>]      kind, goal_x, max_steps, dt, bounds, start, cost weights
    [method:<label>]    sampler, k, horizon, rollouts, lambda, sigma, ...

Any method key placed in ``[experiment]`` acts as a default for every method
section; likewise task keys in ``[experiment]`` apply to every task.  Command
line overrides (see :func:`apply_overrides`) beat both.
"""
from __future__ import annotations

import configparser
from dataclasses import replace
from pathlib import Path

import numpy as np

from .bench import ExperimentConfig
from .dynamics import CostWeights, TaskSpec
from .mppi import MppiConfig
from .samplers import NoiseSpec, SamplerConfig
from .trajectory import ActionBounds

TASK_KEYS = {
    "kind", "goal_x", "max_steps", "dt", "bounds_lower", "bounds_upper", "start",
    "landing_speed", "mass", "w_goal", "w_clear", "w_ctrl", "z_margin", "w_term", "crash_base",
}
METHOD_KEYS = {
    "sampler", "k", "horizon", "rollouts", "lambda", "sigma", "boundary",
    "preserve_nominal", "update_space", "iterations_per_step", "baseline_subtraction",
}
EXPERIMENT_KEYS = {"trials", "base_seed", "seeds", "output"}

TASK_NAMES = {"flat": "flat", "stairs": "stairs", "big-box": "big_box", "big_box": "big_box"}

METHOD_DEFAULTS = {
    "k": "4",
    "horizon": "40",
    "rollouts": "64",
    "lambda": "1.0",
    "sigma": "0.5",
    "boundary": "natural",
    "preserve_nominal": "false",
    "update_space": "dense",
    "iterations_per_step": "1",
    "baseline_subtraction": "true",
}


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in str(text).replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"expected a number or comma list, got {text!r}") from None


def parse_task_kind(name: str) -> str:
    try:
        return TASK_NAMES[name]
    except KeyError:
        raise ConfigError(
            f"unknown task {name!r}; valid tasks: flat, stairs, big-box"
        ) from None


def build_task(values: dict) -> TaskSpec:
    extra = set(values) - TASK_KEYS
    if extra:
        raise ConfigError(f"unknown task keys: {sorted(extra)}")
    if "kind" not in values:
        raise ConfigError("task section needs a 'kind'")
    kw: dict = {"kind": parse_task_kind(values["kind"])}
    defaults = TaskSpec(kw["kind"])
    for key, conv in (("goal_x", float), ("max_steps", int), ("dt", float),
                      ("landing_speed", float), ("mass", float)):
        if key in values:
            kw[key] = conv(values[key])
    if "bounds_lower" in values or "bounds_upper" in values:
        kw["bounds"] = ActionBounds(
            _floats(values.get("bounds_lower", " ".join(map(str, defaults.bounds.lower)))),
            _floats(values.get("bounds_upper", " ".join(map(str, defaults.bounds.upper)))),
        )
    if "start" in values:
        start = _floats(values["start"])
        if len(start) != 2:
            raise ConfigError("start must be 'x, z'")
        kw["start"] = tuple(start)
    weight_keys = {"w_goal": "goal", "w_clear": "clearance", "w_ctrl": "control",
                   "z_margin": "z_margin", "w_term": "terminal", "crash_base": "crash_base"}
    wkw = {attr: float(values[key]) for key, attr in weight_keys.items() if key in values}
    if wkw:
        kw["weights"] = CostWeights(**wkw)
    return TaskSpec(**kw)


def build_method(values: dict, bounds: ActionBounds) -> MppiConfig:
    extra = set(values) - METHOD_KEYS
    if extra:
        raise ConfigError(f"unknown method keys: {sorted(extra)}")
    merged = {**METHOD_DEFAULTS, **values}
    if "sampler" not in merged:
        raise ConfigError("method section needs a 'sampler'")
    sigma = np.array(_floats(merged["sigma"]))
    if sigma.size == 1:
        sigma = np.repeat(sigma, bounds.dim)
    sampler = SamplerConfig(
        kind=merged["sampler"],
        noise=NoiseSpec(sigma),
        knot_count=int(merged["k"]),
        boundary=merged["boundary"],
        preserve_nominal=_bool(merged["preserve_nominal"]),
    )
    return MppiConfig(
        horizon=int(merged["horizon"]),
        rollouts=int(merged["rollouts"]),
        temperature=float(merged["lambda"]),
        sampler=sampler,
        bounds=bounds,
        baseline_subtraction=_bool(merged["baseline_subtraction"]),
        iterations_per_step=int(merged["iterations_per_step"]),
        update_space=merged["update_space"],
    )


def _bool(text) -> bool:
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


class ExperimentFile:
    """Parsed-but-unbuilt experiment: raw key/value dicts, so overrides can be layered."""

    def __init__(self, experiment: dict, tasks: list, methods: list):
        self.experiment = experiment
        self.tasks = tasks      # [(label, dict)]
        self.methods = methods  # [(label, dict)]

    @classmethod
    def read(cls, path) -> "ExperimentFile":
        parser = configparser.ConfigParser(interpolation=None, default_section="__none__")
        try:
            with open(path) as f:
                parser.read_file(f)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse config {path}: {exc}") from exc
        experiment, tasks, methods = {}, [], []
        for name in parser.sections():
            values = dict(parser[name])
            if name == "experiment":
                experiment = values
            elif name.startswith("task:"):
                tasks.append((name[5:].strip(), values))
            elif name.startswith("method:"):
                methods.append((name[7:].strip(), values))
            else:
                raise ConfigError(f"unknown section [{name}] in {path}")
        extra = set(experiment) - EXPERIMENT_KEYS - TASK_KEYS - METHOD_KEYS
        if extra:
            raise ConfigError(f"unknown [experiment] keys: {sorted(extra)}")
        return cls(experiment, tasks, methods)

    def build(self) -> ExperimentConfig:
        exp = self.experiment
        task_defaults = {k: v for k, v in exp.items() if k in TASK_KEYS}
        method_defaults = {k: v for k, v in exp.items() if k in METHOD_KEYS}
        try:
            tasks = [(label, build_task({**task_defaults, **values}))
                     for label, values in self.tasks]
            if not tasks:
                raise ConfigError("config defines no [task:...] sections")
            # Methods share the actuator bounds of the first task.
            bounds = tasks[0][1].bounds
            if any(t.bounds != bounds for _, t in tasks):
                raise ConfigError("all tasks must share the same actuator bounds")
            methods = [(label, build_method({**method_defaults, **values}, bounds))
                       for label, values in self.methods]
            seeds = [int(s) for s in _floats(exp["seeds"])] if "seeds" in exp else None
            return ExperimentConfig(
                tasks=tasks,
                methods=methods,
                trials_per_cell=int(exp.get("trials", 5)),
                base_seed=int(exp.get("base_seed", 0)),
                seeds=seeds,
                output_path=exp.get("output", "results/bench"),
            )
        except ConfigError:
            raise
        except (ValueError, KeyError) as exc:
            raise ConfigError(str(exc)) from exc


def apply_overrides(spec: ExperimentFile, **overrides) -> ExperimentFile:
    """Layer command-line values over a parsed file; ``None`` means "not given".

    Recognised keys: trials, seed, out, max_steps, horizon, rollouts, lambda,
    sigma, k, sampler.
    """
    exp = dict(spec.experiment)
    methods = [(label, dict(values)) for label, values in spec.methods]
    tasks = [(label, dict(values)) for label, values in spec.tasks]
    plain = {"trials": "trials", "seed": "base_seed", "out": "output"}
    for key, target in plain.items():
        if overrides.get(key) is not None:
            exp[target] = str(overrides[key])
            if key == "seed":
                exp.pop("seeds", None)
    if overrides.get("max_steps") is not None:
        for _, values in tasks:
            values["max_steps"] = str(overrides["max_steps"])
        exp["max_steps"] = str(overrides["max_steps"])
    for key in ("horizon", "rollouts", "lambda", "sigma", "k", "sampler"):
        if overrides.get(key) is not None:
            for _, values in methods:
                values[key] = str(overrides[key])
            exp[key] = str(overrides[key])
    return ExperimentFile(exp, tasks, methods)


def load_experiment(path, **overrides) -> ExperimentConfig:
    return apply_overrides(ExperimentFile.read(path), **overrides).build()


def default_task(kind: str, **changes) -> TaskSpec:
    """Task with the tuned benchmark defaults; see ``configs/paper_repro.ini``."""
    return replace(TaskSpec(parse_task_kind(kind)), **changes)


def write_experiment(config: ExperimentConfig, path) -> Path:
    """Serialize an :class:`ExperimentConfig` back to INI."""
    parser = configparser.ConfigParser(interpolation=None)
    parser["experiment"] = {
        "trials": str(config.trials_per_cell),
        "base_seed": str(config.base_seed),
        "output": config.output_path,
    }
    if config.seeds is not None:
        parser["experiment"]["seeds"] = ", ".join(map(str, config.seeds))
    for label, t in config.tasks:
        w = t.weights
        parser[f"task:{label}"] = {
            "kind": t.kind, "goal_x": repr(t.goal_x), "max_steps": str(t.max_steps),
            "dt": repr(t.dt),
            "bounds_lower": ", ".join(map(repr, t.bounds.lower.tolist())),
            "bounds_upper": ", ".join(map(repr, t.bounds.upper.tolist())),
            "start": ", ".join(map(repr, t.start)), "landing_speed": repr(t.landing_speed),
            "mass": repr(t.mass), "w_goal": repr(w.goal), "w_clear": repr(w.clearance),
            "w_ctrl": repr(w.control), "z_margin": repr(w.z_margin), "w_term": repr(w.terminal),
            "crash_base": repr(w.crash_base),
        }
    from .samplers import EXTERNAL_NAMES
    for label, m in config.methods:
        s = m.sampler
        parser[f"method:{label}"] = {
            "sampler": EXTERNAL_NAMES[s.kind], "k": str(s.knot_count),
            "horizon": str(m.horizon), "rollouts": str(m.rollouts),
            "lambda": repr(m.temperature), "sigma": ", ".join(map(repr, s.noise.sigma.tolist())),
            "boundary": s.boundary, "preserve_nominal": str(s.preserve_nominal).lower(),
            "update_space": m.update_space, "iterations_per_step": str(m.iterations_per_step),
            "baseline_subtraction": str(m.baseline_subtraction).lower(),
        }
    path = Path(path)
    with open(path, "w") as f:
        parser.write(f)
    return path
