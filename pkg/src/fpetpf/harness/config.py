"""Experiment configuration and its flat ``key = value`` file format.

Example::

    problem = sod
    scale = desk            # or paper
    n_ensemble = 10
    seed = 2024
    filter = fp-etpf
    truth.x_d = 0.5         # override a truth parameter
    sigma.x_d = 0.2         # override a sampling standard deviation

Lines starting with ``#`` or ``;`` are comments.  Values are Python literals
where they parse as one (numbers, tuples, lists) and strings otherwise.
"""

import ast
import configparser
from dataclasses import dataclass, field, fields, replace

from ..errors import ConfigError
from ..filters import FILTER_KINDS
from .problems import get_problem

DESK_ENSEMBLE = 10
PAPER_ENSEMBLE = 20


@dataclass
class ExperimentConfig:
    problem: str = "sod"
    shape: tuple = None
    t_final: float = None
    n_obs: int = None
    skip: int = None
    n_ensemble: int = DESK_ENSEMBLE
    beta_w: float = None
    obs_variance: float = 0.1
    seed: int = 0
    filter: str = "fp-etpf"
    out: str = "runs/out"
    cfl: float = 0.45
    q: float = 2.0
    truth: dict = field(default_factory=dict)
    sigma: dict = field(default_factory=dict)
    spacetime: bool = True

    def __post_init__(self):
        self.resolve()

    def resolve(self):
        """Fill unset fields from the problem defaults (desk scale) and validate."""
        prob = get_problem(self.problem)
        if self.shape is None:
            self.shape = prob.desk_shape
        self.shape = tuple(int(n) for n in (self.shape if isinstance(self.shape, (tuple, list)) else (self.shape,)))
        for name, default in (("t_final", prob.t_final), ("n_obs", prob.n_obs),
                              ("skip", prob.skip), ("beta_w", prob.beta_w)):
            if getattr(self, name) is None:
                setattr(self, name, default)
        self.truth = {**prob.truth, **self.truth}
        self.sigma = {**prob.sigma, **self.sigma}
        unknown = (set(self.truth) | set(self.sigma)) - set(prob.truth)
        if unknown:
            raise ConfigError(f"unknown {self.problem} parameters: {sorted(unknown)}")
        if self.filter not in FILTER_KINDS:
            raise ConfigError(f"filter must be one of {FILTER_KINDS}, got {self.filter!r}")
        checks = [
            (len(self.shape) == prob.ndim, f"shape {self.shape} does not match a {prob.ndim}D problem"),
            (all(n >= 7 for n in self.shape), "need at least 7 nodes per axis"),
            (self.t_final > 0, "t_final must be positive"),
            (self.n_obs >= 1, "n_obs must be at least 1"),
            (self.skip >= 0, "skip must be nonnegative"),
            (self.n_ensemble >= 2, "n_ensemble must be at least 2"),
            (self.beta_w >= 1, "beta_w must be >= 1"),
            (self.obs_variance >= 0, "obs_variance must be nonnegative"),
            (0 < self.cfl <= 1, "cfl must lie in (0, 1]"),
            (all(s >= 0 for s in self.sigma.values()), "sampling standard deviations must be nonnegative"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)
        return self

    @property
    def dt_obs(self):
        return self.t_final / self.n_obs

    def with_scale(self, scale):
        prob = get_problem(self.problem)
        if scale == "desk":
            return replace(self, shape=prob.desk_shape, n_ensemble=DESK_ENSEMBLE)
        if scale == "paper":
            return replace(self, shape=prob.paper_shape, n_ensemble=PAPER_ENSEMBLE)
        raise ConfigError(f"scale must be 'desk' or 'paper', got {scale!r}")


def _literal(text):
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text.strip()


def parse_config_text(text):
    """Parse the flat key-value format into a plain dict."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string("[experiment]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    return {k: _literal(v) for k, v in parser["experiment"].items()}


def config_from_mapping(values):
    values = dict(values)
    scale = values.pop("scale", None)
    known = {f.name for f in fields(ExperimentConfig)}
    kwargs = {"truth": {}, "sigma": {}}
    for key, value in values.items():
        if key.startswith(("truth.", "sigma.")):
            group, name = key.split(".", 1)
            kwargs[group][name] = float(value)
        elif key in known:
            kwargs[key] = value
        else:
            raise ConfigError(f"unknown config key {key!r}")
    problem = kwargs.get("problem", "sod")
    prob = get_problem(problem)
    if scale is not None and "shape" not in kwargs:
        kwargs["shape"] = prob.paper_shape if scale == "paper" else prob.desk_shape
        if "n_ensemble" not in kwargs:
            kwargs["n_ensemble"] = PAPER_ENSEMBLE if scale == "paper" else DESK_ENSEMBLE
    try:
        return ExperimentConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return config_from_mapping(parse_config_text(text))


def dump_config(cfg):
    lines = []
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if f.name in ("truth", "sigma"):
            lines += [f"{f.name}.{k} = {v!r}" for k, v in sorted(value.items())]
        elif isinstance(value, str):
            lines.append(f"{f.name} = {value}")
        else:
            lines.append(f"{f.name} = {value!r}")
    return "\n".join(lines) + "\n"
