"""The four twin-experiment problems: truth parameters, sampling spreads,
observation layout and time settings."""

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError
from ..euler import FlowState, GasConstants, Grid

SINE_AMPLITUDE = 0.2
SINE_WAVENUMBER = 10.0 * np.pi


@dataclass(frozen=True)
class Problem:
    name: str
    ndim: int
    lower: tuple
    upper: tuple
    truth: dict
    sigma: dict
    t_final: float
    n_obs: int
    beta_w: float
    skip: int = 10
    desk_shape: tuple = (501,)
    paper_shape: tuple = (5001,)

    def grid(self, shape):
        shape = tuple(int(n) for n in shape)
        if len(shape) != self.ndim:
            raise ConfigError(f"{self.name} needs a {self.ndim}D grid, got shape {shape}")
        return Grid(shape, self.lower, self.upper)

    def sensors(self):
        if self.ndim == 1:
            return [(round(0.1 * k, 10),) for k in range(1, 10)]
        ticks = [round(0.2 * k, 10) for k in range(1, 10)]
        return [(x, y) for x in ticks for y in ticks]


def _shock_tube(grid, prm, gas, right_density=None):
    x = grid.axes[0]
    left = x <= prm["x_d"]
    rho_r = prm["rho_R"] if right_density is None else right_density(x)
    rho = np.where(left, prm["rho_L"], rho_r)
    u = np.where(left, prm["u_L"], prm["u_R"])
    p = np.where(left, prm["p_L"], prm["p_R"])
    return FlowState.from_primitive(grid, rho, u, p, gas)


def _shu_osher(grid, prm, gas):
    # the sampled right density shifts the sine baseline; amplitude and wavenumber stay fixed
    def right(x):
        return prm["rho_R"] + SINE_AMPLITUDE * np.sin(SINE_WAVENUMBER * (x - prm["x_d"]))
    return _shock_tube(grid, prm, gas, right)


def _blast(grid, prm, gas):
    X, Y = grid.mesh()
    inside = (X - prm["x_c"]) ** 2 + (Y - prm["y_c"]) ** 2 <= prm["r"] ** 2
    rho = np.where(inside, prm["rho_in"], prm["rho_out"])
    p = np.where(inside, prm["p_in"], prm["p_out"])
    return FlowState.from_primitive(grid, rho, np.zeros((2,) + grid.shape), p, gas)


_BUILDERS = {"sod": _shock_tube, "toro": _shock_tube, "shu-osher": _shu_osher, "blast2d": _blast}

PROBLEMS = {
    "sod": Problem(
        "sod", 1, (0.0,), (1.0,),
        truth=dict(rho_L=1.0, u_L=0.0, p_L=1.0, rho_R=0.125, u_R=0.0, p_R=0.1, x_d=0.5),
        sigma=dict(rho_L=0.05, rho_R=0.006, p_L=0.05, p_R=0.005, x_d=0.2),
        t_final=0.2, n_obs=100, beta_w=20.0,
    ),
    "toro": Problem(
        "toro", 1, (0.0,), (1.0,),
        truth=dict(rho_L=5.99924, u_L=19.5975, p_L=460.894, rho_R=5.99242, u_R=-6.19633, p_R=46.0950, x_d=0.5),
        sigma=dict(rho_L=0.2, rho_R=0.0, p_L=10.0, p_R=1.0, x_d=0.1),
        t_final=0.0245, n_obs=70, beta_w=1e8,
    ),
    "shu-osher": Problem(
        "shu-osher", 1, (0.0,), (1.0,),
        truth=dict(rho_L=3.857143, u_L=2.629369, p_L=10.3333, rho_R=1.0, u_R=0.0, p_R=1.0, x_d=0.1),
        sigma=dict(rho_L=0.4, rho_R=0.1, u_L=0.2, p_L=1.03, p_R=0.1, x_d=0.05),
        t_final=0.25, n_obs=100, beta_w=1e3,
    ),
    "blast2d": Problem(
        "blast2d", 2, (0.0, 0.0), (2.0, 2.0),
        truth=dict(x_c=1.0, y_c=1.0, r=0.4, rho_in=1.0, p_in=1000.0, rho_out=1.0, p_out=0.01),
        sigma=dict(x_c=0.2, y_c=0.2, r=0.05, rho_in=0.05, p_in=0.1),
        t_final=0.01, n_obs=100, beta_w=1e7,
        desk_shape=(101, 101), paper_shape=(401, 401),
    ),
}


def get_problem(name):
    try:
        return PROBLEMS[name]
    except KeyError:
        raise ConfigError(f"unknown problem {name!r}; choose from {sorted(PROBLEMS)}") from None


def build_state(problem, grid, params, gas=None):
    gas = gas or GasConstants()
    return _BUILDERS[problem.name](grid, params, gas)


def build_truth(problem, grid, gas=None, overrides=None):
    params = dict(problem.truth)
    params.update(overrides or {})
    return build_state(problem, grid, params, gas)


def params_valid(problem, params):
    """Whether sampled parameters give a well-posed initial state on the domain."""
    for key, value in params.items():
        if key.startswith(("rho", "p_")) and not value > 0.0:
            return False
    if problem.ndim == 1:
        return problem.lower[0] < params["x_d"] < problem.upper[0]
    return (
        params["r"] > 0.0
        and problem.lower[0] < params["x_c"] < problem.upper[0]
        and problem.lower[1] < params["y_c"] < problem.upper[1]
    )


def parameter_streams(seed, names):
    """One independent counter-based generator per parameter, plus observation noise.

    Stream ``k`` is Philox keyed by ``SeedSequence(seed, spawn_key=(k,))`` with
    ``k`` the position of the name in ``names``; the noise stream uses
    ``spawn_key=(len(names),)``.
    """
    gens = {}
    for k, name in enumerate(names):
        gens[name] = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(k,))))
    noise = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(len(names),))))
    return gens, noise


def sample_parameters(problem, n, gens, truth=None, sigma=None, max_redraws=1000):
    """Draw ``n`` parameter sets; rejected draws are redrawn from the same streams."""
    truth = dict(problem.truth if truth is None else truth)
    sigma = dict(problem.sigma if sigma is None else sigma)
    names = sorted(truth)
    out = []
    redraws = 0
    while len(out) < n:
        draw = {k: truth[k] + sigma.get(k, 0.0) * gens[k].standard_normal() for k in names}
        if params_valid(problem, draw):
            out.append(draw)
            continue
        redraws += 1
        if redraws > max_redraws:
            raise ConfigError(f"{problem.name}: more than {max_redraws} rejected parameter draws")
    return out
