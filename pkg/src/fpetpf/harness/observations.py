"""Sparse pressure sensors and the synthetic observation record."""

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, InvalidInput
from ..euler import pressure


class ObservationOperator:
    """Pressure sampled at the grid nodes nearest to each sensor location."""

    def __init__(self, grid, sensors, gas):
        sensors = [tuple(np.atleast_1d(s).astype(float)) for s in sensors]
        if not sensors:
            raise ConfigError("need at least one sensor")
        try:
            self.indices = [grid.nearest_index(s) for s in sensors]
        except InvalidInput as exc:
            raise ConfigError(str(exc)) from exc
        self.grid = grid
        self.sensors = sensors
        self.gas = gas
        self._flat = np.ravel_multi_index(tuple(np.array(self.indices).T), grid.shape)

    def __len__(self):
        return len(self.sensors)

    def __call__(self, state):
        return pressure(state, self.gas).ravel()[self._flat]


@dataclass
class TruthRecord:
    times: np.ndarray
    states: list
    observations: np.ndarray
    noise: np.ndarray


def generate_observations(truth_states, obs, obs_variance, rng):
    """``y_k = H(truth_k) + eps_k`` with all noise drawn up front from ``rng``."""
    clean = np.stack([obs(s) for s in truth_states])
    std = np.sqrt(np.broadcast_to(np.asarray(obs_variance, dtype=float), clean.shape[1:]))
    noise = rng.standard_normal(clean.shape) * std
    times = np.array([s.t for s in truth_states])
    return TruthRecord(times, list(truth_states), clean + noise, noise)
