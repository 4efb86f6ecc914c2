"""Likelihood weighting and the three analysis schemes.

``etpf_analysis`` is the plain ensemble transform ``X^a = X^f T``.
``feature_preserving_analysis`` rewrites each column of ``T`` as a chain of
two-way combinations and replaces every link by an aligned combination.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import softmax

from .combine import aligned_pair_combine
from .errors import AllZeroLikelihood, InvalidInput, NonPhysicalState
from .euler import FlowState, check_physical
from .transport import check_weights, distance_matrix, solve_transport

FILTER_KINDS = ("etpf", "fp-etpf", "bootstrap")


@dataclass
class Ensemble:
    particles: list
    weights: np.ndarray = None

    def __post_init__(self):
        self.particles = list(self.particles)
        if not self.particles:
            raise InvalidInput("ensemble needs at least one particle")
        n = len(self.particles)
        if self.weights is None:
            self.weights = np.full(n, 1.0 / n)
        self.weights = check_weights(self.weights)
        if len(self.weights) != n:
            raise InvalidInput(f"{len(self.weights)} weights for {n} particles")
        first = self.particles[0]
        for p in self.particles[1:]:
            if p.grid != first.grid or p.t != first.t:
                raise InvalidInput("particles must share grid and time")

    def __len__(self):
        return len(self.particles)

    @property
    def t(self):
        return self.particles[0].t

    @property
    def grid(self):
        return self.particles[0].grid

    def matrix(self):
        """Particles as columns of an (n_s, n_e) array."""
        return np.stack([p.flat() for p in self.particles], axis=1)


@dataclass
class FilterConfig:
    kind: str = "fp-etpf"
    beta_w: float = 1.0
    obs_variance: float = 0.1
    q: float = 2.0

    def __post_init__(self):
        if self.kind not in FILTER_KINDS:
            raise InvalidInput(f"filter kind must be one of {FILTER_KINDS}, got {self.kind!r}")
        if not self.beta_w >= 1.0:
            raise InvalidInput(f"underweighting factor must be >= 1, got {self.beta_w}")
        if np.any(np.asarray(self.obs_variance) <= 0):
            raise InvalidInput("observation variances must be positive")


@dataclass
class AnalysisStats:
    dtw_runs: int = 0
    skipped_folds: int = 0
    plans: list = field(default_factory=list)


def bootstrap_update(weights, likelihoods):
    w = check_weights(weights)
    lik = np.asarray(likelihoods, dtype=float)
    if lik.shape != w.shape or np.any(lik < 0):
        raise InvalidInput("likelihoods must be nonnegative, one per particle")
    post = lik * w
    total = post.sum()
    if not total > 0.0:
        raise AllZeroLikelihood("every particle has zero posterior mass")
    return post / total


def log_likelihoods(innovations, obs_variance, beta_w=1.0):
    """Gaussian log-likelihoods (up to a constant) under covariance ``beta_w * R``."""
    d = np.asarray(innovations, dtype=float)
    var = beta_w * np.broadcast_to(np.asarray(obs_variance, dtype=float), d.shape[-1:])
    return -0.5 * np.sum(d * d / var, axis=-1)


def analysis_weights(ensemble, y, obs, cfg, prior=None):
    """Normalised posterior weights; ``prior`` defaults to uniform forecast weights."""
    y = np.asarray(y, dtype=float)
    z = np.stack([obs(p) for p in ensemble.particles])
    if z.shape[1:] != y.shape:
        raise InvalidInput(f"observation has shape {y.shape}, operator gives {z.shape[1:]}")
    logw = log_likelihoods(y - z, cfg.obs_variance, cfg.beta_w)
    if prior is not None:
        with np.errstate(divide="ignore"):
            logw = logw + np.log(check_weights(prior))
        if not np.isfinite(logw).any():
            raise AllZeroLikelihood("every particle has zero posterior mass")
    w = softmax(logw)
    return w / w.sum()


def transport_plan(ensemble, w_a):
    return solve_transport(distance_matrix(ensemble.particles), w_a)


def etpf_analysis(ensemble, w_a, plan=None):
    """Equally weighted analysis ``X^a = X^f T``; returns (ensemble, plan)."""
    plan = plan or transport_plan(ensemble, w_a)
    T = plan.matrix
    first = ensemble.particles[0]
    stacked = np.stack([p.q for p in ensemble.particles])
    out = []
    for e in range(len(ensemble)):
        q = np.tensordot(T[:, e], stacked, axes=1)
        out.append(FlowState(first.grid, q, first.t))
    return Ensemble(out), plan


def alpha_coefficients(column):
    """Mixing coefficients turning a transport column into a two-way chain.

    ``alpha[k] = S[k] / S[k+1]`` with ``S`` the running sum of the column; a
    zero denominator gives 0 (the incoming particle replaces the empty chain).
    """
    col = np.asarray(column, dtype=float)
    running = np.cumsum(col)
    num, den = running[:-1], running[1:]
    alphas = np.zeros(len(col) - 1)
    nz = den != 0.0
    alphas[nz] = num[nz] / den[nz]
    return alphas


def sequential_combine_plain(forecasts, alphas):
    """Fold ``x~ = a*x~ + (1-a)*x_next`` through the forecasts."""
    states = [getattr(f, "q", f) for f in forecasts]
    if len(alphas) != len(states) - 1:
        raise InvalidInput(f"{len(alphas)} coefficients for {len(states)} states")
    acc = np.asarray(states[0], dtype=float)
    for a, nxt in zip(alphas, states[1:]):
        acc = a * acc + (1.0 - a) * np.asarray(nxt, dtype=float)
    first = forecasts[0]
    if isinstance(first, FlowState):
        return FlowState(first.grid, acc, first.t)
    return acc


def aligned_chain(forecasts, alphas, q=2.0, stats=None):
    """Aligned counterpart of :func:`sequential_combine_plain`.

    Links with coefficient 1 leave the chain untouched and links with 0 take
    the incoming particle as is; neither runs an alignment.
    """
    acc = forecasts[0]
    for a, nxt in zip(alphas, forecasts[1:]):
        if a == 1.0:
            if stats is not None:
                stats.skipped_folds += 1
            continue
        if a == 0.0:
            if stats is not None:
                stats.skipped_folds += 1
            acc = nxt
            continue
        acc = aligned_pair_combine(acc, nxt, a, q)
        if stats is not None:
            stats.dtw_runs += 1
    return acc.copy()


def feature_preserving_analysis(ensemble, w_a, gas, q=2.0, plan=None, stats=None):
    """Aligned ensemble transform; returns (ensemble, plan)."""
    plan = plan or transport_plan(ensemble, w_a)
    out = []
    for e in range(len(ensemble)):
        alphas = alpha_coefficients(plan.matrix[:, e])
        state = aligned_chain(ensemble.particles, alphas, q, stats)
        try:
            check_physical(state.q, gas.gamma)
        except NonPhysicalState as exc:
            raise NonPhysicalState(f"analysis particle {e}: {exc}", exc.index, exc.quantity) from exc
        out.append(state)
    return Ensemble(out), plan
