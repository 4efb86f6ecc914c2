"""Compressible Euler solver: WENO5 finite differences, global Lax-Friedrichs
flux splitting, TVD-RK3 time stepping, zeroth-order outflow boundaries.

State is stored in conservative form ``q = [rho, rho*u, (rho*v), E]`` with the
variable index first, followed by the grid axes.
"""

from dataclasses import dataclass, field

import numpy as np

from ._accel import HAVE_NUMBA, njit
from .errors import CflViolation, InvalidInput, NonPhysicalState

N_GHOST = 3
WENO_EPS = 1e-6
DEFAULT_CFL = 0.45


@dataclass(frozen=True)
class GasConstants:
    gamma: float = 1.4

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise InvalidInput(f"adiabatic index must exceed 1, got {self.gamma}")


@dataclass(frozen=True)
class Grid:
    """Uniform node-centred Cartesian grid in one or two dimensions.

    ``shape`` holds the node counts per axis and ``lower``/``upper`` the
    domain extents; the first and last node sit on the domain boundary.
    """

    shape: tuple
    lower: tuple
    upper: tuple

    def __post_init__(self):
        shape = tuple(int(n) for n in self.shape)
        lower = tuple(float(v) for v in self.lower)
        upper = tuple(float(v) for v in self.upper)
        if len(shape) not in (1, 2) or len(lower) != len(shape) or len(upper) != len(shape):
            raise InvalidInput("grid must be 1D or 2D with one extent per axis")
        if any(n < 7 for n in shape):
            raise InvalidInput(f"need at least 7 nodes per axis, got {shape}")
        if any(hi <= lo for lo, hi in zip(lower, upper)):
            raise InvalidInput("domain extents must be increasing")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def uniform_1d(cls, n, lower=0.0, upper=1.0):
        return cls((n,), (lower,), (upper,))

    @classmethod
    def uniform_2d(cls, nx, ny, lower=(0.0, 0.0), upper=(1.0, 1.0)):
        return cls((nx, ny), tuple(lower), tuple(upper))

    @property
    def ndim(self):
        return len(self.shape)

    @property
    def spacing(self):
        return tuple((hi - lo) / (n - 1) for n, lo, hi in zip(self.shape, self.lower, self.upper))

    @property
    def axes(self):
        """Node coordinates along each axis."""
        return tuple(np.linspace(lo, hi, n) for n, lo, hi in zip(self.shape, self.lower, self.upper))

    def mesh(self):
        return np.meshgrid(*self.axes, indexing="ij")

    def nearest_index(self, point):
        """Index tuple of the node nearest to ``point`` (one coordinate per axis)."""
        point = np.atleast_1d(np.asarray(point, dtype=float))
        if point.shape != (self.ndim,):
            raise InvalidInput(f"point {point} does not match grid dimension {self.ndim}")
        idx = []
        for x, n, lo, hi, h in zip(point, self.shape, self.lower, self.upper, self.spacing):
            if not lo <= x <= hi:
                raise InvalidInput(f"point {tuple(point)} outside domain")
            idx.append(int(min(n - 1, max(0, np.floor((x - lo) / h + 0.5)))))
        return tuple(idx)


@dataclass
class FlowState:
    grid: Grid
    q: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float)
        expected = (self.grid.ndim + 2,) + self.grid.shape
        if self.q.shape != expected:
            raise InvalidInput(f"conserved array has shape {self.q.shape}, expected {expected}")

    @classmethod
    def from_primitive(cls, grid, rho, velocity, p, gas, t=0.0):
        """Build a state from density, velocity component(s) and pressure."""
        rho = np.broadcast_to(np.asarray(rho, dtype=float), grid.shape)
        p = np.broadcast_to(np.asarray(p, dtype=float), grid.shape)
        vel = np.asarray(velocity, dtype=float)
        if grid.ndim == 1 and vel.ndim <= 1 and vel.shape in ((), grid.shape):
            vel = vel[None, ...]
        vel = np.broadcast_to(vel, (grid.ndim,) + grid.shape)
        q = np.empty((grid.ndim + 2,) + grid.shape)
        q[0] = rho
        q[1:1 + grid.ndim] = rho * vel
        q[-1] = p / (gas.gamma - 1.0) + 0.5 * rho * np.sum(vel * vel, axis=0)
        return cls(grid, q, float(t))

    @property
    def rho(self):
        return self.q[0]

    @property
    def momentum(self):
        return self.q[1:-1]

    @property
    def energy(self):
        return self.q[-1]

    @property
    def velocity(self):
        return self.q[1:-1] / self.q[0]

    def copy(self):
        return FlowState(self.grid, self.q.copy(), self.t)

    def flat(self):
        return self.q.ravel()


def _pressure_unchecked(q, gamma):
    kinetic = 0.5 * np.sum(q[1:-1] ** 2, axis=0) / q[0]
    return (gamma - 1.0) * (q[-1] - kinetic)


def check_physical(q, gamma):
    """Raise :class:`NonPhysicalState` at the first node with rho <= 0 or p <= 0."""
    rho = q[0]
    bad = ~(rho > 0.0)
    if bad.any():
        idx = np.unravel_index(int(np.argmax(bad)), rho.shape)
        raise NonPhysicalState(f"non-positive density {rho[idx]!r} at node {idx}", idx, "density")
    p = _pressure_unchecked(q, gamma)
    bad = ~(p > 0.0)
    if bad.any():
        idx = np.unravel_index(int(np.argmax(bad)), p.shape)
        raise NonPhysicalState(f"non-positive pressure {p[idx]!r} at node {idx}", idx, "pressure")
    return p


def pressure(state, gas):
    """Pressure from the polytropic equation of state, checked for positivity."""
    return check_physical(state.q, gas.gamma)


def entropy(state, gas):
    """Specific entropy ``log(p / rho**gamma)``."""
    p = pressure(state, gas)
    return np.log(p / state.rho ** gas.gamma)


# ---------------------------------------------------------------------------
# WENO5 kernels.  Lines are laid out as q[var, line, node]; ``normal`` is the
# index of the momentum component along the sweep direction.
# ---------------------------------------------------------------------------

@njit
def _weno5(a, b, c, d, e):
    # reconstruction at i+1/2 from values at i-2..i+2
    b0 = 13.0 / 12.0 * (a - 2.0 * b + c) ** 2 + 0.25 * (a - 4.0 * b + 3.0 * c) ** 2
    b1 = 13.0 / 12.0 * (b - 2.0 * c + d) ** 2 + 0.25 * (b - d) ** 2
    b2 = 13.0 / 12.0 * (c - 2.0 * d + e) ** 2 + 0.25 * (3.0 * c - 4.0 * d + e) ** 2
    w0 = 0.1 / (WENO_EPS + b0) ** 2
    w1 = 0.6 / (WENO_EPS + b1) ** 2
    w2 = 0.3 / (WENO_EPS + b2) ** 2
    s = w0 + w1 + w2
    q0 = (2.0 * a - 7.0 * b + 11.0 * c) / 6.0
    q1 = (-b + 5.0 * c + 2.0 * d) / 6.0
    q2 = (2.0 * c + 5.0 * d - e) / 6.0
    return (w0 * q0 + w1 * q1 + w2 * q2) / s


@njit
def weno_divergence_loop(q, normal, gamma, alpha, inv_dx):
    nvar, nlines, n = q.shape
    out = np.empty_like(q)
    npad = n + 2 * N_GHOST
    fp = np.empty((nvar, npad))
    fm = np.empty((nvar, npad))
    flux = np.empty((nvar, n + 1))
    for line in range(nlines):
        for k in range(npad):
            node = min(max(k - N_GHOST, 0), n - 1)
            rho = q[0, line, node]
            en = q[nvar - 1, line, node]
            un = q[normal, line, node] / rho
            kin = 0.0
            for m in range(1, nvar - 1):
                kin += q[m, line, node] * q[m, line, node]
            p = (gamma - 1.0) * (en - 0.5 * kin / rho)
            for v in range(nvar):
                if v == nvar - 1:
                    f = un * (en + p)
                else:
                    f = q[v, line, node] * un
                    if v == normal:
                        f += p
                fp[v, k] = 0.5 * (f + alpha * q[v, line, node])
                fm[v, k] = 0.5 * (f - alpha * q[v, line, node])
        for v in range(nvar):
            for j in range(n + 1):
                k = j + N_GHOST - 1  # interface between padded k and k+1
                flux[v, j] = _weno5(fp[v, k - 2], fp[v, k - 1], fp[v, k], fp[v, k + 1], fp[v, k + 2]) \
                    + _weno5(fm[v, k + 3], fm[v, k + 2], fm[v, k + 1], fm[v, k], fm[v, k - 1])
            for i in range(n):
                out[v, line, i] = -(flux[v, i + 1] - flux[v, i]) * inv_dx
    return out


def _weno5_numpy(a, b, c, d, e):
    b0 = 13.0 / 12.0 * (a - 2.0 * b + c) ** 2 + 0.25 * (a - 4.0 * b + 3.0 * c) ** 2
    b1 = 13.0 / 12.0 * (b - 2.0 * c + d) ** 2 + 0.25 * (b - d) ** 2
    b2 = 13.0 / 12.0 * (c - 2.0 * d + e) ** 2 + 0.25 * (3.0 * c - 4.0 * d + e) ** 2
    w0 = 0.1 / (WENO_EPS + b0) ** 2
    w1 = 0.6 / (WENO_EPS + b1) ** 2
    w2 = 0.3 / (WENO_EPS + b2) ** 2
    s = w0 + w1 + w2
    q0 = (2.0 * a - 7.0 * b + 11.0 * c) / 6.0
    q1 = (-b + 5.0 * c + 2.0 * d) / 6.0
    q2 = (2.0 * c + 5.0 * d - e) / 6.0
    return (w0 * q0 + w1 * q1 + w2 * q2) / s


def weno_divergence_numpy(q, normal, gamma, alpha, inv_dx):
    nvar, _, n = q.shape
    qp = np.pad(q, ((0, 0), (0, 0), (N_GHOST, N_GHOST)), mode="edge")
    rho = qp[0]
    un = qp[normal] / rho
    p = (gamma - 1.0) * (qp[-1] - 0.5 * np.sum(qp[1:-1] ** 2, axis=0) / rho)
    f = qp * un
    f[normal] += p
    f[-1] = un * (qp[-1] + p)
    fp = 0.5 * (f + alpha * qp)
    fm = 0.5 * (f - alpha * qp)
    # interface j (0..n) lies between padded k=j+2 and k+1
    s = [slice(k, k + n + 1) for k in range(6)]
    flux = _weno5_numpy(fp[..., s[0]], fp[..., s[1]], fp[..., s[2]], fp[..., s[3]], fp[..., s[4]]) \
        + _weno5_numpy(fm[..., s[5]], fm[..., s[4]], fm[..., s[3]], fm[..., s[2]], fm[..., s[1]])
    return -(flux[..., 1:] - flux[..., :-1]) * inv_dx


def _divergence(q, normal, gamma, alpha, inv_dx):
    if HAVE_NUMBA:
        return weno_divergence_loop(q, normal, gamma, alpha, inv_dx)
    return weno_divergence_numpy(q, normal, gamma, alpha, inv_dx)


def max_wave_speeds(q, gamma):
    """Per-axis global Lax-Friedrichs speeds ``max(|u_d| + c)``."""
    p = check_physical(q, gamma)
    c = np.sqrt(gamma * p / q[0])
    return tuple(float(np.max(np.abs(q[1 + d] / q[0]) + c)) for d in range(q.ndim - 1))


def _tendency(q, grid, gamma):
    alphas = max_wave_speeds(q, gamma)
    h = grid.spacing
    if grid.ndim == 1:
        return _divergence(q[:, None, :], 1, gamma, alphas[0], 1.0 / h[0])[:, 0, :]
    # x sweep: lines along axis 0 of the field, then y sweep along axis 1
    qx = np.ascontiguousarray(q.transpose(0, 2, 1))
    out = _divergence(qx, 1, gamma, alphas[0], 1.0 / h[0]).transpose(0, 2, 1)
    out = out + _divergence(np.ascontiguousarray(q), 2, gamma, alphas[1], 1.0 / h[1])
    return out


def rhs(state, gas):
    """Time derivative of the conserved fields (same layout as ``state.q``)."""
    return _tendency(state.q, state.grid, gas.gamma)


def stable_dt(state, gas, cfl=DEFAULT_CFL):
    speeds = max_wave_speeds(state.q, gas.gamma)
    rate = sum(a / h for a, h in zip(speeds, state.grid.spacing))
    return cfl / rate


def step(state, dt, gas, cfl=DEFAULT_CFL):
    """One third-order TVD Runge-Kutta step."""
    if not dt > 0.0:
        raise CflViolation(f"time step must be positive, got {dt}")
    limit = stable_dt(state, gas, cfl)
    if dt > limit * (1.0 + 1e-12):
        raise CflViolation(f"dt={dt:.6g} exceeds CFL limit {limit:.6g} (cfl={cfl})")
    g, gamma = state.grid, gas.gamma
    q0 = state.q
    q1 = q0 + dt * _tendency(q0, g, gamma)
    q2 = 0.75 * q0 + 0.25 * (q1 + dt * _tendency(q1, g, gamma))
    q3 = (1.0 / 3.0) * q0 + (2.0 / 3.0) * (q2 + dt * _tendency(q2, g, gamma))
    check_physical(q3, gamma)
    return FlowState(g, q3, state.t + dt)


def advance(state, t_target, gas, cfl=DEFAULT_CFL, dt=None):
    """Integrate to ``t_target``, landing on it exactly.

    With ``dt=None`` each substep is the CFL limit clipped to the remaining
    time.  A fixed ``dt`` gives a uniform schedule of ``ceil(span / dt)``
    substeps, which makes split integrations reproducible.
    """
    t0 = state.t
    if t_target < t0:
        raise InvalidInput(f"cannot advance backwards from t={t0} to t={t_target}")
    if t_target == t0:
        return state.copy()
    if dt is not None:
        span = t_target - t0
        count = max(1, int(np.ceil(span / dt * (1.0 - 1e-12))))
        h = span / count
        for k in range(count):
            state = step(state, h, gas, cfl)
            state.t = t_target if k == count - 1 else t0 + (k + 1) * h
        return state
    while state.t < t_target:
        remaining = t_target - state.t
        h = min(stable_dt(state, gas, cfl), remaining)
        state = step(state, h, gas, cfl)
        if h == remaining or state.t > t_target:
            state.t = t_target
    return state


def total_conserved(state):
    """Integrals of every conserved variable (sum times cell volume)."""
    vol = float(np.prod(state.grid.spacing))
    return state.q.reshape(state.q.shape[0], -1).sum(axis=1) * vol
