"""Exact solution of the 1D Riemann problem for an ideal gas.

Used as a verification oracle for the solver and for the ``truth`` CLI
comparison.  Star-region pressure is found by Newton iteration on the
pressure function, followed by similarity sampling at ``x / t``.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import VacuumFormation


@dataclass(frozen=True)
class StarRegion:
    p: float
    u: float
    rho_left: float
    rho_right: float
    iterations: int


def _pressure_function(p, rho_k, p_k, c_k, gamma):
    """Toro's f_K(p) and its derivative for one side."""
    if p > p_k:
        a = 2.0 / ((gamma + 1.0) * rho_k)
        b = (gamma - 1.0) / (gamma + 1.0) * p_k
        s = np.sqrt(a / (p + b))
        return (p - p_k) * s, s * (1.0 - 0.5 * (p - p_k) / (b + p))
    ratio = p / p_k
    f = 2.0 * c_k / (gamma - 1.0) * (ratio ** ((gamma - 1.0) / (2.0 * gamma)) - 1.0)
    df = 1.0 / (rho_k * c_k) * ratio ** (-(gamma + 1.0) / (2.0 * gamma))
    return f, df


def solve_star(left, right, gamma, tol=1e-12, max_iter=200):
    """Star pressure, velocity and densities for primitive states (rho, u, p)."""
    rl, ul, pl = map(float, left)
    rr, ur, pr = map(float, right)
    cl = np.sqrt(gamma * pl / rl)
    cr = np.sqrt(gamma * pr / rr)
    if 2.0 / (gamma - 1.0) * (cl + cr) <= ur - ul:
        raise VacuumFormation("pressure positivity condition violated: vacuum is generated")

    # two-rarefaction guess, floored to stay positive
    z = (gamma - 1.0) / (2.0 * gamma)
    p = ((cl + cr - 0.5 * (gamma - 1.0) * (ur - ul)) / (cl / pl ** z + cr / pr ** z)) ** (1.0 / z)
    p = max(p, 1e-8 * min(pl, pr))
    for it in range(1, max_iter + 1):
        fl, dfl = _pressure_function(p, rl, pl, cl, gamma)
        fr, dfr = _pressure_function(p, rr, pr, cr, gamma)
        p_new = p - (fl + fr + ur - ul) / (dfl + dfr)
        if p_new <= 0.0:
            p_new = 0.5 * p
        change = abs(p_new - p) / (0.5 * (p_new + p))
        p = p_new
        if change < tol:
            break
    fl, _ = _pressure_function(p, rl, pl, cl, gamma)
    fr, _ = _pressure_function(p, rr, pr, cr, gamma)
    u = 0.5 * (ul + ur) + 0.5 * (fr - fl)

    g1 = (gamma - 1.0) / (gamma + 1.0)
    if p > pl:
        rho_l = rl * (p / pl + g1) / (g1 * p / pl + 1.0)
    else:
        rho_l = rl * (p / pl) ** (1.0 / gamma)
    if p > pr:
        rho_r = rr * (p / pr + g1) / (g1 * p / pr + 1.0)
    else:
        rho_r = rr * (p / pr) ** (1.0 / gamma)
    return StarRegion(p, u, rho_l, rho_r, it)


def wave_speeds(left, right, gamma):
    """Named characteristic speeds of the solution (head/tail or shock speeds)."""
    rl, ul, pl = map(float, left)
    rr, ur, pr = map(float, right)
    star = solve_star(left, right, gamma)
    cl = np.sqrt(gamma * pl / rl)
    cr = np.sqrt(gamma * pr / rr)
    out = {"contact": star.u}
    if star.p > pl:
        out["left_shock"] = ul - cl * np.sqrt((gamma + 1) / (2 * gamma) * star.p / pl + (gamma - 1) / (2 * gamma))
    else:
        out["left_head"] = ul - cl
        out["left_tail"] = star.u - cl * (star.p / pl) ** ((gamma - 1) / (2 * gamma))
    if star.p > pr:
        out["right_shock"] = ur + cr * np.sqrt((gamma + 1) / (2 * gamma) * star.p / pr + (gamma - 1) / (2 * gamma))
    else:
        out["right_head"] = ur + cr
        out["right_tail"] = star.u + cr * (star.p / pr) ** ((gamma - 1) / (2 * gamma))
    return out


def exact_riemann(left, right, gamma, x, t, x0=0.5):
    """Sample the exact solution at positions ``x`` and time ``t``.

    Returns ``(rho, u, p)`` arrays.  At ``t == 0`` the initial discontinuity
    is returned (left state for ``x <= x0``).
    """
    x = np.asarray(x, dtype=float)
    rl, ul, pl = map(float, left)
    rr, ur, pr = map(float, right)
    rho = np.empty_like(x)
    u = np.empty_like(x)
    p = np.empty_like(x)
    if t <= 0.0:
        mask = x <= x0
        rho[:] = np.where(mask, rl, rr)
        u[:] = np.where(mask, ul, ur)
        p[:] = np.where(mask, pl, pr)
        return rho, u, p

    star = solve_star(left, right, gamma)
    cl = np.sqrt(gamma * pl / rl)
    cr = np.sqrt(gamma * pr / rr)
    g = gamma
    for n, s in enumerate((x - x0) / t):
        if s <= star.u:
            if star.p > pl:
                sl = ul - cl * np.sqrt((g + 1) / (2 * g) * star.p / pl + (g - 1) / (2 * g))
                sample = (rl, ul, pl) if s <= sl else (star.rho_left, star.u, star.p)
            else:
                head = ul - cl
                tail = star.u - cl * (star.p / pl) ** ((g - 1) / (2 * g))
                if s <= head:
                    sample = (rl, ul, pl)
                elif s >= tail:
                    sample = (star.rho_left, star.u, star.p)
                else:
                    c = 2.0 / (g + 1) * (cl + 0.5 * (g - 1) * (ul - s))
                    r = rl * (c / cl) ** (2.0 / (g - 1))
                    sample = (r, 2.0 / (g + 1) * (cl + 0.5 * (g - 1) * ul + s), pl * (c / cl) ** (2 * g / (g - 1)))
        else:
            if star.p > pr:
                sr = ur + cr * np.sqrt((g + 1) / (2 * g) * star.p / pr + (g - 1) / (2 * g))
                sample = (rr, ur, pr) if s >= sr else (star.rho_right, star.u, star.p)
            else:
                head = ur + cr
                tail = star.u + cr * (star.p / pr) ** ((g - 1) / (2 * g))
                if s >= head:
                    sample = (rr, ur, pr)
                elif s <= tail:
                    sample = (star.rho_right, star.u, star.p)
                else:
                    c = 2.0 / (g + 1) * (cr - 0.5 * (g - 1) * (ur - s))
                    r = rr * (c / cr) ** (2.0 / (g - 1))
                    sample = (r, 2.0 / (g + 1) * (-cr + 0.5 * (g - 1) * ur + s), pr * (c / cr) ** (2 * g / (g - 1)))
        rho[n], u[n], p[n] = sample
    return rho, u, p
