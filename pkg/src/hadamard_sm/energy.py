"""The one-variable energy, its pieces, and its exact discrete derivative.

For a config with couplings ``e, q``, parameter ``lam``, weight ``alpha``
and primitive ``F``::

    E(u) = H(u) - lam * F_alpha(u)
    H(u) = 1/2 ||u||_{H^1}^2 + e/4 int phi_u u^2
    F_alpha(u) = int alpha F(u)

Because ``phi_u`` itself depends on ``u`` the derivative of the Maxwell term
is ``e phi_u u`` rather than ``e/2 phi_u u``; in the discrete setting this is
exact, not only asymptotic, since ``phi_u`` solves the discrete weak problem.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import RadialField, as_values, h1_inner, integrate, stiffness_apply
from .maxwell import solve_phi
from .model import ProblemConfig


@dataclass
class EnergyState:
    """Energy, potential and gradients of one iterate (raw nodal arrays)."""

    u: np.ndarray
    phi: np.ndarray
    H: float
    F: float
    energy: float
    dual: np.ndarray
    riesz: np.ndarray
    decrease: float | None = None  # E(u) - E(previous iterate), set by line searches

    @property
    def grad_norm(self) -> float:
        """H^1 norm of the Riesz gradient (the dual norm of E'(u))."""
        return float(np.sqrt(max(self.dual @ self.riesz, 0.0)))


def _values(cfg, u):
    v = np.array(as_values(cfg.grid, u), dtype=float)
    v[-1] = 0.0
    return v


def eval_H(cfg: ProblemConfig, u) -> float:
    g = cfg.grid
    u = as_values(g, u)
    phi = solve_phi(g, u, cfg.q).values
    return 0.5 * h1_inner(g, u, u) + 0.25 * cfg.e * integrate(g, phi * u * u)


def eval_Ffun(cfg: ProblemConfig, u) -> float:
    g = cfg.grid
    return integrate(g, cfg.alpha * cfg.nonlinearity.F(as_values(g, u)))


def eval_energy(cfg: ProblemConfig, u) -> float:
    return eval_H(cfg, u) - cfg.lam * eval_Ffun(cfg, u)


def dual_gradient(cfg: ProblemConfig, u, phi=None) -> np.ndarray:
    """Coefficients ``d`` with ``E'(u)(v) = sum_i d_i v_i`` for all ``v`` vanishing at ``R_max``."""
    g = cfg.grid
    u = as_values(g, u)
    if phi is None:
        phi = solve_phi(g, u, cfg.q).values
    d = stiffness_apply(g, u) + g.mass * (u + cfg.e * phi * u - cfg.lam * cfg.alpha * cfg.nonlinearity.f(u))
    d[-1] = 0.0
    return d


def state(cfg: ProblemConfig, u) -> EnergyState:
    """Evaluate everything the solvers need at ``u`` with one Maxwell solve."""
    g = cfg.grid
    u = _values(cfg, u)
    phi = solve_phi(g, u, cfg.q).values
    H = 0.5 * h1_inner(g, u, u) + 0.25 * cfg.e * integrate(g, phi * u * u)
    F = integrate(g, cfg.alpha * cfg.nonlinearity.F(u))
    dual = dual_gradient(cfg, u, phi)
    riesz = g.maxwell_system.solve_weak(dual)
    return EnergyState(u, phi, H, F, H - cfg.lam * F, dual, riesz)


def eval_gradient(cfg: ProblemConfig, u) -> tuple[RadialField, RadialField]:
    """``(dual, riesz)``: the derivative as a coefficient vector and its H^1 representative."""
    st = state(cfg, u)
    g = cfg.grid
    return RadialField(g, st.dual), RadialField(g, st.riesz)


def energy_change(cfg: ProblemConfig, st: EnergyState, d: np.ndarray) -> tuple[float, np.ndarray]:
    """``E(u + d) - E(u)`` computed from differences, plus ``phi_{u+d}``.

    Forming the difference of two energies loses everything below
    ``eps * |E|``; here each term is written so that it scales with ``d``:
    the Maxwell part uses ``int phi_a a^2 - int phi_b b^2 = int (a^2 - b^2)(phi_a + phi_b)``,
    which holds exactly for the discrete solution map.
    """
    g = cfg.grid
    u = st.u
    new = u + d
    phi_new = solve_phi(g, new, cfg.q).values
    quad = h1_inner(g, u, d) + 0.5 * h1_inner(g, d, d)
    maxwell = 0.25 * cfg.e * integrate(g, (2.0 * u + d) * d * (st.phi + phi_new))
    source = integrate(g, cfg.alpha * cfg.nonlinearity.F_change(u, d))
    return quad + maxwell - cfg.lam * source, phi_new
