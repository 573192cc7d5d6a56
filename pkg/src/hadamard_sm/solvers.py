"""Critical-point finders for the one-variable energy.

* :func:`minimize` -- steepest descent with the H^1 (Riesz) gradient and an
  Armijo backtracking line search;
* :func:`minimize_box` -- the same with values clamped to ``[-b, b]``;
* :func:`mountain_pass` -- a discretized path from ``0`` to a negative-energy
  minimizer whose highest node is pushed down and finally driven to a saddle.

Solvers never raise on non-convergence; they return a report with
``converged = False`` and a ``message``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .energy import EnergyState, energy_change, state
from .errors import ConfigError, DomainError, RingConditionError
from .grid import RadialField, h1_inner, h1_norm, smooth_random_field
from .maxwell import maxwell_identity_residual, solve_phi
from .model import ProblemConfig

log = logging.getLogger(__name__)

ARMIJO = 0.25
SHRINK = 0.5
MAX_STEP = 8.0
MIN_STEP = 1e-14
LANCZOS_BREAKDOWN = 1e-5


@dataclass
class SolveReport:
    """A (candidate) weak solution pair and the evidence for it."""

    u: RadialField
    phi: RadialField
    energy: float
    grad_norm: float
    iterations: int
    converged: bool
    invariant_residuals: dict = field(default_factory=dict)
    trace: dict = field(default_factory=dict)
    method: str = ""
    message: str = ""

    def summary(self) -> dict:
        return {
            "method": self.method,
            "energy": self.energy,
            "grad_norm": self.grad_norm,
            "h1_norm": h1_norm(self.u.grid, self.u),
            "sup_norm": float(np.max(np.abs(self.u.values))),
            "iterations": self.iterations,
            "converged": self.converged,
            "message": self.message,
            "invariant_residuals": dict(self.invariant_residuals),
        }


def _initial(cfg, u_init):
    g = cfg.grid
    if u_init is None:
        return np.zeros(g.size)
    if isinstance(u_init, RadialField) and u_init.grid != g:
        raise ConfigError("initial field lives on a different grid than the config")
    u = np.array(u_init.values if isinstance(u_init, RadialField) else u_init, dtype=float)
    if u.shape != (g.size,):
        raise ConfigError(f"initial field has {u.size} values, grid has {g.size}")
    u[-1] = 0.0
    return u


def residuals(cfg: ProblemConfig, st: EnergyState) -> dict:
    """Invariant residuals of a solution pair, as stored in every report."""
    g = cfg.grid
    return {
        "maxwell_identity": maxwell_identity_residual(g, st.u, cfg.q, st.phi),
        "phi_min": float(np.min(st.phi)),
        "positivity_violation": float(max(-np.min(st.u), 0.0)),
        "dual_sup": float(np.max(np.abs(st.dual))),
        "h1_grad_norm": st.grad_norm,
    }


def _is_stationary(st: EnergyState, tol: float) -> bool:
    return st.grad_norm < tol and float(np.max(np.abs(st.dual))) < 10.0 * tol


def _report(cfg, st, it, converged, trace, method, message, grad_norm=None):
    g = cfg.grid
    phi = solve_phi(g, st.u, cfg.q)  # recomputed at exit, never reused from the loop
    return SolveReport(
        u=RadialField(g, st.u), phi=phi, energy=float(st.energy),
        grad_norm=float(st.grad_norm if grad_norm is None else grad_norm),
        iterations=it, converged=converged, invariant_residuals=residuals(cfg, st),
        trace={k: list(v) for k, v in trace.items()}, method=method, message=message,
    )


def _armijo(cfg, st, direction, slope, t0, project=None):
    """Backtrack from ``t0`` until ``E(u + t d) - E(u) <= ARMIJO * t * slope``.

    ``slope`` is ``E'(u)(d) < 0``. With ``project`` the trial point is
    ``project(u + t d)`` and the test uses the actual displacement.
    Returns ``(t, new_state)`` or ``(None, None)`` if no step is accepted.
    """
    t = t0
    while t >= MIN_STEP:
        trial = st.u + t * direction
        if project is not None:
            trial = project(trial)
        step = trial - st.u
        pred = ARMIJO * (t * slope if project is None else float(st.dual @ step))
        dE, _ = energy_change(cfg, st, step)
        if dE <= pred and dE < 0:
            new = state(cfg, trial)
            new.decrease = float(dE)
            return t, new
        t *= SHRINK
    return None, None


def _first_trial(cfg, prev, st, t):
    """Initial trial step: Barzilai-Borwein ``<s,s>/<s,y>`` in the H^1 metric.

    ``s = u_k - u_{k-1}`` and ``<s, y>_{H^1} = s . (dual_k - dual_{k-1})``.
    Falls back to doubling the last accepted step when the curvature
    estimate is not positive. The Armijo test still decides acceptance, so
    the energy decreases monotonically whatever the trial step.
    """
    if prev is None:
        return 1.0
    sk = st.u - prev.u
    sy = float(sk @ (st.dual - prev.dual))
    t0 = h1_inner(cfg.grid, sk, sk) / sy if sy > 0 else 2.0 * t
    return min(max(t0, 1e-8), MAX_STEP)


def minimize(cfg: ProblemConfig, u_init=None, tol: float | None = None,
             max_iter: int | None = None) -> SolveReport:
    """Riesz-gradient descent with Armijo backtracking.

    Converged means ``||E'(u)||_{H^-1} < tol`` and the weak residual
    ``max_i |E'(u)(e_i)| < 10 tol``.
    """
    tol = cfg.tol if tol is None else tol
    max_iter = cfg.max_iter if max_iter is None else max_iter
    if not tol > 0:
        raise ConfigError("tol must be positive")
    st = state(cfg, _initial(cfg, u_init))
    trace = {"energy": [st.energy], "grad_norm": [st.grad_norm], "step": [], "decrease": []}
    t, prev = 1.0, None
    for it in range(max_iter):
        if _is_stationary(st, tol):
            return _report(cfg, st, it, True, trace, "descent", "converged")
        slope = -float(st.dual @ st.riesz)
        t, new = _armijo(cfg, st, -st.riesz, slope, _first_trial(cfg, prev, st, t))
        if new is None:
            return _report(cfg, st, it, _is_stationary(st, tol), trace, "descent",
                           "line search failed")
        prev, st = st, new
        trace["energy"].append(st.energy)
        trace["grad_norm"].append(st.grad_norm)
        trace["step"].append(t)
        trace["decrease"].append(st.decrease)
    return _report(cfg, st, max_iter, _is_stationary(st, tol), trace, "descent",
                   "max_iter reached")


def box_stationarity(cfg: ProblemConfig, st: EnergyState, b: float) -> float:
    """``||u - clamp(u - riesz)||_{H^1}``, zero exactly at box-constrained critical points."""
    g = cfg.grid
    diff = st.u - np.clip(st.u - st.riesz, -b, b)
    diff[-1] = 0.0
    return h1_norm(g, diff)


def _box_done(st, stat, b, tol):
    free = np.abs(st.u) < b
    dual_free = float(np.max(np.abs(st.dual[free]))) if np.any(free) else 0.0
    return stat < tol and dual_free < 10.0 * tol


def minimize_box(cfg: ProblemConfig, b: float, u_init=None, tol: float | None = None,
                 max_iter: int | None = None) -> SolveReport:
    """Projected Riesz-gradient descent on ``{||u||_inf <= b}``.

    Each trial point is ``clamp(u - t riesz)``; the Armijo test uses the
    actual displacement. Converged means the stationarity measure
    :func:`box_stationarity` is below ``tol`` and the weak residual on the
    nodes strictly inside the box is below ``10 tol``.
    """
    if not b > 0:
        raise DomainError(f"box bound must be positive, got {b}")
    tol = cfg.tol if tol is None else tol
    max_iter = cfg.max_iter if max_iter is None else max_iter

    def clamp(v):
        return np.clip(v, -b, b)

    st = state(cfg, clamp(_initial(cfg, u_init)))
    stat = box_stationarity(cfg, st, b)
    trace = {"energy": [st.energy], "grad_norm": [stat], "step": [], "decrease": []}
    t, prev = 1.0, None
    for it in range(max_iter):
        if _box_done(st, stat, b, tol):
            return _report(cfg, st, it, True, trace, "projected", "converged", stat)
        t, new = _armijo(cfg, st, -st.riesz, 0.0, _first_trial(cfg, prev, st, t), project=clamp)
        if new is None:
            return _report(cfg, st, it, False, trace, "projected", "line search failed", stat)
        prev, st = st, new
        stat = box_stationarity(cfg, st, b)
        trace["energy"].append(st.energy)
        trace["grad_norm"].append(stat)
        trace["step"].append(t)
        trace["decrease"].append(st.decrease)
    return _report(cfg, st, max_iter, _box_done(st, stat, b, tol), trace, "projected",
                   "max_iter reached", stat)


# --------------------------------------------------------------------------
# mountain pass
# --------------------------------------------------------------------------

def ring_check(cfg: ProblemConfig, u_low, radius: float | None = None, samples: int = 32,
               seed: int = 0) -> dict:
    """Sample ``E`` on a sphere ``||u||_{H^1} = radius`` around the origin.

    The sample includes the direction of ``u_low`` itself and random smooth
    fields of both signs; the ring condition holds if every sample has
    positive energy. Without an explicit ``radius`` the spheres
    ``||u_low|| / 2^k`` (``k = 2..12``) are tried from the outside in and the
    first one on which the condition holds is reported.
    """
    g = cfg.grid
    low = np.asarray(u_low.values if isinstance(u_low, RadialField) else u_low, dtype=float)
    norm_low = h1_norm(g, low)
    rng = np.random.Generator(np.random.Philox(key=seed))
    dirs = [low] + [smooth_random_field(g, rng, positive=(k % 2 == 0)).values for k in range(samples)]
    dirs = [d / h1_norm(g, d) for d in dirs if h1_norm(g, d) > 0]
    radii = [radius] if radius is not None else [norm_low / 2.0 ** k for k in range(2, 13)]
    out = None
    for rad in radii:
        min_e = min(state(cfg, rad * d).energy for d in dirs)
        out = {"radius": float(rad), "low_norm": norm_low, "min_energy": float(min_e),
               "samples": len(dirs), "holds": bool(min_e > 0 and rad < norm_low)}
        if out["holds"]:
            break
    return out


def _retension(g, path):
    """Redistribute interior nodes at equal H^1 arclength along the polygon."""
    seg = np.array([h1_norm(g, path[k + 1] - path[k]) for k in range(len(path) - 1)])
    s = np.concatenate([[0.0], np.cumsum(seg)])
    total = s[-1]
    if total == 0:
        return path
    out = [path[0]]
    for target in total * np.arange(1, len(path) - 1) / (len(path) - 1):
        k = min(int(np.searchsorted(s, target, side="right")) - 1, len(seg) - 1)
        w = (target - s[k]) / seg[k] if seg[k] > 0 else 0.0
        out.append((1.0 - w) * path[k] + w * path[k + 1])
    out.append(path[-1])
    return out


def _tangent(g, path, m):
    t = path[m + 1] - path[m - 1]
    n = h1_norm(g, t)
    return t / n if n > 0 else t


def _segment_end(cfg, low, samples=400):
    """First point ``t* u_low`` past the energy peak of the segment with ``E < 0``.

    The rest of the segment, ``[t*, 1] u_low``, must stay below zero; the
    mountain-pass path is then built between ``0`` and ``t* u_low``, which
    puts all path nodes where the pass actually is.
    """
    ts = np.linspace(0.0, 1.0, samples + 1)
    es = np.array([state(cfg, t * low).energy for t in ts])
    peak = int(np.argmax(es))
    after = np.nonzero(es[peak:] < 0)[0]
    if len(after) == 0:
        raise DomainError("segment from 0 to u_low never drops below zero")
    k = peak + int(after[0])
    return float(ts[k]), {"segment_peak_t": float(ts[peak]), "segment_peak_energy": float(es[peak]),
                          "segment_end_t": float(ts[k]),
                          "segment_tail_max_energy": float(np.max(es[k:]))}


def min_mode(cfg: ProblemConfig, u, start, k: int = 20, eps: float = 1e-5):
    """Lowest eigenpair of the H^1-Riesz Hessian of ``E`` at ``u``.

    Lanczos (with full reorthogonalization in the H^1 inner product) on
    the map ``v -> (riesz(u + eps v) - riesz(u - eps v)) / (2 eps)``; only
    gradients are evaluated, as in dimer-type saddle searches.
    """
    g = cfg.grid
    u = np.asarray(u, dtype=float)
    step = eps * max(1.0, h1_norm(g, u))

    def hess(v):
        return (state(cfg, u + step * v).riesz - state(cfg, u - step * v).riesz) / (2.0 * step)

    q = start / h1_norm(g, start)
    basis, alphas, betas = [q], [], []
    for j in range(k):
        w = hess(basis[-1])
        scale = h1_norm(g, w)
        a = h1_inner(g, w, basis[-1])
        alphas.append(a)
        for b in basis:
            w = w - h1_inner(g, w, b) * b
        beta = h1_norm(g, w)
        # below this the remainder is finite-difference noise, not a new direction
        if j == k - 1 or beta < LANCZOS_BREAKDOWN * max(scale, 1e-300):
            break
        betas.append(beta)
        basis.append(w / beta)
    T = np.diag(alphas) + np.diag(betas[: len(alphas) - 1], 1) + np.diag(betas[: len(alphas) - 1], -1)
    evals, evecs = np.linalg.eigh(T)
    v = sum(c * b for c, b in zip(evecs[:, 0], basis))
    v = v / h1_norm(g, v)
    v[-1] = 0.0
    return float(evals[0]), v


def mountain_pass(cfg: ProblemConfig, u_low, P: int = 21, tol: float | None = None,
                  max_iter: int | None = None, path_iter: int = 300,
                  ring: dict | None = None, refresh: int = 10) -> SolveReport:
    """Saddle point between ``0`` and the negative-energy state ``u_low``.

    Phase 1 (path): the highest interior node of a ``P``-node path takes one
    Armijo descent step and the path is re-tensioned by H^1 arclength,
    until that node's gradient is small or stops improving. Phase 2
    (climb): the highest node moves along ``-g + 2 <g, v> v``, where ``v``
    (initially the path tangent) is refreshed to the lowest Hessian mode
    every ``refresh`` steps; a step is accepted when it lowers the gradient
    norm. The path ends at the first negative-energy point of the segment
    ``[0, u_low]`` (see :func:`_segment_end`).
    """
    if P < 3:
        raise ConfigError(f"mountain pass needs P >= 3 path nodes, got {P}")
    tol = cfg.tol if tol is None else tol
    max_iter = cfg.max_iter if max_iter is None else max_iter
    g = cfg.grid
    low = _initial(cfg, u_low)
    st_low = state(cfg, low)
    if not st_low.energy < 0:
        raise DomainError(f"mountain pass needs E(u_low) < 0, got {st_low.energy:.3g}")
    ring = ring_check(cfg, low) if ring is None else ring
    if not ring["holds"]:
        raise RingConditionError(
            f"ring condition failed: min E = {ring['min_energy']:.3g} on ||u|| = {ring['radius']:.3g}")
    t_end, seg = _segment_end(cfg, low)
    end = t_end * low

    path = [k / (P - 1) * end for k in range(P)]
    energies = np.array([state(cfg, p).energy for p in path])
    trace = {"energy": [], "grad_norm": [], "node": [], "phase": []}

    def record(st, m, phase):
        trace["energy"].append(st.energy)
        trace["grad_norm"].append(st.grad_norm)
        trace["node"].append(m)
        trace["phase"].append(phase)

    t = 1.0
    best = np.inf
    stale = 0
    for _ in range(path_iter):
        # ties go to the lowest index, which also settles oscillating maxima
        m = int(np.argmax(energies[1:-1])) + 1
        st = state(cfg, path[m])
        record(st, m, "path")
        if st.grad_norm < best * 0.999:
            best, stale = st.grad_norm, 0
        else:
            stale += 1
        if st.grad_norm < 1e-2 or stale >= 20:
            break
        slope = -float(st.dual @ st.riesz)
        t, new = _armijo(cfg, st, -st.riesz, slope, min(2.0 * t, MAX_STEP) if t else 1.0)
        if new is None:
            break
        path[m] = new.u
        path = _retension(g, path)
        energies = np.array([state(cfg, p).energy for p in path])

    m = int(np.argmax(energies[1:-1])) + 1
    st = state(cfg, path[m])
    mu, tau = min_mode(cfg, st.u, _tangent(g, path, m))
    step = 1.0 / max(1.0, abs(mu))
    it = 0
    converged = False
    for it in range(max_iter):
        record(st, m, "climb")
        if _is_stationary(st, tol):
            converged = True
            break
        if it and it % refresh == 0:
            mu, tau = min_mode(cfg, st.u, tau)
        d = -st.riesz + 2.0 * h1_inner(g, st.riesz, tau) * tau
        trial = None
        while step >= 1e-12:
            cand = state(cfg, st.u + step * d)
            if cand.grad_norm < st.grad_norm:
                trial = cand
                break
            step *= SHRINK
        if trial is None:
            break
        st = trial
        step = min(2.0 * step, 1.0)
    rep = _report(cfg, st, it, converged, trace, "mountain_pass",
                  "converged" if converged else "climbing stalled")
    rep.invariant_residuals.update(seg)
    rep.invariant_residuals.update(ring_radius=ring["radius"], ring_min_energy=ring["min_energy"],
                                   min_mode_eigenvalue=mu)
    return rep
