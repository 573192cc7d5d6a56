"""The invariant suite behind ``hadamard-sm check``.

Each check is a small numerical experiment returning a :class:`CheckResult`
with the measured value, the threshold it was compared to, and the verdict.
All randomness comes from counter-based streams of one seed, so the suite is
reproducible.
"""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass

import numpy as np

from .energy import eval_energy, eval_Ffun, eval_gradient, eval_H
from .experiments import rng_for
from .geometry import (SpaceFormParams, cotangent_coeff, metric_coeff, model_volume,
                       static_profile_w)
from .grid import (apply_operator, assemble_system, build_grid, h1_inner, integrate,
                   smooth_random_field, stiffness_apply)
from .maxwell import check_comparison, maxwell_identity_residual, solve_phi
from .model import (Nonlinearity, ProblemConfig, RadialWeight, oscillation_levels,
                    weight_integrability)


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: float
    seconds: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


def _result(name, value, threshold, passed):
    return CheckResult(name, bool(passed), float(value), float(threshold))


SPACES = [SpaceFormParams(3, 0.0), SpaceFormParams(5, -1.0)]


# --- geometry ---------------------------------------------------------------

def check_euclidean_comparison(seed):
    rng = rng_for(seed, 1)
    worst = np.inf
    for _ in range(20):
        c = -rng.uniform(0.05, 4.0)
        r = rng.uniform(0.01, 5.0)
        p = SpaceFormParams(3, c)
        worst = min(worst, metric_coeff(p, r) - r, cotangent_coeff(p, r) - 1.0 / r)
    return _result("geometry.strict_comparison", worst, 0.0, worst > 0)


def check_derivative_relation(seed):
    rng = rng_for(seed, 2)
    worst = 0.0
    for _ in range(20):
        p = SpaceFormParams(3, -rng.uniform(0.0, 4.0))
        r = rng.uniform(0.1, 4.0)
        dr = 1e-6 * r
        fd = (metric_coeff(p, r + dr) - metric_coeff(p, r - dr)) / (2 * dr)
        exact = metric_coeff(p, r) * cotangent_coeff(p, r)
        worst = max(worst, abs(fd - exact) / abs(exact))
    return _result("geometry.derivative_relation", worst, 1e-6, worst < 1e-6)


def check_volume_monotone(seed):
    cs = np.linspace(-2.0, 0.0, 11)
    worst = np.inf
    for n in (3, 4, 5, 6):
        for rho in (0.5, 1.0, 3.0):
            v = [model_volume(SpaceFormParams(n, c), rho) for c in cs]
            worst = min(worst, float(np.min(-np.diff(v))))
    return _result("geometry.volume_monotone_in_c", worst, 0.0, worst >= 0)


def check_static_profile(seed):
    p = SpaceFormParams(3, -1.0)
    g = build_grid(p, 4.0, 4000)
    w = static_profile_w(p, g.r[:: 40], h_rel=1e-3)
    # the profile is smooth; interpolate the nested-quadrature samples with a cubic spline
    from scipy.interpolate import CubicSpline

    vals = CubicSpline(g.r[:: 40], w)(g.r)
    lap = -stiffness_apply(g, vals)[:-1] / g.mass[:-1]
    dev = float(np.max(np.abs(lap[40:-40] - 1.0)))
    return _result("geometry.static_profile_laplacian", dev, 1e-3, dev < 1e-3)


# --- grid --------------------------------------------------------------------

def _operator_errors(p, Ns, R=8.0):
    from .geometry import cotangent_coeff as ct

    n = p.n
    errs = []
    for N in Ns:
        g = build_grid(p, R, N)
        r = g.r
        u = np.exp(-r ** 2)
        u[-1] = 0.0
        d1 = -2.0 * r * np.exp(-r ** 2)
        d2 = (4.0 * r ** 2 - 2.0) * np.exp(-r ** 2)
        exact = np.empty_like(r)
        exact[0] = 2.0 * n + 1.0
        exact[1:] = -d2[1:] - (n - 1) * ct(p, r[1:]) * d1[1:] + u[1:]
        A = apply_operator(g, u).values
        step = N // Ns[0]
        errs.append(float(np.max(np.abs(A - exact)[:-1][::step])))
    return np.array(errs)


def observed_order(p: SpaceFormParams, Ns=(500, 1000, 2000)) -> float:
    """Smallest observed order of the operator on ``exp(-r^2)`` over successive doublings."""
    errs = _operator_errors(p, Ns)
    return float(np.min(np.log2(errs[:-1] / errs[1:])))


def check_consistency_order(seed):
    order = min(observed_order(p) for p in (SpaceFormParams(3, 0.0), SpaceFormParams(4, -1.0)))
    return _result("grid.consistency_order", order, 1.9, order >= 1.9)


def check_maximum_principle(seed):
    rng = rng_for(seed, 3)
    worst = 0.0
    for p in SPACES:
        sysm = assemble_system(build_grid(p, None, 400))
        for _ in range(50):
            rhs = rng.uniform(0.0, 1.0, sysm.grid.size)
            worst = min(worst, float(np.min(sysm.solve(rhs).values)))
    return _result("grid.maximum_principle", worst, 0.0, worst >= 0)


def check_h1_consistency(seed):
    rng = rng_for(seed, 4)
    worst = 0.0
    for p in SPACES:
        g = build_grid(p, None, 1000)
        for _ in range(10):
            u = smooth_random_field(g, rng).values
            ref = g.sphere_factor * np.sum(g.flux_weight * (np.diff(u) / g.h) ** 2 * g.h) + integrate(g, u * u)
            a0 = float(stiffness_apply(g, u) @ u + g.mass @ (u * u))
            val = h1_inner(g, u, u)
            worst = max(worst, abs(val - ref) / ref, abs(val - a0) / ref)
    return _result("grid.h1_energy_consistency", worst, 1e-10, worst < 1e-10)


# --- maxwell -----------------------------------------------------------------

def check_maxwell_identity(seed, samples=50):
    rng = rng_for(seed, 5)
    worst, phimin = 0.0, 0.0
    for k in range(samples):
        g = build_grid(SPACES[k % 2], None, 2000)
        u = smooth_random_field(g, rng).values
        phi = solve_phi(g, u, 1.0).values
        worst = max(worst, maxwell_identity_residual(g, u, 1.0, phi))
        phimin = min(phimin, float(phi.min()))
    return _result("maxwell.identity", worst, 1e-10, worst < 1e-10 and phimin >= 0)


def check_maxwell_monotone(seed):
    rng = rng_for(seed, 6)
    worst = np.inf
    for k in range(50):
        g = build_grid(SPACES[k % 2], None, 1000)
        u = smooth_random_field(g, rng).values
        v = smooth_random_field(g, rng).values
        pu, pv = solve_phi(g, u, 1.0).values, solve_phi(g, v, 1.0).values
        worst = min(worst, integrate(g, (u * pu - v * pv) * (u - v)))
    return _result("maxwell.monotonicity", worst, -1e-12, worst >= -1e-12)


def check_maxwell_convex(seed):
    rng = rng_for(seed, 7)
    worst = np.inf
    ts = np.array([0.0, 0.25, 0.5, 0.75, 1.0])
    for k in range(20):
        g = build_grid(SPACES[k % 2], None, 1000)
        u = smooth_random_field(g, rng).values
        v = smooth_random_field(g, rng).values
        vals = []
        for t in ts:
            w = t * u + (1 - t) * v
            vals.append(integrate(g, solve_phi(g, w, 1.0).values * w * w))
        vals = np.array(vals)
        # midpoint convexity on consecutive triples of the equispaced points
        second = vals[:-2] - 2.0 * vals[1:-1] + vals[2:]
        worst = min(worst, float(np.min(second)) / max(1.0, float(np.max(np.abs(vals)))))
    return _result("maxwell.convexity", worst, -1e-12, worst >= -1e-12)


def check_comparison_pairs(seed):
    rng = rng_for(seed, 8)
    worst = 0.0
    for k in range(100):
        g = build_grid(SPACES[k % 2], None, 500)
        u = smooth_random_field(g, rng, positive=True).values
        v = u + smooth_random_field(g, rng, positive=True).values
        worst = max(worst, check_comparison(g, u, v, 1.0, 1.0).phi_violation)
    return _result("maxwell.comparison_phi", worst, 1e-12, worst <= 1e-12)


# --- model -------------------------------------------------------------------

def check_sublinear_witness(seed):
    nl = Nonlinearity("sublinear_log")
    small = float(nl.f(np.array(1e-8)) / 1e-8)
    large = float(nl.f(np.array(1e8)) / 1e8)
    F1 = float(nl.F(np.array(1.0)))
    worst = max(small, large)
    return _result("model.sublinear_witness", worst, 1e-6, worst < 1e-6 and F1 > 0)


def check_oscillatory_witness(seed):
    nl = Nonlinearity("oscillatory")
    s = np.array([1.0 / (2 * np.pi * j) for j in range(1, 9)])
    ratios = nl.F(s) / s ** 2
    growing = bool(np.all(np.diff(ratios) > 0))
    fs = nl.f(np.array([oscillation_levels(j)[1] for j in range(1, 11)]))
    worst = float(np.max(fs))
    return _result("model.oscillatory_witness", worst, 0.0, growing and worst < 0)


def check_weight_integrability(seed):
    worst = 0.0
    for w in (RadialWeight("gaussian"), RadialWeight("annulus_bump", A=10.0, sigma=0.5, r_in=2, r_out=4)):
        for p in SPACES:
            info = weight_integrability(w, p)
            worst = max(worst, info["L1_change"], info["L2sq_change"])
    return _result("model.weight_integrability", worst, 1e-8, worst < 1e-8)


# --- energy ------------------------------------------------------------------

def _cfg(p, kind, lam=2.0, N=1000):
    return ProblemConfig(p, Nonlinearity(kind), RadialWeight("gaussian"), lam=lam, N=N)


def gradient_fd_error(cfg: ProblemConfig, rng, pairs: int = 20, t: float = 1e-5) -> float:
    """Worst relative gap between ``E'(u)(v)`` and a central difference of ``E``."""
    g = cfg.grid
    worst = 0.0
    for _ in range(pairs):
        u = smooth_random_field(g, rng).values
        v = smooth_random_field(g, rng).values
        fd = (eval_energy(cfg, u + t * v) - eval_energy(cfg, u - t * v)) / (2 * t)
        an = float(eval_gradient(cfg, u)[0].values @ v)
        worst = max(worst, abs(fd - an) / max(abs(an), 1e-300))
    return worst


def check_gradient(seed):
    rng = rng_for(seed, 9)
    worst = max(gradient_fd_error(_cfg(p, kind), rng)
                for p in SPACES for kind in ("poisson", "sublinear_log"))
    return _result("energy.gradient_fd", worst, 1e-5, worst < 1e-5)


def check_decomposition(seed):
    rng = rng_for(seed, 10)
    worst = 0.0
    for k in range(20):
        cfg = _cfg(SPACES[k % 2], "sublinear_log", lam=rng.uniform(0, 5))
        u = smooth_random_field(cfg.grid, rng).values
        worst = max(worst, abs(eval_energy(cfg, u) - (eval_H(cfg, u) - cfg.lam * eval_Ffun(cfg, u))))
    return _result("energy.decomposition", worst, 1e-12, worst < 1e-12)


def check_poisson_convexity(seed):
    rng = rng_for(seed, 11)
    worst = np.inf
    for k in range(20):
        cfg = _cfg(SPACES[k % 2], "poisson", lam=1.0)
        u = smooth_random_field(cfg.grid, rng).values
        v = smooth_random_field(cfg.grid, rng).values
        e = [eval_energy(cfg, t * u + (1 - t) * v) for t in (0.0, 0.5, 1.0)]
        worst = min(worst, e[0] + e[2] - 2 * e[1])
    return _result("energy.poisson_convexity", worst, 0.0, worst > 0)


def check_coercivity(seed):
    """``E(t u)/t^2`` along ``t = 2^k`` ends above ``||u||^2/2`` and grows monotonically."""
    rng = rng_for(seed, 12)
    cfg = _cfg(SPACES[0], "sublinear_log", lam=10.0)
    u = smooth_random_field(cfg.grid, rng, positive=True).values
    half = 0.5 * h1_inner(cfg.grid, u, u)
    ratios = np.array([eval_energy(cfg, 2.0 ** k * u) / 4.0 ** k for k in range(9)])
    ok = bool(np.all(np.isfinite(ratios)) and ratios[-1] >= half and np.all(np.diff(ratios[3:]) > 0))
    return _result("energy.coercivity", ratios[-1] / half, 1.0, ok)


ALL_CHECKS = [
    check_euclidean_comparison, check_derivative_relation, check_volume_monotone,
    check_static_profile, check_consistency_order, check_maximum_principle,
    check_h1_consistency, check_maxwell_identity, check_maxwell_monotone, check_maxwell_convex,
    check_comparison_pairs, check_sublinear_witness, check_oscillatory_witness,
    check_weight_integrability, check_gradient, check_decomposition, check_poisson_convexity,
    check_coercivity,
]


def run_suite(seed: int = 0) -> list[CheckResult]:
    out = []
    for chk in ALL_CHECKS:
        t0 = time.perf_counter()
        res = chk(seed)
        res.seconds = time.perf_counter() - t0
        out.append(res)
    return out
