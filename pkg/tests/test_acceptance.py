"""The eight acceptance criteria at their stated tolerances and runtime limits.

Run with pytest (one PASS/FAIL line per criterion appears in the terminal
summary) or directly as ``python tests/test_acceptance.py``.
"""
import itertools
import time

import numpy as np
import pytest

from hadamard_sm.checks import gradient_fd_error, observed_order
from hadamard_sm.experiments import (default_oscillatory_weight, distance, radial_ode_residual,
                                     rigidity_matrix, rng_for, run_oscillatory, run_poisson,
                                     run_sublinear)
from hadamard_sm.geometry import SpaceFormParams, ball_volume_ratio
from hadamard_sm.grid import build_grid, h1_inner, integrate, smooth_random_field
from hadamard_sm.maxwell import check_comparison, invert_schrodinger, schrodinger_apply, solve_phi
from hadamard_sm.model import Nonlinearity, ProblemConfig, RadialWeight, oscillation_levels

LINES = {}
SEED = 20240611


class Outcome:
    def __init__(self, number, title, limit):
        self.number, self.title, self.limit = number, title, limit
        self.facts, self.ok = [], True
        self.t0 = time.perf_counter()

    def require(self, name, value, passed, shown=None):
        self.facts.append(f"{name}={shown if shown is not None else f'{value:.3g}'}")
        self.ok &= bool(passed)

    def finish(self):
        self.seconds = time.perf_counter() - self.t0
        self.in_time = self.seconds < self.limit
        self.passed = self.ok and self.in_time
        self.line = (f"[{'PASS' if self.passed else 'FAIL'}] {self.number}. {self.title}: "
                     f"{', '.join(self.facts)}; {self.seconds:.1f}s (limit {self.limit:g}s)")
        LINES[self.number] = self.line
        return self


def criterion_1():
    o = Outcome(1, "Maxwell identity", 10)
    rng = rng_for(SEED, 1)
    spaces = [SpaceFormParams(n, c) for c in (0.0, -1.0) for n in (3, 5)]
    grids = [build_grid(p, None, 2000) for p in spaces]
    worst, phimin = 0.0, 0.0
    for k in range(50):
        g = grids[k % 4]
        u = smooth_random_field(g, rng).values
        phi = solve_phi(g, u, 1.0).values
        lhs, rhs = h1_inner(g, phi, phi), integrate(g, phi * u * u)
        worst = max(worst, abs(lhs - rhs) / abs(rhs))
        phimin = min(phimin, float(phi.min()))
    o.require("max_rel_err", worst, worst < 1e-10)
    o.require("min_phi", phimin, phimin >= 0)
    return o.finish()


def _gradient_configs():
    spaces = [SpaceFormParams(3, 0.0), SpaceFormParams(5, -1.0)]
    for p, kind in itertools.product(spaces, ("poisson", "sublinear_log")):
        yield f"{kind}/n={p.n},c={p.c:g}", ProblemConfig(p, Nonlinearity(kind), RadialWeight("gaussian"),
                                                         lam=2.0, N=1000)


def criterion_2():
    o = Outcome(2, "Gradient exactness", 30)
    worst = 0.0
    for k, (_, cfg) in enumerate(_gradient_configs()):
        worst = max(worst, gradient_fd_error(cfg, rng_for(SEED, 20 + k), pairs=20, t=1e-5))
    o.require("max_rel_err", worst, worst < 1e-5)
    return o.finish()


def criterion_3():
    o = Outcome(3, "Comparison principle", 20)
    rng = rng_for(SEED, 3)
    spaces = [SpaceFormParams(3, 0.0), SpaceFormParams(5, -1.0)]
    grids = [build_grid(p, None, 500) for p in spaces]
    phi_worst, hyp_ok = 0.0, True
    for k in range(100):
        g = grids[k % 2]
        u = smooth_random_field(g, rng, positive=True)
        v = u + smooth_random_field(g, rng, positive=True)
        rep = check_comparison(g, u, v, 1.0, 1.0)
        hyp_ok &= rep.phi_hypothesis
        phi_worst = max(phi_worst, rep.phi_violation)
    op_worst, op_hyp = 0.0, True
    for k in range(20):
        g = grids[k % 2]
        u = smooth_random_field(g, rng, positive=True)
        p = 1e-2 + smooth_random_field(g, rng, positive=True).values
        v = invert_schrodinger(g, schrodinger_apply(g, u, 1.0, 1.0).values + p, 1.0, 1.0)
        rep = check_comparison(g, u, v, 1.0, 1.0)
        op_hyp &= rep.operator_hypothesis
        op_worst = max(op_worst, rep.operator_violation)
    o.require("phi_violation", phi_worst, hyp_ok and phi_worst <= 1e-12)
    o.require("u_violation", op_worst, op_hyp and op_worst <= 1e-12)
    return o.finish()


def criterion_4():
    o = Outcome(4, "Poisson uniqueness", 60)
    for p in (SpaceFormParams(3, 0.0), SpaceFormParams(4, -1.0)):
        cfg = ProblemConfig(p, Nonlinearity("poisson"), RadialWeight("gaussian"), scenario="poisson")
        rep = run_poisson(cfg, starts=5, seed=SEED)
        tag = f"n={p.n},c={p.c:g}"
        nonneg = all(s["u_nonnegative"] and s["converged"] for s in rep.verdicts["solutions"].values())
        o.require(f"{tag}:pairwise", rep.data["max_pairwise_distance"],
                  rep.data["max_pairwise_distance"] < 1e-5)
        o.require(f"{tag}:refine", rep.data["refinement_change"], rep.data["refinement_change"] < 1e-4)
        o.require(f"{tag}:nonneg", 0, nonneg, shown=nonneg)
    return o.finish()


def criterion_5():
    o = Outcome(5, "Radial ODE + rigidity", 120)
    cs = [0.0, -0.5, -1.0]
    alpha0 = RadialWeight("gaussian", A=10.0)
    rep = rigidity_matrix(cs, n=3, alpha0=alpha0, R_max=10.0, N=4000)
    M = np.array(rep.data["matrix"])
    ode = 0.0
    for c in cs:
        prof = rep.runs[f"profile_c={c:g}"]
        assert prof.u.grid.N == 4000
        res = radial_ode_residual(prof.u.grid.params, prof.u, prof.phi, alpha0(prof.u.grid.r), 1.0, 1.0)
        ode = max(ode, res["sup"])
    off = M[~np.eye(3, dtype=bool)]
    tau = np.linspace(0.1, 5.0, 50)
    vol = max(float(np.max(np.abs(ball_volume_ratio(SpaceFormParams(3, c), SpaceFormParams(3, c), tau) - 1)))
              for c in cs)
    o.require("ode_residual", ode, ode < 1e-3)
    o.require("max_diag", M.diagonal().max(), M.diagonal().max() < 1e-3)
    o.require("min_offdiag", off.min(), off.min() > 1e-1)
    o.require("volume_ratio_dev", vol, vol < 1e-8)
    return o.finish()


def criterion_6():
    o = Outcome(6, "Sublinear dichotomy", 300)
    cfg = ProblemConfig(SpaceFormParams(3, 0.0), Nonlinearity("sublinear_log"), RadialWeight("gaussian"),
                        scenario="sublinear")
    rep = run_sublinear(cfg, seed=SEED)
    lo, hi = rep.data["per_lambda"]["lambda_0"], rep.data["per_lambda"]["lambda_1"]
    assert lo["lambda_over_tilde"] == pytest.approx(0.5) and hi["lambda_over_upper"] == pytest.approx(2.0)
    g1, g2 = rep.runs["lambda_1_u1"].grad_norm, rep.runs["lambda_1_u2"].grad_norm
    o.require("trivial_max_norm", lo["max_norm"], lo["max_norm"] < 1e-6)
    o.require("E1", hi["E1"], hi["E1"] < 0)
    o.require("E2", hi["E2"], hi["E2"] > 0)
    o.require("grad_norms", max(g1, g2), max(g1, g2) < 1e-6)
    o.require("distance", hi["distance"], hi["distance"] > 1e-2)
    return o.finish()


def criterion_7():
    o = Outcome(7, "Oscillatory sequence", 300)
    p = SpaceFormParams(3, 0.0)
    cfg = ProblemConfig(p, Nonlinearity("oscillatory", a=0.5, b=1.0), default_oscillatory_weight(p),
                        scenario="oscillatory")
    rep = run_oscillatory(cfg, J=3)
    norms, energies = rep.data["norms"], rep.data["energies"]
    sols = [rep.runs[f"level_{j}"].u for j in (1, 2, 3) if f"level_{j}" in rep.runs]
    pair = min((distance(a, b) for a, b in itertools.combinations(sols, 2)), default=0.0)
    in_box = all(rep.data["levels"][f"level_{j}"]["min"] >= -1e-8 and
                 rep.data["levels"][f"level_{j}"]["max"] <= oscillation_levels(j)[2] + 1e-8
                 for j in (1, 2, 3) if "max" in rep.data["levels"][f"level_{j}"])
    resid = max((rep.data["levels"][f"level_{j}"].get("untruncated_grad_norm", np.inf) for j in (1, 2, 3)))
    o.require("solutions", len(sols), len(sols) == 3, shown=len(sols))
    o.require("min_distance", pair, pair > 1e-8)
    o.require("norms_decreasing", 0, all(b < a for a, b in zip(norms, norms[1:])),
              shown="[" + ", ".join(f"{x:.3f}" for x in norms) + "]")
    o.require("max_energy", max(energies, default=np.inf), all(e < 0 for e in energies) and energies)
    o.require("in_[0,eta_j]", 0, in_box, shown=in_box)
    o.require("untruncated_residual", resid, resid < 1e-5)
    return o.finish()


def criterion_8():
    o = Outcome(8, "Discretization order", 10)
    spaces = [SpaceFormParams(3, 0.0), SpaceFormParams(3, -1.0), SpaceFormParams(5, -1.0),
              SpaceFormParams(6, -0.5)]
    order = min(observed_order(p, (500, 1000, 2000)) for p in spaces)
    o.require("min_observed_order", order, order >= 1.9)
    return o.finish()


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8]


@pytest.mark.slow
@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{k}" for k in range(1, 9)])
def test_acceptance(criterion):
    o = criterion()
    print(o.line)
    assert o.ok, o.line
    assert o.in_time, o.line


if __name__ == "__main__":
    import sys

    results = [c() for c in CRITERIA]
    for r in results:
        print(r.line)
    sys.exit(0 if all(r.passed for r in results) else 1)
