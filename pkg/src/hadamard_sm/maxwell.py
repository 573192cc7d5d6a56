"""The reduction map u -> phi_u and checks of its order properties."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .grid import (RadialField, RadialGrid, as_values, assemble_system, h1_inner, h1_norm,
                   integrate, laplace_beltrami)


def _check_coupling(name, value):
    if not (np.isfinite(value) and value > 0):
        raise DomainError(f"coupling {name} must be positive, got {value}")


def solve_phi(grid: RadialGrid, u, q: float) -> RadialField:
    """Solve ``-Delta_g phi + phi = q u^2`` with the grid's Dirichlet truncation.

    The weak form ``(K + M) phi = q M u^2`` is solved directly each call; the
    M-matrix structure makes ``phi >= 0`` for every ``u``.
    """
    _check_coupling("q", q)
    u = as_values(grid, u)
    return RadialField(grid, grid.maxwell_system.solve_weak(q * grid.mass * u * u))


def maxwell_identity_residual(grid: RadialGrid, u, q: float, phi=None) -> float:
    """Relative defect of ``||phi_u||_{H^1}^2 = q int phi_u u^2``."""
    u = as_values(grid, u)
    phi = solve_phi(grid, u, q) if phi is None else as_values(grid, phi)
    lhs = h1_inner(grid, phi, phi)
    rhs = q * integrate(grid, phi * u * u)
    scale = max(abs(lhs), abs(rhs))
    return 0.0 if scale == 0.0 else abs(lhs - rhs) / scale


def schrodinger_apply(grid: RadialGrid, u, e: float, q: float) -> RadialField:
    """``L(u) = -Delta_g u + u + e phi_u u`` on rows ``0..N-1``; row ``N`` returns ``u_N``."""
    _check_coupling("e", e)
    uv = as_values(grid, u)
    phi = solve_phi(grid, uv, q).values
    out = np.empty(grid.size)
    out[:-1] = -laplace_beltrami(grid, uv) + uv[:-1] + e * phi[:-1] * uv[:-1]
    out[-1] = uv[-1]
    return RadialField(grid, out)


@dataclass
class ComparisonReport:
    """Outcome of the two order-preservation checks for a pair ``(u, v)``.

    ``None`` in a ``holds`` flag means the hypothesis of that clause was not
    met, so nothing was tested. Violations are the largest amount by which
    the conclusion fails (zero when it holds).
    """

    operator_hypothesis: bool
    operator_holds: bool | None
    operator_violation: float
    phi_hypothesis: bool
    phi_holds: bool | None
    phi_violation: float


def check_comparison(grid: RadialGrid, u, v, e: float, q: float,
                     atol: float = 1e-12) -> ComparisonReport:
    """Check ``L(u) <= L(v) => u <= v`` and ``0 <= u <= v => phi_u <= phi_v``."""
    uv, vv = as_values(grid, u), as_values(grid, v)
    Lu = schrodinger_apply(grid, uv, e, q).values
    Lv = schrodinger_apply(grid, vv, e, q).values
    op_hyp = bool(np.all(Lu <= Lv + atol))
    op_viol = float(max(np.max(uv - vv), 0.0))
    phi_hyp = bool(np.all(uv >= -atol) and np.all(uv <= vv + atol))
    dphi = solve_phi(grid, uv, q).values - solve_phi(grid, vv, q).values
    phi_viol = float(max(np.max(dphi), 0.0))
    return ComparisonReport(
        operator_hypothesis=op_hyp,
        operator_holds=(op_viol <= atol) if op_hyp else None,
        operator_violation=op_viol,
        phi_hypothesis=phi_hyp,
        phi_holds=(phi_viol <= atol) if phi_hyp else None,
        phi_violation=phi_viol,
    )


def invert_schrodinger(grid: RadialGrid, rhs, e: float, q: float, tol: float = 1e-13,
                       max_iter: int = 200) -> RadialField:
    """Solve ``L(v) = rhs`` on rows ``0..N-1`` with ``v_N = 0`` by Gummel iteration.

    Each sweep freezes ``phi`` and solves the linear M-matrix problem
    ``(-Delta_g + 1 + e phi_k) v_{k+1} = rhs``; the loop stops when the
    relative H^1 change falls below ``tol``.
    """
    _check_coupling("e", e)
    rhs = as_values(grid, rhs).copy()
    rhs[-1] = 0.0
    v = grid.maxwell_system.solve(rhs).values
    for _ in range(max_iter):
        phi = solve_phi(grid, v, q).values
        new = assemble_system(grid, e * phi).solve(rhs).values
        change = h1_norm(grid, new - v)
        v = new
        if change <= tol * max(h1_norm(grid, v), 1e-300):
            break
    return RadialField(grid, v)
