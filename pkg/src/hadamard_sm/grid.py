"""Radial finite-volume discretization of H^1 on a model space.

Nodes ``r_i = i*h`` for ``i = 0..N`` with ``h = R_max/N``. The flux weights
``s_c(r_{i+1/2})^(n-1)`` live on half nodes, the mass of node ``i`` is the
exact model-space volume of its cell ``[r_{i-1/2}, r_{i+1/2}]`` (clipped to
``[0, R_max]``). The flux through the pole is zero, which closes the scheme
at ``r = 0`` without ever evaluating ``ct_c(0)``; the last node carries a
homogeneous Dirichlet condition standing in for decay at infinity.

With ``K`` the stiffness matrix and ``M`` the diagonal mass matrix, the
discrete H^1 inner product is ``u^T (K + M) v`` and the discrete operator
``-Delta_g + 1 + V`` is ``M^{-1} K + 1 + V`` on rows ``0..N-1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded

from .errors import ConfigError, DomainError, GridMismatchError
from .geometry import SpaceFormParams, metric_coeff, unit_ball_volume

N_MIN_NODES = 16
_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


def default_rmax(params: SpaceFormParams) -> float:
    """Truncation radius used when a config does not set one."""
    return 15.0 if params.c == 0.0 else 10.0


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Uniform radial mesh with the volume weight baked into its operators."""

    params: SpaceFormParams
    R_max: float
    N: int
    r: np.ndarray = field(init=False, repr=False)
    h: float = field(init=False)
    flux_weight: np.ndarray = field(init=False, repr=False)
    cell_volume: np.ndarray = field(init=False, repr=False)
    sphere_factor: float = field(init=False)

    def __post_init__(self):
        if not (np.isfinite(self.R_max) and self.R_max > 0):
            raise ConfigError(f"R_max must be positive, got {self.R_max}")
        if int(self.N) != self.N or self.N < N_MIN_NODES:
            raise ConfigError(f"N must be an integer >= {N_MIN_NODES}, got {self.N}")
        N = int(self.N)
        h = float(self.R_max) / N
        r = h * np.arange(N + 1)
        n = self.params.n
        half = h * (np.arange(N) + 0.5)
        edges = np.concatenate([[0.0], half, [float(self.R_max)]])
        a, b = edges[:-1], edges[1:]
        mid, rad = 0.5 * (a + b), 0.5 * (b - a)
        pts = mid[:, None] + rad[:, None] * _GL_X[None, :]
        cell = rad * (metric_coeff(self.params, pts) ** (n - 1) @ _GL_W)
        for name, value in [("N", N), ("R_max", float(self.R_max)), ("h", h), ("r", r),
                            ("flux_weight", metric_coeff(self.params, half) ** (n - 1)),
                            ("cell_volume", cell),
                            ("sphere_factor", n * unit_ball_volume(n))]:
            object.__setattr__(self, name, value)
        for arr in (self.r, self.flux_weight, self.cell_volume):
            arr.setflags(write=False)

    def __eq__(self, other):
        if not isinstance(other, RadialGrid):
            return NotImplemented
        return (self.params, self.R_max, self.N) == (other.params, other.R_max, other.N)

    def __hash__(self):
        return hash((self.params, self.R_max, self.N))

    @property
    def size(self) -> int:
        return self.N + 1

    @cached_property
    def mass(self) -> np.ndarray:
        """Quadrature weights ``m_i`` including the sphere factor n*omega_n."""
        m = self.sphere_factor * self.cell_volume
        m.setflags(write=False)
        return m

    @cached_property
    def node_weight(self) -> np.ndarray:
        """Node weights ``cell_volume/h``, approximately ``s_c(r_i)^(n-1)``."""
        return self.cell_volume / self.h

    @cached_property
    def maxwell_system(self) -> "TridiagonalSystem":
        """Factorized ``-Delta_g + 1``, shared by the Maxwell and Riesz solves."""
        return assemble_system(self, None)

    def field(self, values) -> "RadialField":
        return RadialField(self, values)

    def zeros(self) -> "RadialField":
        return RadialField(self, np.zeros(self.size))

    def sample(self, func) -> "RadialField":
        """Evaluate ``func(r)`` at the nodes."""
        return RadialField(self, np.asarray(func(self.r), dtype=float) * np.ones(self.size))


class RadialField(np.lib.mixins.NDArrayOperatorsMixin):
    """Nodal values of a radial function on a :class:`RadialGrid`.

    Arithmetic follows numpy; combining fields from different grids raises
    :class:`GridMismatchError`.
    """

    __slots__ = ("grid", "values")

    def __init__(self, grid: RadialGrid, values):
        arr = np.array(values, dtype=float)
        if arr.shape != (grid.size,):
            raise GridMismatchError(f"field of shape {arr.shape} on a grid with {grid.size} nodes")
        if not np.all(np.isfinite(arr)):
            raise DomainError("field values must be finite")
        self.grid = grid
        self.values = arr

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __array_ufunc__(self, ufunc, method, *inputs, **kwargs):
        grid = self.grid
        raw = []
        for x in inputs:
            if isinstance(x, RadialField):
                if x.grid != grid:
                    raise GridMismatchError("fields live on different grids")
                raw.append(x.values)
            else:
                raw.append(x)
        result = getattr(ufunc, method)(*raw, **kwargs)
        if isinstance(result, np.ndarray) and result.shape == (grid.size,) and result.dtype.kind == "f":
            return RadialField(grid, result)
        return result

    def __len__(self):
        return self.grid.size

    def __getitem__(self, idx):
        return self.values[idx]

    def __repr__(self):
        return f"RadialField(N={self.grid.N}, max|u|={np.max(np.abs(self.values)):.3g})"

    def copy(self) -> "RadialField":
        return RadialField(self.grid, self.values.copy())


def build_grid(params: SpaceFormParams, R_max: float | None = None, N: int = 2000) -> RadialGrid:
    """Uniform grid on ``[0, R_max]``; ``R_max`` defaults per curvature."""
    return RadialGrid(params, default_rmax(params) if R_max is None else float(R_max), N)


def as_values(grid: RadialGrid, f) -> np.ndarray:
    """Raw nodal array of ``f`` after checking it belongs to ``grid``."""
    if isinstance(f, RadialField):
        if f.grid != grid:
            raise GridMismatchError("field belongs to a different grid")
        return f.values
    arr = np.asarray(f, dtype=float)
    if arr.shape != (grid.size,):
        raise GridMismatchError(f"array of shape {arr.shape} on a grid with {grid.size} nodes")
    return arr


def integrate(grid: RadialGrid, f) -> float:
    """Integral over the truncated ball of a radial function."""
    return float(grid.mass @ as_values(grid, f))


def stiffness_apply(grid: RadialGrid, u) -> np.ndarray:
    """``K u``: weak form of ``-Delta_g`` (all rows, no boundary closure)."""
    u = as_values(grid, u)
    flux = grid.flux_weight * np.diff(u) / grid.h
    out = np.zeros(grid.size)
    out[:-1] -= flux
    out[1:] += flux
    return grid.sphere_factor * out


def h1_inner(grid: RadialGrid, u, v) -> float:
    """Discrete ``int (u'v' + uv) dv_g``."""
    u = as_values(grid, u)
    v = as_values(grid, v)
    grad = np.sum(grid.flux_weight * np.diff(u) * np.diff(v)) / grid.h
    return float(grid.sphere_factor * grad + grid.mass @ (u * v))


def h1_norm(grid: RadialGrid, u) -> float:
    return float(np.sqrt(max(h1_inner(grid, u, u), 0.0)))


def _potential(grid, V):
    if V is None:
        return np.zeros(grid.size)
    V = as_values(grid, V)
    if np.any(V < 0):
        raise DomainError("potential V must be non-negative")
    return V


def laplace_beltrami(grid: RadialGrid, u) -> np.ndarray:
    """Discrete ``Delta_g u`` on rows ``0..N-1`` (row ``N`` is Dirichlet)."""
    return -stiffness_apply(grid, u)[:-1] / grid.mass[:-1]


def apply_operator(grid: RadialGrid, u, V=None) -> RadialField:
    """Residual of ``-Delta_g u + u + V u``; row ``N`` returns ``u_N``."""
    uv = as_values(grid, u)
    Vv = _potential(grid, V)
    out = np.empty(grid.size)
    out[:-1] = -laplace_beltrami(grid, uv) + (1.0 + Vv[:-1]) * uv[:-1]
    out[-1] = uv[-1]
    return RadialField(grid, out)


def thomas_solve(lower, diag, upper, rhs) -> np.ndarray:
    """Solve a tridiagonal system by forward elimination and back substitution.

    ``lower[i]`` multiplies ``x[i]`` in row ``i+1``; ``upper[i]`` multiplies
    ``x[i+1]`` in row ``i``. No pivoting, so the matrix should be diagonally
    dominant (an M-matrix is).
    """
    n = len(diag)
    c = np.empty(n - 1)
    d = np.empty(n)
    denom = diag[0]
    c[0] = upper[0] / denom
    d[0] = rhs[0] / denom
    for i in range(1, n):
        denom = diag[i] - lower[i - 1] * c[i - 1]
        if i < n - 1:
            c[i] = upper[i] / denom
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / denom
    x = np.empty(n)
    x[-1] = d[-1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return x


class TridiagonalSystem:
    """Matrix form of :func:`apply_operator` for a fixed potential.

    Rows ``0..N-1`` are stored symmetrically as ``S = K + M(1 + V)`` (the
    operator is self-adjoint in the mass inner product); row ``N`` is the
    identity. ``S`` has a positive diagonal and non-positive off-diagonal,
    i.e. it is an M-matrix, which is what makes the discrete comparison
    principle hold.
    """

    def __init__(self, grid: RadialGrid, V=None):
        self.grid = grid
        self.V = _potential(grid, V)
        g = grid
        k = g.sphere_factor * g.flux_weight / g.h
        m = g.mass[:-1]
        diag = k.copy()
        diag[1:] += k[:-1]
        self.sym_diag = diag + m * (1.0 + self.V[:-1])
        self.sym_off = -k[:-1]
        self.boundary_coupling = -k[-1]  # S_{N-1,N}
        banded = np.zeros((2, g.N))
        banded[0, 1:] = self.sym_off
        banded[1] = self.sym_diag
        self._chol = cholesky_banded(banded, lower=False)

    def solve_weak(self, b) -> np.ndarray:
        """Solve ``S x = b`` on rows ``0..N-1`` with ``x_N = 0``."""
        x = np.zeros(self.grid.size)
        x[:-1] = cho_solve_banded((self._chol, False), np.asarray(b, dtype=float)[: self.grid.N])
        return x

    def solve(self, rhs, method: str = "cholesky") -> RadialField:
        """Solve ``A x = rhs`` where ``A`` is the strong-form operator."""
        g = self.grid
        rhs = as_values(g, rhs)
        b = g.mass[:-1] * rhs[:-1]
        b[-1] -= self.boundary_coupling * rhs[-1]
        if method == "cholesky":
            x = self.solve_weak(np.concatenate([b, [0.0]]))
        elif method == "thomas":
            x = np.zeros(g.size)
            x[:-1] = thomas_solve(self.sym_off, self.sym_diag, self.sym_off, b)
        else:
            raise ValueError(f"unknown method {method!r}")
        x[-1] = rhs[-1]
        return RadialField(g, x)

    def matvec(self, x) -> RadialField:
        return apply_operator(self.grid, x, self.V)

    def dense(self) -> np.ndarray:
        """Strong-form matrix ``A`` of size ``(N+1, N+1)``."""
        g = self.grid
        A = np.zeros((g.size, g.size))
        S = np.diag(self.sym_diag) + np.diag(self.sym_off, 1) + np.diag(self.sym_off, -1)
        A[:-1, :-1] = S
        A[-2, -1] = self.boundary_coupling
        A[:-1] /= g.mass[:-1, None]
        A[-1, -1] = 1.0
        return A

    def is_m_matrix(self) -> bool:
        return bool(np.all(self.sym_diag > 0) and np.all(self.sym_off <= 0)
                    and self.boundary_coupling <= 0)


def assemble_system(grid: RadialGrid, V=None) -> TridiagonalSystem:
    return TridiagonalSystem(grid, V)


def restrict(fine_field: RadialField, coarse: RadialGrid) -> RadialField:
    """Inject a field onto a coarser grid whose nodes are a subset."""
    fine = fine_field.grid
    ratio = fine.N // coarse.N
    if fine.R_max != coarse.R_max or ratio * coarse.N != fine.N:
        raise GridMismatchError("coarse grid nodes are not a subset of the fine grid")
    return RadialField(coarse, fine_field.values[::ratio])


def smooth_random_field(grid: RadialGrid, rng: np.random.Generator, bumps: int = 3,
                        positive: bool = False, scale: float = 1.0) -> RadialField:
    """Sum of random Gaussian bumps in the inner half of the domain, zero at ``R_max``."""
    r = grid.r
    R = grid.R_max
    # hyperbolic volume growth would let the tails dominate every norm
    reach = min(R / 2.0, 6.0 if grid.params.c == 0.0 else 3.0)
    u = np.zeros(grid.size)
    for _ in range(bumps):
        centre = rng.uniform(0.0, reach)
        width = rng.uniform(0.4, 1.2)
        amp = rng.uniform(0.1, 1.0) if positive else rng.uniform(-1.0, 1.0)
        u += amp * np.exp(-((r - centre) / width) ** 2)
    u *= 1.0 - (r / R) ** 2
    u[-1] = 0.0
    return RadialField(grid, scale * u)
