"""Closed-form primitives of the constant-curvature model spaces.

The model space of dimension ``n`` and curvature ``c <= 0`` is Euclidean
space when ``c == 0`` and hyperbolic space of curvature ``c`` otherwise.
Everything radial in this package is expressed through two functions of the
geodesic distance ``r`` from the pole:

    s_c(r)  = r                        (c = 0)
            = sinh(sqrt(-c) r)/sqrt(-c) (c < 0)

    ct_c(r) = s_c'(r)/s_c(r)

so that the Riemannian volume of a geodesic ball is
``n * omega_n * int_0^rho s_c(t)^(n-1) dt``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError

# Gamma(n/2 + 1) for the dimensions this package handles.
_GAMMA_HALF = {
    1: math.sqrt(math.pi) / 2.0,
    2: 1.0,
    3: 3.0 * math.sqrt(math.pi) / 4.0,
    4: 2.0,
    5: 15.0 * math.sqrt(math.pi) / 8.0,
    6: 6.0,
}

N_MIN, N_MAX = 3, 6


@dataclass(frozen=True)
class SpaceFormParams:
    """Dimension ``n`` and sectional curvature ``c`` of a model space."""

    n: int
    c: float = 0.0

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or isinstance(self.n, bool):
            raise ConfigError(f"dimension n must be an integer, got {self.n!r}")
        if not (N_MIN <= self.n <= N_MAX):
            raise ConfigError(f"dimension n={self.n} violates 3 <= n <= 6")
        if not math.isfinite(self.c) or self.c > 0:
            raise ConfigError(f"curvature c={self.c} violates c <= 0 (Hadamard)")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "c", float(self.c))

    @property
    def kappa(self) -> float:
        """sqrt(-c); zero on Euclidean space."""
        return math.sqrt(-self.c)


def unit_ball_volume(n: int) -> float:
    """Volume omega_n of the Euclidean unit ball in R^n."""
    try:
        return math.pi ** (n / 2.0) / _GAMMA_HALF[n]
    except KeyError:
        raise ConfigError(f"no unit-ball volume tabulated for n={n}") from None


def _check_nonneg(r, name="r"):
    arr = np.asarray(r, dtype=float)
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite and >= 0")
    return arr


def _as_output(arr, like):
    return float(arr) if np.ndim(like) == 0 else arr


def metric_coeff(params: SpaceFormParams, r):
    """Return s_c(r); accepts scalars or arrays."""
    arr = _check_nonneg(r)
    k = params.kappa
    out = arr.copy() if k == 0.0 else np.sinh(k * arr) / k
    return _as_output(out, r)


def cotangent_coeff(params: SpaceFormParams, r):
    """Return ct_c(r) = s_c'(r)/s_c(r) for r > 0.

    The value at the pole is singular; radial operators never need it
    because they are written in flux form (see :mod:`hadamard_sm.grid`).
    """
    arr = _check_nonneg(r)
    if np.any(arr == 0):
        raise DomainError("ct_c is singular at r = 0")
    k = params.kappa
    out = 1.0 / arr if k == 0.0 else k / np.tanh(k * arr)
    return _as_output(out, r)


def _simpson(y, h):
    return h / 3.0 * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-1:2].sum())


def _panels(h_rel):
    m = int(math.ceil(1.0 / h_rel))
    return m + (m % 2)


def model_volume(params: SpaceFormParams, rho: float, h_rel: float = 1e-3) -> float:
    """Volume V_{c,n}(rho) of the geodesic ball of radius ``rho``.

    Composite Simpson on ``n * omega_n * s_c^(n-1)`` with step at most
    ``h_rel * rho``.
    """
    rho = float(_check_nonneg(rho, "rho"))
    if rho == 0.0:
        return 0.0
    m = _panels(h_rel)
    t = np.linspace(0.0, rho, m + 1)
    y = metric_coeff(params, t) ** (params.n - 1)
    return params.n * unit_ball_volume(params.n) * _simpson(y, rho / m)


def _cumulative_simpson_even(y, h):
    """Cumulative integral of ``y`` at the even-indexed nodes."""
    pair = h / 3.0 * (y[0:-1:2] + 4.0 * y[1::2] + y[2::2])
    return np.concatenate([[0.0], np.cumsum(pair)])


def static_profile_w(params: SpaceFormParams, r, h_rel: float = 1e-3):
    """Radial profile w_c with Laplacian identically one on the model space.

    ``w_c(r) = int_0^r s_c(s)^(1-n) int_0^s s_c(t)^(n-1) dt ds``, evaluated
    by nested composite Simpson. On Euclidean space ``w_0(r) = r^2/(2n)``.
    """
    arr = np.atleast_1d(_check_nonneg(r))
    out = np.array([_static_profile_scalar(params, float(x), h_rel) for x in arr.ravel()])
    return float(out[0]) if np.ndim(r) == 0 else out.reshape(arr.shape)


def _static_profile_scalar(params, r, h_rel):
    if r == 0.0:
        return 0.0
    m = _panels(h_rel)
    # inner integral on a half-step mesh so it is available at every outer node
    fine = np.linspace(0.0, r, 2 * m + 1)
    h_fine = r / (2 * m)
    inner = _cumulative_simpson_even(metric_coeff(params, fine) ** (params.n - 1), h_fine)
    s = fine[::2]
    g = np.empty_like(s)
    g[0] = 0.0  # inner ~ s^n/n, ratio ~ s/n -> 0
    g[1:] = inner[1:] / metric_coeff(params, s[1:]) ** (params.n - 1)
    return _simpson(g, r / m)


def ball_volume_ratio(profile: SpaceFormParams, ambient: SpaceFormParams, tau) -> np.ndarray:
    """Ratio Vol(B(tau)) in the ``ambient`` space over V_{c,n}(tau) of ``profile``.

    The ambient ball volume is computed by adaptive quadrature, independent of
    the Simpson routine behind :func:`model_volume`; the ratio is identically
    one when the two spaces coincide.
    """
    from scipy.integrate import quad

    if ambient.n != profile.n:
        raise ConfigError("volume ratio needs equal dimensions")
    taus = np.atleast_1d(_check_nonneg(tau, "tau")).astype(float)
    factor = ambient.n * unit_ball_volume(ambient.n)
    ratios = []
    for t in taus:
        if t == 0.0:
            ratios.append(1.0)
            continue
        vol, _ = quad(lambda x: metric_coeff(ambient, x) ** (ambient.n - 1), 0.0, t,
                      epsabs=0.0, epsrel=1e-13, limit=200)
        ratios.append(factor * vol / model_volume(profile, t))
    return np.array(ratios)
