"""Catalog of nonlinearities ``f`` and radial weights ``alpha``, and problem configuration.

Nonlinearities are evaluated on whole arrays. Every kind except ``poisson``
(``f = 1``, ``F(s) = s`` on the whole line) is extended by zero to ``s <= 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import fresnel

from .errors import ConfigError, DomainError, UnsupportedError
from .geometry import SpaceFormParams
from .grid import RadialGrid, as_values, build_grid, default_rmax, integrate

NONLINEARITY_KINDS = ("poisson", "sublinear_log", "oscillatory", "custom-table")
WEIGHT_KINDS = ("gaussian", "annulus_bump", "table")

# below this argument the oscillatory primitive is its leading term to ~1e-30
_OSC_TINY = 1e-12

# Gauss-Legendre rule mapped to [0, 1]
_GL5 = (lambda x, w: (0.5 * (x + 1.0), 0.5 * w))(*np.polynomial.legendre.leggauss(5))


# --------------------------------------------------------------------------
# nonlinearities
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Nonlinearity:
    """A catalog nonlinearity, optionally truncated at ``cap``.

    ``oscillatory`` is ``f(s) = sqrt(s) (a + b sin(1/s))`` and needs
    ``b > a > 0``. ``custom-table`` interpolates ``(table_s, table_f)``
    linearly and holds the last value beyond the table; ``flags`` lists the
    hypotheses the table claims (``"f1"``, ``"f2"``, ``"f3"``, ``"f01"``,
    ``"f02"``). With ``cap = theta`` the function is ``f(min(s, theta))``.
    """

    kind: str
    a: float = 0.5
    b: float = 1.0
    table_s: tuple = ()
    table_f: tuple = ()
    flags: frozenset = frozenset()
    cap: float | None = None

    def __post_init__(self):
        if self.kind not in NONLINEARITY_KINDS:
            raise ConfigError(f"unknown nonlinearity kind {self.kind!r}")
        if self.kind == "oscillatory" and not (self.b > self.a > 0):
            raise ConfigError(f"oscillatory kind needs b > a > 0, got a={self.a}, b={self.b}")
        if self.kind == "custom-table":
            s = np.asarray(self.table_s, dtype=float)
            fv = np.asarray(self.table_f, dtype=float)
            if s.ndim != 1 or s.shape != fv.shape or len(s) < 2:
                raise ConfigError("custom-table needs matching s/f arrays with >= 2 samples")
            if s[0] != 0.0 or fv[0] != 0.0 or np.any(np.diff(s) <= 0):
                raise ConfigError("custom-table samples must start at (0, 0) with increasing s")
            object.__setattr__(self, "table_s", tuple(s))
            object.__setattr__(self, "table_f", tuple(fv))
        object.__setattr__(self, "flags", frozenset(self.flags))
        if self.cap is not None and not self.cap > 0:
            raise ConfigError("truncation level must be positive")

    def truncated(self, theta: float) -> "Nonlinearity":
        """The function ``s -> f(min(s, theta))``."""
        return replace(self, cap=float(theta))

    def f(self, s):
        s = np.asarray(s, dtype=float)
        x = np.atleast_1d(s)
        if self.cap is not None:
            x = np.minimum(x, self.cap)
        return _raw_f(self, x).reshape(s.shape)

    def F(self, s):
        s = np.asarray(s, dtype=float)
        x = np.atleast_1d(s)
        if self.cap is None:
            return _raw_F(self, x).reshape(s.shape)
        theta = self.cap
        below = _raw_F(self, np.minimum(x, theta))
        slope = float(_raw_f(self, np.array([theta]))[0])
        return (below + slope * np.maximum(x - theta, 0.0)).reshape(s.shape)

    def F_change(self, s, ds):
        """``F(s + ds) - F(s)`` without cancellation.

        Where the step is small relative to ``s`` (and does not cross the
        truncation level or the origin) the increment is computed as
        ``ds * int_0^1 f(s + t ds) dt`` by 5-point Gauss-Legendre, which keeps
        full relative accuracy in the increment; elsewhere the plain
        difference is used, whose cancellation is harmless there.
        """
        s = np.asarray(s, dtype=float)
        ds = np.asarray(ds, dtype=float)
        if self.kind == "poisson":
            return ds.copy()
        out = self.F(s + ds) - self.F(s)
        end = s + ds
        smooth = (np.abs(ds) < 1e-3 * np.abs(s)) & (s > 0) & (end > 0)
        if self.cap is not None:
            smooth &= (s - self.cap) * (end - self.cap) > 0
        if np.any(smooth):
            x, w = _GL5
            si, di = s[smooth], ds[smooth]
            vals = self.f(si[:, None] + di[:, None] * x[None, :])
            out[smooth] = di * (vals @ w)
        return out

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.kind == "oscillatory":
            out.update(a=self.a, b=self.b)
        if self.kind == "custom-table":
            out.update(s=list(self.table_s), f=list(self.table_f), flags=sorted(self.flags))
        if self.cap is not None:
            out["cap"] = self.cap
        return out


def _raw_f(nl: Nonlinearity, s):
    if nl.kind == "poisson":
        return np.ones_like(s)
    pos = np.maximum(s, 0.0)
    if nl.kind == "sublinear_log":
        return np.log1p(pos * pos)
    if nl.kind == "oscillatory":
        out = np.zeros_like(pos)
        # |f| <= (a + b) sqrt(s) is below 1e-150 there, and 1/s would overflow
        m = pos > 1e-300
        out[m] = np.sqrt(pos[m]) * (nl.a + nl.b * np.sin(1.0 / pos[m]))
        return out
    return np.interp(pos, nl.table_s, nl.table_f)


def _raw_F(nl: Nonlinearity, s):
    if nl.kind == "poisson":
        return s.copy()
    pos = np.maximum(s, 0.0)
    if nl.kind == "sublinear_log":
        return _log_primitive(pos)
    if nl.kind == "oscillatory":
        return _oscillatory_primitive(pos, nl.a, nl.b)
    return _table_primitive(pos, np.asarray(nl.table_s), np.asarray(nl.table_f))


def _log_primitive(s):
    """``int_0^s ln(1 + t^2) dt`` for ``s >= 0``."""
    out = np.empty_like(s)
    small = s < 1e-2
    x = s[small]
    x2 = x * x
    out[small] = x * x2 * (1.0 / 3.0 - x2 * (1.0 / 10.0 - x2 * (1.0 / 21.0 - x2 / 36.0)))
    y = s[~small]
    out[~small] = y * np.log1p(y * y) - 2.0 * y + 2.0 * np.arctan(y)
    return out


def _sine_tail(X):
    """``int_X^inf x^(-5/2) sin x dx`` via two integrations by parts and Fresnel S."""
    T = np.sqrt(2.0 * X / math.pi)
    S, _ = fresnel(T)
    k = math.sqrt(2.0 * math.pi) * (0.5 - S)  # int_X^inf x^(-1/2) sin x dx
    j = 2.0 * np.cos(X) / np.sqrt(X) - 2.0 * k  # int_X^inf x^(-3/2) cos x dx
    return (2.0 / 3.0) * (np.sin(X) * X ** -1.5 + j)


def _oscillatory_primitive(s, a, b):
    """``int_0^s sqrt(t) (a + b sin(1/t)) dt`` for ``s >= 0``.

    With ``x = 1/t`` the oscillating part is ``b * int_{1/s}^inf x^(-5/2) sin x dx``.
    """
    out = (2.0 * a / 3.0) * s ** 1.5
    m = s > _OSC_TINY
    out[m] += b * _sine_tail(1.0 / s[m])
    return out


def _table_primitive(s, ts, tf):
    seg = np.diff(ts) * 0.5 * (tf[:-1] + tf[1:])
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    idx = np.clip(np.searchsorted(ts, s, side="right") - 1, 0, len(ts) - 1)
    s0 = ts[idx]
    f0 = tf[idx]
    f_at = np.interp(s, ts, tf)
    return cum[idx] + 0.5 * (f0 + f_at) * (s - s0)


def eval_f(nl: Nonlinearity, s):
    out = nl.f(s)
    return float(out) if np.ndim(s) == 0 else out


def eval_F(nl: Nonlinearity, s):
    out = nl.F(s)
    return float(out) if np.ndim(s) == 0 else out


def _supports_cf(nl: Nonlinearity) -> bool:
    if nl.kind == "sublinear_log":
        return True
    return nl.kind == "custom-table" and {"f1", "f2"} <= nl.flags


def compute_cf(nl: Nonlinearity, per_decade: int = 200) -> float:
    """``c_f = max_{s>0} f(s)/s`` by a log-spaced scan plus golden-section refinement."""
    if not _supports_cf(nl) or nl.cap is not None:
        raise UnsupportedError(f"c_f needs a nonlinearity with (f1)-(f2); got {nl.kind!r}")
    s = np.logspace(-6.0, 6.0, 12 * per_decade + 1)
    ratio = nl.f(s) / s
    k = int(np.argmax(ratio))
    best = float(ratio[k])
    if 0 < k < len(s) - 1:
        lo, mid, hi = s[k - 1], s[k], s[k + 1]
        res = minimize_scalar(lambda x: -float(nl.f(np.array(x))) / x, bracket=(lo, mid, hi),
                              method="golden", tol=1e-12)
        best = max(best, -float(res.fun))
    if not best > 0:
        raise UnsupportedError("f(s)/s is never positive; c_f undefined")
    return best


def oscillation_levels(j: int) -> tuple[float, float, float]:
    """``(theta_j, s_j, eta_j)`` for the default oscillatory family.

    ``s_j`` is where ``sin(1/s) = -1``; on ``[eta_j, theta_j]`` one has
    ``sin(1/s) <= -1/2`` so ``f <= 0`` whenever ``a/b <= 1/2``.
    """
    if j < 1:
        raise DomainError("levels are numbered from 1")
    base = 2.0 * math.pi * j
    theta = 1.0 / (base + 7.0 * math.pi / 6.0)
    s = 1.0 / (base + 3.0 * math.pi / 2.0)
    eta = 1.0 / (base + 11.0 * math.pi / 6.0)
    return theta, s, eta


# --------------------------------------------------------------------------
# weights
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RadialWeight:
    """Radial coefficient ``alpha(r) >= 0``.

    ``gaussian``: ``A exp(-(r/sigma)^2)``. ``annulus_bump``: ``A`` on
    ``[r_in, r_out]`` with Gaussian shoulders of width ``sigma`` on both
    sides. ``table``: linear interpolation of ``(table_r, table_alpha)``,
    zero beyond the last sample.
    """

    kind: str
    A: float = 1.0
    sigma: float = 1.0
    r_in: float = 0.0
    r_out: float = 0.0
    table_r: tuple = ()
    table_alpha: tuple = ()

    def __post_init__(self):
        if self.kind not in WEIGHT_KINDS:
            raise ConfigError(f"unknown weight kind {self.kind!r}")
        if self.A < 0 or not self.sigma > 0:
            raise ConfigError("weight needs A >= 0 and sigma > 0")
        if self.kind == "annulus_bump" and not (0 <= self.r_in < self.r_out):
            raise ConfigError("annulus_bump needs 0 <= r_in < r_out")
        if self.kind == "table":
            r = np.asarray(self.table_r, dtype=float)
            al = np.asarray(self.table_alpha, dtype=float)
            if r.ndim != 1 or r.shape != al.shape or len(r) < 2 or np.any(np.diff(r) <= 0):
                raise ConfigError("table weight needs increasing r samples matching alpha")
            if np.any(al < 0):
                raise ConfigError("table weight must be non-negative")
            object.__setattr__(self, "table_r", tuple(r))
            object.__setattr__(self, "table_alpha", tuple(al))

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "gaussian":
            return self.A * np.exp(-((r / self.sigma) ** 2))
        if self.kind == "annulus_bump":
            d = np.where(r < self.r_in, self.r_in - r, np.where(r > self.r_out, r - self.r_out, 0.0))
            return self.A * np.exp(-((d / self.sigma) ** 2))
        return np.interp(r, self.table_r, self.table_alpha, right=0.0)

    @property
    def sup_norm(self) -> float:
        """Exact ``||alpha||_inf`` of the catalog entry."""
        if self.kind == "table":
            return float(max(self.table_alpha))
        return float(self.A)

    def scaled(self, factor: float) -> "RadialWeight":
        if self.kind == "table":
            return replace(self, table_alpha=tuple(factor * a for a in self.table_alpha))
        return replace(self, A=self.A * factor)

    def to_dict(self) -> dict:
        if self.kind == "gaussian":
            return {"kind": self.kind, "A": self.A, "sigma": self.sigma}
        if self.kind == "annulus_bump":
            return {"kind": self.kind, "A": self.A, "sigma": self.sigma,
                    "r_in": self.r_in, "r_out": self.r_out}
        return {"kind": self.kind, "r": list(self.table_r), "alpha": list(self.table_alpha)}


def weight_integrability(weight: RadialWeight, params: SpaceFormParams, R_max: float | None = None,
                         N: int = 2000) -> dict:
    """Quadratures of ``alpha`` and ``alpha^2`` on ``R_max`` and ``2 R_max``.

    Finite values that barely move under the doubling witness
    ``alpha`` in ``L^1``, ``L^2`` and (by construction) ``L^inf``.
    """
    R = default_rmax(params) if R_max is None else R_max
    out = {}
    for label, radius, nodes in (("base", R, N), ("doubled", 2 * R, 2 * N)):
        g = build_grid(params, radius, nodes)
        al = weight(g.r)
        out[label] = {"L1": integrate(g, al), "L2sq": integrate(g, al * al)}
    out["L1_change"] = abs(out["doubled"]["L1"] - out["base"]["L1"])
    out["L2sq_change"] = abs(out["doubled"]["L2sq"] - out["base"]["L2sq"])
    out["finite"] = bool(all(np.isfinite(v) for d in (out["base"], out["doubled"]) for v in d.values()))
    return out


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------

SCENARIOS = ("poisson", "rigidity", "sublinear", "oscillatory")
_MAX_DIM = {"poisson": 6, "rigidity": 6, "sublinear": 5, "oscillatory": 5}


@dataclass(frozen=True)
class ProblemConfig:
    """Physical constants, catalog entries and numerical controls of one problem."""

    space: SpaceFormParams
    nonlinearity: Nonlinearity
    weight: RadialWeight
    e: float = 1.0
    q: float = 1.0
    lam: float = 1.0
    R_max: float | None = None
    N: int = 2000
    tol: float = 1e-8
    max_iter: int = 5000
    scenario: str | None = None
    options: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name in ("e", "q"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be positive, got {v}")
        if not (math.isfinite(self.lam) and self.lam >= 0):
            raise ConfigError(f"lambda must be >= 0, got {self.lam}")
        if not self.tol > 0:
            raise ConfigError("tolerances must be positive")
        if self.max_iter < 1:
            raise ConfigError("max_iter must be >= 1")
        if self.R_max is None:
            object.__setattr__(self, "R_max", default_rmax(self.space))
        if self.scenario is not None:
            if self.scenario not in SCENARIOS:
                raise ConfigError(f"unknown scenario {self.scenario!r}")
            top = _MAX_DIM[self.scenario]
            if self.space.n > top:
                raise ConfigError(f"scenario {self.scenario!r} requires 3 <= n <= {top}, got n={self.space.n}")

    @cached_property
    def grid(self) -> RadialGrid:
        return build_grid(self.space, self.R_max, self.N)

    @cached_property
    def alpha(self) -> np.ndarray:
        a = self.weight(self.grid.r)
        a.setflags(write=False)
        return a

    def with_(self, **changes) -> "ProblemConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "space": {"n": self.space.n, "c": self.space.c},
            "e": self.e, "q": self.q, "lambda": self.lam,
            "nonlinearity": self.nonlinearity.to_dict(),
            "weight": self.weight.to_dict(),
            "grid": {"R_max": self.R_max, "N": self.N},
            "solver": {"tol": self.tol, "max_iter": self.max_iter},
            "options": dict(self.options),
        }


def lambda_tilde(nl: Nonlinearity, weight: RadialWeight, grid: RadialGrid | None = None) -> float:
    """Threshold ``1/(c_f ||alpha||_inf)`` below which only the trivial solution exists."""
    sup = weight.sup_norm
    if not sup > 0:
        raise DomainError("weight is identically zero")
    return 1.0 / (compute_cf(nl) * sup)


def lambda0_upper(cfg: ProblemConfig, w) -> float:
    """Upper bound ``H(w)/F(w)`` on the two-solution threshold."""
    from .energy import eval_Ffun, eval_H

    w = as_values(cfg.grid, w)
    Fw = eval_Ffun(cfg, w)
    if not Fw > 0:
        raise DomainError(f"candidate rejected: F(w) = {Fw:.3g} <= 0")
    return eval_H(cfg, w) / Fw
