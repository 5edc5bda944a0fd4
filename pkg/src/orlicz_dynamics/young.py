"""Young functions, their complementary functions, and Δ2 probing."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from . import kernels as K
from ._jit import NUMBA_ENABLED, python_twin
from .errors import DivergenceError, DomainError

K_PY = python_twin(K)

POWER_LOG_CONVEX_ALPHA = 0.5 * (3.0 + math.sqrt(5.0))


@dataclass(frozen=True)
class SearchConfig:
    """Tolerances for the scalar searches.

    ``golden_tol`` is relative to the bracket, ``bisect_tol`` is absolute.
    """

    growth: float = 2.0
    golden_tol: float = 1e-10
    bisect_tol: float = 1e-12
    xmax: float = 1e150
    use_hint: bool = True
    crosscheck: bool = True
    crosscheck_rtol: float = 1e-6


DEFAULT_SEARCH = SearchConfig()


@dataclass(frozen=True, eq=False)
class YoungFunction:
    """An even convex Φ with Φ(0) = 0, positive off zero and unbounded.

    Use the constructors :meth:`power`, :meth:`power_log` and :meth:`custom`;
    the raw fields are kernel plumbing.
    """

    family: str
    params: dict
    phi: Callable = field(repr=False)
    dphi: Callable = field(repr=False)
    prm: np.ndarray = field(repr=False)
    compiled: bool = field(default=True, repr=False)
    conjugate_hint: Optional[Callable[[float], float]] = field(default=None, repr=False)
    delta2_domain: tuple = ("all_t",)

    # -- constructors -------------------------------------------------------

    @classmethod
    def power(cls, p: float) -> "YoungFunction":
        """Φ(t) = |t|^p / p for 1 <= p < inf."""
        p = float(p)
        if not (p >= 1.0 and math.isfinite(p)):
            raise DomainError(f"power family needs 1 <= p < inf, got {p}")
        if p == 1.0:
            def hint(y):
                return 0.0 if abs(y) <= 1.0 else math.inf
        else:
            q = p / (p - 1.0)

            def hint(y):
                return abs(y) ** q / q
        return cls("power", {"p": p}, K.power_phi, K.power_dphi, np.array([p]),
                   conjugate_hint=hint)

    @classmethod
    def power_log(cls, alpha: float, envelope: bool = True) -> "YoungFunction":
        """Φ(t) = |t|^α (1 + |log|t||), α > 1.

        The formula is not convex on part of (0, 1) when α < (3 + √5)/2. With
        ``envelope`` (the default) Φ is replaced there by its lower convex
        envelope: the tangent line from t1 to the kink at t = 1. Outside
        (t1, 1) the values are unchanged.
        """
        alpha = float(alpha)
        if not alpha > 1.0:
            raise DomainError(f"power_log family needs alpha > 1, got {alpha}")
        t1 = slope = phi_t1 = 0.0
        if envelope and alpha < POWER_LOG_CONVEX_ALPHA:
            t1, slope, phi_t1 = _power_log_bridge(alpha)
        prm = np.array([alpha, t1, slope, phi_t1])
        params = {"alpha": alpha}
        if not envelope:
            params["envelope"] = False
        return cls("power_log", params, K.power_log_phi, K.power_log_dphi, prm)

    @classmethod
    def custom(cls, fn: Optional[Callable[[float], float]] = None, *, table=None,
               derivative: Optional[Callable[[float], float]] = None,
               conjugate: Optional[Callable[[float], float]] = None,
               t0: Optional[float] = None) -> "YoungFunction":
        """A user Young function, from a callable of t >= 0 or a breakpoint table.

        A table ``[[t, Φ(t)], ...]`` is interpolated linearly and extended with
        the last slope. Without ``derivative`` a callable gets one-sided finite
        differences.
        """
        domain = ("all_t",) if t0 is None else ("t_above", float(t0))
        if (fn is None) == (table is None):
            raise DomainError("custom Young function needs exactly one of fn or table")
        if table is not None:
            pts = np.asarray(table, dtype=float).reshape(-1, 2)
            if pts[0, 0] != 0.0:
                pts = np.vstack([[0.0, 0.0], pts])
            xs, ys = pts[:, 0], pts[:, 1]
            if len(xs) < 2 or np.any(np.diff(xs) <= 0) or ys[0] != 0.0 or np.any(ys[1:] <= 0):
                raise DomainError("table needs increasing t, Φ(0)=0 and Φ>0 elsewhere")
            slopes = np.diff(ys) / np.diff(xs)
            if np.any(np.diff(slopes) < -1e-12 * np.maximum(1.0, np.abs(slopes[1:]))):
                raise DomainError("table is not convex")
            prm = np.concatenate([[len(xs)], xs, ys])
            return cls("custom", {"table": pts.tolist()}, K.table_phi, K.table_dphi, prm,
                       conjugate_hint=conjugate, delta2_domain=domain)

        def phi(t, prm):
            return float(fn(abs(t)))

        if derivative is not None:
            def dphi(t, prm, side):
                return float(derivative(abs(t)))
        else:
            def dphi(t, prm, side):
                t = abs(t)
                h = 1e-7 * max(1.0, t)
                if side > 0 or t < h:
                    return (fn(t + h) - fn(t)) / h
                return (fn(t) - fn(t - h)) / h

        return cls("custom", {}, phi, dphi, np.zeros(1), compiled=False,
                   conjugate_hint=conjugate, delta2_domain=domain)

    @classmethod
    def from_dict(cls, spec: dict) -> "YoungFunction":
        fam = spec.get("family")
        if fam == "power":
            return cls.power(spec["p"])
        if fam == "power_log":
            return cls.power_log(spec["alpha"], envelope=spec.get("envelope", True))
        if fam == "custom" and "table" in spec:
            return cls.custom(table=spec["table"], t0=spec.get("t0"))
        raise DomainError(f"unknown Young function spec: {spec!r}")

    def to_dict(self) -> dict:
        if self.family == "custom" and "table" not in self.params:
            raise DomainError("callable custom Young functions are not serializable")
        out = {"family": self.family, **self.params}
        if self.delta2_domain[0] == "t_above":
            out["t0"] = self.delta2_domain[1]
        return out

    # -- evaluation -----------------------------------------------------------

    def kernel(self, fn):
        """``fn`` itself, or its pure-Python twin when Φ is an uncompiled callable."""
        if self.compiled or not NUMBA_ENABLED:
            return fn
        return getattr(K_PY, fn.__name__)

    def __call__(self, t):
        if np.ndim(t) == 0:
            return self.phi(float(t), self.prm)
        arr = np.asarray(t, dtype=float)
        return np.array([self.phi(x, self.prm) for x in arr.ravel()]).reshape(arr.shape)

    def derivative(self, t: float, side: int = 1) -> float:
        return self.dphi(abs(float(t)), self.prm, side)

    @property
    def is_power(self) -> bool:
        return self.family == "power"

    def __repr__(self):
        return f"YoungFunction({self.family}, {self.params})"


def _power_log_bridge(alpha):
    def phi(t):
        return t ** alpha * (1.0 - math.log(t))

    def dphi(t):
        return t ** (alpha - 1.0) * (alpha - 1.0 - alpha * math.log(t))

    # inflection point of the formula on (0, 1); the tangent through (1, 1) touches left of it
    t_infl = math.exp(-(alpha - (alpha - 1.0) ** 2) / (alpha * (alpha - 1.0)))

    def through_one(t):
        return phi(t) + dphi(t) * (1.0 - t) - 1.0

    t1 = brentq(through_one, 1e-12, t_infl, xtol=1e-15, rtol=1e-15)
    return t1, dphi(t1), phi(t1)


def _finite(x, name="t"):
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"{name} must be finite, got {x}")
    return x


def evaluate(phi: YoungFunction, t: float) -> float:
    """Φ(|t|)."""
    return phi(_finite(t))


def conjugate(phi: YoungFunction, y: float, cfg: SearchConfig = DEFAULT_SEARCH) -> float:
    """The complementary function Ψ(y) = sup_{x >= 0} (x|y| - Φ(x))."""
    y = abs(_finite(y, "y"))
    if y == 0.0:
        return 0.0
    hint = phi.conjugate_hint if cfg.use_hint else None
    if hint is not None:
        value = float(hint(y))
        if not cfg.crosscheck or math.isinf(value):
            return value
    kern = phi.kernel(K.conjugate)
    num, arg, status = kern(phi.phi, phi.prm, y, cfg.growth, cfg.golden_tol, cfg.xmax)
    if status == K.CONJ_DIVERGED:
        if hint is not None:
            return value
        raise DivergenceError(
            f"sup of x*{y} - Phi(x) diverges: objective still increasing at x={arg:.3g} "
            f"(bracket [{arg / cfg.growth:.3g}, {arg:.3g}])",
            bracket=(arg / cfg.growth, arg))
    if hint is not None:
        if abs(num - value) > cfg.crosscheck_rtol * max(1.0, abs(value)):
            raise ArithmeticError(f"conjugate hint {value!r} disagrees with numerical value {num!r} at y={y}")
        return value
    return num


def young_gap(phi: YoungFunction, x: float, y: float, cfg: SearchConfig = DEFAULT_SEARCH) -> float:
    """Φ(x) + Ψ(y) - |x||y|, nonnegative by the Young inequality."""
    x = _finite(x, "x")
    y = _finite(y, "y")
    return phi(x) + conjugate(phi, y, cfg) - abs(x) * abs(y)


def inverse(phi: YoungFunction, y: float, tol: float = DEFAULT_SEARCH.bisect_tol) -> float:
    """The unique t >= 0 with Φ(t) = y."""
    y = _finite(y, "y")
    if y < 0:
        raise DomainError("inverse needs y >= 0")
    return phi.kernel(K.inverse)(phi.phi, phi.prm, y, tol)


def complementary(phi: YoungFunction, cfg: SearchConfig = DEFAULT_SEARCH) -> YoungFunction:
    """Ψ as a (callable, uncompiled) Young function built on numerical conjugation."""
    return YoungFunction.custom(lambda y: conjugate(phi, y, cfg), conjugate=None)


@dataclass(frozen=True)
class ConjugateTable:
    breakpoints: np.ndarray
    values: np.ndarray
    maximizers: np.ndarray
    refinement: float


def conjugate_table(phi: YoungFunction, breakpoints, cfg: SearchConfig = DEFAULT_SEARCH) -> ConjugateTable:
    """Tabulate Ψ on sorted nonnegative breakpoints, keeping the interior maximisers."""
    ys = np.sort(np.asarray(breakpoints, dtype=float))
    kern = phi.kernel(K.conjugate)
    vals = np.empty_like(ys)
    args = np.empty_like(ys)
    for i, y in enumerate(ys):
        v, a, status = kern(phi.phi, phi.prm, y, cfg.growth, cfg.golden_tol, cfg.xmax)
        vals[i] = math.inf if status == K.CONJ_DIVERGED else v
        args[i] = a
    return ConjugateTable(ys, vals, args, cfg.golden_tol)


@dataclass(frozen=True)
class Delta2Result:
    constant: float
    verdict: str
    ratios: np.ndarray = field(repr=False)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


def delta2_probe(phi: YoungFunction, t_grid=None, blowup: float = 10.0) -> Delta2Result:
    """Estimate M = max Φ(2t)/Φ(t) on a grid and flag unbounded growth.

    The verdict is ``fail`` when the largest ratio in the top decade of the
    grid exceeds the one in the bottom decade by more than ``blowup`` and the
    per-decade maxima never decrease.
    """
    if t_grid is None:
        start = phi.delta2_domain[1] if phi.delta2_domain[0] == "t_above" else 1e-3
        t_grid = np.logspace(np.log10(start), np.log10(start) + 5.0, 101)
    t = np.asarray(t_grid, dtype=float)
    if np.any(t <= 0):
        raise DomainError("Δ2 grid must be strictly positive")
    if phi.delta2_domain[0] == "t_above" and t.min() < phi.delta2_domain[1]:
        raise DomainError(f"grid starts below t0={phi.delta2_domain[1]}")
    with np.errstate(over="ignore", invalid="ignore"):
        base = phi(t)
        if np.any(base == 0):
            raise DomainError("Φ vanishes on the grid")
        ratios = phi(2.0 * t) / base
    ratios = np.where(np.isnan(ratios), np.inf, ratios)
    decades = np.floor(np.log10(t / t.min()) + 1e-12).astype(int)
    per_decade = np.array([ratios[decades == d].max() for d in np.unique(decades)])
    grows = len(per_decade) > 1 and np.all(np.diff(per_decade) >= 0)
    verdict = "fail" if grows and per_decade[-1] > blowup * per_decade[0] else "pass"
    return Delta2Result(float(ratios.max()), verdict, ratios)


def check_axioms(phi: YoungFunction, ts, tol: float = 1e-12) -> dict:
    """Sample-check Φ(0)=0, positivity, evenness and midpoint convexity."""
    ts = np.asarray(ts, dtype=float)
    vals = phi(ts)
    mids = []
    for s in ts:
        for t in ts:
            lhs = phi(0.5 * (s + t))
            rhs = 0.5 * (phi(s) + phi(t))
            mids.append(lhs - rhs)
    worst = float(max(mids)) if mids else 0.0
    return {
        "zero": phi(0.0) == 0.0,
        "positive": bool(np.all(vals[ts != 0] > 0)),
        "even": bool(np.allclose(vals, phi(-ts), rtol=0, atol=tol)),
        "midpoint_convex": worst <= tol,
        "worst_midpoint_excess": worst,
    }
