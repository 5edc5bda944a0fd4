"""Finitely supported functions and their Orlicz-space norms.

A :class:`SimpleFunction` stands in for C_c(G). All norms depend on the
absolute amplitudes and the per-point Haar mass only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from . import kernels as K
from .errors import CapacityError
from .groups import GroupSpace, Weight
from .young import DEFAULT_SEARCH, SearchConfig, YoungFunction

LUXEMBURG = "luxemburg-bisection"
AMEMIYA = "amemiya"
DUAL_ORACLE = "dual-oracle"

ORACLE_MAX_SUPPORT = 12


class SimpleFunction:
    """Complex amplitudes on finitely many points, canonically sorted, no zeros."""

    __slots__ = ("carrier", "points", "amps")

    def __init__(self, carrier: GroupSpace, points=(), amps=()):
        pts = carrier.as_array(points) if len(points) else np.zeros((0, carrier.dim), dtype=np.int64)
        amps = np.asarray(amps, dtype=complex).reshape(-1)
        if len(pts) != len(amps):
            raise ValueError("points and amplitudes differ in length")
        if len(pts):
            uniq, inverse = np.unique(pts, axis=0, return_inverse=True)
            summed = np.zeros(len(uniq), dtype=complex)
            np.add.at(summed, inverse.reshape(-1), amps)
            keep = summed != 0
            pts, amps = uniq[keep], summed[keep]
        self.carrier = carrier
        self.points = pts
        self.amps = amps

    # -- constructors ------------------------------------------------------------

    @classmethod
    def zero(cls, G: GroupSpace) -> "SimpleFunction":
        return cls(G)

    @classmethod
    def indicator(cls, G: GroupSpace, pts, amp: complex = 1.0) -> "SimpleFunction":
        arr = np.unique(G.as_array(pts), axis=0) if len(pts) else np.zeros((0, G.dim), dtype=np.int64)
        return cls(G, arr, np.full(len(arr), amp, dtype=complex))

    @classmethod
    def atom(cls, G: GroupSpace, x, amp: complex = 1.0) -> "SimpleFunction":
        return cls(G, [x], [amp])

    @classmethod
    def from_dict(cls, G: GroupSpace, spec: dict) -> "SimpleFunction":
        amps = [complex(a[0], a[1]) if isinstance(a, (list, tuple)) else complex(a) for a in spec.get("amps", [])]
        return cls(G, spec.get("points", []), amps)

    def to_dict(self) -> dict:
        return {"points": self.points.tolist(),
                "amps": [[float(a.real), float(a.imag)] for a in self.amps]}

    # -- algebra -------------------------------------------------------------------

    def _check(self, other):
        if other.carrier != self.carrier:
            raise ValueError("functions live on different carriers")

    def __add__(self, other):
        self._check(other)
        return SimpleFunction(self.carrier, np.vstack([self.points, other.points]),
                              np.concatenate([self.amps, other.amps]))

    def __neg__(self):
        return SimpleFunction(self.carrier, self.points, -self.amps)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        return SimpleFunction(self.carrier, self.points, self.amps * complex(c))

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, SimpleFunction):
            return NotImplemented
        return (self.carrier == other.carrier and self.points.shape == other.points.shape
                and np.array_equal(self.points, other.points) and np.array_equal(self.amps, other.amps))

    def __hash__(self):
        return hash((self.carrier, self.points.tobytes(), self.amps.tobytes()))

    def __len__(self):
        return len(self.amps)

    def __repr__(self):
        items = ", ".join(f"{tuple(p)}: {a:g}" for p, a in zip(self.points.tolist(), self.amps))
        return f"SimpleFunction({self.carrier.kind}, {{{items}}})"

    # -- views -----------------------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return len(self.amps) == 0

    @property
    def support(self) -> list:
        return [tuple(p) for p in self.points.tolist()]

    def abs_values(self) -> np.ndarray:
        return np.abs(self.amps)

    def masses(self) -> np.ndarray:
        return np.full(len(self.amps), self.carrier.haar_mass)

    def sup_norm(self) -> float:
        return float(self.abs_values().max()) if len(self) else 0.0

    def restrict(self, E) -> "SimpleFunction":
        """f χ_E."""
        E = self.carrier.as_array(E) if len(E) else np.zeros((0, self.carrier.dim), dtype=np.int64)
        if len(E) == 0 or self.is_zero:
            return SimpleFunction(self.carrier)
        keys = set(map(tuple, E.tolist()))
        keep = np.array([tuple(p) in keys for p in self.points.tolist()], dtype=bool)
        return SimpleFunction(self.carrier, self.points[keep], self.amps[keep])

    def times_weight(self, w: Weight) -> "SimpleFunction":
        """The pointwise product f w."""
        if self.is_zero:
            return self
        return SimpleFunction(self.carrier, self.points, self.amps * w.values(self.carrier, self.points))

    def translate(self, a, n: int = 1) -> "SimpleFunction":
        """T_a^n f, i.e. x -> f(x a^{-n}); the support moves to supp(f) a^n."""
        if self.is_zero or n == 0:
            return self
        an = self.carrier.power(a, n)
        return SimpleFunction(self.carrier, self.carrier.right_translate(self.points, an), self.amps)


# ---------------------------------------------------------------------------
# norms

@dataclass(frozen=True)
class NormResult:
    value: float
    method: str
    certified_gap: float = 0.0

    def to_dict(self) -> dict:
        return {"value": self.value, "method": self.method, "gap": self.certified_gap}


def _normalized(f: SimpleFunction):
    # both norms are homogeneous; searching on |f| / max|f| keeps k near 1
    g = f.abs_values()
    scale = float(g.max())
    return g / scale, scale


def modular(f: SimpleFunction, phi: YoungFunction) -> float:
    """Sum over the support of Φ(|f(x)|) times the Haar mass."""
    if f.is_zero:
        return 0.0
    return phi.kernel(K.modular)(phi.phi, phi.prm, f.abs_values(), f.masses(), 1.0)


def luxemburg_norm(f: SimpleFunction, phi: YoungFunction, rtol: float = 1e-13) -> NormResult:
    """inf{k > 0 : modular(f/k) <= 1}."""
    if f.is_zero:
        return NormResult(0.0, LUXEMBURG, 0.0)
    g, scale = _normalized(f)
    k, width = phi.kernel(K.luxemburg)(phi.phi, phi.prm, g, f.masses(), rtol)
    return NormResult(float(k) * scale, LUXEMBURG, float(width) * scale)


def orlicz_norm(f: SimpleFunction, phi: YoungFunction, cfg: SearchConfig = DEFAULT_SEARCH) -> NormResult:
    """The Orlicz norm, as the Amemiya infimum inf_k (1 + modular(k f)) / k."""
    if f.is_zero:
        return NormResult(0.0, AMEMIYA, 0.0)
    g, scale = _normalized(f)
    value, _, gap = phi.kernel(K.amemiya)(phi.phi, phi.prm, g, f.masses(), cfg.golden_tol, cfg.growth)
    return NormResult(float(value) * scale, AMEMIYA, float(gap) * scale)


def weighted_norm(f: SimpleFunction, w: Weight, phi: YoungFunction, cfg: SearchConfig = DEFAULT_SEARCH) -> NormResult:
    """‖f‖_{Φ,w} = ‖f w‖_Φ."""
    return orlicz_norm(f.times_weight(w), phi, cfg)


def dual_ball_sup(values, masses, phi: YoungFunction, max_support: int = ORACLE_MAX_SUPPORT,
                  seed: int = 0, rtol: float = 1e-9, max_iter: int = 5000) -> float:
    """sup of sum |g_i| v_i m_i over v >= 0 with sum Ψ(v_i) m_i <= 1.

    Power families use the Hölder extremal v ∝ |g|^{p-1}. Other families run
    multi-start projected coordinate ascent on the budgets m_i Ψ(v_i), which
    needs only Φ and its one-sided derivatives (Ψ is never tabulated).
    """
    g = np.abs(np.asarray(values, dtype=complex)).astype(float)
    m = np.asarray(masses, dtype=float)
    keep = g > 0
    g, m = g[keep], m[keep]
    if len(g) == 0:
        return 0.0
    scale = float(g.max())
    g = g / scale
    if phi.is_power:
        p = phi.prm[0]
        if p == 1.0:
            return float(np.sum(g * m)) * scale
        q = p / (p - 1.0)
        return float(q ** (1.0 / q) * np.sum(g ** p * m) ** (1.0 / p)) * scale
    if len(g) > max_support:
        raise CapacityError(f"dual-ball oracle supports at most {max_support} points "
                            f"for non-power families, got {len(g)}")
    ascent = phi.kernel(K.dual_ascent)
    rng = np.random.default_rng(seed)
    starts = [np.full(len(g), 1.0 / len(g)), g / g.sum(), rng.dirichlet(np.ones(len(g)))]
    best = 0.0
    for b in starts:
        b = np.array(b, dtype=float)
        val, _ = ascent(phi.phi, phi.dphi, phi.prm, g, m, b, rtol, max_iter)
        best = max(best, float(val))
    return best * scale


def dual_ball_oracle(g: SimpleFunction, phi: YoungFunction, max_support: int = ORACLE_MAX_SUPPORT,
                     seed: int = 0) -> float:
    """Brute-force Orlicz norm of g: the sup of ∫|g v| over the Ψ-modular unit ball."""
    if g.is_zero:
        return 0.0
    return dual_ball_sup(g.amps, g.masses(), phi, max_support=max_support, seed=seed)


@dataclass(frozen=True)
class NormEquivalence:
    luxemburg: float
    orlicz: float
    ratio: float

    def to_dict(self) -> dict:
        return {"N": self.luxemburg, "O": self.orlicz, "ratio": self.ratio}


def norm_equivalence_check(f: SimpleFunction, phi: YoungFunction) -> NormEquivalence:
    """Luxemburg N, Orlicz O and O/N (classically 1 <= O/N <= 2)."""
    n = luxemburg_norm(f, phi).value
    o = orlicz_norm(f, phi).value
    return NormEquivalence(n, o, 1.0 if n == 0 else o / n)


def indicator_luxemburg_closed_form(measure: float, phi: YoungFunction) -> float:
    """‖χ_A‖ Luxemburg = 1 / Φ^{-1}(1/λ(A))."""
    from .young import inverse
    return 1.0 / inverse(phi, 1.0 / measure, tol=1e-15)
