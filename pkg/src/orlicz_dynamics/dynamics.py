"""Translation operators, orbits, and truncated periodic points."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError, PreconditionError
from .groups import GroupSpace, Weight
from .orlicz import SimpleFunction, weighted_norm
from .young import YoungFunction

FORWARD = "forward"
BACKWARD = "backward"


def translate(f: SimpleFunction, a, n: int = 1) -> SimpleFunction:
    """T_a^n f; negative n gives S_a^{|n|}."""
    return f.translate(a, int(n))


@dataclass(frozen=True)
class TranslationOp:
    """T_a (forward) or its inverse S_a (backward) on one carrier."""

    carrier: GroupSpace
    a: tuple
    direction: str = FORWARD

    def __post_init__(self):
        if self.direction not in (FORWARD, BACKWARD):
            raise DomainError(f"direction must be {FORWARD!r} or {BACKWARD!r}")
        object.__setattr__(self, "a", tuple(int(c) for c in self.a))

    @property
    def sign(self) -> int:
        return 1 if self.direction == FORWARD else -1

    def inverse(self) -> "TranslationOp":
        return TranslationOp(self.carrier, self.a, BACKWARD if self.direction == FORWARD else FORWARD)

    def power(self, f: SimpleFunction, n: int) -> SimpleFunction:
        if f.carrier != self.carrier:
            raise DomainError("function lives on a different carrier")
        return translate(f, self.a, self.sign * n)

    def __call__(self, f: SimpleFunction) -> SimpleFunction:
        return self.power(f, 1)


def _norms(fs, w, phi, workers):
    if workers and workers > 1 and len(fs) > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(lambda h: weighted_norm(h, w, phi).value, fs))
    return [weighted_norm(h, w, phi).value for h in fs]


@dataclass(frozen=True)
class OrbitPoint:
    n: int
    element: SimpleFunction
    norm: float
    distinct_count: int


@dataclass(frozen=True)
class OrbitTrace:
    points: tuple

    @property
    def distinct(self) -> int:
        return self.points[-1].distinct_count if self.points else 0

    def rows(self) -> list:
        return [(p.n, p.norm, p.distinct_count) for p in self.points]

    def to_dict(self) -> dict:
        return {"distinct": self.distinct,
                "rows": [{"n": n, "norm": v, "distinct_count": d} for n, v, d in self.rows()]}


def orbit(f: SimpleFunction, a, N: int, w: Weight, phi: YoungFunction, workers: int = 1) -> OrbitTrace:
    """T^n f for n = 0..N-1 with weighted norms and a running count of distinct elements."""
    if N < 1:
        raise PreconditionError("orbit length N must be >= 1")
    elems = []
    x = f
    for _ in range(N):
        elems.append(x)
        x = translate(x, a, 1)
    norms = _norms(elems, w, phi, workers)
    seen = set()
    pts = []
    for n, (h, v) in enumerate(zip(elems, norms)):
        seen.add(h)
        pts.append(OrbitPoint(n, h, float(v), len(seen)))
    return OrbitTrace(tuple(pts))


def operator_norm_bound(a, w: Weight, G: GroupSpace, sample) -> float:
    """max over the sample of w(x a) / w(x)."""
    pts = G.as_array(sample)
    if len(pts) == 0:
        raise PreconditionError("sample must be nonempty")
    shifted = G.right_translate(pts, tuple(a))
    return float(np.max(w.values(G, shifted) / w.values(G, pts)))


@dataclass(frozen=True)
class PeriodicCandidate:
    v: SimpleFunction
    period: int
    truncation: int
    residual_bound: float

    def to_dict(self) -> dict:
        return {"period": self.period, "L_max": self.truncation,
                "support_size": len(self.v), "residual_bound": self.residual_bound}


def _check_disjoint(G: GroupSpace, E: np.ndarray, a, n: int, L: int):
    # E a^{l n} for l = -L..L, checked pairwise through a point -> l map
    owner = {}
    for l in range(-L, L + 1):
        for p in G.right_translate(E, G.power(a, l * n)).tolist():
            key = tuple(p)
            r = owner.setdefault(key, l)
            if r != l:
                raise PreconditionError(
                    f"translates E a^(r n) and E a^(s n) meet for (r, s) = ({r}, {l}) at {key}")


def periodic_point(f: SimpleFunction, E, a, n_k: int, L_max: int, w: Weight,
                   phi: YoungFunction) -> PeriodicCandidate:
    """v = sum over |l| <= L_max of T^{l n_k}(f χ_E), with the telescoping residual bound.

    T^{n_k} v - v = T^{(L+1) n_k} u - T^{-L n_k} u for u = f χ_E, and the two
    terms have disjoint supports, so the bound is the sum of their norms.
    """
    if n_k < 1 or L_max < 0:
        raise DomainError("need n_k >= 1 and L_max >= 0")
    G = f.carrier
    a = tuple(a)
    E = G.as_array(E) if len(E) else np.zeros((0, G.dim), dtype=np.int64)
    _check_disjoint(G, E, a, n_k, L_max + 1)
    u = f.restrict(E)
    v = SimpleFunction(G)
    for l in range(-L_max, L_max + 1):
        v = v + translate(u, a, l * n_k)
    head = weighted_norm(translate(u, a, (L_max + 1) * n_k), w, phi).value
    tail = weighted_norm(translate(u, a, -L_max * n_k), w, phi).value
    return PeriodicCandidate(v, n_k, L_max, head + tail)


def orbit_hit(f: SimpleFunction, g: SimpleFunction, a, eps: float, N: int, w: Weight,
              phi: YoungFunction) -> Optional[int]:
    """Smallest 1 <= n <= N with ‖T_a^n f - g‖_{Φ,w} < eps, else None.

    n = 0 is deliberately excluded, so f = g is not a hit by itself.
    """
    if not eps > 0:
        raise DomainError("eps must be positive")
    x = f
    for n in range(1, N + 1):
        x = translate(x, a, 1)
        if weighted_norm(x - g, w, phi).value < eps:
            return n
    return None
