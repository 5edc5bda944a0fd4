"""Group carriers, element powers, torsion and aperiodicity, and weights.

Points are tuples of ints. Continuous groups are modelled by lattice
subgroups: ``LatticeLine(h)`` stores the index i of the real point i*h and
``DiscreteHeisenberg`` is the integer Heisenberg group H(Z). Batches of
points are int64 arrays of shape (n, dim).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from .errors import DomainError, PreconditionError

INTEGER_LINE = "integer_line"
CYCLIC = "cyclic"
LATTICE_LINE = "lattice_line"
HEISENBERG = "heisenberg_z"


@dataclass(frozen=True)
class GroupSpace:
    kind: str
    d: int = 0
    h: float = 1.0

    def __post_init__(self):
        if self.kind not in (INTEGER_LINE, CYCLIC, LATTICE_LINE, HEISENBERG):
            raise DomainError(f"unknown carrier {self.kind!r}")
        if self.kind == CYCLIC and self.d < 1:
            raise DomainError("cyclic group needs order d >= 1")
        if self.kind == LATTICE_LINE and not self.h > 0:
            raise DomainError("lattice step h must be positive")

    # -- construction / serialization -----------------------------------------

    @classmethod
    def from_dict(cls, spec: dict) -> "GroupSpace":
        g = spec.get("group")
        if g == INTEGER_LINE:
            return IntegerLine()
        if g == CYCLIC:
            return Cyclic(int(spec["d"]))
        if g == LATTICE_LINE:
            return LatticeLine(float(spec.get("h", 0.25)))
        if g == HEISENBERG:
            return DiscreteHeisenberg()
        raise DomainError(f"unknown group spec: {spec!r}")

    def to_dict(self) -> dict:
        if self.kind == CYCLIC:
            return {"group": CYCLIC, "d": self.d}
        if self.kind == LATTICE_LINE:
            return {"group": LATTICE_LINE, "h": self.h}
        return {"group": self.kind}

    # -- structure -------------------------------------------------------------

    @property
    def dim(self) -> int:
        return 3 if self.kind == HEISENBERG else 1

    @property
    def identity(self) -> tuple:
        return (0,) * self.dim

    @property
    def haar_mass(self) -> float:
        """Right Haar mass of one lattice point."""
        return self.h if self.kind == LATTICE_LINE else 1.0

    @property
    def abelian(self) -> bool:
        return self.kind != HEISENBERG

    @property
    def compact(self) -> bool:
        return self.kind == CYCLIC

    def point(self, *coords) -> tuple:
        if len(coords) == 1 and isinstance(coords[0], (tuple, list)):
            coords = tuple(coords[0])
        if len(coords) != self.dim:
            raise DomainError(f"{self.kind} points have {self.dim} coordinates, got {coords!r}")
        pt = tuple(int(c) for c in coords)
        return (pt[0] % self.d,) if self.kind == CYCLIC else pt

    def lattice_point(self, x: float) -> tuple:
        """The LatticeLine point at real position x (x must be a multiple of h)."""
        i = round(x / self.h)
        if not math.isclose(i * self.h, x, rel_tol=0, abs_tol=1e-9 * max(1.0, abs(x))):
            raise DomainError(f"{x} is not on the lattice of step {self.h}")
        return (int(i),)

    def positions(self, pts: np.ndarray) -> np.ndarray:
        """Real coordinates of a batch of points (lattice step applied)."""
        pts = np.asarray(pts)
        return pts * self.h if self.kind == LATTICE_LINE else pts.astype(float)

    def as_array(self, pts) -> np.ndarray:
        arr = np.asarray(list(pts) if not isinstance(pts, np.ndarray) else pts, dtype=np.int64)
        arr = arr.reshape(-1, self.dim)
        if self.kind == CYCLIC:
            arr = arr % self.d
        return arr

    # -- arithmetic ------------------------------------------------------------

    def mul_arrays(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Row-wise products x*y (broadcasting over rows)."""
        x = np.asarray(x, dtype=np.int64)
        y = np.asarray(y, dtype=np.int64)
        if self.kind == HEISENBERG:
            x, y = np.broadcast_arrays(x, y)
            out = x + y
            out[..., 2] += x[..., 0] * y[..., 1]
            return out
        out = x + y
        return out % self.d if self.kind == CYCLIC else out

    def inv_arrays(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.int64)
        if self.kind == HEISENBERG:
            out = -x
            out[..., 2] += x[..., 0] * x[..., 1]
            return out
        return (-x) % self.d if self.kind == CYCLIC else -x

    def mul(self, x, y) -> tuple:
        return tuple(int(c) for c in self.mul_arrays(np.array(x), np.array(y)))

    def inv(self, x) -> tuple:
        return tuple(int(c) for c in self.inv_arrays(np.array(x)))

    def power(self, a, n: int) -> tuple:
        """a^n by square-and-multiply; negative n uses the inverse."""
        n = int(n)
        base = self.inv(a) if n < 0 else tuple(a)
        n = abs(n)
        result = self.identity
        while n:
            if n & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            n >>= 1
        return result

    def right_translate(self, pts: np.ndarray, a) -> np.ndarray:
        """The set pts*a."""
        return self.mul_arrays(np.asarray(pts, dtype=np.int64).reshape(-1, self.dim), np.asarray(a))


def IntegerLine() -> GroupSpace:
    return GroupSpace(INTEGER_LINE)


def Cyclic(d: int) -> GroupSpace:
    return GroupSpace(CYCLIC, d=int(d))


def LatticeLine(h: float = 0.25) -> GroupSpace:
    return GroupSpace(LATTICE_LINE, h=float(h))


def DiscreteHeisenberg() -> GroupSpace:
    return GroupSpace(HEISENBERG)


def box(G: GroupSpace, radius: int) -> np.ndarray:
    """All points with every coordinate in [-radius, radius] (one per residue on Cyclic)."""
    r = range(-radius, radius + 1)
    pts = np.array(list(itertools.product(r, repeat=G.dim)), dtype=np.int64)
    return np.unique(G.as_array(pts), axis=0)


# ---------------------------------------------------------------------------
# torsion and aperiodicity

def is_torsion(G: GroupSpace, a, horizon: int) -> Optional[int]:
    """Smallest d <= horizon with a^d = e, or None."""
    if horizon < 1:
        raise DomainError("horizon must be >= 1")
    a = G.point(a)
    x = a
    for d in range(1, horizon + 1):
        if x == G.identity:
            return d
        x = G.mul(x, a)
    return None


@dataclass(frozen=True)
class AperiodicityWindow:
    """Result of :func:`aperiodicity_window`.

    ``M`` is the last n <= verified_to with K ∩ K a^{±n} nonempty (0 if none).
    ``witness`` is set on failure: the first n >= 1 with a nonempty intersection.
    """

    M: Optional[int]
    verified_to: int
    witness: Optional[int] = None

    @property
    def ok(self) -> bool:
        return self.witness is None


def _key_set(arr: np.ndarray) -> set:
    return set(map(tuple, np.unique(arr, axis=0).tolist()))


def aperiodicity_window(G: GroupSpace, a, K, horizon: int = 1000, side: str = "right") -> AperiodicityWindow:
    """Find M with K ∩ K a^{±n} = ∅ for all M < n <= horizon.

    K a^n meets K iff a^n lies in the quotient set K^{-1}K, so the quotient set is
    built once and the powers of a are looked up in it. Intersections in the upper
    half of the horizon are treated as recurrence and reported as failure.
    ``side="left"`` checks a^{±n} K instead.
    """
    a = tuple(a)
    if a == G.identity:
        raise DomainError("aperiodicity is undefined for the identity")
    pts = G.as_array(K)
    if len(pts) == 0:
        raise PreconditionError("K must be nonempty")
    X = pts[:, None, :]
    Y = pts[None, :, :]
    if side == "right":
        quot = G.mul_arrays(G.inv_arrays(X), Y)  # x^{-1} y: x a^n = y
    elif side == "left":
        quot = G.mul_arrays(Y, G.inv_arrays(X))  # y x^{-1}: a^n x = y
    else:
        raise DomainError("side must be 'right' or 'left'")
    quotients = _key_set(quot.reshape(-1, G.dim))
    hits = []
    fwd = back = G.identity
    a_inv = G.inv(a)
    for n in range(1, horizon + 1):
        fwd = G.mul(fwd, a)
        back = G.mul(back, a_inv)
        if fwd in quotients or back in quotients:
            hits.append(n)
    if not hits:
        return AperiodicityWindow(0, horizon)
    if hits[-1] > horizon // 2:
        return AperiodicityWindow(None, horizon, witness=hits[0])
    return AperiodicityWindow(hits[-1], horizon)


# ---------------------------------------------------------------------------
# weights

@dataclass(frozen=True, eq=False)
class Weight:
    """A strictly positive function on a carrier, evaluated on point batches."""

    fn: Callable[[GroupSpace, np.ndarray], np.ndarray] = field(repr=False)
    spec: dict

    def values(self, G: GroupSpace, pts) -> np.ndarray:
        pts = G.as_array(pts)
        if len(pts) == 0:
            return np.zeros(0)
        vals = np.asarray(self.fn(G, pts), dtype=float).reshape(-1)
        if np.any(~(vals > 0)):
            bad = pts[np.argmax(~(vals > 0))]
            raise DomainError(f"weight is not positive at {tuple(bad.tolist())}")
        return vals

    def __call__(self, G: GroupSpace, x) -> float:
        return float(self.values(G, [x])[0])

    @classmethod
    def from_dict(cls, spec: dict) -> "Weight":
        kind = spec.get("weight")
        if kind == "constant":
            return constant_weight(spec.get("c", 1.0))
        if kind == "exp_abs":
            return exp_abs_weight(spec["c"])
        if kind == "poly":
            return poly_weight(spec["s"])
        if kind == "table":
            return table_weight(spec["values"], spec.get("default", 1.0))
        raise DomainError(f"unknown weight spec: {spec!r}")

    def to_dict(self) -> dict:
        if self.spec.get("weight") == "custom":
            raise DomainError("callable weights are not serializable")
        return dict(self.spec)


def point_size(G: GroupSpace, pts: np.ndarray) -> np.ndarray:
    """|x| on lines (real position), circular distance on Z_d, |x|+|y|+|z| on H(Z)."""
    pts = np.asarray(pts)
    if G.kind == CYCLIC:
        r = pts[:, 0] % G.d
        return np.minimum(r, G.d - r).astype(float)
    if G.kind == HEISENBERG:
        return np.abs(pts).sum(axis=1).astype(float)
    return np.abs(G.positions(pts[:, 0]))


def constant_weight(c: float = 1.0) -> Weight:
    c = float(c)
    return Weight(lambda G, pts: np.full(len(pts), c), {"weight": "constant", "c": c})


def exp_abs_weight(c: float) -> Weight:
    """w(x) = exp(c |x|)."""
    c = float(c)
    return Weight(lambda G, pts: np.exp(c * point_size(G, pts)), {"weight": "exp_abs", "c": c})


def poly_weight(s: float) -> Weight:
    """w(x) = (1 + |x|)^s."""
    s = float(s)
    return Weight(lambda G, pts: (1.0 + point_size(G, pts)) ** s, {"weight": "poly", "s": s})


def table_weight(values: dict, default: float = 1.0) -> Weight:
    """Explicit values keyed by point tuples (or "x,y,z" strings); ``default`` elsewhere."""
    table = {}
    for k, v in values.items():
        key = tuple(int(c) for c in k.split(",")) if isinstance(k, str) else tuple(k)
        table[key] = float(v)

    def fn(G, pts):
        return np.array([table.get(tuple(p), default) for p in pts.tolist()])

    spec = {"weight": "table", "values": {",".join(map(str, k)): v for k, v in table.items()},
            "default": float(default)}
    return Weight(fn, spec)


def custom_weight(fn: Callable[[GroupSpace, np.ndarray], np.ndarray], name: str = "custom") -> Weight:
    return Weight(fn, {"weight": "custom", "name": name})


@dataclass(frozen=True)
class WeightReport:
    verdict: str  # "verified-on-sample" | "refuted" | "unchecked"
    counterexample: Optional[tuple] = None
    bound_constants: dict = field(default_factory=dict)
    pairs_checked: int = 0

    @property
    def verified(self) -> bool:
        return self.verdict == "verified-on-sample"


def default_pair_sample(G: GroupSpace, radius: int = 6) -> list:
    """Point pairs ordered by size, small pairs (and positive-first coordinates) first."""
    coords = [0]
    for r in range(1, radius + 1):
        coords += [r, -r]
    if G.dim == 1:
        pts = [G.point(c) for c in coords]
    else:
        small = [c for c in coords if abs(c) <= max(1, radius // 2)]
        pts = [G.point(p) for p in itertools.product(small, repeat=G.dim)]
    pts = list(dict.fromkeys(pts))
    pairs = list(itertools.product(pts, pts))
    pairs.sort(key=lambda pq: sum(abs(c) for c in pq[0] + pq[1]))
    return pairs


def validate_weight(G: GroupSpace, w: Weight, sample: Optional[Iterable] = None,
                    generators: Iterable = (), rtol: float = 1e-12) -> WeightReport:
    """Sample-check w(xy) <= w(x) w(y) and compute C_a = max w(xa)/w(x) per generator."""
    pairs = list(default_pair_sample(G) if sample is None else sample)
    if not pairs:
        raise DomainError("weight validation needs a nonempty sample")
    X = G.as_array([p for p, _ in pairs])
    Y = G.as_array([q for _, q in pairs])
    wx, wy = w.values(G, X), w.values(G, Y)
    wxy = w.values(G, G.mul_arrays(X, Y))
    bad = wxy > wx * wy * (1.0 + rtol)
    counter = None
    if np.any(bad):
        i = int(np.argmax(bad))
        counter = (tuple(X[i].tolist()), tuple(Y[i].tolist()))
    verdict = "refuted" if counter is not None else "verified-on-sample"
    bounds = {}
    pts = np.unique(np.vstack([X, Y]), axis=0)
    for a in generators:
        a = tuple(a)
        bounds[a] = float(np.max(w.values(G, G.right_translate(pts, a)) / w.values(G, pts)))
    return WeightReport(verdict, counter, bounds, len(pairs))
