"""Decay certificates for the transitivity, mixing and chaos criteria.

The criterion quantities are weighted Orlicz norms of translated indicators:
q0 = ‖χ_{K∖E_k}‖, q± = ‖T_a^{±n_k} χ_{E_k}‖ (all in L^Φ_w). A certificate
records them along a finite schedule. Its verdict is evidence, not proof.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, PreconditionError
from .groups import GroupSpace, Weight, aperiodicity_window, validate_weight
from .orlicz import SimpleFunction, dual_ball_sup, orlicz_norm, weighted_norm
from .young import YoungFunction

CERTIFIED = "certified-decaying"
INCONCLUSIVE = "inconclusive"
OBSTRUCTED = "obstructed"

REPORT_FORMAT = "orlicz-dynamics/certificate"
REPORT_VERSION = 1

TRANSITIVE = "transitive"
MIXING = "mixing"
CHAOTIC = "chaotic"


# ---------------------------------------------------------------------------
# E_k strategies

@dataclass(frozen=True)
class Strategy:
    """``full`` takes E_k = K. ``greedy`` keeps x with max(w(x a^{n}), w(x a^{-n})) <= δ_k,
    δ_k = delta0 * ratio^(k-1)."""

    kind: str = "full"
    delta0: float = 1.0
    ratio: float = 0.5

    def __post_init__(self):
        if self.kind not in ("full", "greedy"):
            raise DomainError(f"unknown strategy {self.kind!r}")
        if self.kind == "greedy" and not (self.delta0 > 0 and 0 < self.ratio <= 1):
            raise DomainError("greedy strategy needs delta0 > 0 and 0 < ratio <= 1")

    @classmethod
    def from_dict(cls, spec) -> "Strategy":
        if spec is None or spec == "full":
            return cls()
        if isinstance(spec, str):
            raise DomainError(f"unknown strategy {spec!r}")
        return cls(spec.get("kind", "full"), float(spec.get("delta0", 1.0)), float(spec.get("ratio", 0.5)))

    def to_dict(self) -> dict:
        if self.kind == "full":
            return {"kind": "full"}
        return {"kind": "greedy", "delta0": self.delta0, "ratio": self.ratio}

    def select(self, G: GroupSpace, K: np.ndarray, a, n: int, k: int, w: Weight) -> np.ndarray:
        if self.kind == "full" or len(K) == 0:
            return K
        delta = self.delta0 * self.ratio ** (k - 1)
        up = w.values(G, G.right_translate(K, G.power(a, n)))
        down = w.values(G, G.right_translate(K, G.power(a, -n)))
        return K[np.maximum(up, down) <= delta]


FULL = Strategy()


def greedy(delta0: float = 1.0, ratio: float = 0.5) -> Strategy:
    return Strategy("greedy", delta0, ratio)


# ---------------------------------------------------------------------------
# quantities

def _points(G: GroupSpace, E) -> np.ndarray:
    if E is None or len(E) == 0:
        return np.zeros((0, G.dim), dtype=np.int64)
    return np.unique(G.as_array(E), axis=0)


def criterion_quantity(G: GroupSpace, E, a, n: int, w: Weight, phi: YoungFunction,
                       direct: bool = False, seed: int = 0) -> float:
    """sup over the Ψ-ball of Σ_{x∈E} |v(x a^n)| w(x a^n) λ({x}).

    By right invariance this is ‖χ_{E a^n}‖_{Φ,w}. ``direct`` evaluates the sup
    with the dual-ball oracle instead.
    """
    E = _points(G, E)
    if len(E) == 0:
        return 0.0
    shifted = G.right_translate(E, G.power(a, n))
    if direct:
        vals = w.values(G, shifted)
        return dual_ball_sup(vals, np.full(len(vals), G.haar_mass), phi, seed=seed)
    return weighted_norm(SimpleFunction.indicator(G, shifted), w, phi).value


def _set_minus(K: np.ndarray, E: np.ndarray) -> np.ndarray:
    if len(E) == 0:
        return K
    drop = set(map(tuple, E.tolist()))
    keep = np.array([tuple(p) not in drop for p in K.tolist()], dtype=bool)
    return K[keep]


def _geometric_tail(terms: Sequence[float]):
    """(tail bound, ratio, bounded) from the last-term ratio r: last r / (1 - r)."""
    last, prev = terms[-1], terms[-2]
    if last == 0.0:
        return 0.0, 0.0, True
    r = last / prev if prev > 0 else math.inf
    if r >= 1.0:
        return math.inf, r, False
    return last * r / (1.0 - r), r, True


# ---------------------------------------------------------------------------
# certificates

@dataclass(frozen=True)
class CriterionStep:
    k: int
    n_k: int
    E: tuple = field(repr=False)
    q0: float
    q_plus: float
    q_minus: float
    a_power: tuple = ()
    series_plus: Optional[float] = None
    series_minus: Optional[float] = None
    tail_plus: Optional[float] = None
    tail_minus: Optional[float] = None
    ratio: Optional[float] = None

    @property
    def E_size(self) -> int:
        return len(self.E)

    @property
    def tail_bounded(self) -> bool:
        return self.tail_plus is None or (math.isfinite(self.tail_plus) and math.isfinite(self.tail_minus))

    def stream_value(self) -> float:
        """The quantity whose decay the verdict tracks."""
        if self.series_plus is None:
            return max(self.q0, self.q_plus, self.q_minus)
        return max(self.q0, self.series_plus + self.series_minus + self.tail_plus + self.tail_minus)

    def to_dict(self) -> dict:
        d = {"k": self.k, "n_k": self.n_k, "a_power": list(self.a_power), "E_size": self.E_size,
             "q0": self.q0, "q_plus": self.q_plus, "q_minus": self.q_minus}
        if self.series_plus is not None:
            d.update(series_plus=self.series_plus, tail_plus=_finite_or_none(self.tail_plus),
                     series_minus=self.series_minus, tail_minus=_finite_or_none(self.tail_minus),
                     tail_ratio=_finite_or_none(self.ratio), tail_bounded=self.tail_bounded)
        return d


def _finite_or_none(x):
    return None if x is None or not math.isfinite(x) else x


@dataclass(frozen=True)
class Certificate:
    mode: str
    steps: tuple
    verdict: str
    reason: str = ""
    decay_ratio: Optional[float] = None
    tol: float = 1e-9
    lower_bound: Optional[float] = None

    def streams(self) -> dict:
        out = {"q0": [s.q0 for s in self.steps]}
        if self.mode == CHAOTIC:
            out["series"] = [s.stream_value() for s in self.steps]
        else:
            out["q_plus"] = [s.q_plus for s in self.steps]
            out["q_minus"] = [s.q_minus for s in self.steps]
        return out

    def final_max(self) -> float:
        return max(v[-1] for v in self.streams().values()) if self.steps else math.inf

    def to_dict(self) -> dict:
        return {"format": REPORT_FORMAT, "version": REPORT_VERSION, "mode": self.mode,
                "verdict": self.verdict, "reason": self.reason, "tol": self.tol,
                "decay_ratio": self.decay_ratio, "lower_bound": self.lower_bound,
                "steps": [s.to_dict() for s in self.steps]}


def decay_ratio(values: Sequence[float]) -> Optional[float]:
    """Per-step geometric ratio from a log-linear fit over the last half."""
    v = np.asarray(values, dtype=float)
    half = v[len(v) // 2:]
    idx = np.arange(len(v))[len(v) // 2:]
    ok = (half > 0) & np.isfinite(half)
    if ok.sum() < 2:
        return None
    slope = np.polyfit(idx[ok], np.log(half[ok]), 1)[0]
    return float(math.exp(slope))


def _nonincreasing(v, rtol=1e-12) -> bool:
    return all(b <= a * (1 + rtol) + 1e-300 for a, b in zip(v, v[1:]))


def _decaying(streams: dict, tol: float) -> bool:
    for v in streams.values():
        tail = v[len(v) // 2:]
        if not (v[-1] < tol and _nonincreasing(tail)):
            return False
    return True


def _check_schedule(schedule):
    sched = [int(n) for n in schedule]
    if not sched:
        raise PreconditionError("schedule must be nonempty")
    if sched[0] < 1 or any(b <= a for a, b in zip(sched, sched[1:])):
        raise PreconditionError("schedule must be positive and strictly increasing")
    return sched


def _check_inputs(G, K, a, schedule):
    K = _points(G, K)
    if len(K) == 0:
        raise PreconditionError("K must be nonempty (λ(K) > 0)")
    sched = _check_schedule(schedule)
    horizon = max(64, 2 * sched[-1])
    win = aperiodicity_window(G, a, K, horizon=horizon)
    if not win.ok:
        raise PreconditionError(
            f"a is not aperiodic on K: K ∩ K a^±n recurs (first at n = {win.witness})")
    return K, sched


def _invariant(steps, rtol=1e-12) -> bool:
    for vals in ([s.q_plus for s in steps], [s.q_minus for s in steps]):
        if max(vals) - min(vals) > rtol * max(vals):
            return False
    return True


def _run_steps(fn, sched, workers):
    jobs = list(enumerate(sched, start=1))
    if workers and workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(workers) as pool:
            return tuple(pool.map(lambda kn: fn(*kn), jobs))
    return tuple(fn(k, n) for k, n in jobs)


def _verdict(mode, G, K, a, w, phi, steps, tol, horizon):
    cert_streams = Certificate(mode, steps, INCONCLUSIVE).streams()
    ratio = decay_ratio([s.stream_value() for s in steps])
    if mode == CHAOTIC and not any(s.tail_bounded for s in steps):
        return INCONCLUSIVE, "tail ratio >= 1 at every step", ratio, None
    if _decaying(cert_streams, tol) and all(s.tail_bounded for s in steps[len(steps) // 2:]):
        return CERTIFIED, "", ratio, None
    if _invariant(steps):
        # no weight growth to blame: the translation is an isometry along the schedule
        return INCONCLUSIVE, "q+ and q- constant across steps (translation-invariant norm)", ratio, None
    if G.abelian:
        ob = abelian_obstruction_check(G, K, a, w, horizon)
        if ob.applicable and ob.holds:
            lb = obstruction_lower_bound(G, K, w, phi, ob.bound)
            if lb > tol:
                return (OBSTRUCTED, f"w(x a^n) w(x a^-n) >= w(x^2) >= {ob.bound:.6g} on K; "
                        f"max(q0, q+, q-) >= {lb:.6g}", ratio, lb)
    return INCONCLUSIVE, "no decay below tol on the schedule", ratio, None


def transitivity_certificate(G: GroupSpace, K, a, w: Weight, phi: YoungFunction, schedule,
                             strategy: Strategy = FULL, tol: float = 1e-9, workers: int = 1,
                             mode: str = TRANSITIVE) -> Certificate:
    """Track q0, q+ and q- along the schedule n_k."""
    a = tuple(a)
    K, sched = _check_inputs(G, K, a, schedule)

    def step(k, n):
        E = strategy.select(G, K, a, n, k, w)
        return CriterionStep(
            k, n, tuple(map(tuple, E.tolist())),
            q0=criterion_quantity(G, _set_minus(K, E), a, 0, w, phi),
            q_plus=criterion_quantity(G, E, a, n, w, phi),
            q_minus=criterion_quantity(G, E, a, -n, w, phi),
            a_power=G.power(a, n))

    steps = _run_steps(step, sched, workers)
    verdict, reason, ratio, lb = _verdict(mode, G, K, a, w, phi, steps, tol, sched[-1])
    return Certificate(mode, steps, verdict, reason, ratio, tol, lb)


def mixing_certificate(G: GroupSpace, K, a, w: Weight, phi: YoungFunction, N: int,
                       strategy: Strategy = FULL, tol: float = 1e-9, workers: int = 1) -> Certificate:
    """The transitivity certificate on the full sequence 1..N."""
    if N < 1:
        raise PreconditionError("mixing horizon N must be >= 1")
    return transitivity_certificate(G, K, a, w, phi, range(1, N + 1), strategy, tol, workers, mode=MIXING)


def chaos_certificate(G: GroupSpace, K, a, w: Weight, phi: YoungFunction, schedule,
                      strategy: Strategy = FULL, L_max: int = 8, tol: float = 1e-9,
                      workers: int = 1) -> Certificate:
    """q0 plus the series Σ_{l=1}^{L_max} ‖T^{±l n_k} χ_{E_k}‖ with geometric tail bounds."""
    if L_max < 2:
        raise DomainError("L_max must be >= 2 for a ratio tail bound")
    a = tuple(a)
    K, sched = _check_inputs(G, K, a, schedule)
    for n in sched:
        _check_translates(G, K, a, n, L_max)

    def step(k, n):
        E = strategy.select(G, K, a, n, k, w)
        plus = [criterion_quantity(G, E, a, l * n, w, phi) for l in range(1, L_max + 1)]
        minus = [criterion_quantity(G, E, a, -l * n, w, phi) for l in range(1, L_max + 1)]
        tp, rp, _ = _geometric_tail(plus)
        tm, rm, _ = _geometric_tail(minus)
        return CriterionStep(
            k, n, tuple(map(tuple, E.tolist())),
            q0=criterion_quantity(G, _set_minus(K, E), a, 0, w, phi),
            q_plus=plus[0], q_minus=minus[0], a_power=G.power(a, n),
            series_plus=float(sum(plus)), series_minus=float(sum(minus)),
            tail_plus=tp, tail_minus=tm, ratio=max(rp, rm))

    steps = _run_steps(step, sched, workers)
    verdict, reason, ratio, lb = _verdict(CHAOTIC, G, K, a, w, phi, steps, tol, sched[-1])
    return Certificate(CHAOTIC, steps, verdict, reason, ratio, tol, lb)


def _check_translates(G, K, a, n, L):
    owner = {}
    for l in range(-L, L + 1):
        for p in G.right_translate(K, G.power(a, l * n)).tolist():
            r = owner.setdefault(tuple(p), l)
            if r != l:
                raise PreconditionError(f"translates K a^(r n_k) and K a^(s n_k) meet for n_k = {n}, "
                                        f"(r, s) = ({r}, {l})")


# ---------------------------------------------------------------------------
# blow-up / collapse

@dataclass(frozen=True)
class ProbeResult:
    found: bool
    n_k: Optional[int]
    E: tuple
    norms: tuple  # ‖f - fχ_E‖, ‖T^n fχ_E‖, ‖g - gχ_E‖, ‖S^n gχ_E‖

    def to_dict(self) -> dict:
        return {"found": self.found, "n_k": self.n_k, "E_size": len(self.E), "norms": list(self.norms)}


def blowup_collapse_probe(f: SimpleFunction, g: SimpleFunction, eps: float, a, w: Weight,
                          phi: YoungFunction, schedule, strategy: Strategy = FULL) -> ProbeResult:
    """First n_k on the schedule whose four blow-up/collapse norms are all below eps.

    On failure the result carries the quadruple with the smallest maximum.
    """
    if not eps > 0:
        raise DomainError("eps must be positive")
    G = f.carrier
    a = tuple(a)
    K = _points(G, np.vstack([f.points, g.points]))
    best = None
    for k, n in enumerate(_check_schedule(schedule), start=1):
        E = strategy.select(G, K, a, n, k, w)
        fe, ge = f.restrict(E), g.restrict(E)
        norms = (weighted_norm(f - fe, w, phi).value,
                 weighted_norm(fe.translate(a, n), w, phi).value,
                 weighted_norm(g - ge, w, phi).value,
                 weighted_norm(ge.translate(a, -n), w, phi).value)
        cand = ProbeResult(max(norms) < eps, n, tuple(map(tuple, E.tolist())), norms)
        if cand.found:
            return cand
        if best is None or max(norms) < max(best.norms):
            best = cand
    return best


# ---------------------------------------------------------------------------
# abelian obstruction

@dataclass(frozen=True)
class ObstructionReport:
    applicable: bool
    holds: bool
    bound: Optional[float]
    reason: str = ""

    def to_dict(self) -> dict:
        return {"applicable": self.applicable, "holds": self.holds, "bound": self.bound,
                "reason": self.reason}


def abelian_obstruction_check(G: GroupSpace, K, a, w: Weight, horizon: int,
                              rtol: float = 1e-12) -> ObstructionReport:
    """Check w(x a^n) w(x a^-n) >= w(x^2) on K for 1 <= n <= horizon.

    Needs an abelian carrier and a weight that passes the submultiplicativity sample.
    """
    if not G.abelian:
        return ObstructionReport(False, False, None, "carrier is not abelian")
    rep = validate_weight(G, w)
    if not rep.verified:
        return ObstructionReport(False, False, None,
                                 f"weight is not submultiplicative: {rep.counterexample}")
    K = _points(G, K)
    if len(K) == 0:
        raise PreconditionError("K must be nonempty")
    sq = w.values(G, G.mul_arrays(K, K))
    a = tuple(a)
    for n in range(1, horizon + 1):
        up = w.values(G, G.right_translate(K, G.power(a, n)))
        down = w.values(G, G.right_translate(K, G.power(a, -n)))
        bad = up * down < sq * (1.0 - rtol)
        if np.any(bad):
            x = tuple(K[int(np.argmax(bad))].tolist())
            return ObstructionReport(True, False, float(sq.min()), f"fails at x = {x}, n = {n}")
    return ObstructionReport(True, True, float(sq.min()))


def obstruction_lower_bound(G: GroupSpace, K, w: Weight, phi: YoungFunction, bound: float) -> float:
    """A floor on max(q0, q+, q-) at every step, whatever E_k is.

    Each x in K lands in K∖E_k (weight w(x)) or has w(x a^n) or w(x a^-n) at
    least sqrt(bound), so one of the three indicators covers ⌈|K|/3⌉ points with
    weight at least c = min(min_K w, sqrt(bound)).
    """
    K = _points(G, K)
    c = min(float(w.values(G, K).min()), math.sqrt(bound))
    m = -(-len(K) // 3)
    chi = SimpleFunction.indicator(G, K[:m])
    return c * orlicz_norm(chi, phi).value
