import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from orlicz_dynamics import (CapacityError, Cyclic, DiscreteHeisenberg, DomainError, IntegerLine,
                             LatticeLine, PreconditionError, SimpleFunction, YoungFunction,
                             abelian_obstruction_check, blowup_collapse_probe, box, chaos_certificate,
                             constant_weight, criterion_quantity, exp_abs_weight, greedy,
                             mixing_certificate, orlicz_norm, transitivity_certificate)
from orlicz_dynamics.certify import (CERTIFIED, INCONCLUSIVE, OBSTRUCTED, decay_ratio,
                                     obstruction_lower_bound)

Z = IntegerLine()
H = DiscreteHeisenberg()
P2 = YoungFunction.power(2.0)
PL = YoungFunction.power_log(2.0)
ONE = constant_weight()
DECAY = exp_abs_weight(-1.0)
GROW = exp_abs_weight(1.0)
K7 = [(i,) for i in range(-3, 4)]


def chi_norm(G, n, phi):
    return orlicz_norm(SimpleFunction.indicator(G, [(i,) for i in range(n)]), phi).value


# -- criterion quantities ---------------------------------------------------------------

def test_criterion_quantity_examples():
    assert criterion_quantity(Z, [], (1,), 5, ONE, P2) == 0.0
    assert criterion_quantity(Z, [(0,)], (1,), 5, ONE, P2) == pytest.approx(math.sqrt(2), abs=1e-6)
    assert criterion_quantity(Z, [(0,)], (1,), 5, DECAY, P2) == pytest.approx(0.009528896028657764, abs=1e-5)


@pytest.mark.parametrize("phi", [P2, PL, YoungFunction.power(3.0)], ids=str)
@pytest.mark.parametrize("w", [ONE, DECAY, GROW], ids=lambda w: str(w.spec))
def test_reduced_matches_direct(phi, w):
    rng = np.random.default_rng(3)
    for _ in range(6):
        E = [(int(x),) for x in rng.choice(np.arange(-6, 7), int(rng.integers(1, 9)), replace=False)]
        a, n = (int(rng.integers(1, 4)),), int(rng.integers(-6, 7))
        red = criterion_quantity(Z, E, a, n, w, phi)
        assert criterion_quantity(Z, E, a, n, w, phi, direct=True) == pytest.approx(red, abs=1e-4)


def test_reduced_matches_direct_on_heisenberg():
    E = [tuple(p) for p in box(H, 1)[:8].tolist()]
    red = criterion_quantity(H, E, (1, 0, 3), 2, exp_abs_weight(-0.5), PL)
    assert criterion_quantity(H, E, (1, 0, 3), 2, exp_abs_weight(-0.5), PL, direct=True) == pytest.approx(red, abs=1e-4)


def test_direct_mode_capacity():
    E = [(i,) for i in range(13)]
    with pytest.raises(CapacityError):
        criterion_quantity(Z, E, (1,), 1, DECAY, PL, direct=True)
    assert criterion_quantity(Z, E, (1,), 1, DECAY, P2, direct=True) == pytest.approx(
        criterion_quantity(Z, E, (1,), 1, DECAY, P2), rel=1e-9)


# -- transitivity / mixing ----------------------------------------------------------------

def test_transitivity_positive_example():
    c = transitivity_certificate(Z, K7, (1,), DECAY, P2, range(1, 31))
    assert c.verdict == CERTIFIED
    assert c.decay_ratio == pytest.approx(math.exp(-1), abs=0.05)
    assert c.final_max() < 1e-9
    # q_plus is dominated by e^{-(n_k - 3)} ‖χ_K‖ for large n_k
    last = c.steps[-1]
    assert last.q_plus < math.exp(-(30 - 3)) * chi_norm(Z, 7, P2)


def test_transitivity_unweighted_example():
    c = transitivity_certificate(Z, K7, (1,), ONE, P2, range(1, 31))
    assert c.verdict == INCONCLUSIVE
    ref = chi_norm(Z, 7, P2)
    assert all(s.q_plus == pytest.approx(ref, rel=1e-12) and s.q_minus == s.q_plus for s in c.steps)


def test_transitivity_obstructed_example():
    c = transitivity_certificate(Z, K7, (1,), GROW, P2, range(1, 31))
    assert c.verdict == OBSTRUCTED
    assert c.lower_bound > c.tol


def test_transitivity_preconditions():
    with pytest.raises(PreconditionError):
        transitivity_certificate(Z, [], (1,), DECAY, P2, range(1, 5))
    with pytest.raises(PreconditionError):
        transitivity_certificate(Z, K7, (1,), DECAY, P2, [1, 3, 2])
    with pytest.raises(PreconditionError, match="aperiodic"):
        transitivity_certificate(Cyclic(6), [(0,)], (1,), ONE, P2, range(1, 5))


def test_mixing_examples():
    c = mixing_certificate(Z, K7, (1,), DECAY, P2, 30)
    assert c.verdict == CERTIFIED
    q = [s.q_plus for s in c.steps]
    assert all(b <= a for a, b in zip(q[6:], q[7:]))
    assert mixing_certificate(Z, K7, (1,), ONE, P2, 30).verdict == INCONCLUSIVE
    with pytest.raises(PreconditionError):
        mixing_certificate(Z, K7, (1,), DECAY, P2, 0)


def test_step_values_depend_only_on_n_k():
    full = transitivity_certificate(Z, K7, (1,), DECAY, P2, range(1, 31))
    sub = transitivity_certificate(Z, K7, (1,), DECAY, P2, [4, 9, 17, 30])
    by_n = {s.n_k: s for s in full.steps}
    for s in sub.steps:
        assert (s.q0, s.q_plus, s.q_minus) == (by_n[s.n_k].q0, by_n[s.n_k].q_plus, by_n[s.n_k].q_minus)
    assert sub.final_max() <= full.final_max()


def test_greedy_strategy():
    # at n = 1 the points x = ±1 have w(x ∓ 1) = 1 > δ_1 and stay out of E_1
    c = transitivity_certificate(Z, K7, (1,), DECAY, P2, range(1, 31), strategy=greedy(0.5, 0.9))
    assert c.verdict == CERTIFIED
    assert c.steps[0].E_size == 5
    assert c.steps[0].q0 > 0


def test_workers_do_not_change_certificate():
    a = transitivity_certificate(Z, K7, (1,), DECAY, PL, range(1, 21))
    b = transitivity_certificate(Z, K7, (1,), DECAY, PL, range(1, 21), workers=4)
    assert a == b


@pytest.mark.parametrize("G,a,K", [(Z, (2,), K7), (LatticeLine(0.5), (3,), K7),
                                   (H, (1, 0, 3), [tuple(p) for p in box(H, 1).tolist()])], ids=str)
def test_unweighted_quantities_are_invariant(G, a, K):
    c = transitivity_certificate(G, K, a, ONE, PL, range(5, 12))
    ref = orlicz_norm(SimpleFunction.indicator(G, K), PL).value
    for s in c.steps:
        assert s.q_plus == pytest.approx(ref, rel=1e-12)
        assert s.q_minus == pytest.approx(ref, rel=1e-12)
    assert c.verdict != CERTIFIED


# -- chaos ----------------------------------------------------------------------------------

def test_chaos_positive_example():
    c = chaos_certificate(Z, K7, (1,), DECAY, P2, [10, 20, 30], L_max=8)
    assert c.verdict == CERTIFIED
    for s in c.steps:
        assert s.tail_plus < 1e-20 and s.tail_minus < 1e-20
        assert s.ratio == pytest.approx(math.exp(-s.n_k), rel=1e-6)


def test_chaos_unweighted_has_unit_ratio():
    c = chaos_certificate(Z, K7, (1,), ONE, P2, [10, 20, 30], L_max=8)
    assert c.verdict == INCONCLUSIVE
    assert all(s.ratio == pytest.approx(1.0) and not s.tail_bounded for s in c.steps)


def test_chaos_with_empty_E():
    c = chaos_certificate(Z, K7, (1,), DECAY, P2, [10, 20], strategy=greedy(1e-300, 1.0), L_max=3)
    ref = orlicz_norm(SimpleFunction.indicator(Z, K7).times_weight(DECAY), P2).value
    for s in c.steps:
        assert s.E_size == 0 and s.series_plus == 0.0 and s.series_minus == 0.0
        assert s.q0 == pytest.approx(ref, rel=1e-12)
    assert c.verdict != CERTIFIED


def test_chaos_preconditions():
    with pytest.raises(PreconditionError, match=r"\(r, s\)"):
        chaos_certificate(Z, K7, (1,), DECAY, P2, [3, 40], L_max=4)
    with pytest.raises(DomainError):
        chaos_certificate(Z, K7, (1,), DECAY, P2, [10], L_max=1)


def test_chaos_implies_transitivity():
    for w in (DECAY, exp_abs_weight(-0.3), ONE):
        ch = chaos_certificate(Z, K7, (1,), w, P2, [10, 20, 30, 40], L_max=4)
        tr = transitivity_certificate(Z, K7, (1,), w, P2, [10, 20, 30, 40])
        if ch.verdict == CERTIFIED:
            assert tr.verdict == CERTIFIED
        for a, b in zip(ch.steps, tr.steps):
            assert a.series_plus >= b.q_plus and a.series_minus >= b.q_minus


def test_certificate_serializes():
    c = chaos_certificate(Z, K7, (1,), ONE, P2, [10, 20], L_max=3)
    d = json.loads(json.dumps(c.to_dict()))
    assert d["mode"] == "chaotic" and d["version"] == 1
    step = d["steps"][0]
    for key in ("k", "n_k", "E_size", "q0", "q_plus", "q_minus", "series_plus", "tail_plus"):
        assert key in step
    assert step["tail_plus"] is None and step["tail_bounded"] is False


def test_decay_ratio_fit():
    assert decay_ratio([2.0 ** -k for k in range(20)]) == pytest.approx(0.5, rel=1e-9)
    assert decay_ratio([0.0, 0.0, 0.0]) is None


# -- blow-up / collapse ------------------------------------------------------------------------

def test_probe_examples():
    f = SimpleFunction.atom(Z, (0,))
    hit = blowup_collapse_probe(f, f, 0.01, (1,), DECAY, P2, range(1, 31))
    assert hit.found and hit.n_k == 5
    assert math.sqrt(2) * math.exp(-hit.n_k) < 0.01
    miss = blowup_collapse_probe(f, f, 0.01, (1,), ONE, P2, range(1, 31))
    assert not miss.found and miss.norms[1] == pytest.approx(math.sqrt(2))
    zero = SimpleFunction(Z)
    assert blowup_collapse_probe(zero, zero, 0.01, (1,), ONE, P2, [3, 4]).n_k == 3


@given(st.data())
def test_probe_follows_certificate(data):
    amps = st.floats(-3, 3).filter(lambda v: abs(v) > 1e-2)
    pts = data.draw(st.lists(st.integers(-3, 3), min_size=1, max_size=4, unique=True))
    f = SimpleFunction(Z, [(p,) for p in pts], [data.draw(amps) for _ in pts])
    g = SimpleFunction(Z, [(p,) for p in pts[::-1]], [data.draw(amps) for _ in pts])
    eps = 0.01
    tol = eps / (1 + f.sup_norm() + g.sup_norm())
    K = sorted(set(f.support) | set(g.support))
    cert = transitivity_certificate(Z, K, (1,), DECAY, P2, range(1, 31), tol=tol)
    if cert.verdict == CERTIFIED:
        assert blowup_collapse_probe(f, g, eps, (1,), DECAY, P2, range(1, 31)).found


# -- abelian obstruction ----------------------------------------------------------------------------

def test_obstruction_examples():
    r = abelian_obstruction_check(Z, K7, (1,), GROW, 30)
    assert r.applicable and r.holds and r.bound == 1.0
    assert not abelian_obstruction_check(Z, K7, (1,), DECAY, 30).applicable
    one = abelian_obstruction_check(Z, K7, (1,), ONE, 30)
    assert one.holds and one.bound == 1.0
    assert not abelian_obstruction_check(H, [(0, 0, 0)], (1, 0, 3), GROW, 10).applicable


@pytest.mark.parametrize("w", [GROW, exp_abs_weight(0.2), ONE], ids=lambda w: str(w.spec))
@pytest.mark.parametrize("strategy", [None, greedy(3.0, 0.9)], ids=["full", "greedy"])
def test_obstruction_lower_bound_is_valid(w, strategy):
    kw = {} if strategy is None else {"strategy": strategy}
    c = transitivity_certificate(Z, K7, (1,), w, PL, range(1, 16), **kw)
    lb = obstruction_lower_bound(Z, K7, w, PL, abelian_obstruction_check(Z, K7, (1,), w, 15).bound)
    for s in c.steps:
        assert max(s.q0, s.q_plus, s.q_minus) >= lb * (1 - 1e-12)
