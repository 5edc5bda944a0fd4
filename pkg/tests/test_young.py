import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import minimize_scalar

from orlicz_dynamics import (DivergenceError, DomainError, SearchConfig, YoungFunction, check_axioms,
                             complementary, conjugate, conjugate_table, delta2_probe, evaluate,
                             inverse, young_gap)
from orlicz_dynamics.young import POWER_LOG_CONVEX_ALPHA

P2 = YoungFunction.power(2.0)
NUMERIC = SearchConfig(use_hint=False)

# Tangent point of the convex envelope of t^2 (1 + |log t|) through (1, 1),
# solved independently with mpmath (30 digits).
BRIDGE_T1 = 0.430602897818643046
BRIDGE_SLOPE = 1.156228173142438514
BRIDGE_PHI = 0.341647028752251258


def brute_conjugate(phi, y):
    res = minimize_scalar(lambda x: -(x * y - phi(x)), bounds=(0.0, 50.0), method="bounded",
                          options={"xatol": 1e-12})
    return -res.fun


def test_evaluate_examples():
    assert evaluate(P2, 3) == 4.5
    assert evaluate(P2, 0) == 0.0
    assert evaluate(P2, -3) == 4.5
    assert evaluate(YoungFunction.power_log(2.0), 1.0) == 1.0


def test_evaluate_rejects_nonfinite():
    with pytest.raises(DomainError):
        evaluate(P2, math.inf)
    with pytest.raises(DomainError):
        evaluate(P2, math.nan)


def test_conjugate_examples():
    assert conjugate(P2, 2.0, NUMERIC) == pytest.approx(2.0, abs=1e-9)
    assert conjugate(P2, 0.0) == 0.0
    assert conjugate(YoungFunction.power_log(2.0), 0.0) == 0.0
    # 3x - x^4/4 maximised at x = 3^{1/3}; value frozen from mpmath
    assert conjugate(YoungFunction.power(4.0), 3.0, NUMERIC) == pytest.approx(3.2450615331916689, rel=1e-9)


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0, 4.0])
def test_numeric_conjugate_matches_closed_form(p):
    q = p / (p - 1)
    phi = YoungFunction.power(p)
    for y in np.linspace(0.1, 10, 25):
        assert conjugate(phi, y, NUMERIC) == pytest.approx(y ** q / q, rel=1e-6)


def test_hint_is_crosschecked():
    phi = YoungFunction.custom(lambda t: t * t / 2, conjugate=lambda y: y * y)  # wrong on purpose
    with pytest.raises(ArithmeticError):
        conjugate(phi, 2.0)


def test_conjugate_matches_bounded_search_for_power_log():
    phi = YoungFunction.power_log(2.0)
    for y in (0.3, 1.0, 2.5, 6.0):
        assert conjugate(phi, y) == pytest.approx(brute_conjugate(phi, y), abs=1e-8)


def test_divergence_names_bracket():
    lin = YoungFunction.custom(table=[(0, 0), (1, 1)])  # slope 1 forever
    with pytest.raises(DivergenceError) as ei:
        conjugate(lin, 2.0)
    lo, hi = ei.value.bracket
    assert 0 < lo < hi
    assert "bracket" in str(ei.value)


def test_power_one_conjugate_is_indicator():
    phi = YoungFunction.power(1.0)
    assert conjugate(phi, 0.5) == 0.0
    assert conjugate(phi, 1.0) == 0.0
    assert conjugate(phi, 1.5) == math.inf


def test_young_gap_examples():
    assert young_gap(P2, 0, 0) == 0.0
    assert young_gap(P2, 1, 1, NUMERIC) == pytest.approx(0.0, abs=1e-6)
    assert young_gap(P2, 1, 2, NUMERIC) == pytest.approx(0.5, abs=1e-6)


@pytest.mark.parametrize("phi", [YoungFunction.power(1.5), P2, YoungFunction.power(3.0),
                                 YoungFunction.power_log(2.0)], ids=str)
@given(x=st.floats(-20, 20), y=st.floats(-20, 20))
def test_fenchel_young_inequality(phi, x, y):
    assert young_gap(phi, x, y) >= -1e-8


def test_inverse_examples():
    assert inverse(P2, 2.0) == pytest.approx(2.0, abs=1e-9)
    assert inverse(P2, 0.5) == pytest.approx(1.0, abs=1e-9)
    assert inverse(P2, 0.0) == 0.0
    with pytest.raises(DomainError):
        inverse(P2, -1.0)


@given(t=st.floats(0, 100))
def test_inverse_of_evaluate(t):
    for phi in (P2, YoungFunction.power_log(2.0)):
        assert inverse(phi, evaluate(phi, t)) == pytest.approx(t, abs=1e-9, rel=1e-12)


def test_delta2_examples():
    r = delta2_probe(P2)
    assert r.passed and r.constant == pytest.approx(4.0, rel=1e-12)
    assert not delta2_probe(YoungFunction.custom(lambda t: math.exp(abs(t)) - 1)).passed
    pl = delta2_probe(YoungFunction.power_log(2.0))
    assert pl.passed and math.isfinite(pl.constant)


def test_delta2_rejects_zero_on_grid():
    with pytest.raises(DomainError):
        delta2_probe(P2, [0.0, 1.0])


def test_power_log_envelope_constants():
    phi = YoungFunction.power_log(2.0)
    alpha, t1, slope, phi_t1 = phi.prm
    assert t1 == pytest.approx(BRIDGE_T1, abs=1e-9)
    assert slope == pytest.approx(BRIDGE_SLOPE, abs=1e-9)
    assert phi_t1 == pytest.approx(BRIDGE_PHI, abs=1e-9)
    assert phi(0.7) == pytest.approx(BRIDGE_PHI + BRIDGE_SLOPE * (0.7 - BRIDGE_T1), abs=1e-9)


def test_power_log_literal_formula_is_not_convex_below_threshold():
    raw = YoungFunction.power_log(2.0, envelope=False)
    hull = YoungFunction.power_log(2.0)
    ts = np.linspace(0.05, 1.5, 59)
    assert not check_axioms(raw, ts, tol=1e-12)["midpoint_convex"]
    assert check_axioms(hull, ts, tol=1e-12)["midpoint_convex"]
    # at and above the threshold the formula is convex already, no bridge
    assert YoungFunction.power_log(3.0).prm[1] == 0.0
    assert POWER_LOG_CONVEX_ALPHA == pytest.approx((3 + math.sqrt(5)) / 2)


@pytest.mark.parametrize("phi", [YoungFunction.power(1.5), P2, YoungFunction.power(4.0),
                                 YoungFunction.power_log(2.0), YoungFunction.power_log(3.0)], ids=str)
def test_axioms_and_growth(phi):
    ax = check_axioms(phi, np.linspace(-6, 6, 49), tol=1e-12)
    assert ax["zero"] and ax["positive"] and ax["even"] and ax["midpoint_convex"]
    assert phi(1e6) > 1e6


@pytest.mark.parametrize("phi", [YoungFunction.power(1.5), P2, YoungFunction.power(3.0),
                                 YoungFunction.power_log(2.0)], ids=str)
def test_conjugate_involution(phi):
    psi = complementary(phi)
    for t in np.linspace(0, 10, 11):
        assert conjugate(psi, t) == pytest.approx(phi(t), abs=1e-4)


def test_conjugate_table_shape():
    tab = conjugate_table(YoungFunction.power_log(2.0), np.linspace(0, 8, 33))
    v = tab.values
    assert np.all(v >= 0) and np.all(np.diff(v) >= -1e-12)
    assert np.all(v[:-2] - 2 * v[1:-1] + v[2:] >= -1e-9)


def test_serialization_round_trip():
    for spec in ({"family": "power", "p": 2.0}, {"family": "power_log", "alpha": 2.0},
                 {"family": "custom", "table": [[0, 0], [1, 1], [2, 4]]}):
        phi = YoungFunction.from_dict(spec)
        again = YoungFunction.from_dict(phi.to_dict())
        assert again.to_dict() == phi.to_dict()
        assert again(1.7) == phi(1.7)
    with pytest.raises(DomainError):
        YoungFunction.from_dict({"family": "gaussian"})
