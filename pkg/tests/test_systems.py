import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dyncubes.systems import (
    GOLDEN,
    Convention,
    FactorMapSpec,
    Kind,
    SymbolicPoint,
    SystemError_,
    SystemSpec,
    apply_factor,
    apply_power,
    boundary_pair,
    check_irrational,
    orbit_table,
    point_distance,
    step,
    step_back,
    sturmian_codes,
    sturmian_symbol,
    symbolic_distance,
    torus_distance,
)

ALPHA = 0.618034
SYSTEMS = [SystemSpec.rotation(), SystemSpec.skew(2), SystemSpec.skew(3)]


def wrap(a, b):
    d = np.abs(np.asarray(a) - np.asarray(b)) % 1.0
    return float(np.minimum(d, 1 - d).max())


# ---------------------------------------------------------------- torus metric

def test_torus_distance_examples():
    assert torus_distance([0.1], [0.9]) == pytest.approx(0.2)
    assert torus_distance([0.25, 0.0], [0.75, 0.0]) == pytest.approx(0.5)
    assert torus_distance([0.3, 0.4], [0.3, 0.4]) == 0.0


def test_torus_distance_dimension_mismatch():
    with pytest.raises(SystemError_):
        torus_distance([0.1], [0.1, 0.2])


def test_torus_metric_axioms_random():
    rng = np.random.default_rng(0)
    for s in (1, 2, 3):
        pts = rng.random((10**4, 3, s))
        for a, b, c in pts[:2000]:
            ab, bc, ac = torus_distance(a, b), torus_distance(b, c), torus_distance(a, c)
            assert ab == pytest.approx(torus_distance(b, a), abs=1e-12)
            assert ac <= ab + bc + 1e-12
            assert torus_distance(a, a) == 0.0


unit = st.floats(0.0, 1.0, exclude_max=True, allow_nan=False)


@given(st.lists(unit, min_size=2, max_size=2), st.lists(unit, min_size=2, max_size=2),
       st.lists(unit, min_size=2, max_size=2))
def test_torus_triangle_inequality(a, b, c):
    assert torus_distance(a, c) <= torus_distance(a, b) + torus_distance(b, c) + 1e-12
    assert torus_distance(a, b) <= 0.5


# ---------------------------------------------------------------- dynamics

def test_apply_power_examples():
    rot = SystemSpec.rotation(ALPHA)
    assert apply_power(rot, [0.1], 3)[0] == pytest.approx(0.954102, abs=1e-6)
    sk = SystemSpec.skew(2, ALPHA)
    out = apply_power(sk, [0.0, 0.0], 2)
    assert out == pytest.approx([0.236068, 0.618034], abs=1e-6)
    for sys in SYSTEMS:
        x = np.linspace(0.1, 0.7, sys.dim)
        assert np.array_equal(apply_power(sys, x, 0), x)


def test_apply_power_matches_iteration():
    rng = np.random.default_rng(1)
    for sys in SYSTEMS:
        for _ in range(20):
            x = rng.random(sys.dim)
            fwd, back = x.copy(), x.copy()
            for k in range(1, 301):
                fwd = step(sys, fwd)
                back = step_back(sys, back)
                if k % 50 == 0:
                    assert wrap(apply_power(sys, x, k), fwd) < 1e-9
                    assert wrap(apply_power(sys, x, -k), back) < 1e-9


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(SYSTEMS), st.lists(unit, min_size=3, max_size=3),
       st.integers(-1000, 1000), st.integers(-1000, 1000))
def test_apply_power_composition(sys, coords, a, b):
    x = np.array(coords[: sys.dim])
    lhs = apply_power(sys, apply_power(sys, x, a), b)
    assert wrap(lhs, apply_power(sys, x, a + b)) < 1e-9


def test_apply_power_large_exponent_is_exact():
    # 0.1 + 10^8 * alpha, computed with rational arithmetic as the oracle
    from fractions import Fraction
    rot = SystemSpec.rotation()
    k = 10**8
    want = float((Fraction(0.1) + k * Fraction(rot.alpha)) % 1)
    assert apply_power(rot, [0.1], k)[0] == pytest.approx(want, abs=1e-12)


def test_orbit_table_matches_apply_power():
    sys = SystemSpec.skew(3)
    x = np.array([0.3, 0.1, 0.8])
    tab = orbit_table(sys.alpha, x, -40, 40)
    for k in (-40, -7, 0, 5, 40):
        assert wrap(tab[k + 40], apply_power(sys, x, k)) < 1e-9
    assert tab.min() >= 0.0 and tab.max() < 1.0


def test_outputs_in_unit_interval():
    rng = np.random.default_rng(2)
    for sys in SYSTEMS:
        for _ in range(50):
            y = apply_power(sys, rng.random(sys.dim), int(rng.integers(-10**6, 10**6)))
            assert np.all((0.0 <= y) & (y < 1.0))


# ---------------------------------------------------------------- validation

def test_irrationality_guard():
    check_irrational(GOLDEN)
    for bad in (0.5, 1 / 3, 0.25 + 1e-9, 17 / 97):
        with pytest.raises(SystemError_):
            check_irrational(bad)
    with pytest.raises(SystemError_):
        SystemSpec.rotation(0.5)


def test_system_shapes():
    with pytest.raises(SystemError_):
        SystemSpec(Kind.ROTATION, GOLDEN, 2)
    with pytest.raises(SystemError_):
        SystemSpec.skew(0)
    assert SystemSpec.skew(3).nil_order == 3
    assert SystemSpec.sturmian().nil_order is None


# ---------------------------------------------------------------- Sturmian

def test_sturmian_symbol_examples():
    L = SymbolicPoint(0.0, Convention.LEFT_CLOSED)
    R = SymbolicPoint(0.0, Convention.RIGHT_CLOSED)
    assert sturmian_symbol(L, 0, ALPHA) == 0
    assert sturmian_symbol(R, 0, ALPHA) == 1
    assert sturmian_symbol(L, 1, ALPHA) == sturmian_symbol(R, 1, ALPHA) == 1


def test_sturmian_codes_match_symbols():
    p = SymbolicPoint(0.0, Convention.RIGHT_CLOSED, 3)
    codes = sturmian_codes(p, GOLDEN, -50, 50)
    assert [int(c) for c in codes] == [sturmian_symbol(p, n, GOLDEN) for n in range(-50, 51)]


def test_sturmian_codes_against_direct_evaluation():
    # oracle: symbol of z = frac(base + n alpha) is 1 iff z lies in [1 - alpha, 1)
    rng = np.random.default_rng(3)
    for base in rng.random(20):
        p = SymbolicPoint(float(base), Convention.LEFT_CLOSED)
        n = np.arange(-100, 101)
        z = (base + n * GOLDEN) % 1.0
        assert np.array_equal(sturmian_codes(p, GOLDEN, -100, 100), (z >= 1 - GOLDEN).astype(np.int8))


def test_conventions_agree_off_critical_orbit():
    rng = np.random.default_rng(4)
    n = np.arange(-200, 201)
    hits = 0
    for base in rng.random(300):
        z = (base + n * GOLDEN) % 1.0
        if np.min(np.minimum(np.abs(z), np.abs(z - (1 - GOLDEN)))) < 1e-6:
            continue
        hits += 1
        a = sturmian_codes(SymbolicPoint(float(base), Convention.LEFT_CLOSED), GOLDEN, -200, 200)
        b = sturmian_codes(SymbolicPoint(float(base), Convention.RIGHT_CLOSED), GOLDEN, -200, 200)
        assert np.array_equal(a, b)
    assert hits > 200


def test_symbolic_distance_examples():
    x1, x2 = boundary_pair()
    assert symbolic_distance(x1, x2, 30, GOLDEN) == 1.0
    assert symbolic_distance(x1, x1, 30, GOLDEN) == 0.0
    # shift the pair so the disagreement at -1, 0 lands at |n| = 3
    a = SymbolicPoint(0.0, Convention.LEFT_CLOSED, 3)
    b = SymbolicPoint(0.0, Convention.RIGHT_CLOSED, 3)
    assert symbolic_distance(a, b, 30, GOLDEN) == 0.125


def test_symbolic_distance_window_floor():
    a = SymbolicPoint(0.0, Convention.LEFT_CLOSED, 40)
    b = SymbolicPoint(0.0, Convention.RIGHT_CLOSED, 40)
    assert symbolic_distance(a, b, 30, GOLDEN) == 0.0
    assert symbolic_distance(a, b, 45, GOLDEN) == 2.0**-40


@settings(max_examples=60, deadline=None)
@given(st.integers(-20, 20), st.integers(-20, 20), st.integers(-20, 20),
       st.sampled_from(list(Convention)), st.sampled_from(list(Convention)), st.sampled_from(list(Convention)))
def test_symbolic_ultrametric(i, j, k, ci, cj, ck):
    a, b, c = (SymbolicPoint(0.0, cv, s) for cv, s in ((ci, i), (cj, j), (ck, k)))
    ab = symbolic_distance(a, b, 30, GOLDEN)
    assert ab == symbolic_distance(b, a, 30, GOLDEN)
    assert symbolic_distance(a, c, 30, GOLDEN) <= max(ab, symbolic_distance(b, c, 30, GOLDEN))


def test_sturmian_power_shifts():
    sys = SystemSpec.sturmian()
    p = SymbolicPoint(0.0, Convention.LEFT_CLOSED, 2)
    q = apply_power(sys, p, 5)
    assert q.steps == 7 and q.convention is Convention.LEFT_CLOSED
    assert sturmian_symbol(q, 0, GOLDEN) == sturmian_symbol(p, 5, GOLDEN)


# ---------------------------------------------------------------- factors

def test_factor_examples():
    sk = SystemSpec.skew(2)
    f = FactorMapSpec.truncate(sk, 1)
    assert apply_factor(f, [0.2, 0.7]) == pytest.approx([0.2])
    assert f.target.kind is Kind.ROTATION
    st_sys = SystemSpec.sturmian()
    g = FactorMapSpec.sturmian_to_rotation(st_sys)
    assert apply_factor(g, SymbolicPoint(0.3, Convention.LEFT_CLOSED))[0] == pytest.approx(0.3)
    lhs = apply_factor(f, step(sk, [0.2, 0.7]))
    rhs = step(f.target, apply_factor(f, [0.2, 0.7]))
    assert lhs == pytest.approx(rhs) and lhs[0] == pytest.approx(0.2 + sk.alpha)


def test_factor_equivariance_random():
    rng = np.random.default_rng(5)
    maps = [FactorMapSpec.identity(SystemSpec.skew(2)), FactorMapSpec.truncate(SystemSpec.skew(3), 2),
            FactorMapSpec.truncate(SystemSpec.skew(3), 1)]
    for f in maps:
        for _ in range(1000):
            x = rng.random(f.source.dim)
            assert wrap(apply_factor(f, step(f.source, x)), step(f.target, apply_factor(f, x))) < 1e-9
    g = FactorMapSpec.sturmian_to_rotation(SystemSpec.sturmian())
    for base in rng.random(200):
        p = SymbolicPoint(float(base), Convention.LEFT_CLOSED)
        lhs = apply_factor(g, step(g.source, p))
        assert wrap(lhs, step(g.target, apply_factor(g, p))) < 1e-9


def test_factor_validation():
    with pytest.raises(SystemError_):
        FactorMapSpec.truncate(SystemSpec.skew(2), 3)
    with pytest.raises(SystemError_):
        FactorMapSpec.sturmian_to_rotation(SystemSpec.rotation())


def test_point_distance_dispatch():
    assert point_distance(SystemSpec.rotation(), [0.1], [0.9]) == pytest.approx(0.2)
    x1, x2 = boundary_pair()
    assert point_distance(SystemSpec.sturmian(), x1, x2) == 1.0
    assert math.isclose(point_distance(SystemSpec.skew(2), [0.0, 0.0], [0.0, 0.5]), 0.5)
