import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dyncubes.cubes import (
    DIAG,
    CubeConfiguration,
    CubeGroupElement,
    apply_cube_element,
    apply_exponents,
    apply_word,
    conjugate_element,
    cube_bits,
    diagonal_config,
    euclidean_index_map,
    euclidean_permutation,
    face_pattern,
    project_star,
    reduce_word,
    vertex_label,
    word_exponents,
)
from dyncubes.sampler import generate
from dyncubes.systems import Convention, SymbolicPoint, SystemError_, SystemSpec

ALPHA = 0.618034
ROT = SystemSpec.rotation(ALPHA)
SKEW = SystemSpec.skew(2)


def test_vertex_order():
    assert [vertex_label(i, 2) for i in range(4)] == ["00", "10", "01", "11"]
    assert cube_bits(2).tolist() == [[0, 0], [1, 0], [0, 1], [1, 1]]


def test_diagonal_examples():
    c = diagonal_config([0.3], 2)
    assert c.entries.ravel().tolist() == [0.3] * 4
    c = diagonal_config([0.1, 0.2], 1)
    assert c.entries.tolist() == [[0.1, 0.2], [0.1, 0.2]]
    assert len(diagonal_config([0.5], 3)) == 8
    p = SymbolicPoint(0.0, Convention.LEFT_CLOSED)
    assert diagonal_config(p, 2).entries == (p,) * 4


def test_project_star():
    c = CubeConfiguration.from_points(2, [[0.1], [0.2], [0.3], [0.4]])
    assert np.array(project_star(c)).ravel().tolist() == [0.2, 0.3, 0.4]
    assert len(project_star(diagonal_config([0.7], 3))) == 7
    assert all(np.array_equal(p, [0.7]) for p in project_star(diagonal_config([0.7], 2)))


def test_apply_cube_element_examples():
    c = diagonal_config([0.0], 2)
    out = apply_cube_element(ROT, CubeGroupElement(0, (1, 2)), c)
    assert out.entries.ravel() == pytest.approx([0.0, 0.618034, 0.236068, 0.854102], abs=1e-6)
    assert apply_cube_element(ROT, CubeGroupElement.identity(2), c) == c
    out = apply_cube_element(ROT, CubeGroupElement(1, (0, 0)), c)
    assert out.entries.ravel() == pytest.approx([0.618034] * 4, abs=1e-6)


def test_group_element_dimension_checked():
    with pytest.raises(SystemError_):
        apply_cube_element(ROT, CubeGroupElement(0, (1,)), diagonal_config([0.0], 2))


def test_reduce_word_examples():
    assert reduce_word([(1, 1), (2, 1), (1, 1)], 2) == CubeGroupElement(0, (2, 1))
    assert reduce_word([], 3) == CubeGroupElement(0, (0, 0, 0))
    assert reduce_word([(DIAG, 2)], 3) == CubeGroupElement(2, (0, 0, 0))


def test_word_validation():
    with pytest.raises(SystemError_):
        reduce_word([(1, 0)], 2)
    with pytest.raises(SystemError_):
        reduce_word([(3, 1)], 2)


def test_face_pattern_matches_closed_form():
    # T_j^[d] moves exactly the vertices with eps_j = 1
    for d in (1, 2, 3, 4):
        bits = cube_bits(d)
        for j in range(1, d + 1):
            assert face_pattern(j, d).tolist() == bits[:, j - 1].tolist()


def test_face_elements():
    assert CubeGroupElement(0, (3, -1)).is_face
    assert not CubeGroupElement(1, (0, 0)).is_face
    assert CubeGroupElement(0, (3, -1)).exponents()[0] == 0


words = st.integers(1, 3).flatmap(lambda d: st.tuples(
    st.just(d),
    st.lists(st.tuples(st.sampled_from([DIAG] + list(range(1, d + 1))),
                       st.integers(-20, 20).filter(lambda e: e != 0)), max_size=20)))


@settings(max_examples=150, deadline=None)
@given(words, st.floats(0, 1, exclude_max=True), st.floats(0, 1, exclude_max=True))
def test_reduce_word_equivalence(dw, x, y):
    d, word = dw
    g = reduce_word(word, d)
    assert np.array_equal(word_exponents(word, d), g.exponents())
    c = diagonal_config([x, y], d)
    step_by_step = apply_word(SKEW, word, c)
    once = apply_cube_element(SKEW, g, c)
    diff = np.abs(step_by_step.entries - once.entries)
    assert np.minimum(diff, 1 - diff).max() < 1e-9


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 3).flatmap(lambda d: st.tuples(
    st.just(d), st.integers(-20, 20), st.lists(st.integers(-20, 20), min_size=d, max_size=d),
    st.integers(-20, 20), st.lists(st.integers(-20, 20), min_size=d, max_size=d))))
def test_group_law(args):
    d, m1, n1, m2, n2 = args
    g1, g2 = CubeGroupElement(m1, n1), CubeGroupElement(m2, n2)
    c = generate(SKEW, np.array([0.2, 0.9]), (1,) * d)
    lhs = apply_cube_element(SKEW, g1, apply_cube_element(SKEW, g2, c))
    rhs = apply_cube_element(SKEW, g1 + g2, c)
    diff = np.abs(lhs.entries - rhs.entries)
    assert np.minimum(diff, 1 - diff).max() < 1e-9
    assert (g1 + (-g1)) == CubeGroupElement.identity(d)


def test_euclidean_examples():
    c = CubeConfiguration.from_points(1, [[0.1], [0.2]])
    assert euclidean_permutation(c, (1,)).entries.ravel().tolist() == [0.2, 0.1]
    c2 = CubeConfiguration.from_points(2, [[0.1], [0.2], [0.3], [0.4]])
    assert euclidean_permutation(c2, (0, 0)) == c2
    for eps0 in itertools.product((0, 1), repeat=2):
        assert euclidean_permutation(euclidean_permutation(c2, eps0), eps0) == c2


def test_euclidean_index_map_is_reflection():
    for d in (1, 2, 3):
        bits = cube_bits(d)
        for eps0 in itertools.product((0, 1), repeat=d):
            phi = euclidean_index_map(eps0, d)
            want = [int(((b + np.array(eps0)) % 2) @ (1 << np.arange(d))) for b in bits]
            assert phi.tolist() == want


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 3).flatmap(lambda d: st.tuples(
    st.just(d), st.integers(-20, 20), st.lists(st.integers(-20, 20), min_size=d, max_size=d),
    st.integers(0, (1 << d) - 1))))
def test_conjugation_identity_exact(args):
    # on integer exponents: permuting the generated exponent vector equals
    # the exponent vector of the conjugated element
    d, m, n, mask = args
    g = CubeGroupElement(m, n)
    perm = g.exponents()[euclidean_index_map(mask, d)]
    assert np.array_equal(perm, conjugate_element(g, mask).exponents())


def test_conjugation_on_points_sturmian():
    sys = SystemSpec.sturmian()
    base = SymbolicPoint(0.0, Convention.RIGHT_CLOSED, 4)
    g = CubeGroupElement(2, (3, -5))
    c = apply_cube_element(sys, g, diagonal_config(base, 2))
    for mask in range(4):
        lhs = euclidean_permutation(c, mask)
        rhs = apply_cube_element(sys, conjugate_element(g, mask), diagonal_config(base, 2))
        assert lhs == rhs


def test_apply_exponents_length_checked():
    with pytest.raises(SystemError_):
        apply_exponents(ROT, [1, 2], diagonal_config([0.0], 2))


def test_configuration_round_trip():
    c = generate(SKEW, np.array([0.2, 0.4]), (2, -1))
    assert CubeConfiguration.from_list(2, c.to_list()) == c
    s = apply_cube_element(SystemSpec.sturmian(), CubeGroupElement(0, (1, 2)),
                           diagonal_config(SymbolicPoint(0.0, Convention.LEFT_CLOSED), 2))
    assert CubeConfiguration.from_list(2, s.to_list()) == s
    assert s[(1, 1)].steps == 3
