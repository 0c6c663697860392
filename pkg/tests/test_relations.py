import numpy as np
import pytest

from dyncubes.relations import (
    RPQuery,
    RPWitness,
    proximal_distance,
    rp_distance,
    rp_verdict,
    rp_witness,
)
from dyncubes.sampler import SamplingBudget as B
from dyncubes.systems import SystemError_, SystemSpec, boundary_pair

ROT = SystemSpec.rotation()
SKEW = SystemSpec.skew(2)
STURM = SystemSpec.sturmian()


def test_proximal_distance_examples():
    for N in (1, 10, 200):
        assert proximal_distance(ROT, [0.0], [0.3], N) == pytest.approx(0.3)
    x1, x2 = boundary_pair()
    assert proximal_distance(STURM, x1, x2, 100, window=50) <= 2.0**-48
    assert proximal_distance(SKEW, [0.2, 0.4], [0.2, 0.4], 5) == 0.0
    with pytest.raises(SystemError_):
        proximal_distance(ROT, [0.0], [0.3], 0)


def test_skew_fiber_pair_is_distal():
    # (x, y) and (x, y + 1/2) keep their second-coordinate gap forever
    assert proximal_distance(SKEW, [0.0, 0.0], [0.0, 0.5], 300) == pytest.approx(0.5)


def test_rp_distance_diagonal_is_zero():
    q = RPQuery(SKEW, [0.3, 0.7], [0.3, 0.7], 1, [B(5, 2), B(10, 4), B(20, 8)])
    prof = rp_distance(q)
    assert prof.distances == [0.0, 0.0, 0.0]
    assert rp_verdict(prof, 0.05)["verdict"] == "in"


def test_rp_rotation_lower_bound_and_symmetry():
    sched = [B(20, 10), B(40, 20), B(80, 40)]
    a = rp_distance(RPQuery(ROT, [0.0], [0.3], 1, sched))
    b = rp_distance(RPQuery(ROT, [0.3], [0.0], 1, sched))
    assert min(a.distances) >= 0.075 and a.is_monotone()
    assert 0.5 <= a.final / b.final <= 2.0


def test_rp_monotone_in_d():
    sched = [B(10, 10), B(20, 20), B(40, 40)]
    d1 = rp_distance(RPQuery(ROT, [0.0], [0.3], 1, sched)).final
    d2 = rp_distance(RPQuery(ROT, [0.0], [0.3], 2, sched)).final
    assert d1 >= d2 / 4


def test_rp_query_validation():
    with pytest.raises(SystemError_):
        RPQuery(ROT, [0.0], [0.3], 0, [B(1)])


def test_witness_diagonal():
    w = rp_witness(SKEW, np.array([0.1, 0.2]), np.array([0.1, 0.2]), 2, 0.01, B(10))
    assert w.n == (0, 0)
    assert np.array_equal(w.x_prime, [0.1, 0.2]) and np.array_equal(w.y_prime, [0.1, 0.2])
    assert w.verify(SKEW, [0.1, 0.2], [0.1, 0.2])


def test_witness_skew_fiber_pair():
    x, y = np.array([0.0, 0.0]), np.array([0.0, 0.5])
    w = rp_witness(SKEW, x, y, 1, 0.1, B(300))
    assert w is not None and abs(w.n[0]) <= 300
    assert w.verify(SKEW, x, y)


def test_no_witness_for_rotation_pair():
    assert rp_witness(ROT, np.array([0.0]), np.array([0.3]), 2, 0.01, B(300)) is None


def test_witness_sturmian_boundary_pair():
    x1, x2 = boundary_pair()
    w = rp_witness(STURM, x1, x2, 1, 0.01, B(20), window=10)
    assert w is not None and w.verify(STURM, x1, x2, window=10)


def test_witness_verify_rejects_tampering():
    x, y = np.array([0.0, 0.0]), np.array([0.0, 0.5])
    w = rp_witness(SKEW, x, y, 1, 0.1, B(300))
    bad = RPWitness(w.x_prime, w.y_prime, w.n, 0.01)
    assert not bad.verify(SKEW, x, y)
    d = w.to_dict()
    assert d["n"] == list(w.n) and d["delta"] == 0.1
