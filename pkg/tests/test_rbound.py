import itertools
import json
import math

import numpy as np
import pytest

from rbound_lab.errors import DegenerateInput, DimensionError, InvalidParameter, UnsupportedDual
from rbound_lab.rademacher import NormedSpace, RandomConfig
from rbound_lab.rbound import (
    Assignment,
    OperatorFamily,
    adjoint_family,
    hilbert_cap,
    operator_norm,
    rbound_lower,
    rbound_ratio,
    uniform_norm_lower,
)


def l2(d):
    return NormedSpace(d)


def brute_ratio(mats, idx, X, p_dom, p_cod):
    """Enumerate every sign pattern directly."""
    def nrm(v, p):
        return np.abs(v).max() if math.isinf(p) else np.sum(np.abs(v) ** p) ** (1 / p)

    num = den = 0.0
    signs = list(itertools.product((-1.0, 1.0), repeat=len(idx)))
    for s in signs:
        num += nrm(sum(si * mats[k] @ x for si, k, x in zip(s, idx, X)), p_cod) ** 2
        den += nrm(sum(si * x for si, x in zip(s, X)), p_dom) ** 2
    return math.sqrt(num / den)


def functional_family(t, q):
    """Row functionals t(i) e_i^* from l^q_d to the scalars."""
    d = len(t)
    mats = np.zeros((d, 1, d))
    for i, ti in enumerate(t):
        mats[i, 0, i] = ti
    return OperatorFamily(NormedSpace(d, q), NormedSpace(1), mats)


class TestRatioExamples:
    def test_identity(self):
        fam = OperatorFamily(l2(2), l2(2), [np.eye(2)])
        a = Assignment((0, 0, 0), np.random.default_rng(0).normal(size=(3, 2)))
        assert rbound_ratio(fam, a) == pytest.approx(1.0, rel=1e-12)

    def test_scalar(self):
        fam = OperatorFamily(l2(2), l2(2), [2 * np.eye(2)])
        a = Assignment((0, 0), [[1, 2], [0, -1]])
        assert rbound_ratio(fam, a) == pytest.approx(2.0, rel=1e-12)

    def test_functional_family(self):
        t, alpha, q = np.array([1.0, 0.5, 0.25]), np.array([0.3, 1.0, 2.0]), 4.0
        fam = functional_family(t, q)
        a = Assignment((0, 1, 2), np.diag(alpha))
        expected = np.linalg.norm(t * alpha) / np.sum(alpha**q) ** (1 / q)
        assert rbound_ratio(fam, a) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("p_dom,p_cod", [(2.0, 2.0), (1.0, 3.0), (math.inf, 1.5), (3.0, math.inf)])
    def test_matches_brute_force(self, p_dom, p_cod):
        rng = np.random.default_rng(3)
        mats = rng.normal(size=(3, 2, 3))
        fam = OperatorFamily(NormedSpace(3, p_dom), NormedSpace(2, p_cod), mats)
        idx, X = (0, 2, 1, 2, 0), rng.normal(size=(5, 3))
        assert rbound_ratio(fam, Assignment(idx, X)) == pytest.approx(brute_ratio(mats, idx, X, p_dom, p_cod), rel=1e-12)

    def test_scaling_equivariance(self):
        rng = np.random.default_rng(5)
        fam = OperatorFamily(NormedSpace(3, 1.5), NormedSpace(2, 4.0), rng.normal(size=(2, 2, 3)))
        a = Assignment((0, 1, 1), rng.normal(size=(3, 3)))
        base = rbound_ratio(fam, a)
        for c in (-3.0, 0.25, 7.0):
            assert rbound_ratio(fam.scaled(c), a) == pytest.approx(abs(c) * base, rel=1e-12)


class TestLowerExamples:
    def test_identity_and_double(self):
        fam = OperatorFamily(l2(2), l2(2), [np.eye(2), 2 * np.eye(2)])
        est = rbound_lower(fam, 4, RandomConfig(0))
        assert est.lower_bound >= 2 - 1e-9
        assert est.lower_bound <= est.hilbert_cap + 1e-9

    def test_zero_family(self):
        fam = OperatorFamily(l2(2), l2(2), [np.zeros((2, 2))])
        assert rbound_lower(fam, 3, RandomConfig(0)).lower_bound == 0

    @pytest.mark.parametrize("strategy", ["random", "coordinate_ascent", "exhaustive_small"])
    def test_witness_invariant(self, strategy):
        rng = np.random.default_rng(1)
        fam = OperatorFamily(NormedSpace(2, 1.0), NormedSpace(2, 3.0), rng.normal(size=(2, 2, 2)))
        est = rbound_lower(fam, 3, RandomConfig(4), strategy, iterations=10, restarts=2)
        assert est.lower_bound == pytest.approx(rbound_ratio(fam, est.witness), rel=1e-12)
        # never below the best single operator probe
        assert est.lower_bound >= 0.99 * uniform_norm_lower(fam, RandomConfig(4))
        json.dumps(est.to_dict())

    def test_diagonal_functionals_below_tv(self):
        q = 4.0
        v = 1 / (0.5 - 1 / q)
        t = 0.5 ** np.arange(4)
        fam = functional_family(t, q)
        cap = np.sum(t**v) ** (1 / v)
        est = rbound_lower(fam, 4, RandomConfig(2), "coordinate_ascent", iterations=60)
        assert est.lower_bound <= cap + 1e-9
        # the Holder extremal alpha attains the cap
        alpha = t ** (v / q)
        a = Assignment(tuple(range(4)), np.diag(alpha))
        assert rbound_ratio(fam, a) == pytest.approx(cap, rel=1e-12)
        assert est.lower_bound >= 0.95 * cap

    def test_monotone_in_budget(self):
        rng = np.random.default_rng(9)
        fam = OperatorFamily(NormedSpace(2, 1.0), NormedSpace(2, 4.0), rng.normal(size=(3, 2, 2)))
        for strategy in ("random", "coordinate_ascent"):
            vals = [rbound_lower(fam, 3, RandomConfig(7), strategy, iterations=b).lower_bound for b in (5, 10, 20, 40)]
            assert all(b >= a - 1e-15 for a, b in zip(vals, vals[1:]))

    def test_deterministic(self):
        rng = np.random.default_rng(9)
        fam = OperatorFamily(NormedSpace(2, 1.0), NormedSpace(2, 4.0), rng.normal(size=(3, 2, 2)))
        a = rbound_lower(fam, 3, RandomConfig(7), "random", iterations=20, restarts=3)
        b = rbound_lower(fam, 3, RandomConfig(7), "random", iterations=20, restarts=3)
        assert a.lower_bound == b.lower_bound and a.witness == b.witness


def test_hilbert_soundness_exhaustive():
    rng = np.random.default_rng(0)
    for _ in range(20):
        mats = rng.normal(size=(2, 3, 3))
        fam = OperatorFamily(l2(3), l2(3), mats)
        cap = hilbert_cap(fam)
        assert cap == pytest.approx(max(np.linalg.norm(m, 2) for m in mats), rel=1e-12)
        for N in (1, 3, 6):
            idx = tuple(rng.integers(0, 2, N))
            a = Assignment(idx, rng.normal(size=(N, 3)))
            assert rbound_ratio(fam, a) <= cap + 1e-9


@pytest.mark.parametrize("d", [2, 3])
def test_singleton_consistency(d):
    rng = np.random.default_rng(d)
    for _ in range(3):
        fam = OperatorFamily(l2(d), l2(d), [rng.normal(size=(d, d))])
        est = rbound_lower(fam, 2, RandomConfig(0), iterations=20)
        ref = uniform_norm_lower(fam, RandomConfig(0))
        assert est.lower_bound == pytest.approx(ref, rel=0.01)
        assert ref == pytest.approx(np.linalg.norm(fam.matrices[0], 2), rel=1e-9)


class TestUniformNorm:
    def test_scalar(self):
        assert uniform_norm_lower(OperatorFamily(l2(2), l2(2), [2 * np.eye(2)])) == pytest.approx(2.0)

    def test_diag(self):
        assert uniform_norm_lower(OperatorFamily(l2(2), l2(2), [np.diag([3.0, 1.0])])) == pytest.approx(3.0)

    def test_nilpotent(self):
        assert uniform_norm_lower(OperatorFamily(l2(2), l2(2), [[[0.0, 1.0], [0.0, 0.0]]])) == pytest.approx(1.0)

    def test_search_below_closed_form(self):
        rng = np.random.default_rng(2)
        A = rng.normal(size=(3, 3))
        X, Y = NormedSpace(3, 3.0), NormedSpace(3, 1.5)
        fam = OperatorFamily(X, Y, [A])
        est = uniform_norm_lower(fam)
        # brute-force grid on the unit sphere of l^3
        g = rng.normal(size=(200_000, 3))
        g /= np.sum(np.abs(g) ** 3, axis=1, keepdims=True) ** (1 / 3)
        brute = np.max(np.sum(np.abs(g @ A.T) ** 1.5, axis=1) ** (1 / 1.5))
        assert est >= brute * (1 - 1e-3)
        val, exact = operator_norm(A, X, Y)
        assert not exact and val == pytest.approx(est, rel=1e-3)


class TestAdjoint:
    def test_identity(self):
        adj = adjoint_family(OperatorFamily(l2(2), l2(2), [np.eye(2)]))
        assert adj.domain.exponent == 2 and np.array_equal(adj.matrices[0], np.eye(2))

    def test_transpose_and_exponents(self):
        A = np.array([[1.0, 2.0], [0.0, 1.0]])
        adj = adjoint_family(OperatorFamily(NormedSpace(2, 3.0), l2(2), [A]))
        assert adj.domain.exponent == pytest.approx(2.0)
        assert adj.codomain.exponent == pytest.approx(1.5)
        assert np.array_equal(adj.matrices[0], A.T)

    def test_diagonal_witness_transfer(self):
        D = [np.diag([1.0, 2.0, 0.5]), np.diag([0.3, 1.0, 1.5])]
        fam = OperatorFamily(l2(3), l2(3), D)
        adj = adjoint_family(fam)
        perm = [2, 0, 1]
        a = Assignment((0, 1), [[1.0, 0.2, -0.4], [0.0, 1.0, 2.0]])
        a_perm = Assignment((0, 1), a.vectors[:, perm])
        fam_perm = OperatorFamily(l2(3), l2(3), [m[np.ix_(perm, perm)] for m in adj.matrices])
        assert rbound_ratio(fam_perm, a_perm) == pytest.approx(rbound_ratio(fam, a), rel=1e-12)

    @pytest.mark.parametrize("p", [1.0, math.inf])
    def test_endpoint_rejected(self, p):
        with pytest.raises(UnsupportedDual):
            adjoint_family(OperatorFamily(NormedSpace(2, p), l2(2), [np.eye(2)]))


def test_errors():
    fam = OperatorFamily(l2(2), l2(2), [np.eye(2)])
    with pytest.raises(DegenerateInput):
        Assignment((0,), [[0.0, 0.0]])
    with pytest.raises(InvalidParameter):
        rbound_ratio(fam, Assignment((1,), [[1.0, 0.0]]))
    with pytest.raises(DimensionError):
        OperatorFamily(l2(2), l2(3), [np.eye(2)])
    with pytest.raises(InvalidParameter):
        rbound_lower(fam, 0)
    with pytest.raises(InvalidParameter):
        rbound_lower(fam, 2, strategy="annealing")


def test_family_json_roundtrip():
    fam = OperatorFamily(NormedSpace(2, math.inf), NormedSpace(2, 3.0), [[[1.0, 2.0], [0.0, -1.0]]])
    back = OperatorFamily.from_dict(json.loads(json.dumps(fam.to_dict())))
    assert back.domain.exponent == math.inf and back.codomain.exponent == 3.0
    assert np.array_equal(back.matrices, fam.matrices)
