import itertools
import math

import numpy as np
import pytest

from rbound_lab.errors import InvalidParameter
from rbound_lab.measure import DiscreteMeasureSpace, StepFunction
from rbound_lab.rademacher import NormedSpace, RandomConfig
from rbound_lab.typecotype import (
    converse_check,
    cotype_constant_lower,
    cotype_ratio,
    dual_lorentz_check,
    growth_fit,
    lorentz_contraction_check,
    lq_contraction_check,
    mixed_norm,
    type_constant_lower,
    type_ratio,
)


def brute_l2_avg(X, p):
    vals = [np.sum(np.abs(np.asarray(s) @ X) ** p) ** (2 / p) if not math.isinf(p) else np.abs(np.asarray(s) @ X).max() ** 2
            for s in itertools.product((-1.0, 1.0), repeat=len(X))]
    return math.sqrt(np.mean(vals))


class TestType:
    @pytest.mark.parametrize("N", [1, 3, 8, 12])
    def test_hilbert_equal_one(self, N):
        rep = type_constant_lower(NormedSpace(4), 2.0, N, RandomConfig(0), restarts=2, sweeps=5)
        assert rep.constant_lower == pytest.approx(1.0, abs=1e-9)
        assert rep.constant_lower <= 1 + 1e-9

    @pytest.mark.parametrize("N", [2, 4, 8])
    def test_l1_basis(self, N):
        rep = type_constant_lower(NormedSpace(N, 1.0), 2.0, N, RandomConfig(0), restarts=1, sweeps=2)
        assert rep.basis_ratio == pytest.approx(math.sqrt(N), rel=1e-12)
        assert rep.constant_lower >= rep.basis_ratio

    def test_l1_growth_slope(self):
        fit = growth_fit("type", 1.0, 2.0, (2, 4, 8, 16), RandomConfig(0), restarts=1, sweeps=2)
        assert fit.slope == pytest.approx(0.5, abs=0.02)
        assert fit.fails

    def test_single_vector(self):
        rep = type_constant_lower(NormedSpace(3, 1.5), 1.3, 1, RandomConfig(1), restarts=2, sweeps=3)
        assert rep.constant_lower == pytest.approx(1.0, rel=1e-12)

    def test_reproducible_from_witness(self):
        space = NormedSpace(3, 3.0)
        rep = type_constant_lower(space, 1.5, 4, RandomConfig(2), restarts=2, sweeps=5)
        assert type_ratio(space, rep.witness, 1.5, RandomConfig(2)) == pytest.approx(rep.constant_lower, rel=1e-12)
        X = rep.witness
        direct = brute_l2_avg(X, 3.0) / np.sum(np.sum(np.abs(X) ** 3, axis=1) ** (1.5 / 3)) ** (1 / 1.5)
        assert rep.constant_lower == pytest.approx(direct, rel=1e-12)

    def test_bad_exponent(self):
        with pytest.raises(InvalidParameter):
            type_constant_lower(NormedSpace(2), 2.5, 2)


class TestCotype:
    @pytest.mark.parametrize("q", [2.0, 3.0, 4.0])
    def test_own_exponent_basis(self, q):
        rep = cotype_constant_lower(NormedSpace(4, q), q, 4, RandomConfig(0), restarts=1, sweeps=2)
        assert rep.basis_ratio == pytest.approx(1.0, rel=1e-12)

    @pytest.mark.parametrize("N", [2, 3, 4])
    def test_linf_basis(self, N):
        rep = cotype_constant_lower(NormedSpace(N, math.inf), 2.0, N, RandomConfig(0), restarts=1, sweeps=2)
        assert rep.basis_ratio == pytest.approx(math.sqrt(N), rel=1e-12)

    @pytest.mark.parametrize("N", [1, 5, 12])
    def test_hilbert_equal_one(self, N):
        rep = cotype_constant_lower(NormedSpace(3), 2.0, N, RandomConfig(0), restarts=2, sweeps=5)
        assert rep.constant_lower == pytest.approx(1.0, abs=1e-9)

    def test_single_vector(self):
        rep = cotype_constant_lower(NormedSpace(3, 1.0), math.inf, 1, RandomConfig(0), restarts=1, sweeps=2)
        assert rep.constant_lower == pytest.approx(1.0, rel=1e-12)

    def test_reproducible(self):
        space = NormedSpace(2, 1.0)
        rep = cotype_constant_lower(space, 2.0, 3, RandomConfig(3), restarts=2, sweeps=4)
        assert cotype_ratio(space, rep.witness, 2.0, RandomConfig(3)) == pytest.approx(rep.constant_lower, rel=1e-12)
        again = cotype_constant_lower(space, 2.0, 3, RandomConfig(3), restarts=2, sweeps=4)
        assert again.constant_lower == rep.constant_lower

    def test_bad_exponent(self):
        with pytest.raises(InvalidParameter):
            cotype_constant_lower(NormedSpace(2), 1.5, 2)


class TestTensorProductBounds:
    @pytest.mark.parametrize("q", [2.0, 3.0, 5.0])
    def test_converse_construction(self, q):
        X = np.random.default_rng(0).normal(size=(4, 3))
        out = converse_check(X, q, space=NormedSpace(3, 1.5))
        assert out["rel_error"] <= 1e-10

    def test_mixed_norm_oracle(self):
        S = DiscreteMeasureSpace([0.5, 1.5])
        fs = [StepFunction(S, [1.0, -2.0]), StepFunction(S, [0.5, 3.0])]
        X = np.array([[1.0, 0.0], [0.3, 2.0]])
        space = NormedSpace(2, 3.0)
        expected = 0.0
        for s, w in enumerate(S.weights):
            Y = np.array([fs[0].values[s] * X[0], fs[1].values[s] * X[1]])
            expected += w * brute_l2_avg(Y, 3.0) ** 2.5
        assert mixed_norm(fs, X, 2.5, space=space) == pytest.approx(expected ** (1 / 2.5), rel=1e-12)

    def test_l2_contraction_hilbert(self):
        rng = np.random.default_rng(4)
        S = DiscreteMeasureSpace.uniform(6, 0.25)
        for _ in range(30):
            N = int(rng.integers(1, 6))
            fs = [StepFunction(S, rng.normal(size=6)) for _ in range(N)]
            X = rng.normal(size=(N, 3))
            out = lq_contraction_check(fs, X, 2.0, space=NormedSpace(3))
            assert out["lhs"] <= out["rhs"] + 1e-9

    def test_dual_lorentz_cap(self):
        rng = np.random.default_rng(5)
        S = DiscreteMeasureSpace.uniform(8, 1 / 8)
        for _ in range(20):
            N = int(rng.integers(2, 6))
            base = rng.normal(size=8)
            fs = [StepFunction(S, rng.permutation(base)) for _ in range(N)]
            X = rng.normal(size=(N, 2))
            assert dual_lorentz_check(fs, X, 2.0, space=NormedSpace(2))["ratio"] <= 4.0

    def test_lorentz_contraction_finite(self):
        rng = np.random.default_rng(6)
        S = DiscreteMeasureSpace.uniform(8, 1 / 8)
        fs = [StepFunction(S, rng.normal(size=8)) for _ in range(3)]
        out = lorentz_contraction_check(fs, rng.normal(size=(3, 2)), 2.0, space=NormedSpace(2))
        assert 0 < out["ratio"] < math.inf and out["functional"] > 0
