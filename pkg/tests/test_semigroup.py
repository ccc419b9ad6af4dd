import itertools
import math

import numpy as np
import pytest

from rbound_lab.besov import GridFunction
from rbound_lab.errors import InvalidParameter
from rbound_lab.rademacher import NormedSpace, RandomConfig, Vector
from rbound_lab.semigroup import (
    DiagonalSemigroup,
    SharpnessConfig,
    TranslationGroup,
    default_bump,
    dilation_scaling_check,
    fractional_power_apply,
    graph_norm,
    holder_constant,
    semigroup_apply,
    sharpness_experiment,
    thm_semigroup_experiment,
)


class TestApply:
    def test_identity_at_zero(self):
        g = DiagonalSemigroup([1.0, 5.0])
        assert np.array_equal(semigroup_apply(g, 0.0, [2.0, -1.0]), [2.0, -1.0])
        tg = TranslationGroup(2.0, 64)
        x = np.random.default_rng(0).normal(size=64)
        assert np.array_equal(semigroup_apply(tg, 0.0, x), x)

    def test_hand_exponentials(self):
        out = semigroup_apply(DiagonalSemigroup([1.0, 2.0]), math.log(2), [1.0, 1.0])
        assert np.allclose(out, [0.5, 0.25], rtol=1e-15)

    def test_vector_in_vector_out(self):
        g = DiagonalSemigroup([1.0, 2.0], NormedSpace(2, 3.0))
        assert isinstance(semigroup_apply(g, 1.0, Vector(g.space, [1.0, 1.0])), Vector)

    def test_full_period(self):
        tg = TranslationGroup(2.0, 64)
        x = np.random.default_rng(1).normal(size=64)
        assert np.array_equal(semigroup_apply(tg, 2.0, x), x)

    def test_left_translation(self):
        tg = TranslationGroup(1.0, 8)
        x = np.arange(8.0)
        # T(t)f(s) = f(s + t)
        assert np.array_equal(semigroup_apply(tg, 2 / 8, x), np.roll(x, -2))

    def test_semigroup_law(self):
        g = DiagonalSemigroup(np.geomspace(0.1, 50, 6))
        x = np.random.default_rng(2).normal(size=6)
        for s, t in ((0.1, 0.3), (1.0, 2.5)):
            lhs = semigroup_apply(g, t, semigroup_apply(g, s, x))
            assert np.allclose(lhs, semigroup_apply(g, s + t, x), rtol=1e-12, atol=0)
        tg = TranslationGroup(2.0, 128)
        y = np.random.default_rng(3).normal(size=128)
        for s, t in ((3 / 64, 5 / 64), (-1.0, 0.25)):
            assert np.array_equal(semigroup_apply(tg, t, semigroup_apply(tg, s, y)), semigroup_apply(tg, s + t, y))

    def test_negative_time(self):
        with pytest.raises(InvalidParameter):
            semigroup_apply(DiagonalSemigroup([1.0]), -0.1, [1.0])

    def test_validation(self):
        with pytest.raises(InvalidParameter):
            DiagonalSemigroup([1.0, 0.0])
        with pytest.raises(InvalidParameter):
            TranslationGroup(2.0, 100)


class TestFractional:
    def test_diag_sqrt(self):
        assert fractional_power_apply(DiagonalSemigroup([4.0]), 0.5, [1.0])[0] == pytest.approx(2.0, rel=1e-15)

    def test_diag_composition(self):
        g = DiagonalSemigroup(np.geomspace(0.5, 100, 5))
        x = np.random.default_rng(4).normal(size=5)
        for a, b in ((0.25, 0.5), (0.3, 0.7)):
            lhs = fractional_power_apply(g, a, fractional_power_apply(g, b, x))
            assert np.allclose(lhs, fractional_power_apply(g, a + b, x), rtol=1e-12, atol=0)

    @pytest.mark.parametrize("k", [1, 3, 7])
    def test_fourier_mode(self, k):
        tg = TranslationGroup(2.0, 64)
        xi = 2 * np.pi * k / 2.0
        mode = np.cos(xi * tg.points)
        out = fractional_power_apply(tg, 0.6, mode)
        assert np.allclose(out, (1 + xi**2) ** 0.3 * mode, atol=1e-12)

    def test_generator_mode(self):
        tg = TranslationGroup(2.0, 64)
        xi = 2 * np.pi * 3 / 2.0
        out = fractional_power_apply(tg, 1.0, np.sin(xi * tg.points), "generator")
        # (-A) f = -f' for A = d/ds
        assert np.allclose(out, -xi * np.cos(xi * tg.points), atol=1e-10)

    @pytest.mark.parametrize("alpha", [0.25, 0.75])
    @pytest.mark.parametrize("c", [2, 4])
    def test_dilation_scaling(self, alpha, c):
        assert dilation_scaling_check(alpha, c)["rel_error"] < 0.02

    def test_alpha_range(self):
        with pytest.raises(InvalidParameter):
            fractional_power_apply(TranslationGroup(2.0, 8), 1.5, np.ones(8))


class TestFractionalDomainExperiment:
    def test_time_zero(self):
        g = DiagonalSemigroup(np.geomspace(1, 1000, 5))
        rep = thm_semigroup_experiment(g, 0.6, 2.0, 2.0, 3, [0.0], RandomConfig(0), iterations=20)
        assert rep.lower_bound == pytest.approx(1.0, rel=1e-9)

    def test_hilbert_cap(self):
        g = DiagonalSemigroup(np.geomspace(1, 1000, 6))
        rep = thm_semigroup_experiment(g, 0.5, 2.0, 2.0, 4, [0.0, 0.01, 0.1, 1.0], RandomConfig(0), iterations=20)
        assert rep.lower_bound <= 1 + 1e-6
        assert rep.hilbert_cap == pytest.approx(1.0, rel=1e-12)

    def test_holder_certificate_stable(self):
        times = list(np.geomspace(1e-4, 10, 30))
        bound = holder_constant(0.6)
        certs = []
        for top in (10, 1000, 1e5):
            g = DiagonalSemigroup(np.geomspace(1, top, 8))
            rep = thm_semigroup_experiment(g, 0.6, 2.0, 2.0, 1, times, RandomConfig(0), iterations=1)
            assert rep.holder_certificate <= rep.holder_bound * (1 + 1e-9)
            certs.append(rep.holder_certificate)
        assert max(certs) <= bound * (1 + 1e-9) and min(certs) >= 0.8 * bound

    def test_holder_constant_oracle(self):
        u = np.geomspace(1e-6, 1e3, 2_000_000)
        for alpha in (0.25, 0.5, 0.9):
            assert holder_constant(alpha) == pytest.approx(np.max(u**-alpha * -np.expm1(-u)), rel=1e-6)

    def test_alpha_condition(self):
        with pytest.raises(InvalidParameter):
            thm_semigroup_experiment(DiagonalSemigroup([1.0]), 0.2, 1.0, 2.0, 1, [0.0])


def test_bump_support():
    t = np.linspace(-0.5, 1.5, 101)
    b = default_bump(t)
    assert np.all(b[(t <= 0) | (t >= 1)] == 0) and np.all(b[(t > 0) & (t < 1)] > 0)


class TestSharpness:
    @pytest.mark.parametrize("p", [1.0, 1.5, 2.0])
    def test_numerator_identity(self, p):
        cfg = SharpnessConfig(p=p, alpha=0.5, N_values=(2, 4, 8), n=2**12)
        rep = sharpness_experiment(cfg)
        for row in rep.rows:
            assert row["numerator_p_power"] == pytest.approx(rep.psi_norm**p, rel=1e-10)
            assert row["numerator_spread"] <= 1e-10

    def test_denominator_direct(self):
        cfg = SharpnessConfig(p=1.0, alpha=0.25, N_values=(2, 4), n=2**12)
        rep = sharpness_experiment(cfg)
        g = TranslationGroup(2.0, 2**12, 1.0)
        for row in rep.rows:
            N = row["N"]
            f = default_bump(N * g.points)
            vals = [graph_norm(g, 0.25, sum(s) * f) ** 2 for s in itertools.product((-1, 1), repeat=N)]
            assert row["denominator"] == pytest.approx(math.sqrt(np.mean(vals)), rel=1e-12)

    def test_p2_denominator_closed_form(self):
        # p = 2: L^2(Omega) and L^p(Omega) moments coincide, so the N-law is exact
        cfg = SharpnessConfig(p=2.0, alpha=0.5, N_values=(2, 4, 8), n=2**14)
        rep = sharpness_experiment(cfg)
        g = TranslationGroup(2.0, 2**14, 2.0)
        for row in rep.rows:
            N = row["N"]
            f = default_bump(N * g.points)
            expected = math.sqrt(N) * (g.lp_norm(f) + g.lp_norm(fractional_power_apply(g, 0.5, f)))
            assert row["denominator"] == pytest.approx(expected, rel=0.03)

    def test_table_columns(self):
        rep = sharpness_experiment(SharpnessConfig(p=1.0, alpha=0.75, N_values=(2, 4), n=2**12))
        assert list(rep.table()[0]) == ["N", "Q_N", "log_fit", "expected_slope", "verdict"]
        assert rep.expected_slope == pytest.approx(-0.25)

    def test_custom_profile(self):
        n = 256
        x = (np.arange(n) + 0.5) / n
        psi = GridFunction(0.0, 1.0, np.sin(np.pi * x) ** 4)
        rep = sharpness_experiment(SharpnessConfig(p=1.0, alpha=0.5, N_values=(2, 4), n=2**12, psi=psi))
        assert all(r["Q_N"] > 0 for r in rep.rows)

    def test_validation(self):
        with pytest.raises(InvalidParameter):
            SharpnessConfig(alpha=1.0)
        with pytest.raises(InvalidParameter):
            SharpnessConfig(circumference=1.0)
        with pytest.raises(InvalidParameter):
            sharpness_experiment(SharpnessConfig(N_values=(3, 4), n=2**10))
