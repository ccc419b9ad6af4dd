import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rbound_lab.errors import DimensionError, InvalidParameter
from rbound_lab.measure import (
    DiscreteMeasureSpace,
    StepFunction,
    decreasing_rearrangement,
    dilate,
    lorentz_functional,
    lorentz_norm,
    lp_norm,
    sample_on_grid,
)


def step(weights, values):
    return StepFunction.from_lists(weights, values)


def brute_lorentz(f, p, q, grid=200_000):
    """Midpoint quadrature of the rearrangement integral, independent of the closed form.

    Substituting u = t^(q/p) removes the singular weight: the integral is (p/q) int f*(u^(p/q))^q du.
    """
    a = np.abs(f.values)
    w = f.space.weights
    top = w.sum() ** (q / p)
    u = (np.arange(grid) + 0.5) * top / grid
    t = u ** (p / q)
    order = np.argsort(-a, kind="stable")
    ends = np.cumsum(w[order])
    fstar = a[order][np.minimum(np.searchsorted(ends, t, side="right"), a.size - 1)]
    return ((p / q) * np.sum(fstar**q) * top / grid) ** (1 / q)


class TestLpNorm:
    def test_zero(self):
        assert lp_norm(step([1, 2], [0, 0]), 2) == 0

    def test_direct_sum(self):
        assert lp_norm(step([1, 2], [3, 1]), 1) == 5

    def test_hand_l2(self):
        assert lp_norm(step([1, 2], [3, 1]), 2) == pytest.approx(math.sqrt(11), rel=1e-15)

    def test_sup(self):
        assert lp_norm(step([1, 2], [-3, 1]), math.inf) == 3

    def test_p_below_one(self):
        with pytest.raises(InvalidParameter):
            lp_norm(step([1], [1]), 0.5)


class TestRearrangement:
    def test_hand_profile(self):
        assert decreasing_rearrangement(step([1, 2], [3, 1])).steps == [(3, 1), (1, 2)]

    def test_sorted_input_unchanged(self):
        prof = decreasing_rearrangement(step([1, 1, 1], [3, 2, 1]))
        assert prof.steps == [(3, 1), (2, 1), (1, 1)]

    def test_absolute_values(self):
        assert decreasing_rearrangement(step([1, 2], [-3, 1])) == decreasing_rearrangement(step([1, 2], [3, 1]))

    def test_ties_merge(self):
        prof = decreasing_rearrangement(step([1, 2, 0.5], [2, -2, 1]))
        assert prof.steps == [(2, 3), (1, 0.5)]

    def test_total_length(self):
        f = step([0.3, 0.7, 1.1], [0, 5, -1])
        assert decreasing_rearrangement(f).total_length == pytest.approx(f.space.total)

    def test_evaluation_matches_distribution(self):
        f = step([1, 2], [3, 1])
        prof = decreasing_rearrangement(f)
        # f*(s) = inf{t : mu(|f| > t) <= s}
        assert prof(0.5) == 3 and prof(1.0) == 1 and prof(2.9) == 1 and prof(3.0) == 0


class TestLorentz:
    def test_indicator_measure_four(self):
        f = step([4], [1])
        assert lorentz_norm(f, 2, 1) == pytest.approx(4, rel=1e-15)
        assert lorentz_norm(f, 2, 1, "distribution") == pytest.approx(4, rel=1e-15)

    def test_zero(self):
        assert lorentz_norm(step([1, 1], [0, 0]), 2, 3) == 0

    def test_matches_quadrature(self):
        f = step([0.5, 1.0, 2.0], [3.0, -1.0, 0.5])
        for p, q in ((2, 1), (1.5, 3), (3, 2)):
            assert lorentz_norm(f, p, q) == pytest.approx(brute_lorentz(f, p, q), rel=1e-4)

    def test_weak_type_sup(self):
        f = step([1, 1], [2, 1])
        # sup_t t^(1/p) f*(t) at the step ends: max(2 * 1, 1 * 2^(1/2))
        assert lorentz_norm(f, 2, math.inf) == pytest.approx(2.0)

    def test_inf_p_finite_q_rejected(self):
        with pytest.raises(InvalidParameter):
            lorentz_norm(step([1], [1]), math.inf, 2)

    def test_unknown_form(self):
        with pytest.raises(InvalidParameter):
            lorentz_norm(step([1], [1]), 2, 2, "other")


weights_values = st.integers(1, 12).flatmap(
    lambda n: st.tuples(
        st.lists(st.floats(0.05, 5.0), min_size=n, max_size=n),
        st.lists(st.floats(-10, 10, allow_subnormal=False), min_size=n, max_size=n),
    )
)


@settings(max_examples=150, deadline=None)
@given(weights_values, st.sampled_from([1.0, 1.5, 2.0, 3.0]), st.sampled_from([1.0, 1.5, 2.0, 4.0]))
def test_lorentz_properties(wv, p, q):
    f = step(*wv)
    lpp = lorentz_norm(f, p, p)
    assert lpp == pytest.approx(lp_norm(f, p), rel=1e-10, abs=1e-300)
    a, b = lorentz_norm(f, p, q), lorentz_norm(f, p, q, "distribution")
    assert a == pytest.approx(b, rel=1e-10, abs=1e-300)
    assert lorentz_norm(f, p, math.inf) <= lorentz_norm(f, p, 1.0) * (1 + 1e-12) + 1e-300


def test_space_validation():
    with pytest.raises(InvalidParameter):
        DiscreteMeasureSpace([1, 0])
    with pytest.raises(DimensionError):
        StepFunction(DiscreteMeasureSpace([1, 1]), [1])
    with pytest.raises(DimensionError):
        step([1], [1]) + step([2], [1])


def test_json_roundtrip():
    f = step([1, 2], [3, -1])
    assert StepFunction.from_dict(f.to_dict()) == f


def test_lorentz_functional_single_function():
    # one function: int_0^inf mu(|f|>t)^(1/q) dt = L^{q,1} norm / q
    f = step([1, 2, 0.5], [3, 1, 2])
    assert lorentz_functional([f], 2.0) == pytest.approx(lorentz_norm(f, 2.0, 1.0) / 2.0, rel=1e-12)


def test_dilation_scaling():
    phi = lambda t: np.exp(-1 / np.clip(1 - t**2, 1e-300, None)) * (np.abs(t) < 1)  # noqa: E731
    base = lorentz_norm(sample_on_grid(phi, -1, 1, 2**12), 2.0, 1.0)
    for n in (1, 2, 3):
        val = lorentz_norm(sample_on_grid(dilate(phi, 2**n, 2**n), -1, 1, 2**12), 2.0, 1.0)
        assert val / base == pytest.approx(2 ** (n / 2), rel=0.02)
