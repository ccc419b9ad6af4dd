"""Finite atomic measure spaces, L^p norms, rearrangements and Lorentz norms.

All integrals are evaluated in closed form on piecewise-constant data, so the
identities between the different Lorentz formulas hold to rounding error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionError, InvalidParameter


@dataclass(frozen=True)
class DiscreteMeasureSpace:
    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).reshape(-1)
        if w.size == 0:
            raise InvalidParameter("a measure space needs at least one atom")
        if not np.all(w > 0) or not np.all(np.isfinite(w)):
            raise InvalidParameter("atom weights must be positive and finite")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return self.weights.size

    def __eq__(self, other):
        return isinstance(other, DiscreteMeasureSpace) and np.array_equal(self.weights, other.weights)

    def __hash__(self):
        return hash(self.weights.tobytes())

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    @property
    def equal_weights(self) -> bool:
        return bool(np.all(self.weights == self.weights[0]))

    @classmethod
    def uniform(cls, n: int, weight: float = 1.0) -> "DiscreteMeasureSpace":
        return cls(np.full(n, float(weight)))


@dataclass(frozen=True)
class StepFunction:
    space: DiscreteMeasureSpace
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float).reshape(-1)
        if v.size != len(self.space):
            raise DimensionError(f"{v.size} values on a space with {len(self.space)} atoms")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_lists(cls, weights: Sequence[float], values: Sequence[float]) -> "StepFunction":
        return cls(DiscreteMeasureSpace(weights), values)

    @classmethod
    def from_dict(cls, data: dict) -> "StepFunction":
        try:
            return cls.from_lists(data["weights"], data["values"])
        except KeyError as exc:
            raise InvalidParameter(f"step function JSON is missing {exc.args[0]!r}") from None

    def to_dict(self) -> dict:
        return {"weights": self.space.weights.tolist(), "values": self.values.tolist()}

    def __eq__(self, other):
        return isinstance(other, StepFunction) and self.space == other.space and np.array_equal(
            self.values, other.values
        )

    __hash__ = None

    def __add__(self, other: "StepFunction") -> "StepFunction":
        _same_space(self, other)
        return StepFunction(self.space, self.values + other.values)

    def __mul__(self, c: float) -> "StepFunction":
        return StepFunction(self.space, self.values * float(c))

    __rmul__ = __mul__

    def distribution(self, t: float) -> float:
        """``mu(|f| > t)``."""
        return float(self.space.weights[np.abs(self.values) > t].sum())


def _same_space(f, g):
    if f.space != g.space:
        raise DimensionError("step functions live on different measure spaces")


@dataclass(frozen=True)
class RearrangedProfile:
    """Non-increasing rearrangement as ``(value, length)`` steps with strictly decreasing values."""

    values: np.ndarray
    lengths: np.ndarray

    @property
    def steps(self) -> list[tuple[float, float]]:
        return [(float(v), float(l)) for v, l in zip(self.values, self.lengths)]

    @property
    def total_length(self) -> float:
        return float(self.lengths.sum())

    def __call__(self, s: float) -> float:
        """``f*(s) = inf{t > 0 : mu(|f| > t) <= s}``."""
        ends = np.cumsum(self.lengths)
        k = int(np.searchsorted(ends, s, side="right"))
        return float(self.values[k]) if k < self.values.size else 0.0

    def __eq__(self, other):
        return (
            isinstance(other, RearrangedProfile)
            and np.array_equal(self.values, other.values)
            and np.array_equal(self.lengths, other.lengths)
        )

    __hash__ = None


def lp_norm(f: StepFunction, p: float) -> float:
    p = float(p)
    if not p >= 1.0:
        raise InvalidParameter(f"L^p norms need p >= 1, got {p}")
    a = np.abs(f.values)
    if math.isinf(p):
        return float(a.max())
    m = a.max()
    if m == 0:
        return 0.0
    return float(m * (np.sum(f.space.weights * (a / m) ** p)) ** (1.0 / p))


def decreasing_rearrangement(f: StepFunction) -> RearrangedProfile:
    a = np.abs(f.values)
    order = np.argsort(-a, kind="stable")
    vals = a[order]
    lens = f.space.weights[order]
    # merge runs of equal values so the profile is strictly decreasing
    starts = np.flatnonzero(np.r_[True, vals[1:] != vals[:-1]])
    merged_vals = vals[starts]
    merged_lens = np.add.reduceat(lens, starts)
    merged_vals.setflags(write=False)
    merged_lens.setflags(write=False)
    return RearrangedProfile(merged_vals, merged_lens)


def _check_lorentz(p, q):
    p, q = float(p), float(q)
    if not p >= 1.0 or not q >= 1.0:
        raise InvalidParameter("Lorentz exponents must be >= 1")
    if math.isinf(p) and not math.isinf(q):
        raise InvalidParameter("L^{inf,q} with q < inf is not supported")
    return p, q


def lorentz_norm(f: StepFunction, p: float, q: float, form: str = "rearrangement") -> float:
    """``||f||_{L^{p,q}}`` via the rearrangement integral or the distribution-function integral."""
    p, q = _check_lorentz(p, q)
    prof = decreasing_rearrangement(f)
    v, lens = prof.values, prof.lengths
    if v.size == 0 or v[0] == 0:
        return 0.0
    ends = np.cumsum(lens)
    if math.isinf(q):
        if math.isinf(p):
            return float(v[0])
        # t^(1/p) f*(t) is increasing on each step; the sup sits at the right ends
        return float(np.max(v * ends ** (1.0 / p)))
    if form == "rearrangement":
        starts = ends - lens
        # int_a^b t^(q/p - 1) dt = (p/q)(b^(q/p) - a^(q/p))
        r = q / p
        total = np.sum(v**q * (p / q) * (ends**r - starts**r))
    elif form == "distribution":
        # mu(|f| > t) = ends[i] for t in [v[i+1], v[i])
        nxt = np.r_[v[1:], 0.0]
        total = np.sum(p * ends ** (q / p) * (v**q - nxt**q) / q)
    else:
        raise InvalidParameter(f"unknown Lorentz form {form!r}")
    return float(total ** (1.0 / q))


def lorentz_functional(fs: Sequence[StepFunction], q: float) -> float:
    """``int_0^inf max_n mu(|f_n| > t)^(1/q) dt``, exact for step functions."""
    levels = np.unique(np.concatenate([np.abs(f.values) for f in fs] + [[0.0]]))
    total = 0.0
    for lo, hi in zip(levels[:-1], levels[1:]):
        m = max(f.distribution(lo) for f in fs)
        total += (hi - lo) * m ** (1.0 / q)
    return total


def sample_on_grid(func: Callable[[np.ndarray], np.ndarray], a: float, b: float, n: int) -> StepFunction:
    """Midpoint samples of ``func`` on ``n`` equal cells of ``(a, b)``."""
    if not (b > a) or n < 1:
        raise InvalidParameter("need a < b and n >= 1")
    h = (b - a) / n
    x = a + (np.arange(n) + 0.5) * h
    return StepFunction(DiscreteMeasureSpace.uniform(n, h), func(x))


def dilate(func: Callable[[np.ndarray], np.ndarray], c: float, amplitude: float = 1.0):
    """``t -> amplitude * func(c t)``."""
    return lambda t: amplitude * func(c * np.asarray(t))
