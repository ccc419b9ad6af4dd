"""Integral operators ``T_f x = int T(s) x f(s) dmu(s)`` built from operator-valued step data."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._parallel import ordered_map
from .errors import DimensionError, InvalidParameter, Unsupported
from .measure import DiscreteMeasureSpace, StepFunction, lp_norm
from .rademacher import NormedSpace, RandomConfig
from .rbound import Assignment, OperatorFamily, _parse_exponent, operator_norm, rbound_lower, rbound_ratio


@dataclass(frozen=True)
class OperatorValuedStep:
    """One matrix per atom of ``space``; each matrix maps ``domain`` to ``codomain``."""

    space: DiscreteMeasureSpace
    domain: NormedSpace
    codomain: NormedSpace
    matrices: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrices, dtype=float)
        if m.ndim != 3 or m.shape[0] != len(self.space):
            raise DimensionError("need one matrix per atom")
        if m.shape[1:] != (self.codomain.dim, self.domain.dim):
            raise DimensionError(f"matrices of shape {m.shape[1:]} do not conform to the spaces")
        m.setflags(write=False)
        object.__setattr__(self, "matrices", m)

    def atom_norms(self, seed: int = 0) -> tuple[np.ndarray, bool]:
        """``||T(s_i)||`` per atom and whether every value is exact (closed form)."""
        rng = np.random.default_rng(seed)
        out, exact = [], True
        for M in self.matrices:
            v, ex = operator_norm(M, self.domain, self.codomain, rng)
            out.append(v)
            exact &= ex
        return np.asarray(out), exact

    def lr_norm(self, r: float, seed: int = 0) -> tuple[float, bool]:
        """``||T||_{L^r(S; B(X,Y))}`` from per-atom norms."""
        norms, exact = self.atom_norms(seed)
        return lp_norm(StepFunction(self.space, norms), r), exact

    @classmethod
    def from_dict(cls, data: dict) -> "OperatorValuedStep":
        try:
            mats = np.asarray(data["matrices"], dtype=float)
            space = DiscreteMeasureSpace(data["weights"])
            p, q = _parse_exponent(data["p"]), _parse_exponent(data["q"])
        except KeyError as exc:
            raise InvalidParameter(f"operator-valued step JSON is missing {exc.args[0]!r}") from None
        if mats.ndim != 3:
            raise DimensionError("matrices must be a list of 2-d arrays")
        return cls(space, NormedSpace(mats.shape[2], p), NormedSpace(mats.shape[1], q), mats)


def apply_Tf(T: OperatorValuedStep, f: StepFunction) -> np.ndarray:
    """``sum_i w_i f_i M_i``."""
    if f.space != T.space:
        raise DimensionError("f does not live on T's measure space")
    coeff = T.space.weights * f.values
    return np.tensordot(coeff, T.matrices, axes=1)


def family_from_functions(T: OperatorValuedStep, fs: Sequence[StepFunction]) -> OperatorFamily:
    return OperatorFamily(T.domain, T.codomain, np.stack([apply_Tf(T, f) for f in fs]))


def _dual(r: float) -> float:
    if r == 1.0:
        return math.inf
    if math.isinf(r):
        return 1.0
    return r / (r - 1.0)


def unit_ball_samples(space: DiscreteMeasureSpace, r_dual: float, k: int,
                      rng: np.random.Generator) -> list[StepFunction]:
    """``k`` functions on the unit sphere of ``L^{r_dual}(S)``.

    Gaussian draws normalized in ``L^{r_dual}``; for ``r_dual = inf`` random signs times
    uniform magnitudes, rescaled so the largest magnitude is 1.
    """
    out = []
    for _ in range(k):
        if math.isinf(r_dual):
            v = rng.choice([-1.0, 1.0], len(space)) * rng.uniform(0.0, 1.0, len(space))
        else:
            v = rng.standard_normal(len(space))
        f = StepFunction(space, v)
        nrm = lp_norm(f, r_dual)
        out.append(f * (1.0 / nrm) if nrm > 0 else f)
    return out


def indicator_samples(space: DiscreteMeasureSpace, r_dual: float) -> list[StepFunction]:
    """Atom indicators normalized in ``L^{r_dual}``."""
    out = []
    for i, w in enumerate(space.weights):
        v = np.zeros(len(space))
        v[i] = 1.0 if math.isinf(r_dual) else w ** (-1.0 / r_dual)
        out.append(StepFunction(space, v))
    return out


@dataclass
class IntegralReport:
    empirical_C_max: float
    empirical_C_mean: float
    trials: int
    K: int
    seed: int
    r: float
    T_norm: float
    T_norm_exact: bool
    lower_bounds: list

    def to_dict(self) -> dict:
        return {
            "empirical_C_max": self.empirical_C_max,
            "empirical_C_mean": self.empirical_C_mean,
            "trials": self.trials,
            "K": self.K,
            "seed": self.seed,
            "r": "inf" if math.isinf(self.r) else self.r,
            "T_norm": self.T_norm,
            "T_norm_exact": self.T_norm_exact,
            "lower_bounds": list(self.lower_bounds),
        }


def verify_integral_rbound(T: OperatorValuedStep, r: float, trials: int,
                           config: RandomConfig | None = None, K: int = 8, N: int = 4,
                           strategy: str = "random", iterations: int = 30) -> IntegralReport:
    """Empirical ``C`` in ``R({T_f : ||f||_{r'} <= 1}) <= C ||T||_{L^r}``.

    Trial 0 uses the normalized atom indicators (at most ``K`` of them); every trial
    then adds Gaussian unit-ball samples up to ``K`` functions and runs ``rbound_lower``.
    """
    if not r >= 1.0:
        raise InvalidParameter("r must be >= 1")
    if trials < 1 or K < 1:
        raise InvalidParameter("trials and K must be positive")
    config = config or RandomConfig()
    rd = _dual(r)
    T_norm, exact = T.lr_norm(r, config.seed)
    seeds = np.random.SeedSequence(int(config.seed)).spawn(trials)
    indicators = indicator_samples(T.space, rd)[:K]

    def trial(args):
        t, seed_seq = args
        rng = np.random.default_rng(seed_seq)
        fs = list(indicators) if t == 0 else []
        fs += unit_ball_samples(T.space, rd, K - len(fs), rng)
        fam = family_from_functions(T, fs)
        if not np.any(fam.matrices):
            return 0.0
        sub = RandomConfig(int(rng.integers(0, 2**31)), config.samples, config.exact_threshold)
        return rbound_lower(fam, N, sub, strategy=strategy, iterations=iterations, probes=8, refine=20).lower_bound

    bounds = ordered_map(trial, list(enumerate(seeds)))
    ratios = [b / T_norm if T_norm > 0 else 0.0 for b in bounds]
    return IntegralReport(float(max(ratios)), float(np.mean(ratios)), trials, K, config.seed, r,
                          T_norm, exact, [float(b) for b in bounds])


@dataclass(frozen=True)
class EquidistributionBall:
    reference: StepFunction

    def __post_init__(self):
        if not self.reference.space.equal_weights:
            raise Unsupported("equidistribution sampling needs equal atom weights")


def sample_equidistributed(ball: EquidistributionBall | StepFunction, k: int,
                           config: RandomConfig | None = None) -> list[StepFunction]:
    """``k`` independent signed permutations of the reference function."""
    if isinstance(ball, StepFunction):
        ball = EquidistributionBall(ball)
    config = config or RandomConfig()
    rng = np.random.default_rng(config.seed)
    f0 = ball.reference
    n = len(f0.space)
    return [
        StepFunction(f0.space, f0.values[rng.permutation(n)] * rng.choice([-1.0, 1.0], n))
        for _ in range(k)
    ]


def diag_counterexample_ratio(t, alpha, q: float) -> float:
    """``||t * alpha||_2 / ||alpha||_q``."""
    t, alpha = np.asarray(t, dtype=float), np.asarray(alpha, dtype=float)
    if t.shape != alpha.shape or t.ndim != 1:
        raise DimensionError("t and alpha need equal lengths")
    if not q > 2:
        raise InvalidParameter("q must exceed 2")
    den = np.sum(np.abs(alpha) ** q) ** (1.0 / q) if not math.isinf(q) else np.max(np.abs(alpha))
    return float(np.linalg.norm(t * alpha) / den)


def diag_counterexample_generic(t, alpha, q: float, config: RandomConfig | None = None) -> float:
    """Same ratio through ``T(s) = t(s) e_s^T`` on counting measure, ``f_i = e_i``, ``x_i = alpha_i e_i``."""
    t, alpha = np.asarray(t, dtype=float), np.asarray(alpha, dtype=float)
    d = t.size
    S = DiscreteMeasureSpace.uniform(d, 1.0)
    mats = np.zeros((d, 1, d))
    mats[np.arange(d), 0, np.arange(d)] = t
    T = OperatorValuedStep(S, NormedSpace(d, q), NormedSpace(1, 2.0), mats)
    fam = family_from_functions(T, indicator_samples(S, math.inf))
    X = np.diag(alpha)
    return rbound_ratio(fam, Assignment(tuple(range(d)), X), config)
