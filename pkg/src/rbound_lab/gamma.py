"""Finite-dimensional gamma-radonifying norms and the multiplier inequality check.

``H`` is always coordinate Euclidean of dimension ``h_dim``; an operator
``Psi: H -> Y`` is stored as a ``Y.dim x h_dim`` matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionError, InternalError, InvalidParameter
from .rademacher import (
    MomentEstimate,
    NormedSpace,
    RandomConfig,
    gaussian_moment,
    rademacher_power_mean,
    signed_sums,
)


@dataclass(frozen=True)
class GammaOperator:
    matrix: np.ndarray
    codomain: NormedSpace
    h_dim: int

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.shape != (self.codomain.dim, self.h_dim):
            raise DimensionError(f"matrix shape {m.shape} does not map R^{self.h_dim} -> dim {self.codomain.dim}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def of(cls, matrix, exponent: float = 2.0, weights=None) -> "GammaOperator":
        m = np.asarray(matrix, dtype=float)
        return cls(m, NormedSpace(m.shape[0], exponent, weights), m.shape[1])

    def __mul__(self, c: float) -> "GammaOperator":
        return GammaOperator(self.matrix * float(c), self.codomain, self.h_dim)

    __rmul__ = __mul__

    def rotated(self, Q: np.ndarray) -> "GammaOperator":
        """``Psi Q`` for an ``h_dim x h_dim`` matrix ``Q``."""
        return GammaOperator(self.matrix @ Q, self.codomain, self.h_dim)

    def to_dict(self) -> dict:
        return {"matrix": self.matrix.tolist(), "codomain": self.codomain.to_dict(), "h_dim": self.h_dim}


def gamma_norm(psi: GammaOperator, config: RandomConfig | None = None) -> MomentEstimate:
    """``(E||sum_k g_k Psi e_k||^2)^(1/2)``; exact (weighted Frobenius) for an l^2 codomain."""
    return gaussian_moment(psi.matrix.T, 2.0, config, psi.codomain)


@dataclass
class MultiplierReport:
    lhs: float
    rhs: float
    ratio: float
    sup_f: float
    gamma_average: float
    method: str
    N: int

    def to_dict(self) -> dict:
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "ratio": self.ratio,
            "sup_f": self.sup_f,
            "gamma_average": self.gamma_average,
            "method": self.method,
            "N": self.N,
        }


def _gamma_average(psis: Sequence[GammaOperator], config: RandomConfig) -> tuple[float, str]:
    """``(E_r ||sum r_n Psi_n||^2_gamma)^(1/2)`` with exact outer enumeration."""
    Y, h = psis[0].codomain, psis[0].h_dim
    stack = np.stack([p.matrix for p in psis])  # (N, dim, h)
    if Y.is_hilbert:
        # gamma norm is the weighted Frobenius norm: flatten and reuse the Rademacher engine
        flat_space = NormedSpace(Y.dim * h, 2.0, np.repeat(Y.weight_array(), h))
        mean = rademacher_power_mean(stack.reshape(len(psis), -1), flat_space, 2.0,
                                     RandomConfig(config.seed, config.samples, max(config.exact_threshold, len(psis))))
        return math.sqrt(mean), "exact"
    # common Gaussian samples for every sign pattern
    G = np.random.default_rng(config.seed).standard_normal((config.samples, h))
    total, count = 0.0, 0
    flat = stack.reshape(len(psis), -1)
    for chunk in signed_sums(flat):
        mats = chunk.reshape(-1, Y.dim, h)
        for S in mats:
            total += float(np.mean(Y.norm(G @ S.T) ** 2))
            count += 1
    return math.sqrt(total / count), "exact-outer/montecarlo-inner"


def verify_gamma_multiplier(psis: Sequence[GammaOperator], fs, config: RandomConfig | None = None) -> MultiplierReport:
    """Empirical ``C`` in ``||sum r_n Psi_n f_n|| <= C sup||f_n|| ||sum r_n Psi_n||_{L^2(gamma)}``."""
    config = config or RandomConfig()
    F = np.asarray(fs, dtype=float)
    if len(psis) == 0 or F.shape != (len(psis), psis[0].h_dim):
        raise DimensionError("need one H-vector per operator")
    Y = psis[0].codomain
    if any(p.codomain != Y or p.h_dim != psis[0].h_dim for p in psis):
        raise InvalidParameter("all operators must share codomain and H")
    if len(psis) > 24:
        raise InvalidParameter("exact enumeration supports at most 24 operators")
    images = np.stack([p.matrix @ f for p, f in zip(psis, F)])
    lhs = math.sqrt(rademacher_power_mean(images, Y, 2.0, RandomConfig(config.seed, config.samples, 30)))
    sup_f = float(np.max(np.linalg.norm(F, axis=1)))
    avg, method = _gamma_average(psis, config)
    rhs = sup_f * avg
    if rhs == 0.0:
        if lhs > 0.0:
            raise InternalError("zero right-hand side with a nonzero left-hand side")
        ratio = 0.0
    else:
        ratio = lhs / rhs
    return MultiplierReport(lhs, rhs, ratio, sup_f, avg, method, len(psis))


def random_gamma_operators(rng: np.random.Generator, N: int, dim: int, h_dim: int,
                           exponent: float = 2.0) -> list[GammaOperator]:
    Y = NormedSpace(dim, exponent)
    return [GammaOperator(rng.uniform(-1.0, 1.0, (dim, h_dim)), Y, h_dim) for _ in range(N)]


def fitted_gamma_constant(exponent: float, Ns: Sequence[int] = (2, 4, 8), trials: int = 50,
                          dim: int = 3, h_dim: int = 3, config: RandomConfig | None = None) -> dict:
    """Largest observed multiplier ratio per ``N`` over random trials."""
    config = config or RandomConfig(samples=2000)
    rng = np.random.default_rng(config.seed)
    per_n = []
    for N in Ns:
        worst = 0.0
        for _ in range(trials):
            psis = random_gamma_operators(rng, N, dim, h_dim, exponent)
            fs = rng.uniform(-1.0, 1.0, (N, h_dim))
            worst = max(worst, verify_gamma_multiplier(psis, fs, config).ratio)
        per_n.append(worst)
    return {"Ns": list(Ns), "fitted_C": per_n, "exponent": "inf" if math.isinf(exponent) else exponent}
