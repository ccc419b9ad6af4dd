"""Lower estimates of type and cotype constants, plus the tensor-product checks.

The type-p ratio is ``(E||sum r_n x_n||^2)^(1/2) / (sum ||x_n||^p)^(1/p)`` and the
cotype-q ratio is its reciprocal shape with ``q``.  Every evaluated ratio is a
valid lower bound for the corresponding constant restricted to length-N sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

from ._parallel import ordered_map
from .errors import InvalidParameter
from .measure import DiscreteMeasureSpace, StepFunction, lorentz_functional, lorentz_norm
from .rademacher import NormedSpace, RandomConfig, Vector, as_array, rademacher_power_mean


@dataclass(frozen=True)
class TypeCotypeReport:
    kind: str
    space: NormedSpace
    exponent: float
    N: int
    constant_lower: float
    witness: np.ndarray
    basis_ratio: float
    evaluations: int
    stats: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "space": self.space.to_dict(),
            "exponent": "inf" if math.isinf(self.exponent) else self.exponent,
            "N": self.N,
            "constant_lower": self.constant_lower,
            "basis_ratio": self.basis_ratio,
            "evaluations": self.evaluations,
            "witness": self.witness.tolist(),
            "stats": dict(self.stats),
        }

    def csv_row(self) -> dict:
        return {
            "kind": self.kind,
            "space_exponent": self.space.exponent,
            "dim": self.space.dim,
            "exponent": self.exponent,
            "N": self.N,
            "constant_lower": self.constant_lower,
            "basis_ratio": self.basis_ratio,
        }


def _sum_of_powers(norms, e):
    if math.isinf(e):
        return float(np.max(norms))
    return float(np.sum(norms**e) ** (1.0 / e))


def type_ratio(space: NormedSpace, X: np.ndarray, p: float, config: RandomConfig) -> float:
    norms = space.norm(X)
    den = _sum_of_powers(norms, p)
    if den == 0:
        return 0.0
    return math.sqrt(rademacher_power_mean(X, space, 2.0, config)) / den


def cotype_ratio(space: NormedSpace, X: np.ndarray, q: float, config: RandomConfig) -> float:
    num = _sum_of_powers(space.norm(X), q)
    if num == 0:
        return 0.0
    return num / math.sqrt(rademacher_power_mean(X, space, 2.0, config))


def basis_probe(space: NormedSpace, N: int) -> np.ndarray:
    """``x_n = e_{n mod dim}``."""
    return np.eye(space.dim)[np.arange(N) % space.dim]


def _search(ratio, space, N, config, restarts, sweeps):
    X0 = basis_probe(space, N)
    basis_val = ratio(X0)
    best_val, best_X = basis_val, X0
    evaluations = 1
    seeds = np.random.SeedSequence(int(config.seed)).spawn(restarts)

    def task(seed_seq):
        rng = np.random.default_rng(seed_seq)
        X = rng.standard_normal((N, space.dim))
        val = ratio(X)
        count = 1
        steps = np.full(N, 0.1)
        for _ in range(sweeps):
            for n in range(N):
                trial = X.copy()
                d = rng.standard_normal(space.dim)
                d /= np.linalg.norm(d) or 1.0
                trial[n] = X[n] + steps[n] * (np.linalg.norm(X[n]) or 1.0) * d
                t_val = ratio(trial)
                count += 1
                if t_val > val:
                    val, X = t_val, trial
                else:
                    steps[n] = steps[n] * 0.5 if steps[n] > 1e-6 else 0.1
        return val, X, count

    for val, X, count in ordered_map(task, seeds):
        evaluations += count
        if val > best_val:
            best_val, best_X = val, X
    return best_val, best_X, basis_val, evaluations


def type_constant_lower(space: NormedSpace, p: float, N: int, config: RandomConfig | None = None,
                        restarts: int = 4, sweeps: int = 25) -> TypeCotypeReport:
    if not 1.0 <= p <= 2.0:
        raise InvalidParameter("type exponents lie in [1, 2]")
    if N < 1:
        raise InvalidParameter("N must be >= 1")
    config = config or RandomConfig()
    val, X, basis, evals = _search(lambda X: type_ratio(space, X, p, config), space, N, config, restarts, sweeps)
    return TypeCotypeReport("type", space, float(p), N, val, X, basis, evals,
                            {"restarts": restarts, "sweeps": sweeps})


def cotype_constant_lower(space: NormedSpace, q: float, N: int, config: RandomConfig | None = None,
                          restarts: int = 4, sweeps: int = 25) -> TypeCotypeReport:
    if not q >= 2.0:
        raise InvalidParameter("cotype exponents lie in [2, inf]")
    if N < 1:
        raise InvalidParameter("N must be >= 1")
    config = config or RandomConfig()
    val, X, basis, evals = _search(lambda X: cotype_ratio(space, X, q, config), space, N, config, restarts, sweeps)
    return TypeCotypeReport("cotype", space, float(q), N, val, X, basis, evals,
                            {"restarts": restarts, "sweeps": sweeps})


@dataclass(frozen=True)
class GrowthFit:
    Ns: tuple[int, ...]
    constants: tuple[float, ...]
    slope: float
    stderr: float
    intercept: float

    @property
    def fails(self) -> bool:
        """Slope bounded away from 0 by three standard errors."""
        return self.slope > 3.0 * self.stderr and self.slope > 1e-9

    def to_dict(self) -> dict:
        return {
            "Ns": list(self.Ns),
            "constants": list(self.constants),
            "slope": self.slope,
            "stderr": self.stderr,
            "intercept": self.intercept,
            "fails_exponent": self.fails,
        }


def growth_fit(kind: str, space_exponent: float, exponent: float, Ns: Sequence[int] = (2, 4, 8, 16),
               config: RandomConfig | None = None, dim: int | None = None, **search) -> GrowthFit:
    """Fit ``log constant_lower`` against ``log N`` on l^s_N (or l^s_dim when ``dim`` is given)."""
    estimator = {"type": type_constant_lower, "cotype": cotype_constant_lower}[kind]
    consts = []
    for N in Ns:
        space = NormedSpace(dim or N, space_exponent)
        consts.append(estimator(space, exponent, N, config, **search).constant_lower)
    res = stats.linregress(np.log(Ns), np.log(consts))
    return GrowthFit(tuple(Ns), tuple(consts), float(res.slope), float(res.stderr), float(res.intercept))


# --- tensor-product (L^q(S; L^2(Omega; X))) quantities ------------------------


def mixed_norm(fs: Sequence[StepFunction], vectors, outer: float, config: RandomConfig | None = None,
               space: NormedSpace | None = None) -> float:
    """``|| sum_n r_n f_n x_n ||_{L^outer(S; L^2(Omega; X))}``.

    For every atom ``s`` the inner Rademacher moment of ``(f_n(s) x_n)`` is computed
    exactly (or by MC above the threshold) and the outer integral is a weighted sum.
    """
    config = config or RandomConfig()
    space, X = as_array(vectors, space)
    if len(fs) != X.shape[0]:
        raise InvalidParameter("need one function per vector")
    S = fs[0].space
    F = np.stack([f.values for f in fs])  # (N, atoms)
    inner = np.empty(len(S))
    for s in range(len(S)):
        coeff = F[:, s]
        if not np.any(coeff):
            inner[s] = 0.0
            continue
        inner[s] = math.sqrt(rademacher_power_mean(coeff[:, None] * X, space, 2.0, config))
    if math.isinf(outer):
        return float(inner.max())
    return float(np.sum(S.weights * inner**outer) ** (1.0 / outer))


def rademacher_l2(vectors, config=None, space=None) -> float:
    space, X = as_array(vectors, space)
    return math.sqrt(rademacher_power_mean(X, space, 2.0, config or RandomConfig()))


def converse_indicators(space: DiscreteMeasureSpace, N: int, q: float) -> list[StepFunction]:
    """``f_n = mu(S_1)^(-1/q) 1_{S_n}`` on the first ``N`` atoms of an equal-weight space."""
    if not space.equal_weights:
        raise InvalidParameter("the converse construction needs equal atom weights")
    if N > len(space):
        raise InvalidParameter("not enough atoms for N disjoint sets")
    c = space.weights[0] ** (-1.0 / q)
    fs = []
    for n in range(N):
        v = np.zeros(len(space))
        v[n] = c
        fs.append(StepFunction(space, v))
    return fs


def converse_check(vectors, q: float, atoms: int | None = None, weight: float = 0.5,
                   config: RandomConfig | None = None, space: NormedSpace | None = None) -> dict:
    """Compare ``||sum r_n f_n x_n||^q_{L^q(S;L^2(Omega;X))}`` with ``sum ||x_n||^q``."""
    space, X = as_array(vectors, space)
    N = X.shape[0]
    S = DiscreteMeasureSpace.uniform(atoms or N + 1, weight)
    fs = converse_indicators(S, N, q)
    lhs = mixed_norm(fs, X, q, config, space) ** q
    rhs = float(np.sum(space.norm(X) ** q))
    return {"lhs": lhs, "rhs": rhs, "rel_error": abs(lhs - rhs) / max(rhs, 1e-300)}


def lq_contraction_check(fs, vectors, q: float, config=None, space=None) -> dict:
    """LHS and RHS of ``||sum r f x||_{L^q(S;L^2(Omega;X))} <= C sup||f_n||_q ||sum r x||``."""
    from .measure import lp_norm

    space, X = as_array(vectors, space)
    lhs = mixed_norm(fs, X, q, config, space)
    rhs = max(lp_norm(f, q) for f in fs) * rademacher_l2(X, config, space)
    return {"lhs": lhs, "rhs": rhs, "ratio": lhs / rhs if rhs > 0 else 0.0}


def lorentz_contraction_check(fs, vectors, q: float, config=None, space=None) -> dict:
    """Ratio of ``||sum r f x||_{L^q(S;L^2)}`` to ``int max_n mu(|f_n|>t)^(1/q) dt * ||sum r x||``."""
    space, X = as_array(vectors, space)
    lhs = mixed_norm(fs, X, q, config, space)
    functional = lorentz_functional(fs, q)
    rhs = functional * rademacher_l2(X, config, space)
    return {"lhs": lhs, "functional": functional, "rhs": rhs, "ratio": lhs / rhs if rhs > 0 else 0.0}


def dual_lorentz_check(fs, vectors, p: float, config=None, space=None) -> dict:
    """Ratio ``||f_1||_{L^{p,inf}} ||sum r x|| / ||sum r f x||_{L^p(S;L^2)}`` (identically distributed f_n)."""
    space, X = as_array(vectors, space)
    lhs = lorentz_norm(fs[0], p, math.inf) * rademacher_l2(X, config, space)
    rhs = mixed_norm(fs, X, p, config, space)
    return {"lhs": lhs, "rhs": rhs, "ratio": lhs / rhs if rhs > 0 else math.inf}


def fitted_lorentz_constant(space: NormedSpace, q: float, Ns: Sequence[int], trials: int,
                            atoms: int = 16, config: RandomConfig | None = None) -> dict:
    """Largest observed contraction ratio per N for random step functions; drift in N is flagged."""
    config = config or RandomConfig()
    rng = np.random.default_rng(config.seed)
    S = DiscreteMeasureSpace.uniform(atoms, 1.0 / atoms)
    per_n = []
    for N in Ns:
        worst = 0.0
        for _ in range(trials):
            fs = [StepFunction(S, rng.standard_normal(atoms)) for _ in range(N)]
            X = rng.uniform(-1, 1, (N, space.dim))
            worst = max(worst, lorentz_contraction_check(fs, X, q, config, space)["ratio"])
        per_n.append(worst)
    drift = bool(len(per_n) > 1 and all(b > a * 1.05 for a, b in zip(per_n, per_n[1:])))
    return {"Ns": list(Ns), "fitted_C": per_n, "drifts_upward": drift}


def vectors_in(space: NormedSpace, rows) -> list[Vector]:
    return [Vector(space, r) for r in np.asarray(rows, dtype=float)]
