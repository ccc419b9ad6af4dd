"""Finite operator families and certified lower bounds for their R-bound.

Any assignment ``(T_n, x_n)`` gives the lower bound

    (E||sum r_n T_n x_n||^2)^(1/2) / (E||sum r_n x_n||^2)^(1/2)  <=  R(family),

so the engine searches over assignments and keeps the best witness.  Upper
bounds are only available analytically (Hilbert spaces, where the R-bound is
the largest operator norm).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ._parallel import ordered_map
from .errors import DegenerateInput, DimensionError, InvalidParameter, UnsupportedDual
from .rademacher import NormedSpace, RandomConfig, Vector, as_array, rademacher_power_mean

STRATEGIES = ("random", "coordinate_ascent", "exhaustive_small")
EXHAUSTIVE_LIMIT = 100_000


@dataclass(frozen=True)
class OperatorFamily:
    domain: NormedSpace
    codomain: NormedSpace
    matrices: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrices, dtype=float)
        if m.ndim == 2:
            m = m[None]
        if m.ndim != 3 or m.shape[0] == 0:
            raise InvalidParameter("a family needs at least one matrix")
        if m.shape[1:] != (self.codomain.dim, self.domain.dim):
            raise DimensionError(
                f"matrices of shape {m.shape[1:]} do not map dim {self.domain.dim} -> {self.codomain.dim}"
            )
        m.setflags(write=False)
        object.__setattr__(self, "matrices", m)

    def __len__(self):
        return self.matrices.shape[0]

    def scaled(self, c: float) -> "OperatorFamily":
        return OperatorFamily(self.domain, self.codomain, self.matrices * c)

    @classmethod
    def from_dict(cls, data: dict) -> "OperatorFamily":
        """Parse ``{"p": ..., "q": ..., "matrices": [[[...]]]}``; p is the domain exponent."""
        try:
            mats = np.asarray(data["matrices"], dtype=float)
            p, q = _parse_exponent(data["p"]), _parse_exponent(data["q"])
        except KeyError as exc:
            raise InvalidParameter(f"operator family JSON is missing {exc.args[0]!r}") from None
        if mats.ndim != 3:
            raise InvalidParameter("matrices must be a list of row-major matrices")
        return cls(NormedSpace(mats.shape[2], p), NormedSpace(mats.shape[1], q), mats)

    def to_dict(self) -> dict:
        return {
            "p": _exp_json(self.domain.exponent),
            "q": _exp_json(self.codomain.exponent),
            "matrices": self.matrices.tolist(),
        }


def _parse_exponent(v):
    if isinstance(v, str) and v.lower() in ("inf", "infinity"):
        return math.inf
    return float(v)


def _exp_json(p):
    return "inf" if math.isinf(p) else p


@dataclass(frozen=True)
class Assignment:
    operator_indices: tuple[int, ...]
    vectors: np.ndarray

    def __post_init__(self):
        idx = tuple(int(i) for i in self.operator_indices)
        vecs = self.vectors
        if isinstance(vecs, (list, tuple)) and vecs and isinstance(vecs[0], Vector):
            vecs = np.stack([v.coords for v in vecs])
        vecs = np.array(vecs, dtype=float)
        if vecs.ndim != 2 or vecs.shape[0] != len(idx):
            raise DimensionError("an assignment needs one vector per operator index")
        if not np.any(vecs):
            raise DegenerateInput("all assignment vectors are zero")
        vecs.setflags(write=False)
        object.__setattr__(self, "operator_indices", idx)
        object.__setattr__(self, "vectors", vecs)

    def __len__(self):
        return len(self.operator_indices)

    def __eq__(self, other):
        if not isinstance(other, Assignment):
            return NotImplemented
        return self.operator_indices == other.operator_indices and np.array_equal(self.vectors, other.vectors)

    __hash__ = None

    def to_dict(self) -> dict:
        return {"operator_indices": list(self.operator_indices), "vectors": self.vectors.tolist()}


@dataclass(frozen=True)
class RBoundEstimate:
    lower_bound: float
    witness: Assignment
    iterations: int
    strategy: str
    config: RandomConfig
    evaluations: int = 0
    hilbert_cap: float | None = None
    extra: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        return {
            "lower_bound": self.lower_bound,
            "witness": self.witness.to_dict(),
            "iterations": self.iterations,
            "strategy": self.strategy,
            "evaluations": self.evaluations,
            "hilbert_cap": self.hilbert_cap,
            "config": self.config.to_dict(),
        }


# --- operator norms ---------------------------------------------------------


def _unweighted(A, X: NormedSpace, Y: NormedSpace):
    """Rescale ``A`` so the weighted problem becomes an unweighted one."""
    A = np.asarray(A, dtype=float)
    if X.weights is not None and not math.isinf(X.exponent):
        A = A * (X.weight_array() ** (-1.0 / X.exponent))
    if Y.weights is not None and not math.isinf(Y.exponent):
        A = (Y.weight_array() ** (1.0 / Y.exponent))[:, None] * A
    return A


def _dual_exponent(p):
    if p == 1.0:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def _plain_norm(x, p, axis=-1):
    ax = np.abs(x)
    if math.isinf(p):
        return ax.max(axis=axis)
    return (ax**p).sum(axis=axis) ** (1.0 / p)


def operator_norm_closed_form(A, X: NormedSpace, Y: NormedSpace):
    """Exact ``||A||_{X->Y}`` when a closed form exists, else ``None``.

    Works on a stack of matrices (leading axes) as well as a single matrix.
    """
    B = _unweighted(A, X, Y)
    p, q = X.exponent, Y.exponent
    if p == 2.0 and q == 2.0:
        return np.linalg.norm(B, ord=2, axis=(-2, -1))
    if p == 1.0:
        return _plain_norm(B, q, axis=-2).max(axis=-1)
    if math.isinf(q):
        return _plain_norm(B, _dual_exponent(p), axis=-1).max(axis=-1)
    if p == q and B.shape[-1] == B.shape[-2]:
        off = B - np.einsum("...ii->...i", B)[..., None] * np.eye(B.shape[-1])
        if not np.any(off):
            return np.abs(np.einsum("...ii->...i", B)).max(axis=-1)
    return None


def _ratio_batch(A, X, Y, V):
    nx = X.norm(V)
    ny = Y.norm(V @ A.T)
    return np.where(nx > 0, ny / np.where(nx > 0, nx, 1.0), 0.0)


def operator_norm_lower(A, X: NormedSpace, Y: NormedSpace, rng: np.random.Generator,
                        probes: int = 32, refine: int = 100) -> tuple[float, np.ndarray]:
    """Lower estimate of ``||A||_{X->Y}`` with its witness vector.

    Tries every standard basis direction and ``probes`` random Gaussian directions,
    then hill-climbs from the best with shrinking normalized perturbations.
    """
    A = np.asarray(A, dtype=float)
    n = X.dim
    cands = np.vstack([np.eye(n), rng.standard_normal((probes, n))])
    r = _ratio_batch(A, X, Y, cands)
    k = int(np.argmax(r))
    best_v, best = cands[k], float(r[k])
    step = 0.1
    for _ in range(refine):
        if best == 0.0:
            break
        d = rng.standard_normal((4, n))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        trial = best_v + step * np.linalg.norm(best_v) * d
        rt = _ratio_batch(A, X, Y, trial)
        j = int(np.argmax(rt))
        if rt[j] > best:
            best, best_v = float(rt[j]), trial[j]
        else:
            step *= 0.5
            if step < 1e-7:
                step = 0.1
    return best, best_v


def operator_norm(A, X: NormedSpace, Y: NormedSpace, rng=None, **search) -> tuple[float, bool]:
    """``(value, exact)``: closed form where available, otherwise a search lower estimate."""
    exact = operator_norm_closed_form(A, X, Y)
    if exact is not None:
        return float(exact), True
    rng = rng if rng is not None else np.random.default_rng(0)
    value, _ = operator_norm_lower(A, X, Y, rng, **search)
    return value, False


# --- ratios -----------------------------------------------------------------


class _Objective:
    """Ratio evaluator with a cached denominator; counts evaluations."""

    def __init__(self, family: OperatorFamily, config: RandomConfig):
        self.family = family
        self.config = config
        self.evaluations = 0

    def images(self, idx, X):
        return np.einsum("nij,nj->ni", self.family.matrices[list(idx)], X)

    def numerator(self, images):
        return rademacher_power_mean(images, self.family.codomain, 2.0, self.config)

    def denominator(self, X):
        return rademacher_power_mean(X, self.family.domain, 2.0, self.config)

    def ratio_from(self, num, den):
        self.evaluations += 1
        if den <= 0:
            return 0.0
        return math.sqrt(num / den)

    def __call__(self, idx, X):
        return self.ratio_from(self.numerator(self.images(idx, X)), self.denominator(X))


def rbound_ratio(family: OperatorFamily, a: Assignment, config: RandomConfig | None = None) -> float:
    """``(E||sum r_n T_{k_n} x_n||^2)^(1/2) / (E||sum r_n x_n||^2)^(1/2)``."""
    config = config or RandomConfig()
    if a.vectors.shape[1] != family.domain.dim:
        raise DimensionError("assignment vectors do not live in the family's domain")
    if any(i < 0 or i >= len(family) for i in a.operator_indices):
        raise InvalidParameter("operator index out of range")
    obj = _Objective(family, config)
    den = obj.denominator(a.vectors)
    if den <= 0:
        raise DegenerateInput("the denominator moment vanishes")
    return obj.ratio_from(obj.numerator(obj.images(a.operator_indices, a.vectors)), den)


def hilbert_cap(family: OperatorFamily) -> float | None:
    """``max ||T||``, which equals the R-bound when both spaces are Hilbert."""
    if family.domain.is_hilbert and family.codomain.is_hilbert:
        return float(np.max(operator_norm_closed_form(family.matrices, family.domain, family.codomain)))
    return None


def uniform_norm_lower(family: OperatorFamily, config: RandomConfig | None = None,
                       probes: int = 32, refine: int = 100) -> float:
    """Max over operators of a search-based lower estimate of ``||T||``."""
    config = config or RandomConfig()
    rng = np.random.default_rng(config.seed)
    return max(
        operator_norm_lower(M, family.domain, family.codomain, rng, probes, refine)[0]
        for M in family.matrices
    )


def adjoint_family(family: OperatorFamily) -> OperatorFamily:
    for sp in (family.domain, family.codomain):
        if sp.exponent == 1.0 or math.isinf(sp.exponent):
            raise UnsupportedDual("adjoints need exponents strictly between 1 and inf")
    return OperatorFamily(
        family.codomain.dual(), family.domain.dual(), np.transpose(family.matrices, (0, 2, 1))
    )


# --- search -----------------------------------------------------------------


def _single_operator_probes(family, rng, probes, refine):
    best = (-1.0, None, None)
    for k, M in enumerate(family.matrices):
        val, v = operator_norm_lower(M, family.domain, family.codomain, rng, probes, refine)
        if not np.any(v):
            v = np.eye(family.domain.dim)[0]
        if val > best[0]:
            best = (val, (k,), v[None, :])
    return best


def _perturb(rng, x, step, scale):
    d = rng.standard_normal(x.shape[0])
    nd = np.linalg.norm(d)
    if nd > 0:
        d /= nd
    nx = np.linalg.norm(x)
    return x + step * (nx if nx > 0 else scale) * d


def _vector_sweep(obj, rng, idx, X, best, steps):
    """One normalized-perturbation pass over every ``x_n`` with operators fixed."""
    scale = float(np.mean(np.linalg.norm(X, axis=1))) or 1.0
    for n in range(X.shape[0]):
        trial = X.copy()
        trial[n] = _perturb(rng, X[n], steps[n], scale)
        if not np.any(trial):
            continue
        val = obj(idx, trial)
        if val > best:
            best, X = val, trial
        else:
            steps[n] *= 0.5
            if steps[n] < 1e-6:
                steps[n] = 0.1
    return best, X


def _run_random(obj, rng, K, N, dim, iterations):
    best = (-1.0, None, None)
    for _ in range(iterations):
        idx = tuple(int(i) for i in rng.integers(0, K, size=N))
        X = rng.standard_normal((N, dim))
        val = obj(idx, X)
        if val > best[0]:
            best = (val, idx, X)
    return best


def _run_coordinate_ascent(obj, rng, K, N, dim, sweeps):
    best_val, idx, X = _run_random(obj, rng, K, N, dim, 8)
    idx = list(idx)
    steps = [0.1] * N
    for _ in range(sweeps):
        if K > 1:
            den = obj.denominator(X)
            for n in range(N):
                for k in range(K):
                    if k == idx[n]:
                        continue
                    cand = idx.copy()
                    cand[n] = k
                    val = obj.ratio_from(obj.numerator(obj.images(cand, X)), den)
                    if val > best_val:
                        best_val, idx = val, cand
        best_val, X = _vector_sweep(obj, rng, tuple(idx), X, best_val, steps)
    return best_val, tuple(idx), X


def _run_exhaustive(obj, rng, K, N, dim, sweeps):
    if N * K**N > EXHAUSTIVE_LIMIT:
        raise InvalidParameter(f"exhaustive search needs N*|family|^N <= {EXHAUSTIVE_LIMIT}")
    best = (-1.0, None, None)
    # one generator per tuple keeps the search prefix-stable when the budget grows
    base = int(rng.integers(0, 2**63))
    for t, idx in enumerate(itertools.product(range(K), repeat=N)):
        rng = np.random.default_rng([base, t])
        X = rng.standard_normal((N, dim))
        val = obj(idx, X)
        steps = [0.1] * N
        for _ in range(sweeps):
            val, X = _vector_sweep(obj, rng, idx, X, val, steps)
        if val > best[0]:
            best = (val, idx, X)
    return best


_DEFAULT_BUDGET = {"random": 200, "coordinate_ascent": 200, "exhaustive_small": 10}


def rbound_lower(family: OperatorFamily, N: int, config: RandomConfig | None = None,
                 strategy: str = "coordinate_ascent", iterations: int | None = None,
                 restarts: int = 1, probes: int = 32, refine: int = 100) -> RBoundEstimate:
    """Best R-bound ratio found over assignments of length ``N`` (and single-operator probes).

    ``iterations`` is the per-restart budget: random draws for ``random``, sweeps for
    ``coordinate_ascent`` and per-tuple sweeps for ``exhaustive_small``.  Restarts are
    independent tasks seeded from ``config.seed``; the reduce keeps the first maximum.
    """
    if N < 1:
        raise InvalidParameter("N must be >= 1")
    if strategy not in STRATEGIES:
        raise InvalidParameter(f"unknown strategy {strategy!r}")
    config = config or RandomConfig()
    budget = _DEFAULT_BUDGET[strategy] if iterations is None else int(iterations)
    K, dim = len(family), family.domain.dim
    probe_seed, *restart_seeds = np.random.SeedSequence(int(config.seed)).spawn(restarts + 1)

    probe_obj = _Objective(family, config)
    _, k_idx, k_vec = _single_operator_probes(family, np.random.default_rng(probe_seed), probes, refine)
    best_val, best_idx, best_X = probe_obj(k_idx, k_vec), k_idx, k_vec
    evaluations = probe_obj.evaluations

    runner = {
        "random": _run_random,
        "coordinate_ascent": _run_coordinate_ascent,
        "exhaustive_small": _run_exhaustive,
    }[strategy]

    def task(seed_seq):
        obj = _Objective(family, config)
        out = runner(obj, np.random.default_rng(seed_seq), K, N, dim, budget)
        return out, obj.evaluations

    for (val, idx, X), n_eval in ordered_map(task, restart_seeds):
        evaluations += n_eval
        if idx is not None and val > best_val:
            best_val, best_idx, best_X = val, idx, X

    witness = Assignment(best_idx, best_X)
    return RBoundEstimate(
        lower_bound=rbound_ratio(family, witness, config),
        witness=witness,
        iterations=budget,
        strategy=strategy,
        config=config,
        evaluations=evaluations,
        hilbert_cap=hilbert_cap(family),
    )


def as_family(domain: NormedSpace, codomain: NormedSpace, matrices) -> OperatorFamily:
    return OperatorFamily(domain, codomain, np.asarray(matrices, dtype=float))


def assignment_from_vectors(indices, vectors, space: NormedSpace | None = None) -> Assignment:
    if space is not None:
        _, arr = as_array(vectors, space)
        return Assignment(tuple(indices), arr)
    return Assignment(tuple(indices), vectors)
