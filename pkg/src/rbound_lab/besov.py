"""Modulus-of-continuity Besov norms for grid-sampled functions on an interval.

A :class:`GridFunction` holds ``n`` samples at the midpoints of ``n`` equal cells of
``(a, b)`` and is treated as piecewise constant on those cells.  Shifts are integer
multiples of the cell width, so every difference integral is a finite weighted sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameter
from .rademacher import NormedSpace
from .rbound import operator_norm_closed_form

CONVENTIONS = ("restrict", "zero_extend")


@dataclass(frozen=True)
class GridFunction:
    """Samples of ``f: (a, b) -> Z``; ``Z`` is scalars, an l^p space, or matrices between l^p spaces.

    ``operator_norm`` chooses how matrix values are measured: ``"estimate"`` maximizes
    ``||M v|| / ||v||`` over the basis and a fixed set of random probe directions,
    ``"exact"`` uses closed forms (Hilbert, l^1 domain, l^inf codomain, diagonal) when
    they exist and falls back to the estimate otherwise.
    """

    a: float
    b: float
    values: np.ndarray
    value_space: NormedSpace | None = None
    domain: NormedSpace | None = None
    operator_norm: str = "estimate"
    probes: int = 32
    _probe_vectors: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not (self.b > self.a):
            raise InvalidParameter("interval needs a < b")
        v = np.array(self.values, dtype=float)
        if v.shape[0] < 2:
            raise InvalidParameter("a grid function needs at least 2 samples")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if v.ndim == 2 and self.value_space is None:
            object.__setattr__(self, "value_space", NormedSpace(v.shape[1], 2.0))
        if v.ndim == 3:
            if self.value_space is None:
                object.__setattr__(self, "value_space", NormedSpace(v.shape[1], 2.0))
            if self.domain is None:
                object.__setattr__(self, "domain", NormedSpace(v.shape[2], 2.0))
            if self.operator_norm not in ("estimate", "exact"):
                raise InvalidParameter("operator_norm must be 'estimate' or 'exact'")
            rng = np.random.default_rng(0)
            P = np.vstack([np.eye(v.shape[2]), rng.standard_normal((self.probes, v.shape[2]))])
            P = P / self.domain.norm(P)[:, None]
            object.__setattr__(self, "_probe_vectors", P)
        if v.ndim > 3:
            raise InvalidParameter("values must be scalars, vectors or matrices")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def step(self) -> float:
        return (self.b - self.a) / self.n

    @property
    def points(self) -> np.ndarray:
        return self.a + (np.arange(self.n) + 0.5) * self.step

    @classmethod
    def sample(cls, func, a: float, b: float, n: int, **kw) -> "GridFunction":
        h = (b - a) / n
        x = a + (np.arange(n) + 0.5) * h
        return cls(a, b, np.asarray(func(x), dtype=float), **kw)

    def scaled(self, c: float) -> "GridFunction":
        return GridFunction(self.a, self.b, self.values * c, self.value_space, self.domain,
                            self.operator_norm, self.probes)

    def value_norms(self, vals: np.ndarray) -> np.ndarray:
        """Norms of a stack of values (leading axis)."""
        if vals.ndim == 1:
            return np.abs(vals)
        if vals.ndim == 2:
            return self.value_space.norm(vals)
        if self.operator_norm == "exact":
            exact = operator_norm_closed_form(vals, self.domain, self.value_space)
            if exact is not None:
                return np.asarray(exact)
        images = vals @ self._probe_vectors.T  # (m, rows, probes)
        return self.value_space.norm(np.swapaxes(images, 1, 2)).max(axis=1)

    @classmethod
    def from_dict(cls, data: dict) -> "GridFunction":
        try:
            a, b, values = float(data["a"]), float(data["b"]), data["values"]
        except KeyError as exc:
            raise InvalidParameter(f"grid function JSON is missing {exc.args[0]!r}") from None
        kw = {}
        if "exponent" in data:
            arr = np.asarray(values, dtype=float)
            kw["value_space"] = NormedSpace(arr.shape[1], _exp(data["exponent"]))
        if "domain_exponent" in data:
            arr = np.asarray(values, dtype=float)
            kw["domain"] = NormedSpace(arr.shape[2], _exp(data["domain_exponent"]))
            kw["value_space"] = NormedSpace(arr.shape[1], _exp(data.get("codomain_exponent", 2.0)))
        if "operator_norm" in data:
            kw["operator_norm"] = data["operator_norm"]
        return cls(a, b, values, **kw)

    def to_dict(self) -> dict:
        out = {"a": self.a, "b": self.b, "values": self.values.tolist()}
        if self.values.ndim == 2:
            out["exponent"] = _exp_json(self.value_space.exponent)
        if self.values.ndim == 3:
            out["domain_exponent"] = _exp_json(self.domain.exponent)
            out["codomain_exponent"] = _exp_json(self.value_space.exponent)
            out["operator_norm"] = self.operator_norm
        return out


def _exp(v):
    return math.inf if isinstance(v, str) and v.lower().startswith("inf") else float(v)


def _exp_json(p):
    return "inf" if math.isinf(p) else p


@dataclass(frozen=True)
class BesovParams:
    s: float
    p: float = 2.0
    q: float = 2.0
    convention: str = "restrict"
    levels: int = 12

    def __post_init__(self):
        if not 0.0 < self.s < 1.0:
            raise InvalidParameter("smoothness s must lie in (0, 1)")
        if not (self.p >= 1.0 and self.q >= 1.0):
            raise InvalidParameter("p and q must be >= 1")
        if self.convention not in CONVENTIONS:
            raise InvalidParameter(f"unknown convention {self.convention!r}")
        if self.levels < 0:
            raise InvalidParameter("levels must be >= 0")


def _aggregate(norms: np.ndarray, step: float, p: float) -> float:
    if norms.size == 0:
        return 0.0
    top = float(norms.max())
    if math.isinf(p) or top == 0.0:
        return top
    # factor out the max so tiny or huge values do not under/overflow
    return top * float((step * np.sum((norms / top) ** p)) ** (1.0 / p))


def lp_norm(f: GridFunction, p: float) -> float:
    return _aggregate(f.value_norms(f.values), f.step, p)


def difference_profile(f: GridFunction, p: float, convention: str = "restrict") -> np.ndarray:
    """``D[j-1] = max_{h = +-j*step} ||T(h)f - f||_{L^p}`` for ``j = 1..J_max``."""
    if convention not in CONVENTIONS:
        raise InvalidParameter(f"unknown convention {convention!r}")
    n, v, step = f.n, f.values, f.step
    if convention == "restrict":
        out = np.empty(n - 1)
        for j in range(1, n):
            # shifts +j and -j pair the same samples
            out[j - 1] = _aggregate(f.value_norms(v[j:] - v[:-j]), step, p)
        return out
    own = f.value_norms(v)
    out = np.empty(n)
    for j in range(1, n + 1):
        inner = f.value_norms(v[j:] - v[:-j]) if j < n else np.empty(0)
        # h = +j: the last j samples translate to 0; h = -j: the first j do
        right = np.concatenate([inner, own[n - j:]])
        left = np.concatenate([own[:j], inner])
        out[j - 1] = max(_aggregate(right, step, p), _aggregate(left, step, p))
    return out


def _shift_count(f: GridFunction, t: float) -> int:
    return max(1, int(math.floor(t / f.step + 1e-9)))


def modulus_rho(f: GridFunction, t: float, p: float, convention: str = "restrict",
                profile: np.ndarray | None = None) -> float:
    """``sup_{|h| <= t} ||T(h) f - f||_p`` over grid shifts."""
    if not t > 0:
        raise InvalidParameter("t must be positive")
    prof = difference_profile(f, p, convention) if profile is None else profile
    j = min(_shift_count(f, t), prof.size)
    if j == 0:
        return 0.0
    return float(prof[:j].max())


def lambda_besov_norm(f: GridFunction, params: BesovParams) -> float:
    """``||f||_{L^p} + (sum_{j=0..J} (2^{js} rho_p(f, 2^-j))^q ln 2)^(1/q)``."""
    return sum(lambda_besov_parts(f, params))


def lambda_besov_parts(f: GridFunction, params: BesovParams) -> tuple[float, float]:
    """``(L^p part, seminorm part)``."""
    prof = difference_profile(f, params.p, params.convention)
    running = np.maximum.accumulate(prof) if prof.size else prof
    terms = []
    for j in range(params.levels + 1):
        k = min(_shift_count(f, 2.0**-j), running.size)
        rho = float(running[k - 1]) if k > 0 else 0.0
        terms.append(2.0 ** (j * params.s) * rho)
    terms = np.asarray(terms)
    if math.isinf(params.q):
        semi = float(terms.max())
    else:
        top = float(terms.max())
        semi = 0.0 if top == 0.0 else top * float((np.sum((terms / top) ** params.q) * math.log(2.0)) ** (1.0 / params.q))
    return lp_norm(f, params.p), semi


@dataclass
class HolderReport:
    holds: bool
    violations: int
    violating_pairs: list
    besov_norm: float
    lp_norm: float
    fitted_c: float
    alpha: float
    r: float
    A: float

    def to_dict(self) -> dict:
        return {
            "holds": self.holds,
            "violations": self.violations,
            "violating_pairs": self.violating_pairs,
            "besov_norm": self.besov_norm,
            "lp_norm": self.lp_norm,
            "fitted_c": self.fitted_c,
            "alpha": self.alpha,
            "r": self.r,
            "A": self.A,
        }


def holder_hypothesis_check(f: GridFunction, alpha: float, r: float, A: float,
                            decay_weight: bool = False, levels: int = 12,
                            max_listed: int = 20, rtol: float = 1e-12) -> HolderReport:
    """Check ``||f(s+h) - f(s)|| <= A |h|^alpha (1+|s|)^-alpha`` on all grid pairs.

    On a bounded interval the decay factor may be dropped (``decay_weight=False``).
    Also reports ``Lambda^{1/r}_{r,1}`` and ``c = norm / (A + ||f||_{L^r})``.
    """
    if not (1.0 / r < alpha < 1.0):
        raise InvalidParameter("alpha must lie in (1/r, 1)")
    x = f.points
    v = f.values
    count = 0
    listed = []
    decay = (1.0 + np.abs(x)) ** (-alpha) if decay_weight else np.ones(f.n)
    for j in range(1, f.n):
        diff = f.value_norms(v[j:] - v[:-j])
        bound = A * (j * f.step) ** alpha * np.minimum(decay[j:], decay[:-j])
        bad = np.flatnonzero(diff > bound * (1.0 + rtol) + 1e-300)
        count += bad.size
        for k in bad[: max(0, max_listed - len(listed))]:
            listed.append([float(x[k]), float(x[k + j]), float(diff[k]), float(bound[k])])
    params = BesovParams(s=1.0 / r, p=r, q=1.0, levels=levels)
    norm = lambda_besov_norm(f, params)
    lpn = lp_norm(f, r)
    denom = A + lpn
    return HolderReport(count == 0, count, listed, norm, lpn, norm / denom if denom > 0 else 0.0,
                        alpha, r, A)


def embedding_ratio(f: GridFunction, s1: float, p1: float, s2: float, p2: float, q: float,
                    levels: int = 12) -> float:
    """``||f||_{Lambda^{s2}_{p2,q}} / ||f||_{Lambda^{s1}_{p1,q}}`` with ``s1 - 1/p1 = s2 - 1/p2``."""
    if abs((s1 - 1.0 / p1) - (s2 - 1.0 / p2)) > 1e-12 or p1 > p2:
        raise InvalidParameter("need p1 <= p2 and s1 - 1/p1 == s2 - 1/p2")
    big = lambda_besov_norm(f, BesovParams(s1, p1, q, levels=levels))
    small = lambda_besov_norm(f, BesovParams(s2, p2, q, levels=levels))
    return small / big if big > 0 else 0.0
