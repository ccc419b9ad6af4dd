"""Rademacher and Gaussian moments of vector sums in finite-dimensional l^p spaces.

Exact values come from enumerating every sign pattern.  Patterns are walked in
blocks: the low-order signs follow a Gray code (one sign flip per step, so the
running sum is updated with a single vector addition), the high-order signs
index the blocks.  The first sign is pinned to +1 because ``||-s|| = ||s||``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from ._parallel import ordered_map
from .errors import DimensionError, InvalidParameter

_GRAY_BITS = 8
_CHUNK_ELEMENTS = 1 << 22


@dataclass(frozen=True)
class NormedSpace:
    """``dim``-dimensional real space with the (weighted) l^p norm ``(sum w_i |x_i|^p)^(1/p)``."""

    dim: int
    exponent: float = 2.0
    weights: tuple[float, ...] | None = None

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise InvalidParameter(f"dim must be a positive integer, got {self.dim}")
        object.__setattr__(self, "dim", int(self.dim))
        exponent = float(self.exponent)
        if not (exponent >= 1.0):
            raise InvalidParameter(f"exponent must be >= 1 or inf, got {self.exponent}")
        object.__setattr__(self, "exponent", exponent)
        if self.weights is not None:
            w = tuple(float(v) for v in self.weights)
            if len(w) != self.dim:
                raise DimensionError(f"{len(w)} weights for a space of dimension {self.dim}")
            if any(not (v > 0) or math.isinf(v) for v in w):
                raise InvalidParameter("coordinate weights must be positive and finite")
            object.__setattr__(self, "weights", None if all(v == 1.0 for v in w) else w)

    @property
    def is_hilbert(self) -> bool:
        return self.exponent == 2.0

    def weight_array(self) -> np.ndarray:
        if self.weights is None:
            return np.ones(self.dim)
        return np.asarray(self.weights)

    def norm(self, x) -> np.ndarray | float:
        """Norm along the last axis."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise DimensionError(f"vector of length {x.shape[-1]} in a space of dimension {self.dim}")
        p = self.exponent
        ax = np.abs(x)
        if math.isinf(p):
            return ax.max(axis=-1)
        if self.weights is not None:
            w = np.asarray(self.weights)
        else:
            w = None
        if p == 2.0:
            sq = x * x if w is None else w * x * x
            return np.sqrt(sq.sum(axis=-1))
        if p == 1.0:
            return ax.sum(axis=-1) if w is None else (w * ax).sum(axis=-1)
        # scale by the max to avoid overflow for large exponents
        m = ax.max(axis=-1, keepdims=True)
        safe = np.where(m > 0, m, 1.0)
        r = ax / safe
        powered = r**p if w is None else w * r**p
        return (m[..., 0] * powered.sum(axis=-1) ** (1.0 / p))

    def dual(self) -> "NormedSpace":
        """The dual space under the pairing ``sum x_i y_i``."""
        p = self.exponent
        if p == 1.0:
            q = math.inf
        elif math.isinf(p):
            q = 1.0
        else:
            q = p / (p - 1.0)
        weights = None
        if self.weights is not None:
            if math.isinf(p) or p == 1.0:
                raise InvalidParameter("weighted duals are only defined for 1 < p < inf")
            weights = tuple(w ** (1.0 - q) for w in self.weights)
        return NormedSpace(self.dim, q, weights)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "exponent": _exp_to_json(self.exponent),
            "weights": list(self.weights) if self.weights is not None else None,
        }


def _exp_to_json(p):
    return "inf" if math.isinf(p) else p


@dataclass(frozen=True)
class Vector:
    space: NormedSpace
    coords: np.ndarray

    def __post_init__(self):
        c = np.array(self.coords, dtype=float)
        if c.shape != (self.space.dim,):
            raise DimensionError(f"coords of shape {c.shape} for a space of dimension {self.space.dim}")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    def norm(self) -> float:
        return float(self.space.norm(self.coords))


@dataclass(frozen=True)
class RandomConfig:
    seed: int = 0
    samples: int = 100_000
    exact_threshold: int = 20
    partitions: int = 1

    def __post_init__(self):
        if not (0 <= int(self.seed) < 2**64):
            raise InvalidParameter("seed must be a 64-bit unsigned integer")
        if self.samples < 1:
            raise InvalidParameter("samples must be positive")
        if self.exact_threshold > 30:
            raise InvalidParameter("exact_threshold must be <= 30")
        if self.partitions < 1:
            raise InvalidParameter("partitions must be positive")

    def with_seed(self, seed: int) -> "RandomConfig":
        return RandomConfig(seed, self.samples, self.exact_threshold, self.partitions)

    def to_dict(self) -> dict:
        return {
            "seed": int(self.seed),
            "samples": self.samples,
            "exact_threshold": self.exact_threshold,
            "partitions": self.partitions,
        }


@dataclass(frozen=True)
class MomentEstimate:
    value: float
    method: str
    samples: int
    seed: int
    stderr: float = 0.0
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.method not in ("exact", "montecarlo"):
            raise InvalidParameter(f"unknown method {self.method!r}")
        if self.method == "exact" and self.stderr != 0.0:
            raise InvalidParameter("exact estimates carry no standard error")
        if self.method == "montecarlo" and self.samples < 1:
            raise InvalidParameter("Monte Carlo estimates need at least one sample")

    def __float__(self):
        return float(self.value)

    def to_dict(self) -> dict:
        return {
            "value": float(self.value),
            "method": self.method,
            "samples": int(self.samples),
            "seed": int(self.seed),
            "stderr": float(self.stderr),
        }


def as_array(vectors, space: NormedSpace | None = None) -> tuple[NormedSpace, np.ndarray]:
    """Normalize a list of :class:`Vector` (or a 2-D array plus ``space``) to ``(space, array)``."""
    if isinstance(vectors, np.ndarray) or (
        len(vectors) and not isinstance(vectors[0], Vector)
    ):
        if space is None:
            raise InvalidParameter("a raw coordinate array needs an explicit space")
        arr = np.atleast_2d(np.asarray(vectors, dtype=float))
        if arr.shape[1] != space.dim:
            raise DimensionError(f"vectors of length {arr.shape[1]} in a space of dimension {space.dim}")
        return space, arr
    if not len(vectors):
        raise InvalidParameter("at least one vector is required")
    first = vectors[0].space
    for v in vectors:
        if v.space != first:
            raise DimensionError("all vectors must live in the same space")
    if space is not None and space != first:
        raise DimensionError("vectors do not live in the requested space")
    return first, np.stack([v.coords for v in vectors])


# --- exact enumeration -----------------------------------------------------


@lru_cache(maxsize=32)
def _gray_table(bits: int) -> tuple[np.ndarray, np.ndarray]:
    """Flip schedule of the reflected Gray code on ``bits`` bits.

    Returns ``(flipped_bit, new_sign)`` for steps 1..2^bits-1; the walk starts at all +1.
    """
    steps = np.arange(1, 1 << bits, dtype=np.int64)
    low = steps & -steps
    flipped = np.log2(low).astype(np.int64)
    gray = steps ^ (steps >> 1)
    new_sign = np.where((gray >> flipped) & 1, -1.0, 1.0)
    for arr in (flipped, new_sign):
        arr.setflags(write=False)
    return flipped, new_sign


@lru_cache(maxsize=32)
def _sign_matrix(bits: int) -> np.ndarray:
    """All 2^bits sign rows (bit set means -1)."""
    idx = np.arange(1 << bits, dtype=np.int64)[:, None]
    m = np.where((idx >> np.arange(bits)) & 1, -1.0, 1.0)
    m.setflags(write=False)
    return m


def gray_block_sums(vectors: np.ndarray) -> np.ndarray:
    """All ``2^k`` signed sums of the rows of ``vectors`` in Gray-code order."""
    k = vectors.shape[0]
    out = np.empty((1 << k,) + vectors.shape[1:])
    out[0] = vectors.sum(axis=0)
    if k:
        flipped, new_sign = _gray_table(k)
        deltas = 2.0 * new_sign.reshape((-1,) + (1,) * (vectors.ndim - 1)) * vectors[flipped]
        np.cumsum(deltas, axis=0, out=out[1:])
        out[1:] += out[0]
    return out


def signed_sums(vectors: np.ndarray, pin_first: bool = True) -> Iterator[np.ndarray]:
    """Yield chunks of ``sum_n r_n v_n`` over every sign pattern.

    ``vectors`` has shape ``(N, ...)``.  With ``pin_first`` the sign of ``v_0`` is fixed
    to +1 and only ``2^(N-1)`` patterns are produced; for even functionals of the sum
    (norms) the average over these equals the average over all ``2^N`` patterns.
    """
    vectors = np.asarray(vectors, dtype=float)
    if pin_first:
        head, free = vectors[0], vectors[1:]
    else:
        head, free = np.zeros(vectors.shape[1:]), vectors
    n_free = free.shape[0]
    low_bits = min(n_free, _GRAY_BITS)
    low = gray_block_sums(free[:low_bits])
    high = free[low_bits:]
    if high.shape[0] == 0:
        yield low + head
        return
    per_item = int(np.prod(vectors.shape[1:])) or 1
    rows = max(1, _CHUNK_ELEMENTS // (low.shape[0] * per_item))
    n_high = high.shape[0]
    total = 1 << n_high
    flat_high = high.reshape(n_high, -1)
    for start in range(0, total, rows):
        stop = min(total, start + rows)
        idx = np.arange(start, stop, dtype=np.int64)[:, None]
        signs = np.where((idx >> np.arange(n_high)) & 1, -1.0, 1.0)
        base = (signs @ flat_high).reshape((stop - start,) + vectors.shape[1:]) + head
        yield (base[:, None] + low[None]).reshape((-1,) + vectors.shape[1:])


def exact_power_mean(vectors: np.ndarray, norm, p: float) -> float:
    """``E ||sum r_n v_n||^p`` by full enumeration, ``norm`` acting on the last axis."""
    total = 0.0
    count = 0
    for chunk in signed_sums(vectors):
        vals = norm(chunk)
        total += float(np.sum(vals**p)) if p != 1.0 else float(np.sum(vals))
        count += vals.shape[0]
    return total / count


def _power_mean_exact_small(arr: np.ndarray, space: NormedSpace, p: float) -> float:
    n = arr.shape[0]
    if n - 1 <= _GRAY_BITS:
        sums = gray_block_sums(arr[1:]) + arr[0]
        vals = space.norm(sums)
        return float(np.mean(vals**p))
    return exact_power_mean(arr, space.norm, p)


# --- Monte Carlo -------------------------------------------------------------


def _mc_partition(arr, norm, p, samples, seed_seq, kind):
    rng = np.random.default_rng(seed_seq)
    n, dim = arr.shape[0], arr.shape[1:]
    per = max(1, _CHUNK_ELEMENTS // max(1, n * (int(np.prod(dim)) or 1)))
    s1 = 0.0
    s2 = 0.0
    done = 0
    flat = arr.reshape(n, -1)
    while done < samples:
        m = min(per, samples - done)
        if kind == "rademacher":
            coeff = rng.integers(0, 2, size=(m, n)) * 2.0 - 1.0
        else:
            coeff = rng.standard_normal((m, n))
        sums = (coeff @ flat).reshape((m,) + dim)
        z = norm(sums) ** p
        s1 += float(z.sum())
        s2 += float((z * z).sum())
        done += m
    return s1, s2, samples


def montecarlo_power_mean(arr, norm, p, config: RandomConfig, kind="rademacher"):
    """Return ``(mean of ||S||^p, standard error of that mean)``.

    Samples are split into ``config.partitions`` ranges with seeds spawned from
    ``config.seed``; results are merged by sample-weighted averaging.
    """
    parts = config.partitions
    counts = [config.samples // parts + (1 if i < config.samples % parts else 0) for i in range(parts)]
    seeds = np.random.SeedSequence(int(config.seed)).spawn(parts)
    jobs = [(c, s) for c, s in zip(counts, seeds) if c > 0]
    results = ordered_map(lambda job: _mc_partition(arr, norm, p, job[0], job[1], kind), jobs)
    s1 = sum(r[0] for r in results)
    s2 = sum(r[1] for r in results)
    n = sum(r[2] for r in results)
    mean = s1 / n
    var = max(0.0, s2 / n - mean * mean) * (n / (n - 1) if n > 1 else 0.0)
    return mean, math.sqrt(var / n)


def _root(mean: float, se_mean: float, p: float) -> tuple[float, float]:
    value = mean ** (1.0 / p)
    if mean > 0:
        se = se_mean * value / (p * mean)
    else:
        se = 0.0
    return value, se


def _check_p(p):
    if not (1.0 <= p < math.inf):
        raise InvalidParameter(f"moment exponent must lie in [1, inf), got {p}")


def rademacher_power_mean(arr: np.ndarray, space: NormedSpace, p: float, config: RandomConfig) -> float:
    """Fast path used inside search loops: exact or MC mean of ``||sum r_n x_n||^p``."""
    if arr.shape[0] <= config.exact_threshold:
        return _power_mean_exact_small(arr, space, p)
    mean, _ = montecarlo_power_mean(arr, space.norm, p, config)
    return mean


def rademacher_moment(vectors, p: float = 2.0, config: RandomConfig | None = None,
                      space: NormedSpace | None = None) -> MomentEstimate:
    """``(E||sum_n r_n x_n||^p)^(1/p)`` for a Rademacher sequence ``r_n``.

    Exact when ``N <= config.exact_threshold``, Monte Carlo otherwise.
    """
    _check_p(p)
    config = config or RandomConfig()
    space, arr = as_array(vectors, space)
    if arr.shape[0] <= config.exact_threshold:
        mean = _power_mean_exact_small(arr, space, p)
        return MomentEstimate(mean ** (1.0 / p), "exact", 1 << (arr.shape[0] - 1), int(config.seed))
    mean, se = montecarlo_power_mean(arr, space.norm, p, config)
    value, stderr = _root(mean, se, p)
    return MomentEstimate(value, "montecarlo", config.samples, int(config.seed), stderr)


def gaussian_moment(vectors, p: float = 2.0, config: RandomConfig | None = None,
                    space: NormedSpace | None = None) -> MomentEstimate:
    """``(E||sum_n g_n x_n||^p)^(1/p)`` for independent standard Gaussians ``g_n``.

    For an l^2 space and ``p == 2`` the exact value ``(sum ||x_n||^2)^(1/2)`` is returned.
    """
    _check_p(p)
    config = config or RandomConfig()
    space, arr = as_array(vectors, space)
    if space.is_hilbert and p == 2.0:
        value = math.sqrt(float(np.sum(space.norm(arr) ** 2)))
        return MomentEstimate(value, "exact", 0, int(config.seed))
    mean, se = montecarlo_power_mean(arr, space.norm, p, config, kind="gaussian")
    value, stderr = _root(mean, se, p)
    return MomentEstimate(value, "montecarlo", config.samples, int(config.seed), stderr)


def random_vectors(rng: np.random.Generator, n: int, space: NormedSpace) -> list[Vector]:
    """Coordinates drawn uniformly on [-1, 1]."""
    return [Vector(space, rng.uniform(-1.0, 1.0, space.dim)) for _ in range(n)]


def vectors_from(space: NormedSpace, rows: Sequence[Sequence[float]]) -> list[Vector]:
    return [Vector(space, np.asarray(r, dtype=float)) for r in rows]
