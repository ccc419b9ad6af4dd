"""Discretized semigroups, fractional domains and the translation sharpness experiment."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import optimize, stats

from .besov import GridFunction
from .errors import InternalError, InvalidParameter
from .rademacher import NormedSpace, RandomConfig, Vector, signed_sums
from .rbound import OperatorFamily, rbound_lower

MULTIPLIERS = ("bessel", "generator")


@dataclass(frozen=True)
class DiagonalSemigroup:
    """``T(t) = diag(exp(-rates * t))`` on ``space``; the generator is ``A = -diag(rates)``."""

    rates: np.ndarray
    space: NormedSpace | None = None

    def __post_init__(self):
        r = np.array(self.rates, dtype=float).reshape(-1)
        if r.size == 0 or not np.all(r > 0) or not np.all(np.isfinite(r)):
            raise InvalidParameter("rates must be positive and finite")
        r.setflags(write=False)
        object.__setattr__(self, "rates", r)
        if self.space is None:
            object.__setattr__(self, "space", NormedSpace(r.size, 2.0))
        elif self.space.dim != r.size:
            raise InvalidParameter("space dimension must match the number of rates")

    @property
    def omega(self) -> float:
        return float(self.rates.min())


@dataclass(frozen=True)
class TranslationGroup:
    """Left translations ``T(t)f(s) = f(s + t)`` on a periodic grid of ``n`` points."""

    circumference: float
    n: int
    p: float = 2.0

    def __post_init__(self):
        if not self.circumference > 0:
            raise InvalidParameter("circumference must be positive")
        if self.n < 2 or self.n & (self.n - 1):
            raise InvalidParameter("n must be a power of 2")
        if not 1.0 <= self.p < math.inf:
            raise InvalidParameter("p must lie in [1, inf)")

    @property
    def dx(self) -> float:
        return self.circumference / self.n

    @property
    def points(self) -> np.ndarray:
        return np.arange(self.n) * self.dx

    @property
    def frequencies(self) -> np.ndarray:
        """``xi_j = 2 pi j / circumference`` in FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)

    def lp_norm(self, x: np.ndarray) -> np.ndarray | float:
        """Grid ``L^p`` norm along the last axis."""
        return (np.sum(np.abs(x) ** self.p, axis=-1) * self.dx) ** (1.0 / self.p)

    def offset(self, t: float) -> int:
        return int(round(t / self.dx))


def _coords(x) -> np.ndarray:
    return x.coords if isinstance(x, Vector) else np.asarray(x, dtype=float)


def semigroup_apply(g, t: float, x):
    """``T(t) x``; diagonal semigroups need ``t >= 0``, translations accept any real ``t``."""
    v = _coords(x)
    if isinstance(g, DiagonalSemigroup):
        if t < 0:
            raise InvalidParameter("diagonal semigroups are only defined for t >= 0")
        out = np.exp(-g.rates * t) * v
        return Vector(g.space, out) if isinstance(x, Vector) else out
    if isinstance(g, TranslationGroup):
        return np.roll(v, -g.offset(t), axis=-1)
    raise InvalidParameter(f"unsupported semigroup {type(g).__name__}")


def fractional_power_apply(g, alpha: float, x, kind: str = "bessel"):
    """Diagonal: ``rates^alpha * x``.  Translation: Fourier multiplier.

    ``kind="bessel"`` uses ``(1 + xi^2)^(alpha/2)``; ``kind="generator"`` uses the
    principal branch of ``(-i xi)^alpha``, the symbol of ``(-A)^alpha`` for ``A = d/ds``.
    """
    if not 0.0 < alpha <= 1.0 and not isinstance(g, DiagonalSemigroup):
        raise InvalidParameter("alpha must lie in (0, 1]")
    v = _coords(x)
    if isinstance(g, DiagonalSemigroup):
        if not alpha > 0:
            raise InvalidParameter("alpha must be positive")
        out = g.rates**alpha * v
        return Vector(g.space, out) if isinstance(x, Vector) else out
    if isinstance(g, TranslationGroup):
        if kind not in MULTIPLIERS:
            raise InvalidParameter(f"unknown multiplier {kind!r}")
        xi = g.frequencies
        if kind == "bessel":
            symbol = (1.0 + xi**2) ** (alpha / 2.0)
        else:
            symbol = (-1j * xi + 0j) ** alpha
        return np.fft.ifft(symbol * np.fft.fft(v, axis=-1), axis=-1).real
    raise InvalidParameter(f"unsupported semigroup {type(g).__name__}")


def graph_norm(g: TranslationGroup, alpha: float, x, kind: str = "bessel") -> float:
    """``||x||_p + ||multiplier x||_p``."""
    v = _coords(x)
    return float(g.lp_norm(v) + g.lp_norm(fractional_power_apply(g, alpha, v, kind)))


# --- fractional-domain experiment for diagonal semigroups --------------------


def holder_constant(alpha: float) -> float:
    """``sup_{u > 0} u^-alpha (1 - e^-u)``."""
    res = optimize.minimize_scalar(lambda s: -math.exp(-alpha * s) * -math.expm1(-math.exp(s)),
                                   bounds=(-20.0, 20.0), method="bounded", options={"xatol": 1e-12})
    return float(-res.fun)


@dataclass
class SemigroupReport:
    lower_bound: float
    hilbert_cap: float | None
    embedding_norm: float
    holder_certificate: float
    holder_bound: float
    times: list
    N: int
    witness: dict

    def to_dict(self) -> dict:
        return {
            "lower_bound": self.lower_bound,
            "hilbert_cap": self.hilbert_cap,
            "embedding_norm": self.embedding_norm,
            "holder_certificate": self.holder_certificate,
            "holder_bound": self.holder_bound,
            "times": list(self.times),
            "N": self.N,
            "witness": self.witness,
        }


def fractional_family(g: DiagonalSemigroup, alpha: float, times: Sequence[float]) -> tuple[OperatorFamily, float]:
    """``{T(t) i_alpha / ||i_alpha||}`` with the fractional-domain norm ``||(1 + (-A)^alpha) x||``.

    Coordinates are rescaled so the domain is ``g.space`` itself: ``T(t) i_alpha`` becomes
    ``diag(exp(-rates t) / (1 + rates^alpha))``.
    """
    scale = 1.0 / (1.0 + g.rates**alpha)
    emb = float(scale.max())
    mats = np.stack([np.diag(np.exp(-g.rates * t) * scale / emb) for t in times])
    return OperatorFamily(g.space, g.space, mats), emb


def thm_semigroup_experiment(g: DiagonalSemigroup, alpha: float, p: float, q: float, N: int,
                             times: Sequence[float], config: RandomConfig | None = None,
                             strategy: str = "coordinate_ascent", iterations: int | None = None,
                             restarts: int = 1) -> SemigroupReport:
    """R-bound lower estimate for ``{T(t) i_alpha : t in times}`` plus the Holder certificate.

    ``p`` and ``q`` are the type and cotype exponents assumed for the space.
    """
    if not alpha > 1.0 / p - 1.0 / q:
        raise InvalidParameter("need alpha > 1/p - 1/q")
    if len(times) == 0 or any(t < 0 for t in times):
        raise InvalidParameter("times must be a non-empty list of non-negative reals")
    config = config or RandomConfig()
    fam, emb = fractional_family(g, alpha, times)
    est = rbound_lower(fam, N, config, strategy=strategy, iterations=iterations, restarts=restarts)
    # ||T(t) i - i|| from D((-A)^alpha) with the homogeneous norm, diagonal so the max is exact
    cert = 0.0
    for t in times:
        if t > 0:
            cert = max(cert, float(np.max(-np.expm1(-g.rates * t) / g.rates**alpha)) * t**-alpha)
    return SemigroupReport(est.lower_bound, est.hilbert_cap, emb, cert, holder_constant(alpha),
                           list(map(float, times)), N, est.witness.to_dict())


# --- sharpness of the translation example ------------------------------------


def default_bump(t: np.ndarray) -> np.ndarray:
    """``exp(-1/(t(1-t)))`` on ``(0, 1)``, zero elsewhere."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    m = (t > 0) & (t < 1)
    out[m] = np.exp(-1.0 / (t[m] * (1.0 - t[m])))
    return out


def profile_from_grid(psi: GridFunction) -> Callable[[np.ndarray], np.ndarray]:
    """Linear interpolation of a scalar GridFunction, zero outside ``(a, b)``."""
    if psi.values.ndim != 1:
        raise InvalidParameter("the bump profile must be scalar valued")
    if not (psi.a >= 0.0 and psi.b <= 1.0):
        raise InvalidParameter("the bump profile must be supported in (0, 1)")
    scale = float(np.max(np.abs(psi.values))) or 1.0
    if abs(psi.values[0]) > 1e-8 * scale or abs(psi.values[-1]) > 1e-8 * scale:
        raise InvalidParameter("the bump profile must vanish at its support boundary")
    xs = np.r_[psi.a, psi.points, psi.b]
    ys = np.r_[0.0, psi.values, 0.0]
    return lambda t: np.interp(t, xs, ys, left=0.0, right=0.0)


@dataclass(frozen=True)
class SharpnessConfig:
    p: float = 1.0
    alpha: float = 0.75
    N_values: tuple[int, ...] = (4, 8, 16)
    n: int = 2**14
    circumference: float = 2.0
    multiplier: str = "bessel"
    seed: int = 0
    psi: GridFunction | None = field(default=None, compare=False)

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise InvalidParameter("alpha must lie in (0, 1)")
        if not 1.0 <= self.p < math.inf:
            raise InvalidParameter("p must lie in [1, inf)")
        if self.circumference < 2.0:
            raise InvalidParameter("circumference must be at least 2")
        if len(self.N_values) < 2:
            raise InvalidParameter("need at least two N values for a slope")
        if any(N < 1 or N > 20 for N in self.N_values):
            raise InvalidParameter("N values must lie in [1, 20] for exact enumeration")
        if self.multiplier not in MULTIPLIERS:
            raise InvalidParameter(f"unknown multiplier {self.multiplier!r}")
        object.__setattr__(self, "N_values", tuple(int(N) for N in self.N_values))

    @property
    def expected_slope(self) -> float:
        return 1.0 / self.p - 0.5 - self.alpha


@dataclass
class SharpnessReport:
    rows: list
    slope: float
    intercept: float
    expected_slope: float
    verdict: str
    psi_norm: float
    config: dict

    def to_dict(self) -> dict:
        return {
            "rows": self.rows,
            "slope": self.slope,
            "intercept": self.intercept,
            "expected_slope": self.expected_slope,
            "verdict": self.verdict,
            "psi_norm": self.psi_norm,
            "config": self.config,
        }

    def table(self) -> list[dict]:
        return [
            {
                "N": r["N"],
                "Q_N": r["Q_N"],
                "log_fit": r["log_fit"],
                "expected_slope": self.expected_slope,
                "verdict": self.verdict,
            }
            for r in self.rows
        ]


def _numerator(g: TranslationGroup, translates: np.ndarray, tol: float) -> tuple[float, float]:
    """``(E||sum r_n g_n||_p^2)^(1/2)`` by enumeration, plus the relative spread over patterns."""
    total, count = 0.0, 0
    lo, hi = math.inf, 0.0
    for chunk in signed_sums(translates):
        vals = g.lp_norm(chunk)
        total += float(np.sum(vals**2))
        count += vals.size
        lo, hi = min(lo, float(vals.min())), max(hi, float(vals.max()))
    spread = (hi - lo) / hi if hi > 0 else 0.0
    if spread > tol:
        raise InternalError(f"numerator depends on the sign pattern (spread {spread:.3e})")
    return math.sqrt(total / count), spread


def sharpness_experiment(cfg: SharpnessConfig) -> SharpnessReport:
    """``Q_N = ||sum r_n T(n/N) psi_N||_{L^2(L^p)} / ||sum r_n psi_N||_{L^2(H^{alpha,p})}`` and its slope in ``N``."""
    g = TranslationGroup(cfg.circumference, cfg.n, cfg.p)
    psi = default_bump if cfg.psi is None else profile_from_grid(cfg.psi)
    x = g.points
    psi_norm = float(g.lp_norm(psi(x)))
    rows = []
    for N in cfg.N_values:
        steps = cfg.n / (cfg.circumference * N)
        if abs(steps - round(steps)) > 1e-9:
            raise InvalidParameter(f"N={N} does not divide the grid: 1/N is not a multiple of the step")
        f = psi(N * x)
        translates = np.stack([semigroup_apply(g, k / N, f) for k in range(N)])
        num, spread = _numerator(g, translates, 1e-10)
        # sum r_n f_n = (sum r_n) psi_N, so the denominator moment factors exactly
        signs = np.ones((N, 1))
        coeff = math.sqrt(float(np.mean(np.concatenate([c[:, 0] ** 2 for c in signed_sums(signs)]))))
        d_norm = graph_norm(g, cfg.alpha, f, cfg.multiplier)
        den = coeff * d_norm
        rows.append({
            "N": N,
            "numerator": num,
            "numerator_p_power": num**cfg.p,
            "numerator_spread": spread,
            "denominator": den,
            "graph_norm": d_norm,
            "Q_N": num / den,
        })
    logN = np.log([r["N"] for r in rows])
    logQ = np.log([r["Q_N"] for r in rows])
    fit = stats.linregress(logN, logQ)
    for r, ln in zip(rows, logN):
        r["log_fit"] = float(fit.intercept + fit.slope * ln)
    verdict = "unbounded" if fit.slope > 0 else "R-bounded-consistent"
    echo = {
        "p": cfg.p,
        "alpha": cfg.alpha,
        "N_values": list(cfg.N_values),
        "n": cfg.n,
        "circumference": cfg.circumference,
        "multiplier": cfg.multiplier,
        "seed": cfg.seed,
        "psi": "default" if cfg.psi is None else cfg.psi.to_dict(),
    }
    return SharpnessReport(rows, float(fit.slope), float(fit.intercept), cfg.expected_slope, verdict,
                           psi_norm, echo)


def dilation_scaling_check(alpha: float, c: int, p: float = 1.0, n: int = 2**16,
                           circumference: float = 16.0) -> dict:
    """Compare ``||(-A)^alpha psi_c||_p`` with ``c^alpha ||[(-A)^alpha psi]_c||_p = c^(alpha - 1/p) ||(-A)^alpha psi||_p``.

    ``(-A)^alpha psi`` decays like ``|s|^(-1-alpha)``, so the periodic grid needs a wide
    circumference; at circumference 2 the tail wraps around and the error reaches ~10%.
    """
    g = TranslationGroup(circumference, n, p)
    x = g.points
    lhs = float(g.lp_norm(fractional_power_apply(g, alpha, default_bump(c * x), "generator")))
    base = float(g.lp_norm(fractional_power_apply(g, alpha, default_bump(x), "generator")))
    rhs = c ** (alpha - 1.0 / p) * base
    return {"lhs": lhs, "rhs": rhs, "rel_error": abs(lhs - rhs) / rhs}
