"""The acceptance criteria as runnable checks.

Each check compares the package against an oracle computed here directly with
numpy (SVDs, explicit sums, brute-force sign enumeration) and returns a
:class:`CriterionResult`.  ``quick`` shrinks trial counts; tolerances never change.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .besov import BesovParams, GridFunction, lambda_besov_norm, modulus_rho
from .gamma import random_gamma_operators, verify_gamma_multiplier
from .integral import OperatorValuedStep, family_from_functions, unit_ball_samples
from .measure import DiscreteMeasureSpace, StepFunction, dilate, lorentz_norm, lp_norm, sample_on_grid
from .rademacher import NormedSpace, RandomConfig
from .rbound import Assignment, OperatorFamily, rbound_lower, rbound_ratio
from .semigroup import SharpnessConfig, default_bump, sharpness_experiment
from .typecotype import basis_probe, converse_check, cotype_constant_lower, cotype_ratio, type_constant_lower


@dataclass
class CriterionResult:
    id: int
    name: str
    passed: bool
    metrics: dict = field(default_factory=dict)
    limit_s: float = math.inf
    seconds: float = 0.0

    @property
    def in_time(self) -> bool:
        return self.seconds < self.limit_s

    def to_dict(self) -> dict:
        # runtimes are left out so reports stay byte-reproducible
        return {"id": self.id, "name": self.name, "passed": self.passed, "metrics": self.metrics,
                "limit_s": self.limit_s}


# --- independent oracles -----------------------------------------------------


def _brute_l2_moment(vectors: np.ndarray, norm: Callable) -> float:
    """``(E||sum r_n v_n||^2)^(1/2)`` over all ``2^N`` sign patterns."""
    total = 0.0
    patterns = list(itertools.product((-1.0, 1.0), repeat=vectors.shape[0]))
    for signs in patterns:
        total += norm(np.asarray(signs) @ vectors) ** 2
    return math.sqrt(total / len(patterns))


def _plain_norm(x, p):
    x = np.abs(np.asarray(x, dtype=float))
    return float(x.max()) if math.isinf(p) else float(np.sum(x**p) ** (1.0 / p))


def _exact_operator_norm(M, p, q):
    """Closed forms for l^2 -> l^2, l^1 -> l^q and l^p -> l^inf."""
    if p == 2 and q == 2:
        return float(np.linalg.svd(M, compute_uv=False)[0])
    if p == 1:
        return max(_plain_norm(col, q) for col in M.T)
    if math.isinf(q):
        pd = math.inf if p == 1 else (1.0 if math.isinf(p) else p / (p - 1.0))
        return max(_plain_norm(row, pd) for row in M)
    raise ValueError("no closed form")


def _linear_modulus(t, p):
    """``sup_{0 < h <= t} h (1 - h)^(1/p)`` for ``f(r) = r`` on ``(0, 1)``."""
    if math.isinf(p):
        return min(t, 1.0)
    h_star = p / (p + 1.0)
    h = min(t, h_star)
    return h * (1.0 - h) ** (1.0 / p)


def linear_besov_oracle(s, p, q, levels=12):
    lp_part = 1.0 if math.isinf(p) else (1.0 / (p + 1.0)) ** (1.0 / p)
    terms = np.array([2.0 ** (j * s) * _linear_modulus(2.0**-j, p) for j in range(levels + 1)])
    semi = terms.max() if math.isinf(q) else (np.sum(terms**q) * math.log(2.0)) ** (1.0 / q)
    return lp_part + semi


def literal_linear_closed_form(levels=12):
    """The dyadic sum with ``rho(2^-j) = 2^-j (1 - 2^-j)`` at every level, including ``j = 0``."""
    return sum(2.0 ** (j / 2) * 2.0**-j * (1 - 2.0**-j) * math.log(2.0) for j in range(levels + 1)) + 0.5


# --- criteria ----------------------------------------------------------------


def check_lorentz_identity(quick=False) -> CriterionResult:
    rng = np.random.default_rng(101)
    worst_pp, worst_forms = 0.0, 0.0
    for _ in range(200):
        n = int(rng.integers(1, 25))
        w = rng.uniform(0.1, 2.0, n)
        v = rng.standard_normal(n)
        v[rng.uniform(size=n) < 0.2] = 0.0
        if n > 2:
            v[1] = v[0]  # ties exercise the merge
        f = StepFunction(DiscreteMeasureSpace(w), v)
        for p in (1.0, 1.5, 2.0, 3.0):
            direct = float(np.sum(w * np.abs(v) ** p) ** (1.0 / p))
            for form in ("rearrangement", "distribution"):
                val = lorentz_norm(f, p, p, form)
                worst_pp = max(worst_pp, abs(val - direct) / max(direct, 1e-300))
            for q in (1.0, 2.0, 3.0):
                a, b = lorentz_norm(f, p, q, "rearrangement"), lorentz_norm(f, p, q, "distribution")
                worst_forms = max(worst_forms, abs(a - b) / max(a, 1e-300))
    ok = worst_pp <= 1e-10 and worst_forms <= 1e-10
    return CriterionResult(1, "Lorentz L^{p,p} = L^p and form agreement", ok,
                           {"max_rel_error_pp": worst_pp, "max_rel_error_forms": worst_forms, "functions": 200},
                           limit_s=1.0)


def check_dilation_law(quick=False) -> CriterionResult:
    phi = lambda t: default_bump((np.asarray(t) + 1.0) / 2.0)  # noqa: E731
    worst = 0.0
    rows = []
    for r in (2.0, 4.0):
        rd = r / (r - 1.0)
        base = lorentz_norm(sample_on_grid(phi, -1.0, 1.0, 2**12), rd, 1.0)
        for n in (1, 2, 3):
            val = lorentz_norm(sample_on_grid(dilate(phi, 2.0**n, 2.0**n), -1.0, 1.0, 2**12), rd, 1.0)
            ratio = val / base
            err = abs(ratio - 2.0 ** (n / r)) / 2.0 ** (n / r)
            worst = max(worst, err)
            rows.append({"r": r, "n": n, "ratio": ratio, "expected": 2.0 ** (n / r)})
    return CriterionResult(2, "rearrangement dilation law", worst <= 0.02, {"max_rel_error": worst, "rows": rows},
                           limit_s=5.0)


def check_hilbert_cap(quick=False) -> CriterionResult:
    rng = np.random.default_rng(303)
    n_fam = 20 if quick else 100
    X = NormedSpace(3, 2.0)
    worst_excess = -math.inf
    checked = 0
    brute_gap = 0.0
    for i in range(n_fam):
        mats = rng.standard_normal((2, 3, 3))
        cap = max(float(np.linalg.svd(M, compute_uv=False)[0]) for M in mats)
        fam = OperatorFamily(X, X, mats)
        N = 1 + i % 8
        est = rbound_lower(fam, N, RandomConfig(seed=i), "coordinate_ascent", iterations=10)
        worst_excess = max(worst_excess, est.lower_bound - cap)
        checked += est.evaluations
        for _ in range(5):
            Nn = int(rng.integers(1, 9))
            a = Assignment(tuple(int(k) for k in rng.integers(0, 2, Nn)), rng.uniform(-1, 1, (Nn, 3)))
            val = rbound_ratio(fam, a)
            worst_excess = max(worst_excess, val - cap)
            checked += 1
            if i < 10:
                num = _brute_l2_moment(np.stack([mats[k] @ x for k, x in zip(a.operator_indices, a.vectors)]),
                                       np.linalg.norm)
                den = _brute_l2_moment(a.vectors, np.linalg.norm)
                brute_gap = max(brute_gap, abs(val - num / den))
    worst_single = 0.0
    for i in range(n_fam):
        d = 2 + i % 2
        M = rng.standard_normal((d, d))
        sp = NormedSpace(d, 2.0)
        est = rbound_lower(OperatorFamily(sp, sp, M[None]), 4, RandomConfig(seed=i), iterations=10)
        sigma = float(np.linalg.svd(M, compute_uv=False)[0])
        worst_single = max(worst_single, (sigma - est.lower_bound) / sigma)
    ok = worst_excess <= 1e-9 and worst_single <= 0.01 and brute_gap <= 1e-12
    return CriterionResult(3, "Hilbert R-bound cap", ok,
                           {"families": n_fam, "assignments_checked": checked, "max_excess_over_cap": worst_excess,
                            "max_singleton_shortfall": worst_single, "max_brute_force_gap": brute_gap},
                           limit_s=30.0)


def check_type_cotype(quick=False) -> CriterionResult:
    cfg = RandomConfig()
    H = NormedSpace(4, 2.0)
    worst = 0.0
    rng = np.random.default_rng(404)
    for N in range(1, 11):
        t = type_constant_lower(H, 2.0, N, cfg, restarts=1, sweeps=3)
        c = cotype_constant_lower(H, 2.0, N, cfg, restarts=1, sweeps=3)
        worst = max(worst, abs(t.constant_lower - 1.0), abs(c.constant_lower - 1.0))
        Xr = rng.uniform(-1, 1, (N, 4))
        worst = max(worst, abs(cotype_ratio(H, Xr, 2.0, cfg) - 1.0))
    lq = {}
    linf = {}
    for N in (4, 9, 16):
        lq[N] = cotype_ratio(NormedSpace(N, 4.0), basis_probe(NormedSpace(N, 4.0), N), 4.0, cfg)
        linf[N] = cotype_ratio(NormedSpace(N, math.inf), basis_probe(NormedSpace(N, math.inf), N), 2.0, cfg)
    # l^4_N: ||sum +-e_n||_4 = N^(1/4) for every pattern; l^inf_N: ||sum +-e_n||_inf = 1
    ok = (worst <= 1e-9 and all(abs(v - 1.0) <= 1e-12 for v in lq.values())
          and all(abs(linf[N] - math.sqrt(N)) <= 1e-12 * math.sqrt(N) for N in linf))
    return CriterionResult(4, "type/cotype exactness", ok,
                           {"hilbert_max_deviation": worst, "l4_basis_ratio": {str(k): v for k, v in lq.items()},
                            "linf_basis_ratio": {str(k): v for k, v in linf.items()}},
                           limit_s=10.0)


def check_converse(quick=False) -> CriterionResult:
    rng = np.random.default_rng(505)
    X = NormedSpace(3, 2.0)
    worst = 0.0
    for N in range(1, 9):
        for q in (2.0, 3.0, 4.0):
            vecs = rng.uniform(-1, 1, (N, 3))
            rep = converse_check(vecs, q, space=X)
            rhs = float(np.sum(np.linalg.norm(vecs, axis=1) ** q))
            worst = max(worst, abs(rep["lhs"] - rhs) / rhs)
    return CriterionResult(5, "indicator converse construction", worst <= 1e-10, {"max_rel_error": worst},
                           limit_s=5.0)


_PAIRS = ((2.0, 2.0), (1.0, 3.0), (1.0, 2.0), (3.0, math.inf), (2.0, math.inf))


def check_l1_cap(quick=False) -> CriterionResult:
    trials = 100 if quick else 1000
    worst = 0.0
    for t in range(trials):
        rng = np.random.default_rng([606, t])
        p, q = _PAIRS[t % len(_PAIRS)]
        atoms = int(rng.integers(1, 5))
        S = DiscreteMeasureSpace(rng.uniform(0.2, 1.0, atoms))
        mats = rng.standard_normal((atoms, 2, 2))
        T = OperatorValuedStep(S, NormedSpace(2, p), NormedSpace(2, q), mats)
        cap = 2.0 * float(np.sum(S.weights * [_exact_operator_norm(M, p, q) for M in mats]))
        fs = unit_ball_samples(S, math.inf, 4, rng)
        fam = family_from_functions(T, fs)
        est = rbound_lower(fam, 4, RandomConfig(seed=t), "random", iterations=5, probes=4, refine=5)
        worst = max(worst, est.lower_bound / cap)
    return CriterionResult(6, "R-bound of {T_f : ||f||_inf <= 1} below 2 * L^1 cap", worst <= 1.0,
                           {"trials": trials, "max_bound_over_cap": worst}, limit_s=60.0)


def check_gamma(quick=False) -> CriterionResult:
    trials = 20 if quick else 100
    worst = 0.0
    gap = 0.0
    for t in range(trials):
        rng = np.random.default_rng([707, t])
        N = 1 + t % 8
        psis = random_gamma_operators(rng, N, 3, 3)
        fs = rng.uniform(-1, 1, (N, 3))
        rep = verify_gamma_multiplier(psis, fs, RandomConfig(seed=t))
        worst = max(worst, rep.ratio)
        # oracle: LHS^2 = sum ||Psi_n f_n||^2, RHS^2 = max||f||^2 sum ||Psi_n||_F^2
        lhs = math.sqrt(sum(np.linalg.norm(p.matrix @ f) ** 2 for p, f in zip(psis, fs)))
        rhs = np.max(np.linalg.norm(fs, axis=1)) * math.sqrt(sum(np.sum(p.matrix**2) for p in psis))
        gap = max(gap, abs(rep.ratio - lhs / rhs))
    ok = worst <= 1.0 + 1e-9 and gap <= 1e-12
    return CriterionResult(7, "gamma multiplier constant in Hilbert codomain", ok,
                           {"trials": trials, "max_ratio": worst, "max_oracle_gap": gap}, limit_s=30.0)


def check_sharpness(quick=False) -> CriterionResult:
    out = {}
    ok = True
    for alpha in (0.25, 0.75):
        rep = sharpness_experiment(SharpnessConfig(p=1.0, alpha=alpha, N_values=(4, 8, 16), n=2**14))
        expected = 1.0 - 0.5 - alpha
        num_err = max(abs(r["numerator_p_power"] - rep.psi_norm) / rep.psi_norm for r in rep.rows)
        within = abs(rep.slope - expected) <= 0.1
        ok &= within and num_err <= 1e-10
        out[str(alpha)] = {"slope": rep.slope, "expected": expected, "verdict": rep.verdict,
                           "numerator_rel_error": num_err}
    ok &= out["0.25"]["slope"] > 0 > out["0.75"]["slope"]
    return CriterionResult(8, "sharpness slope reproduction", bool(ok), out, limit_s=300.0)


def check_besov(quick=False) -> CriterionResult:
    n = 2**12
    worst_const, worst_lin, worst_zero = 0.0, 0.0, 0.0
    rows = []
    for c in (-2.0, 0.5, 3.0):
        f = GridFunction.sample(lambda x, c=c: np.full_like(x, c), 0.0, 1.0, n)
        for s, p, q in ((0.5, 1.0, 1.0), (0.25, 2.0, 2.0), (0.75, 3.0, math.inf)):
            worst_const = max(worst_const, abs(lambda_besov_norm(f, BesovParams(s, p, q)) - abs(c)) / abs(c))
        for p in (1.0, 2.0):
            for t in (0.25, 0.5, 2.0):
                exact = abs(c) * min(t, 1.0) ** (1.0 / p)
                worst_zero = max(worst_zero, abs(modulus_rho(f, t, p, "zero_extend") - exact) / exact)
    lin = GridFunction.sample(lambda x: x, 0.0, 1.0, n)
    for s, p, q in ((0.5, 1.0, 1.0), (0.25, 2.0, 2.0), (0.75, 2.0, 1.0), (0.5, 3.0, math.inf)):
        val = lambda_besov_norm(lin, BesovParams(s, p, q))
        oracle = linear_besov_oracle(s, p, q)
        rows.append({"s": s, "p": p, "q": q, "value": val, "oracle": oracle})
        worst_lin = max(worst_lin, abs(val - oracle) / oracle)
    literal = literal_linear_closed_form()
    ok = worst_const <= 0.01 and worst_lin <= 0.01 and worst_zero <= 0.01
    return CriterionResult(9, "Besov closed forms", ok,
                           {"max_rel_error_constant": worst_const, "max_rel_error_linear": worst_lin,
                            "max_rel_error_zero_extend_modulus": worst_zero, "linear_rows": rows,
                            "literal_formula_value": literal,
                            "literal_formula_rel_gap": abs(rows[0]["value"] - literal) / rows[0]["value"]},
                           limit_s=10.0)


CHECKS = (
    check_lorentz_identity,
    check_dilation_law,
    check_hilbert_cap,
    check_type_cotype,
    check_converse,
    check_l1_cap,
    check_gamma,
    check_sharpness,
    check_besov,
)


def run_check(fn, quick=False) -> CriterionResult:
    t0 = time.perf_counter()
    res = fn(quick)
    res.seconds = time.perf_counter() - t0
    return res


def run_all(quick: bool = False, include_determinism: bool | None = None) -> list[CriterionResult]:
    """Criteria 1-9; the full run adds 10 (two in-process quick runs compared byte for byte)."""
    from .report import emit_report

    results = [run_check(fn, quick) for fn in CHECKS]
    if include_determinism if include_determinism is not None else not quick:
        t0 = time.perf_counter()
        a = emit_report(summary([run_check(fn, True) for fn in CHECKS], True))
        b = emit_report(summary([run_check(fn, True) for fn in CHECKS], True))
        res = CriterionResult(10, "determinism of quick reports", a == b, {"bytes": len(a)}, limit_s=600.0)
        res.seconds = time.perf_counter() - t0
        results.append(res)
    return results


def summary(results, quick: bool) -> dict:
    return {
        "quick": quick,
        "criteria": [r.to_dict() for r in results],
        "all_passed": all(r.passed for r in results),
    }
