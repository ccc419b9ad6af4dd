"""Dispatch validated configs to the numeric modules and assemble reports."""

from __future__ import annotations

import math

import numpy as np
import pydantic
import scipy

from . import __version__
from .besov import BesovParams, GridFunction, holder_hypothesis_check, lambda_besov_parts
from .config import ExperimentConfig, exponent_value, parse_config
from .gamma import GammaOperator, verify_gamma_multiplier
from .integral import OperatorValuedStep, verify_integral_rbound
from .measure import StepFunction, decreasing_rearrangement, lorentz_norm, lp_norm
from .rademacher import NormedSpace, RandomConfig, gaussian_moment, rademacher_moment
from .rbound import OperatorFamily, rbound_lower
from .semigroup import DiagonalSemigroup, SharpnessConfig, sharpness_experiment, thm_semigroup_experiment
from .typecotype import cotype_constant_lower, growth_fit, type_constant_lower


def _rademacher(params, seed):
    space = NormedSpace(len(params.vectors[0]), exponent_value(params.exponent), params.weights)
    cfg = RandomConfig(seed, params.samples, params.exact_threshold, params.partitions)
    X = np.asarray(params.vectors, dtype=float)
    est = rademacher_moment(X, params.p, cfg, space)
    out = {"moment": est.to_dict()}
    tags = [est.method]
    if params.gaussian:
        g = gaussian_moment(X, params.p, cfg, space)
        out["gaussian_moment"] = g.to_dict()
        tags.append("gaussian-" + g.method)
    return out, tags


def _rbound(params, seed):
    fam = OperatorFamily.from_dict(params.family.model_dump())
    est = rbound_lower(fam, params.N, RandomConfig(seed), params.strategy, params.iterations, params.restarts)
    return {"estimate": est.to_dict()}, [params.strategy]


def _typecotype(kind):
    estimator = type_constant_lower if kind == "type" else cotype_constant_lower

    def run(params, seed):
        s, e = exponent_value(params.space_exponent), exponent_value(params.exponent)
        cfg = RandomConfig(seed)
        rows = []
        for N in params.Ns:
            rep = estimator(NormedSpace(params.dim or N, s), e, N, cfg, params.restarts, params.sweeps)
            rows.append(rep.csv_row())
        out = {"table": rows}
        if len(params.Ns) >= 2:
            fit = growth_fit(kind, s, e, params.Ns, cfg, params.dim, restarts=params.restarts, sweeps=params.sweeps)
            out["growth"] = fit.to_dict()
        return out, ["basis-probe", "perturbation-search"]

    return run


def _lorentz(params, seed):
    f = StepFunction.from_dict(params.function.model_dump())
    p, q = exponent_value(params.p), exponent_value(params.q)
    prof = decreasing_rearrangement(f)
    out = {
        "value": lorentz_norm(f, p, q, params.form),
        "lp_norm": lp_norm(f, p),
        "rearrangement": {"values": prof.values.tolist(), "lengths": prof.lengths.tolist()},
    }
    return out, ["closed-form-" + params.form]


def _grid(model) -> GridFunction:
    return GridFunction.from_dict(model.model_dump(exclude_none=True))


def _besov(params, seed):
    f = _grid(params.function)
    bp = BesovParams(params.s, exponent_value(params.p), exponent_value(params.q), params.convention, params.levels)
    lp_part, semi = lambda_besov_parts(f, bp)
    out = {"norm": lp_part + semi, "lp_part": lp_part, "seminorm": semi, "n": f.n, "step": f.step}
    if params.holder is not None:
        h = params.holder
        out["holder"] = holder_hypothesis_check(f, h.alpha, h.r, h.A, levels=params.levels).to_dict()
    return out, [params.convention]


def _integral(params, seed):
    T = OperatorValuedStep.from_dict(params.model_dump(include={"weights", "p", "q", "matrices"}))
    rep = verify_integral_rbound(T, exponent_value(params.r), params.trials, RandomConfig(seed),
                                 K=params.K, N=params.N, iterations=params.iterations)
    return {"report": rep.to_dict()}, ["random-search"]


def _gamma(params, seed):
    mats = [np.asarray(m, dtype=float) for m in params.operators]
    psis = [GammaOperator.of(m, exponent_value(params.exponent)) for m in mats]
    rep = verify_gamma_multiplier(psis, params.fs, RandomConfig(seed, params.samples))
    return {"report": rep.to_dict()}, [rep.method]


def _semigroup(params, seed):
    space = NormedSpace(len(params.rates), exponent_value(params.space_exponent))
    g = DiagonalSemigroup(params.rates, space)
    rep = thm_semigroup_experiment(g, params.alpha, params.p, exponent_value(params.q), params.N, params.times,
                                   RandomConfig(seed), iterations=params.iterations)
    return {"report": rep.to_dict()}, ["coordinate_ascent"]


def _sharpness(params, seed):
    psi = _grid(params.psi) if params.psi is not None else None
    cfg = SharpnessConfig(params.p, params.alpha, tuple(params.N_values), params.n, params.circumference,
                          params.multiplier, seed, psi)
    rep = sharpness_experiment(cfg)
    out = rep.to_dict()
    out.pop("config")
    out["table"] = rep.table()
    return out, ["exact-enumeration", params.multiplier]


RUNNERS = {
    "rademacher": _rademacher,
    "rbound": _rbound,
    "type": _typecotype("type"),
    "cotype": _typecotype("cotype"),
    "lorentz": _lorentz,
    "besov": _besov,
    "integral": _integral,
    "gamma": _gamma,
    "semigroup": _semigroup,
    "sharpness": _sharpness,
}


def provenance(seed: int, tags) -> dict:
    return {
        "package": "rbound-lab",
        "version": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pydantic": pydantic.__version__,
        "seed": seed,
        "method_tags": list(tags),
    }


def run_experiment(config: ExperimentConfig, params=None) -> dict:
    """Run one experiment; the report echoes the validated config so it can be re-run standalone."""
    if params is None:
        config, params = parse_config(config.model_dump())
    results, tags = RUNNERS[config.kind](params, config.seed)
    return {
        "config": {"kind": config.kind, "seed": config.seed, "parameters": params.model_dump()},
        "results": results,
        "provenance": provenance(config.seed, tags),
    }
