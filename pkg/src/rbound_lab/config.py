"""Experiment config schemas.

A config file is either ``{"kind": ..., "parameters": {...}, "seed": ..., "output": ...}``
or a bare parameters object (the kind then comes from the CLI subcommand).
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Annotated, Any, Literal, Optional

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, ValidationError, field_validator

from .errors import ConfigError

KINDS = ("rademacher", "rbound", "type", "cotype", "lorentz", "besov", "integral", "gamma", "semigroup", "sharpness")



def _parse_exponent(v):
    if isinstance(v, str) and v.strip().lower() in ("inf", "infinity"):
        return math.inf
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValueError("exponent must be a number or 'inf'")
    if not v >= 1.0:
        raise ValueError("exponent must be >= 1")
    return float(v)


# a norm exponent in [1, inf]; JSON spells infinity as "inf"
Exponent = Annotated[float, BeforeValidator(_parse_exponent)]


def exponent_value(v) -> float:
    return float(v)


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class RademacherParams(_Strict):
    vectors: list[list[float]] = Field(min_length=1)
    exponent: Exponent = 2.0
    weights: Optional[list[float]] = None
    p: float = Field(2.0, ge=1.0)
    gaussian: bool = False
    samples: int = Field(100_000, ge=1)
    exact_threshold: int = Field(20, ge=1, le=30)
    partitions: int = Field(1, ge=1)


class FamilyModel(_Strict):
    p: Exponent
    q: Exponent
    matrices: list[list[list[float]]] = Field(min_length=1)


class RBoundParams(_Strict):
    family: FamilyModel
    N: int = Field(ge=1)
    strategy: Literal["random", "coordinate_ascent", "exhaustive_small"] = "coordinate_ascent"
    iterations: Optional[int] = Field(None, ge=0)
    restarts: int = Field(1, ge=1)


class TypeCotypeParams(_Strict):
    space_exponent: Exponent
    exponent: Exponent
    Ns: list[int] = Field([2, 4, 8, 16], min_length=1)
    dim: Optional[int] = Field(None, ge=1)
    restarts: int = Field(4, ge=0)
    sweeps: int = Field(25, ge=0)

    @field_validator("Ns")
    @classmethod
    def _positive(cls, v):
        if any(n < 1 for n in v):
            raise ValueError("every N must be >= 1")
        return v


class StepModel(_Strict):
    weights: list[float] = Field(min_length=1)
    values: list[float] = Field(min_length=1)


class LorentzParams(_Strict):
    function: StepModel
    p: Exponent
    q: Exponent
    form: Literal["rearrangement", "distribution"] = "rearrangement"


class GridModel(_Strict):
    a: float
    b: float
    values: list[Any] = Field(min_length=2)
    exponent: Optional[Exponent] = None
    domain_exponent: Optional[Exponent] = None
    codomain_exponent: Optional[Exponent] = None
    operator_norm: Optional[Literal["estimate", "exact"]] = None


class HolderModel(_Strict):
    alpha: float
    r: float
    A: float = Field(ge=0.0)


class BesovModel(_Strict):
    function: GridModel
    s: float
    p: Exponent = 2.0
    q: Exponent = 2.0
    convention: Literal["restrict", "zero_extend"] = "restrict"
    levels: int = Field(12, ge=0)
    holder: Optional[HolderModel] = None


class IntegralParams(_Strict):
    weights: list[float] = Field(min_length=1)
    p: Exponent
    q: Exponent
    matrices: list[list[list[float]]] = Field(min_length=1)
    r: Exponent
    trials: int = Field(10, ge=1)
    K: int = Field(8, ge=1)
    N: int = Field(4, ge=1)
    iterations: int = Field(30, ge=0)


class GammaParams(_Strict):
    operators: list[list[list[float]]] = Field(min_length=1)
    fs: list[list[float]] = Field(min_length=1)
    exponent: Exponent = 2.0
    samples: int = Field(20_000, ge=1)


class SemigroupParams(_Strict):
    rates: list[float] = Field(min_length=1)
    space_exponent: Exponent = 2.0
    alpha: float
    p: float = 2.0
    q: Exponent = 2.0
    N: int = Field(4, ge=1)
    times: list[float] = Field(min_length=1)
    iterations: Optional[int] = Field(None, ge=0)


class SharpnessParams(_Strict):
    p: float = 1.0
    alpha: float = 0.75
    N_values: list[int] = Field([4, 8, 16], min_length=2)
    n: int = 2**14
    circumference: float = 2.0
    multiplier: Literal["bessel", "generator"] = "bessel"
    psi: Optional[GridModel] = None


PARAMS = {
    "rademacher": RademacherParams,
    "rbound": RBoundParams,
    "type": TypeCotypeParams,
    "cotype": TypeCotypeParams,
    "lorentz": LorentzParams,
    "besov": BesovModel,
    "integral": IntegralParams,
    "gamma": GammaParams,
    "semigroup": SemigroupParams,
    "sharpness": SharpnessParams,
}


class ExperimentConfig(_Strict):
    kind: Literal[KINDS]
    parameters: dict
    seed: int = 0
    output: Optional[str] = None


def _field_path(err: dict, prefix=()) -> tuple:
    return tuple(prefix) + tuple(err.get("loc", ()))


def validate_parameters(kind: str, parameters: dict) -> BaseModel:
    try:
        return PARAMS[kind].model_validate(parameters)
    except ValidationError as exc:
        first = exc.errors()[0]
        path = _field_path(first, ("parameters",))
        raise ConfigError(f"{'.'.join(map(str, path))}: {first['msg']}", path) from None


def parse_config(data: Any, kind: str | None = None, seed: int | None = None) -> tuple[ExperimentConfig, BaseModel]:
    """Validate a raw JSON object; ``kind``/``seed`` from the CLI override or fill in."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object", ())
    if "parameters" not in data:
        data = {"kind": kind, "parameters": data}
    elif kind is not None and data.get("kind", kind) != kind:
        raise ConfigError(f"config kind {data.get('kind')!r} does not match subcommand {kind!r}", ("kind",))
    else:
        data = {"kind": kind, **data} if "kind" not in data else dict(data)
    if seed is not None:
        data["seed"] = seed
    try:
        cfg = ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        path = _field_path(first)
        raise ConfigError(f"{'.'.join(map(str, path)) or 'config'}: {first['msg']}", path) from None
    return cfg, validate_parameters(cfg.kind, cfg.parameters)


def load_config(path: str | Path, kind: str | None = None, seed: int | None = None):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", ()) from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}", ()) from None
    return parse_config(data, kind, seed)
