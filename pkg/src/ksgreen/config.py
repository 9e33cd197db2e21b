"""Run configuration: plain-text parsing, env overrides, validation.

Config files are UTF-8 "key = value" lines; blank lines and lines
starting with '#' are ignored. Unknown keys are rejected so typos fail
loudly. Any key can be overridden through the environment as
KSGREEN_<KEY> (uppercased), which takes precedence over the file.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields

import numpy as np

from .errors import ConfigError, RealRootError
from .greens import ProblemParams, green_aux
from .operators import SubgridPolicy
from .stepping import sbdf_scheme

ENV_PREFIX = "KSGREEN_"

_SEED_METHODS = (
    "exact_soliton",
    "eigenmode_growth",
    "small_step_order1",
    "richardson",
    "constant",
)


def _float_list(text: str) -> tuple[float, ...]:
    parts = text.replace(",", " ").split()
    return tuple(float(p) for p in parts)


def _int_list(text: str) -> tuple[int, ...]:
    parts = text.replace(",", " ").split()
    return tuple(int(p) for p in parts)


@dataclass
class RunConfig:
    """All parameters of a solver or experiment invocation.

    Required keys are ``nu``, ``h``, ``n`` and ``order``; every other
    field has a default. ``delta`` is normally derived from the scheme
    (delta_factor(order) * h) but may be set explicitly for quadrature
    experiments that bypass time stepping.
    """

    nu: float
    h: float
    n: int
    order: int
    l: float = 0.0
    r: float = 0.0
    delta: float | None = None

    seed_method: str = "eigenmode_growth"
    soliton_c: float = 1000.0
    soliton_x0: float = -0.2
    seed_scale: float = 1e-4
    rng_seed: int = 0

    total_steps: int = 0
    output_every: int = 1
    checkpoint_every: int = 0

    subgrid_mode: str = "spanned_plus_margin"
    subgrid_margin: int = 8
    subgrid_min_order: int = 8

    worker_count: int = 0

    cache_path: str = "operators.ksgf"
    checkpoint_path: str = "checkpoint.ksck"
    output_path: str = "series.bin"

    # experiment sweeps
    k: int = 6
    n_list: tuple[int, ...] = ()
    h_list: tuple[float, ...] = ()
    nu_list: tuple[float, ...] = ()
    horizon_scaled: float = 8.0
    sample_every: int = 1
    t_min_scaled: float = 200.0
    t_max_scaled: float = 2000.0
    contour_points: int = 400
    contour_stride: int = 1

    def __post_init__(self):
        if self.order not in (1, 2, 3, 4):
            raise ConfigError(
                f"order = {self.order}: supported scheme orders are 1..4"
            )
        if self.nu <= 0:
            raise ConfigError(f"nu = {self.nu}: viscosity must be positive")
        if self.h <= 0:
            raise ConfigError(f"h = {self.h}: step size must be positive")
        if self.n < 2:
            raise ConfigError(f"n = {self.n}: grid order must be at least 2")
        if self.output_every < 1:
            raise ConfigError("output_every must be >= 1")
        if self.seed_method not in _SEED_METHODS:
            raise ConfigError(
                f"seed_method = {self.seed_method!r}: "
                f"expected one of {', '.join(_SEED_METHODS)}"
            )
        if self.subgrid_mode not in ("spanned_plus_margin", "full"):
            raise ConfigError(
                f"subgrid_mode = {self.subgrid_mode!r}: "
                "expected spanned_plus_margin or full"
            )
        if self.worker_count < 0:
            raise ConfigError("worker_count must be >= 0 (0 = auto)")
        # fail fast on the real-root regime before any expensive work
        aux = green_aux(self.problem_params())  # noqa: F841
        del aux

    def effective_delta(self) -> float:
        if self.delta is not None:
            return self.delta
        return sbdf_scheme(self.order).delta(self.h)

    def problem_params(self) -> ProblemParams:
        return ProblemParams(
            nu=self.nu, delta=self.effective_delta(), l=self.l, r=self.r
        )

    def subgrid_policy(self) -> SubgridPolicy:
        return SubgridPolicy(
            mode=self.subgrid_mode,
            margin=self.subgrid_margin,
            min_order=self.subgrid_min_order,
        )

    def workers(self) -> int:
        if self.worker_count > 0:
            return self.worker_count
        return os.cpu_count() or 1


_PARSERS = {
    float: float,
    int: int,
    str: str,
    "float | None": float,
    "tuple[float, ...]": _float_list,
    "tuple[int, ...]": _int_list,
    float | None: float,
    tuple[float, ...]: _float_list,
    tuple[int, ...]: _int_list,
}


def _field_parsers() -> dict:
    out = {}
    for f in fields(RunConfig):
        t = f.type
        if t in _PARSERS:
            out[f.name] = _PARSERS[t]
        elif t in ("float", "int", "str"):
            out[f.name] = {"float": float, "int": int, "str": str}[t]
        else:
            raise AssertionError(f"unhandled config field type {t!r}")
    return out


_FIELD_PARSERS = _field_parsers()
_REQUIRED = ("nu", "h", "n", "order")


def parse_config(text: str, env: dict | None = None) -> RunConfig:
    """Parse "key = value" text into a validated RunConfig.

    Parameters
    ----------
    text : str
        Config file contents.
    env : dict, optional
        Environment mapping; defaults to os.environ. Keys of the form
        KSGREEN_<NAME> override the corresponding config key.

    Raises
    ------
    ConfigError
        Unknown key, bad value, or missing required key.
    RealRootError
        The derived step parameters fall in the real-root regime.
    """
    if env is None:
        env = os.environ
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _FIELD_PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        raw[key] = value

    for name in _FIELD_PARSERS:
        env_key = ENV_PREFIX + name.upper()
        if env_key in env:
            raw[name] = env[env_key]

    for name in _REQUIRED:
        if name not in raw:
            raise ConfigError(f"missing required key {name!r}")

    kwargs = {}
    for key, value in raw.items():
        try:
            kwargs[key] = _FIELD_PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"key {key!r}: cannot parse {value!r}") from exc
    return RunConfig(**kwargs)


def load_config(path, env: dict | None = None) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, env=env)
