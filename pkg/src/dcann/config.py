"""Experiment configuration files (TOML) with profiles and ``key=value`` overrides.

Layout::

    master_seed = 0
    train_fraction = 0.75
    hidden_layers = [15, 5]

    [generator]      # GeneratorConfig fields except seed
    [sweep]          # p_true_grid, v_grid, repetitions, feature_kinds, methods
    [mlp]            # TrainSettings fields except seed
    [logit]          # gtol, ftol, max_iter
"""

from __future__ import annotations

import sys
from dataclasses import fields, replace
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .harness import ExperimentConfig, LogitSettings
from .mlp import TrainSettings
from .synthgen import GeneratorConfig

PROFILES = {
    "full": {},
    "quick": {"sweep": {"v_grid": [1, 5, 10], "repetitions": 3, "p_true_grid": [0.5]}},
}

_TOP_LEVEL = {"master_seed", "train_fraction", "hidden_layers"}
_SWEEP = {"p_true_grid", "v_grid", "repetitions", "feature_kinds", "methods"}
_SECTIONS = {
    "generator": {f.name for f in fields(GeneratorConfig)} - {"seed"},
    "sweep": _SWEEP,
    "mlp": {f.name for f in fields(TrainSettings)} - {"seed"},
    "logit": {f.name for f in fields(LogitSettings)},
}


class ConfigError(ValueError):
    pass


def _merge(base: dict, extra: dict) -> dict:
    out = dict(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def parse_override(text: str) -> dict:
    """``"sweep.repetitions=5"`` -> ``{"sweep": {"repetitions": 5}}``.

    The value is read as a TOML value when possible, otherwise kept as a string.
    """
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not of the form key=value")
    key, raw = (s.strip() for s in text.split("=", 1))
    if not key:
        raise ConfigError(f"override {text!r} has an empty key")
    try:
        value = tomllib.loads(f"v = {raw}")["v"]
    except tomllib.TOMLDecodeError:
        value = raw
    out: dict = {}
    node = out
    parts = key.split(".")
    for part in parts[:-1]:
        node = node.setdefault(part, {})
    node[parts[-1]] = value
    return out


def _validate(tree: dict) -> None:
    for key, value in tree.items():
        if key in _SECTIONS:
            if not isinstance(value, dict):
                raise ConfigError(f"[{key}] must be a table")
            unknown = set(value) - _SECTIONS[key]
            if unknown:
                raise ConfigError(f"unknown key(s) in [{key}]: {', '.join(sorted(unknown))}")
        elif key not in _TOP_LEVEL:
            raise ConfigError(f"unknown configuration key {key!r}")


def build(tree: dict) -> ExperimentConfig:
    _validate(tree)
    try:
        sweep = tree.get("sweep", {})
        return ExperimentConfig(
            generator=GeneratorConfig(**tree.get("generator", {})),
            mlp=TrainSettings(**tree.get("mlp", {})),
            logit=LogitSettings(**tree.get("logit", {})),
            **{k: tuple(v) if isinstance(v, list) else v for k, v in sweep.items()},
            **{k: tuple(v) if isinstance(v, list) else v for k, v in tree.items() if k in _TOP_LEVEL},
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def load_tree(
    path: str | Path | None = None,
    profile: str | None = None,
    overrides: list[str] | tuple[str, ...] = (),
    seed: int | None = None,
) -> dict:
    """Merge profile < file < ``--set`` overrides < ``--seed`` into one raw table."""
    tree: dict = {}
    if profile is not None:
        if profile not in PROFILES:
            raise ConfigError(f"unknown profile {profile!r}; choose from {', '.join(PROFILES)}")
        tree = _merge(tree, PROFILES[profile])
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            tree = _merge(tree, tomllib.loads(path.read_text()))
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    for text in overrides:
        tree = _merge(tree, parse_override(text))
    if seed is not None:
        tree = _merge(tree, {"master_seed": seed})
    return tree


def load(path=None, profile=None, overrides=(), seed=None) -> ExperimentConfig:
    return build(load_tree(path, profile, overrides, seed))


def generator_config(tree: dict) -> GeneratorConfig:
    """The ``[generator]`` table on its own; the master seed seeds the data."""
    _validate(tree)
    try:
        gen = GeneratorConfig(**tree.get("generator", {}))
        return replace(gen, seed=int(tree.get("master_seed", 0)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
