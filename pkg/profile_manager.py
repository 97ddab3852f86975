"""
profile_manager.py — Load, validate, and store experiment profiles for the SBTS simulator

Includes:
- Flat config files ({flag-name: value}) for a single run
- Profile files ({label: {flag-name: value}}) for labelled comparisons
- Resolution of flat values into a validated ExperimentConfig
- Last-used profile file bookkeeping
"""

import json
import logging
import math
import os
from typing import Any, Dict, Mapping

from experiment_harness import ExperimentConfig
from sbts_policy import DEFAULT_LAMBDA, DEFAULT_SPAN, PolicyParams
from student_env import (
    DEFAULT_CUTOFF,
    DEFAULT_EPSILON,
    DEFAULT_EPSILON0,
    DEFAULT_ETA,
    DEFAULT_P_EXPLORE_NEUTRAL,
    DynamicEpsilonStudent,
    StaticEpsilonStudent,
    StaticStudent,
)
from task_generation import DECAY_SCOPES, DEFAULT_DECAY, DecayParams

logger = logging.getLogger(__name__)

PROFILE_DIR = "profiles"
LAST_USED_FILE = os.path.join(PROFILE_DIR, "last_used.json")

MODELS = ("static", "static-eps", "dynamic")

# Full evaluation scale: 1000 students, 200 task-sets, 100 iterations.
DEFAULTS: Dict[str, Any] = {
    "students": 1000,
    "tasksets": 200,
    "iterations": 100,
    "lambda": DEFAULT_LAMBDA,
    "decay": DEFAULT_DECAY,
    "decay-scope": "cell",
    "span": DEFAULT_SPAN,
    "seed": 0,
}

INT_KEYS = {"students", "tasksets", "iterations", "cutoff", "span", "seed"}
FLOAT_KEYS = {"p", "epsilon", "epsilon0", "p-explore", "eta", "lambda", "decay"}
STR_KEYS = {"model", "decay-scope"}
KNOWN_KEYS = INT_KEYS | FLOAT_KEYS | STR_KEYS

MODEL_KEYS = {
    "static": {"p"},
    "static-eps": {"p", "epsilon", "p-explore", "eta"},
    "dynamic": {"p", "epsilon0", "cutoff", "p-explore", "eta"},
}


class ConfigError(ValueError):
    """An invalid configuration value, attributed to the flag that carries it."""

    def __init__(self, flag: str, message: str):
        super().__init__(f"--{flag}: {message}")
        self.flag = flag
        self.message = message


def normalise_key(key: str) -> str:
    return key.strip().lstrip("-").replace("_", "-")


def _coerce(key: str, value: Any) -> Any:
    if key not in KNOWN_KEYS:
        raise ConfigError(key, "unknown option")
    try:
        if key in INT_KEYS:
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise ValueError(value)
            return int(value)
        if key in FLOAT_KEYS:
            if isinstance(value, bool):
                raise ValueError(value)
            return float(value)
        return str(value)
    except (TypeError, ValueError):
        kind = "an integer" if key in INT_KEYS else "a number"
        raise ConfigError(key, f"expected {kind}, got {value!r}") from None


def normalise_values(values: Mapping[str, Any]) -> Dict[str, Any]:
    """Canonical flag-name keys and typed values; None entries are dropped."""
    return {normalise_key(k): _coerce(normalise_key(k), v) for k, v in values.items() if v is not None}


def _require_range(values: Dict[str, Any], key: str, low: float, high: float, low_open: bool = False) -> None:
    if key not in values:
        return
    v = values[key]
    if not math.isfinite(v):
        raise ConfigError(key, f"must be a finite number, got {v}")
    below = v <= low if low_open else v < low
    if below or v > high:
        bracket = "(" if low_open else "["
        raise ConfigError(key, f"must be within {bracket}{low}, {high}], got {v}")


def resolve_config(values: Mapping[str, Any]) -> ExperimentConfig:
    """
    Build a validated ExperimentConfig from flat {flag-name: value} entries.

    Missing general values fall back to DEFAULTS; model-specific values fall
    back to the student_env defaults except where the model needs them.

    Raises:
        ConfigError: Unknown key, wrong type, out-of-range value, a value that does
            not belong to the chosen model, or a missing model-specific value.
    """
    resolved = dict(DEFAULTS)
    resolved.update(normalise_values(values))

    model = resolved.get("model")
    if model is None:
        raise ConfigError("model", f"required, one of {', '.join(MODELS)}")
    if model not in MODELS:
        raise ConfigError("model", f"expected one of {', '.join(MODELS)}, got {model!r}")
    foreign = sorted(k for k in set().union(*MODEL_KEYS.values()) - MODEL_KEYS[model] if k in resolved)
    if foreign:
        raise ConfigError(foreign[0], f"not valid with --model {model}")
    if resolved["decay-scope"] not in DECAY_SCOPES:
        raise ConfigError("decay-scope", f"expected one of {', '.join(DECAY_SCOPES)}, got {resolved['decay-scope']!r}")

    for key in ("p", "epsilon", "epsilon0", "p-explore", "eta", "lambda"):
        _require_range(resolved, key, 0.0, 1.0)
    _require_range(resolved, "decay", 0.0, 1.0, low_open=True)
    for key in ("students", "tasksets", "iterations", "span", "cutoff"):
        if key in resolved and resolved[key] < 1:
            raise ConfigError(key, f"must be at least 1, got {resolved[key]}")

    if model == "static":
        if "p" not in resolved:
            raise ConfigError("p", "required with --model static")
        student = StaticStudent(p_success=resolved["p"])
    elif model == "static-eps":
        p_explore = resolved.get("p-explore", resolved.get("p"))
        if p_explore is None:
            raise ConfigError("p-explore", "required with --model static-eps")
        student = StaticEpsilonStudent(
            p_explore=p_explore,
            epsilon=resolved.get("epsilon", DEFAULT_EPSILON),
            eta=resolved.get("eta", DEFAULT_ETA),
        )
    else:
        student = DynamicEpsilonStudent(
            p_explore=resolved.get("p-explore", resolved.get("p", DEFAULT_P_EXPLORE_NEUTRAL)),
            epsilon0=resolved.get("epsilon0", DEFAULT_EPSILON0),
            cutoff=resolved.get("cutoff", DEFAULT_CUTOFF),
            eta=resolved.get("eta", DEFAULT_ETA),
        )

    return ExperimentConfig(
        num_students=resolved["students"],
        tasksets_per_student=resolved["tasksets"],
        iterations=resolved["iterations"],
        model=student,
        policy=PolicyParams(lam=resolved["lambda"], neighbor_span=resolved["span"]),
        decay=DecayParams(factor=resolved["decay"], scope=resolved["decay-scope"]),
        master_seed=resolved["seed"],
    )


def config_to_flat(config: ExperimentConfig) -> Dict[str, Any]:
    """Every resolved value of `config` as a flat config document (inverse of resolve_config)."""
    flat: Dict[str, Any] = {
        "students": config.num_students,
        "tasksets": config.tasksets_per_student,
        "iterations": config.iterations,
    }
    model = config.model
    if isinstance(model, StaticStudent):
        flat.update({"model": "static", "p": model.p_success})
    elif isinstance(model, StaticEpsilonStudent):
        flat.update({"model": "static-eps", "epsilon": model.epsilon, "p-explore": model.p_explore, "eta": model.eta})
    else:
        flat.update({
            "model": "dynamic",
            "epsilon0": model.epsilon0,
            "cutoff": model.cutoff,
            "p-explore": model.p_explore,
            "eta": model.eta,
        })
    flat.update({
        "lambda": config.policy.lam,
        "span": config.policy.neighbor_span,
        "decay": config.decay.factor,
        "decay-scope": config.decay.scope,
        "seed": config.master_seed,
    })
    return flat


def _read_json(path: str) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except OSError as e:
        raise ConfigError("config", f"cannot read {path}: {e.strerror or e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError("config", f"{path} is not valid JSON: {e}") from e


def load_config_file(path: str) -> Dict[str, Any]:
    """Read a flat config document; keys mirror flag names."""
    data = _read_json(path)
    if not isinstance(data, dict) or any(isinstance(v, (dict, list)) for v in data.values()):
        raise ConfigError("config", f"{path} must be a flat {{flag: value}} document")
    return normalise_values(data)


def load_profiles(path: str) -> Dict[str, Dict[str, Any]]:
    """Read a profile document {label: {flag: value}}, keeping label order."""
    data = _read_json(path)
    if not isinstance(data, dict) or not data or not all(isinstance(v, dict) for v in data.values()):
        raise ConfigError("config", f"{path} must map labels to flat {{flag: value}} documents")
    return {label: normalise_values(values) for label, values in data.items()}


def save_profiles(path: str, profiles: Mapping[str, Mapping[str, Any]]) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(profiles, f, indent=2)


def save_last_used_profile(profile_path: str, last_used_file: str = LAST_USED_FILE) -> None:
    try:
        os.makedirs(os.path.dirname(last_used_file) or ".", exist_ok=True)
        with open(last_used_file, "w", encoding="utf-8") as f:
            json.dump({"last": profile_path}, f)
    except OSError as e:
        logger.warning("Could not record last used profile file %s: %s", last_used_file, e)


def load_last_used_profile(last_used_file: str = LAST_USED_FILE):
    try:
        with open(last_used_file, "r", encoding="utf-8") as f:
            return json.load(f).get("last")
    except Exception:
        return None
