"""INI-style configuration with embedded defaults.

Every tunable lives in a flat [section] key = value file. Unknown
sections or keys are rejected rather than ignored, so a typo cannot
silently fall back to a default. The merged configuration has a
canonical text rendering whose sha256 prefix is stamped into every
output file, which is what makes re-runs auditable.
"""

from __future__ import annotations

import configparser
import hashlib
from typing import Any, Mapping

from .errors import ConfigError
from .memory import MemoryParams, StorageSchedule
from .montecarlo import ExperimentConfig
from .polarization import STATE_LABELS, standard_state

# (type tag, default); tags: float int bool str floatlist strlist
_SCHEMA: dict[str, dict[str, tuple[str, Any]]] = {
    "memory": {
        "eta": ("float", 0.036),
        "p_n": ("float", 0.0101),
        "f_c": ("float", 0.991),
        "eta_t": ("float", 0.296),
        "f_t": ("float", 0.972),
        "eta_pol_spread": ("float", 0.09),
    },
    "schedule": {
        "comb_delay": ("float", 15.0),
        "spin_storage": ("float", 500.0),
        "mode_duration": ("float", 1.25),
        "n_modes": ("int", 5),
        "control_duration": ("float", 5.0),
        "rf_pulse_duration": ("float", 120.0),
        "rf_pulse_count": ("int", 4),
        "n_rep": ("int", 18),
    },
    "detection": {
        "detector_efficiency": ("float", 0.57),
        "dark_rate": ("float", 15.0),
        "transmission_to_detector": ("float", 0.07),
        # 0 means "derive from the schedule" (bin: mode/5, gate: mode)
        "bin_width": ("float", 0.0),
        "dark_gate_width": ("float", 0.0),
    },
    "simulate": {
        "input_state": ("str", "D"),
        "mu_per_mode": ("floatlist", (1.4,)),
        "trials": ("int", 1_000_000),
        "pol_anisotropy": ("bool", False),
        "input_window_reference": ("bool", False),
        "cp2_leakage": ("float", 0.0),
    },
    "predict": {
        "mu_min": ("float", 0.1),
        "mu_max": ("float", 10.0),
        "n_points": ("int", 100),
        "mu1": ("float", 0.29),
        "mu1_err": ("float", 0.04),
        "f_c": ("float", 0.991),
    },
    "tomography": {
        "trials": ("int", 200_000),
        "resamples": ("int", 200),
        "input_labels": ("strlist", ("H", "V", "D", "R")),
        "project": ("bool", True),
        "mu": ("float", 1.4),
        "counts_file": ("str", ""),
    },
    "bounds": {
        "mu_min": ("float", 0.5),
        "mu_max": ("float", 10.0),
        "n_points": ("int", 20),
        "eta_m": ("float", 0.0385),
        "f_t": ("float", 0.972),
        "eta_t": ("float", 0.296),
        "grid_points": ("int", 50),
        "refine_rounds": ("int", 2),
        "matching": ("str", "exp"),
        "k_sigma": ("float", 1.0),
    },
    "reproduce": {
        "trials": ("int", 300_000),
        "resamples": ("int", 120),
        "grid_points": ("int", 50),
        "refine_rounds": ("int", 2),
        "bound_points": ("int", 12),
    },
}


def _parse_value(tag: str, raw: str, where: str):
    raw = raw.strip()
    try:
        if tag == "float":
            return float(raw)
        if tag == "int":
            v = float(raw)
            if v != int(v):
                raise ValueError("not an integer")
            return int(v)
        if tag == "bool":
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError("not a boolean")
        if tag == "str":
            return raw
        if tag == "floatlist":
            return tuple(float(tok) for tok in raw.split(",") if tok.strip())
        if tag == "strlist":
            return tuple(tok.strip() for tok in raw.split(",") if tok.strip())
    except ValueError as exc:
        raise ConfigError(f"{where}: cannot parse {raw!r} as {tag}: {exc}") from None
    raise AssertionError(f"unknown schema tag {tag}")


def _render_value(tag: str, value) -> str:
    if tag == "bool":
        return "true" if value else "false"
    if tag in ("floatlist", "strlist"):
        return ", ".join(repr(v) if tag == "floatlist" else str(v) for v in value)
    if tag == "float":
        return repr(float(value))
    return str(value)


def default_config() -> dict[str, dict[str, Any]]:
    return {sec: {k: v for k, (_, v) in keys.items()} for sec, keys in _SCHEMA.items()}


def parse_config_text(text: str, source: str = "<config>") -> dict[str, dict[str, Any]]:
    """Merge an INI document over the defaults; unknown names are errors."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    cfg = default_config()
    for section in cp.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"{source}: unknown section [{section}]")
        for key, raw in cp.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"{source}: unknown key {key!r} in [{section}]")
            tag = _SCHEMA[section][key][0]
            cfg[section][key] = _parse_value(tag, raw, f"{source} [{section}] {key}")
    return cfg


def load_config(path: str | None) -> dict[str, dict[str, Any]]:
    if path is None:
        return default_config()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text, source=path)


def canonical_text(cfg: Mapping[str, Mapping[str, Any]]) -> str:
    """Deterministic rendering in schema order; parses back to itself."""
    lines = []
    for section, keys in _SCHEMA.items():
        lines.append(f"[{section}]")
        for key, (tag, _) in keys.items():
            lines.append(f"{key} = {_render_value(tag, cfg[section][key])}")
        lines.append("")
    return "\n".join(lines)


def config_hash(cfg: Mapping[str, Mapping[str, Any]]) -> str:
    return hashlib.sha256(canonical_text(cfg).encode()).hexdigest()[:12]


def build_memory_params(cfg: Mapping[str, Mapping[str, Any]]) -> MemoryParams:
    m = cfg["memory"]
    return MemoryParams(eta=m["eta"], p_n=m["p_n"], f_c=m["f_c"],
                        eta_t=m["eta_t"], f_t=m["f_t"], eta_pol_spread=m["eta_pol_spread"])


def build_schedule(cfg: Mapping[str, Mapping[str, Any]]) -> StorageSchedule:
    s = cfg["schedule"]
    return StorageSchedule(comb_delay=s["comb_delay"], spin_storage=s["spin_storage"],
                           mode_duration=s["mode_duration"], n_modes=s["n_modes"],
                           control_duration=s["control_duration"],
                           rf_pulse_duration=s["rf_pulse_duration"],
                           rf_pulse_count=s["rf_pulse_count"], n_rep=s["n_rep"])


def build_experiment_config(cfg: Mapping[str, Mapping[str, Any]], seed: int, *,
                            input_state: str | None = None,
                            mu_per_mode=None, trials: int | None = None) -> ExperimentConfig:
    sim, det = cfg["simulate"], cfg["detection"]
    label = sim["input_state"] if input_state is None else input_state
    if label not in STATE_LABELS:
        raise ConfigError(f"input_state must be one of {STATE_LABELS}, got {label!r}")
    mus = sim["mu_per_mode"] if mu_per_mode is None else mu_per_mode
    if isinstance(mus, (tuple, list)) and len(mus) == 1:
        mus = mus[0]
    return ExperimentConfig(
        input_state=standard_state(label),
        mu_per_mode=mus,
        schedule=build_schedule(cfg),
        params=build_memory_params(cfg),
        detector_efficiency=det["detector_efficiency"],
        dark_rate=det["dark_rate"],
        transmission_to_detector=det["transmission_to_detector"],
        bin_width=det["bin_width"] or None,
        trials=sim["trials"] if trials is None else int(trials),
        rng_seed=int(seed),
        dark_gate_width=det["dark_gate_width"] or None,
        pol_anisotropy=sim["pol_anisotropy"],
        input_window_reference=sim["input_window_reference"],
        cp2_leakage=sim["cp2_leakage"],
    )
