"""Flat ``section.key = value`` configuration files.

Plain UTF-8 text, one assignment per line, ``#`` comments.  Keys map onto
:class:`~teleopsim.harness.ExperimentConfig` fields; unknown keys are
rejected so typos fail loudly.
"""

from __future__ import annotations

from dataclasses import replace

from .harness import Architecture, ConfigError, ExperimentConfig
from .plant import InputSignal

# key -> (attribute, converter)
_KEYS = {
    "arch": ("arch", Architecture.parse),
    "b": ("b", float),
    "delay": ("delay", float),
    "input": ("input", InputSignal.parse),
    "duration": ("duration", float),
    "dt": ("dt", float),
    "band": ("band", float),
    "seed": ("seed", int),
    "plant.K_a": ("K_a", float),
    "plant.T_d": ("T_d", float),
    "plant.v_max": ("v_max", float),
    "smith.tau_max": ("smith_tau_max", float),
    "mj.gamma_max": ("mj_gamma_max", float),
    "metrics.oscillation_threshold": ("oscillation_threshold", float),
    "zeta.delayed_substitution": ("zeta_delayed_substitution", None),
}


def _parse_bool(text: str) -> bool:
    low = text.lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def parse_config_text(text: str, base: ExperimentConfig | None = None,
                      source: str = "<config>") -> ExperimentConfig:
    cfg = base if base is not None else ExperimentConfig()
    updates = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _KEYS:
            valid = ", ".join(sorted(_KEYS))
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r} (valid: {valid})")
        attr, convert = _KEYS[key]
        try:
            if convert is None:
                updates[attr] = _parse_bool(value)
            else:
                updates[attr] = convert(value)
        except (ValueError, ConfigError) as exc:
            raise ConfigError(f"{source}:{lineno}: {key}: {exc}") from exc
    return replace(cfg, **updates)


def load_config(path, base: ExperimentConfig | None = None) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read(), base=base, source=str(path))


def dump_config(cfg: ExperimentConfig) -> str:
    """Render a config back to the flat text form (input as its compact spec)."""
    if cfg.input.kind == "step":
        input_spec = f"step:{cfg.input.amplitude}:{cfg.input.start}"
    elif cfg.input.kind == "sine":
        input_spec = f"sine:{cfg.input.amplitude}:{cfg.input.frequency}"
    else:
        raise ValueError("trace inputs have no compact text form")
    lines = [
        f"arch = {cfg.arch.value}",
        f"b = {cfg.b!r}",
        f"delay = {cfg.delay!r}",
        f"input = {input_spec}",
        f"duration = {cfg.duration!r}",
        f"dt = {cfg.dt!r}",
        f"band = {cfg.band!r}",
        f"seed = {cfg.seed}",
        f"plant.K_a = {cfg.K_a!r}",
        f"plant.T_d = {cfg.T_d!r}",
        f"plant.v_max = {cfg.v_max!r}",
        f"smith.tau_max = {cfg.smith_tau_max!r}",
        f"mj.gamma_max = {cfg.mj_gamma_max!r}",
        f"metrics.oscillation_threshold = {cfg.oscillation_threshold!r}",
        f"zeta.delayed_substitution = {str(cfg.zeta_delayed_substitution).lower()}",
    ]
    return "\n".join(lines) + "\n"


def load_delay_profile_csv(path):
    """Read piecewise-constant delay breakpoints from a 't,tau' CSV."""
    breakpoints = []
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh]
    body = [ln for ln in lines if ln and not ln.startswith("#")]
    if not body:
        raise ConfigError(f"{path}: empty delay profile")
    if body[0].replace(" ", "").lower() != "t,tau":
        raise ConfigError(f"{path}: first line must be the header 't,tau'")
    for lineno, line in enumerate(body[1:], 2):
        fields = line.split(",")
        if len(fields) != 2:
            raise ConfigError(f"{path}:{lineno}: expected 't,tau'")
        try:
            breakpoints.append((float(fields[0]), float(fields[1])))
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: {exc}") from exc
    return tuple(breakpoints)
