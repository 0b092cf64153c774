"""Experiment configuration: INI-style text in, validated dataclass out.

The file format is [section] headers with key = value lines.  Every key has a
documented default; unknown sections or keys are rejected rather than
ignored, so a typo cannot silently fall back to a default.  Value lists
(w_values, f_values) are comma- or space-separated numbers.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields

__all__ = ["KINDS", "ConfigError", "ExperimentConfig", "validate_config"]

KINDS = (
    "level-stats",
    "cue-check",
    "supremacy-curve",
    "memory",
    "make-dataset",
    "train",
    "w-sweep",
)

PAPER_M = 400


class ConfigError(ValueError):
    """Invalid configuration text or field value; maps to CLI exit code 1."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated parameters of one experiment run.

    The (W, F) phase grid is the cartesian product f_values x w_values in
    that (drive-major) order; m_layers doubles as the layer count of quench
    experiments and the step count of training runs.  window_explicit records
    whether the memory window was set by the user, which suppresses the
    proportional rescaling applied when m_layers differs from 400.
    """

    kind: str
    L: int = 9
    J: float = 1.0
    h: float = 2.5
    omega: float = 8.0
    w_values: tuple[float, ...] = (1.0, 20.0)
    f_values: tuple[float, ...] = (0.0, 2.5)
    realizations: int = 500
    m_layers: int = 400
    n_steps: int = 128
    master_seed: int = 0
    output_dir: str = "runs"
    emit_plots: bool = False
    workers: int = 1
    spectral_window: float = 1.0
    checkpoint_every: int = 50
    delta: float = 1.0
    d_candidates: int = 200
    datasets: int = 10
    samples: int = 3000
    kT0: float = 1.0
    epsilon: float = 1e-12
    shots: int = 0
    kld_reverse: bool = False
    dataset_path: str = ""
    window_start: int = 378
    window_len: int = 22
    dm_max: int = 8
    window_explicit: bool = field(default=False, compare=False)

    def __post_init__(self) -> None:
        def bad(name: str, why: str):
            return ConfigError(f"config field '{name}': {why}")

        if self.kind not in KINDS:
            raise bad("kind", f"must be one of {', '.join(KINDS)}; got {self.kind!r}")
        if self.L < 1:
            raise bad("L", f"must be >= 1, got {self.L}")
        if not self.J > 0:
            raise bad("J", f"must be > 0, got {self.J}")
        if not self.omega > 0:
            raise bad("omega", f"must be > 0, got {self.omega}")
        if not self.w_values:
            raise bad("w_values", "must contain at least one value")
        if not self.f_values:
            raise bad("f_values", "must contain at least one value")
        for name, vals in (("w_values", self.w_values), ("f_values", self.f_values)):
            if any(v < 0 for v in vals):
                raise bad(name, f"entries must be >= 0, got {vals}")
        for name, lo in (("realizations", 1), ("n_steps", 1), ("workers", 1),
                         ("checkpoint_every", 1), ("d_candidates", 1),
                         ("datasets", 1), ("samples", 1), ("window_start", 1),
                         ("window_len", 1), ("dm_max", 1), ("m_layers", 1),
                         ("shots", 0), ("master_seed", 0)):
            if getattr(self, name) < lo:
                raise bad(name, f"must be >= {lo}, got {getattr(self, name)}")
        if self.master_seed >= 1 << 64:
            raise bad("master_seed", "must fit in 64 bits")
        if not 0 < self.spectral_window <= 1:
            raise bad("spectral_window", f"must be in (0, 1], got {self.spectral_window}")
        for name in ("delta", "kT0", "epsilon"):
            if not getattr(self, name) > 0:
                raise bad(name, f"must be > 0, got {getattr(self, name)}")
        if self.kind == "w-sweep" and len(self.f_values) != 1:
            raise bad("f_values", "w-sweep needs exactly one drive amplitude")
        if self.kind in ("make-dataset", "train", "w-sweep") and self.L > 20:
            raise bad("L", f"exact target enumeration needs L <= 20, got {self.L}")

    def phase_grid(self) -> list[tuple[float, float]]:
        """(W, F) pairs in drive-major order."""
        return [(W, F) for F in self.f_values for W in self.w_values]

    def effective_window(self) -> tuple[int, int]:
        """Memory averaging window, rescaled with m_layers unless user-set."""
        if self.window_explicit or self.m_layers == PAPER_M:
            return self.window_start, self.window_len
        scale = self.m_layers / PAPER_M
        start = max(1, int(round(self.window_start * scale)))
        length = max(1, int(round(self.window_len * scale)))
        return start, length


def _parse_values(raw: str, key: str) -> tuple[float, ...]:
    parts = raw.replace(",", " ").split()
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"config field '{key}': not a number list: {raw!r}") from exc


_BOOL = {"1": True, "true": True, "yes": True, "on": True,
         "0": False, "false": False, "no": False, "off": False}

# section -> {key: python type}; lists and the kind string are special-cased.
_SCHEMA: dict[str, dict[str, type]] = {
    "experiment": {
        "kind": str, "realizations": int, "m_layers": int, "n_steps": int,
        "master_seed": int, "output_dir": str, "emit_plots": bool,
        "workers": int, "spectral_window": float, "checkpoint_every": int,
        "delta": float,
    },
    "chain": {
        "L": int, "J": float, "h": float, "omega": float,
        "w_values": tuple, "f_values": tuple,
    },
    "training": {
        "d_candidates": int, "datasets": int, "samples": int, "kT0": float,
        "epsilon": float, "shots": int, "kld_reverse": bool,
        "dataset_path": str,
    },
    "memory": {"window_start": int, "window_len": int, "dm_max": int},
}


def _convert(section: str, key: str, raw: str):
    typ = _SCHEMA[section][key]
    if typ is tuple:
        return _parse_values(raw, key)
    if typ is bool:
        val = _BOOL.get(raw.strip().lower())
        if val is None:
            raise ConfigError(f"config field '{key}': not a boolean: {raw!r}")
        return val
    if typ is str:
        return raw.strip()
    try:
        return typ(raw)
    except ValueError as exc:
        raise ConfigError(f"config field '{key}': not a {typ.__name__}: {raw!r}") from exc


def validate_config(raw: str, kind: str | None = None) -> ExperimentConfig:
    """Parse and validate configuration text.

    A kind given by the caller (the CLI subcommand) fills in a missing
    [experiment] kind key and must agree with it when both are present.
    Raises ConfigError on parse errors (with line numbers from the parser),
    unknown sections or keys, and out-of-range values.
    """
    parser = configparser.ConfigParser(interpolation=None,
                                       inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # keep keys case-sensitive (L, J, kT0, ...)
    try:
        parser.read_string(raw)
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc

    values: dict[str, object] = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(
                f"unknown config section [{section}]; expected one of "
                f"{', '.join(_SCHEMA)}"
            )
        for key in parser[section]:
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key '{key}' in section [{section}]")
            values[key] = _convert(section, key, parser[section][key])

    file_kind = values.pop("kind", None)
    if file_kind is not None and kind is not None and file_kind != kind:
        raise ConfigError(
            f"config field 'kind': file says {file_kind!r} but the command "
            f"asked for {kind!r}"
        )
    effective_kind = kind if file_kind is None else file_kind
    if effective_kind is None:
        raise ConfigError("config field 'kind': missing (set it in "
                          "[experiment] or pass the subcommand)")
    if any(k in values for k in _SCHEMA["memory"]):
        values["window_explicit"] = True
    known = {f.name for f in fields(ExperimentConfig)}
    assert set(values) <= known
    return ExperimentConfig(kind=str(effective_kind), **values)
