"""Experiment configuration: a flat INI file with fixed sections and keys.

Unknown sections or keys are errors.  ``dump_defaults`` prints every key with
its default value, which doubles as documentation of the format.
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

BUILTIN_BUDGET = "builtin:budget"
TOY = "toy"

DEFAULTS: dict[str, dict[str, str]] = {
    "data": {
        "model": BUILTIN_BUDGET,
        "train_src": "",
        "train_tgt": "",
        "dev_src": "",
        "dev_tgt": "",
        "test_src": "",
        "test_tgt": "",
        "out_dir": "out",
        "seed": "1",
    },
    "decode": {
        "modes": "baseline,reward,norm",
        "beams": "1,10,100",
        "max_len": "auto",
        "workers": "1",
        "norm_partial": "true",
    },
    "tune": {
        "gamma0": "0.2",
        "eta": "0.2",
        "clip": "0.5",
        "tol": "0.03",
        "max_epochs": "25",
    },
    "train": {
        "lam": "0.5",
        "smoothing": "0.1",
        "min_count": "1",
        "fractions": "1.0",
    },
    "gamma": {
        "grid": "0.0:2.0:0.1",
        "beam": "50",
    },
}


class ConfigError(ValueError):
    pass


def _floats(text: str) -> list[float]:
    """Comma list, or ``start:stop:step`` with stop included."""
    text = text.strip()
    if text.count(":") == 2 and "," not in text:
        start, stop, step = (float(x) for x in text.split(":"))
        if step <= 0:
            raise ConfigError("grid step must be positive")
        n = int(math.floor((stop - start) / step + 1e-9))
        return [round(start + i * step, 10) for i in range(n + 1)]
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


@dataclass
class ExperimentConfig:
    model: str = BUILTIN_BUDGET
    paths: dict[str, str] = field(default_factory=dict)
    out_dir: Path = Path("out")
    seed: int = 1
    modes: list[str] = field(default_factory=lambda: ["baseline", "reward", "norm"])
    beams: list[int] = field(default_factory=lambda: [1, 10, 100])
    max_len: int | None = None
    workers: int = 1
    norm_partial: bool = True
    tuner: dict[str, float] = field(default_factory=dict)
    lam: float = 0.5
    smoothing: float = 0.1
    min_count: int = 1
    fractions: list[float] = field(default_factory=lambda: [1.0])
    gamma_grid: list[float] = field(default_factory=list)
    gamma_beam: int = 50

    def validate(self, check_paths: bool = True) -> None:
        if not self.beams or any(b < 1 for b in self.beams):
            raise ConfigError("beam sizes must be positive")
        if self.beams != sorted(set(self.beams)):
            raise ConfigError("beam sizes must be strictly ascending")
        if any(not 0 < f <= 1 for f in self.fractions):
            raise ConfigError("training fractions must be in (0, 1]")
        if self.model == TOY and not (self.paths.get("train_src") and self.paths.get("train_tgt")):
            raise ConfigError("model = toy needs train_src and train_tgt")
        if check_paths:
            for key, value in self.paths.items():
                if value and not Path(value).exists():
                    raise ConfigError(f"{key}: no such file {value}")
            if self.model not in (BUILTIN_BUDGET, TOY) and not Path(self.model).exists():
                raise ConfigError(f"model: no such file {self.model}")


def _parser() -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    cp.read_dict(DEFAULTS)
    return cp


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    raw = configparser.ConfigParser(interpolation=None)
    raw.optionxform = str
    try:
        raw.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    for section in raw.sections():
        if section not in DEFAULTS:
            raise ConfigError(f"{source}: unknown section [{section}]")
        for key in raw[section]:
            if key not in DEFAULTS[section]:
                raise ConfigError(f"{source}: unknown key '{key}' in [{section}]")
    cp = _parser()
    cp.read_string(text, source=source)
    d, dec, tun, tr, gm = (cp[s] for s in ("data", "decode", "tune", "train", "gamma"))
    try:
        cfg = ExperimentConfig(
            model=d["model"].strip(),
            paths={k: d[k].strip() for k in ("train_src", "train_tgt", "dev_src", "dev_tgt",
                                             "test_src", "test_tgt")},
            out_dir=Path(d["out_dir"].strip()),
            seed=int(d["seed"]),
            modes=[m.strip() for m in dec["modes"].split(",") if m.strip()],
            beams=_ints(dec["beams"]),
            max_len=None if dec["max_len"].strip() == "auto" else int(dec["max_len"]),
            workers=int(dec["workers"]),
            norm_partial=_bool(dec["norm_partial"]),
            tuner={k: float(tun[k]) for k in DEFAULTS["tune"]},
            lam=float(tr["lam"]),
            smoothing=float(tr["smoothing"]),
            min_count=int(tr["min_count"]),
            fractions=_floats(tr["fractions"]),
            gamma_grid=_floats(gm["grid"]),
            gamma_beam=int(gm["beam"]),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{source}: {exc}") from None
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"), str(path))


def default_config() -> ExperimentConfig:
    return parse_config("")


def dump_defaults() -> str:
    buf = io.StringIO()
    _parser().write(buf)
    return buf.getvalue()
