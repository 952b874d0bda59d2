"""Experiment configuration: flat key=value files, flag overrides, hashing."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field as dc_field, asdict

from .errors import ConfigInvalid

# Named constants used by the discrepancy experiments.  delta2 depends on
# kappa and the lattice rank l; see delta2_default().
DELTA1 = 0.2
KAPPA_DEFAULT = 4.5
EPS0_DEFAULT = 0.1


def delta2_default(l: int, kappa: float = KAPPA_DEFAULT) -> float:
    """Second discrepancy exponent: 0.1 / (kappa * (2l+2)^2)."""
    return 0.1 / (kappa * (2 * l + 2) ** 2)


@dataclass
class ExperimentConfig:
    command: str = ""
    field: str = "rational"            # "rational" | "quadratic:d"
    form: str = "1,1,-1"               # diagonal entries or "disc"
    m: str = "1"
    norm: str = "euclidean"
    T: str = ""                        # comma-separated sweep values
    tau: str = ""
    s: str = ""
    direction: str = "1"
    cutoff: float = 1000.0
    eps0: float = EPS0_DEFAULT
    kappa: float = KAPPA_DEFAULT
    delta_grid: str = "0.3"
    seed: int = 20240901
    workers: int = 0                   # 0 -> logical cores
    quad_tol: float = 1e-6
    point_budget: int = 50_000_000
    plateau_budget: int = 4096
    out: str = ""
    extra: dict = dc_field(default_factory=dict)

    def as_dict(self) -> dict:
        d = asdict(self)
        d.update(d.pop("extra"))
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.as_dict(), sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:12]

    def header_lines(self) -> list[str]:
        lines = [f"# config_hash={self.config_hash()}"]
        for k, v in sorted(self.as_dict().items()):
            if v != "" and v != {}:
                lines.append(f"# {k}={v}")
        return lines


_FIELDS = {f.name for f in ExperimentConfig.__dataclass_fields__.values()}  # type: ignore[attr-defined]


def load_config(path: str | None, overrides: dict) -> ExperimentConfig:
    """Build a config from an optional key=value file plus flag overrides."""
    cfg = ExperimentConfig()
    if path:
        try:
            with open(path) as fh:
                for raw in fh:
                    line = raw.strip()
                    if not line or line.startswith("#"):
                        continue
                    if "=" not in line:
                        raise ConfigInvalid(f"malformed config line: {line!r}")
                    key, val = line.split("=", 1)
                    _assign(cfg, key.strip(), val.strip())
        except OSError as e:
            raise ConfigInvalid(f"cannot read config file {path}: {e}") from e
    for key, val in overrides.items():
        if val is not None:
            _assign(cfg, key, val)
    if cfg.workers <= 0:
        import os
        cfg.workers = os.cpu_count() or 1
    return cfg


def _assign(cfg: ExperimentConfig, key: str, val) -> None:
    if key not in _FIELDS:
        cfg.extra[key] = val
        return
    current = getattr(cfg, key)
    try:
        if isinstance(current, bool):
            val = str(val).lower() in ("1", "true", "yes")
        elif isinstance(current, int):
            val = int(val)
        elif isinstance(current, float):
            val = float(val)
        else:
            val = str(val)
    except ValueError as e:
        raise ConfigInvalid(f"bad value for key {key!r}: {val!r}") from e
    setattr(cfg, key, val)


def parse_float_list(text: str, key: str) -> list[float]:
    if not text:
        raise ConfigInvalid(f"missing required key {key!r}")
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as e:
        raise ConfigInvalid(f"bad list for key {key!r}: {text!r}") from e
