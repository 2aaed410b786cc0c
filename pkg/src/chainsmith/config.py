"""Numerical tolerances and their loading from a JSON config file.

Precedence is explicit keyword > ``CHAINSMITH_CONFIG`` file > defaults.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass
from pathlib import Path

ENV_VAR = "CHAINSMITH_CONFIG"


@dataclass(frozen=True)
class Tolerances:
    spectral_residual: float = 1e-10  # relative to max|eigenvalue|
    orthonormality: float = 1e-12
    degeneracy_gap: float = 1e-12  # relative to max|eigenvalue|
    spectrum_match: float = 1e-8
    breakdown: float = 1e-12  # on J_m^2, relative to max eigenvalue^2
    weight_floor: float = 1e-12
    angular: float = 1e-9
    moment_floor: float = 1e-12


def load_config(path: str | os.PathLike | None = None) -> dict:
    """Read the JSON config named by ``path`` or by the environment variable.

    Returns an empty dict when neither is set.
    """
    if path is None:
        path = os.environ.get(ENV_VAR)
    if not path:
        return {}
    with open(Path(path), encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"config file {path} must hold a JSON object")
    return data


def tolerances(**overrides) -> Tolerances:
    fields = {f.name for f in dataclasses.fields(Tolerances)}
    from_file = load_config().get("tolerances", {})
    merged = {k: float(v) for k, v in from_file.items() if k in fields}
    merged.update({k: v for k, v in overrides.items() if v is not None})
    return Tolerances(**merged)


DEFAULT = Tolerances()
