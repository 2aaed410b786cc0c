"""Chain files (versioned JSON) and CSV time series."""

from __future__ import annotations

import csv
import io
import json
import os
from pathlib import Path

import numpy as np

from .errors import ChainsmithError, InvalidChain
from .spectral import ChainSpec, basis_state, eigensystem

__all__ = ["ChainFileError", "chain_to_dict", "chain_from_dict", "write_chain", "read_chain",
           "simulate_probabilities", "write_probabilities_csv"]

FORMAT_VERSION = 1


class ChainFileError(ChainsmithError, OSError):
    """A chain file is missing, unreadable or malformed."""


def chain_to_dict(chain: ChainSpec, t0: float = np.pi / 2, meta: dict | None = None) -> dict:
    # json writes floats with the shortest repr that round-trips exactly
    return {
        "format": FORMAT_VERSION,
        "n": chain.n_sites,
        "fields": [float(x) for x in chain.fields],
        "couplings": [float(x) for x in chain.couplings],
        "t0": float(t0),
        "meta": dict(meta or {}),
    }


def chain_from_dict(data: dict) -> tuple[ChainSpec, float, dict]:
    if not isinstance(data, dict):
        raise ChainFileError("chain file must hold a JSON object")
    if data.get("format") != FORMAT_VERSION:
        raise ChainFileError(f"unsupported chain file format {data.get('format')!r}")
    try:
        n = int(data["n"])
        chain = ChainSpec(np.asarray(data["fields"], dtype=float), np.asarray(data["couplings"], dtype=float))
        t0 = float(data.get("t0", np.pi / 2))
    except (KeyError, TypeError, ValueError) as exc:
        raise ChainFileError(f"malformed chain file: {exc}") from exc
    if chain.n_sites != n:
        raise ChainFileError(f"chain file declares n = {n} but holds {chain.n_sites} fields")
    meta = data.get("meta") or {}
    if not isinstance(meta, dict):
        raise ChainFileError("chain file 'meta' must be an object")
    return chain, t0, meta


def write_chain(path: str | os.PathLike, chain: ChainSpec, t0: float = np.pi / 2,
                meta: dict | None = None) -> None:
    text = json.dumps(chain_to_dict(chain, t0, meta), indent=2)
    Path(path).write_text(text + "\n", encoding="utf-8")


def read_chain(path: str | os.PathLike) -> tuple[ChainSpec, float, dict]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ChainFileError(f"cannot read chain file {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ChainFileError(f"chain file {path} is not valid JSON: {exc}") from exc
    try:
        return chain_from_dict(data)
    except InvalidChain as exc:
        raise ChainFileError(f"chain file {path} holds an invalid chain: {exc}") from exc


def simulate_probabilities(chain: ChainSpec, times, input_site: int = 1) -> np.ndarray:
    """``|<n| exp(-iHt) |input>|^2`` with one row per time."""
    es = eigensystem(chain)
    v = es.vectors
    c = v.T @ basis_state(chain.n_sites, input_site)
    t = np.asarray(times, dtype=float).reshape(-1)
    amps = (v[None, :, :] * (np.exp(-1j * np.outer(t, es.eigenvalues)) * c)[:, None, :]).sum(axis=2)
    return np.abs(amps) ** 2


def write_probabilities_csv(stream, times, probs) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    n = probs.shape[1]
    writer.writerow(["t"] + [f"site_{k}" for k in range(1, n + 1)])
    for t, row in zip(times, probs):
        writer.writerow([repr(float(t))] + [repr(float(p)) for p in row])


def probabilities_csv_text(times, probs) -> str:
    buf = io.StringIO()
    write_probabilities_csv(buf, times, probs)
    return buf.getvalue()
