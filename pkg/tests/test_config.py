from __future__ import annotations

import json

import pytest

from chainsmith.config import ENV_VAR, Tolerances, load_config, tolerances


def test_defaults_without_env(monkeypatch):
    monkeypatch.delenv(ENV_VAR, raising=False)
    assert load_config() == {}
    assert tolerances() == Tolerances()


def test_file_then_keyword(monkeypatch, tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"tolerances": {"spectrum_match": 1e-6, "angular": 1e-7, "unknown": 3}}))
    monkeypatch.setenv(ENV_VAR, str(path))
    tol = tolerances(angular=1e-5)
    assert tol.spectrum_match == 1e-6
    assert tol.angular == 1e-5
    assert tol.breakdown == Tolerances().breakdown


def test_non_object_rejected(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text("[1, 2]")
    with pytest.raises(ValueError):
        load_config(path)
