from __future__ import annotations

import csv
import io
import json

import numpy as np
import pytest

from chainsmith import ChainSpec
from chainsmith.cli import main
from chainsmith.config import ENV_VAR
from chainsmith.io import read_chain, write_chain

from .conftest import EQ6_COUPLINGS, EQ6_FIELDS


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_design_triple_matches_closed_form(tmp_path, capsys):
    out = tmp_path / "t5.json"
    code, _, _ = run(["design", "triple", "--n", "5", "--alpha", "0,0,0,0.7071,0.7071",
                      "--spectrum", "4,2,0,-2,-4", "--out", str(out)], capsys)
    assert code == 0
    chain, t0, meta = read_chain(out)
    assert np.allclose(np.abs(chain.fields), np.abs(EQ6_FIELDS), atol=1e-8)
    assert np.allclose(np.abs(chain.couplings), np.abs(EQ6_COUPLINGS), atol=1e-8)
    report = json.loads(out.with_suffix(".report.json").read_text())
    assert len(report["solutions"]) == 2


def test_design_pst(tmp_path, capsys):
    out = tmp_path / "p.json"
    assert run(["design", "pst", "--n", "21", "--out", str(out)], capsys)[0] == 0
    chain, _, _ = read_chain(out)
    n = np.arange(1, 21)
    assert np.allclose(np.abs(chain.couplings), np.sqrt(n * (21 - n)))


def test_numeric_w_state_and_speed(tmp_path, capsys):
    w = tmp_path / "w.json"
    p = tmp_path / "p.json"
    assert run(["design", "numeric", "--n", "21", "--target", "w-state", "--out", str(w)], capsys)[0] == 0
    assert run(["design", "pst", "--n", "21", "--out", str(p)], capsys)[0] == 0
    meta = read_chain(w)[2]
    assert 1 - meta["fidelity"] <= 1e-8
    code, text, _ = run(["speed", "--chain", str(w), "--reference", str(p)], capsys)
    assert code == 0
    data = json.loads(text)
    assert abs(data["j_max_t0"] - 14.6) < 1.46
    assert data["published_gate_model_j_max_t0"] == 23.0


def test_simulate_csv(tmp_path, capsys):
    path = tmp_path / "c.json"
    write_chain(path, ChainSpec(EQ6_FIELDS, EQ6_COUPLINGS))
    code, text, _ = run(["simulate", "--chain", str(path), "--steps", "11"], capsys)
    assert code == 0
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["t", "site_1", "site_2", "site_3", "site_4", "site_5"]
    assert len(rows) == 12
    for row in rows[1:]:
        assert abs(sum(float(x) for x in row[1:]) - 1) < 1e-10
    last = [float(x) for x in rows[-1][1:]]
    assert np.allclose(last, [0, 0, 0, 0.5, 0.5], atol=1e-10)


def test_simulate_single_time(tmp_path, capsys):
    path = tmp_path / "c.json"
    write_chain(path, ChainSpec(EQ6_FIELDS, EQ6_COUPLINGS))
    code, text, _ = run(["simulate", "--chain", str(path), "--steps", "1", "--t-end", "0"], capsys)
    rows = list(csv.reader(io.StringIO(text)))
    assert code == 0 and len(rows) == 2
    assert np.allclose([float(x) for x in rows[1]], [0.0, 1.0, 0.0, 0.0, 0.0, 0.0], atol=1e-14)


def test_robustness_zero_eps(tmp_path, capsys):
    path = tmp_path / "c.json"
    write_chain(path, ChainSpec(EQ6_FIELDS, EQ6_COUPLINGS), meta={"target": [0, 0, 0, 0.5**0.5, 0.5**0.5]})
    code, text, _ = run(["robustness", "--chain", str(path), "--eps", "0", "--trials", "10",
                         "--format", "json"], capsys)
    assert code == 0
    (rep,) = json.loads(text)["reports"]
    assert rep["mean_fidelity"] == pytest.approx(rep["best_fidelity"], abs=1e-14)
    code, text2, _ = run(["robustness", "--chain", str(path), "--eps", "0.01", "--trials", "200", "--seed", "4"],
                         capsys)
    code, text3, _ = run(["robustness", "--chain", str(path), "--eps", "0.01", "--trials", "200", "--seed", "4"],
                         capsys)
    assert text2 == text3
    row = list(csv.DictReader(io.StringIO(text2)))[0]
    assert float(row["best_fidelity"]) >= float(row["mean_fidelity"])


def test_extend_and_verify(tmp_path, capsys):
    small = tmp_path / "s.json"
    big = tmp_path / "b.json"
    code, _, _ = run(["design", "small-r", "--n", "11", "--alpha", "1:1,3:1.4142135623730951,11:1.4142135623730951",
                      "--out", str(small)], capsys)
    assert code == 0
    assert run(["extend", "--chain", str(small), "--out", str(big)], capsys)[0] == 0
    chain, _, meta = read_chain(big)
    assert chain.n_sites == 21 and meta["input_site"] == 11
    assert meta["fidelity"] >= 1 - 1e-7
    code, text, _ = run(["verify", "--chain", str(small)], capsys)
    assert code == 0 and json.loads(text)["passed"]


def test_round_trip_lossless(tmp_path):
    rng = np.random.default_rng(0)
    chain = ChainSpec(rng.normal(size=6), rng.normal(size=5))
    path = tmp_path / "x.json"
    write_chain(path, chain, 0.123456789012345678, {"k": 1})
    back, t0, meta = read_chain(path)
    assert np.array_equal(back.fields, chain.fields)
    assert np.array_equal(back.couplings, chain.couplings)
    assert t0 == 0.123456789012345678 and meta == {"k": 1}


@pytest.mark.parametrize("argv", [
    ["design"],
    ["design", "triple", "--n", "5", "--wat"],
    ["nonsense"],
    ["design", "triple", "--n", "5", "--alpha", "1,2"],
])
def test_usage_errors(argv, capsys):
    with pytest.raises(SystemExit) as info:
        rc = main(argv)
        raise SystemExit(rc)
    assert info.value.code == 64


def test_infeasible_target(tmp_path, capsys):
    code, _, err = run(["design", "triple", "--n", "5", "--alpha", "0,0,0,1,0", "--out", str(tmp_path / "x.json")],
                       capsys)
    assert code == 65
    assert "alpha_N = 0" in err


def test_missing_and_corrupt_files(tmp_path, capsys):
    assert run(["simulate", "--chain", str(tmp_path / "missing.json")], capsys)[0] == 66
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["speed", "--chain", str(bad)], capsys)[0] == 66
    wrong = tmp_path / "wrong.json"
    wrong.write_text(json.dumps({"format": 1, "n": 3, "fields": [0, 0], "couplings": [1]}))
    assert run(["verify", "--chain", str(wrong)], capsys)[0] == 66


def test_convergence_failure_exit(tmp_path, capsys, monkeypatch):
    from chainsmith import numeric
    from chainsmith.errors import ConvergenceFailure

    def stalled(*args, **kwargs):
        raise ConvergenceFailure("stalled", None, 1e-3)

    monkeypatch.setattr(numeric, "design_numeric", stalled)
    code, _, err = run(["design", "numeric", "--n", "21", "--target", "w-state",
                        "--out", str(tmp_path / "x.json")], capsys)
    assert code == 2 and "stalled" in err


def test_verify_failure_exit(tmp_path, capsys):
    path = tmp_path / "c.json"
    write_chain(path, ChainSpec(EQ6_FIELDS, EQ6_COUPLINGS * 1.01), meta={"target": [0, 0, 0, 0.5**0.5, 0.5**0.5]})
    code, text, _ = run(["verify", "--chain", str(path), "--threshold", "0.999999"], capsys)
    assert code == 2 and not json.loads(text)["passed"]


def test_config_file_defaults(tmp_path, capsys, monkeypatch):
    path = tmp_path / "c.json"
    write_chain(path, ChainSpec(EQ6_FIELDS, EQ6_COUPLINGS), meta={"target": [0, 0, 0, 0.5**0.5, 0.5**0.5]})
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"cli": {"trials": 7, "seed": 11}}))
    monkeypatch.setenv(ENV_VAR, str(cfg))
    code, text, _ = run(["robustness", "--chain", str(path), "--eps", "0.01", "--format", "json"], capsys)
    rep = json.loads(text)["reports"][0]
    assert code == 0 and rep["trials"] == 7 and rep["rng_seed"] == 11
    code, text, _ = run(["robustness", "--chain", str(path), "--eps", "0.01", "--format", "json", "--trials", "3"],
                        capsys)
    assert json.loads(text)["reports"][0]["trials"] == 3
