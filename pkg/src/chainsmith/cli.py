"""Command-line front end.

Exit codes: 0 success, 2 a solver did not converge (or a check failed),
64 usage error, 65 infeasible or invalid target data, 66 unreadable input file.
Option defaults may also come from the ``cli`` object of the JSON file named by
``CHAINSMITH_CONFIG``; explicit flags win.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import analysis, config, mirror, numeric, revival
from .design import DesignResult
from .errors import (
    ChainsmithError,
    ConvergenceFailure,
    InvalidTarget,
    NoValidRoot,
)
from .io import ChainFileError, read_chain, simulate_probabilities, write_chain, write_probabilities_csv
from .pst import PstSpectrum, christandl_chain, pst_chain_from_spectrum, validate_synthesis_spectrum
from .spectral import (
    ChainSpec,
    TargetState,
    beta_residual,
    beta_table,
    eigensystem,
    fidelity,
    match_gauge,
    output_amplitudes,
)

EX_OK = 0
EX_CONVERGENCE = 2
EX_USAGE = 64
EX_DATAERR = 65
EX_NOINPUT = 66

BUILTIN_DEFAULTS = {
    "threshold": 1 - 1e-7,
    "seed": 0,
    "trials": 10000,
    "workers": 1,
    "t0": float(np.pi / 2),
    "theta": float(np.pi / 4),
    "steps": 201,
    "mode": "auto",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _amplitudes(text: str, n: int) -> np.ndarray:
    """Either a full comma list of N amplitudes or ``site:amp`` pairs; normalised."""
    if ":" in text:
        a = np.zeros(n)
        for item in text.split(","):
            site, amp = item.split(":")
            k = int(site)
            if not 1 <= k <= n:
                raise UsageError(f"site {k} outside 1..{n}")
            a[k - 1] = float(amp)
    else:
        a = np.asarray(_floats(text))
        if a.size != n:
            raise UsageError(f"--alpha has {a.size} entries, --n is {n}")
    if not np.any(a):
        raise UsageError("--alpha is identically zero")
    return a / np.linalg.norm(a)


def _spectrum(args, n: int) -> PstSpectrum:
    if args.spectrum:
        lam = np.asarray(_floats(args.spectrum))
        if lam.size != n:
            raise UsageError(f"--spectrum has {lam.size} values, --n is {n}")
        lam = np.sort(lam)[::-1]
        if not validate_synthesis_spectrum(lam, args.t0):
            raise InvalidTarget("spectrum cannot synthesise a real target at this t0")
        return PstSpectrum.from_eigenvalues(lam, args.t0)
    return PstSpectrum.linear(n, args.t0)


def _require_end_overlap(a: np.ndarray) -> None:
    if a[-1] == 0:
        raise InvalidTarget(
            "alpha_N = 0: a chain excited at site 1 must reach the last site, "
            "so the target needs nonzero amplitude there"
        )


def _target_from_arg(text: str, n: int, t0: float) -> TargetState:
    if text == "w-state":
        return numeric.w_state(n, t0)
    if text == "odd-sites":
        return numeric.odd_site_target(n, t0)
    path = Path(text)
    if path.suffix == ".json" and path.exists():
        data = json.loads(path.read_text(encoding="utf-8"))
        return TargetState.normalized(data["amplitudes"], input_site=int(data.get("input_site", 1)), t0=t0)
    a = _amplitudes(text, n)
    _require_end_overlap(a)
    return TargetState(a, t0=t0)


def _result_summary(r: DesignResult) -> dict:
    return {
        "fidelity": r.fidelity,
        "infidelity": r.infidelity,
        "j_max": r.j_max,
        "j_max_t0": r.j_max * r.target.t0,
        "beta_first_column": r.beta_first_column.tolist(),
        "min_weight": float(np.min(r.weights)),
        "diagnostics": {k: v for k, v in r.diagnostics.items() if k != "history"},
    }


def _write_design(args, results: list[DesignResult]) -> int:
    idx = min(args.select, len(results) - 1)
    best = results[idx]
    meta = {
        "designer": args.family,
        "target": best.target.amplitudes.tolist(),
        "input_site": best.target.input_site,
        "spectrum": best.spectrum.eigenvalues.tolist(),
        "fidelity": best.fidelity,
        "solution_index": idx,
        "solutions": len(results),
    }
    write_chain(args.out, best.chain, best.target.t0, meta)
    report = {"chain_file": str(args.out), "selected": idx, "threshold": args.threshold,
              "solutions": [_result_summary(r) for r in results]}
    report_path = Path(args.report) if args.report else Path(args.out).with_suffix(".report.json")
    report_path.write_text(json.dumps(report, indent=2, default=_json_default) + "\n", encoding="utf-8")
    print(f"wrote {args.out} (fidelity {best.fidelity:.15f}, J_max {best.j_max:.6g}) and {report_path}")
    return EX_OK if best.fidelity >= args.threshold else EX_CONVERGENCE


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)


def cmd_design(args) -> int:
    n = args.n
    if n is None or n < 1:
        raise UsageError("--n must be a positive integer")
    spectrum = _spectrum(args, n)
    fam = args.family
    if fam == "pst":
        if args.spectrum:
            chain = pst_chain_from_spectrum(spectrum)
        else:
            chain = christandl_chain(n, args.t0)
        a = np.zeros(n)
        a[-1] = 1.0
        target = TargetState(a, t0=args.t0)
        chain = match_gauge(chain, target)
        f, _ = fidelity(chain, target)
        write_chain(args.out, chain, args.t0, {"designer": "pst", "target": a.tolist(), "fidelity": f,
                                               "spectrum": spectrum.eigenvalues.tolist()})
        print(f"wrote {args.out} (fidelity {f:.15f})")
        return EX_OK if f >= args.threshold else EX_CONVERGENCE
    if fam == "end-pair":
        if args.alpha1 is None:
            raise UsageError("end-pair needs --alpha1")
        if not abs(args.alpha1) < 1:
            raise InvalidTarget("alpha_N = 0: |alpha1| must be below 1 so the last site is reached")
        results = [revival.design_end_pair(n, args.alpha1, spectrum.t0, spectrum)]
        return _write_design(args, results)
    if fam == "numeric":
        if not args.target:
            raise UsageError("numeric needs --target")
        target = _target_from_arg(args.target, n, spectrum.t0)
        mask = None
        if args.parity:
            mask = revival.parity_reduce(revival.RevivalSpec(target, spectrum))
        cfg = numeric.SolverConfig(max_iterations=args.max_iterations, spectrum=spectrum, parity_mask=mask)
        return _write_design(args, [numeric.design_numeric(target, cfg)])
    if not args.alpha:
        raise UsageError(f"{fam} needs --alpha")
    a = _amplitudes(args.alpha, n)
    _require_end_overlap(a)
    parity = True if args.parity else None
    if fam == "triple":
        if np.any(a[1:-2]):
            raise InvalidTarget("triple targets live on sites 1, N-1 and N only")
        results = revival.design_triple(n, a[0], a[-2], a[-1], spectrum.t0, spectrum)
    elif fam == "last-k":
        results = revival.design_last_k(n, a, spectrum.t0, spectrum, parity=parity)
    elif fam == "small-r":
        inner = np.flatnonzero(a[1:-1]) + 2
        if inner.size != 1 or inner[0] not in (2, 3):
            raise InvalidTarget("small-r targets live on sites 1, r and N with r in {2, 3}")
        r = int(inner[0])
        results = revival.design_small_r(n, a[0], a[r - 1], a[-1], r, spectrum.t0, spectrum, parity=parity)
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(f"unknown designer {fam}")
    return _write_design(args, results)


def _load_target(args, chain: ChainSpec, t0: float, meta: dict) -> TargetState:
    n = chain.n_sites
    if getattr(args, "target", None):
        return _target_from_arg(args.target, n, t0)
    if "target" in meta:
        return TargetState.normalized(meta["target"], input_site=int(meta.get("input_site", 1)), t0=t0)
    # fall back to what the chain actually produces, up to the global phase
    out = output_amplitudes(chain, t0, 1)
    k = int(np.argmax(np.abs(out)))
    return TargetState.normalized((out * np.conj(out[k]) / abs(out[k])).real, t0=t0)


def cmd_simulate(args) -> int:
    chain, t0, meta = read_chain(args.chain)
    t_end = t0 if args.t_end is None else args.t_end
    if args.steps < 1:
        raise UsageError("--steps must be at least 1")
    times = np.linspace(args.t_start, t_end, args.steps)
    inp = args.input or int(meta.get("input_site", 1))
    probs = simulate_probabilities(chain, times, inp)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            write_probabilities_csv(fh, times, probs)
    else:
        write_probabilities_csv(sys.stdout, times, probs)
    return EX_OK


def _reference_for(chain: ChainSpec, t0: float, path: str | None) -> ChainSpec:
    if path:
        return read_chain(path)[0]
    lam = eigensystem(chain).eigenvalues
    return pst_chain_from_spectrum(PstSpectrum.from_eigenvalues(lam, t0))


def _emit_json(args, payload: dict) -> None:
    text = json.dumps(payload, indent=2, default=_json_default) + "\n"
    if getattr(args, "out", None):
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_speed(args) -> int:
    chain, t0, meta = read_chain(args.chain)
    target = _load_target(args, chain, t0, meta)
    reference = _reference_for(chain, t0, args.reference)
    rep = analysis.speed_report(chain, target, reference)
    payload = rep.to_dict()
    if np.allclose(np.abs(target.amplitudes), 1 / np.sqrt(chain.n_sites), atol=1e-12, rtol=0):
        payload["gate_model_j_max_t0"] = analysis.gate_model_time(chain.n_sites, target)
        if chain.n_sites == 21:
            payload["published_gate_model_j_max_t0"] = analysis.PUBLISHED_GATE_TIME_N21
    _emit_json(args, payload)
    return EX_OK


def cmd_robustness(args) -> int:
    chain, t0, meta = read_chain(args.chain)
    target = _load_target(args, chain, t0, meta)
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    reports = analysis.robustness_sweep(chain, target, args.eps, args.trials, args.seed, args.mode, args.workers)
    rows = [r.to_dict() for r in reports]
    if args.format == "json":
        _emit_json(args, {"reports": rows})
        return EX_OK
    stream = open(args.out, "w", encoding="utf-8", newline="") if args.out else sys.stdout
    try:
        writer = csv.DictWriter(stream, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    finally:
        if args.out:
            stream.close()
    return EX_OK


def cmd_extend(args) -> int:
    chain, t0, meta = read_chain(args.chain)
    ext = mirror.extend_from_middle(chain, args.theta)
    new_meta = {"designer": "extend", "source": str(args.chain), "theta": args.theta}
    if "target" in meta:
        tg = mirror.predict_extended_target(TargetState.normalized(meta["target"]).amplitudes, args.theta, t0)
        f, _ = fidelity(ext, tg)
        new_meta.update({"target": tg.amplitudes.tolist(), "input_site": tg.input_site, "fidelity": f})
    else:
        new_meta["input_site"] = chain.n_sites
    write_chain(args.out, ext, t0, new_meta)
    print(f"wrote {args.out} ({ext.n_sites} sites)")
    return EX_OK


def cmd_verify(args) -> int:
    chain, t0, meta = read_chain(args.chain)
    target = _load_target(args, chain, t0, meta)
    es = eigensystem(chain)
    f, phase = fidelity(chain, target, es)
    checks = {"fidelity": f, "phase": phase,
              "synthesis_spectrum": validate_synthesis_spectrum(es.eigenvalues, t0),
              "orthonormality_error": float(np.max(np.abs(es.vectors.T @ es.vectors - np.eye(chain.n_sites))))}
    ok = f >= args.threshold
    if target.input_site == 1 and checks["synthesis_spectrum"]:
        reference = _reference_for(chain, t0, args.reference)
        table = beta_table(chain, reference)
        checks["beta_structure_error"] = table.structure_error()
        checks["beta_residual"] = beta_residual(table, chain, reference)
        checks["bottom_row_error"] = float(np.max(np.abs(np.abs(table.bottom_row) - np.abs(target.amplitudes))))
        ok = ok and checks["beta_residual"] <= 1e-9 * max(1.0, float(np.max(np.abs(es.eigenvalues))))
    checks["passed"] = bool(ok)
    _emit_json(args, checks)
    return EX_OK if ok else EX_CONVERGENCE


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="chainsmith", description="Design and check spin-chain couplings for state synthesis.")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("design", help="design a chain and write it to a JSON chain file")
    d.add_argument("family", choices=["pst", "end-pair", "triple", "last-k", "small-r", "numeric"])
    d.add_argument("--n", type=int, required=True)
    d.add_argument("--alpha", help="amplitudes: N comma-separated values or site:amp pairs (normalised)")
    d.add_argument("--alpha1", type=float, help="site-1 amplitude for end-pair")
    d.add_argument("--target", help="numeric target: w-state, odd-sites, amplitude list or JSON file")
    d.add_argument("--spectrum", help="comma-separated eigenvalues (default: linear spectrum)")
    d.add_argument("--t0", type=float)
    d.add_argument("--parity", action="store_true", help="impose the zero-field parity reduction")
    d.add_argument("--max-iterations", type=int, default=200)
    d.add_argument("--select", type=int, default=0, help="solution index to write (sorted by J_max)")
    d.add_argument("--threshold", type=float)
    d.add_argument("--out", default="chain.json")
    d.add_argument("--report", help="design report path (default: <out>.report.json)")
    d.set_defaults(func=cmd_design)

    s = sub.add_parser("simulate", help="site probabilities on a time grid as CSV")
    s.add_argument("--chain", required=True)
    s.add_argument("--t-start", type=float, default=0.0)
    s.add_argument("--t-end", type=float)
    s.add_argument("--steps", type=int)
    s.add_argument("--input", type=int, help="input site (default: from the chain file, else 1)")
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("speed", help="J_max t0 and coupling-product bounds as JSON")
    sp.add_argument("--chain", required=True)
    sp.add_argument("--reference", help="reference chain file (default: PST chain of the same spectrum)")
    sp.add_argument("--target")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_speed)

    r = sub.add_parser("robustness", help="Monte-Carlo fidelity under static disorder")
    r.add_argument("--chain", required=True)
    r.add_argument("--eps", type=_floats, default=[0.0, 0.001, 0.005, 0.01, 0.02])
    r.add_argument("--trials", type=int)
    r.add_argument("--seed", type=int)
    r.add_argument("--mode", choices=["auto", "multiplicative", "additive"])
    r.add_argument("--workers", type=int)
    r.add_argument("--target")
    r.add_argument("--format", choices=["csv", "json"], default="csv")
    r.add_argument("--out")
    r.set_defaults(func=cmd_robustness)

    e = sub.add_parser("extend", help="mirror-extend a chain for release from the middle site")
    e.add_argument("--chain", required=True)
    e.add_argument("--theta", type=float)
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_extend)

    v = sub.add_parser("verify", help="fidelity, spectrum and beta-table checks as JSON")
    v.add_argument("--chain", required=True)
    v.add_argument("--reference")
    v.add_argument("--target")
    v.add_argument("--threshold", type=float)
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)
    return p


def _apply_defaults(args, cfg: dict) -> None:
    """Fill unset options from the config file's ``cli`` object, then built-ins."""
    from_file = cfg.get("cli", {}) if isinstance(cfg.get("cli", {}), dict) else {}
    for key, builtin in BUILTIN_DEFAULTS.items():
        if hasattr(args, key) and getattr(args, key) is None:
            setattr(args, key, from_file.get(key, builtin))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config.load_config()
    except (OSError, ValueError) as exc:
        print(f"chainsmith: cannot read config: {exc}", file=sys.stderr)
        return EX_NOINPUT
    _apply_defaults(args, cfg)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"chainsmith: {exc}", file=sys.stderr)
        return EX_USAGE
    except ChainFileError as exc:
        print(f"chainsmith: {exc}", file=sys.stderr)
        return EX_NOINPUT
    except ConvergenceFailure as exc:
        print(f"chainsmith: did not converge: {exc} (residual {exc.residual:.3e})", file=sys.stderr)
        return EX_CONVERGENCE
    except (InvalidTarget, NoValidRoot, ChainsmithError) as exc:
        print(f"chainsmith: {exc}", file=sys.stderr)
        return EX_DATAERR
    except OSError as exc:
        print(f"chainsmith: {exc}", file=sys.stderr)
        return EX_NOINPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
