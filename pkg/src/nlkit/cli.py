"""Command-line entry point: ``nlkit <subcommand> ...``.

Verdicts (nonlocal, infeasible, failed validation) are data and exit 0.
Exit 2 means a usage or input error, exit 3 a numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from .errors import EnumerationCapError, NlkitError, SolverError
from .monotones import chsh_measure, chsh_value, select_inputs
from .polytope import is_local, local_fraction
from .protocols import ProtocolSpec, run_protocol, write_trace
from .rates import rate_report, threshold
from .scenario import DEFAULT_TOL, DistributionTuple, make_theta_family, validate
from .transforms import check_order

SWEEP_COLUMNS = ("theta", "S", "N_tilde", "I", "eve_bound", "dw_lower", "g_of_N")


def _num(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(f"{float(v):.12g}")
    if isinstance(v, dict):
        return {str(k): _num(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_num(x) for x in v]
    if isinstance(v, np.ndarray):
        return _num(v.tolist())
    return v


def _load(path):
    try:
        return DistributionTuple.load(path)
    except (OSError, KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ValueError(f"cannot read tuple file {path}: {exc}") from exc


def cmd_validate(args):
    return validate(_load(args.file), args.tol).to_dict()


def cmd_chsh(args):
    P = _load(args.file)
    sel = select_inputs(P, "max_chsh") if (P.scenario.m, P.scenario.n) != (2, 2) else None
    Q = sel.restricted if sel else P
    return {
        "alice_inputs": list(sel.alice_inputs) if sel else [0, 1],
        "bob_inputs": list(sel.bob_inputs) if sel else [0, 1],
        "S": chsh_value(Q),
        "N_tilde": chsh_measure(Q),
    }


def cmd_local(args):
    P = _load(args.file)
    out = is_local(P, args.tol).to_dict()
    if args.fraction:
        out["local_fraction"] = local_fraction(P)
    return out


def cmd_order(args):
    return check_order(_load(args.source), _load(args.target), args.tol).to_dict()


def cmd_rates(args):
    return rate_report(_load(args.file)).to_dict()


def cmd_threshold(args):
    return {"n_star": threshold()}


def sweep_rows(start, stop, steps, extended=False):
    rows = []
    for th in np.linspace(start, stop, steps):
        rep = rate_report(make_theta_family(float(th), extended=extended))
        rows.append(
            {
                "theta": float(th),
                "S": rep.S,
                "N_tilde": rep.N_tilde,
                "I": rep.mutual_info,
                "eve_bound": rep.eve_bound,
                "dw_lower": rep.dw_lower,
                "g_of_N": rep.g_of_N,
            }
        )
    return rows


def cmd_sweep(args):
    if args.steps < 1:
        raise ValueError("--steps must be >= 1")
    rows = sweep_rows(args.start, args.stop, args.steps, args.extended)
    if not args.csv:
        return rows
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in rows:
        w.writerow([f"{r[c]:.12g}" for c in SWEEP_COLUMNS])
    return buf.getvalue()


def cmd_simulate(args):
    P = _load(args.file)
    if args.protocol == "measure_and_mask":
        spec = ProtocolSpec.measure_and_mask(args.xi, args.zeta)
    elif args.protocol == "nu_masked":
        nu = np.ones((2, 2), dtype=int)
        nu[args.nu_minus[0], args.nu_minus[1]] = -1
        spec = ProtocolSpec.nu_masked(nu)
    else:
        if not args.target:
            raise ValueError("--target is required for the wiring_lemma protocol")
        cert = check_order(P, _load(args.target), args.tol)
        if not cert.feasible:
            return {"kind": "infeasible", "order": cert.to_dict()}
        spec = ProtocolSpec.wiring_lemma(cert, args.x_out, args.y_out)
    res = run_protocol(P, spec, args.rounds, args.seed, workers=args.threads, trace=bool(args.trace))
    if args.trace:
        write_trace(args.trace, res.trace)
    out = res.to_dict()
    out["protocol"] = args.protocol
    out["seed"] = args.seed
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nlkit", description="Bell nonlocality and DIQKD rate toolkit")
    ap.add_argument("--out", help="write the result here instead of stdout")
    ap.add_argument("--threads", type=int, default=1)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check nonnegativity, normalization, no-signaling")
    p.add_argument("file")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("chsh", help="CHSH value and violation")
    p.add_argument("file")
    p.set_defaults(func=cmd_chsh)

    p = sub.add_parser("local", help="local polytope membership with certificate")
    p.add_argument("file")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--fraction", action="store_true", help="also report the local fraction")
    p.set_defaults(func=cmd_local)

    p = sub.add_parser("order", help="is SOURCE not less nonlocal than TARGET?")
    p.add_argument("source")
    p.add_argument("target")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.set_defaults(func=cmd_order)

    p = sub.add_parser("rates", help="closed-form key-rate bounds")
    p.add_argument("file")
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("theta-sweep", help="rate bounds along the theta family")
    p.add_argument("--from", dest="start", type=float, default=0.0)
    p.add_argument("--to", dest="stop", type=float, default=np.pi / 4)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--csv", action="store_true")
    p.add_argument("--extended", action="store_true", help="use the three-input family")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", help="Monte Carlo raw-key protocol")
    p.add_argument("file")
    p.add_argument("--protocol", choices=("measure_and_mask", "nu_masked", "wiring_lemma"), default="nu_masked")
    p.add_argument("--xi", type=int, default=0)
    p.add_argument("--zeta", type=int, default=0)
    p.add_argument("--nu-minus", type=int, nargs=2, default=(1, 1), metavar=("X", "Y"))
    p.add_argument("--target", help="target tuple for the wiring_lemma protocol")
    p.add_argument("--x-out", type=int, default=0)
    p.add_argument("--y-out", type=int, default=0)
    p.add_argument("--rounds", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--trace", help="dump per-round CSV here (small runs only)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("threshold", help="CHSH-violation threshold above which g > 0")
    p.set_defaults(func=cmd_threshold)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        result = args.func(args)
    except (SolverError, EnumerationCapError) as exc:
        print(f"nlkit: numerical failure: {exc}", file=sys.stderr)
        return 3
    except (NlkitError, ValueError, OSError) as exc:
        print(f"nlkit: error: {exc}", file=sys.stderr)
        return 2
    text = result if isinstance(result, str) else json.dumps(_num(result)) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
