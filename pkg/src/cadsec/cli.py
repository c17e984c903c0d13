"""Command-line interface: ``cadsec {analyze,critical,sweep,simulate}``.

Output is JSON on stdout (CSV for ``sweep``); numbers carry 9 significant
digits.  Exit codes: 0 success, 2 usage or validation error, 1 anything else.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .cad import cad_statistics_d, simulate_cad
from .errors import ParseError, ValidationError
from .eve import qubit_ensemble, qudit_ensemble
from .keyrate import holevo_post_cad_d, minimal_block_size, minimal_block_size_d, qubit_rates
from .security import (
    MODES,
    PROTOCOLS,
    attack_oneway_check,
    bb84_worst_attack,
    closed_form_bound,
    critical_function,
    critical_rate,
    qubit_security,
    qudit_security,
    two_bases_worst_attack,
)
from .states import (
    BellDiagonalState,
    GeneralizedPauliChannel,
    bb84_attack_state,
    canonicalize,
    fidelity_disturbances,
    is_entangled,
    make_bell_diagonal,
    protocol_channel_d,
    qber,
    sixstate_attack_state,
)

SIG_DIGITS = 9
EXIT_OK, EXIT_INTERNAL, EXIT_USAGE = 0, 1, 2


def _fmt(value: Any) -> Any:
    if isinstance(value, dict):
        return {k: _fmt(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_fmt(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if not math.isfinite(v):
            return None
        return float(f"{v:.{SIG_DIGITS}g}")
    return value


def _emit(doc: dict, pretty: bool) -> None:
    doc = _fmt(doc)
    if pretty:
        for key, val in doc.items():
            print(f"{key:>28}: {json.dumps(val)}")
    else:
        print(json.dumps(doc, sort_keys=True))


# ---------------------------------------------------------------------------
# channel files


def load_channel(path: str | Path) -> BellDiagonalState | GeneralizedPauliChannel:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: not valid JSON ({exc.msg} at line {exc.lineno})") from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: top level must be an object")
    kind = doc.get("kind")
    if kind == "qubit":
        lam = doc.get("lambdas")
        if not isinstance(lam, list) or len(lam) != 4:
            raise ParseError("lambdas: expected a list of 4 numbers")
        return make_bell_diagonal([_number(v, f"lambdas[{i}]") for i, v in enumerate(lam)])
    if kind == "qudit":
        d = doc.get("d")
        if not isinstance(d, int) or isinstance(d, bool) or d < 2:
            raise ParseError("d: expected an integer >= 2")
        rows = doc.get("p")
        if not isinstance(rows, list) or len(rows) != d:
            raise ParseError(f"p: expected {d} rows")
        p = []
        for m, row in enumerate(rows):
            if not isinstance(row, list) or len(row) != d:
                raise ParseError(f"p[{m}]: expected {d} entries")
            p.append([_number(v, f"p[{m}][{n}]") for n, v in enumerate(row)])
        return GeneralizedPauliChannel.from_matrix(p)
    raise ParseError(f"kind: expected 'qubit' or 'qudit', got {kind!r}")


def _number(v: Any, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ParseError(f"{where}: expected a number, got {v!r}")
    return float(v)


def _parse_n_list(text: str) -> list[int]:
    try:
        Ns = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad N list {text!r}") from exc
    if not Ns or min(Ns) < 1:
        raise argparse.ArgumentTypeError("N values must be >= 1")
    return Ns


# ---------------------------------------------------------------------------
# commands


def cmd_analyze(args) -> dict:
    ch = load_channel(args.channel_file)
    if isinstance(ch, BellDiagonalState):
        return _analyze_qubit(ch, args)
    return _analyze_qudit(ch, args)


def _analyze_qubit(state: BellDiagonalState, args) -> dict:
    doc: dict[str, Any] = {"channel": {"kind": "qubit", "lambdas": list(state.lambdas)}}
    if args.canonicalize:
        canon, perm = canonicalize(state)
        doc["canonical"] = {"lambdas": list(canon.lambdas), "permutation": list(perm.perm)}
        state = canon
    ens = qubit_ensemble(state)
    verdict = qubit_security(ens)
    min_n = minimal_block_size(ens, args.n_max) if verdict.secure else None
    i_ab, i_ae, rate = qubit_rates(ens, args.n_list)
    doc.update({
        "entangled": is_entangled(state),
        "qber": qber(state),
        "lambda_eq": ens.lambda_eq,
        "lambda_dif": ens.lambda_dif,
        "secure": verdict.secure,
        "margin": verdict.margin,
        "n_max": args.n_max,
        "minimal_N": min_n,
        "rates": [{"N": n, "i_ab": a, "i_ae": e, "rate": r}
                  for n, a, e, r in zip(args.n_list, i_ab, i_ae, rate)],
        "attack": attack_oneway_check(ens, (1, args.n_max)).to_dict(),
    })
    return doc


def _analyze_qudit(ch: GeneralizedPauliChannel, args) -> dict:
    F, D = fidelity_disturbances(ch)
    ens = qudit_ensemble(ch)
    verdict = qudit_security(ens)
    min_n = minimal_block_size_d(ens, args.n_max) if verdict.secure else None
    rates = []
    for n in args.n_list:
        rep = holevo_post_cad_d(ens, n)
        rates.append({"N": n, "i_ab": rep.i_ab, "i_ae": rep.i_ae, "rate": rep.rate})
    return {
        "channel": {"kind": "qudit", "d": ch.d, "p": ch.p.tolist()},
        "F": F,
        "D": list(D),
        "secure": verdict.secure,
        "margin": verdict.margin,
        "n_max": args.n_max,
        "minimal_N": min_n,
        "rates": rates,
    }


def cmd_critical(args) -> dict:
    value = critical_rate(args.protocol, args.mode, args.d)
    doc = {"protocol": args.protocol, "mode": args.mode, "d": _dimension(args.protocol, args.d),
           "critical_rate": value}
    if args.mode == "two-way":
        kind = {"bb84": "two-bases", "sixstate": "d-plus-1-bases"}.get(args.protocol, args.protocol)
        closed = closed_form_bound(kind, doc["d"])
        doc.update({"closed_form": closed, "difference": value - closed})
    return doc


def _dimension(protocol: str, d: int | None) -> int:
    return 2 if protocol in ("bb84", "sixstate") else int(d)


def _sweep_row(protocol: str, d: int, err: float, n_max: int) -> list:
    """(margin, secure, minimal_N, rate_at_minimal_N) against the family's worst attack."""
    if protocol in ("bb84", "sixstate"):
        state = (bb84_attack_state(err, bb84_worst_attack(err)[0]) if protocol == "bb84"
                 else sixstate_attack_state(err))
        ens = qubit_ensemble(state)
        verdict = qubit_security(ens)
        n = minimal_block_size(ens, n_max) if verdict.secure else None
        rate = float(qubit_rates(ens, [n])[2][0]) if n else None
    else:
        F = 1.0 - err
        y = two_bases_worst_attack(d, F)[0] if protocol == "two-bases" else None
        ens = qudit_ensemble(protocol_channel_d(protocol, d, F, y))
        verdict = qudit_security(ens)
        n = minimal_block_size_d(ens, n_max) if verdict.secure else None
        rate = holevo_post_cad_d(ens, n).rate if n else None
    return [verdict.margin, verdict.secure, n, rate]


def cmd_sweep(args) -> None:
    if args.steps < 2:
        raise ValidationError(f"steps={args.steps} must be >= 2")
    if not args.start < args.stop:
        raise ValidationError("--from must be smaller than --to")
    d = _dimension(args.protocol, args.d)
    critical_function(args.protocol, "two-way", args.d)  # validates the combination
    grid = np.linspace(args.start, args.stop, args.steps)
    out = sys.stdout if args.out in (None, "-") else open(args.out, "w", newline="")
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["error_rate", "margin", "secure", "minimal_N", "rate_at_minimal_N"])
        for err in grid:
            margin, secure, n, rate = _sweep_row(args.protocol, d, float(err), args.n_max)
            writer.writerow([_fmt(float(err)), _fmt(margin), str(secure).lower(),
                             "" if n is None else n, "" if rate is None else _fmt(rate)])
    finally:
        if out is not sys.stdout:
            out.close()


def cmd_simulate(args) -> dict:
    ch = load_channel(args.channel_file)
    if isinstance(ch, BellDiagonalState):
        ch = ch.to_channel()
    F, D = fidelity_disturbances(ch)
    rep = simulate_cad(F, D, args.N, args.trials, args.variant, args.seed, args.workers)
    stats = cad_statistics_d(F, D, args.N)
    doc = rep.to_dict()
    predicted = stats.weights
    acc = rep.accepted
    z_acc = _zscore(acc, rep.trials, stats.p_ok)
    z_cls = [_zscore(c, acc, p) for c, p in zip(rep.error_counts, predicted)]
    doc["analytic"] = {"p_ok": stats.p_ok, "fidelity_after": stats.fidelity_after,
                       "disturbances_after": list(stats.disturbances_after)}
    doc["z_scores"] = {"acceptance": z_acc, "classes": z_cls}
    return doc


def _zscore(k: int, n: int, p: float) -> float | None:
    var = n * p * (1.0 - p)
    if n == 0:
        return None
    if var == 0:
        return 0.0 if k == round(n * p) else math.inf
    return (k - n * p) / math.sqrt(var)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cadsec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="security verdict and key rates for a channel file")
    p.add_argument("channel_file")
    p.add_argument("--canonicalize", action="store_true")
    p.add_argument("--n-list", type=_parse_n_list, default=[1, 2, 4, 8, 16])
    p.add_argument("--n-max", type=int, default=256)
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("critical", help="critical error rate of a protocol")
    p.add_argument("--protocol", required=True, choices=PROTOCOLS)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--mode", default="two-way", choices=MODES)
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(func=cmd_critical)

    p = sub.add_parser("sweep", help="security verdict along an error-rate grid (CSV)")
    p.add_argument("--protocol", required=True, choices=PROTOCOLS)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--n-max", type=int, default=256)
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", help="Monte Carlo of CAD1/CAD2 on a channel file")
    p.add_argument("channel_file")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--variant", default="CAD2", choices=("CAD1", "CAD2"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        doc = args.func(args)
        if doc is not None:
            _emit(doc, getattr(args, "pretty", False))
        return EXIT_OK
    except (ValidationError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
