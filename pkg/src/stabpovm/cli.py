"""Command-line entry point: ``stabpovm <command> ...``.

Commands: ``analyze``, ``examples``, ``search``, ``bounds``, ``oracle-dump``.
Every JSON output carries ``version`` and the resolved ``config``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Any, Dict, Optional, Sequence, Tuple

from . import __version__
from .analysis import (CSV_COLUMNS, AncillaSpec, AnalysisError, analyze_circuit, bounds_table,
                       dense_crosscheck_group, span_dimension)
from .circuits import CircuitError, DopedCircuit, Gate, load_circuit
from .dense import DEFAULT_DENSE_CAP, DenseCapError, effective_povm, frame_operator, matrix_from_json, \
    matrix_to_json, span_rank
from .golden import format_table, run_fixtures
from .groups import GroupError, canonicalize, load_group
from .pauli import PauliError
from .search import REPORT_VERSION, SearchError, load_task, run_task

EXIT_ERROR = 1


class _Parser(argparse.ArgumentParser):
    # exit code 2 is reserved for "falsifying witness found"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _shard(text: str) -> Tuple[int, int]:
    try:
        k, K = (int(v) for v in text.split("/"))
    except ValueError:
        raise argparse.ArgumentTypeError("shard must look like k/K") from None
    if not 0 <= k < K:
        raise argparse.ArgumentTypeError("shard needs 0 <= k < K")
    return k, K


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="stabpovm", description="Effective POVMs of Clifford and T-doped circuits.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fmt_default):
        sp.add_argument("--format", choices=("json", "csv", "text"), default=fmt_default)
        sp.add_argument("--out", help="output file (default: stdout)")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--dense-cap", type=int, default=DEFAULT_DENSE_CAP)

    a = sub.add_parser("analyze", help="s_mu of a circuit or a measurement group")
    src = a.add_mutually_exclusive_group(required=True)
    src.add_argument("--circuit", help="circuit file")
    src.add_argument("--group", help="measurement group file (n+m qubits)")
    a.add_argument("--split", type=int, help="number of data qubits for --group")
    a.add_argument("--measurement", help="measurement group file for --circuit (default computational)")
    a.add_argument("--ancilla", default=None,
                   help="zeros | stab:<file> | T^<k> | dense:<file> | generic (default zeros)")
    a.add_argument("--oracle", action="store_true", help="cross-check with the dense simulator")
    common(a, "json")

    e = sub.add_parser("examples", help="run the worked-example fixtures")
    e.add_argument("filter", nargs="?", default=None)
    common(e, "text")

    s = sub.add_parser("search", help="run a search task file")
    s.add_argument("task")
    s.add_argument("--shard", type=_shard, default=None, help="k/K")
    s.add_argument("--seed", type=int, default=None, help="override the task seed")
    s.add_argument("--format", choices=("json", "csv", "text"), default="json")
    s.add_argument("--out")
    s.add_argument("--dense-cap", type=int, default=None)

    b = sub.add_parser("bounds", help="necessity bound, rank bound and IC verdict")
    b.add_argument("n", type=int)
    b.add_argument("t", type=int, nargs="?")
    common(b, "text")

    o = sub.add_parser("oracle-dump", help="dense POVM elements and frame operator as JSON")
    src = o.add_mutually_exclusive_group(required=True)
    src.add_argument("--circuit")
    src.add_argument("--group")
    o.add_argument("--split", type=int)
    o.add_argument("--measurement")
    o.add_argument("--ancilla", default=None)
    common(o, "json")
    return p


# ---------------------------------------------------------------------------
# helpers


def parse_ancilla(spec: Optional[str], m: int, seed: int = 0) -> AncillaSpec:
    """Ancilla mini-language: ``zeros``, ``stab:<file>``, ``T^<k>``, ``dense:<file>``, ``generic``."""
    if spec is None or spec == "zeros":
        return AncillaSpec.zeros(m)
    if spec == "generic":
        return AncillaSpec.generic(m)
    if spec.startswith("stab:"):
        return AncillaSpec.stabilizer(load_group(spec[5:]).group, label=spec)
    if spec.startswith("T^"):
        try:
            k = int(spec[2:])
        except ValueError:
            raise AnalysisError(f"bad ancilla spec {spec!r}") from None
        return AncillaSpec.magic(k)
    if spec.startswith("dense:"):
        with open(spec[6:]) as fh:
            vec = matrix_from_json(json.load(fh))
        return AncillaSpec.dense(vec, label=spec)
    raise AnalysisError(f"unknown ancilla spec {spec!r}")


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=False, default=str) + "\n"


def _config(args: argparse.Namespace) -> Dict[str, Any]:
    return {k: (list(v) if isinstance(v, tuple) else v) for k, v in sorted(vars(args).items())
            if k != "func"}


# ---------------------------------------------------------------------------
# commands


def cmd_analyze(args) -> int:
    meas = load_group(args.measurement).group if args.measurement else None
    if args.circuit:
        c = load_circuit(args.circuit)
        anc = parse_ancilla(args.ancilla, c.n_ancilla, args.seed)
        if args.oracle and c.n_qubits > args.dense_cap:
            print(f"refusing dense oracle: {c.n_qubits} qubits exceed the cap of {args.dense_cap}",
                  file=sys.stderr)
            return EXIT_ERROR
        rep = analyze_circuit(c, meas, anc, oracle=args.oracle, dense_cap=args.dense_cap)
    else:
        if args.split is None:
            raise AnalysisError("--group needs --split")
        s = load_group(args.group).group
        anc = parse_ancilla(args.ancilla, s.n - args.split, args.seed)
        rep = span_dimension(s, args.split, anc)
        if args.oracle:
            if s.n > args.dense_cap:
                print(f"refusing dense oracle: {s.n} qubits exceed the cap of {args.dense_cap}",
                      file=sys.stderr)
                return EXIT_ERROR
            dense_crosscheck_group(rep, s, anc, args.dense_cap)
    if args.format == "json":
        _emit(_dump({"version": REPORT_VERSION, "config": _config(args), "report": rep.to_json()}), args.out)
    elif args.format == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerow(rep.csv_row())
        _emit(buf.getvalue(), args.out)
    else:
        lines = [f"n={rep.n} m={rep.m} t={rep.t} ancilla={rep.ancilla}",
                 f"s_mu={rep.s_mu} p={rep.p} k={rep.k} ic={str(rep.ic).lower()}"]
        if rep.oracle_checked is not None:
            lines.append(f"oracle_checked={str(rep.oracle_checked).lower()} oracle_rank={rep.oracle_rank}")
        lines += [f"warning: {w}" for w in rep.warnings]
        _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_examples(args) -> int:
    rows = run_fixtures(args.filter)
    if not rows:
        print(f"no fixture matches {args.filter!r}", file=sys.stderr)
        return EXIT_ERROR
    failed = sum(not r.ok for r in rows)
    if args.format == "json":
        _emit(_dump({"version": REPORT_VERSION, "config": _config(args),
                     "checks": [{"fixture": r.fixture, "label": r.label, "expected": r.expected,
                                 "computed": r.computed, "ok": r.ok, "printed": r.printed,
                                 "note": r.note} for r in rows],
                     "failed": failed}), args.out)
    elif args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["fixture", "label", "expected", "computed", "ok"])
        for r in rows:
            w.writerow([r.fixture, r.label, r.expected, r.computed, int(r.ok)])
        _emit(buf.getvalue(), args.out)
    else:
        _emit(format_table(rows) + f"\n{len(rows) - failed}/{len(rows)} checks passed\n", args.out)
    return 0 if failed == 0 else EXIT_ERROR


def cmd_search(args) -> int:
    task = load_task(args.task)
    if args.shard is not None:
        task.shard = args.shard
    if args.seed is not None:
        task.seed = args.seed
    if args.dense_cap is not None:
        task.dense_cap = args.dense_cap
    rep = run_task(task)
    if args.format == "csv":
        _emit(rep.histogram_csv(), args.out)
    elif args.format == "text":
        lines = [f"{rep.task.kind}: {rep.verdict} ({rep.candidates} candidates"
                 f"{', statistical' if rep.statistical else ''})"]
        for s in rep.sections:
            hist = ", ".join(f"{k}:{v}" for k, v in sorted(s.histogram.items()))
            lines.append(f"  {s.label}: {s.candidates} candidates, max s_mu {s.max_s_mu}, "
                         f"IC {s.ic_count}{'' if s.complete else ' (incomplete)'}  [{hist}]")
        _emit("\n".join(lines) + "\n", args.out)
    else:
        out = rep.to_json()
        out["config"] = _config(args)
        _emit(_dump(out), args.out)
    return rep.exit_code


def cmd_bounds(args) -> int:
    if args.n < 1 or (args.t is not None and args.t < 0):
        raise AnalysisError("need n >= 1 and t >= 0")
    ts = [args.t] if args.t is not None else list(range(0, 2 * args.n + 2))
    rows = [bounds_table(args.n, t) for t in ts]
    if args.format == "json":
        _emit(_dump({"version": REPORT_VERSION, "config": _config(args), "rows": rows}), args.out)
    elif args.format == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        _emit(buf.getvalue(), args.out)
    else:
        lines = [f"n={args.n}: necessary_t={rows[0]['necessary_t']}, IC sufficient at t={2 * args.n}"]
        for r in rows:
            lines.append(f"  t={r['t']}: {r['rank_bound_kind']} {r['rank_bound']}; IC {r['ic_verdict']}")
        _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_oracle_dump(args) -> int:
    from .analysis import _ancilla_vector

    meas = load_group(args.measurement).group if args.measurement else None
    if args.circuit:
        c = load_circuit(args.circuit)
    else:
        if args.split is None:
            raise AnalysisError("--group needs --split")
        s = load_group(args.group).group
        c = DopedCircuit(args.split, s.n - args.split, ())
        meas = s if s.signed else canonicalize(s.generators, signed=True, n=s.n)
    anc = parse_ancilla(args.ancilla, c.n_ancilla, args.seed)
    if anc.kind == "generic":
        raise AnalysisError("oracle-dump needs a concrete ancilla state")
    if anc.kind == "magic_T_power":
        # |T>^k is T H |0>^k ahead of the circuit
        pre = []
        for q in range(c.n_data, c.n_qubits):
            pre += [Gate("H", (q,)), Gate("T", (q,))]
        c = DopedCircuit(c.n_data, c.n_ancilla, tuple(pre) + c.gates)
        anc = AncillaSpec.zeros(c.n_ancilla)
    ops = effective_povm(c, _ancilla_vector(anc, args.seed), meas, cap=args.dense_cap)
    frame = frame_operator(ops)
    _emit(_dump({"version": REPORT_VERSION, "config": _config(args),
                 "format": "row-major [re, im] pairs; frame in the normalized Pauli basis "
                           "ordered lexicographically over I, X, Y, Z",
                 "rank": span_rank(ops),
                 "elements": [matrix_to_json(o) for o in ops],
                 "frame": matrix_to_json(frame)}), args.out)
    return 0


COMMANDS = {"analyze": cmd_analyze, "examples": cmd_examples, "search": cmd_search,
            "bounds": cmd_bounds, "oracle-dump": cmd_oracle_dump}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except DenseCapError as exc:
        print(f"refusing dense oracle: {exc}", file=sys.stderr)
    except (AnalysisError, CircuitError, GroupError, PauliError, SearchError, OSError,
            json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
