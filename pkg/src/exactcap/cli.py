"""Command-line interface.

Subcommands::

    exactcap capacity FILE        classical channel capacity
    exactcap cq-capacity FILE     classical-quantum channel capacity
    exactcap scan-epsilon         four-input family scan as CSV
    exactcap bench                exact solver vs Blahut-Arimoto timings as CSV
    exactcap family EPS           write a four-input family channel file

Exit codes: 0 ok, 2 parse/usage error, 3 singular channel, 4 subset search
inconclusive, 5 rank-deficient state, 6 iteration cap hit.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import statistics
import sys
import time

import numpy as np

from . import family
from .channel_io import format_channel, read_channel
from .errors import CapacityError, ChannelFileError, MaxIterExceeded, SubsetSearchInconclusive
from .exact import TAU_EQ, CapacityOptions, Status, algorithm1, capacity
from .exact_cq import cq_capacity
from .oracle import DEFAULT_CQ_TOL, DEFAULT_TOL, blahut_arimoto
from .prob import LOG2, ClassicalChannel

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_SINGULAR = 3
EXIT_INCONCLUSIVE = 4
EXIT_RANK_DEFICIENT = 5

SCAN_COLUMNS = ["epsilon", "C1", "C3", "C4", "C_star", "C_dstar", "g1", "g2", "g3",
                "capacity", "branch", "path"]
BENCH_COLUMNS = ["n", "trials", "gate_valid", "exact_median_s", "ba_median_s",
                 "max_abs_delta"]


def fmt(x) -> str:
    """17 significant digits, '.' decimal point."""
    return format(float(x), ".17g")


def _units_value(nats: float, units: str) -> float:
    return nats / LOG2 if units == "bits" else nats


def _digest(path) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _emit(text: str, out) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_manifest(args, command, digest, tolerances, path, wall, results) -> None:
    if not getattr(args, "manifest", None):
        return
    doc = {
        "command": command,
        "input_digest": digest,
        "tolerances": tolerances,
        "solver_path": path,
        "wall_time_s": wall,
        "results": results,
    }
    with open(args.manifest, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _labels(channel, idx):
    return [channel.input_labels[i] for i in idx]


def cmd_capacity(args) -> int:
    start = time.perf_counter()
    cf = read_channel(args.file)
    if cf.kind != "classical":
        raise ChannelFileError("file holds a cq channel; use cq-capacity")
    units = args.units or cf.units or "nats"
    options = CapacityOptions(
        subset=args.subset,
        oracle=args.oracle == "on",
        oracle_tol=args.tol,
        tol_eq=args.tol_eq,
    )
    ch = cf.channel
    report = capacity(ch, options)
    value = _units_value(report.capacity, units)
    result = {
        "capacity": value,
        "units": units,
        "capacity_nats": float(report.capacity),
        "optimal_input": [float(v) for v in report.optimal_input],
        "support": _labels(ch, report.support),
        "path": {
            "route": report.path.route,
            "reductions": [_labels(ch, r) for r in report.path.reductions],
            "subset": None if report.path.subset is None else _labels(ch, report.path.subset),
            "subsets_tried": report.path.subsets_tried,
            "closed_form": report.path.closed_form,
            "dropped_outputs": list(report.path.dropped_outputs),
            "rejected_support": None if report.path.rejected_support is None
            else _labels(ch, report.path.rejected_support),
        },
        "verification_gap": report.verification_gap,
    }
    if report.oracle_check is not None:
        result["oracle"] = _units_value(report.oracle_check, units)
        result["oracle_delta"] = _units_value(abs(report.oracle_check - report.capacity), units)
    if args.format == "json":
        text = json.dumps(result, indent=2) + "\n"
    else:
        lines = [
            f"capacity: {value:.12g} {units}",
            "optimal input: " + ", ".join(
                f"{lab}={p:.12g}" for lab, p in zip(ch.input_labels, report.optimal_input)
            ),
            f"support: {result['support']}",
            f"path: {report.path.describe(ch.input_labels)}",
            f"verification gap: {report.verification_gap:.3e} nats",
        ]
        if report.oracle_check is not None:
            lines.append(f"oracle: {result['oracle']:.12g} {units} "
                         f"(delta {result['oracle_delta']:.3e})")
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    _write_manifest(args, "capacity", _digest(args.file),
                    {"tol": args.tol, "tol_eq": args.tol_eq}, report.path.describe(ch.input_labels),
                    time.perf_counter() - start, result)
    return EXIT_OK


def cmd_cq_capacity(args) -> int:
    start = time.perf_counter()
    cf = read_channel(args.file)
    if cf.kind != "cq":
        raise ChannelFileError("file holds a classical channel; use capacity")
    units = args.units or cf.units or "nats"
    report = cq_capacity(cf.channel, oracle=args.oracle == "on", oracle_tol=args.tol,
                         subset_search=args.subset == "exhaustive")
    value = _units_value(report.capacity, units)
    gate = report.gate_status.value if report.gate_status is not None else None
    result = {
        "capacity": value,
        "units": units,
        "capacity_nats": float(report.capacity),
        "optimal_input": [float(v) for v in report.optimal_input],
        "route": report.route,
        "exact": report.exact,
        "gate": gate,
        "negative_inputs": list(report.negative),
        "verification_gap": report.verification_gap,
    }
    if report.reason:
        result["reason"] = report.reason
    if report.subset is not None:
        result["subset"] = list(report.subset)
    if report.oracle_check is not None:
        result["oracle"] = _units_value(report.oracle_check, units)
    if args.format == "json":
        text = json.dumps(result, indent=2) + "\n"
    else:
        lines = [
            f"capacity: {value:.12g} {units}",
            "optimal input: " + ", ".join(f"{p:.12g}" for p in report.optimal_input),
            f"route: {report.route} ({'exact' if report.exact else 'iterative'})",
            f"gate: {gate}" + (f", negative inputs {list(report.negative)}"
                               if report.negative else ""),
            f"verification gap: {report.verification_gap:.3e} nats",
        ]
        if report.reason:
            lines.append(f"note: {report.reason}")
        if report.oracle_check is not None:
            lines.append(f"oracle: {result['oracle']:.12g} {units}")
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    _write_manifest(args, "cq-capacity", _digest(args.file), {"tol": args.tol},
                    report.route, time.perf_counter() - start, result)
    return EXIT_OK


def scan_rows(start: float, stop: float, steps: int):
    if steps < 2:
        raise ValueError("steps must be at least 2")
    if not (0.0 < start < 0.5 and 0.0 < stop < 0.5 and start < stop):
        raise ValueError("scan range must satisfy 0 < start < stop < 1/2")
    rows = []
    for eps in np.linspace(start, stop, steps):
        eps = float(eps)
        cand = family.candidate_capacities(eps)
        g1, g2, g3 = family.gate_functions(eps)
        report = capacity(family.epsilon_family_channel(eps))
        rows.append({
            "epsilon": eps, "C1": cand.c1, "C3": cand.c3, "C4": cand.c4,
            "C_star": cand.c_star, "C_dstar": cand.c_dstar,
            "g1": g1, "g2": g2, "g3": g3,
            "capacity": float(report.capacity),
            "branch": family.branch_label(eps),
            "path": report.path.describe((1, 2, 3, 4)),
        })
    return rows


def scan_csv(start: float, stop: float, steps: int) -> str:
    rows = scan_rows(start, stop, steps)
    th = family.thresholds()
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SCAN_COLUMNS)
    for r in rows:
        writer.writerow([fmt(r[c]) if isinstance(r[c], float) else r[c] for c in SCAN_COLUMNS])
    buf.write(f"# threshold_g1={fmt(th.g1)}\n")
    buf.write(f"# threshold_qhat={fmt(th.qhat)}\n")
    buf.write(f"# threshold_g2={fmt(th.g2)}\n")
    return buf.getvalue()


def cmd_scan_epsilon(args) -> int:
    start = time.perf_counter()
    text = scan_csv(args.start, args.stop, args.steps)
    _emit(text, args.out)
    _write_manifest(args, "scan-epsilon", hashlib.sha256(text.encode()).hexdigest(),
                    {"tau_eq": TAU_EQ}, "subset-search", time.perf_counter() - start,
                    {"start": args.start, "stop": args.stop, "steps": args.steps})
    return EXIT_OK


def random_channel(n: int, rng: np.random.Generator, min_rcond: float = 1e-6) -> np.ndarray:
    """Square channel with flat-Dirichlet rows, redrawn until well conditioned."""
    while True:
        m = rng.dirichlet(np.ones(n), size=n)
        if 1.0 / np.linalg.cond(m) > min_rcond:
            return m


def bench_rows(sizes, trials: int, seed: int, tol: float = DEFAULT_TOL):
    rng = np.random.default_rng(seed)
    rows = []
    for n in sizes:
        exact_t, ba_t, deltas, valid = [], [], [], 0
        for _ in range(trials):
            m = random_channel(n, rng)
            t0 = time.perf_counter()
            sol = algorithm1(m)
            exact_t.append(time.perf_counter() - t0)
            t0 = time.perf_counter()
            try:
                ba, _, _ = blahut_arimoto(m, tol=tol)
            except MaxIterExceeded as exc:
                ba = exc.lower
            ba_t.append(time.perf_counter() - t0)
            if sol.status is Status.VALID:
                valid += 1
                deltas.append(abs(float(sol.capacity) - float(ba)))
        rows.append({
            "n": n, "trials": trials, "gate_valid": valid,
            "exact_median_s": statistics.median(exact_t) if exact_t else float("nan"),
            "ba_median_s": statistics.median(ba_t) if ba_t else float("nan"),
            "max_abs_delta": max(deltas) if deltas else float("nan"),
        })
    return rows


def bench_csv(sizes, trials: int, seed: int, tol: float = DEFAULT_TOL) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(BENCH_COLUMNS)
    for r in bench_rows(sizes, trials, seed, tol):
        writer.writerow([fmt(r[c]) if isinstance(r[c], float) else r[c] for c in BENCH_COLUMNS])
    return buf.getvalue()


def cmd_bench(args) -> int:
    start = time.perf_counter()
    text = bench_csv(args.sizes, args.trials, args.seed, args.tol)
    _emit(text, args.out)
    _write_manifest(args, "bench", None, {"tol": args.tol}, "algorithm1 vs blahut-arimoto",
                    time.perf_counter() - start,
                    {"sizes": args.sizes, "trials": args.trials, "seed": args.seed})
    return EXIT_OK


def cmd_family(args) -> int:
    _emit(format_channel(family.epsilon_family_channel(args.epsilon), args.units), args.out)
    return EXIT_OK


def _sizes(text: str):
    text = text.strip()
    if not text:
        return []
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad size list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="exactcap", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, tol_default):
        p.add_argument("--units", choices=["nats", "bits"], default=None)
        p.add_argument("--tol", type=float, default=tol_default,
                       help="Blahut-Arimoto tolerance for the oracle (nats)")
        p.add_argument("--oracle", choices=["on", "off"], default="off")
        p.add_argument("--format", choices=["text", "json"], default="text")
        p.add_argument("--out", default=None)
        p.add_argument("--manifest", default=None, help="write a JSON run manifest here")

    p = sub.add_parser("capacity", help="capacity of a classical channel file")
    p.add_argument("file")
    common(p, DEFAULT_TOL)
    p.add_argument("--tol-eq", type=float, default=TAU_EQ,
                   help="optimality check tolerance over all inputs (nats)")
    p.add_argument("--subset", choices=["exhaustive", "hybrid", "auto"], default="auto")
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("cq-capacity", help="capacity of a classical-quantum channel file")
    p.add_argument("file")
    common(p, DEFAULT_CQ_TOL)
    p.add_argument("--subset", choices=["exhaustive", "off"], default="off",
                   help="try all n^2-subsets when there are more inputs (experimental)")
    p.set_defaults(func=cmd_cq_capacity)

    p = sub.add_parser("scan-epsilon", help="CSV scan of the four-input family")
    p.add_argument("--start", type=float, default=0.01)
    p.add_argument("--stop", type=float, default=0.49)
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--format", choices=["csv"], default="csv")
    p.add_argument("--out", default=None)
    p.add_argument("--manifest", default=None)
    p.set_defaults(func=cmd_scan_epsilon)

    p = sub.add_parser("bench", help="CSV timing comparison against Blahut-Arimoto")
    p.add_argument("--sizes", type=_sizes, default=[2, 4, 8])
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--format", choices=["csv"], default="csv")
    p.add_argument("--out", default=None)
    p.add_argument("--manifest", default=None)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("family", help="write the four-input family channel file")
    p.add_argument("epsilon", type=float)
    p.add_argument("--units", choices=["nats", "bits"], default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_family)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SubsetSearchInconclusive as exc:
        partial = exc.report
        msg = str(exc)
        if partial is not None:
            msg += f"; best lower bound {float(partial.capacity):.12g} nats"
            if partial.oracle_check is not None:
                msg += f", Blahut-Arimoto {partial.oracle_check:.12g} nats"
        print(f"error[{exc.exit_code}]: {msg}", file=sys.stderr)
        return exc.exit_code
    except CapacityError as exc:
        print(f"error[{exc.exit_code}]: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, OSError) as exc:
        print(f"error[{EXIT_PARSE}]: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
