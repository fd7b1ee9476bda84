"""Command-line front end: ``clocknet <command> ...``.

Exit status is 0 whenever a verdict was computed (including negative ones),
2 on bad input and 3 when a search exceeds its budget.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from clocknet.constructions import (
    full_clock_matrix,
    gim,
    recover_coefficients,
)
from clocknet.factorization import FactorizationError, identity_factorization, verify_factorization
from clocknet.linalg import DimensionError, format_matrix, parse_matrix
from clocknet.network import (
    BudgetExceeded,
    ClockSpec,
    GcdKind,
    bounds_report,
    build_clock_digraph,
    build_clock_network,
    digraph_to_dot,
    gcd_reduce,
    identify_network_digraph,
    multiplier_map,
    network_to_dot,
    normalise_offsets,
    verify_digraph_isomorphism,
)
from clocknet.search import (
    LAYER_LIMIT,
    DENSE_LIMIT,
    find_linear_solution,
    min_n0_estimate,
    nonlinear_solvable_z2,
    solvable_set,
)

YES, NO = "✓", "✗"


class InputError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    params: dict[str, Any]
    fmt: str
    limit: int = LAYER_LIMIT
    output: Path | None = None
    extra: dict[str, Any] = field(default_factory=dict)


def parse_offsets(text: str) -> tuple[int, ...]:
    try:
        return normalise_offsets(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError as exc:
        raise InputError(f"bad offset set {text!r}: {exc}") from None


def parse_int_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise InputError(f"bad integer list {text!r}") from None


def parse_range(text: str) -> list[int]:
    """``"4..12"`` (inclusive) or a single integer."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            return list(range(int(lo), int(hi) + 1))
        return [int(text)]
    except ValueError:
        raise InputError(f"bad range {text!r}; use a..b") from None


def _spec(n: int, R: tuple[int, ...]) -> ClockSpec:
    try:
        return ClockSpec(n, R)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _json(obj: Any) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _rows_csv(rows) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _matrix_out(cfg: RunConfig, rows: list[tuple[int, ...]]) -> str:
    if cfg.fmt == "json":
        return _json({"command": cfg.command, "params": cfg.params, "rows": [list(r) for r in rows]})
    if cfg.fmt == "csv":
        return _rows_csv(rows)
    return format_matrix(rows) + "\n"


def cmd_gim(cfg: RunConfig) -> str:
    p = cfg.params
    return _matrix_out(cfg, gim(p["a"], p["b"]).to_rows())


def cmd_full_clock(cfg: RunConfig) -> str:
    p = cfg.params
    return _matrix_out(cfg, full_clock_matrix(p["n"], p["r"]).matrix.to_rows())


def cmd_validate(cfg: RunConfig) -> str:
    p = cfg.params
    R = tuple(p["R"])
    s = None if p["universal"] else p["s"]
    if s is None and not p["universal"]:
        raise InputError("give a modulus s or --universal")
    try:
        matrix = parse_matrix(Path(p["file"]).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {p['file']}: {exc.strerror}") from None
    circuit, bad = recover_coefficients(matrix, R, s)
    verdict = "VALID" if circuit else "INVALID"
    if cfg.fmt == "json":
        out = {"command": cfg.command, "params": cfg.params, "verdict": verdict, "witness_path": None}
        if circuit:
            out["coefficients"] = {str(k): list(row) for k, row in zip(range(circuit.r + 1, circuit.n + circuit.r + 1), circuit.coeffs)}
            out["solves"] = circuit_solves(matrix, R[-1], s)
        else:
            out["row"] = bad
        return _json(out)
    if not circuit:
        return f"INVALID row {bad}\n"
    lines = [verdict]
    for k, row in zip(range(circuit.r + 1, circuit.n + circuit.r + 1), circuit.coeffs):
        lines.append(f"{k}: " + " ".join(f"lam_{j}={x}" for j, x in zip(R, row)))
    lines.append("ends in I_r: " + ("yes" if circuit_solves(matrix, R[-1], s) else "no"))
    return "\n".join(lines) + "\n"


def circuit_solves(matrix, r: int, s: int | None) -> bool:
    tail = matrix.to_rows()[-r:]
    return all(((x - (i == j)) % s if s else x - (i == j)) == 0 for i, row in enumerate(tail) for j, x in enumerate(row))


def _decide(n: int, R: tuple[int, ...], s: int, method: str, limit: int):
    """``(verdict, method, linear_verdict_or_None)`` following the escalation order."""
    g = gcd_reduce(n, R)
    if g.kind is GcdKind.UNSOLVABLE:
        return "UNSOLVABLE", "gcd", None
    small_n, small_R = g.n, g.R
    prefix = "gcd+" if g.kind is GcdKind.REDUCED else ""
    exhaustive_ok = s == 2 and small_R[-1] <= 3
    if method == "exhaustive":
        if not exhaustive_ok:
            raise InputError("the exhaustive oracle needs s = 2 and max(R) <= 3 after gcd reduction")
        ok = nonlinear_solvable_z2(small_n, small_R)
        return ("SOLVABLE" if ok else "UNSOLVABLE"), prefix + "exhaustive", None
    lin = find_linear_solution(n, R, s, limit=limit)
    if lin.solvable:
        return "SOLVABLE", prefix + "linear", lin
    if method == "auto" and exhaustive_ok:
        ok = nonlinear_solvable_z2(small_n, small_R)
        return ("SOLVABLE" if ok else "UNSOLVABLE"), prefix + "exhaustive", lin
    return "NOT-LINEARLY-SOLVABLE", prefix + "linear", lin


def cmd_solve(cfg: RunConfig) -> str:
    p = cfg.params
    n, R, s = p["n"], tuple(p["R"]), p["s"]
    _spec(n, R)
    if s < 2:
        raise InputError("modulus must be >= 2")
    verdict, method, lin = _decide(n, R, s, p["method"], cfg.limit)
    matrix = lin.circuit_matrix() if lin is not None and lin.solvable else None
    witness_path = cfg.extra.get("witness")
    if matrix is not None and witness_path:
        Path(witness_path).write_text(matrix.to_text())
    if cfg.fmt == "json":
        out = {
            "command": cfg.command,
            "params": cfg.params,
            "verdict": verdict,
            "method": method,
            "witness_path": witness_path if matrix is not None else None,
        }
        if matrix is not None:
            out["witness"] = [list(r) for r in matrix.matrix.to_rows()]
        return _json(out)
    text = f"{verdict} ({method})\n"
    if matrix is not None and not witness_path:
        text += matrix.to_text()
    return text


def table_rows(R: tuple[int, ...], s_list: list[int], ns: list[int], limit: int) -> list[list[bool]]:
    rows = []
    for s in s_list:
        if s < 2:
            raise InputError("modulus must be >= 2")
        if s ** (R[-1] ** 2) <= DENSE_LIMIT:
            profile = solvable_set(R, s, limit=limit)
            rows.append([profile.is_solvable(n) for n in ns])
        else:
            rows.append([find_linear_solution(n, R, s, limit=limit).solvable for n in ns])
    return rows


def cmd_table(cfg: RunConfig) -> str:
    p = cfg.params
    R, s_list, ns = tuple(p["R"]), p["s"], p["n"]
    if not ns or not s_list:
        return ""
    rows = table_rows(R, s_list, ns, cfg.limit)
    if cfg.fmt == "json":
        return _json({
            "command": cfg.command,
            "params": cfg.params,
            "verdict": {str(s): row for s, row in zip(s_list, rows)},
            "witness_path": None,
        })
    marks = [[YES if ok else NO for ok in row] for row in rows]
    if cfg.fmt == "plain":
        head = "s\\n " + " ".join(f"{n:>2}" for n in ns)
        body = [f"{s:>4} " + " ".join(f"{m:>2}" for m in row) for s, row in zip(s_list, marks)]
        return "\n".join([head, *body]) + "\n"
    return _rows_csv([["n", *ns], *([f"s={s}", *row] for s, row in zip(s_list, marks))])


def cmd_factorize(cfg: RunConfig) -> str:
    p = cfg.params
    n, R = p["n"], tuple(p["R"])
    f = identity_factorization(n, R)
    ok = verify_factorization(f)
    verdict = "VERIFIED-INTEGER" if ok else "VERIFICATION-FAILED"
    if cfg.fmt == "json":
        return _json({
            "command": cfg.command,
            "params": cfg.params,
            "verdict": verdict,
            "witness_path": None,
            "atomics": [list(a.alpha) for a in f.atomics],
        })
    return f.to_text() + f"{verdict} ({len(f.atomics)} atomics)\n"


def cmd_digraph(cfg: RunConfig) -> str:
    p = cfg.params
    n, R = p["n"], tuple(p["R"])
    net = build_clock_network(_spec(n, R))
    if p["identify"]:
        dg = identify_network_digraph(net)
        if cfg.fmt == "json":
            return _json({
                "command": cfg.command,
                "params": cfg.params,
                "edges": [list(e) for e in dg.sorted_edges()],
                "collapsed": dg.collapsed,
                "self_loops": [list(e) for e in dg.self_loops()],
                "two_cycles": [list(e) for e in dg.two_cycles()],
            })
        return digraph_to_dot(dg)
    if cfg.fmt == "json":
        return _json({"command": cfg.command, "params": cfg.params, "edges": [list(e) for e in net.edges()]})
    return network_to_dot(net)


def cmd_iso(cfg: RunConfig) -> str:
    p = cfg.params
    n, m = p["n"], p["m"]
    if n < 1:
        raise InputError("need at least one vertex")
    d1 = build_clock_digraph(n, p["R1"])
    d2 = build_clock_digraph(n, p["R2"])
    try:
        ok = verify_digraph_isomorphism(d1, d2, multiplier_map(n, m))
        reason = None
    except ValueError as exc:
        ok, reason = False, str(exc)
    verdict = "ISOMORPHIC" if ok else "NOT-ISOMORPHIC-UNDER-MAP"
    if cfg.fmt == "json":
        return _json({"command": cfg.command, "params": cfg.params, "verdict": verdict, "reason": reason, "witness_path": None})
    return verdict + (f" ({reason})" if reason else "") + "\n"


def cmd_bounds(cfg: RunConfig) -> str:
    p = cfg.params
    n, R, s = p["n"], tuple(p["R"]), p["s"]
    spec = _spec(n, R)
    solvable = linearly = None
    if p["search"]:
        verdict, _, lin = _decide(n, R, s, "auto", cfg.limit)
        linearly = None if lin is None else lin.solvable
        if verdict == "SOLVABLE":
            solvable = True
        elif verdict == "UNSOLVABLE":
            solvable = False
    report = bounds_report(spec, solvable, linearly, s)
    if cfg.fmt == "json":
        return _json({"command": cfg.command, "params": cfg.params, "verdict": report.as_dict(), "witness_path": None})
    return "\n".join(report.lines()) + "\n"


def cmd_n0(cfg: RunConfig) -> str:
    p = cfg.params
    report = min_n0_estimate(p["R"], p["s"])
    if cfg.fmt == "json":
        return _json({"command": cfg.command, "params": cfg.params, "verdict": report.as_dict(), "witness_path": None})
    lines = [f"n0(R, s={s}) = {'none' if v is None else v}" for s, v in report.per_s.items()]
    best = report.max_per_s
    lines.append(f"max over listed s: {'none' if best is None else best}")
    upper = report.universal_upper
    lines.append(f"all-s upper bound: {'none' if upper is None else upper} ({report.universal_source})")
    lines.append(f"note: {report.caveat}")
    return "\n".join(lines) + "\n"


COMMANDS: dict[str, Callable[[RunConfig], str]] = {
    "gim": cmd_gim,
    "full-clock": cmd_full_clock,
    "validate": cmd_validate,
    "solve": cmd_solve,
    "table": cmd_table,
    "factorize": cmd_factorize,
    "digraph": cmd_digraph,
    "iso": cmd_iso,
    "bounds": cmd_bounds,
    "n0": cmd_n0,
}

DEFAULT_FORMAT = {"table": "csv", "digraph": "dot"}
FORMATS = {
    "gim": ("plain", "json", "csv"),
    "full-clock": ("plain", "json", "csv"),
    "table": ("plain", "json", "csv"),
    "digraph": ("dot", "json"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clocknet", description="Solvability of clock networks over Z_s.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("plain", "json", "csv", "dot"), default=None)
    common.add_argument("-o", "--output", type=Path, default=None, help="write the result here instead of stdout")
    common.add_argument("--budget", type=int, default=LAYER_LIMIT, help="max states per search layer")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gim", parents=[common], help="print gim(a, b)")
    p.add_argument("a", type=int)
    p.add_argument("b", type=int)

    p = sub.add_parser("full-clock", parents=[common], help="print the full clock circuit matrix")
    p.add_argument("n", type=int)
    p.add_argument("r", type=int)

    p = sub.add_parser("validate", parents=[common], help="check a circuit matrix file")
    p.add_argument("file")
    p.add_argument("R", type=parse_offsets)
    p.add_argument("s", type=int, nargs="?")
    p.add_argument("--universal", action="store_true", help="integer coefficients, valid for every s")

    p = sub.add_parser("solve", parents=[common], help="decide solvability of N_n(R) over Z_s")
    p.add_argument("n", type=int)
    p.add_argument("R", type=parse_offsets)
    p.add_argument("s", type=int)
    p.add_argument("--method", choices=("linear", "exhaustive", "auto"), default="auto")
    p.add_argument("--witness", default=None, help="write the witness circuit matrix to this file")

    p = sub.add_parser("table", parents=[common], help="linear solvability grid over n and s")
    p.add_argument("R", type=parse_offsets)
    p.add_argument("s", type=parse_int_list)
    p.add_argument("n", type=parse_range)

    p = sub.add_parser("factorize", parents=[common], help="write I as n integer atomic matrices")
    p.add_argument("n", type=int)
    p.add_argument("R", type=parse_offsets)

    p = sub.add_parser("digraph", parents=[common], help="DOT export of N_n(R) or its clock digraph")
    p.add_argument("n", type=int)
    p.add_argument("R", type=parse_offsets)
    p.add_argument("--identify", action="store_true", help="merge outputs into inputs")

    p = sub.add_parser("iso", parents=[common], help="test x -> m*x as a clock digraph isomorphism")
    p.add_argument("n", type=int)
    p.add_argument("R1", type=parse_offsets)
    p.add_argument("R2", type=parse_offsets)
    p.add_argument("m", type=int)

    p = sub.add_parser("bounds", parents=[common], help="guessing number and information defect bounds")
    p.add_argument("n", type=int)
    p.add_argument("R", type=parse_offsets)
    p.add_argument("s", type=int)
    p.add_argument("--no-search", dest="search", action="store_false", help="report bounds only")

    p = sub.add_parser("n0", parents=[common], help="per-modulus solvability thresholds")
    p.add_argument("R", type=parse_offsets)
    p.add_argument("s", type=parse_int_list)
    return parser


def make_config(args: argparse.Namespace) -> RunConfig:
    skip = {"command", "format", "output", "budget", "witness"}
    params = {}
    for key, value in vars(args).items():
        if key in skip:
            continue
        params[key] = list(value) if isinstance(value, tuple) else value
    fmt = args.format or DEFAULT_FORMAT.get(args.command, "plain")
    allowed = FORMATS.get(args.command, ("plain", "json"))
    if fmt not in allowed:
        raise InputError(f"{args.command} supports --format {', '.join(allowed)}")
    if args.budget < 1:
        raise InputError("budget must be positive")
    extra = {"witness": getattr(args, "witness", None)}
    return RunConfig(args.command, params, fmt, args.budget, args.output, extra)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = make_config(args)
        text = COMMANDS[cfg.command](cfg)
        if cfg.output is not None:
            cfg.output.write_text(text)
        else:
            sys.stdout.write(text)
    except BudgetExceeded as exc:
        print(f"error: budget exceeded: {exc}", file=sys.stderr)
        return 3
    except (InputError, DimensionError, FactorizationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
