"""Command-line entry point.

    replicalc apply --op D --graph "(1,2)"
    replicalc check --graph "(1,2)"            # or --max-edges 3 for the catalog
    replicalc identities --max-edges 2 --format json
    replicalc verify --config numeric.json
    replicalc explore --graph "(1,2)" --order 3

Exit codes: 0 all checks passed, 1 a check failed or the engine raised,
2 usage error (bad flags, unreadable config, unparsable graph).
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Any

from .algebra import Polynomial, to_wire_obj
from .errors import GraphParseError, ReplicalcError
from .graph import VERTEX_CAP
from .graph import parse as parse_graph
from .identities import enumerate_monomials, generate_identities, verify_catalog
from .operators import DiagonalMode, apply_word, fourth_order_check, higher_order_explore
from .report import Report, _jsonable

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DEFAULT_CONFIG = {
    "N": 3,
    "beta": 0.5,
    "lambda": 0.5,
    "lambda_step": 0.05,
    "beta_step": 0.001,
    "quad_nodes": 20,
    "mc_samples": 0,
    "seed": 12345,
    "kernel": "exact",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # keep argparse's exit code, but route through main
        raise UsageError(f"{self.prog}: {message}")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out", help="write output to this file instead of stdout")
    p.add_argument("--diagonal", choices=[m.value for m in DiagonalMode], default="unit",
                   help="how a contraction pairing two legs on one vertex is valued")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="replicalc", description="Replica overlap polynomial calculus")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("apply", help="apply an operator word over d, C, D to a graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--op", required=True, help='word over "d", "C", "D" (= Cdd), applied right to left')
    _common(p)

    p = sub.add_parser("check", help="fourth-order identity for one graph or a catalog")
    p.add_argument("--graph")
    p.add_argument("--max-edges", type=int)
    p.add_argument("--max-vertices", type=int, default=VERTEX_CAP)
    _common(p)

    p = sub.add_parser("identities", help="export Delta M and Delta^2 M for a catalog")
    p.add_argument("--max-edges", type=int, default=2)
    p.add_argument("--max-vertices", type=int, default=VERTEX_CAP)
    _common(p)

    p = sub.add_parser("verify", help="numeric oracle suite")
    p.add_argument("--config", help="JSON config file; missing keys take defaults")
    p.add_argument("--graph", default="(1,2)")
    p.add_argument("--order", type=int, choices=(2, 4), help="only this lambda-derivative order")
    _common(p)

    p = sub.add_parser("explore", help="C delta^(2k) against (2k-1)!! Delta^k")
    p.add_argument("--graph", required=True)
    p.add_argument("--order", type=int, default=3)
    _common(p)
    return parser


# --------------------------------------------------------------------------
# output helpers

def _strip_timing(x: Any) -> Any:
    # wall-clock fields would make repeated runs differ
    if isinstance(x, dict):
        return {k: _strip_timing(v) for k, v in x.items() if k != "seconds"}
    if isinstance(x, list):
        return [_strip_timing(v) for v in x]
    return x


def _report_doc(r: Report) -> dict:
    return _strip_timing(r.to_dict())


def _dump(doc: Any) -> str:
    return json.dumps(_jsonable(doc), indent=2, sort_keys=False)


def _status(passed: bool | None) -> int:
    return EXIT_FAIL if passed is False else EXIT_OK


def _parse_poly(text: str) -> Polynomial:
    # a single graph gets the scanner's precise diagnostics; otherwise a polynomial
    try:
        return Polynomial.monomial(parse_graph(text))
    except GraphParseError as first:
        try:
            return Polynomial.parse(text)
        except GraphParseError:
            raise UsageError(f"cannot parse graph {text!r}: {first}") from first


def _report_text(r: Report) -> list[str]:
    lines = [r.summary()]
    d = r.details
    if "residual" in d:
        lines.append(f"  residual: {d['residual']}")
    return lines


# --------------------------------------------------------------------------
# commands

def cmd_apply(args) -> tuple[int, str]:
    p = _parse_poly(args.graph)
    mode = DiagonalMode(args.diagonal)
    result = apply_word(args.op, p, mode)
    if args.format == "json":
        doc = {"op": args.op, "graph": str(p), "diagonal": mode.value, "result": to_wire_obj(result)}
        return EXIT_OK, _dump(doc)
    return EXIT_OK, str(result)


def cmd_check(args) -> tuple[int, str]:
    mode = DiagonalMode(args.diagonal)
    if args.graph is not None:
        rep = fourth_order_check(_parse_poly(args.graph), mode)
        if args.format == "json":
            return _status(rep.passed), _dump(_report_doc(rep))
        return _status(rep.passed), "\n".join(_report_text(rep))
    if args.max_edges is None:
        raise UsageError("check needs --graph or --max-edges")
    if mode is not DiagonalMode.UNIT:
        raise UsageError("catalog checks run in unit mode only")
    catalog = enumerate_monomials(args.max_edges, args.max_vertices)
    rep = verify_catalog(catalog)
    if args.format == "json":
        return _status(rep.passed), _dump(_report_doc(rep))
    lines = [rep.summary()]
    for row in rep.details["entries"]:
        mark = "ok" if row["pass"] else "FAIL"
        lines.append(f"  {mark:4} {row['monomial']}  residual_terms={row['residual_terms']}")
    return _status(rep.passed), "\n".join(lines)


def cmd_identities(args) -> tuple[int, str]:
    catalog = enumerate_monomials(args.max_edges, args.max_vertices)
    records = generate_identities(catalog)
    ok = all(r.zero_sum_ok for r in records)
    if args.format == "json":
        doc = {
            "max_edges": args.max_edges,
            "max_vertices": args.max_vertices,
            "records": [r.to_dict() for r in records],
        }
        return _status(ok), _dump(doc)
    lines = []
    for r in records:
        lines.append(f"M = {r.monomial}")
        lines.append(f"  Delta M   = {r.delta}")
        lines.append(f"  Delta^2 M = {r.delta2}")
        lines.append(f"  zero sums: {'ok' if r.zero_sum_ok else 'FAIL'}")
    return _status(ok), "\n".join(lines)


def load_config(path: str | None) -> dict:
    cfg = dict(DEFAULT_CONFIG)
    if path is None:
        return cfg
    try:
        with open(path, encoding="utf-8") as fh:
            user = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError(f"cannot read config {path}: {e}") from e
    if not isinstance(user, dict):
        raise UsageError("config must be a JSON object")
    unknown = sorted(set(user) - set(DEFAULT_CONFIG))
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    cfg.update(user)
    if cfg["kernel"] not in ("exact", "idealized"):
        raise UsageError(f"kernel must be exact or idealized, got {cfg['kernel']!r}")
    return cfg


def verify_suite(m: Polynomial, cfg: dict, orders=(2, 4)) -> list[Report]:
    from .numerics.checks import (
        beta_derivative_check,
        beta_second_derivative_ratio,
        effective_beta_check,
        lambda_derivative_check,
    )
    from .numerics.model import KernelMode
    from .numerics.quadrature import QuadratureSpec

    quad = QuadratureSpec(nodes_per_dim=cfg["quad_nodes"], mc_samples=cfg["mc_samples"], seed=cfg["seed"])
    kernel = KernelMode(cfg["kernel"])
    n, beta = cfg["N"], cfg["beta"]
    reports = [effective_beta_check(m, n, beta, cfg["lambda"], quad, kernel=kernel)]
    for k in orders:
        reports.append(lambda_derivative_check(m, n, beta, k, cfg["lambda_step"], quad, kernel=kernel))
    reports.append(beta_derivative_check(m, n, beta, cfg["beta_step"], quad, kernel=kernel))
    reports.append(beta_second_derivative_ratio(m, n, beta, cfg["beta_step"], quad, kernel=kernel))
    return reports


def cmd_verify(args) -> tuple[int, str]:
    cfg = load_config(args.config)
    m = _parse_poly(args.graph)
    orders = (args.order,) if args.order else (2, 4)
    reports = verify_suite(m, cfg, orders)
    code = EXIT_FAIL if any(r.passed is False for r in reports) else EXIT_OK
    if args.format == "json":
        return code, _dump({"config": cfg, "reports": [_report_doc(r) for r in reports]})
    return code, "\n".join(r.summary() for r in reports)


def cmd_explore(args) -> tuple[int, str]:
    rep = higher_order_explore(_parse_poly(args.graph), args.order, DiagonalMode(args.diagonal))
    if args.format == "json":
        return _status(rep.passed), _dump(_report_doc(rep))
    return _status(rep.passed), "\n".join(_report_text(rep))


COMMANDS = {
    "apply": cmd_apply,
    "check": cmd_check,
    "identities": cmd_identities,
    "verify": cmd_verify,
    "explore": cmd_explore,
}


def run(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        code, text = COMMANDS[args.command](args)
    except UsageError as e:
        print(f"usage error: {e}", file=stderr)
        return EXIT_USAGE
    except SystemExit as e:  # --help
        return int(e.code or 0)
    except ReplicalcError as e:
        print(f"error: {type(e).__name__}: {e}", file=stderr)
        return EXIT_FAIL
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text + "\n")
        except OSError as e:
            print(f"usage error: cannot write {args.out}: {e}", file=stderr)
            return EXIT_USAGE
    else:
        print(text, file=stdout)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
