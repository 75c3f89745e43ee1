"""Command-line front end.

Exit status: 0 when every checked inequality holds, 2 on a violation or an
internal-consistency failure (the offending instance is written into the
report), 1 on usage or input errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .ambient import SpaceForm
from .equality import detect_equality
from .errors import ConsistencyError, WintgenError
from .extremal import VIOLATION_TOL, SearchConfig, fuzz, search
from .immersion import frame_at, from_catalog, load_polynomial_immersion
from .inequalities import InequalityId, applicable_inequalities, evaluate, gap
from .report import FORMATS, loads, make_meta, render, result_row
from .scenario import ScenarioError, default_seed, load_scenario, parse_ambient_spec

EXIT_OK, EXIT_INPUT, EXIT_VIOLATION = 0, 1, 2

log = logging.getLogger("wintgen")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _h_payload(h) -> dict:
    return {"n": h.n, "codim": h.codim, "h": np.asarray(h.h).tolist()}


# -- commands -----------------------------------------------------------------


def cmd_verify(args) -> tuple[dict, bool]:
    scenarios, violated = [], False
    for path in args.scenario:
        sc = load_scenario(path)
        results, offending, certificate = [], [], None
        for label, h in zip(sc.labels, sc.forms):
            ids = sc.inequalities or applicable_inequalities(sc.ambient, sc.n, sc.m, h, sc.tol)
            for res in evaluate(h, sc.ambient, sc.m, ids, sc.tol):
                results.append(result_row(res, sc.n, sc.m, sc.ambient.label, label))
                if res.gap < -sc.violation_tol:
                    offending.append({"instance": label, "id": str(res.inequality_id), **_h_payload(h)})
            if sc.certificate and certificate is None and sc.n >= 3:
                cert = detect_equality(h, sc.ambient, sc.m, sc.tol, seed=default_seed())
                if cert is not None:
                    certificate = {"instance": label, **cert.as_dict()}
        entry = {"name": sc.name, "inputs": sc.inputs, "results": results}
        if sc.certificate:
            entry["certificate"] = certificate
        if offending:
            entry["offending"] = offending
            violated = True
        scenarios.append(entry)
    return {"meta": make_meta("verify"), "scenarios": scenarios}, violated


def cmd_fuzz(args) -> tuple[dict, bool]:
    seed = args.seed if args.seed is not None else default_seed()
    summary = fuzz(args.n, args.codim, args.samples, seed, typeset=args.typeset_variant)
    scenarios = []
    for cell in summary.cells:
        worst = cell.worst
        row = {
            "id": "ddvv_core_typeset" if args.typeset_variant else "ddvv_core",
            "instance": "min_slack",
            "n": cell.n,
            "m": cell.n + cell.codim,
            "ambient": "algebraic",
            # report rows read gap = rhs - lhs >= 0, so the sqrt(K_N) side goes left
            "lhs": worst.rhs,
            "rhs": worst.lhs,
            "gap": worst.slack,
            "equality": abs(worst.slack) <= VIOLATION_TOL,
            "tol": VIOLATION_TOL,
        }
        entry = {
            "name": f"fuzz n={cell.n} codim={cell.codim}",
            "inputs": {"n": cell.n, "codim": cell.codim, "samples": cell.samples, "seed": seed,
                       "typeset_variant": args.typeset_variant},
            "results": [row],
            "summary": {"min_slack": cell.min_slack, "violations": cell.violations},
        }
        if cell.violations:
            entry["offending"] = _h_payload_raw(worst.h)
        scenarios.append(entry)
    meta = make_meta("fuzz", seed=seed, samples=args.samples,
                     min_slack=summary.min_slack, violations=summary.violations)
    return {"meta": meta, "scenarios": scenarios}, summary.violations > 0


def _h_payload_raw(h) -> dict:
    H = np.asarray(getattr(h, "h", h))
    return {"n": int(H.shape[1]), "codim": int(H.shape[0]), "h": H.tolist()}


def cmd_extremal(args) -> tuple[dict, bool]:
    seed = args.seed if args.seed is not None else default_seed()
    model = parse_ambient_spec(args.ambient, args.n)
    cfg = SearchConfig(max_iter=args.max_iter, seed=seed)
    best, runs = search(model, args.n, args.m, restarts=args.restarts, config=cfg)
    scenarios = []
    for k, run in enumerate(runs):
        res = gap(run.best_h, model, args.m, InequalityId.PROP1_RHO_N)
        scenarios.append({
            "name": f"restart {k}",
            "inputs": {"ambient": model.label, "n": args.n, "m": args.m, "restart": k},
            "results": [result_row(res, args.n, args.m, model.label, f"restart[{k}]")],
            "search": {"best_gap": run.best_gap, "initial_gap": run.initial_gap,
                       "iterations": run.iterations, "converged": run.converged},
            "certificate": run.certificate.as_dict() if run.certificate is not None else None,
        })
    violated = best.best_gap < -VIOLATION_TOL
    sharp = abs(best.best_gap) <= 1e-6
    best_entry = {
        "name": "best",
        "inputs": {"ambient": model.label, "n": args.n, "m": args.m, "restarts": args.restarts, "seed": seed},
        "results": [result_row(gap(best.best_h, model, args.m, InequalityId.PROP1_RHO_N),
                               args.n, args.m, model.label, "best")],
        "search": {"best_gap": best.best_gap, "sharp": sharp, "iterations": best.iterations,
                   "converged": best.converged},
        "certificate": best.certificate.as_dict() if best.certificate is not None else None,
        "best_h": np.asarray(best.best_h.h).tolist(),
    }
    if violated:
        best_entry["offending"] = _h_payload(best.best_h)
    return {"meta": make_meta("extremal", seed=seed), "scenarios": [best_entry] + scenarios}, violated


def cmd_immersion(args) -> tuple[dict, bool]:
    if args.file:
        imm = load_polynomial_immersion(args.file)
    elif args.catalog:
        try:
            imm = from_catalog(args.catalog)
        except KeyError as exc:
            raise UsageError(exc.args[0]) from None
    else:
        raise UsageError("immersion needs --catalog or --file")
    if args.m is not None:
        imm = imm.padded(args.m)
    model = SpaceForm(0.0)
    results, offending = [], []
    for u in imm.grid(args.grid):
        label = "u=(" + ", ".join(f"{x:.6g}" for x in u) + ")"
        pf = frame_at(imm, u, args.step)
        ids = applicable_inequalities(model, imm.n, imm.m, pf.h, args.tol)
        for res in evaluate(pf.h, model, imm.m, ids, args.tol):
            results.append(result_row(res, imm.n, imm.m, model.label, label))
            if res.gap < -args.tol:
                offending.append({"instance": label, "id": str(res.inequality_id), **_h_payload(pf.h)})
    entry = {
        "name": imm.catalog_id or "immersion",
        "inputs": {"immersion": imm.catalog_id, "n": imm.n, "m": imm.m, "grid": args.grid,
                   "step": args.step, "tol": args.tol},
        "results": results,
        "summary": {"points": args.grid ** imm.n, "min_gap": min(r["gap"] for r in results) if results else None},
    }
    if offending:
        entry["offending"] = offending
    return {"meta": make_meta("immersion"), "scenarios": [entry]}, bool(offending)


def cmd_report(args) -> tuple[dict, bool]:
    try:
        text = Path(args.report).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"{args.report}: {exc.strerror}") from None
    try:
        doc = loads(text)
    except ValueError as exc:
        raise UsageError(f"{args.report}: not a JSON report ({exc})") from None
    if not isinstance(doc, dict) or "scenarios" not in doc:
        raise UsageError(f"{args.report}: missing 'scenarios'")
    violated = any(sc.get("offending") for sc in doc["scenarios"])
    return doc, violated


# -- parser -------------------------------------------------------------------


def _int_list(text: str) -> list[int]:
    """``3``, ``3,4,5`` or ``3-5``."""
    try:
        if "-" in text:
            lo, hi = text.split("-")
            return list(range(int(lo), int(hi) + 1))
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N, N,M,... or N-M, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default="table")
    common.add_argument("--output", "-o", help="write the report here instead of stdout")
    common.add_argument("--verbose", "-v", action="store_true")

    p = _Parser(prog="wintgen", description="Generalized Wintgen inequality checks.")
    p.add_argument("--version", action="version", version=f"wintgen {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", parents=[common], help="evaluate scenario files")
    v.add_argument("scenario", nargs="+")
    v.set_defaults(func=cmd_verify)

    f = sub.add_parser("fuzz", parents=[common], help="fuzz the algebraic DDVV inequality")
    f.add_argument("--n", type=_int_list, default=[3])
    f.add_argument("--codim", type=_int_list, default=[3])
    f.add_argument("--samples", type=int, default=10_000, help="samples per (n, codim) cell")
    f.add_argument("--seed", type=int, default=None)
    f.add_argument("--typeset-variant", action="store_true",
                   help="use the (h_ii)^2 diagonal variant of the quadratic term")
    f.set_defaults(func=cmd_fuzz)

    e = sub.add_parser("extremal", parents=[common], help="maximise the Wintgen gap")
    e.add_argument("--ambient", default="spaceform:0")
    e.add_argument("--n", type=int, default=3)
    e.add_argument("--m", type=int, default=6)
    e.add_argument("--restarts", type=int, default=8)
    e.add_argument("--seed", type=int, default=None)
    e.add_argument("--max-iter", type=int, default=SearchConfig.max_iter)
    e.set_defaults(func=cmd_extremal)

    i = sub.add_parser("immersion", parents=[common], help="check a parametrised immersion in E^m")
    i.add_argument("--catalog", help="catalog id, e.g. sphere:n=3 or clifford_torus")
    i.add_argument("--file", help="polynomial immersion TOML file")
    i.add_argument("--grid", type=int, default=5, help="points per parameter axis")
    i.add_argument("--m", type=int, default=None, help="pad the target space to E^m")
    i.add_argument("--step", type=float, default=1e-4)
    i.add_argument("--tol", type=float, default=1e-4)
    i.set_defaults(func=cmd_immersion)

    r = sub.add_parser("report", parents=[common], help="re-render a JSON report")
    r.add_argument("report")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    for name in ("samples", "restarts", "grid", "max_iter"):
        if getattr(args, name, 1) is not None and getattr(args, name, 1) < 1:
            parser.error(f"--{name.replace('_', '-')} must be positive")
    try:
        doc, violated = args.func(args)
    except ConsistencyError as exc:
        print(f"wintgen: internal consistency failure: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    except (ScenarioError, UsageError, WintgenError, ValueError, OSError) as exc:
        print(f"wintgen: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    text = render(doc, args.format)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if violated:
        print("wintgen: inequality violation; offending instance recorded in the report", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
