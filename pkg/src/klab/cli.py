"""Command-line interface: scenario loading, per-operation subcommands,
suite orchestration with golden-file comparison, and reporting.

Exit codes: 0 success, 1 property violation, 2 input error, 3 horizon
truncation.  Reports are emitted as human text on stdout and, with
``--json-out``, as machine JSON with cases sorted by id.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Tuple

from . import __version__
from .actions import (DSLambdaMetric, audit_nerve_contraction, check_f_cover,
                      lebesgue_number, lebesgue_lambda_search, nerve_map)
from .chaincore import ChainHomotopy, ChainMap, self_torsion
from .errors import HorizonExceeded, InputError, KlabError
from .groups import FamilyPredicate
from .ltheory import signature
from .p2 import omega_audit, p2_action, p2_metric
from .scenario import (Scenario, canonical_dumps, fraction_str, load_scenario,
                       parse_fraction, _element_key)
from .transfer import (finite_replacement, k_transfer, l_transfer,
                       l_transfer_recovers_form, projected_torsion)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INPUT = 2
EXIT_TRUNCATED = 3


@dataclass
class Case:
    id: str
    status: str  # pass / fail / skip
    detail: str = ""


@dataclass
class Report:
    command: str
    cases: List[Case] = field(default_factory=list)
    truncated: bool = False

    def add(self, case_id: str, ok: bool, detail: str = "") -> None:
        self.cases.append(Case(case_id, "pass" if ok else "fail", detail))

    def skip(self, case_id: str, detail: str = "") -> None:
        self.cases.append(Case(case_id, "skip", detail))

    def merge(self, other: "Report") -> None:
        self.cases.extend(other.cases)
        self.truncated = self.truncated or other.truncated

    def exit_code(self) -> int:
        if any(c.status == "fail" for c in self.cases):
            return EXIT_VIOLATION
        if self.truncated:
            return EXIT_TRUNCATED
        return EXIT_OK

    def finish(self, args) -> int:
        self.cases.sort(key=lambda c: c.id)
        counts = {"pass": 0, "fail": 0, "skip": 0}
        for c in self.cases:
            counts[c.status] += 1
            line = f"{c.status.upper():4s} {c.id}"
            if c.detail:
                line += f"  ({c.detail})"
            print(line)
        print(f"{self.command}: {counts['pass']} passed, {counts['fail']} failed, "
              f"{counts['skip']} skipped" + ("  [truncated]" if self.truncated else ""))
        if getattr(args, "json_out", None):
            payload = {
                "command": self.command,
                "version": __version__,
                "cases": [{"id": c.id, "status": c.status, "detail": c.detail}
                          for c in self.cases],
                "counts": counts,
                "truncated": self.truncated,
            }
            with open(args.json_out, "w", encoding="utf-8") as fh:
                fh.write(canonical_dumps(payload))
        return self.exit_code()


def _parse_point(scenario: Scenario, action_name: str, text: str):
    action = scenario.actions[action_name]
    g_str, x = text.split(":", 1)
    g = _element_key(action.backend, g_str)
    if x not in set(action.space.points):
        raise InputError(f"unknown point {x!r}")
    return (g, x)


def _family_from_name(name: str) -> FamilyPredicate:
    f2 = name.endswith("-2")
    base = name[:-2] if f2 else name
    return FamilyPredicate(base, f2)


# -- subcommand implementations -------------------------------------------------


def cmd_validate(scenario: Scenario, args) -> Report:
    # parsing already ran every structural validator; reaching here means
    # the sections are well-formed and cross-references resolve
    rep = Report("validate")
    for section in ("groups", "spaces", "actions", "complexes", "forms",
                    "covers", "morphisms", "chain_actions", "dominations",
                    "simplicial"):
        for name in getattr(scenario, section):
            rep.add(f"{section}:{name}:well-formed", True)
    return rep


def cmd_dslambda(scenario: Scenario, args) -> Report:
    rep = Report("dslambda")
    action = scenario.actions[args.action]
    lam = parse_fraction(args.lam)
    metric = DSLambdaMetric(action, lam, n_max=args.horizon)
    src = _parse_point(scenario, args.action, args.src)
    dst = _parse_point(scenario, args.action, args.dst)
    res = metric.distance(src, dst)
    rep.truncated = res.truncated
    value = "inf" if res.is_infinite() else fraction_str(res.value)
    rep.add(f"dslambda:{args.action}", True,
            f"d({args.src},{args.dst}) = {value}"
            + (" [lower bound, truncated]" if res.truncated else ""))
    return rep


def cmd_orbit(scenario: Scenario, args) -> Report:
    rep = Report("orbit")
    action = scenario.actions[args.action]
    at = _parse_point(scenario, args.action, args.at)
    orbit = action.s_orbit(args.depth, at)
    listing = sorted(f"{g}:{x}" for (g, x) in orbit)
    rep.add(f"orbit:{args.action}", True,
            f"|S^{args.depth}({args.at})| = {len(orbit)}: {', '.join(listing)}")
    return rep


def cmd_lebesgue(scenario: Scenario, args) -> Report:
    rep = Report("lebesgue")
    cover, action_name = scenario.covers[args.cover]
    action = scenario.actions[action_name]
    if args.lambda_grid:
        grid = [parse_fraction(v) for v in args.lambda_grid.split(",")]
        m = parse_fraction(args.m) if args.m else Fraction(len(action.S))
        lam, results = lebesgue_lambda_search(action, cover, m, grid, args.horizon)
        detail = ", ".join(f"L({fraction_str(k)})="
                           + ("inf" if v is None else str(fraction_str(v)))
                           for k, v in results.items())
        rep.add(f"lebesgue:{args.cover}:search", lam is not None,
                f"first Lambda with number >= {fraction_str(m)}/2: "
                + (str(fraction_str(lam)) if lam is not None else "none") + f"; {detail}")
    else:
        lam = parse_fraction(args.lam)
        table = DSLambdaMetric(action, lam, args.horizon).table(list(cover.carrier))
        rep.truncated = table.truncated
        number = lebesgue_number(cover, table)
        rep.add(f"lebesgue:{args.cover}", True,
                "number = " + ("inf" if number is None else str(fraction_str(number))))
    return rep


def cmd_nerve(scenario: Scenario, args) -> Report:
    rep = Report("nerve")
    cover, action_name = scenario.covers[args.cover]
    action = scenario.actions[action_name]
    family = _family_from_name(args.family)
    fc = check_f_cover(cover, family, action.backend, action, N=args.n)
    rep.add(f"nerve:{args.cover}:f-cover", fc.ok(),
            "; ".join(fc.violations + fc.s_long_failures) or f"dim {fc.dimension}")
    lam = parse_fraction(args.lam)
    table = DSLambdaMetric(action, lam, args.horizon).table(list(cover.carrier))
    rep.truncated = table.truncated
    nerve, images = nerve_map(cover, table)
    rep.add(f"nerve:{args.cover}:map", True,
            f"nerve dim {nerve.dimension()}, {len(images)} points placed")
    if args.audit_d:
        rng = random.Random(args.seed)
        pairs = [(rng.choice(cover.carrier), rng.choice(cover.carrier))
                 for _ in range(args.samples)]
        audit = audit_nerve_contraction(cover, table, args.n,
                                        parse_fraction(args.audit_d), pairs)
        rep.add(f"nerve:{args.cover}:contraction", audit.ok(),
                f"checked {audit.checked}, shared {audit.shared_simplex}, "
                f"disjoint {audit.disjoint_support}")
    return rep


def cmd_p2(scenario: Scenario, args) -> Report:
    rep = Report("p2")
    space = scenario.spaces[args.space]
    pair_space = p2_metric(space)
    rep.add(f"p2:{args.space}:metric", True,
            f"{len(pair_space.points)} unordered pairs, axioms verified")
    if args.action:
        action = scenario.actions[args.action]
        induced = p2_action(action)
        rep.add(f"p2:{args.action}:induced-action", True,
                f"induced action on {len(induced.space.points)} pairs validated")
        rng = random.Random(args.seed)
        pair_pts = induced.space.points
        window = list(action.backend.elements() or [action.backend.identity()])
        samples = [((rng.choice(window), rng.choice(pair_pts)),
                    (rng.choice(window), rng.choice(pair_pts)))
                   for _ in range(args.samples)]
        audit = omega_audit(action, parse_fraction(args.lam), samples,
                            n_max=args.horizon)
        rep.add(f"p2:{args.action}:omega", audit.ok(),
                f"checked {audit.checked}, skipped {audit.skipped}")
    return rep


def cmd_replace(scenario: Scenario, args) -> Report:
    rep = Report("replace")
    C, D, i, r, h = scenario.dominations[args.domination]
    result = finite_replacement(C, D, i, r, h)
    for name, ok in result.checks:
        rep.add(f"replace:{args.domination}:{name}", ok)
    return rep


def _run_transfer_k(scenario: Scenario, name: str, spec: Dict[str, Any],
                    rep: Report) -> None:
    chain = scenario.chain_actions[spec["chain_action"]]
    alpha = scenario.morphisms[spec["alpha"]]
    alpha_inv = scenario.morphisms[spec["alpha_inv"]]
    lam = parse_fraction(spec["lambda"])
    result = k_transfer(alpha, alpha_inv, chain, lam)
    rep.add(f"transfer-k:{name}:certified", result.certified(),
            f"bound {fraction_str(result.certificate.bound)} <= "
            f"{fraction_str(result.target_bound)}")
    if chain.backend.kind == "finite-table":
        tors = projected_torsion(result)
        alpha_det = _morphism_det(alpha)
        rep.add(f"transfer-k:{name}:projection-torsion",
                tors.det() == alpha_det,
                f"det {tors.det()} vs alpha det {alpha_det}")


def _morphism_det(alpha) -> Dict[object, int]:
    from .gring import GRMatrix
    gm = GRMatrix(alpha.backend, alpha.target.rank, alpha.source.rank,
                  dict(alpha.letters))
    return gm.det()


def _run_transfer_l(scenario: Scenario, name: str, spec: Dict[str, Any],
                    rep: Report) -> None:
    chain = scenario.chain_actions[spec["chain_action"]]
    alpha = scenario.morphisms[spec["alpha"]]
    lam = parse_fraction(spec["lambda"])
    result = l_transfer(alpha, chain, lam)
    for cname, ok in result.data.checks + result.checks:
        rep.add(f"transfer-l:{name}:{cname}", ok)
    rep.add(f"transfer-l:{name}:certified", result.certified(),
            f"bound {fraction_str(result.certificate.bound)} <= "
            f"{fraction_str(result.target_bound)}")
    if chain.point_equivalence is not None:
        rep.add(f"transfer-l:{name}:recovers-form",
                l_transfer_recovers_form(result, alpha))


def _run_torsion(scenario: Scenario, name: str, spec: Dict[str, Any],
                 rep: Report) -> None:
    from .scenario import _parse_chain_map, parse_matrix
    C = scenario.complexes[spec["complex"]]
    D = scenario.complexes[spec.get("target", spec["complex"])]
    f = _parse_chain_map(spec["f"], C, D)
    g = _parse_chain_map(spec["g"], D, C)
    h = ChainHomotopy(g.compose(f), ChainMap.identity(C),
                      {int(k): parse_matrix(v)
                       for k, v in spec["h"].get("mats", {}).items()})
    k = ChainHomotopy(f.compose(g), ChainMap.identity(D),
                      {int(kk): parse_matrix(v)
                       for kk, v in spec["k"].get("mats", {}).items()})
    cls = self_torsion(f, g, h, k)
    rep.add(f"torsion:{name}", True, f"det sign {cls.det_sign()}")


def cmd_pipeline(kind: str):
    def run(scenario: Scenario, args) -> Report:
        rep = Report(kind)
        names = [args.pipeline] if args.pipeline else [
            n for n, spec in scenario.pipelines.items() if spec.get("kind") == kind]
        if not names:
            raise InputError(f"no {kind} pipelines in the scenario")
        for name in names:
            spec = scenario.pipelines[name]
            if spec.get("kind") != kind:
                raise InputError(f"pipeline {name!r} has kind {spec.get('kind')!r}")
            if kind == "transfer-k":
                _run_transfer_k(scenario, name, spec, rep)
            elif kind == "transfer-l":
                _run_transfer_l(scenario, name, spec, rep)
            elif kind == "torsion":
                _run_torsion(scenario, name, spec, rep)
            elif kind == "replace":
                C, D, i, r, h = scenario.dominations[spec["domination"]]
                result = finite_replacement(C, D, i, r, h)
                for cname, ok in result.checks:
                    rep.add(f"replace:{name}:{cname}", ok)
        return rep
    return run


def cmd_signature(scenario: Scenario, args) -> Report:
    rep = Report("signature")
    names = [args.form] if args.form else sorted(scenario.forms)
    for name in names:
        form = scenario.forms[name]
        try:
            sig = signature(form)
            rep.add(f"signature:{name}", True, f"signature = {sig}")
        except KlabError as exc:
            rep.add(f"signature:{name}", False, str(exc))
    return rep


def cmd_finobstr(scenario: Scenario, args) -> Report:
    from .chaincore import finiteness_obstruction
    rep = Report("finobstr")
    names = [args.complex] if args.complex else sorted(scenario.complexes)
    for name in names:
        c = scenario.complexes[name]
        cls = finiteness_obstruction(c)
        rep.add(f"finobstr:{name}", True, f"reduced rank = {cls.reduced_rank()}")
    return rep


# -- suite ------------------------------------------------------------------------


def _suite_jobs(scenario: Scenario, args) -> List[Tuple[str, Callable[[], Report]]]:
    jobs: List[Tuple[str, Callable[[], Report]]] = []

    def job_validate() -> Report:
        return cmd_validate(scenario, args)

    jobs.append(("validate", job_validate))
    for name in sorted(scenario.forms):
        def job_form(n=name) -> Report:
            ns = argparse.Namespace(form=n, json_out=None)
            return cmd_signature(scenario, ns)
        jobs.append((f"form:{name}", job_form))
    for name in sorted(scenario.complexes):
        def job_complex(n=name) -> Report:
            ns = argparse.Namespace(complex=n, json_out=None)
            return cmd_finobstr(scenario, ns)
        jobs.append((f"complex:{name}", job_complex))
    for name in sorted(scenario.dominations):
        def job_dom(n=name) -> Report:
            ns = argparse.Namespace(domination=n)
            return cmd_replace(scenario, ns)
        jobs.append((f"domination:{name}", job_dom))
    for name in sorted(scenario.covers):
        def job_cover(n=name) -> Report:
            rep = Report("cover")
            cover, action_name = scenario.covers[n]
            action = scenario.actions[action_name]
            fam = _family_from_name(args.family)
            fc = check_f_cover(cover, fam, action.backend, action)
            rep.add(f"cover:{n}:axioms", fc.ok(),
                    "; ".join(fc.violations + fc.s_long_failures)
                    or f"dim {fc.dimension}")
            return rep
        jobs.append((f"cover:{name}", job_cover))
    for name in sorted(scenario.pipelines):
        kind = scenario.pipelines[name].get("kind")
        def job_pipe(n=name, k=kind) -> Report:
            ns = argparse.Namespace(pipeline=n, json_out=None)
            return cmd_pipeline(k)(scenario, ns)
        jobs.append((f"pipeline:{name}", job_pipe))
    return jobs


def cmd_suite(scenario: Scenario, args) -> Report:
    rep = Report("suite")
    jobs = _suite_jobs(scenario, args)

    def run_job(item):
        name, fn = item
        try:
            return fn()
        except KlabError as exc:
            sub = Report(name)
            sub.add(f"{name}:error", False, f"{exc.code}: {exc}")
            return sub

    if args.workers > 1:
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            for sub in pool.map(run_job, jobs):
                rep.merge(sub)
    else:
        for item in jobs:
            rep.merge(run_job(item))
    if args.golden:
        with open(args.golden, "r", encoding="utf-8") as fh:
            golden = json.load(fh)
        got = {c.id: c.status for c in rep.cases}
        want = {c["id"]: c["status"] for c in golden.get("cases", [])}
        rep.add("suite:golden-match", got == want,
                "" if got == want else "case statuses differ from the golden file")
    return rep


def cmd_canonicalize(args) -> int:
    from .scenario import canonicalize_file
    sys.stdout.write(canonicalize_file(args.scenario))
    return EXIT_OK


# -- argument parsing ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="klab",
        description="Exact checks for controlled chain algebra, homotopy-action "
                    "metrics, and K-/L-transfers at desk scale.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("scenario", help="scenario JSON file")
        p.add_argument("--json-out", help="write the machine report here")
        p.add_argument("--seed", type=int, default=0, help="seed for sampled audits")
        p.add_argument("--horizon", type=int, default=6,
                       help="move horizon for d_{S,Lambda}")
        p.add_argument("--samples", type=int, default=200,
                       help="sample count for randomized audits")
        return p

    common(sub.add_parser("validate", help="parse and validate every section"))

    p = common(sub.add_parser("dslambda", help="evaluate the quasi-metric"))
    p.add_argument("--action", required=True)
    p.add_argument("--lam", required=True)
    p.add_argument("--src", required=True, metavar="g:x")
    p.add_argument("--dst", required=True, metavar="g:x")

    p = common(sub.add_parser("orbit", help="enumerate S^n(g,x)"))
    p.add_argument("--action", required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--at", required=True, metavar="g:x")

    p = common(sub.add_parser("lebesgue", help="Lebesgue number of a cover"))
    p.add_argument("--cover", required=True)
    p.add_argument("--lam")
    p.add_argument("--lambda-grid", dest="lambda_grid",
                   help="comma-separated Lambda grid for the search variant")
    p.add_argument("--m", help="target 2*Lebesgue bound (default |S|)")

    p = common(sub.add_parser("nerve", help="nerve map and contraction audit"))
    p.add_argument("--cover", required=True)
    p.add_argument("--lam", required=True)
    p.add_argument("--family", default="virtually-cyclic")
    p.add_argument("--n", type=int, default=2, help="dimension bound N")
    p.add_argument("--audit-d", dest="audit_d",
                   help="Lebesgue D for the 16N^2/D contraction audit")

    p = common(sub.add_parser("p2", help="unordered pairs: metric, action, omega"))
    p.add_argument("--space", required=True)
    p.add_argument("--action")
    p.add_argument("--lam", default="1")

    p = common(sub.add_parser("replace", help="finite replacement identities"))
    p.add_argument("--domination", required=True)

    for kind in ("transfer-k", "transfer-l", "torsion"):
        p = common(sub.add_parser(kind, help=f"run {kind} pipelines"))
        p.add_argument("--pipeline", help="pipeline name (default: all of this kind)")

    p = common(sub.add_parser("signature", help="signature of symmetric forms"))
    p.add_argument("--form")

    p = common(sub.add_parser("finobstr", help="finiteness obstruction ranks"))
    p.add_argument("--complex")

    p = common(sub.add_parser("suite", help="run every check in the scenario"))
    p.add_argument("--golden", help="golden report to compare against")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--family", default="virtually-cyclic")

    p = sub.add_parser("canonicalize", help="print the canonical serialization")
    p.add_argument("scenario")
    return parser


COMMANDS = {
    "validate": cmd_validate,
    "dslambda": cmd_dslambda,
    "orbit": cmd_orbit,
    "lebesgue": cmd_lebesgue,
    "nerve": cmd_nerve,
    "p2": cmd_p2,
    "replace": cmd_replace,
    "transfer-k": cmd_pipeline("transfer-k"),
    "transfer-l": cmd_pipeline("transfer-l"),
    "torsion": cmd_pipeline("torsion"),
    "signature": cmd_signature,
    "finobstr": cmd_finobstr,
    "suite": cmd_suite,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "canonicalize":
        return cmd_canonicalize(args)
    try:
        scenario = load_scenario(args.scenario)
    except (InputError, OSError, ValueError, KeyError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        report = COMMANDS[args.command](scenario, args)
    except HorizonExceeded as exc:
        print(f"horizon truncation: {exc}", file=sys.stderr)
        return EXIT_TRUNCATED
    except (InputError, KeyError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return report.finish(args)


if __name__ == "__main__":
    raise SystemExit(main())
