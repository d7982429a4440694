"""Command-line interface.

stdout carries one JSON document per command; progress and errors go to
stderr (silenced by ``--quiet``).  ``decide`` exits 0 for noncontextual, 1 for
contextual and 2 on any error.
"""
from __future__ import annotations

import argparse
import logging
import sys
import time
from fractions import Fraction

from . import __version__
from ._kernels import BACKEND
from .coupling import multimaximal_binary
from .decide import decide_contextuality, decide_traditional, decide_unsplit, verify_witness
from .documents import (
    coupling_from_doc,
    coupling_to_doc,
    dumps,
    fraction_str,
    load_system,
    loads_json,
    verdict_to_doc,
)
from .errors import CbdError, NotBinary, UnknownContent, UnknownLabel
from .split import PLANS, canonical, make_plan
from .vspace import VSpace, allowable_dichotomizations, is_vlinked

log = logging.getLogger("cbd")

EXIT_NONCONTEXTUAL = 0
EXIT_CONTEXTUAL = 1
EXIT_ERROR = 2


def _emit(doc) -> None:
    sys.stdout.write(dumps(doc) + "\n")


def _content(system, raw: str):
    if raw in system.contents:
        return raw
    for q in system.contents:
        if str(q) == raw:
            return q
    raise UnknownContent(f"no content named {raw!r}; have {[str(q) for q in system.contents]}")


def _labels(space, raw: str) -> list:
    by_name = {str(x): x for x in space.labels}
    out = []
    for part in raw.split(","):
        part = part.strip()
        if part not in by_name:
            raise UnknownLabel(f"{part!r} is not a value; have {list(by_name)}")
        out.append(by_name[part])
    return out


def cmd_validate(args) -> int:
    system = load_system(args.file)
    _emit({
        "valid": True,
        "contents": len(system.contents),
        "contexts": len(system.contexts),
        "variables": len(system.variables),
    })
    log.info("%s: valid", args.file)
    return 0


def cmd_decide(args) -> int:
    system = load_system(args.file)
    start = time.perf_counter()
    if args.traditional:
        verdict, route, plan_name = decide_traditional(system, atoms=args.atoms), "traditional", None
    elif args.plan == "unsplit":
        verdict, route, plan_name = decide_unsplit(system, atoms=args.atoms), "unsplit", None
    else:
        plan = make_plan(system, args.plan)
        verdict = decide_contextuality(system, plan, atoms=args.atoms)
        route, plan_name = "split", args.plan
    log.info("%s: %s (%s, %d LP columns, %s kernel, %.3fs)", args.file, verdict.status, route,
             verdict.lp_shape.get("variables", 0), BACKEND, time.perf_counter() - start)
    _emit(verdict_to_doc(verdict, plan_name, route))
    return EXIT_NONCONTEXTUAL if verdict.noncontextual else EXIT_CONTEXTUAL


def cmd_vspace(args) -> int:
    system = load_system(args.file)
    q = _content(system, args.content)
    space = VSpace.from_value_space(system.space(q))
    if args.list_allowable:
        dichotomies = allowable_dichotomizations(space)
        _emit({
            "content": q,
            "allowable": [
                [[x for x in space.ground if x in d.part0], [x for x in space.ground if x in d.part1]]
                for d in dichotomies
            ],
            "count": len(dichotomies),
        })
        return 0
    subset = _labels(system.space(q), args.check)
    linked = is_vlinked(space, subset)
    log.info("%s is %sV-linked", subset, "" if linked else "not ")
    _emit({"content": q, "subset": subset, "linked": linked})
    return 0


def _split_address(raw: str):
    """``q`` or ``q:{a,b}`` (braces optional)."""
    if ":" not in raw:
        return raw, None
    q, _, rest = raw.rpartition(":")
    rest = rest.strip()
    if rest.startswith("{") and rest.endswith("}"):
        rest = rest[1:-1]
    return q, rest


def cmd_couple(args) -> int:
    system = load_system(args.file)
    raw_q, raw_subset = _split_address(args.content)
    try:
        q = _content(system, raw_q)
    except UnknownContent:
        q, raw_subset = _content(system, args.content), None
    space = system.space(q)
    cids = system.contexts_of(q)
    if raw_subset is not None:
        A = frozenset(_labels(space, raw_subset))
        canonical(space.labels, A)  # rejects empty and full subsets
        values = (0, 1)
        ps = [sum((p for x, p in system.distribution(q, c).items() if x in A), Fraction(0)) for c in cids]
        name = f"{q}:{{{','.join(str(x) for x in space.labels if x in A)}}}"
    else:
        if not space.is_binary:
            raise NotBinary(f"content {q!r} has {len(space)} values; address a split as '{q}:{{...}}'")
        values = space.labels
        ps = [system.distribution(q, c).get(values[1], Fraction(0)) for c in cids]
        name = q
    stair = multimaximal_binary(ps, tuple((name, c) for c in cids))
    coupling = stair.map_values({v: (lambda b: values[b]) for v in stair.variables})
    doc = coupling_to_doc(coupling)
    doc["probabilities"] = [fraction_str(p) for p in ps]
    _emit(doc)
    return 0


def cmd_verify(args) -> int:
    system = load_system(args.file)
    with open(args.verdict, encoding="utf-8") as fh:
        verdict = loads_json(fh.read())
    if not isinstance(verdict, dict) or verdict.get("witness") is None:
        log.error("verdict document has no witness to verify")
        _emit({"verified": False, "reason": "no witness"})
        return 1
    witness = coupling_from_doc(verdict["witness"])
    route = verdict.get("route", "split")
    if route == "traditional":
        result = verify_witness(system, witness, link="identity")
    elif route == "unsplit":
        result = verify_witness(system, witness, link="unsplit")
    else:
        plan_name = (verdict.get("plan") or {}).get("name") or "full"
        result = verify_witness(system, witness, make_plan(system, plan_name))
    _emit({"verified": result.ok, "failure": None if result.ok else [str(x) for x in result.witness]})
    return 0 if result.ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cbd", description="Contextuality-by-Default decisions.")
    parser.add_argument("--version", action="version", version=f"cbd {__version__}")
    parser.add_argument("-q", "--quiet", action="store_true", help="silence stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a system document")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("decide", help="decide (non)contextuality")
    p.add_argument("file")
    p.add_argument("--plan", choices=PLANS + ("unsplit",), default="full",
                   help="dichotomization plan, or 'unsplit' for maximal couplings of the original variables")
    p.add_argument("--traditional", action="store_true",
                   help="identity couplings (consistently connected systems only)")
    p.add_argument("--atoms", choices=("support", "full"), default="support",
                   help="LP columns: product of bunch supports (default) or of all value sets")
    p.set_defaults(func=cmd_decide)

    p = sub.add_parser("vspace", help="allowable dichotomizations and V-linkedness")
    p.add_argument("file")
    p.add_argument("content")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--list-allowable", action="store_true")
    g.add_argument("--check", metavar="S", help="comma-separated values")
    p.set_defaults(func=cmd_vspace)

    p = sub.add_parser("couple", help="multimaximal coupling of a binary connection")
    p.add_argument("file")
    p.add_argument("content", help="content id, or 'q:{a,b}' for a split")
    p.set_defaults(func=cmd_couple)

    p = sub.add_parser("verify", help="re-check the witness of a decide verdict")
    p.add_argument("file")
    p.add_argument("verdict")
    p.set_defaults(func=cmd_verify)
    return parser


def _setup_logging(quiet: bool) -> None:
    log.handlers.clear()
    log.propagate = False
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("cbd: %(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.CRITICAL + 1 if quiet else logging.INFO)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _setup_logging(args.quiet)
    try:
        return args.func(args)
    except CbdError as exc:
        log.error("error: %s: %s", type(exc).__name__, exc)
        return EXIT_ERROR
    except (OSError, ValueError) as exc:
        log.error("error: %s", exc)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
