#!/usr/bin/env python3
"""
sigmarho - exact (sigma, rho)-set counting and reduction toolkit
Command line entry point
"""

import argparse
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

# the project root goes on sys.path so that src is a top-level package
project_root = Path(__file__).parent.parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

from loguru import logger

from src.config import configure
from src.core import (
    ManagerCase,
    Pair,
    PathDecomposition,
    c_sigma_rho,
    compute_tops,
    is_trivial,
    manager_eligibility,
    max_structured,
    parse_srg,
    serialize_srg,
    string_code,
)
from src.core.srg_format import SrgDocument
from src.counting import Isolation, remove_relations_counting
from src.dp import count_dp
from src.exceptions import (
    CertificationError,
    DpStateLimitExceeded,
    FormatError,
    OracleCapExceeded,
    SetParseError,
    SigmaRhoError,
    ValidationError,
)
from src.managers import build_manager
from src.oracle import Count, ManagerFailure, PortalGadget, certify_gadget, certify_manager, count_sets
from src.providers import ProviderKind, build_provider
from src.relations import remove_relations_decision
from src.sat import compile_sat, parse_dimacs


EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CAP = 3
EXIT_PIPELINE = 4

LOG_FORMAT = "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | <level>{message}</level>"
VERBOSE_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss.SSS}</green> | <level>{level: <8}</level> | "
    "<cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> | <level>{message}</level>"
)


def setup_logging(level: str, verbose: bool = False) -> None:
    logger.remove()
    if verbose:
        logger.add(sys.stderr, format=VERBOSE_FORMAT, level="DEBUG")
    else:
        logger.add(sys.stderr, format=LOG_FORMAT, level=level)


def format_count(value: Count) -> str:
    """Integers in decimal, rationals as num/den."""
    return str(value)


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise FormatError(f"cannot read {path}: {e.strerror}") from None


def _emit(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    Path(out).write_text(text, encoding="utf-8")
    logger.info(f"wrote {out}")


def _decomposition(doc: SrgDocument, required: bool = False) -> PathDecomposition:
    if doc.decomposition is not None:
        return doc.decomposition
    if required:
        raise FormatError("the dp engine needs bag lines")
    logger.warning("no bags given, using a single bag")
    return PathDecomposition.single_bag(doc.instance.n)


def _params(items: Sequence[str]) -> Dict[str, str]:
    params: Dict[str, str] = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise FormatError(f"expected key=value, got '{item}'")
        params[key] = value
    return params


# commands

def cmd_count(args: argparse.Namespace) -> int:
    doc = parse_srg(_read(args.file))
    if args.engine == "dp":
        value = count_dp(doc.instance, _decomposition(doc, required=True))
    else:
        value = count_sets(doc.instance, cap=args.cap)
    print(format_count(value))
    return EXIT_OK


def cmd_reduce_sat(args: argparse.Namespace) -> int:
    phi = parse_dimacs(_read(args.cnf))
    pair = Pair.parse(args.pair)
    manager = build_manager(ManagerCase(args.case), pair)
    compiled = compile_sat(phi, manager, g=args.group_width)
    notes = [
        f"reduce-sat {phi.n} variables {phi.m} clauses",
        f"manager {compiled.manager_name} g={compiled.encoding.g} t={compiled.rows}",
        f"width {compiled.decomposition.width} = g*t + {compiled.width_constant}",
    ]
    _emit(serialize_srg(compiled.instance, compiled.decomposition, notes=notes), args.out)
    return EXIT_OK


def cmd_remove_relations(args: argparse.Namespace) -> int:
    text = _read(args.file)
    doc = parse_srg(text)
    pd = _decomposition(doc)

    if args.mode == "decision":
        if not doc.instance.constraints:
            # nothing to remove: pass the document through untouched
            _emit(text, args.out)
            return EXIT_OK
        inst, out_pd, report = remove_relations_decision(doc.instance, pd)
        notes = [f"remove-relations decision: width {report.width_in} -> {report.width_out}"]
        _emit(serialize_srg(inst, out_pd, notes=notes), args.out)
        return EXIT_OK

    plan = remove_relations_counting(doc.instance, pd, isolation=Isolation(args.isolation),
                                     expand=args.expand)
    _emit(plan.transcript() + "\n", args.out)
    if args.engine is not None:
        print(format_count(plan.execute(engine=args.engine, cap=args.cap)))
    return EXIT_OK


def cmd_build(args: argparse.Namespace) -> int:
    pair = Pair.parse(args.pair)
    if args.kind == "manager":
        mi = build_manager(ManagerCase(args.case), pair).at_rank(args.rank)
        _emit(mi.to_srg(), args.out)
        return EXIT_OK

    kind = ProviderKind.parse(args.kind, _params(args.param))
    gadget = build_provider(kind, pair)
    notes = [f"provider {kind.describe()}"]
    notes += [
        f"witness {string_code(x)} " + " ".join(str(v) for v in sorted(s))
        for x, s in sorted(gadget.witnesses.items(), key=lambda item: string_code(item[0]))
    ]
    _emit(serialize_srg(gadget.instance, gadget.decomposition, portals=gadget.portals,
                        language=gadget.declared_language, notes=notes), args.out)
    return EXIT_OK


def cmd_certify(args: argparse.Namespace) -> int:
    if args.manager is not None:
        pair = Pair.parse(args.pair)
        mi = build_manager(ManagerCase(args.manager), pair).at_rank(args.rank)
        result = certify_manager(mi, cap=args.cap)
        if isinstance(result, ManagerFailure):
            raise CertificationError(f"manager rank {result.rank}: {result.reason}")
        print(f"manager={args.manager}")
        print(f"rank={result.rank}")
        print(f"solutions={len(result.solutions)}")
        return EXIT_OK

    if args.file is None:
        raise ValidationError("certify needs a gadget file or --manager")
    doc = parse_srg(_read(args.file))
    if doc.portals is None or doc.language is None:
        raise ValidationError("certify needs portal and lang lines")
    gadget = PortalGadget(name=Path(args.file).stem, instance=doc.instance, portals=doc.portals,
                          declared_language=doc.language, decomposition=doc.decomposition)
    result = certify_gadget(gadget, cap=args.cap)
    if not result.ok:
        offending = string_code(result.offending) if result.offending is not None else "-"
        raise CertificationError(f"{gadget.name}: {result.reason} ({offending})")
    print(f"verdict={result.verdict.value}")
    return EXIT_OK


def cmd_classify(args: argparse.Namespace) -> int:
    pair = Pair.parse(args.pair)
    s_top, r_top = compute_tops(pair)
    triviality = is_trivial(pair)
    print(f"pair={pair.describe()}")
    print(f"s_top={s_top}")
    print(f"r_top={r_top}")
    structure = max_structured(pair)
    print(f"structure={getattr(structure, 'value', structure)}")
    print(f"trivial={'yes' if triviality.trivial else 'no'}")
    if triviality.trivial:
        print(f"trivial_rule={triviality.rule}")
    else:
        print(f"c={c_sigma_rho(pair)}")
    print(f"managers={','.join(case.value for case in manager_eligibility(pair)) or '-'}")
    return EXIT_OK


COMMANDS: Dict[str, Callable[[argparse.Namespace], int]] = {
    "count": cmd_count,
    "reduce-sat": cmd_reduce_sat,
    "remove-relations": cmd_remove_relations,
    "build": cmd_build,
    "certify": cmd_certify,
    "classify": cmd_classify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sigmarho",
        description="sigmarho - exact (sigma, rho)-set counting and reduction toolkit",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
examples:
  # count the (sigma, rho)-sets of an instance
  python src/main.py count graph.srg --engine dp

  # compile a CNF formula for perfect codes
  python src/main.py reduce-sat phi.cnf --pair "sigma=finite:0 rho=finite:1" --group-width 2 --out phi.srg

  # counting relation removal, printing the recombined count
  python src/main.py remove-relations graph.srg --mode counting --engine oracle --out plan.json

  # tops, structure and c of a pair
  python src/main.py classify --pair "sigma=cofinite: rho=cofinite:0"
        """
    )
    parser.add_argument("--config", "-c", default=None, help="YAML settings file (default: config/sigmarho.yaml)")
    parser.add_argument("--cap", type=int, default=None, help="oracle search-size cap in bits")
    parser.add_argument("--seed", type=int, default=None, help="seed for randomised sweeps")
    parser.add_argument("--verbose", "-v", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    count = sub.add_parser("count", help="exact number of solutions")
    count.add_argument("file", help="srg v1 instance, '-' for stdin")
    count.add_argument("--engine", choices=["oracle", "dp"], default=None)

    reduce_sat = sub.add_parser("reduce-sat", help="compile a DIMACS formula")
    reduce_sat.add_argument("cnf", help="DIMACS file, '-' for stdin")
    reduce_sat.add_argument("--pair", required=True)
    reduce_sat.add_argument("--case", choices=[c.value for c in ManagerCase], default=ManagerCase.RCASE.value)
    reduce_sat.add_argument("--group-width", "-g", type=int, default=None)
    reduce_sat.add_argument("--out", "-o", default=None)

    remove = sub.add_parser("remove-relations", help="replace relations by graph gadgets")
    remove.add_argument("file", help="srg v1 instance, '-' for stdin")
    remove.add_argument("--mode", choices=["decision", "counting"], default="decision")
    remove.add_argument("--engine", choices=["oracle", "dp"], default=None,
                        help="counting mode: also execute the plan")
    remove.add_argument("--isolation", choices=[i.value for i in Isolation], default=Isolation.THRESHOLD.value)
    remove.add_argument("--expand", action="store_true", help="counting mode: apply every step eagerly")
    remove.add_argument("--out", "-o", default=None)

    build = sub.add_parser("build", help="emit a provider gadget or a manager")
    build.add_argument("kind", help="provider type, or 'manager'")
    build.add_argument("param", nargs="*", help="key=value provider parameters")
    build.add_argument("--pair", required=True)
    build.add_argument("--case", choices=[c.value for c in ManagerCase], default=ManagerCase.RCASE.value)
    build.add_argument("--rank", type=int, default=1)
    build.add_argument("--out", "-o", default=None)

    certify = sub.add_parser("certify", help="check a gadget file or a manager")
    certify.add_argument("file", nargs="?", default=None)
    certify.add_argument("--manager", choices=[c.value for c in ManagerCase], default=None)
    certify.add_argument("--pair", default=None)
    certify.add_argument("--rank", type=int, default=1)

    classify = sub.add_parser("classify", help="describe a pair")
    classify.add_argument("--pair", required=True)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = configure(args.config, oracle_cap=args.cap, seed=args.seed)
        setup_logging(settings.log_level, args.verbose)
        if getattr(args, "engine", None) is None and args.command == "count":
            args.engine = settings.default_engine
        if args.command == "certify" and args.manager is not None and args.pair is None:
            raise ValidationError("certify --manager needs --pair")
        return COMMANDS[args.command](args)
    except (FormatError, ValidationError, SetParseError) as e:
        logger.error(f"invalid input: {e}")
        return EXIT_INPUT
    except (OracleCapExceeded, DpStateLimitExceeded) as e:
        logger.error(str(e))
        return EXIT_CAP
    except SigmaRhoError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_PIPELINE
    except ValueError as e:
        # bad enum or integer values in provider parameters
        logger.error(f"invalid input: {e}")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
