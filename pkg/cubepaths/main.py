"""
Command-line front end.

Every subcommand prints JSON (or a short text rendering) on stdout and
reports through its exit code:

    0   success
    1   verifier rejection (verify only)
    2   proven non-connectable
    3   unresolved
    64  malformed input
    65  unsupported request
"""

import argparse
import logging
import random
import statistics
import sys
import time
from enum import IntEnum
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

from pydantic import BaseModel, ValidationError

from cubepaths import __version__
from cubepaths.config import Settings, settings
from cubepaths.logging_config import setup_logging
from cubepaths.models.hypercube import CubePathsError, Vertex
from cubepaths.models.pairset import PairSet, random_odd_pairset
from cubepaths.schemas.census import BenchRowModel, CensusRecordModel, CensusSummaryModel
from cubepaths.schemas.pairset import ConnectorModel, PairSetModel
from cubepaths.schemas.report import (
    ClassifyModel,
    SolveReportModel,
    TraceModel,
    VerifyResultModel,
    ViolationModel,
)
from cubepaths.services.census_service import (
    SLICES,
    enumerate_classes,
    sample_diminishable,
    summarize,
)
from cubepaths.services.classification_service import (
    DimensionTooLargeError,
    SamplingExhaustedError,
    profile,
)
from cubepaths.services.solver_service import (
    EvenDistanceError,
    InvalidInputError,
    UnresolvedError,
    Verdict,
    gray_path,
    solve,
)
from cubepaths.services.verify_service import check, check_gray
from cubepaths.storage.memory_backend import MemorySink

logger = logging.getLogger(__name__)


class ExitCode(IntEnum):
    OK = 0
    REJECTED = 1
    NON_CONNECTABLE = 2
    UNRESOLVED = 3
    MALFORMED = 64
    UNSUPPORTED = 65


class MalformedInputError(CubePathsError):
    """Exception raised when a command-line input cannot be read or parsed"""
    pass


_VERDICT_EXIT = {
    Verdict.CONNECTED: ExitCode.OK,
    Verdict.NON_CONNECTABLE: ExitCode.NON_CONNECTABLE,
    Verdict.UNRESOLVED: ExitCode.UNRESOLVED,
}


def _read_text(source: str) -> str:
    """A path, "-" for stdin, or inline JSON"""
    if source == "-":
        return sys.stdin.read()
    if source.lstrip().startswith("{"):
        return source
    try:
        return Path(source).read_text()
    except OSError as e:
        raise MalformedInputError(f"Cannot read {source}: {e}")


def _load(source: str, model: type) -> BaseModel:
    try:
        return model.model_validate_json(_read_text(source))
    except ValidationError as e:
        raise MalformedInputError(f"{source}: {e.error_count()} validation error(s): {e.errors()[0]['msg']}")


def load_pairset(source: str, pure: bool = True) -> PairSet:
    A = _load(source, PairSetModel).to_pairset()
    if pure and not A.is_pure:
        raise MalformedInputError("Command-line pair-sets may not contain degenerate pairs")
    return A


def _emit(args: argparse.Namespace, model: BaseModel, text: Optional[str] = None) -> None:
    if args.format == "text" and text is not None:
        print(text)
    else:
        print(model.model_dump_json())


def _config(args: argparse.Namespace) -> Settings:
    update = {
        "seed": args.seed,
        "retries": args.retries,
        "fallback_budget": args.fallback_budget,
        "threads": args.threads,
    }
    return settings.model_copy(update={k: v for k, v in update.items() if v is not None})


def _paths_text(paths: Sequence[Sequence[str]]) -> str:
    return "\n".join(" ".join(path) for path in paths)


def cmd_solve(args: argparse.Namespace) -> int:
    A = load_pairset(args.input, pure=not args.balanced)
    report = solve(A, _config(args), balanced=args.balanced)
    if args.dump_trace:
        if report.trace is None:
            logger.warning("No completion was used at the top level; no trace written")
        else:
            Path(args.dump_trace).write_text(TraceModel.from_trace(report.trace).model_dump_json(indent=2))
    model = SolveReportModel.from_report(report)
    text = report.verdict.value
    if report.reason:
        text += f" ({report.reason.value})"
    if model.connector:
        text += "\n" + _paths_text(model.connector.paths)
    _emit(args, model, text)
    return _VERDICT_EXIT[report.verdict]


def cmd_verify(args: argparse.Namespace) -> int:
    A = load_pairset(args.pairset, pure=False)
    C = _load(args.connector, ConnectorModel).to_connector()
    violation = check(A, C)
    model = VerifyResultModel(
        ok=violation is None,
        violation=ViolationModel.from_violation(violation) if violation else None,
    )
    _emit(args, model, "ok" if violation is None else f"rejected: {violation}")
    return ExitCode.OK if violation is None else ExitCode.REJECTED


def cmd_classify(args: argparse.Namespace) -> int:
    model = ClassifyModel.from_profile(profile(load_pairset(args.input, pure=False)))
    lines = [
        f"n={model.n} |A|={model.size} norm={model.norm} odd={model.odd} balanced={model.balanced}",
        f"diminishable={model.diminishable} {model.diminishable_reason}".rstrip(),
        f"separating={model.separating} bad={model.bad}",
        f"enc={model.enc}",
    ]
    _emit(args, model, "\n".join(lines))
    return ExitCode.OK


def cmd_gray(args: argparse.Namespace) -> int:
    try:
        alpha = Vertex.parse(args.alpha, args.n)
        beta = Vertex.parse(args.beta, args.n)
    except CubePathsError as e:
        raise MalformedInputError(str(e))
    C = gray_path(args.n, alpha, beta, _config(args))
    violation = check_gray(args.n, C.paths[0], start=alpha, end=beta)
    if violation is not None:
        logger.error(f"Gray path rejected: {violation}")
        return ExitCode.UNRESOLVED
    model = ConnectorModel.from_connector(C)
    _emit(args, model, _paths_text(model.paths))
    return ExitCode.OK


def cmd_census(args: argparse.Namespace) -> int:
    cfg = _config(args)
    if args.sample:
        entries = sample_diminishable(args.n, args.sample, cfg.seed)
        summary = summarize(args.n, "sampled-diminishable", entries)
        _emit(args, CensusSummaryModel.from_summary(summary))
        return ExitCode.OK if summary.non_connectable_classes == 0 else ExitCode.UNRESOLVED

    sink = MemorySink()
    entries = enumerate_classes(args.n, args.predicate, threads=cfg.threads, sink=sink)
    summary = CensusSummaryModel.from_summary(summarize(args.n, args.predicate, entries))
    if args.format == "text":
        print(
            f"{summary.predicate}: {summary.classes} classes ({summary.raw} pair-sets), "
            f"{summary.non_connectable_classes} non-connectable ({summary.non_connectable_raw})"
        )
        return ExitCode.OK
    for record in sink.records():
        print(CensusRecordModel(**record).model_dump_json())
    print(summary.model_dump_json())
    return ExitCode.OK


def bench_row(n: int, samples: int, size: int, cfg: Settings) -> BenchRowModel:
    """Solve and verify ``samples`` random odd pair-sets of Q_n"""
    rng = random.Random(cfg.seed + n)
    connected = verified = unresolved = 0
    times: List[float] = []
    for _ in range(samples):
        A = random_odd_pairset(n, size, rng)
        started = time.perf_counter()
        report = solve(A, cfg)
        times.append(time.perf_counter() - started)
        if report.connected:
            connected += 1
            verified += check(A, report.connector) is None
        elif report.verdict == Verdict.UNRESOLVED:
            unresolved += 1
    return BenchRowModel(
        n=n,
        samples=samples,
        connected=connected,
        verified=verified,
        unresolved=unresolved,
        median_seconds=statistics.median(times) if times else 0.0,
    )


def cmd_bench(args: argparse.Namespace) -> int:
    cfg = _config(args)
    worst = ExitCode.OK
    for n in range(args.n_min, args.n_max + 1):
        size = args.size if args.size else max(1, n - 1)
        if not 1 <= size <= 1 << (n - 1):
            raise MalformedInputError(f"Cannot place {size} disjoint pairs in Q_{n}")
        row = bench_row(n, args.samples, size, cfg)
        _emit(
            args, row,
            f"n={row.n} samples={row.samples} connected={row.connected} "
            f"verified={row.verified} unresolved={row.unresolved} median={row.median_seconds:.4f}s",
        )
        if row.unresolved:
            worst = ExitCode.UNRESOLVED
    return worst


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="Random seed (default: CUBEPATHS_SEED)")
    common.add_argument("--retries", type=int, default=None, help="Completion seeds per coordinate")
    common.add_argument("--fallback-budget", type=int, default=None, help="Node budget of the fallback search")
    common.add_argument("--threads", type=int, default=None, help="Worker threads")
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--verbose", "-v", action="count", default=0, help="-v for info, -vv for debug")

    ap = argparse.ArgumentParser(
        prog="cubepaths",
        description="Disjoint path covers of hypercubes with prescribed endpoints",
    )
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common], help="Connect a pair-set")
    p.add_argument("input", help="Pair-set JSON file, '-' for stdin, or inline JSON")
    p.add_argument("--balanced", action="store_true", help="Accept balanced input with even or degenerate pairs")
    p.add_argument("--dump-trace", metavar="PATH", help="Write the top-level completion trace as JSON")
    p.set_defaults(handler=cmd_solve)

    p = sub.add_parser("verify", parents=[common], help="Check a connector against a pair-set")
    p.add_argument("pairset")
    p.add_argument("connector")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("classify", parents=[common], help="Report the structure of a pair-set")
    p.add_argument("input")
    p.set_defaults(handler=cmd_classify)

    p = sub.add_parser("gray", parents=[common], help="Hamiltonian path between two vertices")
    p.add_argument("n", type=int)
    p.add_argument("alpha")
    p.add_argument("beta")
    p.set_defaults(handler=cmd_gray)

    p = sub.add_parser("census", parents=[common], help="Decide every isomorphism class of a slice")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--predicate", choices=sorted(SLICES), default=None)
    p.add_argument("--sample", type=int, default=0, help="Decide this many random diminishable pair-sets instead")
    p.set_defaults(handler=cmd_census)

    p = sub.add_parser("bench", parents=[common], help="Solve random odd pair-sets over a range of n")
    p.add_argument("--n-min", type=int, default=5)
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--size", type=int, default=None, help="Pairs per instance (default: n-1)")
    p.set_defaults(handler=cmd_bench)
    return ap


def _level(verbose: int) -> Optional[str]:
    if verbose >= 2:
        return "DEBUG"
    if verbose == 1:
        return "INFO"
    return None


_ERROR_EXIT: Dict[type, ExitCode] = {
    DimensionTooLargeError: ExitCode.UNSUPPORTED,
    MalformedInputError: ExitCode.MALFORMED,
    InvalidInputError: ExitCode.MALFORMED,
    EvenDistanceError: ExitCode.MALFORMED,
    SamplingExhaustedError: ExitCode.UNSUPPORTED,
    UnresolvedError: ExitCode.UNRESOLVED,
}


def _exit_for(error: CubePathsError) -> ExitCode:
    for kind, code in _ERROR_EXIT.items():
        if isinstance(error, kind):
            return code
    return ExitCode.MALFORMED


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(_level(args.verbose))
    handler: Callable[[argparse.Namespace], int] = args.handler
    if args.command == "census" and not args.sample and args.predicate is None:
        logger.error("census needs --predicate or --sample")
        return ExitCode.MALFORMED
    try:
        return int(handler(args))
    except CubePathsError as e:
        logger.error(f"{args.command}: {e}")
        return int(_exit_for(e))
    except KeyError as e:
        logger.error(f"{args.command}: {e}")
        return int(ExitCode.UNSUPPORTED)


if __name__ == "__main__":
    sys.exit(main())
