"""Command-line entry point for the modal workbench.

Usage: python -m src.cli COMMAND [flags]

Every command writes exactly one JSON document to stdout (or a short
human-readable text with --pretty); logging goes to stderr.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

from src import config
from src.decision import countermodel, enumerate_frames
from src.errors import NonTransitive, WorkbenchError
from src.export_utils import (
    filtration_to_markdown,
    format_frame_summary,
    format_outcome_summary,
    format_suite_summary,
    frame_to_dot,
    frames_to_csv,
    suite_to_markdown,
)
from src.filtration import FiltrationVariant, run_filtration
from src.formula import boxplus_translate, parse_with_names, to_text
from src.frame import KripkeFrame, LogicId, depth, e_skeleton, product
from src.io_utils import (
    counterexample_to_dict,
    dump_json,
    frame_to_dict,
    load_counterexample,
    load_frame,
    load_model,
    read_formula_arg,
)
from src.pdf_utils import report_to_pdf
from src.semantics import Refutation, frame_validates, satisfies, truth_vector
from src.suites import SUITES, verify_theorem_suite

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_DOMAIN_ERROR = 2
EXIT_USAGE = 64

CommandResult = Tuple[Dict[str, Any], str, int]


class UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


# -------------------------------
# Helpers
# -------------------------------


def _formula(args: argparse.Namespace):
    return parse_with_names(read_formula_arg(args.formula))


def _write_text(path: Optional[str], text: str) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
        logger.info("[cli] Wrote %s", path)


def _write_pdf(path: Optional[str], markdown_text: str, title: str) -> None:
    if path:
        Path(path).write_bytes(report_to_pdf(markdown_text, title=title))
        logger.info("[cli] Wrote %s", path)


def _safe_depth(frame) -> Optional[int]:
    try:
        return depth(frame)
    except NonTransitive:
        return None


# -------------------------------
# Commands
# -------------------------------


def cmd_validate(args: argparse.Namespace) -> CommandResult:
    """Check a formula on a frame, a model or a saved counterexample."""
    phi = _formula(args)
    if args.counterexample:
        model, world = load_counterexample(args.counterexample)
        holds = satisfies(model, world, phi)
        payload = {"command": "validate", "formula": to_text(phi), "world": world, "refuted_at_world": not holds}
        text = f"{to_text(phi)}: {'holds' if holds else 'refuted'} at {world}"
        return payload, text, EXIT_OK if holds else EXIT_FAILED
    if args.model:
        model = load_model(args.model)
        frame = model.frame
        false_at = frame.names(~truth_vector(model, phi))
        refutation = None
        if false_at:
            valuation = {name: tuple(w for w in frame.worlds if w in ws) for name, ws in model.valuation.items()}
            refutation = Refutation(valuation, false_at[0])
        checked = 1
    else:
        frame = load_frame(args.frame)
        result = frame_validates(frame, phi, budget=args.budget)
        refutation, checked = result.refutation, result.valuations_checked

    if refutation is not None and args.dot:
        _write_text(args.dot, frame_to_dot(frame, valuation=refutation.valuation, highlight=refutation.world))
    elif args.dot:
        _write_text(args.dot, frame_to_dot(frame))

    payload = {
        "command": "validate",
        "formula": to_text(phi),
        "valid": refutation is None,
        "valuations_checked": checked,
        "counterexample": None if refutation is None else counterexample_to_dict(frame, refutation),
    }
    if refutation is None:
        text = f"{to_text(phi)}: valid"
    else:
        text = f"{to_text(phi)}: refuted at {refutation.world} with {dict(refutation.valuation)}"
    return payload, text, EXIT_OK if refutation is None else EXIT_FAILED


def cmd_countermodel(args: argparse.Namespace) -> CommandResult:
    """Search small frames of a class for a refutation."""
    phi = _formula(args)
    outcome = countermodel(phi, args.logic, args.max_size, budget=args.budget)
    if args.dot and outcome.witness_frame is not None:
        ref = outcome.refutation
        _write_text(args.dot, frame_to_dot(outcome.witness_frame, valuation=ref.valuation, highlight=ref.world))
    payload = {"command": "countermodel", **outcome.to_dict()}
    if args.save and payload["witness"] is not None:
        _write_text(args.save, dump_json(payload["witness"]))
    return payload, format_outcome_summary(payload), EXIT_FAILED if outcome.refuted else EXIT_OK


def cmd_filtrate(args: argparse.Namespace) -> CommandResult:
    """Run the selective filtration on a model file and write its reports."""
    model = load_model(args.model)
    phi = _formula(args)
    report = run_filtration(model, phi, FiltrationVariant(args.variant), budget=args.budget)
    payload = {"command": "filtrate", **report.to_dict()}
    markdown = filtration_to_markdown(payload)
    if args.dot:
        _write_text(args.dot, frame_to_dot(report.frame, valuation=report.valuation))
    _write_text(args.markdown, markdown)
    _write_pdf(args.pdf, markdown, title=f"Filtration ({report.variant.value})")
    passed = report.checks is not None and report.checks.passed
    text = f"{report.variant.value}: {report.frame.size} points, depth {report.depth}, checks {'passed' if passed else 'FAILED'}"
    return payload, text, EXIT_OK if passed else EXIT_FAILED


def cmd_translate(args: argparse.Namespace) -> CommandResult:
    """Print the reflexive-box translation."""
    phi = _formula(args)
    translation = to_text(boxplus_translate(phi))
    return {"command": "translate", "formula": to_text(phi), "translation": translation}, translation, EXIT_OK


def cmd_product(args: argparse.Namespace) -> CommandResult:
    """Product of a frame file with an S5 cluster."""
    left = load_frame(args.frame)
    if args.s5:
        right = load_frame(args.s5)
    elif args.cluster_size:
        right = KripkeFrame.cluster(args.cluster_size)
    else:
        raise UsageError("product needs --s5 FILE or --cluster-size N")
    frame = product(left, right)
    if args.dot:
        _write_text(args.dot, frame_to_dot(frame))
    data = frame_to_dict(frame)
    payload = {"command": "product", "frame": data, "depth": _safe_depth(frame)}
    return payload, format_frame_summary(data), EXIT_OK


def cmd_enumerate(args: argparse.Namespace) -> CommandResult:
    """Count (and optionally list) the frames of a class per size."""
    logic = LogicId.coerce(args.logic)
    counts: Dict[str, int] = {}
    listed: List[Dict[str, Any]] = []
    for size in range(1, args.max_size + 1):
        frames = list(enumerate_frames(size, logic, modulo_iso=args.iso, budget=args.budget))
        counts[str(size)] = len(frames)
        logger.info("[enumerate] %s size %d: %d frames", logic, size, len(frames))
        if args.list or args.csv:
            listed.extend(dict(frame_to_dict(f), depth=_safe_depth(f)) for f in frames)
    if args.csv:
        _write_text(args.csv, frames_to_csv(listed))
    payload: Dict[str, Any] = {"command": "enumerate", "logic": str(logic), "modulo_iso": args.iso, "counts": counts}
    if args.list:
        payload["frames"] = listed
    text = f"{logic}{' up to isomorphism' if args.iso else ''}: " + ", ".join(f"size {s}: {c}" for s, c in counts.items())
    return payload, text, EXIT_OK


def cmd_skeleton(args: argparse.Namespace) -> CommandResult:
    """E-skeleton of a frame file."""
    frame = load_frame(args.frame)
    skeleton = e_skeleton(frame)
    quotient = skeleton.as_frame()
    if args.dot:
        _write_text(args.dot, frame_to_dot(quotient, name="skeleton"))
    payload = {"command": "skeleton", **skeleton.to_dict(), "depth": _safe_depth(quotient)}
    text = f"{len(skeleton.classes)} E-classes, well-defined: {skeleton.well_defined}"
    return payload, text, EXIT_OK


def cmd_verify_theorems(args: argparse.Namespace) -> CommandResult:
    """Run one named theorem suite."""
    report = verify_theorem_suite(args.suite, args.cap)
    payload = {"command": "verify-theorems", **report.to_dict()}
    markdown = suite_to_markdown(payload)
    _write_text(args.markdown, markdown)
    _write_pdf(args.pdf, markdown, title=f"Suite {report.name}")
    return payload, format_suite_summary(payload), EXIT_OK if report.passed else EXIT_FAILED


COMMANDS: Dict[str, Callable[[argparse.Namespace], CommandResult]] = {
    "validate": cmd_validate,
    "countermodel": cmd_countermodel,
    "filtrate": cmd_filtrate,
    "translate": cmd_translate,
    "product": cmd_product,
    "enumerate": cmd_enumerate,
    "skeleton": cmd_skeleton,
    "verify-theorems": cmd_verify_theorems,
}


# -------------------------------
# Parser
# -------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="modal-workbench", description="Bimodal <>/E logic workbench")
    parser.add_argument("--pretty", action="store_true", help="human-readable output instead of JSON")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--pretty", action="store_true", default=argparse.SUPPRESS)
        return p

    p = command("validate", "check a formula on a frame (all valuations) or a model")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--frame")
    source.add_argument("--model")
    source.add_argument("--counterexample", help="re-check a witness written by countermodel")
    p.add_argument("--formula", required=True, help="formula text or @FILE")
    p.add_argument("--budget", type=int, help="maximum number of valuations")
    p.add_argument("--dot")

    p = command("countermodel", "search small frames of a class for a refutation")
    p.add_argument("--formula", required=True)
    p.add_argument("--logic", required=True, help="e.g. MGrzB, MGLB[2], M+GrzB")
    p.add_argument("--max-size", type=int, default=3)
    p.add_argument("--budget", type=int, help="maximum (R, E) candidates per size")
    p.add_argument("--dot")
    p.add_argument("--save", help="write the witness as a counterexample file")

    p = command("filtrate", "run the selective filtration on a refuting model")
    p.add_argument("--model", required=True)
    p.add_argument("--formula", required=True)
    p.add_argument("--variant", choices=[v.value for v in FiltrationVariant], default="MGrzB")
    p.add_argument("--budget", type=int, help="maximum number of engine steps")
    p.add_argument("--dot")
    p.add_argument("--markdown")
    p.add_argument("--pdf")

    p = command("translate", "print the reflexive-box translation")
    p.add_argument("--formula", required=True)

    p = command("product", "product of a Kripke frame with an S5 frame")
    p.add_argument("--frame", required=True)
    p.add_argument("--s5")
    p.add_argument("--cluster-size", type=int)
    p.add_argument("--dot")

    p = command("enumerate", "enumerate the frames of a class")
    p.add_argument("--logic", required=True)
    p.add_argument("--max-size", type=int, default=3)
    p.add_argument("--iso", action="store_true", help="one frame per isomorphism class")
    p.add_argument("--budget", type=int)
    p.add_argument("--list", action="store_true", help="include the frames in the JSON output")
    p.add_argument("--csv")

    p = command("skeleton", "quotient a frame by E")
    p.add_argument("--frame", required=True)
    p.add_argument("--dot")

    p = command("verify-theorems", "run a theorem suite over all small frames")
    p.add_argument("--suite", required=True, choices=sorted(SUITES))
    p.add_argument("--cap", type=int, default=3)
    p.add_argument("--markdown")
    p.add_argument("--pdf")

    return parser


def _configure_logging() -> None:
    logging.basicConfig(
        level=getattr(logging, config.LOG_LEVEL, logging.WARNING),
        stream=sys.stderr,
        format="%(levelname)s %(message)s",
    )


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        return int(e.code or 0)

    _configure_logging()

    try:
        config.validate_config()
        payload, text, code = COMMANDS[args.command](args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except WorkbenchError as e:
        logger.debug("[cli] %s failed: %s", args.command, e)
        print(dump_json({"error": e.to_dict()}))
        return EXIT_DOMAIN_ERROR

    print(text if args.pretty else dump_json(payload))
    return code


if __name__ == "__main__":
    sys.exit(main())
