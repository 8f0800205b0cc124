"""
Command-line front door for kackit.

Objects arrive as JSON (see kackit.serialization) through --file arguments or
stdin, and generators write JSON to stdout so that commands can be piped into
their verifiers. Exit codes: 0 verified, 1 falsified, 2 input error.
"""

import argparse
import asyncio
import json
import logging
import sys
from dataclasses import dataclass, field
from functools import partial
from typing import Any, Callable, Dict, List, Optional, Sequence, TextIO

import numpy as np
import scipy.linalg

from . import __version__
from .bases import (
    PPBasis,
    basis_summary,
    canonical_unitary_onb,
    dft_unitary_onb,
    matrix_unit_onb,
    pauli_basis,
    sylvester_weyl_basis,
)
from .batch import run_checks
from .commsq import CommutingSquareData, hadamard_square, popa_transfer, square_summary, tensor_square
from .constants import EXIT_FALSIFIED, EXIT_INPUT_ERROR, EXIT_OK
from .crossprod import ActionData, crossed_product, minimality_check
from .exceptions import InvalidInput, KacKitError
from .fdca import (
    AlgElem,
    MMAlgebra,
    TraceState,
    UnitalEmbedding,
    bratteli_dot,
    conditional_expectation,
    is_connected,
    markov_trace,
    parse_inclusion_matrix,
    scalar_embedding,
    standard_embedding,
    watatani_index,
)
from .metrics import MetricsMiddleware, create_metrics_system
from .presentation import StarAlgebraPresentation, wedderburn
from .serialization import encode_complex, from_json, to_json
from .tower import basic_construction, consistency_check, depth_from_tower, index_formula
from .utils import resolve_seed, resolve_tolerance
from .wha import (
    Groupoid,
    WHAStructure,
    check_all,
    cyclic_group,
    discrete_groupoid,
    dual_wha,
    groupoid_algebra,
    is_biconnected,
    klein_four_group,
    pair_groupoid,
    symmetric_group,
)

logger = logging.getLogger(__name__)


@dataclass
class Workspace:
    """
    Named objects available to {"ref": name} lookups, plus run settings.

    Raises:
        InvalidInput: On duplicate or unknown names.
    """

    tol: float
    seed: int
    metrics: Optional[MetricsMiddleware] = None
    registry: Dict[str, Any] = field(default_factory=dict)

    def register(self, name: str, obj: Any) -> None:
        if name in self.registry:
            raise InvalidInput(f"name {name!r} is already loaded", f"load.{name}")
        self.registry[name] = obj

    def resolve(self, name: str) -> Any:
        if name not in self.registry:
            raise InvalidInput(f"unknown reference {name!r}", "ref")
        return self.registry[name]

    def decode(self, data: Any, field_path: str = "") -> Any:
        return from_json(data, self.resolve, field_path)

    def load(self, name: str, path: str) -> None:
        self.register(name, self.decode(_read_json(path), name))

    def inputs(self, files: Optional[Sequence[str]], stdin: TextIO) -> List[Any]:
        """Decode every --file argument, or stdin when there are none."""
        if files:
            return [self.decode(_read_json(path), path) for path in files]
        text = stdin.read()
        if not text.strip():
            raise InvalidInput("no input on stdin and no --file given", "file")
        data = _parse_json(text, "stdin")
        items = data if isinstance(data, list) else [data]
        return [self.decode(item, f"stdin[{i}]" if isinstance(data, list) else "stdin") for i, item in enumerate(items)]


def _parse_json(text: str, source: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise InvalidInput(f"invalid JSON: {e}", source, e)


def _read_json(path: str) -> Any:
    try:
        with open(path, encoding="utf-8") as f:
            return _parse_json(f.read(), path)
    except OSError as e:
        raise InvalidInput(f"cannot read file: {e}", path, e)


def _parse_matrix(text: str) -> np.ndarray:
    return parse_inclusion_matrix(_parse_json(text, "matrix"), "matrix")


def _parse_dims(text: str) -> List[int]:
    dims = _parse_json(text, "source_dims")
    if not isinstance(dims, list) or not dims or not all(type(n) is int and n > 0 for n in dims):
        raise InvalidInput(f"expected a nonempty list of positive integers, got {text}", "source_dims")
    return dims


def _expect(obj: Any, types: tuple, what: str) -> Any:
    if not isinstance(obj, types):
        raise InvalidInput(f"expected {what}, got {type(obj).__name__}", "type")
    return obj


@dataclass(frozen=True)
class Verdict:
    passed: bool
    payload: Dict[str, Any]
    residual: Optional[float] = None

    def __bool__(self) -> bool:
        return self.passed


# Output


def _format(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    if isinstance(value, (list, tuple)):
        return "(" + ", ".join(_format(v) for v in value) + ")"
    return str(value)


def _emit(args: argparse.Namespace, payload: Any, out: TextIO, text: Optional[str] = None) -> None:
    if args.json or text is None:
        out.write(json.dumps(payload, default=_json_default) + "\n")
    elif not args.quiet:
        out.write(text + ("" if text.endswith("\n") else "\n"))


def _json_default(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return encode_complex(value) if np.iscomplexobj(value) else value.tolist()
    raise TypeError(f"not JSON serializable: {type(value).__name__}")


def _describe(name: str, verdict: Verdict) -> str:
    lines = [f"{name}: {'passed' if verdict else 'FAILED'}"]
    lines.extend(f"  {key}: {_format(value)}" for key, value in verdict.payload.items())
    return "\n".join(lines)


def _run_verifier(
    args: argparse.Namespace,
    ws: Workspace,
    out: TextIO,
    stdin: TextIO,
    name: str,
    check: Callable[[Any], Verdict],
) -> int:
    objects = ws.inputs(args.file, stdin)
    outcomes = run_checks([(f"{name}[{i}]", partial(check, obj)) for i, obj in enumerate(objects)], metrics=ws.metrics)
    for outcome in outcomes:
        if outcome.error is not None:
            raise outcome.error
    verdicts = [outcome.value for outcome in outcomes]
    if args.json:
        payloads = [dict(v.payload, passed=v.passed) for v in verdicts]
        _emit(args, payloads if len(payloads) > 1 else payloads[0], out)
    else:
        _emit(args, None, out, "\n".join(_describe(o.name if len(outcomes) > 1 else name, o.value) for o in outcomes))
    return EXIT_OK if all(verdicts) else EXIT_FALSIFIED


def _single(ws: Workspace, args: argparse.Namespace, stdin: TextIO) -> Any:
    objects = ws.inputs(args.file, stdin)
    if len(objects) != 1:
        raise InvalidInput(f"expected exactly one input object, got {len(objects)}", "file")
    return objects[0]


def _optional(ws: Workspace, path: Optional[str], types: tuple, what: str) -> Any:
    if path is None:
        return None
    return _expect(ws.decode(_read_json(path), path), types, what)


# Subcommands


def _algebra_info(args: argparse.Namespace, ws: Workspace, out: TextIO, stdin: TextIO) -> int:
    def check(obj: Any) -> Verdict:
        if isinstance(obj, WHAStructure):
            obj = obj.algebra
        obj = _expect(obj, (MMAlgebra, StarAlgebraPresentation), "an algebra or presentation")
        if isinstance(obj, MMAlgebra):
            payload = {
                "blocks": list(obj.block_dims),
                "dim": obj.dim,
                "commutative": obj.is_commutative,
                "simple": obj.is_simple,
            }
            return Verdict(True, payload)
        report = obj.check_axioms(ws.tol)
        payload = {"dim": obj.dim, "axioms": report.to_dict()["residuals"], "failures": report.failures}
        if report:
            payload["blocks"] = list(wedderburn(obj, ws.tol, ws.seed).algebra.block_dims)
        return Verdict(report.passed, payload, report.worst)

    return _run_verifier(args, ws, out, stdin, "algebra", check)


def _embed(args: argparse.Namespace, ws: Workspace, out: TextIO, stdin: TextIO) -> int:
    def check(obj: Any) -> Verdict:
        emb = _expect(obj, (UnitalEmbedding,), "an embedding")
        emb.check(ws.tol, ws.seed)
        matrix = emb.inclusion
        connected = is_connected(matrix)
        payload = {"inclusion_matrix": matrix.tolist(), "connected": connected}
        return Verdict(connected if args.action == "connected" else True, payload)

    return _run_verifier(args, ws, out, stdin, f"embed {args.action}", check)


def _markov(args: argparse.Namespace, ws: Workspace, out: TextIO, stdin: TextIO) -> int:
    if args.matrix is not None:
        matrix = _parse_matrix(args.matrix)
        dims = _parse_dims(args.source_dims) if args.source_dims else None
        result = markov_trace(matrix, dims, ws.tol)
    else:
        source = args.embedding or (args.file[0] if args.file else None)
        decoded = ws.decode(_read_json(source), source) if source else _single(ws, args, stdin)
        emb = _expect(decoded, (UnitalEmbedding,), "an embedding")
        result = markov_trace(emb, tol=ws.tol)
    payload = {
        "weights": result.weights.tolist(),
        "index": result.index,
        "source_weights": result.source_weights.tolist(),
        "residual": result.residual,
    }
    text = f"t = {_format(result.weights.tolist())}\n||Lambda||^2 = {_format(result.index)}"
    _emit(args, payload, out, text)
    return EXIT_OK


def _default_trace(emb: UnitalEmbedding) -> TraceState:
    if is_connected(emb.inclusion):
        return markov_trace(emb).as_trace(emb.target)
    return TraceState.canonical(emb.target)


def _expectation(args: argparse.Namespace, ws: Workspace, out: TextIO, stdin: TextIO) -> int:
    emb = _expect(_single(ws, args, stdin), (UnitalEmbedding,), "an embedding")
    trace = _optional(ws, args.trace, (TraceState,), "a trace") or TraceState.canonical(emb.target)
    expectation = conditional_expectation(emb, trace, ws.tol)
    payload: Dict[str, Any] = {"matrix": encode_complex(expectation.matrix)}
    text = f"E: {emb.target} -> {emb.source}, trace weights {_format(list(trace.weights))}"
    element = _optional(ws, args.element, (AlgElem,), "an element")
    if element is not None:
        image = expectation(element)
        payload["image"] = to_json(image)
        text += "\n" + "\n".join(f"  block {b}: {np.round(block, 12).tolist()}" for b, block in enumerate(image.blocks))
    _emit(args, payload, out, text)
    return EXIT_OK


def _basic_construction(args: argparse.Namespace, ws: Workspace, out: TextIO, stdin: TextIO) -> int:
    def check(obj: Any) -> Verdict:
        emb = _expect(obj, (UnitalEmbedding,), "an embedding")
        trace = _optional(ws, args.trace, (TraceState,), "a trace") or _default_trace(emb)
        bc = basic_construction(emb, trace, ws.tol, ws.seed)
        residual = bc.jones_residual(ws.tol)
        payload = {
            "blocks": list(bc.algebra.block_dims),
            "tau": bc.tau,
            "is_markov": bc.is_markov,
            "trace_weights": list(bc.trace.weights),
            "jones_residual": residual,
        }
        return Verdict(residual <= ws.tol, payload, residual)

    return _run_verifier(args, ws, out, stdin, "basic-construction", check)


def _watatani(args: argparse.Namespace, ws: Workspace, out: TextIO, stdin: TextIO) -> int:
    def check(obj: Any) -> Verdict:
        if isinstance(obj, MMAlgebra):
            obj = TraceState.canonical(obj)
        trace = _expect(obj, (TraceState,), "a trace or algebra")
        index = watatani_index(trace, ws.tol, ws.seed)
        payload = {
            "values": index.values.tolist(),
            "scalar": index.scalar,
            "discrepancy": index.discrepancy,
        }
        return Verdict(index.discrepancy <= ws.tol, payload, index.discrepancy)

    return _run_verifier(args, ws, out, stdin, "watatani", check)


def _depth(args: argparse.Namespace, ws: Workspace, out: TextIO, stdin: TextIO) -> int:
    matrices = _parse_json(args.matrices, "matrices")
    result = depth_from_tower(matrices, args.index, ws.tol)
    _emit(args, {"depth": result.depth, "reason": result.reason}, out, f"depth = {result}\n  {result.reason}")
    return EXIT_OK if result.determined else EXIT_FALSIFIED


def _index_formula(args: argparse.Namespace, ws: Workspace, out: TextIO, stdin: TextIO) -> int:
    index = index_formula(args.weyl_order, args.relcom_dim)
    report = consistency_check(index if args.index is None else args.index, args.relcom_dim)
    matches = args.index is None or args.index == index
    payload = dict(report.to_dict(), formula_index=index, matches=matches)
    lines = [f"[M:N] = |G| dim(N' cap M) = {index}"]
    if not matches:
        lines.append(f"  given index {args.index} differs from the formula")
    lines.extend(f"  {finding}" for finding in report.findings)
    _emit(args, payload, out, "\n".join(lines))
    return EXIT_OK if report and matches else EXIT_FALSIFIED


def _basis_generate(args: argparse.Namespace, ws: Workspace, out: TextIO, stdin: TextIO) -> int:
    kind = args.kind
    if kind == "dft":
        basis = dft_unitary_onb(args.n)
    elif kind == "pauli":
        basis = pauli_basis()
    elif kind == "weyl":
        basis = sylvester_weyl_basis(args.n)
    else:
        algebra = MMAlgebra(tuple(args.blocks or [args.n]))
        if kind == "matrix-units":
            basis = matrix_unit_onb(algebra, TraceState.canonical(algebra))
        else:
            basis = canonical_unitary_onb(algebra)
    _emit(args, to_json(basis), out)
    return EXIT_OK


def _basis_verify(args: argparse.Namespace, ws: Workspace, out: TextIO, stdin: TextIO) -> int:
    def check(obj: Any) -> Verdict:
        summary = basis_summary(_expect(obj, (PPBasis,), "a basis"), ws.tol)
        passed = summary.pop("claims_hold")
        return Verdict(passed, summary, summary["reconstruction"]["residual"])

    return _run_verifier(args, ws, out, stdin, "basis", check)


def _square_check(args: argparse.Namespace, ws: Workspace, out: TextIO, stdin: TextIO) -> int:
    def check(obj: Any) -> Verdict:
        summary = square_summary(_expect(obj, (CommutingSquareData,), "a square"), ws.tol)
        return Verdict(summary["commuting"], summary, summary["commuting_residual"])

    return _run_verifier(args, ws, out, stdin, "square", check)


def _square_transfer(args: argparse.Namespace, ws: Workspace, out: TextIO, stdin: TextIO) -> int:
    square = _expect(_single(ws, args, stdin), (CommutingSquareData,), "a square")
    basis = _expect(ws.decode(_read_json(args.basis), args.basis), (PPBasis,), "a basis")
    result = popa_transfer(square, basis, ws.tol)
    _emit(args, to_json(result.basis), out)
    return EXIT_OK if result else EXIT_FALSIFIED


def _square_generate(args: argparse.Namespace, ws: Workspace, out: TextIO, stdin: TextIO) -> int:
    if args.kind == "tensor":
        inclusion = scalar_embedding(MMAlgebra.commutative(args.n))
        square = tensor_square(
            inclusion, MMAlgebra.full(args.factor), TraceState.canonical(inclusion.target), seed=args.conjugate_seed
        )
    else:
        square = hadamard_square(scipy.linalg.dft(args.n, scale="sqrtn"), seed=args.conjugate_seed)
    _emit(args, to_json(square), out)
    return EXIT_OK


def _wha_check(args: argparse.Namespace, ws: Workspace, out: TextIO, stdin: TextIO) -> int:
    def check(obj: Any) -> Verdict:
        report = check_all(_expect(obj, (WHAStructure,), "a weak Hopf structure"), ws.tol)
        worst = max(r.worst for r in (report.bialgebra, report.antipode, report.kac) if r is not None)
        return Verdict(bool(report), report.to_dict(), worst)

    return _run_verifier(args, ws, out, stdin, "wha", check)


def _wha_dual(args: argparse.Namespace, ws: Workspace, out: TextIO, stdin: TextIO) -> int:
    structure = _expect(_single(ws, args, stdin), (WHAStructure,), "a weak Hopf structure")
    _emit(args, to_json(dual_wha(structure)), out)
    return EXIT_OK


_GROUPOIDS: Dict[str, Callable[[int], Groupoid]] = {
    "cyclic": cyclic_group,
    "symmetric": symmetric_group,
    "pair": pair_groupoid,
    "discrete": discrete_groupoid,
    "klein": lambda n: klein_four_group(),
}


def _wha_groupoid(args: argparse.Namespace, ws: Workspace, out: TextIO, stdin: TextIO) -> int:
    if args.kind:
        groupoid = _GROUPOIDS[args.kind](args.n)
    else:
        groupoid = _expect(_single(ws, args, stdin), (Groupoid,), "a groupoid")
    _emit(args, to_json(groupoid_algebra(groupoid)), out)
    return EXIT_OK


def _wha_biconnected(args: argparse.Namespace, ws: Workspace, out: TextIO, stdin: TextIO) -> int:
    def check(obj: Any) -> Verdict:
        structure = _expect(obj, (WHAStructure,), "a weak Hopf structure")
        result = is_biconnected(structure, ws.tol, ws.seed)
        return Verdict(result, {"biconnected": result})

    return _run_verifier(args, ws, out, stdin, "biconnected", check)


def _crossed_build(args: argparse.Namespace, ws: Workspace, out: TextIO, stdin: TextIO) -> int:
    action = _expect(_single(ws, args, stdin), (ActionData,), "an action")
    cp = crossed_product(action, ws.tol)
    _emit(args, to_json(cp), out)
    return EXIT_OK if cp.residual <= ws.tol else EXIT_FALSIFIED


def _crossed_minimal(args: argparse.Namespace, ws: Workspace, out: TextIO, stdin: TextIO) -> int:
    def check(obj: Any) -> Verdict:
        cp = crossed_product(_expect(obj, (ActionData,), "an action"), ws.tol)
        report = minimality_check(cp, ws.tol)
        return Verdict(report.minimal, dict(report.to_dict(), dim=cp.dim))

    return _run_verifier(args, ws, out, stdin, "minimality", check)


def _bratteli(args: argparse.Namespace, ws: Workspace, out: TextIO, stdin: TextIO) -> int:
    if args.matrix is not None:
        matrix = _parse_matrix(args.matrix)
        dims = _parse_dims(args.source_dims) if args.source_dims else [1] * matrix.shape[1]
        emb = standard_embedding(MMAlgebra(tuple(dims)), matrix)
    else:
        emb = _expect(_single(ws, args, stdin), (UnitalEmbedding,), "an embedding")
    payload = {"inclusion_matrix": emb.inclusion.tolist(), "dot": bratteli_dot(emb)}
    if args.dot and not args.json:
        out.write(payload["dot"])
    else:
        _emit(args, payload, out, f"inclusion matrix {payload['inclusion_matrix']}")
    return EXIT_OK


# Parser


def _add_files(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--file", action="append", help="JSON input (repeatable); stdin when absent")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kackit", description="Finite-dimensional inclusions, Pimsner-Popa bases and weak Kac algebras."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--tol", type=float, default=None, help="numerical tolerance (default 1e-9 or $KACKIT_TOL)")
    parser.add_argument("--seed", type=int, default=None, help="seed for randomized routines (default 0)")
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("--quiet", action="store_true", help="errors only")
    verbosity.add_argument("--verbose", action="store_true", help="debug logging")
    parser.add_argument("--load", action="append", default=[], metavar="NAME=PATH", help="register a named object")
    parser.add_argument("--stats", action="store_true", help="print check metrics to stderr")
    commands = parser.add_subparsers(dest="command", required=True)

    algebra = commands.add_parser("algebra", help="describe an algebra or presentation")
    algebra.add_argument("action", choices=["info"])
    _add_files(algebra)
    algebra.set_defaults(handler=_algebra_info)

    embed = commands.add_parser("embed", help="inclusion matrix and connectivity of an embedding")
    embed.add_argument("action", choices=["matrix", "connected"])
    _add_files(embed)
    embed.set_defaults(handler=_embed)

    markov = commands.add_parser("markov", help="Markov trace of an inclusion")
    markov.add_argument("--embedding", help="embedding JSON file")
    markov.add_argument("--matrix", help="inclusion matrix as JSON, e.g. [[2],[1]]")
    markov.add_argument("--source-dims", help="block dimensions of the subalgebra as JSON")
    _add_files(markov)
    markov.set_defaults(handler=_markov)

    expectation = commands.add_parser("expectation", help="trace-preserving conditional expectation")
    expectation.add_argument("--trace", help="trace JSON file (canonical trace when absent)")
    expectation.add_argument("--element", help="element JSON file to project")
    _add_files(expectation)
    expectation.set_defaults(handler=_expectation)

    bc = commands.add_parser("basic-construction", help="basic construction B in A in A_1")
    bc.add_argument("--trace", help="trace JSON file (Markov trace when connected)")
    _add_files(bc)
    bc.set_defaults(handler=_basic_construction)

    watatani = commands.add_parser("watatani", help="Watatani index of a trace")
    _add_files(watatani)
    watatani.set_defaults(handler=_watatani)

    depth = commands.add_parser("depth", help="depth from a tower of inclusion matrices")
    depth.add_argument("--matrices", required=True, help="list of inclusion matrices as JSON")
    depth.add_argument("--index", type=float, required=True)
    depth.set_defaults(handler=_depth)

    formula = commands.add_parser("index-formula", help="[M:N] = |G| dim(N' cap M) with consistency checks")
    formula.add_argument("--weyl-order", type=int, required=True)
    formula.add_argument("--relcom-dim", type=int, required=True)
    formula.add_argument("--index", type=int, help="index to compare with the formula")
    formula.set_defaults(handler=_index_formula)

    basis = commands.add_parser("basis", help="generate or verify Pimsner-Popa bases")
    basis_commands = basis.add_subparsers(dest="basis_command", required=True)
    generate = basis_commands.add_parser("generate")
    generate.add_argument("--kind", choices=["dft", "pauli", "weyl", "matrix-units", "canonical"], required=True)
    generate.add_argument("--n", type=int, default=2)
    generate.add_argument("--blocks", type=int, nargs="*", help="block dimensions for matrix-units/canonical")
    generate.set_defaults(handler=_basis_generate)
    verify = basis_commands.add_parser("verify")
    _add_files(verify)
    verify.set_defaults(handler=_basis_verify)

    square = commands.add_parser("square", help="commuting squares")
    square_commands = square.add_subparsers(dest="square_command", required=True)
    check = square_commands.add_parser("check")
    _add_files(check)
    check.set_defaults(handler=_square_check)
    transfer = square_commands.add_parser("transfer")
    transfer.add_argument("--basis", required=True, help="right basis of K over N")
    _add_files(transfer)
    transfer.set_defaults(handler=_square_transfer)
    square_generate = square_commands.add_parser("generate")
    square_generate.add_argument("--kind", choices=["tensor", "hadamard"], required=True)
    square_generate.add_argument("--n", type=int, default=2)
    square_generate.add_argument("--factor", type=int, default=2, help="size of the matrix factor P")
    square_generate.add_argument("--conjugate-seed", type=int, help="conjugate by a random unitary")
    square_generate.set_defaults(handler=_square_generate)

    wha = commands.add_parser("wha", help="weak Hopf and weak Kac structures")
    wha_commands = wha.add_subparsers(dest="wha_command", required=True)
    for name, handler in (("check", _wha_check), ("dual", _wha_dual), ("biconnected", _wha_biconnected)):
        sub = wha_commands.add_parser(name)
        _add_files(sub)
        sub.set_defaults(handler=handler)
    groupoid = wha_commands.add_parser("groupoid")
    groupoid.add_argument("--kind", choices=sorted(_GROUPOIDS))
    groupoid.add_argument("--n", type=int, default=2)
    _add_files(groupoid)
    groupoid.set_defaults(handler=_wha_groupoid)

    crossed = commands.add_parser("crossed-product", help="crossed products by weak Hopf actions")
    crossed_commands = crossed.add_subparsers(dest="crossed_command", required=True)
    build = crossed_commands.add_parser("build")
    _add_files(build)
    build.set_defaults(handler=_crossed_build)
    minimal = crossed_commands.add_parser("check-minimal")
    _add_files(minimal)
    minimal.set_defaults(handler=_crossed_minimal)

    bratteli = commands.add_parser("bratteli", help="Bratteli diagram of an inclusion")
    bratteli.add_argument("--dot", action="store_true", help="Graphviz output")
    bratteli.add_argument("--matrix", help="inclusion matrix as JSON")
    bratteli.add_argument("--source-dims", help="block dimensions of the subalgebra as JSON")
    _add_files(bratteli)
    bratteli.set_defaults(handler=_bratteli)
    return parser


def _configure_logging(args: argparse.Namespace) -> None:
    level = logging.DEBUG if args.verbose else logging.ERROR if args.quiet else logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(
    argv: Optional[Sequence[str]] = None,
    stdin: Optional[TextIO] = None,
    stdout: Optional[TextIO] = None,
    stderr: Optional[TextIO] = None,
) -> int:
    """Run the CLI and return its exit code."""
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_INPUT_ERROR
    _configure_logging(args)

    try:
        ws = Workspace(
            resolve_tolerance(args.tol),
            resolve_seed(args.seed),
            create_metrics_system() if args.stats else None,
        )
        for entry in args.load:
            name, sep, path = entry.partition("=")
            if not sep or not name:
                raise InvalidInput(f"expected NAME=PATH, got {entry!r}", "load")
            ws.load(name, path)
        logger.info(f"running {args.command} at tolerance {ws.tol:g}, seed {ws.seed}")
        code = args.handler(args, ws, stdout, stdin)
    except KacKitError as e:
        stderr.write(f"error: {type(e).__name__}: {e}\n")
        return EXIT_INPUT_ERROR
    except (ValueError, TypeError) as e:
        # numpy.linalg.LinAlgError is a ValueError
        logger.debug(f"{args.command} failed on malformed input", exc_info=True)
        stderr.write(f"error: malformed input: {type(e).__name__}: {e}\n")
        return EXIT_INPUT_ERROR

    if ws.metrics is not None:
        stats = asyncio.run(ws.metrics.get_stats())
        stderr.write(json.dumps(stats, default=str) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
