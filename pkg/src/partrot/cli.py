"""Command-line front end: ``partrot compile|analyze|verify|bench``."""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from .circuit import circuit_to_matrix, metrics
from .compiler import METHODS, CompileOptions, minimal_steps, run_compile
from .mcts import SynthCache, SynthConfig
from .models import GridSpec, HamiltonianFormatError, ModelParams, build_model, load_hamiltonian
from .numerics import DENSE_LIMIT, phase_aligned_distance
from .partition import Partition, greedy_partition
from .pauli import Hamiltonian
from .qasm import QasmParseError, emit_qasm, parse_qasm
from .schedule import TrotterConfig, build_conflict_graph, estimate_error, exact_evolution, greedy_commuting_groups


class CliError(Exception):
    pass


def _add_source(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("Hamiltonian source")
    g.add_argument("--hamiltonian", type=Path, help="JSON file with num_qubits and terms")
    g.add_argument("--model", choices=("ising", "heisenberg", "fh"))
    g.add_argument("--rows", type=int, default=1)
    g.add_argument("--cols", type=int, default=2)
    g.add_argument("--topology", choices=("line", "square", "triangular"), default="line")
    g.add_argument("--J", type=float, default=1.0, help="spin coupling")
    g.add_argument("--h", dest="field", type=float, default=1.0, help="transverse field (Ising)")
    g.add_argument("--t-hop", type=float, default=1.0, help="hopping amplitude (Fermi-Hubbard)")
    g.add_argument("--U", type=float, default=2.0, help="onsite interaction (Fermi-Hubbard)")


def _add_trotter(p: argparse.ArgumentParser) -> None:
    p.add_argument("--time", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=None, help="Trotter steps (default 1, or searched with --target-error)")
    p.add_argument("--order", type=int, choices=(1, 2), default=1)
    p.add_argument("--group-size", type=int, default=3, help="maximum partition support n_max")
    p.add_argument("--seed", type=int, default=0)


def load_source(args: argparse.Namespace) -> Hamiltonian:
    if args.hamiltonian is not None and args.model is not None:
        raise CliError("give either --hamiltonian or --model, not both")
    if args.hamiltonian is not None:
        try:
            return load_hamiltonian(args.hamiltonian)
        except OSError as exc:
            raise CliError(f"cannot read {args.hamiltonian}: {exc.strerror}") from None
    if args.model is None:
        raise CliError("a Hamiltonian source is required (--hamiltonian or --model)")
    g = GridSpec(args.rows, args.cols, args.topology)
    return build_model(args.model, g, ModelParams(J=args.J, h=args.field, t_hop=args.t_hop, U=args.U))


def _options(args: argparse.Namespace, steps: int) -> CompileOptions:
    return CompileOptions(
        method=args.method,
        time=args.time,
        steps=steps,
        order=args.order,
        n_max=args.group_size,
        seed=args.seed,
        deterministic=args.deterministic,
        synth=SynthConfig(iterations=args.mcts_iterations),
    )


def cmd_compile(args: argparse.Namespace) -> int:
    h = load_source(args)
    cache = SynthCache(args.cache) if args.cache else SynthCache()
    steps = args.steps or 1
    opts = _options(args, steps)
    if args.target_error is not None and args.steps is None:
        if h.n > DENSE_LIMIT:
            raise CliError("--target-error needs a Hamiltonian within the dense limit")
        opts = replace(opts, steps=minimal_steps(h, opts, args.target_error))
    while True:
        res, report = run_compile(h, opts, cache)
        spec = report["spectral_error"]
        if args.target_error is None or args.steps is not None or spec is None or spec <= args.target_error:
            break
        # synthesis fallbacks can push the circuit above the plan error
        opts = replace(opts, steps=opts.steps + 1)
    if args.target_error is not None:
        report["target_error"] = args.target_error
    cache.save()
    qasm = emit_qasm(res.circuit)
    if args.out:
        Path(args.out).write_text(qasm)
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.report:
        Path(args.report).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _parse_partitions(spec: str, h: Hamiltonian) -> list[Partition]:
    parts = []
    seen: set[int] = set()
    for chunk in spec.split(";"):
        try:
            idx = tuple(int(x) for x in chunk.split(",") if x.strip())
        except ValueError:
            raise CliError(f"bad partition list {spec!r}") from None
        for i in idx:
            if not 0 <= i < len(h.terms) or i in seen:
                raise CliError(f"term index {i} is out of range or repeated")
            seen.add(i)
        sup = frozenset().union(*(h.terms[i].support for i in idx)) if idx else frozenset()
        parts.append(Partition(idx, sup))
    if len(seen) != len(h.terms):
        raise CliError("explicit partitions must cover every term")
    return parts


def analyze(h: Hamiltonian, n_max: int, cfg: TrotterConfig, parts: Optional[list[Partition]] = None, dense: bool = False) -> dict:
    if parts is None:
        parts = greedy_partition(h, n_max)
    graph = build_conflict_graph(parts, h)
    groups = greedy_commuting_groups(graph)
    bounds = estimate_error(h, parts, cfg, dense=dense)
    return {
        "num_qubits": h.n,
        "num_terms": len(h.terms),
        "partitions": [
            {"terms": [h.terms[i].paulis for i in p.term_indices], "term_indices": list(p.term_indices), "support": sorted(p.support)}
            for p in parts
        ],
        "conflict_graph": {"vertices": len(graph.vertices), "edges": sorted(list(e) for e in graph.edges)},
        "groups": [list(g) for g in groups],
        "group_sizes": [len(g) for g in groups],
        "bounds": bounds.as_dict(),
    }


def cmd_analyze(args: argparse.Namespace) -> int:
    h = load_source(args)
    cfg = TrotterConfig(args.time, args.steps or 1, args.order, args.seed, args.group_size)
    parts = _parse_partitions(args.partitions, h) if args.partitions else None
    out = analyze(h, args.group_size, cfg, parts, dense=args.dense)
    sys.stdout.write(json.dumps(out, indent=2) + "\n")
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    h = load_source(args)
    try:
        parsed = parse_qasm(Path(args.qasm).read_text())
    except OSError as exc:
        raise CliError(f"cannot read {args.qasm}: {exc.strerror}") from None
    c = parsed.circuit
    if c.n != h.n:
        raise CliError(f"circuit has {c.n} qubits but the Hamiltonian has {h.n}")
    if h.n > DENSE_LIMIT:
        raise CliError(f"{h.n} qubits exceeds the dense limit of {DENSE_LIMIT}")
    m = metrics(c)
    spec, frob = phase_aligned_distance(circuit_to_matrix(c), exact_evolution(h, args.time))
    counts_ok = parsed.declared is None or parsed.declared == m.as_dict()
    out = {"spectral_error": spec, "frobenius_error": frob, **m.as_dict(), "declared_counts_match": counts_ok}
    if args.target_error is not None:
        out["target_error"] = args.target_error
        out["within_target"] = spec <= args.target_error
    sys.stdout.write(json.dumps(out, indent=2) + "\n")
    if not counts_ok:
        print("error: declared counts disagree with the parsed circuit", file=sys.stderr)
        return 1
    if args.target_error is not None and spec > args.target_error:
        return 1
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    from . import bench

    cache = SynthCache(args.cache) if args.cache else SynthCache()
    rows = bench.run_suite(
        args.suite,
        seeds=args.seeds,
        seed=args.seed,
        target_error=args.target_error if args.target_error is not None else 0.07,
        cache=cache,
        deterministic=args.deterministic,
        iterations=args.mcts_iterations,
    )
    cache.save()
    text = bench.to_csv(rows) if args.format == "csv" else json.dumps(rows, indent=2) + "\n"
    if args.report:
        Path(args.report).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="partrot", description="Partial-Trotterization compiler for Pauli-sum Hamiltonians.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compile", help="compile exp(i t H) to u3/cx QASM")
    _add_source(c)
    _add_trotter(c)
    c.add_argument("--method", choices=METHODS, default="kernpiler")
    c.add_argument("--target-error", type=float, default=None, help="pick the smallest N meeting this spectral error")
    c.add_argument("--deterministic", action="store_true", help="sequential, byte-reproducible output")
    c.add_argument("--cache", type=Path, default=None, help="synthesis cache file")
    c.add_argument("--out", type=Path, default=None, help="QASM output path")
    c.add_argument("--report", type=Path, default=None, help="JSON report path (default stdout)")
    c.add_argument("--mcts-iterations", type=int, default=SynthConfig.iterations)
    c.set_defaults(func=cmd_compile)

    a = sub.add_parser("analyze", help="partitions, groups and commutator bounds")
    _add_source(a)
    _add_trotter(a)
    a.add_argument("--partitions", default=None, help="explicit term groups, e.g. '0,1;2,3'")
    a.add_argument("--dense", action="store_true", help="dense commutator norms for partition pairs")
    a.set_defaults(func=cmd_analyze)

    v = sub.add_parser("verify", help="distance of a QASM circuit to exp(i t H)")
    v.add_argument("qasm", type=Path)
    _add_source(v)
    v.add_argument("--time", type=float, default=1.0)
    v.add_argument("--target-error", type=float, default=None)
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", help="benchmark suites")
    b.add_argument("--suite", choices=("scaling", "target", "large", "all"), default="scaling")
    b.add_argument("--seeds", type=int, default=5)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--target-error", type=float, default=None)
    b.add_argument("--deterministic", action="store_true")
    b.add_argument("--cache", type=Path, default=None)
    b.add_argument("--report", type=Path, default=None)
    b.add_argument("--format", choices=("json", "csv"), default="json")
    b.add_argument("--mcts-iterations", type=int, default=SynthConfig.iterations)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, HamiltonianFormatError, QasmParseError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
