"""End-to-end compilation of ``exp(i t H)`` into u3/CNOT circuits.

Methods:

* ``kernpiler``: partition, schedule (groups, merge, shuffle), then one
  synthesized circuit per block.
* ``naive1`` / ``naive2``: per-term CNOT ladders in Hamiltonian term order,
  first order or symmetric second order.

Every method ends with :func:`simplify` over the whole circuit.

Seeds: the shuffle stream uses ``seed`` directly.  The MCTS seed of a block
is the first 8 bytes of ``sha256(f"{seed}:{fingerprint}")``.
"""
from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .circuit import Circuit, circuit_to_matrix, ladder_circuit, metrics, simplify
from .mcts import SynthCache, SynthConfig, fingerprint, synthesize_cached
from .numerics import DENSE_LIMIT, phase_aligned_distance
from .partition import Partition, greedy_partition
from .pauli import Hamiltonian, commutes
from .schedule import (
    BlockExp,
    ConflictGraph,
    TrotterConfig,
    TrotterPlan,
    block_matrix,
    estimate_error,
    exact_evolution,
    make_plan,
    plan_unitary,
)

METHODS = ("kernpiler", "naive1", "naive2")
REPORT_SCHEMA = 1


@dataclass
class CompileOptions:
    method: str = "kernpiler"
    time: float = 1.0
    steps: int = 1
    order: int = 1
    n_max: int = 3
    seed: int = 0
    deterministic: bool = False
    merge: bool = True
    shuffle: bool = True
    alternate_edges: bool = True
    synth: SynthConfig = field(default_factory=SynthConfig)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.order not in (1, 2):
            raise ValueError(f"order must be 1 or 2, got {self.order!r}")
        if self.method == "naive1" and self.order != 1:
            raise ValueError("method naive1 is first order; use naive2 for order 2")
        if self.method == "naive2" and self.order != 2:
            raise ValueError("method naive2 is second order; use naive1 for order 1")

    def trotter(self) -> TrotterConfig:
        return TrotterConfig(self.time, self.steps, self.order, self.seed, self.n_max, self.alternate_edges)


@dataclass
class CompileResult:
    circuit: Circuit
    plan: TrotterPlan
    options: CompileOptions
    stats: dict = field(default_factory=dict)


def naive_plan(h: Hamiltonian, cfg: TrotterConfig) -> TrotterPlan:
    """One singleton partition per term, played in term order (mirrored for order 2)."""
    parts = tuple(Partition((i,), t.support) for i, t in enumerate(h.terms))
    idx = range(len(parts))
    blocks: list[BlockExp] = []
    for s in range(cfg.steps):
        if cfg.order == 1:
            blocks += [BlockExp(i, cfg.dt, i, s, 0) for i in idx]
        else:
            blocks += [BlockExp(i, cfg.dt / 2, i, s, 0) for i in idx]
            blocks += [BlockExp(i, cfg.dt / 2, i, s, 1) for i in reversed(idx)]
    graph = ConflictGraph(tuple(idx), frozenset())
    return TrotterPlan(tuple(blocks), tuple((i,) for i in idx), cfg, parts, graph)


def build_plan(h: Hamiltonian, opts: CompileOptions) -> TrotterPlan:
    cfg = opts.trotter()
    if opts.method != "kernpiler":
        return naive_plan(h, cfg)
    parts = greedy_partition(h, opts.n_max)
    return make_plan(h, parts, cfg, merge=opts.merge, shuffle=opts.shuffle)


def block_seed(seed: int, fp: str) -> int:
    return int.from_bytes(hashlib.sha256(f"{seed}:{fp}".encode()).digest()[:8], "little")


def _all_commute(terms) -> bool:
    return all(commutes(a, b) for i, a in enumerate(terms) for b in terms[i + 1 :])


def synthesize_block(
    h: Hamiltonian,
    part: Partition,
    dt: float,
    opts: CompileOptions,
    cache: Optional[SynthCache],
    stats: dict,
) -> Circuit:
    """Circuit for ``exp(i dt H_A)`` on the full register.

    Single terms and terms wider than ``n_max`` use the exact ladder.  For
    mutually commuting terms the exact ladder product is kept unless MCTS,
    with its CNOT budget capped below the ladder's count, finds a cheaper
    circuit.  Other blocks go through MCTS; a block that does not converge
    falls back to per-term ladders.
    """
    terms = part.terms(h)
    if len(part.support) > opts.n_max:
        stats["ladder_blocks"] = stats.get("ladder_blocks", 0) + 1
        return ladder_circuit(terms, dt, h.n)
    commuting = _all_commute(terms)
    cfg = opts.synth
    if commuting:
        ladder = simplify(ladder_circuit(terms, dt, h.n))
        # search only for strictly cheaper circuits than the exact ladder
        limit = min(cfg.budget(len(part.support)), ladder.cnot_count - 1)
        if len(terms) == 1 or limit < 1:
            stats["ladder_blocks"] = stats.get("ladder_blocks", 0) + 1
            return ladder
        cfg = replace(cfg, max_cnots=limit)
    target = block_matrix(h, part, dt)
    fp = fingerprint(target)
    cfg = replace(cfg, seed=block_seed(opts.seed, fp))
    hits_before = cache.hits if cache is not None else 0
    res = synthesize_cached(target, cfg, cache)
    if cache is not None and cache.hits > hits_before:
        stats["cache_hits"] = stats.get("cache_hits", 0) + 1
    else:
        stats["synthesized_blocks"] = stats.get("synthesized_blocks", 0) + 1
    if commuting and (not res.converged or res.cnot_count >= ladder.cnot_count):
        stats["ladder_blocks"] = stats.get("ladder_blocks", 0) + 1
        return ladder
    if not res.converged:
        stats["fallback_blocks"] = stats.get("fallback_blocks", 0) + 1
        return ladder_circuit(terms, dt, h.n)
    stats["mcts_blocks"] = stats.get("mcts_blocks", 0) + 1
    return res.circuit.remap(part.qubits, h.n)


def compile_plan(h: Hamiltonian, plan: TrotterPlan, opts: CompileOptions, cache: Optional[SynthCache] = None) -> CompileResult:
    stats: dict = {}
    gates: list = []
    phase = 0.0
    block_cache: dict[tuple[int, float], Circuit] = {}
    for b in plan.blocks:
        part = plan.partitions[b.partition]
        if opts.method != "kernpiler":
            c = ladder_circuit(part.terms(h), b.dt, h.n)
        else:
            key = (b.partition, b.dt)
            if key not in block_cache:
                block_cache[key] = synthesize_block(h, part, b.dt, opts, cache, stats)
            c = block_cache[key]
        gates += c.gates
        phase += c.phase
    circ = simplify(Circuit(h.n, tuple(gates), phase))
    stats["blocks"] = len(plan.blocks)
    return CompileResult(circ, plan, opts, stats)


def compile_hamiltonian(h: Hamiltonian, opts: CompileOptions, cache: Optional[SynthCache] = None) -> CompileResult:
    return compile_plan(h, build_plan(h, opts), opts, cache)


def circuit_errors(c: Circuit, h: Hamiltonian, t: float, dense_limit: int = DENSE_LIMIT) -> tuple[Optional[float], Optional[float]]:
    """(spectral, Frobenius) distance to ``exp(i t H)``; ``None`` above the dense limit."""
    if h.n > dense_limit:
        return None, None
    return phase_aligned_distance(circuit_to_matrix(c), exact_evolution(h, t))


def plan_error(plan: TrotterPlan, h: Hamiltonian, t: float) -> float:
    """Spectral distance of the exact plan product to ``exp(i t H)``."""
    return phase_aligned_distance(plan_unitary(plan, h), exact_evolution(h, t))[0]


def minimal_steps(h: Hamiltonian, opts: CompileOptions, target: float, max_steps: int = 256) -> int:
    """Smallest N (by doubling, then bisection) whose plan error is at most ``target``.

    Bisection assumes the error is non-increasing in N between the bracketing
    powers of two.
    """
    def ok(n: int) -> bool:
        return plan_error(build_plan(h, replace(opts, steps=n)), h, opts.time) <= target

    hi = 1
    while not ok(hi):
        hi *= 2
        if hi > max_steps:
            raise RuntimeError(f"no step count up to {max_steps} reaches error {target}")
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def make_report(h: Hamiltonian, result: CompileResult, wall_ms: int, errors: tuple) -> dict:
    opts = result.options
    m = metrics(result.circuit)
    parts = greedy_partition(h, opts.n_max) if opts.method == "kernpiler" else list(result.plan.partitions)
    bounds = estimate_error(h, parts, opts.trotter())
    spec, frob = errors
    return {
        "schema": REPORT_SCHEMA,
        "method": opts.method,
        "num_qubits": h.n,
        "num_terms": len(h.terms),
        "cnot_count": m.cnot_count,
        "u3_count": m.u3_count,
        "depth": m.depth,
        "steps": opts.steps,
        "order": opts.order,
        "t": opts.time,
        "n_max": opts.n_max,
        "spectral_error": spec,
        "frobenius_error": frob,
        "predicted_bounds": bounds.as_dict(),
        "seed": opts.seed,
        "wall_time_ms": 0 if opts.deterministic else int(wall_ms),
        "global_phase_offset": h.offset * opts.time,
        "circuit_global_phase": result.circuit.phase,
        "num_partitions": len(parts),
        "num_groups": len(result.plan.groups),
        "num_blocks": len(result.plan.blocks),
        "synthesis": dict(sorted(result.stats.items())),
    }


def run_compile(h: Hamiltonian, opts: CompileOptions, cache: Optional[SynthCache] = None) -> tuple[CompileResult, dict]:
    t0 = time.perf_counter()
    res = compile_hamiltonian(h, opts, cache)
    errors = circuit_errors(res.circuit, h, opts.time)
    wall = (time.perf_counter() - t0) * 1000
    return res, make_report(h, res, wall, errors)
