"""Trotter plans over partition blocks: conflict graph, commuting groups,
step layout with edge alternation, exact merging, seeded shuffling, and
commutator error bounds.

A block with evolution time ``dt`` on partition ``A`` is the unitary
``exp(i dt H_A)`` acting on the partition support.  Blocks are listed in time
order, so the plan unitary is ``B_m ... B_2 B_1``.

Shuffle streams: the permutation of a run of blocks that share
``(step, half, group_id)`` is drawn from
``Generator(PCG64(SeedSequence([seed mod 2**64, step, half, group_id])))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property
from itertools import combinations
from typing import Sequence

import numpy as np

from .numerics import DENSE_LIMIT, DenseLimitError, apply_local, expm_i_hermitian, frobenius_norm
from .partition import Partition
from .pauli import Hamiltonian, commutes, to_matrix

COMMUTATOR_TOL = 1e-10


@dataclass(frozen=True)
class TrotterConfig:
    total_time: float
    steps: int = 1
    order: int = 1
    shuffle_seed: int = 0
    n_max: int = 3
    alternate_edges: bool = True

    def __post_init__(self):
        if isinstance(self.steps, bool) or int(self.steps) != self.steps or self.steps < 1:
            raise ValueError(f"number of Trotter steps must be a positive integer, got {self.steps!r}")
        if self.order not in (1, 2):
            raise ValueError(f"Trotter order must be 1 or 2, got {self.order!r}")
        if not math.isfinite(self.total_time):
            raise ValueError("total time must be finite")

    @property
    def dt(self) -> float:
        return self.total_time / self.steps


@dataclass(frozen=True)
class ConflictGraph:
    vertices: tuple[int, ...]
    edges: frozenset[tuple[int, int]]

    @cached_property
    def adjacency(self) -> dict[int, frozenset[int]]:
        adj: dict[int, set[int]] = {v: set() for v in self.vertices}
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return {v: frozenset(s) for v, s in adj.items()}

    def conflict(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.edges


def _commutator_fro(h: Hamiltonian, a: Partition, b: Partition) -> float:
    qs = sorted(a.support | b.support)
    ha = to_matrix(a.terms(h), qs)
    hb = to_matrix(b.terms(h), qs)
    return frobenius_norm(ha @ hb - hb @ ha)


def partitions_commute(h: Hamiltonian, a: Partition, b: Partition, dense_limit: int = DENSE_LIMIT) -> bool:
    """Exact test on the joint support when it fits the dense limit.

    Above the limit only the sufficient Pauli-level test is used, so a
    ``False`` there may be conservative.
    """
    if not (a.support & b.support):
        return True
    if all(commutes(p, q) for p in a.terms(h) for q in b.terms(h)):
        return True
    if len(a.support | b.support) > dense_limit:
        return False
    return _commutator_fro(h, a, b) <= COMMUTATOR_TOL


def build_conflict_graph(partitions: Sequence[Partition], h: Hamiltonian, dense_limit: int = DENSE_LIMIT) -> ConflictGraph:
    edges = set()
    for i, j in combinations(range(len(partitions)), 2):
        if not partitions_commute(h, partitions[i], partitions[j], dense_limit):
            edges.add((i, j))
    return ConflictGraph(tuple(range(len(partitions))), frozenset(edges))


def greedy_commuting_groups(g: ConflictGraph) -> list[tuple[int, ...]]:
    """Repeatedly peel a maximal independent set seeded at the lowest remaining id."""
    remaining = sorted(g.vertices)
    adj = g.adjacency
    groups = []
    while remaining:
        group: list[int] = []
        blocked: set[int] = set()
        for v in remaining:
            if v not in blocked:
                group.append(v)
                blocked |= adj[v]
        groups.append(tuple(group))
        taken = set(group)
        remaining = [v for v in remaining if v not in taken]
    return groups


@dataclass(frozen=True)
class BlockExp:
    partition: int
    dt: float
    group_id: int
    step: int = 0
    half: int = 0
    merged: bool = False


@dataclass(frozen=True)
class TrotterPlan:
    blocks: tuple[BlockExp, ...]
    groups: tuple[tuple[int, ...], ...]
    config: TrotterConfig
    partitions: tuple[Partition, ...]
    graph: ConflictGraph

    def __len__(self) -> int:
        return len(self.blocks)

    def total_times(self) -> dict[int, float]:
        """Summed ``dt`` per partition; equals ``total_time`` for every partition."""
        out: dict[int, float] = {}
        for b in self.blocks:
            out[b.partition] = out.get(b.partition, 0.0) + b.dt
        return out


def group_sequence(groups: Sequence[Sequence[int]]) -> list[int]:
    """Group ids for one step: largest first, middle groups in extraction order, second largest last."""
    if len(groups) <= 1:
        return list(range(len(groups)))
    by_size = sorted(range(len(groups)), key=lambda i: (-len(groups[i]), i))
    first, last = by_size[0], by_size[1]
    middle = [i for i in range(len(groups)) if i not in (first, last)]
    return [first] + middle + [last]


def build_trotter_plan(
    partitions: Sequence[Partition],
    groups: Sequence[Sequence[int]],
    cfg: TrotterConfig,
    graph: ConflictGraph | None = None,
) -> TrotterPlan:
    """Lay out ``cfg.steps`` steps of the group sequence.

    Order 1 swaps the two edge groups on odd steps when ``alternate_edges``
    is set.  Order 2 plays each step as a forward half step followed by its
    mirror image, both with ``dt / 2``; mirrored steps already place equal
    groups at step boundaries, so no alternation is applied.
    """
    covered = sorted(v for grp in groups for v in grp)
    if covered != list(range(len(partitions))):
        raise ValueError("groups must cover every partition exactly once")
    if graph is None:
        graph = ConflictGraph(tuple(range(len(partitions))), frozenset())
    seq = group_sequence(groups)
    blocks: list[BlockExp] = []
    dt = cfg.dt
    for s in range(cfg.steps):
        if cfg.order == 1:
            order = list(seq)
            if cfg.alternate_edges and s % 2 == 1 and len(order) >= 2:
                order[0], order[-1] = order[-1], order[0]
            for gid in order:
                blocks += [BlockExp(p, dt, gid, s, 0) for p in groups[gid]]
        else:
            for gid in seq:
                blocks += [BlockExp(p, dt / 2, gid, s, 0) for p in groups[gid]]
            for gid in reversed(seq):
                blocks += [BlockExp(p, dt / 2, gid, s, 1) for p in reversed(groups[gid])]
    return TrotterPlan(tuple(blocks), tuple(tuple(g) for g in groups), cfg, tuple(partitions), graph)


def merge_adjacent(plan: TrotterPlan) -> TrotterPlan:
    """Fold each block into an earlier block of the same partition when
    every block in between commutes with it.  Exact by construction."""
    out: list[BlockExp] = []
    for b in plan.blocks:
        target = None
        for j in range(len(out) - 1, -1, -1):
            o = out[j]
            if o.partition == b.partition:
                target = j
                break
            if plan.graph.conflict(o.partition, b.partition):
                break
        if target is None:
            out.append(b)
        else:
            o = out[target]
            out[target] = replace(o, dt=o.dt + b.dt, merged=True)
    return replace(plan, blocks=tuple(out))


def shuffle_within_groups(plan: TrotterPlan, seed: int | None = None) -> TrotterPlan:
    """Permute each run of blocks sharing ``(step, half, group_id)``.

    Merged blocks keep their position and split runs.
    """
    seed = plan.config.shuffle_seed if seed is None else seed
    blocks = list(plan.blocks)
    out: list[BlockExp] = []
    i = 0
    while i < len(blocks):
        b = blocks[i]
        if b.merged:
            out.append(b)
            i += 1
            continue
        key = (b.step, b.half, b.group_id)
        j = i
        while j < len(blocks) and not blocks[j].merged and (blocks[j].step, blocks[j].half, blocks[j].group_id) == key:
            j += 1
        run = blocks[i:j]
        if len(run) > 1:
            ss = np.random.SeedSequence([seed % (1 << 64), b.step, b.half, b.group_id])
            perm = np.random.Generator(np.random.PCG64(ss)).permutation(len(run))
            run = [run[k] for k in perm]
        out += run
        i = j
    return replace(plan, blocks=tuple(out))


def block_hamiltonian(h: Hamiltonian, part: Partition) -> np.ndarray:
    return to_matrix(part.terms(h), part.qubits)


def block_matrix(h: Hamiltonian, part: Partition, dt: float) -> np.ndarray:
    """``exp(i dt H_A)`` on the partition support (local qubit order = sorted support)."""
    return expm_i_hermitian(block_hamiltonian(h, part), dt)


def plan_unitary(plan: TrotterPlan, h: Hamiltonian, dense_limit: int = DENSE_LIMIT) -> np.ndarray:
    if h.n > dense_limit:
        raise DenseLimitError(f"{h.n} qubits exceeds the dense limit of {dense_limit}")
    steps = _repeated_step(plan.blocks)
    if steps is not None:
        one, count = steps
        return np.linalg.matrix_power(_product(one, plan, h), count)
    return _product(plan.blocks, plan, h)


def _repeated_step(blocks: Sequence[BlockExp]) -> tuple[list[BlockExp], int] | None:
    """First step's blocks and the step count when every step plays the same sequence."""
    by_step: dict[int, list[tuple[int, float]]] = {}
    for b in blocks:
        by_step.setdefault(b.step, []).append((b.partition, b.dt))
    if len(by_step) < 2:
        return None
    seqs = list(by_step.values())
    if any(s != seqs[0] for s in seqs[1:]):
        return None
    first = min(by_step)
    return [b for b in blocks if b.step == first], len(seqs)


def _product(blocks: Sequence[BlockExp], plan: TrotterPlan, h: Hamiltonian) -> np.ndarray:
    m = np.eye(1 << h.n, dtype=complex)
    cache: dict[tuple[int, float], np.ndarray] = {}
    for b in blocks:
        part = plan.partitions[b.partition]
        if not part.support:
            continue
        key = (b.partition, b.dt)
        if key not in cache:
            cache[key] = block_matrix(h, part, b.dt)
        m = apply_local(m, cache[key], part.qubits, h.n)
    return m


def exact_evolution(h: Hamiltonian, t: float) -> np.ndarray:
    """``exp(i t H)`` without the identity offset (a global phase)."""
    return expm_i_hermitian(h.matrix(), t)


def _pair_bound(h: Hamiltonian, idx_a: Sequence[int], idx_b: Sequence[int]) -> float:
    # ||[wP, vQ]|| = 2|wv| when P, Q anticommute, else 0
    total = 0.0
    for i in idx_a:
        p = h.terms[i]
        for j in idx_b:
            q = h.terms[j]
            if not commutes(p, q):
                total += 2.0 * abs(p.coefficient * q.coefficient)
    return total


@dataclass(frozen=True)
class ErrorBounds:
    full: float
    partitioned: float
    reduction: float

    def __iter__(self):
        return iter((self.full, self.partitioned, self.reduction))

    def as_dict(self) -> dict:
        return {"full": self.full, "partitioned": self.partitioned, "reduction": self.reduction}


def estimate_error(
    h: Hamiltonian,
    partitions: Sequence[Partition],
    cfg: TrotterConfig,
    dense: bool = False,
    dense_limit: int = DENSE_LIMIT,
) -> ErrorBounds:
    """First-order commutator bounds scaled by ``N * dt**2 / 2``.

    ``full`` sums ``||[H_i, H_j]||`` over all term pairs.  ``partitioned``
    sums over partition pairs; by default each ``||[H_A, H_B]||`` is replaced
    by its term-level triangle bound, which makes ``reduction`` exactly the
    intra-partition commutator sum.  ``dense=True`` uses the spectral norm of
    ``[H_A, H_B]`` on the joint support where it fits the dense limit.
    """
    scale = cfg.steps * cfg.dt**2 / 2
    n_terms = len(h.terms)
    full = _pair_bound_all(h, n_terms)
    part = 0.0
    for a, b in combinations(partitions, 2):
        if not (a.support & b.support):
            continue
        tri = _pair_bound(h, a.term_indices, b.term_indices)
        if dense and tri > 0 and len(a.support | b.support) <= dense_limit:
            qs = sorted(a.support | b.support)
            ha = to_matrix(a.terms(h), qs)
            hb = to_matrix(b.terms(h), qs)
            part += float(np.linalg.norm(ha @ hb - hb @ ha, 2))
        else:
            part += tri
    full *= scale
    part *= scale
    return ErrorBounds(full, part, max(full - part, 0.0))


def _pair_bound_all(h: Hamiltonian, n_terms: int) -> float:
    total = 0.0
    for i, j in combinations(range(n_terms), 2):
        p, q = h.terms[i], h.terms[j]
        if not commutes(p, q):
            total += 2.0 * abs(p.coefficient * q.coefficient)
    return total


def make_plan(
    h: Hamiltonian,
    partitions: Sequence[Partition],
    cfg: TrotterConfig,
    merge: bool = True,
    shuffle: bool = True,
) -> TrotterPlan:
    """Graph, groups, layout, then optional merge and shuffle."""
    graph = build_conflict_graph(partitions, h)
    groups = greedy_commuting_groups(graph)
    plan = build_trotter_plan(partitions, groups, cfg, graph)
    if merge:
        plan = merge_adjacent(plan)
    if shuffle:
        plan = shuffle_within_groups(plan, cfg.shuffle_seed)
    return plan
