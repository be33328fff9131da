"""Monte Carlo tree search over CNOT skeletons for small unitaries.

Tree nodes hold CNOT-only prefixes.  A simulation from a node fits the bare
prefix first; if that misses ``epsilon`` it appends random CNOTs up to
``max_cnots``, fits all U3 parameters, and then greedily deletes CNOTs whose
removal still refits below ``epsilon``.  The value of a simulation is
``reward(error, cnots, epsilon)``.
"""
from __future__ import annotations

import hashlib
import math
import pickle
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .circuit import Circuit, circuit_to_matrix, metrics, simplify
from .fit import Ansatz, FitResult, aligned_error, fit_restarts, gauss_newton_fit
from .numerics import is_unitary, num_qubits

# smallest CNOT budget known to reach every unitary on k qubits
DEFAULT_MAX_CNOTS = {1: 0, 2: 3, 3: 19, 4: 61}


@dataclass
class SynthConfig:
    epsilon: float = 1e-8
    max_cnots: Optional[int] = None
    uct_c: float = 0.5
    iterations: int = 64
    gn_restarts: int = 10
    gn_max_iters: int = 200
    seed: int = 0
    jacobian: str = "analytic"
    early_stop_cnots: Optional[int] = None
    compress: bool = True

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.max_cnots is not None and self.max_cnots < 0:
            raise ValueError("max_cnots must be non-negative")
        if self.iterations < 0 or self.gn_restarts < 1 or self.gn_max_iters < 1:
            raise ValueError("iteration budgets must be positive")

    def budget(self, k: int) -> int:
        if self.max_cnots is not None:
            return self.max_cnots if k > 1 else 0
        if k not in DEFAULT_MAX_CNOTS:
            raise ValueError(f"no default CNOT budget for {k} qubits; set max_cnots")
        return DEFAULT_MAX_CNOTS[k]


@dataclass
class SynthResult:
    circuit: Circuit
    error: float
    cnot_count: int
    iterations_used: int
    converged: bool
    # search root, kept for inspection; never cached or compared
    tree: Optional["SearchNode"] = field(default=None, repr=False, compare=False)

    @property
    def depth(self) -> int:
        return metrics(self.circuit).depth


@dataclass(eq=False)
class SearchNode:
    cnot_sequence: tuple[tuple[int, int], ...]
    parent: Optional["SearchNode"] = None
    Q: float = 0.0
    N_visits: int = 0
    self_visits: int = 0
    children: dict = field(default_factory=dict)
    unexplored_actions: list = field(default_factory=list)


def uct_score(Q: float, N_i: int, N_p: int, c: float) -> float:
    """``Q/N_i + c sqrt(ln N_p / N_i)``; unvisited children score ``+inf``."""
    if N_i == 0:
        return math.inf
    return Q / N_i + c * math.sqrt(math.log(N_p) / N_i)


def reward(error: float, cnot_count: int, epsilon: float) -> float:
    return -float(cnot_count) if error < epsilon else -float(error)


def all_actions(k: int) -> list[tuple[int, int]]:
    return [(c, t) for c in range(k) for t in range(k) if c != t]


def legal_actions(k: int, seq: tuple[tuple[int, int], ...]) -> list[tuple[int, int]]:
    last = seq[-1] if seq else None
    return [a for a in all_actions(k) if a != last]


def random_completion(k: int, seq, length: int, rng: np.random.Generator) -> tuple[tuple[int, int], ...]:
    """Append uniform CNOTs (never repeating the previous one) up to ``length``."""
    out = list(seq)
    acts = all_actions(k)
    while len(out) < length:
        choices = [a for a in acts if not out or a != out[-1]]
        out.append(choices[int(rng.integers(len(choices)))])
    return tuple(out)


def _drop(ansatz: Ansatz, params: np.ndarray, l: int) -> tuple[Ansatz, np.ndarray]:
    p = np.asarray(params).reshape(-1, 3)
    i = ansatz.k + 2 * l
    keep = np.ones(len(p), dtype=bool)
    keep[i : i + 2] = False
    cx = ansatz.cnots[:l] + ansatz.cnots[l + 1 :]
    return Ansatz(ansatz.k, cx), p[keep].ravel()


def compress(ansatz: Ansatz, fit: FitResult, target: np.ndarray, cfg: SynthConfig, rng: np.random.Generator):
    """Greedily delete CNOTs while a warm-started refit stays below ``epsilon``."""
    improved = True
    while improved and ansatz.cnots:
        improved = False
        for l in rng.permutation(len(ansatz.cnots)):
            cand, x0 = _drop(ansatz, fit.params, int(l))
            r = gauss_newton_fit(cand, target, x0, max_iters=cfg.gn_max_iters // 2, target_error=cfg.epsilon * 1e-3, jacobian=cfg.jacobian)
            if r.error < cfg.epsilon:
                ansatz, fit = cand, r
                improved = True
                break
    return ansatz, fit


def _finish(ansatz: Ansatz, fit: FitResult, target: np.ndarray) -> tuple[Circuit, float]:
    c = simplify(ansatz.circuit(fit.params, fit.phase))
    err, _ = aligned_error(circuit_to_matrix(c), target)
    return c, err


def rollout(skeleton, target: np.ndarray, cfg: SynthConfig, rng: np.random.Generator) -> tuple[Circuit, float]:
    """Value a CNOT prefix: fitted, compressed, simplified circuit and its error."""
    k = num_qubits(target)
    skeleton = tuple(tuple(a) for a in skeleton)
    budget = cfg.budget(k)
    if len(skeleton) > budget:
        raise ValueError("skeleton longer than the CNOT budget")
    kw = dict(max_iters=cfg.gn_max_iters, epsilon=cfg.epsilon, jacobian=cfg.jacobian)
    bare = Ansatz(k, skeleton)
    fit = fit_restarts(bare, target, rng, restarts=max(1, cfg.gn_restarts // 3), **kw)
    if fit.error < cfg.epsilon or len(skeleton) == budget:
        return _finish(bare, fit, target)
    full = Ansatz(k, random_completion(k, skeleton, budget, rng))
    ffit = fit_restarts(full, target, rng, restarts=cfg.gn_restarts, **kw)
    if ffit.error >= cfg.epsilon:
        return _finish(bare, fit, target) if fit.error <= ffit.error else _finish(full, ffit, target)
    if cfg.compress:
        full, ffit = compress(full, ffit, target, cfg, rng)
    return _finish(full, ffit, target)


def _better(a: tuple[Circuit, float], b: Optional[tuple[Circuit, float]], eps: float) -> bool:
    if b is None:
        return True

    def key(x):
        c, e = x
        ok = e < eps
        m = metrics(c)
        return (0, m.cnot_count, m.depth, e) if ok else (1, e, m.cnot_count, m.depth)

    return key(a) < key(b)


def synthesize(target: np.ndarray, cfg: SynthConfig = SynthConfig()) -> SynthResult:
    """MCTS synthesis of ``target`` (up to global phase) on ``k`` qubits.

    The empty skeleton is evaluated before the search.  The search keeps the
    best circuit found (converged first, then fewest CNOTs, then depth) and
    stops after ``cfg.iterations`` or once a converged circuit has at most
    ``cfg.early_stop_cnots`` CNOTs (or one CNOT, when no CNOT-free fit exists).
    """
    target = np.asarray(target, dtype=complex)
    k = num_qubits(target)
    if not is_unitary(target, 1e-10):
        raise ValueError("synthesis target is not unitary")
    rng = np.random.default_rng(cfg.seed)
    budget = cfg.budget(k)
    best = rollout((), target, cfg, rng)
    # the empty skeleton missed, so one CNOT counts as optimal
    floor = 0 if best[1] < cfg.epsilon else 1
    if cfg.early_stop_cnots is not None:
        floor = max(floor, cfg.early_stop_cnots)

    def done(b) -> bool:
        return b[1] < cfg.epsilon and b[0].cnot_count <= floor

    root = SearchNode((), unexplored_actions=legal_actions(k, ()) if budget > 0 else [])
    used = 0
    while used < cfg.iterations and not done(best) and (root.unexplored_actions or root.children):
        node = root
        while not node.unexplored_actions and node.children:
            parent_n = node.N_visits
            scores = [(uct_score(ch.Q, ch.N_visits, parent_n, cfg.uct_c), i) for i, ch in enumerate(node.children.values())]
            top = max(s for s, _ in scores)
            ties = [i for s, i in scores if s == top]
            node = list(node.children.values())[ties[int(rng.integers(len(ties)))]]
        if node.unexplored_actions:
            a = node.unexplored_actions.pop(int(rng.integers(len(node.unexplored_actions))))
            seq = node.cnot_sequence + (a,)
            child = SearchNode(seq, parent=node, unexplored_actions=legal_actions(k, seq) if len(seq) < budget else [])
            node.children[a] = child
            node = child
        node.self_visits += 1
        circ, err = rollout(node.cnot_sequence, target, cfg, rng)
        r = reward(err, circ.cnot_count, cfg.epsilon)
        if _better((circ, err), best, cfg.epsilon):
            best = (circ, err)
        while node is not None:
            node.N_visits += 1
            node.Q += r
            node = node.parent
        used += 1
    circ, err = best
    return SynthResult(circ, err, circ.cnot_count, used, err < cfg.epsilon, root)


def check_visit_counts(node: SearchNode) -> bool:
    """Every node's visits equal its children's visits plus its own simulations."""
    if node.N_visits != sum(ch.N_visits for ch in node.children.values()) + node.self_visits:
        return False
    return all(check_visit_counts(ch) for ch in node.children.values())


def _normalizing_phase(u: np.ndarray) -> complex:
    flat = u.ravel()
    mags = np.abs(flat)
    i = int(np.argmax(mags >= mags.max() - 1e-9))
    v = flat[i]
    return v / abs(v) if abs(v) > 0 else 1.0 + 0j


def fingerprint(u: np.ndarray) -> str:
    """sha256 of ``u`` after fixing the largest entry real-positive and rounding to 1e-12."""
    u = np.asarray(u, dtype=complex)
    n = u / _normalizing_phase(u)
    q = np.round(np.stack([n.real, n.imag]) * 1e12).astype(np.int64) + 0
    h = hashlib.sha256()
    h.update(np.asarray(u.shape, dtype=np.int64).tobytes())
    h.update(q.tobytes())
    return h.hexdigest()


class SynthCache:
    """Results keyed by :func:`fingerprint`; stored relative to the normalizing phase.

    Persisted files are pickles and must come from a trusted source.
    """

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self.entries: dict[str, SynthResult] = {}
        self.hits = 0
        self.misses = 0
        if self.path is not None and self.path.exists():
            with open(self.path, "rb") as fh:
                self.entries = pickle.load(fh)

    def __len__(self) -> int:
        return len(self.entries)

    def lookup(self, u: np.ndarray) -> Optional[SynthResult]:
        r = self.entries.get(fingerprint(u))
        if r is None:
            self.misses += 1
            return None
        self.hits += 1
        shift = math.atan2(_normalizing_phase(u).imag, _normalizing_phase(u).real)
        c = r.circuit
        return SynthResult(Circuit(c.n, c.gates, c.phase + shift), r.error, r.cnot_count, r.iterations_used, r.converged)

    def store(self, u: np.ndarray, result: SynthResult) -> None:
        key = fingerprint(u)
        if key in self.entries:
            return
        ph = _normalizing_phase(u)
        c = result.circuit
        rel = Circuit(c.n, c.gates, c.phase - math.atan2(ph.imag, ph.real))
        self.entries[key] = SynthResult(rel, result.error, result.cnot_count, result.iterations_used, result.converged)

    def save(self) -> None:
        if self.path is None:
            return
        tmp = self.path.with_suffix(self.path.suffix + ".tmp")
        with open(tmp, "wb") as fh:
            pickle.dump(self.entries, fh)
        tmp.replace(self.path)


def synthesize_cached(target: np.ndarray, cfg: SynthConfig, cache: Optional[SynthCache] = None) -> SynthResult:
    if cache is not None:
        hit = cache.lookup(target)
        if hit is not None:
            return hit
    r = synthesize(target, cfg)
    if cache is not None:
        cache.store(target, r)
    return r
