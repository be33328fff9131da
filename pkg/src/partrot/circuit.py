"""u3/CNOT circuits: exact Pauli-exponential ladders, peephole simplification, metrics.

The single-qubit gate is

    U3(theta, phi, lam) = [[cos(theta/2),            -e^{i lam} sin(theta/2)],
                           [e^{i phi} sin(theta/2),   e^{i(phi+lam)} cos(theta/2)]]

with ``det = e^{i(phi+lam)}``.  A :class:`Circuit` carries a global-phase
accumulator so that ``circuit_to_matrix`` reproduces targets exactly rather
than only up to phase.  Gates are listed in time order: the first gate acts
first, so the matrix is ``G_m ... G_2 G_1``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .numerics import DENSE_LIMIT, DenseLimitError, apply_local
from .pauli import PauliTerm, support

IDENTITY_TOL = 1e-12


@dataclass(frozen=True)
class CNOT:
    control: int
    target: int

    def __post_init__(self):
        if self.control == self.target:
            raise ValueError("CNOT control and target must differ")

    @property
    def qubits(self) -> tuple[int, int]:
        return (self.control, self.target)


@dataclass(frozen=True)
class U3:
    qubit: int
    theta: float
    phi: float
    lam: float

    def __post_init__(self):
        if not all(math.isfinite(a) for a in (self.theta, self.phi, self.lam)):
            raise ValueError("U3 angles must be finite")

    @property
    def qubits(self) -> tuple[int]:
        return (self.qubit,)

    def matrix(self) -> np.ndarray:
        return u3_matrix(self.theta, self.phi, self.lam)


Gate = Union[CNOT, U3]


@dataclass(frozen=True)
class Circuit:
    n: int
    gates: tuple = ()
    phase: float = 0.0

    def __post_init__(self):
        gates = tuple(self.gates)
        for g in gates:
            if any(not 0 <= q < self.n for q in g.qubits):
                raise ValueError(f"gate {g} addresses a qubit outside 0..{self.n - 1}")
        object.__setattr__(self, "gates", gates)

    def __len__(self) -> int:
        return len(self.gates)

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.n != self.n:
            raise ValueError("cannot concatenate circuits of different width")
        return Circuit(self.n, self.gates + other.gates, self.phase + other.phase)

    def remap(self, qubits: Sequence[int], n: int) -> "Circuit":
        """Relabel local qubit ``i`` as ``qubits[i]`` inside an ``n``-qubit circuit."""
        out = []
        for g in self.gates:
            if isinstance(g, CNOT):
                out.append(CNOT(qubits[g.control], qubits[g.target]))
            else:
                out.append(U3(qubits[g.qubit], g.theta, g.phi, g.lam))
        return Circuit(n, tuple(out), self.phase)

    def inverse(self) -> "Circuit":
        out = []
        for g in reversed(self.gates):
            if isinstance(g, CNOT):
                out.append(g)
            else:
                # U3(t, p, l)^dag = U3(-t, -l, -p)
                out.append(U3(g.qubit, -g.theta, -g.lam, -g.phi))
        return Circuit(self.n, tuple(out), -self.phase)

    @property
    def cnot_count(self) -> int:
        return sum(1 for g in self.gates if isinstance(g, CNOT))


def u3_matrix(theta: float, phi: float, lam: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array(
        [
            [c, -cmath.exp(1j * lam) * s],
            [cmath.exp(1j * phi) * s, cmath.exp(1j * (phi + lam)) * c],
        ],
        dtype=complex,
    )


def u3_from_matrix(v: np.ndarray) -> tuple[float, float, float, float]:
    """Return ``(theta, phi, lam, gamma)`` with ``v = e^{i gamma} U3(theta, phi, lam)``."""
    a, b = abs(v[0, 0]), abs(v[1, 0])
    theta = 2.0 * math.atan2(b, a)
    tiny = 1e-14
    if b <= tiny * max(a, 1.0):
        gamma = cmath.phase(v[0, 0])
        return theta, 0.0, cmath.phase(v[1, 1]) - gamma, gamma
    if a <= tiny * max(b, 1.0):
        g_lam = cmath.phase(-v[0, 1])
        return theta, cmath.phase(v[1, 0]) - g_lam, 0.0, g_lam
    gamma = cmath.phase(v[0, 0])
    phi = cmath.phase(v[1, 0]) - gamma
    lam = cmath.phase(-v[0, 1]) - gamma
    return theta, phi, lam, gamma


def _wrap(a: float) -> float:
    return (a + math.pi) % (2 * math.pi) - math.pi


def _is_identity_up_to_phase(v: np.ndarray, tol: float = IDENTITY_TOL) -> tuple[bool, float]:
    tr = v[0, 0] + v[1, 1]
    if abs(tr) < 1e-300:
        return False, 0.0
    ph = tr / abs(tr)
    dist = float(np.linalg.norm(v - ph * np.eye(2)))
    return dist < tol, cmath.phase(ph)


CNOT_MATRIX = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_SDG = np.diag([1, -1j])
_S = np.diag([1, 1j])
# Basis changes mapping Z onto X and Y: V Z V^dag = P.
_TO_Z = {"X": _H, "Y": _H @ _SDG}
_FROM_Z = {"X": _H, "Y": _S @ _H}


def _u3_gate(q: int, m: np.ndarray) -> tuple[U3, float]:
    theta, phi, lam, gamma = u3_from_matrix(m)
    return U3(q, theta, phi, lam), gamma


def pauli_exp_circuit(term: PauliTerm, angle: float) -> Circuit:
    """Exact CNOT-ladder circuit for ``exp(i * angle * coefficient * P)``.

    Basis changes map every X/Y factor onto Z, a CNOT chain collects the
    parity on the highest support qubit, a Z rotation acts there, and the
    chain and basis changes are undone.  Phases go into ``Circuit.phase``.
    """
    n = term.n
    theta = angle * term.coefficient
    qs = sorted(support(term))
    if not qs:
        return Circuit(n, (), theta)
    phase = 0.0
    pre, post = [], []
    for q in qs:
        ch = term.paulis[q]
        if ch in _TO_Z:
            g, ph = _u3_gate(q, _TO_Z[ch])
            pre.append(g)
            phase += ph
            g, ph = _u3_gate(q, _FROM_Z[ch])
            post.append(g)
            phase += ph
    ladder = [CNOT(a, b) for a, b in zip(qs, qs[1:])]
    # exp(i theta Z) = e^{i theta} U3(0, 0, -2 theta)
    rot = U3(qs[-1], 0.0, 0.0, -2.0 * theta)
    phase += theta
    gates = pre + ladder + [rot] + ladder[::-1] + post
    return Circuit(n, tuple(gates), phase)


FUSE_WIDTH = 5


def _gate_matrix(g) -> np.ndarray:
    return CNOT_MATRIX if isinstance(g, CNOT) else g.matrix()


def _apply_window(m: np.ndarray, gates: list, support: set[int], n: int) -> np.ndarray:
    if len(gates) == 1:
        return apply_local(m, _gate_matrix(gates[0]), gates[0].qubits, n)
    qs = sorted(support)
    local = {q: i for i, q in enumerate(qs)}
    w = np.eye(1 << len(qs), dtype=complex)
    for g in gates:
        w = apply_local(w, _gate_matrix(g), [local[q] for q in g.qubits], len(qs))
    return apply_local(m, w, qs, n)


def circuit_to_matrix(c: Circuit, dense_limit: int = DENSE_LIMIT) -> np.ndarray:
    if c.n > dense_limit:
        raise DenseLimitError(f"{c.n} qubits exceeds the dense limit of {dense_limit}")
    m = np.eye(1 << c.n, dtype=complex)
    # one full-size application costs about the same for up to 5 qubits,
    # so consecutive gates are multiplied out on their joint support first
    window: list = []
    support: set[int] = set()
    for g in c.gates:
        if len(support | set(g.qubits)) > FUSE_WIDTH:
            m = _apply_window(m, window, support, c.n)
            window, support = [], set()
        window.append(g)
        support |= set(g.qubits)
    if window:
        m = _apply_window(m, window, support, c.n)
    if c.phase:
        m = m * cmath.exp(1j * c.phase)
    return m


def _fuse_single_qubit(c: Circuit) -> tuple[Circuit, bool]:
    pending: dict[int, np.ndarray] = {}
    count: dict[int, int] = {}
    first: dict[int, U3] = {}
    out: list = []
    phase = c.phase
    changed = False

    def flush(q: int) -> None:
        nonlocal phase, changed
        if q not in pending:
            return
        m = pending.pop(q)
        k = count.pop(q)
        orig = first.pop(q)
        ident, ph = _is_identity_up_to_phase(m)
        if ident:
            phase += ph
            changed = True
            return
        if k == 1:
            out.append(orig)
            return
        g, gamma = _u3_gate(q, m)
        phase += gamma
        changed = True
        out.append(g)

    for g in c.gates:
        if isinstance(g, U3):
            first.setdefault(g.qubit, g)
            pending[g.qubit] = g.matrix() @ pending.get(g.qubit, np.eye(2))
            count[g.qubit] = count.get(g.qubit, 0) + 1
        else:
            for q in g.qubits:
                flush(q)
            out.append(g)
    for q in sorted(pending):
        flush(q)
    return Circuit(c.n, tuple(out), phase), changed


def _cancel_cnots(c: Circuit) -> tuple[Circuit, bool]:
    out: list = []
    alive: list[bool] = []
    wires: dict[int, list[int]] = {q: [] for q in range(c.n)}
    changed = False
    for g in c.gates:
        if isinstance(g, CNOT):
            wc, wt = wires[g.control], wires[g.target]
            if wc and wt and wc[-1] == wt[-1] and out[wc[-1]] == g:
                j = wc.pop()
                wt.pop()
                alive[j] = False
                changed = True
                continue
        idx = len(out)
        out.append(g)
        alive.append(True)
        for q in g.qubits:
            wires[q].append(idx)
    gates = tuple(g for g, a in zip(out, alive) if a)
    return Circuit(c.n, gates, c.phase), changed


def simplify(c: Circuit, max_rounds: int = 100) -> Circuit:
    """Cancel wire-adjacent CNOT pairs and fuse single-qubit runs, to a fixpoint.

    A fused run that is the identity up to phase (within ``IDENTITY_TOL``) is
    dropped and its phase moved to the accumulator.
    """
    for _ in range(max_rounds):
        c, a = _fuse_single_qubit(c)
        c, b = _cancel_cnots(c)
        if not (a or b):
            break
    return Circuit(c.n, c.gates, _wrap(c.phase))


@dataclass(frozen=True)
class Metrics:
    cnot_count: int
    u3_count: int
    depth: int

    def as_dict(self) -> dict:
        return {"cnot_count": self.cnot_count, "u3_count": self.u3_count, "depth": self.depth}


def metrics(c: Circuit) -> Metrics:
    level = [0] * c.n
    cx = u3 = 0
    for g in c.gates:
        qs = g.qubits
        d = max(level[q] for q in qs) + 1
        for q in qs:
            level[q] = d
        if isinstance(g, CNOT):
            cx += 1
        else:
            u3 += 1
    return Metrics(cx, u3, max(level, default=0))


def ladder_circuit(terms: Iterable[PauliTerm], dt: float, n: int) -> Circuit:
    """Product of exact ladders ``exp(i dt t_1) exp(i dt t_2) ...`` in list order."""
    c = Circuit(n)
    for t in terms:
        c = c + pauli_exp_circuit(t, dt)
    return c
