"""Pauli strings, their algebra, and dense realizations of weighted sums.

Qubit convention (fixed project-wide): qubit 0 is the leftmost character of a
Pauli label and the leftmost tensor factor of every dense matrix, i.e. the
most significant bit of a basis-state index.  Indices are 0-based; a label
written ``X_1 X_2`` in 1-based notation is ``"XX"`` on qubits 0 and 1 here.

Internally a string is two bitmasks: bit ``q`` of ``x`` is set for X or Y on
qubit ``q``, bit ``q`` of ``z`` for Z or Y.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

PAULI_LETTERS = "IXYZ"
DENSE_LIMIT = 12

_PHASES = (1, 1j, -1, -1j)


class PauliDimensionError(ValueError):
    """Raised when two Pauli objects disagree on the qubit count."""


def _masks(label: str) -> tuple[int, int]:
    x = z = 0
    for q, ch in enumerate(label):
        if ch == "X":
            x |= 1 << q
        elif ch == "Y":
            x |= 1 << q
            z |= 1 << q
        elif ch == "Z":
            z |= 1 << q
        elif ch != "I":
            raise ValueError(f"invalid Pauli letter {ch!r} at position {q} in {label!r}")
    return x, z


@dataclass(frozen=True)
class PauliTerm:
    """A real coefficient times a length-``n`` Pauli string."""

    coefficient: float
    paulis: str
    x: int = field(init=False, repr=False, compare=False)
    z: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if isinstance(self.coefficient, complex) or np.iscomplexobj(self.coefficient):
            raise TypeError("Pauli coefficients must be real (Hermitian terms only)")
        coeff = float(self.coefficient)
        if not math.isfinite(coeff):
            raise ValueError(f"non-finite coefficient {self.coefficient!r}")
        label = str(self.paulis).upper()
        x, z = _masks(label)
        object.__setattr__(self, "coefficient", coeff)
        object.__setattr__(self, "paulis", label)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)

    @classmethod
    def from_sparse(cls, coefficient: float, ops: dict[int, str] | Iterable[tuple[int, str]], n: int) -> "PauliTerm":
        """Build a term from ``{qubit: letter}`` on ``n`` qubits."""
        chars = ["I"] * n
        items = ops.items() if isinstance(ops, dict) else ops
        for q, ch in items:
            if not 0 <= q < n:
                raise PauliDimensionError(f"qubit {q} outside 0..{n - 1}")
            chars[q] = ch
        return cls(coefficient, "".join(chars))

    @property
    def n(self) -> int:
        return len(self.paulis)

    @property
    def support(self) -> frozenset[int]:
        return support(self)

    @property
    def weight(self) -> int:
        return (self.x | self.z).bit_count()

    def scaled(self, factor: float) -> "PauliTerm":
        return PauliTerm(self.coefficient * factor, self.paulis)

    def __str__(self) -> str:
        return f"{self.coefficient:+g}*{self.paulis}"


def _check_dims(p: PauliTerm, q: PauliTerm) -> None:
    if p.n != q.n:
        raise PauliDimensionError(f"qubit counts differ: {p.n} vs {q.n}")


def commutes(p: PauliTerm, q: PauliTerm) -> bool:
    """True iff the two strings commute (symplectic inner product is even)."""
    _check_dims(p, q)
    return ((p.x & q.z) ^ (p.z & q.x)).bit_count() % 2 == 0


def multiply(p: PauliTerm, q: PauliTerm) -> tuple[complex, PauliTerm]:
    """Return ``(phase, r)`` with ``p @ q == phase * r``.

    ``r`` carries the product of the coefficients; ``phase`` is one of
    1, 1j, -1, -1j.
    """
    _check_dims(p, q)
    xa, za, xb, zb = p.x, p.z, q.x, q.z
    xs_a, ys_a, zs_a = xa & ~za, xa & za, za & ~xa
    xs_b, ys_b, zs_b = xb & ~zb, xb & zb, zb & ~xb
    # XY = iZ, YZ = iX, ZX = iY and the reversed orders give -i.
    plus = (xs_a & ys_b) | (ys_a & zs_b) | (zs_a & xs_b)
    minus = (ys_a & xs_b) | (zs_a & ys_b) | (xs_a & zs_b)
    k = (plus.bit_count() - minus.bit_count()) % 4
    x, z = xa ^ xb, za ^ zb
    label = "".join(
        "Y" if (x >> i) & 1 and (z >> i) & 1 else "X" if (x >> i) & 1 else "Z" if (z >> i) & 1 else "I"
        for i in range(p.n)
    )
    return _PHASES[k], PauliTerm(p.coefficient * q.coefficient, label)


def support(p: PauliTerm) -> frozenset[int]:
    mask = p.x | p.z
    return frozenset(i for i in range(p.n) if (mask >> i) & 1)


def weight(p: PauliTerm) -> int:
    return p.weight


def max_qubit(p: PauliTerm) -> int:
    """Highest qubit index acted on, or -1 for the identity string."""
    return (p.x | p.z).bit_length() - 1


def _local_masks(p: PauliTerm, qubit_order: Sequence[int]) -> tuple[int, int, int]:
    """Masks of ``p`` in the bit layout of a ``len(qubit_order)``-qubit matrix."""
    k = len(qubit_order)
    pos = {q: k - 1 - i for i, q in enumerate(qubit_order)}
    x = z = ny = 0
    for q in support(p):
        if q not in pos:
            raise ValueError(f"term {p.paulis} acts on qubit {q} outside qubit_order {list(qubit_order)}")
        ch = p.paulis[q]
        bit = 1 << pos[q]
        if ch in "XY":
            x |= bit
        if ch in "ZY":
            z |= bit
        if ch == "Y":
            ny += 1
    return x, z, ny


def to_matrix(terms: Sequence[PauliTerm], qubit_order: Sequence[int], dense_limit: int = DENSE_LIMIT) -> np.ndarray:
    """Dense matrix of ``sum(terms)`` on the qubits listed in ``qubit_order``.

    ``qubit_order[0]`` becomes the leftmost tensor factor.  Uses
    ``P|j> = i^{#Y} (-1)^{|j & z|} |j ^ x>`` column by column.
    """
    k = len(qubit_order)
    if k > dense_limit:
        raise ValueError(f"{k} qubits exceeds the dense limit of {dense_limit}")
    if len(set(qubit_order)) != k:
        raise ValueError("qubit_order contains duplicates")
    dim = 1 << k
    out = np.zeros((dim, dim), dtype=complex)
    cols = np.arange(dim, dtype=np.int64)
    for term in terms:
        x, z, ny = _local_masks(term, qubit_order)
        signs = 1 - 2 * (np.bitwise_count(cols & z) & 1).astype(np.int64)
        out[cols ^ x, cols] += term.coefficient * (1j ** ny) * signs
    return out


def term_matrix(term: PauliTerm) -> np.ndarray:
    """Dense matrix of a single term on all of its ``n`` qubits."""
    return to_matrix([term], list(range(term.n)))


@dataclass(frozen=True)
class Hamiltonian:
    """``H = offset * I + sum(terms)`` on ``n`` qubits.

    All-identity strings are folded into ``offset`` at construction, so
    ``terms`` only holds strings of weight >= 1.  The offset only contributes
    a global phase to ``exp(iHt)``.
    """

    n: int
    terms: tuple[PauliTerm, ...] = ()
    offset: float = 0.0

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("qubit count must be non-negative")
        kept = []
        offset = float(self.offset)
        for i, t in enumerate(self.terms):
            if not isinstance(t, PauliTerm):
                raise TypeError(f"term {i} is not a PauliTerm")
            if t.n != self.n:
                raise PauliDimensionError(f"term {i} ({t.paulis}) has {t.n} qubits, Hamiltonian has {self.n}")
            if t.weight == 0:
                offset += t.coefficient
            else:
                kept.append(t)
        object.__setattr__(self, "terms", tuple(kept))
        object.__setattr__(self, "offset", offset)

    @classmethod
    def from_labels(cls, items: Iterable[tuple[float, str]], n: int | None = None) -> "Hamiltonian":
        terms = tuple(PauliTerm(c, s) for c, s in items)
        if n is None:
            if not terms:
                raise ValueError("cannot infer the qubit count of an empty Hamiltonian")
            n = terms[0].n
        return cls(n, terms)

    def __len__(self) -> int:
        return len(self.terms)

    def matrix(self, include_offset: bool = False) -> np.ndarray:
        m = to_matrix(self.terms, list(range(self.n)))
        if include_offset and self.offset:
            m += self.offset * np.eye(m.shape[0])
        return m
