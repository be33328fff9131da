"""Greedy packing of Hamiltonian terms into blocks of bounded joint support."""
from __future__ import annotations

from dataclasses import dataclass

from .pauli import Hamiltonian, PauliTerm, max_qubit

DEFAULT_N_MAX = 3


@dataclass(frozen=True)
class Partition:
    """Term indices (into ``Hamiltonian.terms``) exponentiated together as one block."""

    term_indices: tuple[int, ...]
    support: frozenset[int]

    @property
    def qubits(self) -> tuple[int, ...]:
        return tuple(sorted(self.support))

    def terms(self, h: Hamiltonian) -> list[PauliTerm]:
        return [h.terms[i] for i in self.term_indices]


def sort_terms(h: Hamiltonian) -> list[int]:
    """Indices ordered by highest qubit, then weight, then original position."""
    return sorted(range(len(h.terms)), key=lambda i: (max_qubit(h.terms[i]), h.terms[i].weight, i))


def greedy_partition(h: Hamiltonian, n_max: int = DEFAULT_N_MAX) -> list[Partition]:
    """Place each sorted term into the first partition it fits, else open a new one.

    A term wider than ``n_max`` stays alone in its partition.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    members: list[list[int]] = []
    supports: list[set[int]] = []
    for i in sort_terms(h):
        s = h.terms[i].support
        if len(s) <= n_max:
            for idx, sup in enumerate(supports):
                if len(sup) <= n_max and len(sup | s) <= n_max:
                    members[idx].append(i)
                    sup |= s
                    break
            else:
                members.append([i])
                supports.append(set(s))
        else:
            members.append([i])
            supports.append(set(s))
    return [Partition(tuple(m), frozenset(s)) for m, s in zip(members, supports)]
