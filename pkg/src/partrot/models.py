"""Benchmark Hamiltonians and the Hamiltonian JSON file format.

Sites of a ``rows x cols`` grid are numbered row-major, ``s = r * cols + c``.
Spin models put one qubit on each site.  Fermi-Hubbard interleaves spins:
site ``s`` spin-up is qubit ``2s``, spin-down is qubit ``2s + 1``, and the
Jordan-Wigner string runs over that qubit order.

File schema::

    {"num_qubits": 2, "terms": [{"coeff": 1.0, "pauli": "ZZ"}]}

where ``pauli`` is a string over ``IXYZ`` whose first character is qubit 0.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .pauli import Hamiltonian, PauliTerm

TOPOLOGIES = ("line", "square", "triangular")


class HamiltonianFormatError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    rows: int
    cols: int
    topology: str = "line"

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("grid dimensions must be positive")
        if self.topology not in TOPOLOGIES:
            raise ValueError(f"unknown topology {self.topology!r}; expected one of {TOPOLOGIES}")
        if self.topology == "line" and self.rows != 1 and self.cols != 1:
            raise ValueError("a line grid needs rows == 1 or cols == 1")

    @property
    def sites(self) -> int:
        return self.rows * self.cols


@dataclass(frozen=True)
class ModelParams:
    J: float = 1.0
    h: float = 1.0
    t_hop: float = 1.0
    U: float = 2.0

    def __post_init__(self):
        for name in ("J", "h", "t_hop", "U"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"model parameter {name} must be finite")


def grid_edges(g: GridSpec) -> list[tuple[int, int]]:
    """Nearest-neighbour pairs ``(i, j)`` with ``i < j``, sorted.

    ``triangular`` adds the down-right diagonal ``(r, c)-(r+1, c+1)`` of every
    plaquette to the square lattice.
    """
    if g.sites < 2:
        raise ValueError("a grid needs at least two sites")
    if g.topology == "line":
        return [(i, i + 1) for i in range(g.sites - 1)]
    edges = set()
    idx = lambda r, c: r * g.cols + c  # noqa: E731
    for r in range(g.rows):
        for c in range(g.cols):
            if c + 1 < g.cols:
                edges.add((idx(r, c), idx(r, c + 1)))
            if r + 1 < g.rows:
                edges.add((idx(r, c), idx(r + 1, c)))
            if g.topology == "triangular" and r + 1 < g.rows and c + 1 < g.cols:
                edges.add((idx(r, c), idx(r + 1, c + 1)))
    return sorted(edges)


def _two_site(n: int, i: int, j: int, a: str, b: str) -> str:
    chars = ["I"] * n
    chars[i] = a
    chars[j] = b
    return "".join(chars)


def build_ising(g: GridSpec, p: ModelParams = ModelParams()) -> Hamiltonian:
    """Transverse-field Ising: ``J sum_edges Z_i Z_j + h sum_sites X_i``."""
    n = g.sites
    terms = []
    if p.J:
        terms += [PauliTerm(p.J, _two_site(n, i, j, "Z", "Z")) for i, j in grid_edges(g)]
    if p.h:
        terms += [PauliTerm.from_sparse(p.h, {i: "X"}, n) for i in range(n)]
    return Hamiltonian(n, tuple(terms))


def build_heisenberg(g: GridSpec, p: ModelParams = ModelParams()) -> Hamiltonian:
    """Isotropic Heisenberg: ``J sum_edges (X_i X_j + Y_i Y_j + Z_i Z_j)``."""
    n = g.sites
    terms = []
    for i, j in grid_edges(g):
        for a in "XYZ":
            terms.append(PauliTerm(p.J, _two_site(n, i, j, a, a)))
    return Hamiltonian(n, tuple(terms))


def _hopping(n: int, p: int, q: int, coeff: float) -> list[PauliTerm]:
    # c_p^dag c_q + h.c. = (X_p Z..Z X_q + Y_p Z..Z Y_q) / 2 for p < q
    p, q = min(p, q), max(p, q)
    out = []
    for a in "XY":
        chars = ["I"] * n
        chars[p] = a
        chars[q] = a
        for k in range(p + 1, q):
            chars[k] = "Z"
        out.append(PauliTerm(coeff / 2, "".join(chars)))
    return out


def build_fermi_hubbard(g: GridSpec, p: ModelParams = ModelParams()) -> Hamiltonian:
    """Jordan-Wigner Fermi-Hubbard on ``2 * sites`` qubits.

    ``H = -t sum_<ij>,s (c_is^dag c_js + h.c.) + U sum_i n_i,up n_i,down``.
    The identity part of ``U n n = U/4 (I - Z_a)(I - Z_b)`` is kept in
    ``Hamiltonian.offset``.
    """
    n = 2 * g.sites
    terms: list[PauliTerm] = []
    offset = 0.0
    if p.t_hop:
        for i, j in grid_edges(g):
            for spin in (0, 1):
                terms += _hopping(n, 2 * i + spin, 2 * j + spin, -p.t_hop)
    if p.U:
        for s in range(g.sites):
            a, b = 2 * s, 2 * s + 1
            terms.append(PauliTerm.from_sparse(-p.U / 4, {a: "Z"}, n))
            terms.append(PauliTerm.from_sparse(-p.U / 4, {b: "Z"}, n))
            terms.append(PauliTerm.from_sparse(p.U / 4, {a: "Z", b: "Z"}, n))
            offset += p.U / 4
    return Hamiltonian(n, tuple(terms), offset)


BUILDERS = {
    "ising": build_ising,
    "heisenberg": build_heisenberg,
    "fh": build_fermi_hubbard,
}


def build_model(name: str, g: GridSpec, p: ModelParams = ModelParams()) -> Hamiltonian:
    try:
        return BUILDERS[name](g, p)
    except KeyError:
        raise ValueError(f"unknown model {name!r}; expected one of {sorted(BUILDERS)}") from None


def hamiltonian_to_dict(h: Hamiltonian) -> dict:
    terms = [{"coeff": t.coefficient, "pauli": t.paulis} for t in h.terms]
    if h.offset:
        terms.append({"coeff": h.offset, "pauli": "I" * h.n})
    return {"num_qubits": h.n, "terms": terms}


def hamiltonian_from_dict(data: object) -> Hamiltonian:
    if not isinstance(data, dict):
        raise HamiltonianFormatError("top level must be a JSON object")
    if "num_qubits" not in data or "terms" not in data:
        raise HamiltonianFormatError("missing 'num_qubits' or 'terms'")
    n = data["num_qubits"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 0:
        raise HamiltonianFormatError(f"'num_qubits' must be a non-negative integer, got {n!r}")
    if not isinstance(data["terms"], list):
        raise HamiltonianFormatError("'terms' must be an array")
    terms = []
    for i, item in enumerate(data["terms"]):
        if not isinstance(item, dict) or "coeff" not in item or "pauli" not in item:
            raise HamiltonianFormatError(f"term {i}: expected an object with 'coeff' and 'pauli'")
        coeff, label = item["coeff"], item["pauli"]
        if isinstance(coeff, bool) or not isinstance(coeff, (int, float)):
            raise HamiltonianFormatError(f"term {i}: coefficient must be a real number, got {coeff!r}")
        if not isinstance(label, str):
            raise HamiltonianFormatError(f"term {i}: 'pauli' must be a string")
        if len(label) != n:
            raise HamiltonianFormatError(f"term {i}: Pauli string {label!r} has length {len(label)}, expected {n}")
        try:
            terms.append(PauliTerm(float(coeff), label))
        except ValueError as exc:
            raise HamiltonianFormatError(f"term {i}: {exc}") from None
    return Hamiltonian(n, tuple(terms))


def save_hamiltonian(h: Hamiltonian, path: str | Path) -> None:
    Path(path).write_text(json.dumps(hamiltonian_to_dict(h), indent=1) + "\n")


def load_hamiltonian(path: str | Path) -> Hamiltonian:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise HamiltonianFormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    try:
        return hamiltonian_from_dict(data)
    except HamiltonianFormatError as exc:
        raise HamiltonianFormatError(f"{path}: {exc}") from None
