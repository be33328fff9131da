"""OpenQASM 2.0 subset: one register, ``u3`` and ``cx`` only.

Emitted files carry a metrics comment so that readers can cross-check counts::

    OPENQASM 2.0;
    include "qelib1.inc";
    // cnot_count=2 u3_count=1 depth=3 global_phase=0.10000000000000001
    qreg q[2];
    cx q[0],q[1];
    u3(0,0,-0.20000000000000001) q[1];
    cx q[0],q[1];
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .circuit import CNOT, U3, Circuit, metrics


class QasmParseError(ValueError):
    pass


def _num(x: float) -> str:
    s = f"{x:.17g}"
    return "0" if s in ("0", "-0") else s


def emit_qasm(c: Circuit) -> str:
    m = metrics(c)
    lines = [
        "OPENQASM 2.0;",
        'include "qelib1.inc";',
        f"// cnot_count={m.cnot_count} u3_count={m.u3_count} depth={m.depth} global_phase={_num(c.phase)}",
        f"qreg q[{c.n}];",
    ]
    for g in c.gates:
        if isinstance(g, CNOT):
            lines.append(f"cx q[{g.control}],q[{g.target}];")
        else:
            lines.append(f"u3({_num(g.theta)},{_num(g.phi)},{_num(g.lam)}) q[{g.qubit}];")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ParsedQasm:
    circuit: Circuit
    declared: Optional[dict]


_HEADER_META = re.compile(r"//\s*cnot_count=(\d+)\s+u3_count=(\d+)\s+depth=(\d+)(?:\s+global_phase=(\S+))?")
_QREG = re.compile(r"qreg\s+(\w+)\s*\[\s*(\d+)\s*\]$")
_CX = re.compile(r"cx\s+(\w+)\s*\[\s*(\d+)\s*\]\s*,\s*(\w+)\s*\[\s*(\d+)\s*\]$")
_U3 = re.compile(r"u3\s*\(([^)]*)\)\s+(\w+)\s*\[\s*(\d+)\s*\]$")


def parse_qasm(text: str) -> ParsedQasm:
    """Parse the emitted subset; the metrics comment, if present, is returned as ``declared``."""
    n = None
    reg = None
    gates: list = []
    declared = None
    phase = 0.0
    saw_header = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("//"):
            m = _HEADER_META.match(line)
            if m:
                declared = {"cnot_count": int(m[1]), "u3_count": int(m[2]), "depth": int(m[3])}
                if m[4] is not None:
                    phase = float(m[4])
            continue
        line = line.split("//", 1)[0].strip()
        if not line.endswith(";"):
            raise QasmParseError(f"line {lineno}: missing ';'")
        stmt = line[:-1].strip()
        if stmt.startswith("OPENQASM"):
            if stmt.split()[-1] != "2.0":
                raise QasmParseError(f"line {lineno}: only OPENQASM 2.0 is supported")
            saw_header = True
            continue
        if stmt.startswith("include"):
            continue
        m = _QREG.match(stmt)
        if m:
            if n is not None:
                raise QasmParseError(f"line {lineno}: only one quantum register is supported")
            reg, n = m[1], int(m[2])
            continue
        if n is None:
            raise QasmParseError(f"line {lineno}: gate before qreg declaration")
        m = _CX.match(stmt)
        if m:
            if m[1] != reg or m[3] != reg:
                raise QasmParseError(f"line {lineno}: unknown register")
            a, b = int(m[2]), int(m[4])
            _check_qubit(a, n, lineno)
            _check_qubit(b, n, lineno)
            if a == b:
                raise QasmParseError(f"line {lineno}: cx control equals target")
            gates.append(CNOT(a, b))
            continue
        m = _U3.match(stmt)
        if m:
            if m[2] != reg:
                raise QasmParseError(f"line {lineno}: unknown register")
            try:
                angles = [float(x) for x in m[1].split(",")]
            except ValueError:
                raise QasmParseError(f"line {lineno}: angles must be numeric literals") from None
            if len(angles) != 3:
                raise QasmParseError(f"line {lineno}: u3 takes three angles")
            q = int(m[3])
            _check_qubit(q, n, lineno)
            gates.append(U3(q, *angles))
            continue
        raise QasmParseError(f"line {lineno}: unsupported statement {stmt!r}")
    if not saw_header:
        raise QasmParseError("missing 'OPENQASM 2.0;' header")
    if n is None:
        raise QasmParseError("missing qreg declaration")
    return ParsedQasm(Circuit(n, tuple(gates), phase), declared)


def _check_qubit(q: int, n: int, lineno: int) -> None:
    if q >= n:
        raise QasmParseError(f"line {lineno}: qubit {q} outside register of size {n}")
