"""Pure-numpy ansatz kernels (fallback for the compiled ``_kernels`` module).

The ansatz on ``k`` qubits with CNOT list ``cnots`` (shape ``(L, 2)``) is the
gate sequence

    U3 on qubit 0, ..., U3 on qubit k-1,
    CX(c_0, t_0), U3 on c_0, U3 on t_0,
    ...
    CX(c_{L-1}, t_{L-1}), U3 on c_{L-1}, U3 on t_{L-1}

with parameters laid out as ``[theta, phi, lam]`` per U3 in that order.
"""
from __future__ import annotations

import numpy as np


def u3_qubits(k: int, cnots: np.ndarray) -> np.ndarray:
    qs = list(range(k))
    for c, t in cnots:
        qs.append(int(c))
        qs.append(int(t))
    return np.array(qs, dtype=np.int64)


def _u3_and_derivs(params: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    p = params.reshape(-1, 3)
    th, ph, la = p[:, 0], p[:, 1], p[:, 2]
    c, s = np.cos(th / 2), np.sin(th / 2)
    el, ep, epl = np.exp(1j * la), np.exp(1j * ph), np.exp(1j * (ph + la))
    m = len(p)
    u = np.empty((m, 2, 2), dtype=complex)
    u[:, 0, 0] = c
    u[:, 0, 1] = -el * s
    u[:, 1, 0] = ep * s
    u[:, 1, 1] = epl * c
    d = np.zeros((m, 3, 2, 2), dtype=complex)
    d[:, 0, 0, 0] = -s / 2
    d[:, 0, 0, 1] = -el * c / 2
    d[:, 0, 1, 0] = ep * c / 2
    d[:, 0, 1, 1] = -epl * s / 2
    d[:, 1, 1, 0] = 1j * ep * s
    d[:, 1, 1, 1] = 1j * epl * c
    d[:, 2, 0, 1] = -1j * el * s
    d[:, 2, 1, 1] = 1j * epl * c
    return u, d


def _left(m: np.ndarray, g: np.ndarray, q: int, k: int) -> np.ndarray:
    # rows of m viewed as (2^q, 2, 2^(k-q-1)); contract g on the middle axis
    d = m.shape[-1]
    t = m.reshape(m.shape[:-2] + (1 << q, 2, 1 << (k - q - 1), d))
    out = np.einsum("...ab,...xbyd->...xayd", g, t)
    return out.reshape(m.shape)


def _right(m: np.ndarray, g: np.ndarray, q: int, k: int) -> np.ndarray:
    d = m.shape[0]
    t = m.reshape(d, 1 << q, 2, 1 << (k - q - 1))
    out = np.einsum("rxay,ab->rxby", t, g)
    return out.reshape(m.shape)


def _cx_perm(k: int, c: int, t: int) -> np.ndarray:
    idx = np.arange(1 << k)
    cb, tb = 1 << (k - 1 - c), 1 << (k - 1 - t)
    return np.where(idx & cb, idx ^ tb, idx)


def ansatz_unitary(k: int, cnots: np.ndarray, params: np.ndarray) -> np.ndarray:
    cnots = np.asarray(cnots, dtype=np.int64).reshape(-1, 2)
    u, _ = _u3_and_derivs(np.asarray(params, dtype=float))
    m = np.eye(1 << k, dtype=complex)
    for q in range(k):
        m = _left(m, u[q], q, k)
    for l, (c, t) in enumerate(cnots):
        m = m[_cx_perm(k, int(c), int(t))]
        m = _left(m, u[k + 2 * l], int(c), k)
        m = _left(m, u[k + 2 * l + 1], int(t), k)
    return m


def ansatz_jacobian(k: int, cnots: np.ndarray, params: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(C, dC)`` with ``dC[j] = dC/dparams[j]``, shape ``(3m, d, d)``."""
    cnots = np.asarray(cnots, dtype=np.int64).reshape(-1, 2)
    u, du = _u3_and_derivs(np.asarray(params, dtype=float))
    qs = u3_qubits(k, cnots)
    nu = len(qs)
    dim = 1 << k
    perms = [_cx_perm(k, int(c), int(t)) for c, t in cnots]

    # sequence of ops: ("u", index) or ("cx", l)
    seq: list[tuple[str, int]] = [("u", q) for q in range(k)]
    for l in range(len(cnots)):
        seq += [("cx", l), ("u", k + 2 * l), ("u", k + 2 * l + 1)]

    before = np.empty((nu, dim, dim), dtype=complex)
    m = np.eye(dim, dtype=complex)
    for kind, i in seq:
        if kind == "u":
            before[i] = m
            m = _left(m, u[i], int(qs[i]), k)
        else:
            m = m[perms[i]]
    full = m

    after = np.empty((nu, dim, dim), dtype=complex)
    s = np.eye(dim, dtype=complex)
    for kind, i in reversed(seq):
        if kind == "u":
            after[i] = s
            s = _right(s, u[i], int(qs[i]), k)
        else:
            s = s[:, perms[i]]

    dc = np.empty((nu, 3, dim, dim), dtype=complex)
    for i in range(nu):
        x = _left(np.broadcast_to(before[i], (3, dim, dim)), du[i], int(qs[i]), k)
        dc[i] = after[i] @ x
    return full, dc.reshape(3 * nu, dim, dim)
