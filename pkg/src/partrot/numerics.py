"""Dense complex linear algebra shared by the scheduler and the synthesizers.

Matrices are numpy ``complex128`` arrays whose dimension is a power of two.
Qubit 0 is the most significant bit of a row/column index.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve

DENSE_LIMIT = 12


class DenseLimitError(ValueError):
    pass


class NonFiniteResidualError(ArithmeticError):
    pass


def num_qubits(m: np.ndarray) -> int:
    dim = m.shape[0]
    k = dim.bit_length() - 1
    if m.ndim != 2 or m.shape[1] != dim or (1 << k) != dim:
        raise ValueError(f"expected a square matrix of power-of-two size, got shape {m.shape}")
    return k


def expm_i_hermitian(h: np.ndarray, t: float, tol: float = 1e-10) -> np.ndarray:
    """``exp(i t H)`` for Hermitian ``H`` via its eigendecomposition."""
    h = np.asarray(h, dtype=complex)
    if h.shape[0] > (1 << DENSE_LIMIT):
        raise DenseLimitError("matrix exceeds the dense limit")
    if np.linalg.norm(h - h.conj().T) >= tol:
        raise ValueError("expm_i_hermitian requires a Hermitian input")
    if t == 0:
        return np.eye(h.shape[0], dtype=complex)
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * t * w)) @ v.conj().T


def spectral_norm(m: np.ndarray) -> float:
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def frobenius_norm(m: np.ndarray) -> float:
    return float(np.linalg.norm(m))


def phase_align(approx: np.ndarray, target: np.ndarray) -> np.ndarray:
    """``approx`` times the unit phase minimizing its Frobenius distance to ``target``."""
    ov = np.vdot(approx, target)
    if abs(ov) < 1e-300:
        return approx
    return approx * (ov / abs(ov))


def _min_phase_spectral_unitary(approx: np.ndarray, target: np.ndarray) -> float:
    # ||e^{ia} A - U|| = max_j |e^{ia} l_j - 1| over eigenvalues l_j of the
    # normal matrix U^dag A; the best a centres the arc of eigenphases.
    w = target.conj().T @ approx
    tr = np.trace(w)
    if abs(tr) > 1e-300:
        w = w * (abs(tr) / tr)
        dim = w.shape[0]
        if frobenius_norm(w - np.eye(dim)) < 1.41:
            # every eigenphase lies in (-pi/2, pi/2): sin is monotone there and
            # the Hermitian matrix (W - W^dag) / 2i has eigenvalues sin(phase)
            s = np.linalg.eigvalsh((w - w.conj().T) / 2j)
            ang = np.arcsin(np.clip(s, -1.0, 1.0))
            return float(2 * np.sin((ang[-1] - ang[0]) / 4))
    angles = np.sort(np.angle(np.linalg.eigvals(w)))
    gaps = np.diff(np.concatenate([angles, angles[:1] + 2 * np.pi]))
    half_arc = (2 * np.pi - gaps.max()) / 2
    return float(2 * np.sin(min(half_arc, np.pi) / 2))


def phase_aligned_distance(approx: np.ndarray, target: np.ndarray) -> tuple[float, float]:
    """(spectral, Frobenius) distance minimized over a global phase.

    Each norm is minimized over its own phase.  For two unitaries the
    spectral minimum is exact; otherwise the Frobenius-optimal phase is used
    for both.
    """
    diff = phase_align(approx, target) - target
    frob = frobenius_norm(diff)
    if is_unitary(approx, 1e-8) and is_unitary(target, 1e-8):
        spec = _min_phase_spectral_unitary(approx, target)
    else:
        spec = spectral_norm(diff)
    return spec, frob


def apply_local(m: np.ndarray, u: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    """Left-multiply ``m`` (``2**n`` rows) by ``u`` acting on ``qubits``.

    ``qubits[0]`` is ``u``'s leftmost tensor factor.  Cost is linear in the
    size of ``m`` instead of forming the full embedding.
    """
    k = len(qubits)
    cols = m.shape[1]
    t = m.reshape((2,) * n + (cols,))
    ut = u.reshape((2,) * (2 * k))
    out = np.tensordot(ut, t, axes=(list(range(k, 2 * k)), list(qubits)))
    # tensordot puts the k new axes first; move them back into place.
    rest = [a for a in range(n) if a not in qubits]
    order = [0] * n
    for i, q in enumerate(qubits):
        order[q] = i
    for j, q in enumerate(rest):
        order[q] = k + j
    out = np.transpose(out, order + [n])
    return np.ascontiguousarray(out).reshape(1 << n, cols)


def embed(u: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    """``u`` on ``qubits`` tensored with identity on the remaining qubits of ``n``."""
    if n > DENSE_LIMIT:
        raise DenseLimitError(f"{n} qubits exceeds the dense limit of {DENSE_LIMIT}")
    k = len(qubits)
    if u.shape != (1 << k, 1 << k):
        raise ValueError(f"matrix of shape {u.shape} does not act on {k} qubits")
    if len(set(qubits)) != k or any(not 0 <= q < n for q in qubits):
        raise ValueError(f"invalid qubit list {list(qubits)} for {n} qubits")
    return apply_local(np.eye(1 << n, dtype=complex), np.asarray(u, dtype=complex), qubits, n)


def is_unitary(u: np.ndarray, tol: float = 1e-10) -> bool:
    return bool(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0])) < tol)


@dataclass
class LSQOptions:
    max_iters: int = 200
    target: float = 0.0
    step_tol: float = 1e-12
    mu0: float = 0.0
    mu_min: float = 1e-12
    mu_max: float = 1e12
    # Stop when the residual fails to drop by this fraction over ``stall_window`` accepted steps.
    stall_rtol: float = 0.0
    stall_window: int = 20


@dataclass
class LSQResult:
    x: np.ndarray
    residual_norm: float
    iterations: int
    status: str


def damped_least_squares(
    residual: Callable[[np.ndarray], np.ndarray],
    jacobian: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    opts: LSQOptions | None = None,
) -> LSQResult:
    """Levenberg-damped Gauss-Newton on ``||r(x)||_2``.

    Each step solves ``(J^T J + mu I) dx = -J^T r``.  ``mu = 0`` is a plain
    Gauss-Newton step (minimum-norm least squares).  ``mu`` grows tenfold on
    a rejected step and shrinks tenfold on an accepted one.
    """
    opts = opts or LSQOptions()
    x = np.array(x0, dtype=float, copy=True)
    r = residual(x)
    if not np.all(np.isfinite(r)):
        raise NonFiniteResidualError("residual is non-finite at the starting point")
    cost = float(np.linalg.norm(r))
    if x.size == 0:
        return LSQResult(x, cost, 0, "no-parameters")
    mu = opts.mu0
    history = [cost]
    it = 0
    status = "max-iters"
    while it < opts.max_iters:
        if cost <= opts.target:
            status = "target"
            break
        it += 1
        jac = jacobian(x)
        g = jac.T @ r
        a = jac.T @ jac
        accepted = False
        while True:
            if mu == 0.0:
                dx = np.linalg.lstsq(jac, -r, rcond=None)[0]
            else:
                a_d = a + mu * np.eye(a.shape[0])
                try:
                    dx = -cho_solve(cho_factor(a_d, check_finite=False), g, check_finite=False)
                except np.linalg.LinAlgError:
                    dx = np.linalg.lstsq(a_d, -g, rcond=None)[0]
            x_new = x + dx
            r_new = residual(x_new)
            finite = np.all(np.isfinite(r_new))
            cost_new = float(np.linalg.norm(r_new)) if finite else math.inf
            if cost_new < cost:
                accepted = True
                break
            if float(np.linalg.norm(dx)) < opts.step_tol * (1.0 + float(np.linalg.norm(x))):
                break
            mu = opts.mu_min if mu == 0.0 else mu * 10.0
            if mu > opts.mu_max:
                break
        if not accepted:
            status = "stalled" if mu <= opts.mu_max else "max-damping"
            break
        step = float(np.linalg.norm(dx))
        x, r, cost = x_new, r_new, cost_new
        mu = mu / 10.0
        if mu < opts.mu_min:
            mu = 0.0 if opts.mu0 == 0.0 else opts.mu_min
        history.append(cost)
        if step < opts.step_tol * (1.0 + float(np.linalg.norm(x))):
            status = "small-step"
            break
        if opts.stall_rtol > 0 and len(history) > opts.stall_window:
            old = history[-1 - opts.stall_window]
            if cost > opts.target and old - cost < opts.stall_rtol * old:
                status = "stalled"
                break
    if cost <= opts.target:
        status = "target"
    return LSQResult(x, cost, it, status)
