"""Fitting single-qubit parameters of a fixed CNOT skeleton to a target unitary.

The cost is the Frobenius distance ``min_a ||e^{ia} C(theta) - U||_F``.  The
phase is eliminated in closed form (``a = arg tr(C^dag U)``) and the residual
is the phase-aligned difference matrix split into real and imaginary parts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .circuit import CNOT, U3, Circuit
from .numerics import LSQOptions, damped_least_squares


@dataclass(frozen=True)
class Ansatz:
    """A CNOT skeleton on ``k`` qubits with a U3 after every wire touch."""

    k: int
    cnots: tuple[tuple[int, int], ...] = ()

    @property
    def num_u3(self) -> int:
        return self.k + 2 * len(self.cnots)

    @property
    def num_params(self) -> int:
        return 3 * self.num_u3

    def array(self) -> np.ndarray:
        return np.array(self.cnots, dtype=np.int32).reshape(-1, 2)

    def unitary(self, params: np.ndarray) -> np.ndarray:
        return kernels.ansatz_unitary(self.k, self.array(), params)

    def jacobian(self, params: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return kernels.ansatz_jacobian(self.k, self.array(), params)

    def circuit(self, params: np.ndarray, phase: float = 0.0) -> Circuit:
        p = np.asarray(params, dtype=float).reshape(-1, 3)
        qs = kernels.u3_qubits(self.k, self.array())
        gates: list = [U3(int(qs[i]), *map(float, p[i])) for i in range(self.k)]
        for l, (c, t) in enumerate(self.cnots):
            i = self.k + 2 * l
            gates.append(CNOT(c, t))
            gates.append(U3(c, *map(float, p[i])))
            gates.append(U3(t, *map(float, p[i + 1])))
        return Circuit(self.k, tuple(gates), phase)


def _align(c: np.ndarray, target: np.ndarray) -> tuple[complex, complex]:
    ov = np.vdot(c, target)
    mag = abs(ov)
    ph = ov / mag if mag > 1e-300 else 1.0 + 0j
    return ov, ph


def aligned_error(c: np.ndarray, target: np.ndarray) -> tuple[float, float]:
    """(Frobenius error, optimal phase angle) of ``c`` against ``target``."""
    _, ph = _align(c, target)
    return float(np.linalg.norm(ph * c - target)), math.atan2(ph.imag, ph.real)


class _Problem:
    def __init__(self, ansatz: Ansatz, target: np.ndarray):
        self.ansatz = ansatz
        self.target = np.asarray(target, dtype=complex)

    def residual(self, x: np.ndarray) -> np.ndarray:
        c = self.ansatz.unitary(x)
        _, ph = _align(c, self.target)
        d = (ph * c - self.target).ravel()
        return np.concatenate([d.real, d.imag])

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        c, dc = self.ansatz.jacobian(x)
        ov, ph = _align(c, self.target)
        u = self.target
        flat = dc.reshape(dc.shape[0], -1)
        # d(arg ov)/dx_j = Im(tr(dC_j^dag U) / ov)
        dov = flat.conj() @ u.ravel()
        dalpha = (dov / ov).imag if abs(ov) > 1e-300 else np.zeros(len(flat))
        cols = ph * (flat + 1j * dalpha[:, None] * c.ravel()[None, :])
        return np.concatenate([cols.real, cols.imag], axis=1).T

    def jacobian_fd(self, x: np.ndarray, h: float = 1e-6) -> np.ndarray:
        cols = []
        for j in range(len(x)):
            e = np.zeros_like(x)
            e[j] = h
            cols.append((self.residual(x + e) - self.residual(x - e)) / (2 * h))
        return np.stack(cols, axis=1)


@dataclass
class FitResult:
    params: np.ndarray
    error: float
    phase: float
    iterations: int
    status: str


def gauss_newton_fit(
    ansatz: Ansatz,
    target: np.ndarray,
    init: np.ndarray,
    *,
    max_iters: int = 200,
    target_error: float = 1e-10,
    jacobian: str = "analytic",
    mu0: float = 1e-6,
) -> FitResult:
    """Minimize ``min_a ||e^{ia} C(theta) - U||_F`` from ``init`` with damped Gauss-Newton."""
    prob = _Problem(ansatz, target)
    jac = prob.jacobian if jacobian == "analytic" else prob.jacobian_fd
    opts = LSQOptions(max_iters=max_iters, target=target_error, mu0=mu0, mu_min=1e-15, stall_rtol=1e-3, stall_window=15)
    res = damped_least_squares(prob.residual, jac, np.asarray(init, dtype=float), opts)
    c = ansatz.unitary(res.x)
    err, phase = aligned_error(c, prob.target)
    return FitResult(res.x, err, phase, res.iterations, res.status)


def fit_restarts(
    ansatz: Ansatz,
    target: np.ndarray,
    rng: np.random.Generator,
    *,
    restarts: int = 10,
    max_iters: int = 200,
    epsilon: float = 1e-8,
    jacobian: str = "analytic",
    warm: Sequence[np.ndarray] = (),
) -> FitResult:
    """Best of ``restarts`` random initializations; stops early below ``epsilon``.

    ``warm`` starting points are tried before the random ones.
    """
    best: FitResult | None = None
    inits = [np.asarray(w, dtype=float) for w in warm]
    inits += [rng.uniform(0, 2 * math.pi, ansatz.num_params) for _ in range(restarts)]
    for x0 in inits:
        try:
            r = gauss_newton_fit(ansatz, target, x0, max_iters=max_iters, target_error=epsilon * 1e-3, jacobian=jacobian)
        except ArithmeticError:
            r = FitResult(x0, math.inf, 0.0, 0, "diverged")
        if not math.isfinite(r.error):
            r.error = math.inf
        if best is None or r.error < best.error:
            best = r
        if best.error < epsilon:
            break
    assert best is not None
    return best
