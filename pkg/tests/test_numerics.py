import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from partrot.circuit import CNOT, Circuit, circuit_to_matrix
from partrot.numerics import (
    DenseLimitError,
    LSQOptions,
    NonFiniteResidualError,
    damped_least_squares,
    embed,
    expm_i_hermitian,
    frobenius_norm,
    phase_aligned_distance,
    spectral_norm,
)
from scipy.linalg import expm

X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)


def random_hermitian(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (a + a.conj().T) / 2


def random_unitary(rng, d):
    q, r = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return q * (np.diag(r) / abs(np.diag(r)))


def test_expm_examples():
    th = 0.37
    assert np.allclose(expm_i_hermitian(Z, th), np.diag([np.exp(1j * th), np.exp(-1j * th)]))
    assert np.allclose(expm_i_hermitian(X, 0.0), np.eye(2))
    assert np.allclose(expm_i_hermitian(X, math.pi / 2), 1j * X, atol=1e-12)


def test_expm_against_scipy(rng):
    for d in (2, 4, 8, 16):
        h = random_hermitian(rng, d)
        assert np.allclose(expm_i_hermitian(h, 0.7), expm(0.7j * h), atol=1e-10)


def test_expm_rejects_non_hermitian():
    with pytest.raises(ValueError):
        expm_i_hermitian(np.array([[0, 1], [0, 0]], dtype=complex), 1.0)


@given(st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 2**31))
def test_expm_inverse_and_additivity(t1, t2, seed):
    h = random_hermitian(np.random.default_rng(seed), 4)
    u1 = expm_i_hermitian(h, t1)
    assert np.allclose(u1 @ expm_i_hermitian(h, -t1), np.eye(4), atol=1e-10)
    assert np.allclose(u1 @ expm_i_hermitian(h, t2), expm_i_hermitian(h, t1 + t2), atol=1e-10)
    assert np.linalg.norm(u1.conj().T @ u1 - np.eye(4)) < 1e-10


def test_norm_examples(rng):
    assert spectral_norm(np.eye(4)) == pytest.approx(1.0)
    assert frobenius_norm(np.eye(4)) == pytest.approx(2.0)
    assert spectral_norm(np.zeros((4, 4))) == 0 and frobenius_norm(np.zeros((4, 4))) == 0
    u = rng.normal(size=4) + 1j * rng.normal(size=4)
    v = rng.normal(size=4) + 1j * rng.normal(size=4)
    m = np.outer(u / np.linalg.norm(u), (v / np.linalg.norm(v)).conj())
    assert spectral_norm(m) == pytest.approx(1.0) and frobenius_norm(m) == pytest.approx(1.0)


@given(st.integers(0, 2**31))
def test_spectral_norm_unitary_invariance(seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    u, v = random_unitary(rng, 8), random_unitary(rng, 8)
    assert abs(spectral_norm(u @ m @ v) - spectral_norm(m)) < 1e-10
    assert spectral_norm(m) <= frobenius_norm(m) + 1e-12


def test_embed_examples():
    assert np.allclose(embed(X, [0], 2), np.kron(X, np.eye(2)))
    u = random_unitary(np.random.default_rng(0), 8)
    assert np.allclose(embed(u, [0, 1, 2], 3), u)
    cx = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
    assert np.allclose(embed(cx, [1, 2], 3), circuit_to_matrix(Circuit(3, (CNOT(1, 2),))))


def test_embed_composes(rng):
    u = random_unitary(rng, 4)
    inner = embed(u, [1, 0], 2)
    assert np.allclose(embed(inner, [3, 1], 4), embed(u, [1, 3], 4))


def test_embed_limit():
    with pytest.raises(DenseLimitError):
        embed(X, [0], 13)


def test_phase_aligned_distance_ignores_phase(rng):
    u = random_unitary(rng, 8)
    spec, frob = phase_aligned_distance(np.exp(0.9j) * u, u)
    assert spec < 1e-12 and frob < 1e-12


@given(st.integers(0, 2**31), st.floats(0.001, 3.0))
def test_spectral_distance_is_phase_minimum(seed, s):
    rng = np.random.default_rng(seed)
    u = random_unitary(rng, 4)
    a = u @ expm_i_hermitian(random_hermitian(rng, 4), s)
    spec, _ = phase_aligned_distance(a, u)
    grid = min(spectral_norm(np.exp(1j * p) * a - u) for p in np.linspace(-np.pi, np.pi, 4001))
    assert spec <= grid + 1e-12
    assert grid - spec < 5e-3


def test_lsq_linear_one_step(rng):
    a = rng.normal(size=(8, 3))
    b = rng.normal(size=8)
    res = damped_least_squares(lambda x: a @ x - b, lambda x: a, np.zeros(3), LSQOptions(max_iters=1))
    assert np.allclose(res.x, np.linalg.lstsq(a, b, rcond=None)[0])


def test_lsq_rosenbrock():
    r = lambda x: np.array([10 * (x[1] - x[0] ** 2), 1 - x[0]])  # noqa: E731
    j = lambda x: np.array([[-20 * x[0], 10.0], [-1.0, 0.0]])  # noqa: E731
    res = damped_least_squares(r, j, np.array([-1.2, 1.0]), LSQOptions(max_iters=200, mu0=1e-3))
    assert res.residual_norm < 1e-8
    assert np.allclose(res.x, [1, 1], atol=1e-6)


def test_lsq_zero_parameters():
    res = damped_least_squares(lambda x: np.array([3.0, 4.0]), lambda x: np.zeros((2, 0)), np.zeros(0))
    assert res.residual_norm == 5.0 and res.x.size == 0


def test_lsq_nonfinite_start():
    with pytest.raises(NonFiniteResidualError):
        damped_least_squares(lambda x: np.array([np.nan]), lambda x: np.ones((1, 1)), np.zeros(1))
