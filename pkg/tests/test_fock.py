import math

import numpy as np
import pytest

import oracles
from cvknit import fock
from cvknit.errors import (DegeneracyError, InputError, ResourceError, ToleranceError,
                           TruncationError)
from cvknit.gaussian import GaussianPure, gaussian_overlap


# -- constructors ----------------------------------------------------------

def test_fock_state_basis():
    assert np.array_equal(fock.fock_state(0, 4), [1, 0, 0, 0])
    assert np.array_equal(fock.fock_state(3, 4), [0, 0, 0, 1])
    with pytest.raises(InputError):
        fock.fock_state(5, 4)


def test_coherent_vacuum_and_closed_form():
    assert np.allclose(fock.coherent_state(0, 10), fock.fock_state(0, 10))
    v = fock.coherent_state(1.0, 40)
    assert v[0] == pytest.approx(0.6065306597126334, abs=1e-15)
    assert np.allclose(v, oracles.coherent_amp(1.0, 40), atol=1e-14)
    assert abs(np.vdot(v, v) - 1) < 1e-12


def test_coherent_truncation_error_suggests_cutoff():
    with pytest.raises(TruncationError) as err:
        fock.coherent_state(3.0, 10)
    assert err.value.suggested_cutoff > 10


def test_displaced_squeezed_identity_and_parity():
    assert np.allclose(fock.displaced_squeezed_state(0, 0, 8), fock.fock_state(0, 8))
    v = fock.displaced_squeezed_state(0, 0.6, 60)
    assert np.all(v[1::2] == 0) or np.max(np.abs(v[1::2])) < 1e-15


def test_squeezed_vacuum_closed_form():
    for zeta in (0.4, 0.8 * np.exp(0.7j)):
        v = fock.displaced_squeezed_state(0, zeta, 60)
        assert np.max(np.abs(v - oracles.squeezed_vacuum_amp(zeta, 60))) < 1e-10


def test_squeeze_matrix_on_vacuum_closed_form():
    S = fock.gaussian_unitary_matrix("squeeze", 0.5, 50)
    assert np.max(np.abs(S[:, 0] - oracles.squeezed_vacuum_amp(0.5, 50))) < 1e-10


def test_displaced_squeezed_overlap_matches_closed_form():
    a, b = GaussianPure(0.4 - 0.3j, 0.3), GaussianPure(-0.2 + 0.5j, 0.5 * np.exp(1j))
    D = 80
    u = fock.displaced_squeezed_state(a.alpha, a.zeta, D)
    v = fock.displaced_squeezed_state(b.alpha, b.zeta, D)
    assert abs(fock.overlap(u, v) - gaussian_overlap(a, b)) < 1e-10


def test_cat_state():
    assert np.allclose(fock.cat_state(0, 0, 0, 6), fock.fock_state(0, 6))
    assert fock.cat_norm(0, 0, 0) == pytest.approx(4)
    odd = fock.cat_state(1.1, -1.1, math.pi, 40)
    assert np.max(np.abs(odd[0::2])) < 1e-12
    v = fock.cat_state(2, -2, 0, 40)
    assert abs(np.linalg.norm(v) - 1) < 1e-10
    assert np.allclose(v, oracles.cat_ket(2, -2, 0, 40), atol=1e-10)


def test_degenerate_cat_raises():
    with pytest.raises(DegeneracyError):
        fock.cat_state(0.5, 0.5, math.pi, 20)


def test_tail_mass_monotone_in_cutoff():
    tails = [fock.coherent_tail_mass(2.0, D) for D in range(5, 40)]
    assert all(b <= a for a, b in zip(tails, tails[1:]))


# -- operators -------------------------------------------------------------

def test_ladder_matrix():
    a = fock.ladder_matrix(6)
    assert np.allclose(a @ fock.fock_state(0, 6), 0)
    assert a[1, 2] == pytest.approx(math.sqrt(2))
    comm = a @ a.conj().T - a.conj().T @ a
    assert np.allclose(np.diag(comm)[:-1], 1)
    assert np.allclose(comm - np.diag(np.diag(comm)), 0)
    assert np.diag(comm)[-1] == pytest.approx(-5)


def test_displacement_identity_and_on_vacuum():
    assert np.allclose(fock.gaussian_unitary_matrix("displacement", 0, 10), np.eye(10))
    for alpha in (0.5, 1.5 - 1j, 3.0):
        Dm = fock.displacement_matrix(alpha, 60)
        assert np.max(np.abs(Dm[:, 0] - oracles.coherent_amp(alpha, 60))) < 1e-10


def test_displacement_laguerre_elements():
    alpha = 0.8 + 0.4j
    Dm = fock.displacement_matrix(alpha, 20)
    ref = np.array([[oracles.displacement_element(m, n, alpha) for n in range(20)] for m in range(20)])
    assert np.max(np.abs(Dm - ref)) < 1e-12


def test_expectation():
    rho = fock.as_density(fock.coherent_state(1.3, 50))
    assert fock.expectation(np.eye(50), rho) == pytest.approx(np.trace(rho))
    assert fock.expectation(fock.number_matrix(50), rho).real == pytest.approx(1.69, abs=1e-8)
    assert fock.expectation(fock.number_matrix(5), fock.as_density(fock.fock_state(3, 5))) == pytest.approx(3)


def test_overlap():
    assert fock.overlap(fock.fock_state(2, 5), fock.fock_state(2, 5)) == 1
    assert fock.overlap(fock.fock_state(0, 5), fock.fock_state(1, 5)) == 0
    a, b = 0.7 + 0.2j, -0.4 + 0.9j
    got = fock.overlap(fock.coherent_state(a, 40), fock.coherent_state(b, 40))
    assert abs(got - oracles.coherent_overlap(a, b)) < 1e-10
    with pytest.raises(InputError):
        fock.overlap(np.ones(3), np.ones(4))


# -- interferometers -------------------------------------------------------

def test_fourier_single_mode_identity():
    U = fock.interferometer_unitary(1, "fourier", 6).toarray()
    assert np.allclose(U, np.eye(6))


def test_balanced_pair_single_photon():
    D = 4
    U = fock.interferometer_unitary(2, ("balanced", 0, 1), D)
    out = U @ np.kron(fock.fock_state(1, D), fock.fock_state(0, D))
    N = fock.total_photon_number(2, D)
    assert np.allclose(out[N != 1], 0)
    assert abs(out[1 * D + 0]) ** 2 == pytest.approx(0.5)
    assert abs(out[0 * D + 1]) ** 2 == pytest.approx(0.5)


def test_hong_ou_mandel():
    # |1,1> -> (|0,2> - |2,0>)/sqrt(2) for the documented mode matrix
    D = 4
    U = fock.interferometer_unitary(2, ("balanced", 0, 1), D)
    out = U @ np.kron(fock.fock_state(1, D), fock.fock_state(1, D))
    ref = np.zeros(D * D, dtype=complex)
    ref[0 * D + 2] = 1 / math.sqrt(2)
    ref[2 * D + 0] = -1 / math.sqrt(2)
    assert np.allclose(out, ref, atol=1e-12)


def test_fourier_maps_coherent_products():
    D = 30
    alpha = np.array([0.6 + 0.2j, -0.3 + 0.5j])
    U = fock.interferometer_unitary(2, "fourier", D)
    out = U @ np.kron(fock.coherent_state(alpha[0], D), fock.coherent_state(alpha[1], D))
    beta = fock.fourier_transform(2) @ alpha
    ref = np.kron(oracles.coherent_amp(beta[0], D), oracles.coherent_amp(beta[1], D))
    assert abs(abs(np.vdot(ref, out)) ** 2 - 1) < 1e-10


def test_interferometer_block_structure_and_unitarity():
    D, k = 5, 3
    U = fock.interferometer_unitary(k, "fourier", D).toarray()
    N = fock.total_photon_number(k, D)
    assert np.all(U[N[:, None] != N[None, :]] == 0)
    low = N < D
    Ul = U[np.ix_(low, low)]
    assert np.allclose(Ul.conj().T @ Ul, np.eye(low.sum()), atol=1e-12)


def test_interferometer_resource_error():
    with pytest.raises(ResourceError):
        fock.interferometer_unitary(6, "fourier", 40)


# -- norms, tensor, partial trace ------------------------------------------

def test_trace_norm_examples():
    rho = fock.as_density(fock.coherent_state(0.5, 10))
    assert fock.trace_norm(rho - rho) == 0
    P0 = fock.as_density(fock.fock_state(0, 3))
    P1 = fock.as_density(fock.fock_state(1, 3))
    assert fock.trace_norm(P0 - P1) == pytest.approx(2)
    with pytest.raises(ToleranceError):
        fock.trace_norm(np.array([[0, 1], [0, 0]], dtype=complex))


def test_trace_norm_matches_svd(rng):
    A = rng.normal(size=(7, 7)) + 1j * rng.normal(size=(7, 7))
    H = A + A.conj().T
    assert fock.trace_norm(H) == pytest.approx(oracles.trace_norm_svd(H), rel=1e-12)


def test_partial_trace_of_product():
    psi = fock.as_density(fock.coherent_state(0.3, 8))
    phi = fock.as_density(fock.fock_state(2, 8))
    rho = fock.tensor(psi, phi)
    assert np.allclose(fock.partial_trace(rho, [0], 2), psi)
    assert np.allclose(fock.partial_trace(rho, [1], 2), phi)
    assert abs(np.trace(fock.partial_trace(rho, [0], 2)) - np.trace(rho)) < 1e-12
    with pytest.raises(InputError):
        fock.partial_trace(rho, [], 2)
    with pytest.raises(InputError):
        fock.partial_trace(rho, [2], 2)


def test_two_mode_squeezed_reduced_state_is_thermal():
    r, D = 0.5, 40
    lam = oracles.tms_schmidt(r, D)
    psi = np.zeros(D * D)
    psi[np.arange(D) * D + np.arange(D)] = lam
    red = fock.partial_trace(fock.as_density(psi), [1], 2)
    n = np.arange(D)
    assert np.allclose(red, np.diag(math.tanh(r) ** (2 * n) / math.cosh(r) ** 2), atol=1e-14)


# -- Wigner ----------------------------------------------------------------

def test_wigner_origin_values():
    assert fock.wigner_at(fock.as_density(fock.fock_state(0, 3)), 0, 0) == pytest.approx(1 / math.pi)
    assert fock.wigner_at(fock.as_density(fock.fock_state(1, 3)), 0, 0) == pytest.approx(-1 / math.pi)
    assert fock.wigner_at(np.diag([0.5, 0.5]), 0, 0) == pytest.approx(0, abs=1e-15)


def test_wigner_against_closed_forms():
    q, p = np.meshgrid(np.linspace(-3, 3, 13), np.linspace(-3, 3, 13))
    assert np.allclose(fock.wigner_at(fock.as_density(fock.fock_state(1, 4)), q, p),
                       oracles.fock1_wigner(q, p), atol=1e-13)
    alpha = 0.7 - 0.4j
    W = fock.wigner_at(fock.as_density(fock.coherent_state(alpha, 40)), q, p)
    assert np.allclose(W, oracles.coherent_wigner(alpha, q, p), atol=1e-10)


def test_short_squeezed_vector_is_exact_truncation():
    # a cutoff far below the natural one still gives exact leading amplitudes
    v = fock.displaced_squeezed_state(0, 1.0, 40, tol=None)
    assert np.max(np.abs(v - oracles.squeezed_vacuum_amp(1.0, 40))) < 1e-14
