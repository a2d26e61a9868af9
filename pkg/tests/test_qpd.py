import json
import math

import numpy as np
import pytest
from scipy.special import comb

import oracles
from cvknit import fock
from cvknit.errors import DegeneracyError, InputError
from cvknit.gaussian import GaussianPure, gaussian_overlap
from cvknit.qpd import (C2Grid, Qpd, Target, bell_cat_norm, build_bell_cat, build_c2,
                        build_fock_k, build_g2, build_gkp, build_single_photon_eps,
                        bunching_map, bunching_map_diagonal, fock_k_bound,
                        fock_k_success_bound, make_qpd, photon_eps_distance, qpd_from_json,
                        qpd_to_json, reconstruct, validate)
from cvknit.serialization import stable_dumps
from cvknit.states import Coherent, DisplacedSqueezed, Fock, FockDiagonal, GaussianSuperposition


def even_cat_spec(alpha):
    N = 2 + 2 * math.exp(-2 * abs(alpha) ** 2)
    c = 1 / math.sqrt(N)
    return GaussianSuperposition(((c, GaussianPure(alpha)), (c, GaussianPure(-alpha))))


def three_squeezed_spec():
    gs = [GaussianPure(0.5, 0.3), GaussianPure(-0.4 + 0.3j, 0.2j), GaussianPure(0.1j, -0.25)]
    c = np.array([0.7, 0.5 * np.exp(1.1j), -0.4])
    return GaussianSuperposition(tuple(zip(c, gs))).normalized()


# -- G2 --------------------------------------------------------------------

def test_g2_single_term():
    q = build_g2(GaussianSuperposition(((1.0, GaussianPure(0.3, 0.1)),)))
    assert len(q) == 1 and q.gamma_bar == 1 and q.weights[0] == 1


def test_g2_even_cat():
    alpha = 1.2
    q = build_g2(even_cat_spec(alpha))
    N = 2 + 2 * math.exp(-2 * alpha ** 2)
    assert q.gamma_bar == pytest.approx(4 / N, abs=1e-12)
    assert q.weight_sum == pytest.approx(1, abs=1e-12)
    rho = reconstruct(q, 40)
    assert fock.trace_norm(rho - fock.as_density(oracles.cat_ket(alpha, -alpha, 0, 40))) < 1e-9
    assert build_g2(even_cat_spec(4.0)).gamma_bar == pytest.approx(2, abs=1e-12)


def test_g2_three_term_squeezed():
    spec = three_squeezed_spec()
    q = build_g2(spec)
    assert q.gamma_bar == pytest.approx(np.sum(np.abs(spec.coeffs)) ** 2, abs=1e-10)
    assert q.weight_sum == pytest.approx(1, abs=1e-10)
    rep = validate(q, D=40)
    assert rep.trace_distance < 1e-9


def test_g2_rejects_unnormalized_and_degenerate():
    with pytest.raises(InputError):
        build_g2(GaussianSuperposition(((1.0, GaussianPure(0.5)), (1.0, GaussianPure(-0.5)))))
    g = GaussianPure(0.3)
    with pytest.raises(DegeneracyError):
        build_g2(GaussianSuperposition(((0.5, g), (0.5, g))))


# -- C2 --------------------------------------------------------------------

def test_c2_single_photon():
    q = build_c2(Fock(1))
    assert q.gamma_bar == pytest.approx(oracles.radial_l1_fock1() ** 2, rel=0.02)
    assert q.gamma_bar == pytest.approx(2 * math.pi, rel=0.02)
    assert q.weight_sum == pytest.approx(1, abs=0.01)
    assert q.info["l1_integral"] == pytest.approx(math.sqrt(2 * math.pi), rel=0.01)


def test_c2_coherent():
    q = build_c2(Coherent(0.5))
    assert q.gamma_bar == pytest.approx(oracles.radial_l1_coherent() ** 2, rel=0.02)
    assert q.weight_sum == pytest.approx(1, abs=0.01)


def test_c2_small_radius_raises():
    with pytest.raises(InputError, match="too small"):
        build_c2(Fock(1), C2Grid(radius=1.0))


def test_c2_coarse_reconstruction_is_consistent():
    # on a coarse grid the reconstruction still has trace equal to the weight sum
    q = build_c2(Fock(0), C2Grid(dr=0.5, tail_tol=1e-2))
    rho = reconstruct(q, 50)
    assert np.trace(rho).real == pytest.approx(q.weight_sum, abs=1e-9)


# -- single photon ---------------------------------------------------------

def test_single_photon_overheads():
    assert build_single_photon_eps(math.log(2)).gamma_bar == pytest.approx(3, abs=1e-12)
    assert build_single_photon_eps(0.1).gamma_bar == pytest.approx(20.0166, abs=1e-4)
    with pytest.raises(InputError):
        build_single_photon_eps(0.0)


@pytest.mark.parametrize("eps", [0.01, 0.1, 0.5])
def test_single_photon_distance(eps):
    q = build_single_photon_eps(eps)
    rep = validate(q, target=Fock(1), D=30)
    assert rep.trace_distance == pytest.approx(oracles.photon_eps_distance(eps), abs=1e-9)
    assert rep.trace_distance < eps
    assert rep.epsilon_promise_satisfied
    assert photon_eps_distance(eps) == pytest.approx(oracles.photon_eps_distance(eps), rel=1e-12)


# -- Fock k ----------------------------------------------------------------

def test_fock_k1_is_single_photon():
    a, b = build_fock_k(1, 0.2), build_single_photon_eps(0.2)
    assert np.array_equal(a.weights, b.weights) and a.states == b.states


def test_bunching_ideal_input():
    D = 4
    one = fock.as_density(fock.fock_state(1, D))
    out = bunching_map(fock.tensor(one, one), 2, D)
    ref = np.zeros((D, D))
    ref[2, 2] = 0.5
    assert np.max(np.abs(out - ref)) < 1e-10


def test_bunching_diagonal_matches_general():
    D = 6
    pops = [oracles.poisson(0.3, D), np.eye(D)[1]]
    rho = fock.tensor(np.diag(pops[0]).astype(complex), np.diag(pops[1]).astype(complex))
    assert np.allclose(bunching_map(rho, 2, D), np.diag(bunching_map_diagonal(pops, D)), atol=1e-12)


def test_fock_k2_bound():
    k, delta = 2, 0.05
    q = build_fock_k(k, delta)
    rep = validate(q)
    eps2 = 3 * (k - k * math.exp(-delta)) ** k / (2 * math.factorial(k) * delta ** k * math.exp(-k * delta)) * k * delta
    assert fock_k_bound(k, delta) == pytest.approx(eps2, rel=1e-12)
    assert rep.trace_distance <= eps2
    assert q.info["success_weight"] >= fock_k_success_bound(k, delta)
    g = build_fock_k(k, delta, method="general")
    assert np.allclose(reconstruct(g, q.info["cutoff"]), reconstruct(q, q.info["cutoff"]), atol=1e-12)


def test_fock_k_bound_too_loose():
    with pytest.raises(InputError, match="decrease delta"):
        build_fock_k(3, 0.5)


# -- Bell cat --------------------------------------------------------------

def test_bell_cat_overhead_and_reconstruction():
    q = build_bell_cat(1.0, 0.0)
    assert q.gamma_bar == pytest.approx(3 / (1 + math.exp(-4)), abs=1e-12)
    assert q.gamma_bar == pytest.approx(2.9460, abs=1e-4)
    assert q.weight_sum == pytest.approx(1, abs=1e-12)
    rho = reconstruct(q, 25)
    assert fock.trace_norm(rho - oracles.bell_cat_density(1.0, 0.0, 25)) < 1e-9
    assert build_bell_cat(4.0, 0.0).gamma_bar == pytest.approx(3, abs=1e-12)
    assert bell_cat_norm(1.0, 0.0) == pytest.approx(2 * (1 + math.exp(-4)))


def test_bell_cat_complex_alpha_theta():
    alpha, theta = 0.6 * np.exp(0.5j), 1.3
    q = build_bell_cat(alpha, theta)
    rho = reconstruct(q, 25)
    assert fock.trace_norm(rho - oracles.bell_cat_density(alpha, theta, 25)) < 1e-9


def test_bell_cat_degenerate():
    with pytest.raises(DegeneracyError):
        build_bell_cat(0.0, math.pi)


# -- GKP -------------------------------------------------------------------

def test_gkp_single_peak():
    assert build_gkp(None, 0.5, walk_steps=0).gamma_bar == pytest.approx(1)


def test_gkp_random_walk_l2():
    q = build_gkp(None, 1.0, walk_steps=2)
    assert q.gamma_bar == pytest.approx(16 / comb(4, 2), rel=0.01)
    N = oracles.gkp_norm_by_quadrature(2, 1.0)
    assert q.info["N_exact"] == pytest.approx(N, rel=1e-8)
    assert q.gamma_bar == pytest.approx(16 / N, rel=1e-8)


def test_gkp_large_r_limit():
    q = build_gkp(None, 2.5, walk_steps=3)
    assert q.info["N_exact"] == pytest.approx(comb(6, 3), rel=1e-9)
    assert q.gamma_bar == pytest.approx(64 / comb(6, 3), rel=1e-9)


def test_gkp_general_matches_direct_overlap():
    coeffs, r = [1.0, 2.0, 0.5], 0.7
    q = build_gkp(coeffs, r)
    gs = [GaussianPure(2 * n * math.sqrt(math.pi / 2), r) for n in range(3)]
    N = sum(coeffs[i] * coeffs[j] * gaussian_overlap(gs[i], gs[j]).real for i in range(3) for j in range(3))
    assert q.gamma_bar == pytest.approx(sum(coeffs) ** 2 / N, rel=1e-10)
    with pytest.raises(InputError):
        build_gkp([1.0, -1.0], r)


# -- reconstruct / validate / json -----------------------------------------

def test_reconstruct_single_term_and_trace():
    q = make_qpd([1.0], [Coherent(0.3)], Target("coherent"))
    assert np.allclose(reconstruct(q, 20), Coherent(0.3).density(20))
    q2 = make_qpd([1.5, -0.7], [Fock(0), Fock(2)], Target("signed"))
    assert np.trace(reconstruct(q2, 5)).real == pytest.approx(0.8, abs=1e-12)


def test_make_qpd_prunes_and_accounts():
    q = make_qpd([1.0, 1e-16, 0.0], [Fock(0), Fock(1), Fock(2)], Target("x"))
    assert len(q) == 1 and q.pruned_abs_weight == pytest.approx(1e-16)


def test_qpd_is_immutable():
    q = build_single_photon_eps(0.1)
    with pytest.raises(ValueError):
        q.weights[0] = 2.0


def test_qpd_validation_errors():
    with pytest.raises(InputError):
        Qpd(np.array([1.0]), (Fock(0), Fock(1)), Target("x"))
    with pytest.raises(InputError):
        Qpd(np.array([1.0, np.nan]), (Fock(0), Fock(1)), Target("x"))


@pytest.mark.parametrize("builder", [
    lambda: build_single_photon_eps(0.1),
    lambda: build_bell_cat(0.7, 0.4),
    lambda: build_g2(three_squeezed_spec()),
    lambda: build_fock_k(2, 0.05),
    lambda: build_gkp(None, 0.8, walk_steps=2),
])
def test_qpd_json_round_trip(builder):
    q = builder()
    doc = qpd_to_json(q)
    back = qpd_from_json(json.loads(stable_dumps(doc)))
    assert np.array_equal(back.weights, q.weights)
    assert list(back.states) == list(q.states)
    assert back.gamma_bar == q.gamma_bar
    assert stable_dumps(qpd_to_json(back)) == stable_dumps(doc)


def test_qpd_json_rejects_tampered_gamma():
    doc = qpd_to_json(build_single_photon_eps(0.1))
    doc["gamma_bar"] = 1.0
    with pytest.raises(InputError):
        qpd_from_json(doc)


def test_validate_report_fields():
    rep = validate(build_bell_cat(0.5, 0.0), target=oracles.bell_cat_density(0.5, 0.0, 20), D=20)
    d = rep.to_json()
    for key in ("trace_distance", "weight_sum", "gamma_bar", "epsilon_promise_satisfied"):
        assert key in d
    assert rep.trace_distance < 1e-9 and rep.epsilon_promise_satisfied


def test_fock_diagonal_target():
    q = make_qpd([1.0], [FockDiagonal((0.5, 0.5))], Target("mix"))
    assert validate(q, target=np.diag([0.5, 0.5, 0.0]).astype(complex), D=3).trace_distance < 1e-15


def test_displaced_squeezed_state_term():
    s = DisplacedSqueezed(0.2, 0.1)
    q = make_qpd([1.0], [s], Target("g", s))
    assert validate(q, D=30).trace_distance < 1e-12
