import csv
import io
import math

import numpy as np
import pytest

import oracles
from cvknit import applications as app
from cvknit import fock
from cvknit.errors import DegeneracyError, InputError


# -- GKP bench -------------------------------------------------------------

def test_gkp_rows_consistent():
    rows = app.gkp_shot_analysis(10, 1.0)
    assert [r.L for r in rows] == list(range(1, 11))
    for r in rows:
        assert r.ratio == r.shots_ck / r.shots_rw
        assert r.shots_ck == pytest.approx(16.0 ** r.L / r.N_exact ** 2, rel=1e-14)
        assert r.ratio == pytest.approx(8.0 ** r.L / r.N_exact ** 2, rel=1e-14)
        assert r.gamma_bar == pytest.approx(4.0 ** r.L / r.N_exact, rel=1e-14)
        assert r.stirling == pytest.approx(oracles.stirling_ratio(r.L))
        assert min(r.N_exact, r.gamma_bar, r.shots_ck, r.shots_rw, r.ratio) > 0


def test_gkp_approximate_norm_l1():
    row = app.gkp_row(1, 1.0)
    assert row.N_approx == 2
    assert 8 / row.N_approx ** 2 == 2


def test_gkp_exact_norm_matches_quadrature():
    row = app.gkp_row(3, 0.5)
    assert row.N_exact == pytest.approx(oracles.gkp_norm_by_quadrature(3, 0.5), rel=1e-8)


def test_gkp_ratio_below_one_and_stirling():
    rows = {r.L: r for r in app.gkp_shot_analysis(10, 1.0)}
    assert all(rows[L].ratio < 1 for L in range(4, 11))
    for L in range(6, 11):
        assert rows[L].ratio == pytest.approx(rows[L].stirling, rel=0.10)


def test_gkp_figure_curve_ordering():
    data = app.gkp_figure_rows(10, (0.1, 1.0))
    rw = {L: s for series, r, L, s in data if series == "rw"}
    ck01 = {L: s for series, r, L, s in data if series == "ck" and r == 0.1}
    ck1 = {L: s for series, r, L, s in data if series == "ck" and r == 1.0}
    assert set(rw) == set(ck01) == set(ck1) == set(range(1, 11))
    for L in rw:
        # a smaller squeezing gives larger peak overlaps, a larger N, fewer shots
        assert ck01[L] < ck1[L]
        assert rw[L] == 2.0 ** L


def test_gkp_bad_lmax():
    with pytest.raises(InputError):
        app.gkp_shot_analysis(0, 1.0)


# -- cat amplification -----------------------------------------------------

def test_cat_amplify_round():
    row = app.cat_amplify_round(1.0, 0.0, D=30)
    assert row.fidelity_check > 1 - 1e-9
    assert row.gamma_exact == pytest.approx(3 / (1 + math.exp(-4)), abs=1e-12)
    with pytest.raises(DegeneracyError):
        app.cat_amplify_round(0.0, math.pi, D=10)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
@pytest.mark.parametrize("theta", [0.0, math.pi / 2])
def test_distillation_fidelity(alpha, theta):
    D = fock.default_cutoff(math.sqrt(2) * alpha)
    rho = oracles.bell_cat_density(alpha, theta, D)
    assert app.distillation_fidelity(alpha, theta, D, rho) > 1 - 1e-9
    assert app.distillation_fidelity(alpha, theta, D) > 1 - 1e-9


def test_cat_plan_recursion_and_growth():
    plan = app.cat_amp_plan(1.0, 0.0, 5)
    assert plan[0].gamma_recursion is None
    assert plan[0].gamma_exact == app.cat_amplify_round(1.0, 0.0).gamma_exact
    for row in plan[1:]:
        assert row.rel_gap < 0.01
        assert row.gamma_recursion == pytest.approx(1 + 2 * plan[row.round - 1].gamma_exact ** 2)
    assert all(b.alpha == pytest.approx(math.sqrt(2) * a.alpha) for a, b in zip(plan, plan[1:]))
    small = app.cat_amp_plan(0.5, 0.0, 3)
    g = [r.gamma_exact for r in small]
    assert g[1] > g[0] ** 2 and g[2] > g[1] ** 2
    assert small[-1].gamma_round_product == pytest.approx(np.prod([r.gamma_round for r in small]))


@pytest.mark.parametrize("alpha0", [0.1, 0.5, 1.0, 2.0])
def test_cat_plan_strictly_increasing(alpha0):
    g = [r.gamma_exact for r in app.cat_amp_plan(alpha0, 0.0, 5)]
    assert all(b > a for a, b in zip(g, g[1:]))


def test_catamp_csv_schema():
    text = app.catamp_figure_csv()
    assert text.endswith("\r\n")
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == app.CATAMP_FIGURE_HEADER
    assert len(rows) == 1 + 3 * 5
    assert text == app.catamp_figure_csv()


# -- Wigner ----------------------------------------------------------------

def test_wigner_threshold():
    assert app.wigner_threshold() == pytest.approx(0.5, abs=1e-6)
    assert app.min_wigner(app.mixed_one_vacuum(0.6)) > 0
    assert app.min_wigner(app.mixed_one_vacuum(0.4)) < 0


def test_wigner_origin_is_minimum():
    rho = app.mixed_one_vacuum(0.3)
    q, p = app.polar_grid()
    W = fock.wigner_at(rho, q, p)
    assert W.min() == pytest.approx((2 * 0.3 - 1) / math.pi)


@pytest.mark.parametrize("rho", [
    fock.as_density(fock.fock_state(1, 4)),
    fock.as_density(fock.coherent_state(0.8 - 0.5j, 30)),
    fock.as_density(fock.cat_state(1.2, -1.2, 0.0, 30)),
], ids=["fock1", "coherent", "cat"])
def test_wigner_normalization(rho):
    assert app.wigner_normalization(rho) == pytest.approx(1, abs=1e-3)


# -- error tables ----------------------------------------------------------

def test_single_photon_error_curve():
    rows = app.single_photon_error_curve([0.01, 0.1, 0.5])
    for r in rows:
        assert r.trace_distance == pytest.approx(oracles.photon_eps_distance(r.eps), abs=1e-9)
        assert r.below_eps
    assert rows[1].trace_distance == pytest.approx(0.0983336, abs=1e-7)


def test_gamma_times_distance_decreasing():
    eps = np.linspace(0.02, 0.98, 25)
    rows = app.single_photon_error_curve(eps)
    prod = [r.gamma_bar * r.trace_distance for r in rows]
    assert all(b < a for a, b in zip(prod, prod[1:]))


def test_fock_bunching_report():
    row = app.fock_bunching_report(2, 0.05)
    assert row.success_weight >= row.success_bound
    assert row.trace_distance <= row.bound
    assert math.factorial(2) / 2 ** 2 == 0.5


def test_to_csv_header():
    text = app.to_csv(app.gkp_shot_analysis(2, 1.0))
    assert text.split("\r\n")[0] == ",".join(app.field_names(app.GkpBenchRow))
