"""End-to-end pipelines: GKP shot counts, cat amplification, Wigner witness,
single-photon and bunching error tables."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Sequence

import numpy as np
from scipy.special import comb

from . import fock
from .errors import InputError, ToleranceError
from .qpd import (bell_cat_ket, bell_cat_norm, build_bell_cat, build_fock_k,
                  build_single_photon_eps, fock_k_bound, fock_k_success_bound,
                  photon_eps_distance, random_walk_norm, reconstruct, validate)
from .serialization import csv_text


def field_names(cls) -> list[str]:
    return [f.name for f in fields(cls)]


def to_csv(rows: Sequence) -> str:
    if not rows:
        raise InputError("no rows to write")
    names = field_names(type(rows[0]))
    return csv_text(names, [[getattr(r, n) for n in names] for r in rows])


# -- GKP -------------------------------------------------------------------

@dataclass(frozen=True)
class GkpBenchRow:
    L: int
    r: float
    N_exact: float
    N_approx: float
    gamma_bar: float
    shots_ck: float
    shots_rw: float
    ratio: float
    stirling: float


def gkp_row(L: int, r: float) -> GkpBenchRow:
    N = random_walk_norm(L, r)
    shots_ck = 16.0 ** L / N ** 2
    shots_rw = 2.0 ** L
    return GkpBenchRow(L, float(r), N, float(comb(2 * L, L, exact=True)), 4.0 ** L / N,
                       shots_ck, shots_rw, shots_ck / shots_rw, math.pi * L * 2.0 ** -L)


def gkp_shot_analysis(L_max: int, r: float) -> list[GkpBenchRow]:
    """Shot counts of circuit knitting vs random walk for ``L = 1..L_max``."""
    if int(L_max) != L_max or L_max < 1:
        raise InputError("L_max must be an integer >= 1")
    return [gkp_row(L, r) for L in range(1, int(L_max) + 1)]


GKP_FIGURE_HEADER = ["series", "r", "L", "additional_shots"]


def gkp_figure_rows(L_max: int = 10, rs: Sequence[float] = (0.1, 1.0)) -> list[list]:
    """Long-format data for the shot-count figure: the random-walk curve
    ``2^L`` and one circuit-knitting curve ``16^L / N^2`` per squeezing."""
    rows = [["rw", None, L, 2.0 ** L] for L in range(1, L_max + 1)]
    for r in rs:
        rows += [["ck", float(r), row.L, row.shots_ck] for row in gkp_shot_analysis(L_max, r)]
    return rows


# -- cat amplification -----------------------------------------------------

def bell_cat_overhead(alpha: complex, theta: float) -> float:
    """``3 / (1 + cos(theta) e^{-4|alpha|^2})``."""
    return 6 / bell_cat_norm(alpha, theta)


@dataclass(frozen=True)
class CatAmpRound:
    """One amplification round.

    ``gamma_exact`` is the cumulative overhead of producing the round-``l``
    output when the cats fed into the round are themselves simulated with the
    previous round's overhead; ``gamma_round`` is the single-round overhead
    with ideal input cats; ``gamma_recursion = 1 + 2 gamma_exact[l-1]^2``.
    """

    round: int
    alpha: float
    gamma_exact: float
    gamma_recursion: float | None
    rel_gap: float | None
    gamma_round: float
    gamma_round_product: float
    fidelity_check: float | None


def distillation_fidelity(alpha: complex, theta: float, D: int | None = None,
                          rho: np.ndarray | None = None) -> float:
    """``<0, Cat(s a, -s a, theta)| U rho U^dag |0, Cat(...)>`` with ``s = sqrt 2``,
    ``U`` the balanced beam splitter and ``rho`` the two-mode Bell-cat state
    (by default the reconstruction of its decomposition)."""
    alpha = complex(alpha)
    D = D or fock.default_cutoff(math.sqrt(2) * abs(alpha))
    if rho is None:
        rho = reconstruct(build_bell_cat(alpha, theta), D)
    U = fock.interferometer_unitary(2, ("balanced", 0, 1), D)
    s2 = math.sqrt(2) * alpha
    t = np.kron(fock.fock_state(0, D), fock.cat_state(s2, -s2, theta, D))
    Ut = U.conj().T @ t
    return float(np.real(np.vdot(Ut, rho @ Ut)))


def cat_amplify_round(alpha: complex, theta: float, D: int | None = None) -> CatAmpRound:
    """One round: Bell-cat decomposition, beam splitter, factorization check."""
    alpha = complex(alpha)
    D = D or fock.default_cutoff(math.sqrt(2) * abs(alpha))
    q = build_bell_cat(alpha, theta)
    rho = reconstruct(q, D)
    ket = bell_cat_ket(alpha, theta, D)
    gap = fock.trace_norm(rho - fock.as_density(ket))
    if gap > 1e-8:
        raise ToleranceError(f"Bell-cat reconstruction off by {gap:.3e} at cutoff {D}")
    fid = distillation_fidelity(alpha, theta, D, rho)
    g = bell_cat_overhead(alpha, theta)
    return CatAmpRound(0, abs(alpha), g, None, None, g, g, fid)


def cat_amp_plan(alpha0: complex, theta: float, rounds: int,
                 check_fidelity: bool = False, D: int | None = None) -> list[CatAmpRound]:
    """Overheads of ``rounds`` successive amplification rounds.

    Round ``l`` acts on cats of amplitude ``2^{l/2} alpha0``; its terms are two
    coherent products (weight 1) and eight cat products of total weight 4,
    each cat costing the previous round's overhead, over ``N_Phi``:
    ``G_l = (2 + 4 G_{l-1}^2) / N_Phi(alpha_l)`` with ``G_{-1} = 1``.
    """
    if int(rounds) != rounds or rounds < 1:
        raise InputError("rounds must be an integer >= 1")
    alpha0 = complex(alpha0)
    out = []
    prev, prod = 1.0, 1.0
    for l in range(int(rounds)):
        a = alpha0 * 2 ** (l / 2)
        NPhi = bell_cat_norm(a, theta)
        build_bell_cat(a, theta)  # raises on degenerate branches
        g = (2 + 4 * prev ** 2) / NPhi
        g_round = 6 / NPhi
        prod *= g_round
        rec = 1 + 2 * prev ** 2 if l > 0 else None
        gap = abs(rec - g) / g if rec is not None else None
        fid = distillation_fidelity(a, theta, D) if check_fidelity else None
        if not math.isfinite(g):
            raise InputError(f"overhead overflows at round {l}")
        out.append(CatAmpRound(l, abs(a), g, rec, gap, g_round, prod, fid))
        prev = g
    return out


def catamp_figure_rows(alphas: Sequence[float] = (0.1, 0.5, 1.0), theta: float = 0.0,
                       rounds: int = 5) -> list[CatAmpRound]:
    rows = []
    for a in alphas:
        rows += cat_amp_plan(a, theta, rounds)
    return rows


CATAMP_FIGURE_HEADER = ["alpha0", "theta"] + field_names(CatAmpRound)


def catamp_figure_csv(alphas: Sequence[float] = (0.1, 0.5, 1.0), theta: float = 0.0,
                      rounds: int = 5) -> str:
    names = field_names(CatAmpRound)
    data = []
    for a in alphas:
        for row in cat_amp_plan(a, theta, rounds):
            data.append([float(a), float(theta)] + [getattr(row, n) for n in names])
    return csv_text(CATAMP_FIGURE_HEADER, data)


# -- Wigner witness --------------------------------------------------------

def polar_grid(r_max: float = 6.0, n_r: int = 200, n_phi: int = 64):
    r = np.linspace(0.0, r_max, n_r)
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    return r[:, None] * np.cos(phi), r[:, None] * np.sin(phi)


def min_wigner(rho: np.ndarray, r_max: float = 6.0, n_r: int = 200, n_phi: int = 64) -> float:
    q, p = polar_grid(r_max, n_r, n_phi)
    return float(np.min(fock.wigner_at(rho, q, p)))


def mixed_one_vacuum(p: float) -> np.ndarray:
    """``(1 - p)|1><1| + p|0><0|``."""
    return np.diag([p, 1 - p]).astype(complex)


def wigner_threshold(r_max: float = 6.0, n_r: int = 200, n_phi: int = 64,
                     xtol: float = 1e-12) -> float:
    """Smallest ``p`` with ``W >= 0`` for ``(1-p)|1><1| + p|0><0|`` on a polar
    grid, by bisection. The minimum sits at the origin where
    ``W = (2p - 1)/pi``, so the answer is ``1/2``."""
    q, p = polar_grid(r_max, n_r, n_phi)
    W1 = fock.wigner_at(mixed_one_vacuum(0.0), q, p)
    W0 = fock.wigner_at(mixed_one_vacuum(1.0), q, p)

    def positive(x):
        return np.min((1 - x) * W1 + x * W0) >= 0

    lo, hi = 0.0, 1.0
    if positive(lo):
        return lo
    while hi - lo > xtol:
        mid = (lo + hi) / 2
        if positive(mid):
            hi = mid
        else:
            lo = mid
    return hi


def wigner_normalization(rho: np.ndarray, half_width: float = 8.0, n: int = 321) -> float:
    """``int W dq dp`` by the trapezoid rule on a square grid."""
    x = np.linspace(-half_width, half_width, n)
    W = fock.wigner_at(rho, x[:, None], x[None, :])
    return float(np.trapezoid(np.trapezoid(W, x, axis=1), x))


# -- single photon and bunching --------------------------------------------

@dataclass(frozen=True)
class PhotonEpsRow:
    eps: float
    gamma_bar: float
    trace_distance: float
    closed_form: float
    below_eps: bool


def single_photon_error_curve(eps_list: Sequence[float], D: int | None = None) -> list[PhotonEpsRow]:
    rows = []
    for e in eps_list:
        q = build_single_photon_eps(e)
        Dq = D or max(q.default_cutoff(), fock.poisson_cutoff(e, 1e-16))
        rep = validate(q, D=Dq)
        rows.append(PhotonEpsRow(float(e), q.gamma_bar, rep.trace_distance,
                                 photon_eps_distance(e), rep.trace_distance < e))
    return rows


@dataclass(frozen=True)
class BunchingRow:
    k: int
    delta: float
    success_weight: float
    success_bound: float
    trace_distance: float
    bound: float


def fock_bunching_report(k: int, delta: float, D: int | None = None) -> BunchingRow:
    q = build_fock_k(k, delta, D)
    rep = validate(q, D=D or q.info.get("cutoff"))
    S = q.info.get("success_weight", 1.0)
    return BunchingRow(int(k), float(delta), S, fock_k_success_bound(k, delta),
                       rep.trace_distance, fock_k_bound(k, delta))
