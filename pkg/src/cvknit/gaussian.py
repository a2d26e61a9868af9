"""Closed-form Gaussian analytics and the separability-overhead bound.

Phase-space ordering is ``(Q1, P1, Q2, P2, ...)`` with symplectic form
``Omega = (+)_M [[0, 1], [-1, 0]]``. Covariance matrices use the anticommutator
without the factor 1/2, so the vacuum has ``Lambda = I`` and the purity of a
Gaussian state is ``1/sqrt(det Lambda)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import InputError


@dataclass(frozen=True)
class GaussianPure:
    """Single-mode pure Gaussian ``D(alpha) S(zeta)|0>``."""

    alpha: complex = 0j
    zeta: complex = 0j


def _bargmann(g: GaussianPure):
    """Write ``g`` as ``pref * exp(A a^dag^2 / 2 + B a^dag)|0>``."""
    alpha, zeta = complex(g.alpha), complex(g.zeta)
    r, phi = abs(zeta), cmath.phase(zeta)
    A = -cmath.exp(1j * phi) * math.tanh(r)
    B = alpha - A * alpha.conjugate()
    log_pref = -abs(alpha) ** 2 / 2 + A * alpha.conjugate() ** 2 / 2 - 0.5 * math.log(math.cosh(r))
    return A, B, log_pref


def gaussian_overlap(g1: GaussianPure, g2: GaussianPure) -> complex:
    """``<g1|g2>`` for two displaced squeezed vacua, in closed form."""
    A1, B1, p1 = _bargmann(g1)
    A2, B2, p2 = _bargmann(g2)
    A1c, B1c = A1.conjugate(), B1.conjugate()
    det = 1 - A1c * A2
    expo = (B1c ** 2 * A2 + B2 ** 2 * A1c + 2 * B1c * B2) / (2 * det)
    return cmath.exp(p1.conjugate() + p2 + expo) / cmath.sqrt(det)


def gram_matrix(gs: Sequence[GaussianPure]) -> np.ndarray:
    n = len(gs)
    G = np.empty((n, n), dtype=complex)
    for i in range(n):
        G[i, i] = 1.0
        for j in range(i + 1, n):
            G[i, j] = gaussian_overlap(gs[i], gs[j])
            G[j, i] = G[i, j].conjugate()
    return G


def superposition_norm2(coeffs: Sequence[complex], gs: Sequence[GaussianPure]) -> float:
    """``<psi|psi>`` of ``sum_x c_x |g_x>`` from pairwise overlaps."""
    c = np.asarray(coeffs, dtype=complex)
    return float(np.real(c.conj() @ gram_matrix(gs) @ c))


# -- symplectic / covariance ----------------------------------------------

def omega(M: int) -> np.ndarray:
    return np.kron(np.eye(M), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def is_symplectic(S: np.ndarray, tol: float = 1e-10) -> bool:
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape[0] % 2:
        return False
    Om = omega(S.shape[0] // 2)
    return bool(np.max(np.abs(S @ Om @ S.T - Om)) < tol)


def check_symplectic(S: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    S = np.asarray(S, dtype=float)
    if not is_symplectic(S, tol):
        raise InputError("matrix is not symplectic")
    return S


def check_covariance(L: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    L = np.asarray(L, dtype=float)
    if L.ndim != 2 or L.shape[0] != L.shape[1] or L.shape[0] % 2:
        raise InputError("covariance matrix must be square with even size")
    if np.max(np.abs(L - L.T)) > 1e-12 * max(1.0, np.max(np.abs(L))):
        raise InputError("covariance matrix is not symmetric")
    # uncertainty relation Lambda + i Omega >= 0
    ev = np.linalg.eigvalsh(L + 1j * omega(L.shape[0] // 2))
    if ev.min() < -tol * max(1.0, np.max(np.abs(L))):
        raise InputError("covariance matrix violates the uncertainty relation")
    return L


def two_mode_squeezed_cov(r: float) -> np.ndarray:
    c, s = math.cosh(2 * r), math.sinh(2 * r)
    return np.array([
        [c, 0, -s, 0],
        [0, c, 0, s],
        [-s, 0, c, 0],
        [0, s, 0, c],
    ])


def balanced_pair_symplectic(M: int, i: int, j: int) -> np.ndarray:
    """Symplectic matrix of the 50:50 beam splitter with mode matrix
    ``[[1, -1], [1, 1]]/sqrt(2)`` on modes ``(i, j)``."""
    if not (0 <= i < M and 0 <= j < M) or i == j:
        raise InputError(f"invalid mode pair ({i}, {j}) for {M} modes")
    W = np.eye(M)
    s = 1 / math.sqrt(2)
    W[i, i], W[i, j], W[j, i], W[j, j] = s, -s, s, s
    return np.kron(W, np.eye(2))


def squeeze_symplectic(M: int, r: float, mode: int) -> np.ndarray:
    """Single-mode squeezer: ``Q -> e^{-r} Q``, ``P -> e^{r} P`` on ``mode``."""
    if not 0 <= mode < M:
        raise InputError(f"mode {mode} out of range for {M} modes")
    S = np.eye(2 * M)
    S[2 * mode, 2 * mode] = math.exp(-r)
    S[2 * mode + 1, 2 * mode + 1] = math.exp(r)
    return S


def direct_sum(*blocks: np.ndarray) -> np.ndarray:
    return scipy.linalg.block_diag(*[np.asarray(b, dtype=float) for b in blocks])


def make_symplectic(kind: str, *args) -> np.ndarray:
    """Build a symplectic matrix.

    ``make_symplectic("balanced-pair", M, i, j)``,
    ``make_symplectic("single-mode-squeeze", M, r, mode)`` or
    ``make_symplectic("direct-sum", [S1, S2, ...])``.
    """
    if kind == "balanced-pair":
        return balanced_pair_symplectic(*args)
    if kind == "single-mode-squeeze":
        return squeeze_symplectic(*args)
    if kind == "direct-sum":
        (blocks,) = args
        return direct_sum(*[check_symplectic(b) for b in blocks])
    raise InputError(f"unknown symplectic kind {kind!r}")


def random_symplectic(M: int, rng: np.random.Generator, scale: float = 0.5) -> np.ndarray:
    """``expm(Omega H)`` for a random symmetric ``H``."""
    H = rng.normal(scale=scale, size=(2 * M, 2 * M))
    H = (H + H.T) / 2
    return scipy.linalg.expm(omega(M) @ H)


def apply_symplectic(S: np.ndarray, L: np.ndarray) -> np.ndarray:
    S, L = np.asarray(S, dtype=float), np.asarray(L, dtype=float)
    if S.shape != L.shape:
        raise InputError(f"dimension mismatch: {S.shape} vs {L.shape}")
    return S @ L @ S.T


def split_blocks(S: np.ndarray, Ma: int, Mb: int):
    S = np.asarray(S, dtype=float)
    if S.shape != (2 * (Ma + Mb),) * 2:
        raise InputError(f"symplectic matrix must be {2 * (Ma + Mb)}x{2 * (Ma + Mb)}")
    a = 2 * Ma
    return S[:a, :a], S[:a, a:], S[a:, :a], S[a:, a:]


def reduced_cov_after(S: np.ndarray, r: float, Ma: int, Mb: int) -> np.ndarray:
    """Covariance of the last ``Mb`` modes after ``S`` acts on
    ``cosh(2r) I_{2Ma} (+) I_{2Mb}`` (thermal halves of two-mode squeezed
    pairs followed by vacua)."""
    _, _, S10, S11 = split_blocks(S, Ma, Mb)
    return math.cosh(2 * r) * S10 @ S10.T + S11 @ S11.T


def reduced_cov_pipeline(S: np.ndarray, r: float, Ma: int, Mb: int) -> np.ndarray:
    """Same quantity as :func:`reduced_cov_after`, by full transform then restriction."""
    L_in = direct_sum(math.cosh(2 * r) * np.eye(2 * Ma), np.eye(2 * Mb))
    return apply_symplectic(S, L_in)[2 * Ma:, 2 * Ma:]


def purity_from_cov(L: np.ndarray) -> float:
    d = float(np.linalg.det(L))
    if d <= 0:
        raise InputError(f"invalid covariance matrix (det = {d:.3e})")
    return 1 / math.sqrt(d)


def sep_lb_from_cov(La: np.ndarray) -> float:
    """Lower bound ``2 sqrt(det La) - 1`` on the separable overhead of a pure
    bipartite Gaussian state with reduced covariance ``La``."""
    return 2 / purity_from_cov(La) - 1


# -- Schmidt route ---------------------------------------------------------

def schmidt_coeffs(psi: np.ndarray, dims: tuple[int, int] | None = None) -> np.ndarray:
    """Schmidt coefficients of a bipartite pure state, descending.

    ``psi`` is a ket of length ``dA * dB``; without ``dims`` an equal split is
    assumed.
    """
    psi = np.asarray(psi)
    if psi.ndim != 1:
        raise InputError("schmidt_coeffs needs a pure state (ket), not a density matrix")
    if dims is None:
        d = int(round(math.sqrt(psi.size)))
        if d * d != psi.size:
            raise InputError("cannot infer bipartition; pass dims")
        dims = (d, d)
    s = np.linalg.svd(psi.reshape(dims), compute_uv=False)
    return np.sort(s)[::-1]


def sep_overhead_schmidt(s: Sequence[float]) -> float:
    """``2 (sum s)^2 - 1``."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise InputError("Schmidt coefficients must be nonnegative")
    return float(2 * np.sum(s) ** 2 - 1)


# -- no-go scan ------------------------------------------------------------

@dataclass(frozen=True)
class NogoScan:
    r: tuple[float, ...]
    bound: tuple[float, ...]
    constant: bool
    increasing: bool
    exceeds_threshold: bool
    threshold: float

    @property
    def verdict(self) -> str:
        if self.constant:
            return "local"
        if self.increasing and self.exceeds_threshold:
            return "nonlocal"
        return "inconclusive"


def nogo_scan(S: np.ndarray, r_grid: Sequence[float], Ma: int, Mb: int,
              threshold: float = 1e3, rtol: float = 1e-10) -> NogoScan:
    """Evaluate ``2 sqrt(det reduced_cov_after(S, r)) - 1`` on ``r_grid``.

    A local ``S`` gives an r-independent sequence. A nonlocal ``S`` gives a
    strictly increasing sequence; "unbounded" means it crosses ``threshold``
    inside the grid.
    """
    S = check_symplectic(S)
    rs = tuple(float(r) for r in r_grid)
    bounds = tuple(sep_lb_from_cov(reduced_cov_after(S, r, Ma, Mb)) for r in rs)
    b = np.array(bounds)
    constant = bool(np.all(np.abs(b - b[0]) <= rtol * max(1.0, abs(b[0]))))
    increasing = bool(len(b) > 1 and np.all(np.diff(b) > 0))
    return NogoScan(rs, bounds, constant, increasing and not constant,
                    bool(np.max(b) > threshold), threshold)

