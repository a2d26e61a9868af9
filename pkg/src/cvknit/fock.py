"""Truncated Fock-space kernel.

States are plain numpy arrays: a pure single-mode state is a complex vector of
length ``D`` (basis ``|0>..|D-1>``), a mixed state is a ``D x D`` complex
matrix. Multi-mode objects use the ``np.kron`` ordering, mode 0 being the most
significant index, so a ``M``-mode pure state is a vector of length ``D**M``.

Conventions (hbar = 1):
    Q = (a + a^dag)/sqrt(2),  P = (a - a^dag)/(i sqrt(2))
    D(alpha) = exp(alpha a^dag - alpha^* a)
    S(zeta)  = exp((zeta^* a^2 - zeta a^dag^2)/2)

With this squeezing sign a real ``zeta = r > 0`` scales the Q variance by
``exp(-2r)``.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.sparse
from scipy.sparse.linalg import expm_multiply
from scipy.special import eval_genlaguerre, gammainc, gammaln

from .errors import DegeneracyError, InputError, ResourceError, ToleranceError, TruncationError

TAIL_TOL = 1e-10
HERMITIAN_TOL = 1e-12
# cap on stored nonzeros for multi-mode interferometer matrices
MAX_NNZ = 50_000_000


def default_cutoff(alpha: complex = 0.0, zeta: complex = 0.0) -> int:
    """Heuristic cutoff ``ceil((|a| + 3|z|e^|z|)^2 + 6(|a|+1) + 10)``.

    For squeezed states the geometric ``tanh(r)^D`` photon tail is also
    covered, widened by the displacement margin.
    """
    a, z = abs(alpha), abs(zeta)
    D = int(math.ceil((a + 3 * z * math.exp(z)) ** 2 + 6 * (a + 1) + 10))
    if z > 0:
        sq = math.log(1e-12) / math.log(math.tanh(z))
        D = max(D, int(math.ceil(sq + (a * math.exp(z)) ** 2 + 6 * a * math.exp(z) + 10)))
    return D


def guard_cutoff(D: int, *params: complex) -> int:
    """Working cutoff used before cropping to ``D``."""
    return D + sum(int(math.ceil(8 * abs(x) ** 2)) for x in params) + 16


def tail_mass(vec: np.ndarray) -> float:
    """Probability missing from a (possibly truncated) pure state, clipped at 0."""
    return max(0.0, 1.0 - float(np.vdot(vec, vec).real))


def _check_tail(tail: float, tol: float | None, what: str, suggested: int | None = None):
    if tol is not None and tail > tol:
        raise TruncationError(
            f"{what}: tail mass {tail:.3e} exceeds tolerance {tol:.1e}"
            + (f"; try cutoff >= {suggested}" if suggested else ""),
            suggested_cutoff=suggested,
        )


def fock_state(n: int, D: int) -> np.ndarray:
    if D < 1:
        raise InputError(f"cutoff must be positive, got {D}")
    if not 0 <= n < D:
        raise InputError(f"photon number {n} out of range for cutoff {D}")
    v = np.zeros(D, dtype=complex)
    v[n] = 1.0
    return v


def coherent_amplitudes(alphas, D: int) -> np.ndarray:
    """Truncated coherent-state amplitudes for an array of ``alpha`` values.

    Returns an array of shape ``alphas.shape + (D,)``. No tail check.
    """
    alphas = np.asarray(alphas, dtype=complex)
    n = np.arange(D)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_mag = n * np.log(np.abs(alphas)[..., None]) - 0.5 * gammaln(n + 1)
    log_mag = np.where(np.isnan(log_mag), -np.inf, log_mag)
    log_mag[..., 0] = 0.0  # 0**0 = 1
    phase = np.exp(1j * n * np.angle(alphas)[..., None])
    return np.exp(log_mag - 0.5 * np.abs(alphas)[..., None] ** 2) * phase


def coherent_tail_mass(alpha: complex, D: int) -> float:
    """Exact Poisson tail ``P(N >= D)`` for a coherent state."""
    m = abs(alpha) ** 2
    return 0.0 if m == 0 else float(gammainc(D, m))


def poisson_cutoff(mean: float, tol: float = TAIL_TOL) -> int:
    """Smallest ``D`` with Poisson tail ``P(N >= D)`` below ``tol``."""
    D = 1
    while mean > 0 and gammainc(D, mean) > tol:
        D += 1
    return D


def coherent_state(alpha: complex, D: int, tol: float | None = TAIL_TOL) -> np.ndarray:
    v = coherent_amplitudes(alpha, D)
    _check_tail(coherent_tail_mass(alpha, D), tol, f"coherent state alpha={alpha}",
                poisson_cutoff(abs(alpha) ** 2, tol or TAIL_TOL))
    return v


def ladder_matrix(D: int) -> np.ndarray:
    """Annihilation operator with ``<n-1|a|n> = sqrt(n)``."""
    if D < 2:
        raise InputError("ladder matrix needs D >= 2")
    return np.diag(np.sqrt(np.arange(1, D, dtype=float)), k=1).astype(complex)


def number_matrix(D: int) -> np.ndarray:
    return np.diag(np.arange(D, dtype=float)).astype(complex)


def quadrature_matrix(D: int, which: str = "Q") -> np.ndarray:
    a = ladder_matrix(D)
    if which == "Q":
        return (a + a.conj().T) / math.sqrt(2)
    if which == "P":
        return (a - a.conj().T) / (1j * math.sqrt(2))
    raise InputError(f"unknown quadrature {which!r}")


def _crop_unitary(generator: np.ndarray, D: int, tol: float | None, what: str) -> np.ndarray:
    U = scipy.linalg.expm(generator)
    # leakage of the vacuum column out of the kept block
    leak = float(np.sum(np.abs(U[D:, 0]) ** 2))
    _check_tail(leak, tol, what)
    return U[:D, :D]


def displacement_matrix(alpha: complex, D: int, tol: float | None = TAIL_TOL) -> np.ndarray:
    Dg = guard_cutoff(D, alpha)
    a = ladder_matrix(Dg)
    G = alpha * a.conj().T - np.conj(alpha) * a
    return _crop_unitary(G, D, tol, f"displacement({alpha})")


def squeeze_matrix(zeta: complex, D: int, tol: float | None = TAIL_TOL) -> np.ndarray:
    Dg = guard_cutoff(D, zeta)
    a = ladder_matrix(Dg)
    ad = a.conj().T
    G = 0.5 * (np.conj(zeta) * a @ a - zeta * ad @ ad)
    return _crop_unitary(G, D, tol, f"squeeze({zeta})")


def gaussian_unitary_matrix(kind: str, param: complex, D: int,
                            tol: float | None = TAIL_TOL) -> np.ndarray:
    """Displacement or squeezing matrix built at a guard cutoff and cropped to ``D``.

    ``kind`` is ``"displacement"`` or ``"squeeze"``.
    """
    if kind == "displacement":
        return displacement_matrix(param, D, tol)
    if kind == "squeeze":
        return squeeze_matrix(param, D, tol)
    raise InputError(f"unknown Gaussian unitary kind {kind!r}")


@lru_cache(maxsize=512)
def _displaced_squeezed(alpha: complex, zeta: complex, D: int):
    # never below the natural cutoff, so short vectors are exact truncations
    Dg = max(guard_cutoff(D, alpha, zeta), default_cutoff(alpha, zeta) + 16)
    a = ladder_matrix(Dg)
    ad = a.conj().T
    vac = np.zeros(Dg, dtype=complex)
    vac[0] = 1.0
    v = vac
    if zeta != 0:
        v = expm_multiply(0.5 * (np.conj(zeta) * a @ a - zeta * ad @ ad), v)
    if alpha != 0:
        v = expm_multiply(alpha * ad - np.conj(alpha) * a, v)
    tail = float(np.sum(np.abs(v[D:]) ** 2))
    out = v[:D].copy()
    out.setflags(write=False)
    return out, tail


def displaced_squeezed_state(alpha: complex, zeta: complex, D: int,
                             tol: float | None = TAIL_TOL) -> np.ndarray:
    """``D(alpha) S(zeta)|0>`` evaluated at a guard cutoff then truncated to ``D``."""
    v, tail = _displaced_squeezed(complex(alpha), complex(zeta), int(D))
    _check_tail(tail, tol, f"displaced squeezed state alpha={alpha}, zeta={zeta}",
                default_cutoff(alpha, zeta))
    return v.copy()


CAT_FLOOR = 1e-12


def cat_norm(alpha: complex, beta: complex, theta: float) -> float:
    """Normalization ``N(alpha, beta, theta)`` of ``|alpha> + e^{i theta}|beta>``."""
    alpha, beta = complex(alpha), complex(beta)
    cross = (np.exp(1j * theta) * np.exp(np.conj(alpha) * beta)
             + np.exp(-1j * theta) * np.exp(alpha * np.conj(beta)))
    return float((2 + cross * np.exp(-(abs(alpha) ** 2 + abs(beta) ** 2) / 2)).real)


def cat_state(alpha: complex, beta: complex, theta: float, D: int,
              tol: float | None = TAIL_TOL) -> np.ndarray:
    N = cat_norm(alpha, beta, theta)
    if N < CAT_FLOOR:
        raise DegeneracyError(
            f"cat state alpha={alpha}, beta={beta}, theta={theta} is degenerate (N={N:.3e})")
    ka = coherent_state(alpha, D, tol)
    kb = coherent_state(beta, D, tol)
    return (ka + np.exp(1j * theta) * kb) / math.sqrt(N)


# -- interferometers -------------------------------------------------------

def balanced_pair_transform(k: int, i: int, j: int) -> np.ndarray:
    """Mode matrix ``W`` of a 50:50 beam splitter on modes ``i`` and ``j``.

    ``U a_n^dag U^dag = sum_m W[m, n] a_m^dag``. Coherent amplitudes transform
    as ``beta = W @ alpha``; ``|a, a> -> |0, sqrt(2) a>``.
    """
    if not (0 <= i < k and 0 <= j < k) or i == j:
        raise InputError(f"invalid mode pair ({i}, {j}) for {k} modes")
    W = np.eye(k, dtype=complex)
    s = 1 / math.sqrt(2)
    W[i, i], W[i, j] = s, -s
    W[j, i], W[j, j] = s, s
    return W


def fourier_transform(k: int) -> np.ndarray:
    """``W[m, n] = exp(2 pi i n m / k) / sqrt(k)``."""
    if k < 1:
        raise InputError("mode count must be >= 1")
    m = np.arange(k)
    return np.exp(2j * np.pi * np.outer(m, m) / k) / math.sqrt(k)


def _mode_transform(k: int, spec) -> np.ndarray:
    if isinstance(spec, str):
        if spec == "fourier":
            return fourier_transform(k)
        raise InputError(f"unknown interferometer {spec!r}")
    if isinstance(spec, tuple) and spec and spec[0] in ("balanced", "balanced-pair"):
        return balanced_pair_transform(k, spec[1], spec[2])
    W = np.asarray(spec, dtype=complex)
    if W.shape != (k, k):
        raise InputError(f"mode matrix must be {k}x{k}")
    if not np.allclose(W.conj().T @ W, np.eye(k), atol=1e-12):
        raise InputError("mode matrix is not unitary")
    return W


def _compositions(N: int, k: int):
    """All k-tuples of nonnegative integers summing to N."""
    if k == 1:
        yield (N,)
        return
    for first in range(N, -1, -1):
        for rest in _compositions(N - first, k - 1):
            yield (first,) + rest


def _unitary_log(W: np.ndarray) -> np.ndarray:
    T, Z = scipy.linalg.schur(W, output="complex")
    phases = np.angle(np.diag(T))
    return Z @ np.diag(1j * phases) @ Z.conj().T


@lru_cache(maxsize=32)
def _interferometer(k: int, W_bytes: bytes, D: int):
    W = np.frombuffer(W_bytes, dtype=complex).reshape(k, k)
    L = _unitary_log(W)
    rows, cols, vals = [], [], []
    strides = D ** np.arange(k - 1, -1, -1)
    nnz = 0
    for N in range(k * (D - 1) + 1):
        basis = list(_compositions(N, k))
        if len(basis) > 4000:
            raise ResourceError(f"photon-number block of size {len(basis)} is too large")
        index = {s: t for t, s in enumerate(basis)}
        K = np.zeros((len(basis), len(basis)), dtype=complex)
        for t, s in enumerate(basis):
            for n in range(k):
                if s[n] == 0:
                    continue
                for m in range(k):
                    if L[m, n] == 0:
                        continue
                    if m == n:
                        K[t, t] += L[n, n] * s[n]
                    else:
                        u = list(s)
                        u[n] -= 1
                        u[m] += 1
                        K[index[tuple(u)], t] += L[m, n] * math.sqrt(s[n] * u[m])
        U = scipy.linalg.expm(K)
        inbox = [t for t, s in enumerate(basis) if max(s) < D]
        flat = np.array([int(np.dot(basis[t], strides)) for t in inbox], dtype=np.int64)
        block = U[np.ix_(inbox, inbox)]
        nnz += block.size
        if nnz > MAX_NNZ:
            raise ResourceError("interferometer matrix exceeds memory budget")
        r, c = np.meshgrid(flat, flat, indexing="ij")
        rows.append(r.ravel())
        cols.append(c.ravel())
        vals.append(block.ravel())
    dim = D ** k
    mat = scipy.sparse.csr_array(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim))
    mat.eliminate_zeros()
    return mat


def interferometer_unitary(k: int, spec, D: int) -> scipy.sparse.csr_array:
    """Fock-space matrix of a passive linear-optical unitary on ``k`` modes.

    ``spec`` is ``"fourier"``, ``("balanced", i, j)`` or a ``k x k`` unitary
    mode matrix ``W`` with ``U a_n^dag U^dag = sum_m W[m, n] a_m^dag``.

    Returns a sparse ``D**k x D**k`` matrix, block diagonal in total photon
    number. Blocks with total photon number ``< D`` lie entirely inside the
    per-mode box and are exactly unitary; higher blocks are the exact matrix
    elements restricted to the box.
    """
    if k < 1:
        raise InputError("mode count must be >= 1")
    if float(D) ** k * max(D, 1) > 1e9:
        raise ResourceError(f"{k} modes at cutoff {D} exceed the dimension budget")
    W = np.ascontiguousarray(_mode_transform(k, spec))
    return _interferometer(k, W.tobytes(), D).copy()


def total_photon_number(k: int, D: int) -> np.ndarray:
    """Total photon number of each flattened basis index."""
    grids = np.indices((D,) * k).reshape(k, -1)
    return grids.sum(axis=0)


# -- linear algebra --------------------------------------------------------

def overlap(u: np.ndarray, v: np.ndarray) -> complex:
    """``<u|v>`` (conjugate-linear in ``u``)."""
    if u.shape != v.shape:
        raise InputError(f"cutoff mismatch: {u.shape} vs {v.shape}")
    return complex(np.vdot(u, v))


def as_density(state: np.ndarray) -> np.ndarray:
    state = np.asarray(state)
    if state.ndim == 1:
        return np.outer(state, state.conj())
    return state


def expectation(O, rho: np.ndarray) -> complex:
    """``Tr(O rho)``; ``rho`` may be a ket."""
    rho = as_density(rho)
    if O.shape != rho.shape:
        raise InputError(f"dimension mismatch: {O.shape} vs {rho.shape}")
    if scipy.sparse.issparse(O):
        return complex((O @ rho).trace())
    return complex(np.einsum("ij,ji->", O, rho))


def hermitize(A: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    A = np.asarray(A)
    defect = float(np.max(np.abs(A - A.conj().T))) if A.size else 0.0
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    if defect > tol * scale:
        raise ToleranceError(f"matrix is not Hermitian (defect {defect:.2e})")
    return (A + A.conj().T) / 2


def trace_norm(A: np.ndarray) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    return float(np.sum(np.abs(np.linalg.eigvalsh(hermitize(A)))))


def tensor(*parts: np.ndarray) -> np.ndarray:
    """Kronecker product of states. All kets stay a ket; any density promotes all."""
    if not parts:
        raise InputError("tensor of zero parts")
    if all(np.ndim(p) == 1 for p in parts):
        out = parts[0]
        for p in parts[1:]:
            out = np.kron(out, p)
        return out
    out = as_density(parts[0])
    for p in parts[1:]:
        out = np.kron(out, as_density(p))
    return out


def _modes(dim: int, n_modes: int) -> int:
    D = int(round(dim ** (1 / n_modes)))
    if D ** n_modes != dim:
        raise InputError(f"dimension {dim} is not a {n_modes}-th power")
    return D


def partial_trace(rho: np.ndarray, keep: Sequence[int], n_modes: int) -> np.ndarray:
    """Reduced density matrix on the modes in ``keep`` (kept in ascending order)."""
    rho = as_density(rho)
    keep = sorted(set(keep))
    if not keep:
        raise InputError("keep set is empty")
    if keep[0] < 0 or keep[-1] >= n_modes:
        raise InputError(f"mode index out of range for {n_modes} modes")
    D = _modes(rho.shape[0], n_modes)
    t = rho.reshape((D,) * (2 * n_modes))
    drop = [m for m in range(n_modes) if m not in keep]
    for offset, m in enumerate(drop):
        ax = m - offset
        t = np.trace(t, axis1=ax, axis2=ax + t.ndim // 2)
    d = D ** len(keep)
    return t.reshape(d, d)


def wigner_at(rho: np.ndarray, q, p) -> np.ndarray:
    """Wigner function ``W(q, p)`` of a single-mode state, normalized to
    ``int W dq dp = 1`` (vacuum peaks at ``1/pi``).

    ``q`` and ``p`` broadcast against each other.
    """
    rho = as_density(rho)
    q, p = np.broadcast_arrays(np.asarray(q, dtype=float), np.asarray(p, dtype=float))
    z = (q + 1j * p) / math.sqrt(2)
    x = 4 * np.abs(z) ** 2
    gauss = np.exp(-2 * np.abs(z) ** 2) / math.pi
    W = np.zeros(q.shape, dtype=complex)
    D = rho.shape[0]
    for n in range(D):
        for m in range(n, D):
            if rho[m, n] == 0 and rho[n, m] == 0:
                continue
            d = m - n
            coef = (-1) ** n * math.exp(0.5 * (math.lgamma(n + 1) - math.lgamma(m + 1)))
            term = coef * (2 * np.conj(z)) ** d * eval_genlaguerre(n, d, x)
            if d == 0:
                W += rho[n, n] * term
            else:
                W += 2 * (rho[m, n] * term).real
    return (W.real * gauss)
