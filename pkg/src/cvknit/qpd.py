"""Quasiprobability decompositions as explicit signed ensembles.

A :class:`Qpd` stores real weights ``q_x`` and state specs ``rho_x`` with
``target = sum_x q_x rho_x``. Builders cover superpositions of Gaussians, the
coherent-pair integral over cat states, the phase-averaged single-photon
surrogate, photon bunching, the two-mode Bell-cat state and GKP grids.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy.special import comb, gammaincc, gammaln

from . import fock
from .errors import DegeneracyError, InputError
from .gaussian import GaussianPure, gram_matrix
from .states import (Cat, CatBatch, Coherent, DisplacedSqueezed, Fock, FockDiagonal,
                     GaussianSuperposition, PoissonRing, Product, default_spec_cutoff,
                     pack_states, spec_from_json, spec_to_json)

PRUNE_REL = 1e-14
NORM_TOL = 1e-8
SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Target:
    """What a decomposition represents: a label and, when available, a spec."""

    description: str
    state: Any = None


@dataclass(frozen=True)
class QpdTerm:
    weight: float
    state: Any


@dataclass(frozen=True, eq=False)
class Qpd:
    weights: np.ndarray
    states: Sequence
    target: Target
    epsilon_promise: float | None = None
    exact: bool = True
    info: dict = field(default_factory=dict)
    pruned_abs_weight: float = 0.0

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 1 or w.size != len(self.states):
            raise InputError("weights and states must have equal length")
        if w.size == 0:
            raise InputError("empty decomposition")
        if not np.all(np.isfinite(w)) or np.any(w == 0):
            raise InputError("weights must be finite and nonzero")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)
        modes = {s.n_modes for s in (self.states if not isinstance(self.states, CatBatch)
                                     else self.states[:1])}
        if len(modes) != 1:
            raise InputError("all terms must act on the same number of modes")

    @property
    def gamma_bar(self) -> float:
        return math.fsum(np.abs(self.weights))

    @property
    def weight_sum(self) -> float:
        return math.fsum(self.weights)

    @property
    def n_modes(self) -> int:
        return self.states[0].n_modes

    def __len__(self):
        return self.weights.size

    @property
    def terms(self) -> list[QpdTerm]:
        return [QpdTerm(float(w), s) for w, s in zip(self.weights, self.states)]

    def probabilities(self) -> np.ndarray:
        a = np.abs(self.weights)
        return a / a.sum()

    def default_cutoff(self) -> int:
        if isinstance(self.states, CatBatch):
            return default_spec_cutoff(self.states)
        return max(default_spec_cutoff(s) for s in self.states)


def make_qpd(weights, states, target: Target, *, epsilon_promise=None, exact=True,
             info=None, prune_rel: float = PRUNE_REL) -> Qpd:
    """Assemble a :class:`Qpd`, dropping zero weights and pruning tiny ones."""
    w = np.asarray(weights, dtype=float)
    gb = float(np.abs(w).sum())
    keep = np.abs(w) >= prune_rel * gb
    keep &= w != 0
    pruned = float(np.abs(w[~keep]).sum())
    idx = np.flatnonzero(keep)
    if isinstance(states, CatBatch):
        states = CatBatch(states.alpha[idx], states.beta[idx], states.theta[idx])
    else:
        states = tuple(states[i] for i in idx)
    return Qpd(w[idx], states, target, epsilon_promise, exact, dict(info or {}), pruned)


# -- builders --------------------------------------------------------------

def build_g2(spec: GaussianSuperposition, norm_tol: float = NORM_TOL) -> Qpd:
    """Decompose a normalized superposition of Gaussians into Gaussians and
    two-Gaussian superpositions; ``gamma_bar = (sum |c_x|)^2``."""
    if not isinstance(spec, GaussianSuperposition):
        raise InputError("build_g2 needs a GaussianSuperposition")
    c, gs = spec.coeffs, spec.gaussians
    G = gram_matrix(gs)
    n2 = float(np.real(c.conj() @ G @ c))
    if abs(n2 - 1) > norm_tol:
        raise InputError(f"superposition is not normalized (norm^2 = {n2:.12g})")
    weights, states = [], []
    for x in range(len(c)):
        if c[x] != 0:
            weights.append(abs(c[x]) ** 2)
            states.append(DisplacedSqueezed(gs[x].alpha, gs[x].zeta))
    for x in range(len(c)):
        for y in range(x):
            if c[x] == 0 or c[y] == 0:
                continue
            u, v = c[x] / abs(c[x]), c[y] / abs(c[y])
            re = (u.conjugate() * v * G[x, y]).real
            Np, Nm = 2 + 2 * re, 2 - 2 * re
            if min(Np, Nm) < fock.CAT_FLOOR:
                raise DegeneracyError(f"pair ({x}, {y}) has a vanishing branch (N = {min(Np, Nm):.3e})")
            m = abs(c[x] * c[y])
            weights += [m * Np / 2, -m * Nm / 2]
            states += [GaussianSuperposition(((u, gs[x]), (v, gs[y]))),
                       GaussianSuperposition(((u, gs[x]), (-v, gs[y])))]
    return make_qpd(weights, states, Target("gaussian superposition", spec))


@dataclass(frozen=True)
class C2Grid:
    """Polar midpoint grid for the coherent-pair integral.

    ``radius=None`` picks the smallest multiple of ``dr`` whose tail bound is
    below ``tail_tol``; ``n_phi=None`` uses ``4 * ceil((R + 1)^2 / 4)``, enough
    to keep angular aliasing of photon numbers up to about ``(R + 1)^2`` out of
    the reconstruction.
    """

    dr: float = 0.2
    tail_tol: float = 1e-4
    radius: float | None = None
    n_phi: int | None = None

    def __post_init__(self):
        if not self.dr > 0 or not self.tail_tol > 0:
            raise InputError("grid needs dr > 0 and tail_tol > 0")
        if self.radius is not None and not self.radius > 0:
            raise InputError("grid radius must be positive")
        if self.n_phi is not None and self.n_phi < 1:
            raise InputError("n_phi must be >= 1")


def c2_tail_bound(psi: np.ndarray, R: float) -> float:
    """Upper bound on ``(1/pi) int_{|a|>R} |<a|psi>| d^2a``."""
    n = np.arange(psi.size)
    a = n / 2 + 1
    # 2^{n/2} Gamma(n/2 + 1, R^2/2) / sqrt(n!)
    log_terms = n / 2 * math.log(2) + gammaln(a) + np.log(gammaincc(a, R * R / 2)) - 0.5 * gammaln(n + 1)
    with np.errstate(divide="ignore"):
        return float(2 * np.sum(np.abs(psi) * np.exp(log_terms)))


def _pure_target(target, D):
    if isinstance(target, np.ndarray):
        psi = np.asarray(target, dtype=complex)
        if psi.ndim != 1:
            raise InputError("target must be a ket")
        return psi, Target("custom Fock vector")
    if getattr(target, "n_modes", 1) != 1:
        raise InputError("target must be a single-mode state")
    Dt = D or default_spec_cutoff(target)
    psi = target.ket(Dt, fock.TAIL_TOL)
    if psi is None:
        raise InputError("target must be a pure state")
    return psi, Target("pure state", target)


def build_c2(target, grid: C2Grid = C2Grid(), D: int | None = None) -> Qpd:
    """Discretize the coherent-pair integral into signed cat-state terms.

    Every unordered grid pair ``(a, b)`` with ``<a|psi><psi|b> = A e^{i phi}``
    contributes ``+- w_a w_b A N_pm / (2 pi^2)`` on ``Cat(a, b, -phi)`` and
    ``Cat(a, b, pi - phi)``; diagonal points contribute ``w_a^2 A / pi^2`` on
    ``|a>``.
    """
    psi, tgt = _pure_target(target, D)
    nrm = float(np.vdot(psi, psi).real)
    if abs(nrm - 1) > NORM_TOL:
        raise InputError(f"target is not normalized (norm^2 = {nrm:.12g})")
    if grid.radius is None:
        n_r = 1
        while c2_tail_bound(psi, n_r * grid.dr) > grid.tail_tol:
            n_r += 1
            if n_r > 10_000:
                raise InputError("cannot find a grid radius meeting the tail tolerance")
    else:
        n_r = max(1, math.ceil(grid.radius / grid.dr - 1e-9))
    R = n_r * grid.dr
    tail = c2_tail_bound(psi, R)
    if tail > grid.tail_tol:
        raise InputError(f"grid radius {R:g} too small: tail bound {tail:.3e} > {grid.tail_tol:g}")
    n_phi = grid.n_phi or 4 * math.ceil((R + 1) ** 2 / 4)
    r = (np.arange(n_r) + 0.5) * grid.dr
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    pts = (r[:, None] * np.exp(1j * phi[None, :])).ravel()
    w = np.repeat(r * grid.dr * 2 * np.pi / n_phi, n_phi)
    amp = fock.coherent_amplitudes(pts, psi.size).conj() @ psi
    mag = np.abs(amp)

    i, j = np.triu_indices(pts.size, 1)
    A = mag[i] * mag[j]
    ph = np.angle(amp[i] * amp[j].conj())
    base = w[i] * w[j] * A / (2 * np.pi ** 2)
    a_i, a_j = pts[i], pts[j]
    plus = CatBatch(a_i, a_j, -ph)
    minus = CatBatch(a_i, a_j, np.pi - ph)
    Np, Nm = plus.norms(), minus.norms()
    wp, wm = base * Np, -base * Nm
    ok = np.minimum(Np, Nm) >= fock.CAT_FLOOR
    weights = np.concatenate([w * w * mag ** 2 / np.pi ** 2, wp[ok], wm[ok]])
    states = CatBatch(np.concatenate([pts, a_i[ok], a_i[ok]]),
                      np.concatenate([pts, a_j[ok], a_j[ok]]),
                      np.concatenate([np.zeros(pts.size), -ph[ok], np.pi - ph[ok]]))
    dropped = float(np.sum(base[~ok] * (Np[~ok] + Nm[~ok])))
    integral = float(np.sum(w * mag) / np.pi)
    info = {"radius": R, "dr": grid.dr, "n_r": n_r, "n_phi": n_phi, "tail_bound": tail,
            "l1_integral": integral, "degenerate_weight": dropped}
    q = make_qpd(weights, states, tgt, info=info)
    return q


def photon_eps_distance(eps: float) -> float:
    """``|| psi_eps - |1><1| ||_1 = 2 (e^eps - 1 - eps) / (e^eps - 1)``."""
    em1 = math.expm1(eps)
    return 2 * (em1 - eps) / em1


def build_single_photon_eps(eps: float) -> Qpd:
    """eps-QPD of ``|1>``: ``psi_eps = a * ring(eps) - b * |0><0|``."""
    if not eps > 0 or not math.isfinite(eps):
        raise InputError(f"eps must be positive, got {eps}")
    a = -1 / math.expm1(-eps)
    b = math.exp(-eps) * a
    return make_qpd([a, -b], [PoissonRing(eps, 0), Fock(0)],
                    Target("single photon |1>", Fock(1)),
                    epsilon_promise=photon_eps_distance(eps), exact=False,
                    info={"eps": eps, "surrogate": spec_to_json(PoissonRing(eps, 1))})


def fock_k_bound(k: int, delta: float) -> float:
    """Trace-distance bound ``3 (k - k e^-d)^k / (2 k! d^k e^{-k d}) * k d``."""
    return (3 * (k * -math.expm1(-delta)) ** k
            / (2 * math.factorial(k) * delta ** k * math.exp(-k * delta)) * k * delta)


def fock_k_success_bound(k: int, delta: float) -> float:
    """``d^k e^{-k d} / (1 - e^{-d})^k * k! / k^k``."""
    return (delta * math.exp(-delta) / -math.expm1(-delta)) ** k * math.factorial(k) / k ** k


def bunching_map(rho: np.ndarray, k: int, D: int) -> np.ndarray:
    """Fourier interferometer on ``k`` modes followed by vacuum post-selection
    on modes ``1..k-1``; returns the unnormalized single-mode output.

    Exact on the total-photon blocks ``N < D``.
    """
    rho = fock.as_density(rho)
    if rho.shape != (D ** k, D ** k):
        raise InputError(f"input must be {D ** k}x{D ** k} for {k} modes at cutoff {D}")
    U = fock.interferometer_unitary(k, "fourier", D)
    rows = U[np.arange(D) * D ** (k - 1)]
    Ur = rows.toarray() if hasattr(rows, "toarray") else np.asarray(rows)
    return Ur @ rho @ Ur.conj().T


def bunching_map_diagonal(populations: Sequence[np.ndarray], D: int) -> np.ndarray:
    """Output photon distribution of :func:`bunching_map` for a product of
    Fock-diagonal inputs: ``p_out(N) = N! k^-N sum_{|n|=N} prod_j p_j(n_j)/n_j!``."""
    k = len(populations)
    if k < 1:
        raise InputError("need at least one mode")
    f = np.zeros(D)
    f[0] = 1.0
    for p in populations:
        p = np.asarray(p, dtype=float)[:D]
        g = p / np.exp(gammaln(np.arange(p.size) + 1))
        f = np.convolve(f, g)[:D]
    N = np.arange(D)
    return f * np.exp(gammaln(N + 1) - N * math.log(k))


def build_fock_k(k: int, delta: float, D: int | None = None, method: str = "diagonal") -> Qpd:
    """eps-QPD of ``|k>`` from ``k`` single-photon surrogates and bunching.

    ``psi_delta^{(x)k}`` expands into products of rings and vacua; the
    products with ``j`` rings are permutation-equivalent under the Fourier
    map, so each ``j`` gives one single-mode diagonal term with multiplicity
    ``binom(k, j)``. ``method="general"`` pushes the ``k``-mode densities
    through the interferometer instead of using the closed form.
    """
    if int(k) != k or k < 1:
        raise InputError(f"k must be a positive integer, got {k}")
    if not delta > 0:
        raise InputError(f"delta must be positive, got {delta}")
    if k == 1:
        return build_single_photon_eps(delta)
    bound = fock_k_bound(k, delta)
    if bound >= 1:
        raise InputError(f"bound eps_k(delta) = {bound:.4g} >= 1; decrease delta")
    Din = D or max(4, k + 2, fock.poisson_cutoff(k * delta, 1e-14))
    if Din < k + 1:
        raise InputError(f"cutoff {Din} cannot hold |{k}>")
    ring = PoissonRing(delta, 0).populations(Din)
    vac = np.zeros(Din)
    vac[0] = 1.0
    a = -1 / math.expm1(-delta)
    b = math.exp(-delta) * a
    outs, coefs = [], []
    for j in range(k + 1):
        pops = [ring] * j + [vac] * (k - j)
        if method == "diagonal":
            out = bunching_map_diagonal(pops, Din)
        elif method == "general":
            rho = fock.tensor(*[np.diag(p).astype(complex) for p in pops])
            out = np.real(np.diag(bunching_map(rho, k, Din)))
        else:
            raise InputError(f"unknown method {method!r}")
        outs.append(out)
        coefs.append(comb(k, j, exact=True) * a ** j * (-b) ** (k - j))
    t = np.array([o.sum() for o in outs])
    S = float(np.dot(coefs, t))
    weights = [c * tj / S for c, tj in zip(coefs, t)]
    states = [FockDiagonal(tuple(o / tj)) for o, tj in zip(outs, t)]
    info = {"k": k, "delta": delta, "cutoff": Din, "success_weight": S,
            "success_bound": fock_k_success_bound(k, delta), "method": method}
    return make_qpd(weights, states, Target(f"Fock state |{k}>", Fock(k)),
                    epsilon_promise=bound, exact=False, info=info)


def bell_cat_norm(alpha: complex, theta: float) -> float:
    return 2 * (1 + math.cos(theta) * math.exp(-4 * abs(alpha) ** 2))


def bell_cat_ket(alpha: complex, theta: float, D: int, tol: float | None = fock.TAIL_TOL) -> np.ndarray:
    """``(|a, a> + e^{i theta}|-a, -a>) / sqrt(N)`` on two modes."""
    N = bell_cat_norm(alpha, theta)
    if N < fock.CAT_FLOOR:
        raise DegeneracyError(f"Bell-cat state alpha={alpha}, theta={theta} is degenerate")
    p = fock.coherent_state(alpha, D, tol)
    m = fock.coherent_state(-alpha, D, tol)
    return (np.kron(p, p) + cmath.exp(1j * theta) * np.kron(m, m)) / math.sqrt(N)


def build_bell_cat(alpha: complex, theta: float) -> Qpd:
    """Decompose ``|Phi(alpha, theta)>`` into products of coherent and cat states.

    With ``psi_n = Cat(a, -a, (theta + n pi)/2)`` and
    ``sigma_n = (N_n psi_n - N_{n+2} psi_{n+2}) / 2``, the coherence
    ``e^{-i theta}|a><-a|^{(x)2} + h.c.`` equals
    ``(sigma_0^{(x)2} - sigma_1^{(x)2}) / 2``.
    """
    alpha = complex(alpha)
    NPhi = bell_cat_norm(alpha, theta)
    if NPhi < fock.CAT_FLOOR:
        raise DegeneracyError(f"Bell-cat state alpha={alpha}, theta={theta} is degenerate")
    cats = [Cat(alpha, -alpha, (theta + n * math.pi) / 2) for n in range(4)]
    N = [c.norm for c in cats]
    if min(N) < fock.CAT_FLOOR:
        raise DegeneracyError(f"cat branch degenerate at alpha={alpha}, theta={theta} (N = {min(N):.3e})")
    weights = [1.0, 1.0]
    states = [Product((Coherent(alpha), Coherent(alpha))),
              Product((Coherent(-alpha), Coherent(-alpha)))]
    for s, (n, m) in ((1, (0, 2)), (-1, (1, 3))):
        # s * (1/2) * (1/4) (N_n psi_n - N_m psi_m)^{(x)2}
        for x, cx in ((n, 1), (m, -1)):
            for y, cy in ((n, 1), (m, -1)):
                weights.append(s * cx * cy * N[x] * N[y] / 8)
                states.append(Product((cats[x], cats[y])))
    weights = np.array(weights) / NPhi
    info = {"alpha": fock_complex(alpha), "theta": theta, "norm": NPhi}
    return make_qpd(weights, states, Target(f"Bell-cat state alpha={alpha}, theta={theta}"),
                    info=info)


def fock_complex(z: complex) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def gkp_amplitude(m: int) -> float:
    """Displacement parameter of ``D_m = D(m sqrt(pi/2))``."""
    return m * math.sqrt(math.pi / 2)


def gkp_superposition(coeffs: Sequence[float], r: float, mu: int = 0, n_start: int = 0,
                      offset: int = 0) -> tuple[GaussianSuperposition, float]:
    """Normalized ``sum_n c_n D_{2n + mu + offset} S(r)|0>`` and its norm^2.

    ``n`` runs over ``n_start, n_start + 1, ...``.
    """
    c = np.asarray(coeffs, dtype=float)
    if c.ndim != 1 or c.size == 0:
        raise InputError("coefficients must be a nonempty list")
    if np.any(c < 0):
        raise InputError("GKP coefficients must be nonnegative")
    if mu not in (0, 1):
        raise InputError("mu must be 0 or 1")
    gs = [GaussianPure(complex(gkp_amplitude(2 * (n_start + i) + mu + offset)), complex(r))
          for i in range(c.size)]
    norm2 = float(c @ np.real(gram_matrix(gs)) @ c)
    if norm2 < fock.CAT_FLOOR:
        raise DegeneracyError("GKP superposition has vanishing norm")
    s = 1 / math.sqrt(norm2)
    return GaussianSuperposition(tuple((complex(ci * s), g) for ci, g in zip(c, gs) if ci != 0)), norm2


def random_walk_norm(L: int, r: float) -> float:
    """Exact ``N = sum_{n,m} binom(L,n) binom(L,m) <g_n|g_m>`` for the walk."""
    c = np.array([comb(L, n, exact=True) for n in range(L + 1)], dtype=float)
    gs = [GaussianPure(complex(gkp_amplitude(2 * n - L)), complex(r)) for n in range(L + 1)]
    return float(c @ np.real(gram_matrix(gs)) @ c)


def build_gkp(coeffs: Sequence[float] | None, r: float, mu: int = 0,
              walk_steps: int | None = None, n_start: int = 0) -> Qpd:
    """GKP-type superposition of displaced squeezed peaks through :func:`build_g2`.

    Pass ``walk_steps=L`` (and ``coeffs=None``) for the random-walk state
    ``sum_n binom(L, n) D_{2n-L} S(r)|0>``; otherwise ``coeffs`` weights the
    peaks ``D_{2n+mu}`` for ``n = n_start, n_start + 1, ...``.
    """
    if walk_steps is not None:
        L = int(walk_steps)
        if L < 0:
            raise InputError("number of walk steps must be >= 0")
        coeffs = [comb(L, n, exact=True) for n in range(L + 1)]
        spec, norm2 = gkp_superposition(coeffs, r, mu, 0, offset=-L)
        label = f"random-walk GKP L={L}, r={r}"
        approx = 4.0 ** L / comb(2 * L, L, exact=True)
        info = {"mode": "random-walk", "L": L, "r": r, "mu": mu, "N_exact": norm2,
                "N_approx": float(comb(2 * L, L, exact=True)),
                "gamma_bar_exact": 4.0 ** L / norm2, "gamma_bar_approx": approx}
    else:
        if coeffs is None:
            raise InputError("coefficients required unless walk_steps is given")
        spec, norm2 = gkp_superposition(coeffs, r, mu, n_start)
        label = f"GKP superposition r={r}, mu={mu}"
        info = {"mode": "general", "r": r, "mu": mu, "N_exact": norm2,
                "gamma_bar_exact": float(np.sum(coeffs)) ** 2 / norm2}
    q = build_g2(spec)
    return Qpd(q.weights, q.states, Target(label, spec), info=info,
               pruned_abs_weight=q.pruned_abs_weight)


# -- reconstruction and validation ----------------------------------------

def reconstruct(qpd: Qpd, D: int | None = None, tol: float | None = None,
                chunk: int = 32768) -> np.ndarray:
    """``sum_x q_x rho_x`` at per-mode cutoff ``D``.

    Without ``tol`` each term is projected onto the first ``D`` levels; the
    result is the projection of the exact combination. Pure terms are
    accumulated as ``K diag(q) K^dag`` in chunks.
    """
    D = D or qpd.default_cutoff()
    dim = D ** qpd.n_modes
    out = np.zeros((dim, dim), dtype=complex)
    w = qpd.weights
    if isinstance(qpd.states, CatBatch):
        for s in range(0, len(w), chunk):
            K = qpd.states.kets(D, s, s + chunk)
            out += (K * w[s:s + chunk]) @ K.conj().T
        return (out + out.conj().T) / 2
    kets, qs = [], []

    def flush():
        if kets:
            K = np.stack(kets, axis=1)
            out[...] += (K * np.asarray(qs)) @ K.conj().T
            kets.clear()
            qs.clear()

    for q, s in zip(w, qpd.states):
        k = s.ket(D, tol)
        if k is None:
            out += q * s.density(D, tol)
        else:
            kets.append(k)
            qs.append(q)
            if len(kets) >= chunk:
                flush()
    flush()
    return (out + out.conj().T) / 2


@dataclass(frozen=True)
class ValidationReport:
    trace_distance: float
    weight_sum: float
    gamma_bar: float
    epsilon_promise: float | None
    epsilon_promise_satisfied: bool
    pruned_abs_weight: float
    cutoff: int
    n_terms: int

    def to_json(self) -> dict:
        return dict(self.__dict__)


def _target_density(target, D, n_modes):
    if isinstance(target, np.ndarray):
        return fock.as_density(target)
    if target is None:
        raise InputError("no target state to validate against")
    return target.density(D, fock.TAIL_TOL)


def validate(qpd: Qpd, target=None, D: int | None = None, atol: float = 1e-8) -> ValidationReport:
    """Compare the reconstruction with ``target`` in trace norm.

    ``target`` may be a density matrix, a ket, a state spec, or ``None`` to use
    the decomposition's own reference state. ``trace_distance`` is the full
    1-norm ``||recon - target||_1``.
    """
    if target is None:
        target = qpd.target.state
    D = D or qpd.default_cutoff()
    rho = _target_density(target, D, qpd.n_modes)
    dim = D ** qpd.n_modes
    if rho.shape != (dim, dim):
        raise InputError(f"target dimension {rho.shape} does not match {dim}")
    dist = fock.trace_norm(reconstruct(qpd, D) - rho)
    promise = qpd.epsilon_promise if qpd.epsilon_promise is not None else 0.0
    ok = dist <= promise + atol + qpd.pruned_abs_weight
    return ValidationReport(dist, qpd.weight_sum, qpd.gamma_bar, qpd.epsilon_promise,
                            bool(ok), qpd.pruned_abs_weight, D, len(qpd))


# -- JSON ------------------------------------------------------------------

def qpd_to_json(qpd: Qpd) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "qpd",
        "n_modes": qpd.n_modes,
        "gamma_bar": qpd.gamma_bar,
        "weight_sum": qpd.weight_sum,
        "exact": qpd.exact,
        "epsilon_promise": qpd.epsilon_promise,
        "pruned_abs_weight": qpd.pruned_abs_weight,
        "target": {"description": qpd.target.description,
                   "state": None if qpd.target.state is None else spec_to_json(qpd.target.state)},
        "info": qpd.info,
        "terms": [{"weight": float(w), "state": spec_to_json(s)}
                  for w, s in zip(qpd.weights, qpd.states)],
    }


def qpd_from_json(obj: Any) -> Qpd:
    if not isinstance(obj, dict):
        raise InputError("qpd: expected a JSON object")
    if obj.get("kind") != "qpd":
        raise InputError("qpd.kind: expected 'qpd'")
    if obj.get("schema_version") != SCHEMA_VERSION:
        raise InputError(f"qpd.schema_version: expected {SCHEMA_VERSION}")
    terms = obj.get("terms")
    if not isinstance(terms, list) or not terms:
        raise InputError("qpd.terms: expected a nonempty list")
    weights, states = [], []
    for i, t in enumerate(terms):
        if not isinstance(t, dict) or set(t) != {"weight", "state"}:
            raise InputError(f"qpd.terms[{i}]: expected {{weight, state}}")
        wt = t["weight"]
        if isinstance(wt, bool) or not isinstance(wt, (int, float)):
            raise InputError(f"qpd.terms[{i}].weight: expected a number")
        weights.append(float(wt))
        states.append(spec_from_json(t["state"], f"qpd.terms[{i}].state"))
    tg = obj.get("target") or {}
    if not isinstance(tg, dict):
        raise InputError("qpd.target: expected an object")
    tstate = tg.get("state")
    target = Target(str(tg.get("description", "")),
                    None if tstate is None else spec_from_json(tstate, "qpd.target.state"))
    eps = obj.get("epsilon_promise")
    q = Qpd(np.array(weights), pack_states(states), target,
            None if eps is None else float(eps), bool(obj.get("exact", True)),
            dict(obj.get("info") or {}), float(obj.get("pruned_abs_weight", 0.0)))
    gb = obj.get("gamma_bar")
    if gb is not None and abs(float(gb) - q.gamma_bar) > 1e-12 * max(1.0, q.gamma_bar):
        raise InputError(f"qpd.gamma_bar: {gb} does not match sum |q| = {q.gamma_bar}")
    return q
