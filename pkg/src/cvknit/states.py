"""Symbolic descriptions of preparable states.

A spec is an immutable value that knows how to materialize itself in a
truncated Fock basis. Materialization without a tolerance is a projection onto
the first ``D`` levels (no renormalization), which is what reconstruction of a
signed ensemble needs; pass ``tol`` to demand the truncation be negligible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from collections.abc import Sequence
from typing import Any, Union

import numpy as np
from scipy.special import gammainc, gammaln

from . import fock
from .errors import DegeneracyError, InputError
from .gaussian import GaussianPure, gaussian_overlap, superposition_norm2


@dataclass(frozen=True)
class Fock:
    n: int

    n_modes = 1

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 0:
            raise InputError(f"photon number must be a nonnegative integer, got {self.n!r}")

    def ket(self, D, tol=None):
        return fock.fock_state(self.n, D)

    def density(self, D, tol=None):
        return fock.as_density(self.ket(D, tol))


@dataclass(frozen=True)
class Coherent:
    alpha: complex

    n_modes = 1

    def ket(self, D, tol=None):
        return fock.coherent_state(self.alpha, D, tol)

    def density(self, D, tol=None):
        return fock.as_density(self.ket(D, tol))


@dataclass(frozen=True)
class DisplacedSqueezed:
    alpha: complex
    zeta: complex

    n_modes = 1

    def ket(self, D, tol=None):
        return fock.displaced_squeezed_state(self.alpha, self.zeta, D, tol)

    def density(self, D, tol=None):
        return fock.as_density(self.ket(D, tol))

    @property
    def gaussian(self) -> GaussianPure:
        return GaussianPure(self.alpha, self.zeta)


@dataclass(frozen=True)
class Cat:
    """``(|alpha> + e^{i theta}|beta>)/sqrt(N)``."""

    alpha: complex
    beta: complex
    theta: float

    n_modes = 1

    @property
    def norm(self) -> float:
        return fock.cat_norm(self.alpha, self.beta, self.theta)

    def ket(self, D, tol=None):
        return fock.cat_state(self.alpha, self.beta, self.theta, D, tol)

    def density(self, D, tol=None):
        return fock.as_density(self.ket(D, tol))


@dataclass(frozen=True)
class GaussianSuperposition:
    """``sum_x c_x D(alpha_x) S(zeta_x)|0>``, materialized normalized."""

    terms: tuple[tuple[complex, GaussianPure], ...]

    n_modes = 1

    def __post_init__(self):
        if not self.terms or all(c == 0 for c, _ in self.terms):
            raise InputError("superposition needs at least one nonzero coefficient")

    @property
    def coeffs(self) -> np.ndarray:
        return np.array([c for c, _ in self.terms], dtype=complex)

    @property
    def gaussians(self) -> list[GaussianPure]:
        return [g for _, g in self.terms]

    def norm2(self) -> float:
        return superposition_norm2(self.coeffs, self.gaussians)

    def normalized(self) -> "GaussianSuperposition":
        s = 1 / math.sqrt(self.norm2())
        return GaussianSuperposition(tuple((c * s, g) for c, g in self.terms))

    def ket(self, D, tol=None):
        v = np.zeros(D, dtype=complex)
        for c, g in self.terms:
            v += c * fock.displaced_squeezed_state(g.alpha, g.zeta, D, tol)
        n2 = self.norm2()
        if n2 < fock.CAT_FLOOR:
            raise DegeneracyError(f"superposition norm {n2:.3e} below floor")
        return v / math.sqrt(n2)

    def density(self, D, tol=None):
        return fock.as_density(self.ket(D, tol))


def two_gaussian(c1: complex, g1: GaussianPure, c2: complex, g2: GaussianPure) -> GaussianSuperposition:
    return GaussianSuperposition(((complex(c1), g1), (complex(c2), g2)))


@dataclass(frozen=True)
class PoissonRing:
    """Phase-averaged coherent ring of mean photon number ``eps``.

    Equal to the diagonal Poisson mixture; ``min_photon=1`` removes the vacuum
    and renormalizes.
    """

    eps: float
    min_photon: int = 0

    n_modes = 1

    def __post_init__(self):
        if not self.eps > 0:
            raise InputError(f"ring needs eps > 0, got {self.eps}")
        if self.min_photon not in (0, 1):
            raise InputError("min_photon must be 0 or 1")

    def populations(self, D):
        n = np.arange(D)
        p = np.exp(-self.eps + n * math.log(self.eps) - gammaln(n + 1))
        if self.min_photon:
            p[0] = 0.0
            p /= -math.expm1(-self.eps)
        return p

    def tail_mass(self, D):
        t = float(gammainc(D, self.eps))
        return t / -math.expm1(-self.eps) if self.min_photon else t

    def ket(self, D, tol=None):
        return None

    def density(self, D, tol=None):
        fock._check_tail(self.tail_mass(D), tol, f"Poisson ring eps={self.eps}",
                         fock.poisson_cutoff(self.eps, tol or fock.TAIL_TOL))
        return np.diag(self.populations(D)).astype(complex)


@dataclass(frozen=True)
class FockDiagonal:
    """Photon-number-diagonal mixture with the given populations."""

    populations: tuple[float, ...]

    n_modes = 1

    def __post_init__(self):
        p = np.asarray(self.populations, dtype=float)
        if p.ndim != 1 or p.size == 0 or np.any(p < -1e-15):
            raise InputError("populations must be a nonempty nonnegative sequence")
        if abs(p.sum() - 1) > 1e-10:
            raise InputError(f"populations sum to {p.sum()}, expected 1")

    def ket(self, D, tol=None):
        return None

    def density(self, D, tol=None):
        p = np.zeros(D)
        k = min(D, len(self.populations))
        p[:k] = self.populations[:k]
        fock._check_tail(float(np.sum(self.populations[k:])), tol, "Fock-diagonal state")
        return np.diag(p).astype(complex)


@dataclass(frozen=True)
class Product:
    parts: tuple["StateSpec", ...]

    def __post_init__(self):
        if not self.parts:
            raise InputError("product of zero states")

    @property
    def n_modes(self) -> int:
        return sum(p.n_modes for p in self.parts)

    def ket(self, D, tol=None):
        kets = [p.ket(D, tol) for p in self.parts]
        if any(k is None for k in kets):
            return None
        return fock.tensor(*kets)

    def density(self, D, tol=None):
        k = self.ket(D, tol)
        if k is not None:
            return fock.as_density(k)
        return fock.tensor(*[p.density(D, tol) for p in self.parts])


StateSpec = Union[Fock, Coherent, DisplacedSqueezed, Cat, GaussianSuperposition,
                  PoissonRing, FockDiagonal, Product]


def pure_overlap(a: StateSpec, b: StateSpec) -> complex | None:
    """Exact overlap for pairs of Gaussian-type specs, else ``None``."""
    def as_gauss(s):
        if isinstance(s, Coherent):
            return GaussianPure(s.alpha, 0j)
        if isinstance(s, DisplacedSqueezed):
            return s.gaussian
        return None
    ga, gb = as_gauss(a), as_gauss(b)
    if ga is None or gb is None:
        return None
    return gaussian_overlap(ga, gb)


# -- JSON codec ------------------------------------------------------------

def complex_to_json(z: complex) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def complex_from_json(obj: Any, path: str) -> complex:
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return complex(obj)
    if not isinstance(obj, dict) or set(obj) != {"re", "im"}:
        raise InputError(f"{path}: expected {{\"re\": .., \"im\": ..}}, got {obj!r}")
    try:
        return complex(float(obj["re"]), float(obj["im"]))
    except (TypeError, ValueError):
        raise InputError(f"{path}: non-numeric complex parts") from None


def spec_to_json(s: StateSpec) -> dict:
    if isinstance(s, Fock):
        return {"type": "fock", "n": s.n}
    if isinstance(s, Coherent):
        return {"type": "coherent", "alpha": complex_to_json(s.alpha)}
    if isinstance(s, DisplacedSqueezed):
        return {"type": "displaced_squeezed", "alpha": complex_to_json(s.alpha),
                "zeta": complex_to_json(s.zeta)}
    if isinstance(s, Cat):
        return {"type": "cat", "alpha": complex_to_json(s.alpha),
                "beta": complex_to_json(s.beta), "theta": float(s.theta)}
    if isinstance(s, GaussianSuperposition):
        return {"type": "gaussian_superposition", "terms": [
            {"c": complex_to_json(c), "alpha": complex_to_json(g.alpha),
             "zeta": complex_to_json(g.zeta)} for c, g in s.terms]}
    if isinstance(s, PoissonRing):
        return {"type": "poisson_ring", "eps": float(s.eps), "min_photon": s.min_photon}
    if isinstance(s, FockDiagonal):
        return {"type": "fock_diagonal", "populations": [float(p) for p in s.populations]}
    if isinstance(s, Product):
        return {"type": "product", "parts": [spec_to_json(p) for p in s.parts]}
    raise InputError(f"not a state spec: {s!r}")


_FIELDS = {
    "fock": {"n"},
    "coherent": {"alpha"},
    "displaced_squeezed": {"alpha", "zeta"},
    "cat": {"alpha", "beta", "theta"},
    "gaussian_superposition": {"terms"},
    "poisson_ring": {"eps", "min_photon"},
    "fock_diagonal": {"populations"},
    "product": {"parts"},
}


def _number(obj, path, kind=float):
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        raise InputError(f"{path}: expected a number, got {obj!r}")
    if kind is int and obj != int(obj):
        raise InputError(f"{path}: expected an integer, got {obj!r}")
    return kind(obj)


def spec_from_json(obj: Any, path: str = "state") -> StateSpec:
    if not isinstance(obj, dict) or "type" not in obj:
        raise InputError(f"{path}: expected an object with a 'type' field")
    t = obj["type"]
    if t not in _FIELDS:
        raise InputError(f"{path}.type: unknown state type {t!r}")
    extra = set(obj) - _FIELDS[t] - {"type"}
    missing = _FIELDS[t] - set(obj)
    if t == "poisson_ring":
        missing -= {"min_photon"}
    if extra:
        raise InputError(f"{path}: unknown field(s) {sorted(extra)}")
    if missing:
        raise InputError(f"{path}: missing field(s) {sorted(missing)}")
    if t == "fock":
        return Fock(_number(obj["n"], f"{path}.n", int))
    if t == "coherent":
        return Coherent(complex_from_json(obj["alpha"], f"{path}.alpha"))
    if t == "displaced_squeezed":
        return DisplacedSqueezed(complex_from_json(obj["alpha"], f"{path}.alpha"),
                                 complex_from_json(obj["zeta"], f"{path}.zeta"))
    if t == "cat":
        return Cat(complex_from_json(obj["alpha"], f"{path}.alpha"),
                   complex_from_json(obj["beta"], f"{path}.beta"),
                   _number(obj["theta"], f"{path}.theta"))
    if t == "gaussian_superposition":
        terms = obj["terms"]
        if not isinstance(terms, list):
            raise InputError(f"{path}.terms: expected a list")
        out = []
        for i, term in enumerate(terms):
            p = f"{path}.terms[{i}]"
            if not isinstance(term, dict) or set(term) - {"c", "alpha", "zeta"} or "c" not in term:
                raise InputError(f"{p}: expected {{c, alpha, zeta}}")
            out.append((complex_from_json(term["c"], f"{p}.c"),
                        GaussianPure(complex_from_json(term.get("alpha", 0), f"{p}.alpha"),
                                     complex_from_json(term.get("zeta", 0), f"{p}.zeta"))))
        return GaussianSuperposition(tuple(out))
    if t == "poisson_ring":
        return PoissonRing(_number(obj["eps"], f"{path}.eps"),
                           _number(obj.get("min_photon", 0), f"{path}.min_photon", int))
    if t == "fock_diagonal":
        pops = obj["populations"]
        if not isinstance(pops, list):
            raise InputError(f"{path}.populations: expected a list")
        return FockDiagonal(tuple(_number(p, f"{path}.populations[{i}]") for i, p in enumerate(pops)))
    parts = obj["parts"]
    if not isinstance(parts, list):
        raise InputError(f"{path}.parts: expected a list")
    return Product(tuple(spec_from_json(p, f"{path}.parts[{i}]") for i, p in enumerate(parts)))


class CatBatch(Sequence):
    """Read-only sequence of :class:`Cat` specs stored as parallel arrays.

    Used for decompositions with very many cat terms; supports vectorized
    materialization through :meth:`kets`.
    """

    n_modes = 1

    def __init__(self, alpha, beta, theta):
        self.alpha = np.ascontiguousarray(alpha, dtype=complex)
        self.beta = np.ascontiguousarray(beta, dtype=complex)
        self.theta = np.ascontiguousarray(theta, dtype=float)
        if not (self.alpha.shape == self.beta.shape == self.theta.shape) or self.alpha.ndim != 1:
            raise InputError("cat batch arrays must be 1-D with equal length")
        for a in (self.alpha, self.beta, self.theta):
            a.flags.writeable = False

    def __len__(self):
        return self.alpha.size

    def __getitem__(self, i):
        if isinstance(i, slice):
            return CatBatch(self.alpha[i], self.beta[i], self.theta[i])
        return Cat(complex(self.alpha[i]), complex(self.beta[i]), float(self.theta[i]))

    def norms(self) -> np.ndarray:
        a, b = self.alpha, self.beta
        cross = np.exp(1j * self.theta + np.conj(a) * b) + np.exp(-1j * self.theta + a * np.conj(b))
        return np.real(2 + cross * np.exp(-(np.abs(a) ** 2 + np.abs(b) ** 2) / 2))

    def kets(self, D: int, start: int = 0, stop: int | None = None) -> np.ndarray:
        """Normalized truncated kets of terms ``start:stop`` as columns (``D x n``)."""
        sl = slice(start, stop)
        a, b, t = self.alpha[sl], self.beta[sl], self.theta[sl]
        N = self[sl].norms()
        if np.any(N < fock.CAT_FLOOR):
            raise DegeneracyError("cat batch contains a degenerate term")
        K = fock.coherent_amplitudes(a, D) + np.exp(1j * t)[:, None] * fock.coherent_amplitudes(b, D)
        return (K / np.sqrt(N)[:, None]).T

    def max_amplitude(self) -> float:
        if not len(self):
            return 0.0
        return float(max(np.abs(self.alpha).max(), np.abs(self.beta).max()))


def pack_states(states) -> Sequence:
    """Store long all-cat sequences compactly."""
    states = tuple(states)
    if len(states) > 256 and all(type(s) is Cat for s in states):
        return CatBatch([s.alpha for s in states], [s.beta for s in states],
                        [s.theta for s in states])
    return states


def default_spec_cutoff(s) -> int:
    """Per-mode cutoff from the displacement/squeezing heuristic."""
    if isinstance(s, CatBatch):
        return fock.default_cutoff(s.max_amplitude())
    if isinstance(s, Fock):
        return max(s.n + 1, fock.default_cutoff())
    if isinstance(s, Coherent):
        return fock.default_cutoff(s.alpha)
    if isinstance(s, DisplacedSqueezed):
        return fock.default_cutoff(s.alpha, s.zeta)
    if isinstance(s, Cat):
        return fock.default_cutoff(max(abs(s.alpha), abs(s.beta)))
    if isinstance(s, GaussianSuperposition):
        return max(fock.default_cutoff(g.alpha, g.zeta) for _, g in s.terms)
    if isinstance(s, PoissonRing):
        return max(fock.default_cutoff(), fock.poisson_cutoff(s.eps))
    if isinstance(s, FockDiagonal):
        return len(s.populations)
    if isinstance(s, Product):
        return max(default_spec_cutoff(p) for p in s.parts)
    raise InputError(f"not a state spec: {s!r}")
