"""Signed-weight Monte Carlo estimation of expectation values.

Each shot draws term ``x`` with probability ``|q_x| / gamma_bar`` and records
``sign(q_x) * y`` with ``y = Tr(O rho_x)`` (exact mode) or an eigenvalue of
``O`` sampled from ``rho_x`` (projective mode). The estimate is
``gamma_bar * mean(sign * y)``.

Shots are split into fixed-size chunks, chunk ``c`` using the generator
``default_rng([seed, c])``; chunk statistics are merged in chunk order, so
results do not depend on the number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any

import numpy as np

from . import fock
from .errors import InputError
from .qpd import Qpd, qpd_from_json, qpd_to_json
from .states import CatBatch

SCHEMA_VERSION = 1
BUILTIN_OBSERVABLES = ("number", "quadrature-Q", "quadrature-P", "fock-projector", "matrix")


@dataclass(frozen=True, eq=False)
class Observable:
    """Hermitian observable on one mode (``mode``) of a possibly multi-mode QPD.

    ``kind`` is one of ``BUILTIN_OBSERVABLES``; ``n`` selects the Fock
    projector, ``matrix`` holds a dense single-mode or full-space matrix.
    """

    kind: str
    n: int | None = None
    matrix: np.ndarray | None = None
    mode: int = 0

    def __post_init__(self):
        if self.kind not in BUILTIN_OBSERVABLES:
            raise InputError(f"unknown observable {self.kind!r}")
        if self.kind == "fock-projector" and (self.n is None or self.n < 0):
            raise InputError("fock-projector needs n >= 0")
        if self.kind == "matrix":
            if self.matrix is None:
                raise InputError("matrix observable needs a matrix")
            M = np.asarray(self.matrix, dtype=complex)
            if M.ndim != 2 or M.shape[0] != M.shape[1]:
                raise InputError("observable matrix must be square")
            if np.max(np.abs(M - M.conj().T)) > 1e-12 * max(1.0, np.max(np.abs(M))):
                raise InputError("observable matrix is not Hermitian")
            object.__setattr__(self, "matrix", M)

    def single_mode(self, D: int) -> np.ndarray:
        if self.kind == "number":
            return fock.number_matrix(D).astype(complex)
        if self.kind == "quadrature-Q":
            return fock.quadrature_matrix(D, "Q").astype(complex)
        if self.kind == "quadrature-P":
            return fock.quadrature_matrix(D, "P").astype(complex)
        if self.kind == "fock-projector":
            return fock.as_density(fock.fock_state(self.n, D))
        return self.matrix

    def full(self, D: int, n_modes: int) -> np.ndarray:
        """Matrix on ``n_modes`` modes at per-mode cutoff ``D``."""
        if self.kind == "matrix" and self.matrix.shape[0] == D ** n_modes and n_modes > 1:
            return self.matrix
        O = self.single_mode(D)
        if O.shape != (D, D):
            raise InputError(f"observable is {O.shape[0]}-dimensional, cutoff is {D}")
        if not 0 <= self.mode < n_modes:
            raise InputError(f"observable mode {self.mode} out of range for {n_modes} modes")
        eye = np.eye(D)
        parts = [O if m == self.mode else eye for m in range(n_modes)]
        out = parts[0]
        for p in parts[1:]:
            out = np.kron(out, p)
        return out


@dataclass(frozen=True, eq=False)
class EstimationTask:
    qpd: Qpd
    observable: Observable
    shots: int
    seed: int = 0
    mode: str = "exact"
    bound: float | None = None
    cutoff: int | None = None
    chunk_size: int = 8192
    workers: int = 1

    def __post_init__(self):
        if int(self.shots) != self.shots or self.shots < 1:
            raise InputError("shots must be a positive integer")
        if self.mode not in ("exact", "projective"):
            raise InputError(f"mode must be 'exact' or 'projective', got {self.mode!r}")
        if self.bound is not None and not self.bound > 0:
            raise InputError("observable bound must be positive")
        if self.chunk_size < 1 or self.workers < 1:
            raise InputError("chunk_size and workers must be >= 1")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise InputError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class EstimateReport:
    mean: float
    stderr: float
    shots: int
    gamma_bar: float
    seed: int
    mode: str
    cutoff: int
    bound: float
    hits: dict[int, int]

    def to_json(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "kind": "estimate_report",
                "mean": self.mean, "stderr": self.stderr, "shots": self.shots,
                "gamma_bar": self.gamma_bar, "seed": self.seed, "mode": self.mode,
                "cutoff": self.cutoff, "bound": self.bound,
                "hits": {str(k): v for k, v in sorted(self.hits.items())}}


def _cdf(qpd: Qpd) -> np.ndarray:
    c = np.cumsum(np.abs(qpd.weights))
    return c / c[-1]


def _draw(cdf: np.ndarray, u: np.ndarray) -> np.ndarray:
    return np.minimum(np.searchsorted(cdf, u, side="right"), cdf.size - 1)


def draw_term(qpd: Qpd, rng: np.random.Generator) -> tuple[int, int]:
    """One draw: index ``x`` with probability ``|q_x| / gamma_bar`` and its sign."""
    if len(qpd) == 0:
        raise InputError("empty decomposition")
    x = int(_draw(_cdf(qpd), rng.random(1))[0])
    return x, int(np.sign(qpd.weights[x]))


def _term_vectors(qpd: Qpd, idx: np.ndarray, D: int):
    """Kets (columns) or densities for the listed terms."""
    if isinstance(qpd.states, CatBatch):
        return [qpd.states.kets(D, i, i + 1)[:, 0] for i in idx]
    out = []
    for i in idx:
        s = qpd.states[i]
        k = s.ket(D)
        out.append(k if k is not None else s.density(D))
    return out


def term_expectations(qpd: Qpd, O: np.ndarray, D: int, idx=None) -> np.ndarray:
    """``Re Tr(O rho_x)`` for the listed terms (all by default)."""
    idx = np.arange(len(qpd)) if idx is None else np.asarray(idx)
    if isinstance(qpd.states, CatBatch):
        out = np.empty(idx.size)
        for s in range(0, idx.size, 8192):
            sel = idx[s:s + 8192]
            K = np.concatenate([qpd.states.kets(D, i, i + 1) for i in sel], axis=1)
            out[s:s + 8192] = np.real(np.einsum("ij,ij->j", K.conj(), O @ K))
        return out
    vals = []
    for v in _term_vectors(qpd, idx, D):
        if v.ndim == 1:
            vals.append(np.vdot(v, O @ v).real)
        else:
            vals.append(np.real(np.einsum("ij,ji->", O, v)))
    return np.array(vals, dtype=float)


def _eigen_probs(qpd: Qpd, V: np.ndarray, D: int, idx) -> np.ndarray:
    rows = []
    for v in _term_vectors(qpd, idx, D):
        if v.ndim == 1:
            p = np.abs(V.conj().T @ v) ** 2
        else:
            p = np.real(np.einsum("ji,jk,ki->i", V.conj(), v, V))
        p = np.clip(p, 0, None)
        rows.append(p / p.sum())
    return np.array(rows)


def _chunk_stats(x: np.ndarray):
    m = float(np.mean(x))
    return x.size, m, float(np.sum((x - m) ** 2))


def _merge(a, b):
    na, ma, Ma = a
    nb, mb, Mb = b
    n = na + nb
    d = mb - ma
    return n, ma + d * nb / n, Ma + Mb + d * d * na * nb / n


def estimate(task: EstimationTask) -> EstimateReport:
    qpd = task.qpd
    D = task.cutoff or qpd.default_cutoff()
    O = task.observable.full(D, qpd.n_modes)
    if O.shape != (D ** qpd.n_modes,) * 2:
        raise InputError(f"observable dimension {O.shape} does not match the terms")
    if np.max(np.abs(O - O.conj().T)) > 1e-12 * max(1.0, np.max(np.abs(O))):
        raise InputError("observable is not Hermitian")
    evals, V = np.linalg.eigh(O)
    radius = float(np.max(np.abs(evals)))
    B = task.bound if task.bound is not None else radius
    if B < radius * (1 - 1e-12):
        raise InputError(f"declared bound {B} is below the spectral radius {radius:.6g}")

    cdf = _cdf(qpd)
    signs = np.sign(qpd.weights)
    gb = qpd.gamma_bar
    n_chunks = math.ceil(task.shots / task.chunk_size)
    sizes = [min(task.chunk_size, task.shots - c * task.chunk_size) for c in range(n_chunks)]

    def run(fn, items):
        if task.workers > 1 and len(items) > 1:
            with ThreadPoolExecutor(task.workers) as ex:
                return list(ex.map(fn, items))
        return [fn(i) for i in items]

    def draw_chunk(c):
        rng = np.random.default_rng([int(task.seed), c])
        return rng, _draw(cdf, rng.random(sizes[c]))

    drawn = run(draw_chunk, range(n_chunks))
    used = np.unique(np.concatenate([d[1] for d in drawn]))
    pos = {int(x): i for i, x in enumerate(used)}
    if task.mode == "exact":
        y = term_expectations(qpd, O, D, used)
    else:
        P = np.cumsum(_eigen_probs(qpd, V, D, used), axis=1)
        P /= P[:, -1:]

    def values(c):
        rng, idx = drawn[c]
        loc = np.fromiter((pos[int(i)] for i in idx), dtype=np.int64, count=idx.size)
        if task.mode == "exact":
            v = y[loc]
        else:
            u = rng.random(idx.size)
            k = np.array([min(np.searchsorted(P[l], ui, side="right"), evals.size - 1)
                          for l, ui in zip(loc, u)], dtype=np.int64)
            v = evals[k]
        return _chunk_stats(signs[idx] * v)

    stats = run(values, range(n_chunks))
    total = stats[0]
    for s in stats[1:]:
        total = _merge(total, s)
    n, m, M2 = total
    sd = math.sqrt(M2 / (n - 1)) if n > 1 else 0.0
    ids, counts = np.unique(np.concatenate([d[1] for d in drawn]), return_counts=True)
    return EstimateReport(gb * m, gb * sd / math.sqrt(n), int(n), gb, int(task.seed), task.mode,
                          D, float(B), {int(i): int(k) for i, k in zip(ids, counts)})


def exact_expectation(qpd: Qpd, observable: Observable, D: int | None = None) -> float:
    """``sum_x q_x Tr(O rho_x)`` evaluated term by term."""
    D = D or qpd.default_cutoff()
    O = observable.full(D, qpd.n_modes)
    return float(np.dot(qpd.weights, term_expectations(qpd, O, D)))


def predicted_stderr(qpd: Qpd, observable: Observable, shots: int, D: int | None = None) -> float:
    """Standard error of the exact-mode estimator:
    ``sqrt(gamma_bar sum_x |q_x| y_x^2 - (sum_x q_x y_x)^2) / sqrt(shots)``."""
    D = D or qpd.default_cutoff()
    y = term_expectations(qpd, observable.full(D, qpd.n_modes), D)
    second = qpd.gamma_bar * float(np.dot(np.abs(qpd.weights), y * y))
    first = float(np.dot(qpd.weights, y))
    return math.sqrt(max(second - first * first, 0.0) / shots)


def shots_for_accuracy(gamma_bar: float, eps_stat: float, delta: float, B: float) -> int:
    """Smallest shot count with ``2 exp(-n eps^2 / (2 gamma^2 B^2)) <= delta``."""
    for name, v in (("gamma_bar", gamma_bar), ("eps_stat", eps_stat), ("delta", delta), ("B", B)):
        if not v > 0:
            raise InputError(f"{name} must be positive")
    if not delta < 1:
        raise InputError("delta must be < 1")
    x = 2 * gamma_bar ** 2 * B ** 2 * math.log(2 / delta) / eps_stat ** 2
    # absorb rounding when x is an integer in exact arithmetic
    return max(1, math.ceil(x * (1 - 1e-12)))


# -- JSON ------------------------------------------------------------------

def observable_to_json(o: Observable) -> dict:
    d: dict[str, Any] = {"type": o.kind, "mode": o.mode}
    if o.kind == "fock-projector":
        d["n"] = o.n
    if o.kind == "matrix":
        d["re"] = np.real(o.matrix).tolist()
        d["im"] = np.imag(o.matrix).tolist()
    return d


def observable_from_json(obj: Any, path: str = "observable") -> Observable:
    if isinstance(obj, str):
        obj = {"type": obj}
    if not isinstance(obj, dict) or "type" not in obj:
        raise InputError(f"{path}: expected an object with a 'type' field")
    extra = set(obj) - {"type", "n", "re", "im", "mode"}
    if extra:
        raise InputError(f"{path}: unknown field(s) {sorted(extra)}")
    kind = obj["type"]
    if kind not in BUILTIN_OBSERVABLES:
        raise InputError(f"{path}.type: unknown observable {kind!r}")
    M = None
    if kind == "matrix":
        try:
            M = np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj.get("im", 0.0), dtype=float)
        except (KeyError, TypeError, ValueError):
            raise InputError(f"{path}: matrix needs numeric 're' (and optional 'im') arrays") from None
    n = obj.get("n")
    if n is not None and (isinstance(n, bool) or not isinstance(n, int)):
        raise InputError(f"{path}.n: expected an integer")
    mode = obj.get("mode", 0)
    if isinstance(mode, bool) or not isinstance(mode, int):
        raise InputError(f"{path}.mode: expected an integer")
    return Observable(kind, n, M, mode)


_TASK_FIELDS = {"schema_version", "kind", "qpd", "observable", "shots", "seed", "mode",
                "bound", "cutoff", "chunk_size"}


def task_to_json(t: EstimationTask) -> dict:
    return {"schema_version": SCHEMA_VERSION, "kind": "estimation_task",
            "qpd": qpd_to_json(t.qpd), "observable": observable_to_json(t.observable),
            "shots": t.shots, "seed": t.seed, "mode": t.mode, "bound": t.bound,
            "cutoff": t.cutoff, "chunk_size": t.chunk_size}


def task_from_json(obj: Any, qpd: Qpd | None = None) -> EstimationTask:
    if not isinstance(obj, dict):
        raise InputError("task: expected a JSON object")
    extra = set(obj) - _TASK_FIELDS
    if extra:
        raise InputError(f"task: unknown field(s) {sorted(extra)}")
    if obj.get("kind", "estimation_task") != "estimation_task":
        raise InputError("task.kind: expected 'estimation_task'")
    if qpd is None:
        if "qpd" not in obj:
            raise InputError("task.qpd: missing")
        qpd = qpd_from_json(obj["qpd"])
    if "observable" not in obj:
        raise InputError("task.observable: missing")

    def integer(name, default):
        v = obj.get(name, default)
        if v is None:
            return None
        if isinstance(v, bool) or not isinstance(v, int):
            raise InputError(f"task.{name}: expected an integer")
        return v

    bound = obj.get("bound")
    if bound is not None and (isinstance(bound, bool) or not isinstance(bound, (int, float))):
        raise InputError("task.bound: expected a number")
    return EstimationTask(qpd, observable_from_json(obj["observable"], "task.observable"),
                          integer("shots", None) or 0, integer("seed", 0), obj.get("mode", "exact"),
                          None if bound is None else float(bound), integer("cutoff", None),
                          integer("chunk_size", 8192))
