"""Command-line front end.

Exit codes: 0 success, 2 input error, 3 numerical-tolerance failure,
4 output I/O failure. Every report records the Fock cutoff it used.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import applications as apps
from . import fock, gaussian
from .errors import (DegeneracyError, InputError, ResourceError, ToleranceError,
                     TruncationError)
from .montecarlo import EstimationTask, estimate, observable_from_json, task_from_json
from .qpd import (C2Grid, build_bell_cat, build_c2, build_fock_k, build_g2, build_gkp,
                  build_single_photon_eps, qpd_from_json, qpd_to_json, validate)
from .serialization import csv_text, stable_dumps
from .states import (Cat, Coherent, DisplacedSqueezed, Fock, GaussianSuperposition, PoissonRing,
                     default_spec_cutoff, spec_from_json, spec_to_json)

SCHEMA_VERSION = 1
EXIT_OK, EXIT_INPUT, EXIT_TOLERANCE, EXIT_IO = 0, 2, 3, 4


class OutputError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Resolved options of one invocation.

    Defaults: no cutoff override (auto from the displacement/squeezing
    heuristic), seed 0, 100000 shots, grid ``dr=0.2, tail_tol=1e-4``,
    JSON output to stdout.
    """

    command: str
    inputs: tuple[str, ...] = ()
    output: str | None = None
    cutoff: int | None = None
    seed: int = 0
    shots: int = 100_000
    dr: float = 0.2
    tail_tol: float = 1e-4
    radius: float | None = None
    n_phi: int | None = None
    format: str = "json"

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        names = {f.name for f in fields(cls)}
        extra = set(d) - names
        if extra:
            raise InputError(f"config: unknown field(s) {sorted(extra)}")
        if "inputs" in d:
            d = dict(d, inputs=tuple(d["inputs"]))
        cfg = cls(**d)
        if cfg.format not in ("json", "csv"):
            raise InputError(f"config.format: expected json or csv, got {cfg.format!r}")
        if cfg.cutoff is not None and cfg.cutoff < 1:
            raise InputError("config.cutoff: must be >= 1")
        return cfg

    @property
    def grid(self) -> C2Grid:
        return C2Grid(self.dr, self.tail_tol, self.radius, self.n_phi)


# -- I/O helpers -----------------------------------------------------------

def read_json(path: str) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise InputError(f"{path}: cannot read ({e.strerror})") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from None


def emit(text: str, output: str | None) -> None:
    if output is None or output == "-":
        sys.stdout.write(text)
        return
    try:
        Path(output).write_text(text, newline="")
    except OSError as e:
        raise OutputError(f"{output}: cannot write ({e.strerror})") from None


def emit_report(result: Any, cfg: RunConfig, csv_header: Sequence[str] | None = None,
                csv_rows: Sequence[Sequence] | None = None) -> None:
    if cfg.format == "csv":
        if csv_header is None:
            raise InputError(f"{cfg.command}: CSV output not available")
        emit(csv_text(csv_header, csv_rows), cfg.output)
    else:
        emit(stable_dumps(result), cfg.output)


def parse_complex(s: str) -> complex:
    try:
        return complex(s.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise InputError(f"not a complex number: {s!r}") from None


def load_state(path: str):
    obj = read_json(path)
    if isinstance(obj, dict) and obj.get("kind") == "state":
        if obj.get("schema_version") != SCHEMA_VERSION:
            raise InputError(f"{path}: schema_version must be {SCHEMA_VERSION}")
        return spec_from_json(obj.get("state"), f"{path}: state")
    return spec_from_json(obj, f"{path}: state")


def load_qpd(path: str):
    obj = read_json(path)
    try:
        return qpd_from_json(obj)
    except InputError as e:
        raise InputError(f"{path}: {e}") from None


def state_document(spec, cutoff: int) -> dict:
    return {"schema_version": SCHEMA_VERSION, "kind": "state", "state": spec_to_json(spec),
            "cutoff": cutoff}


# -- commands --------------------------------------------------------------

def cmd_state_build(a, cfg: RunConfig) -> int:
    chosen = [x for x in ("fock", "coherent", "squeezed", "cat", "ring", "spec") if getattr(a, x) is not None]
    if len(chosen) != 1:
        raise InputError("state build: give exactly one of --fock, --coherent, --squeezed, --cat, --ring, --spec")
    if a.fock is not None:
        if a.fock < 0:
            raise InputError("--fock: photon number must be >= 0")
        spec = Fock(a.fock)
    elif a.coherent is not None:
        spec = Coherent(parse_complex(a.coherent))
    elif a.squeezed is not None:
        spec = DisplacedSqueezed(parse_complex(a.squeezed[0]), parse_complex(a.squeezed[1]))
    elif a.cat is not None:
        spec = Cat(parse_complex(a.cat[0]), parse_complex(a.cat[1]), float(a.cat[2]))
        if spec.norm < fock.CAT_FLOOR:
            raise DegeneracyError("cat state is degenerate")
    elif a.ring is not None:
        spec = PoissonRing(a.ring, a.min_photon)
    else:
        try:
            obj = json.loads(a.spec)
        except json.JSONDecodeError as e:
            raise InputError(f"--spec:{e.lineno}:{e.colno}: {e.msg}") from None
        spec = spec_from_json(obj, "--spec")
        if isinstance(spec, GaussianSuperposition) and a.normalize:
            spec = spec.normalized()
    if cfg.cutoff is not None:
        # an explicit cutoff must hold the state
        spec.density(cfg.cutoff, fock.TAIL_TOL)
    emit_report(state_document(spec, cfg.cutoff or default_spec_cutoff(spec)), cfg)
    return EXIT_OK


def cmd_state_inspect(a, cfg: RunConfig) -> int:
    spec = load_state(a.input)
    D = cfg.cutoff or default_spec_cutoff(spec)
    rho = spec.density(D, None)
    tr = float(np.trace(rho).real)
    report = {"schema_version": SCHEMA_VERSION, "kind": "state_report",
              "state": spec_to_json(spec), "cutoff": D, "n_modes": spec.n_modes,
              "trace_at_cutoff": tr, "tail_mass": max(0.0, 1 - tr),
              "purity": float(np.real(np.einsum("ij,ji->", rho, rho))) / tr ** 2}
    if spec.n_modes == 1:
        report["mean_photon_number"] = float(np.real(np.trace(fock.number_matrix(D) @ rho))) / tr
    if isinstance(spec, GaussianSuperposition):
        report["norm2_from_overlaps"] = spec.norm2()
    emit_report(report, cfg)
    return EXIT_OK


def _coeff_list(s: str) -> list[float]:
    try:
        return [float(x) for x in s.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"--coeffs: expected comma-separated numbers, got {s!r}") from None


def cmd_qpd_build(a, cfg: RunConfig) -> int:
    m = a.method
    if m == "g2":
        if not a.input:
            raise InputError("qpd build --method g2 needs --input STATE_FILE")
        spec = load_state(a.input)
        if not isinstance(spec, GaussianSuperposition):
            raise InputError(f"{a.input}: g2 needs a gaussian_superposition state")
        q = build_g2(spec.normalized() if a.normalize else spec)
    elif m == "c2":
        if not a.input:
            raise InputError("qpd build --method c2 needs --input STATE_FILE")
        q = build_c2(load_state(a.input), cfg.grid, cfg.cutoff)
    elif m == "photon-eps":
        if a.eps is None:
            raise InputError("qpd build --method photon-eps needs --eps")
        q = build_single_photon_eps(a.eps)
    elif m == "fock-k":
        if a.k is None or a.delta is None:
            raise InputError("qpd build --method fock-k needs --k and --delta")
        q = build_fock_k(a.k, a.delta, cfg.cutoff)
    elif m == "bell-cat":
        if a.alpha is None:
            raise InputError("qpd build --method bell-cat needs --alpha")
        q = build_bell_cat(parse_complex(a.alpha), a.theta)
    else:
        if a.r is None:
            raise InputError("qpd build --method gkp needs --r")
        if (a.walk_steps is None) == (a.coeffs is None):
            raise InputError("qpd build --method gkp needs exactly one of --walk-steps, --coeffs")
        coeffs = None if a.coeffs is None else _coeff_list(a.coeffs)
        q = build_gkp(coeffs, a.r, a.mu, a.walk_steps)
    doc = qpd_to_json(q)
    doc["cutoff"] = cfg.cutoff or q.default_cutoff()
    emit_report(doc, cfg)
    return EXIT_OK


def cmd_qpd_validate(a, cfg: RunConfig) -> int:
    q = load_qpd(a.input)
    target = load_state(a.target) if a.target else None
    if target is None and q.target.state is None:
        raise InputError("qpd validate: decomposition has no reference state; pass --target")
    D = cfg.cutoff or max(q.default_cutoff(),
                          default_spec_cutoff(target if target is not None else q.target.state))
    rep = validate(q, target, D)
    doc = {"schema_version": SCHEMA_VERSION, "kind": "validation_report", **rep.to_json()}
    ok = rep.epsilon_promise_satisfied
    if a.tolerance is not None:
        ok = rep.trace_distance <= a.tolerance
        doc["tolerance"] = a.tolerance
    doc["passed"] = bool(ok)
    emit_report(doc, cfg)
    return EXIT_OK if ok else EXIT_TOLERANCE


def cmd_estimate(a, cfg: RunConfig) -> int:
    if a.task:
        obj = read_json(a.task)
        try:
            task = task_from_json(obj, load_qpd(a.qpd) if a.qpd else None)
        except InputError as e:
            raise InputError(f"{a.task}: {e}") from None
        over = {}
        if a.seed is not None:
            over["seed"] = a.seed
        if a.shots is not None:
            over["shots"] = a.shots
        if cfg.cutoff is not None:
            over["cutoff"] = cfg.cutoff
        if over:
            d = {f.name: getattr(task, f.name) for f in fields(task)}
            d.update(over)
            task = EstimationTask(**d)
    else:
        if not a.qpd:
            raise InputError("estimate needs --task TASK_FILE or --qpd QPD_FILE")
        obs = a.observable or "number"
        if obs.startswith("fock-projector"):
            _, _, n = obs.partition(":")
            if not n.isdigit():
                raise InputError("--observable fock-projector:N needs an integer N")
            o = observable_from_json({"type": "fock-projector", "n": int(n)}, "--observable")
        else:
            o = observable_from_json({"type": obs}, "--observable")
        task = EstimationTask(load_qpd(a.qpd), o, cfg.shots, cfg.seed, a.mode, a.bound,
                              cfg.cutoff, a.chunk_size, a.workers)
    rep = estimate(task)
    emit_report(rep.to_json(), cfg)
    return EXIT_OK


def cmd_gkp_bench(a, cfg: RunConfig) -> int:
    rows = apps.gkp_shot_analysis(a.Lmax, a.r)
    names = apps.field_names(apps.GkpBenchRow)
    doc = {"schema_version": SCHEMA_VERSION, "kind": "gkp_bench",
           "rows": [{n: getattr(r, n) for n in names} for r in rows]}
    emit_report(doc, cfg, names, [[getattr(r, n) for n in names] for r in rows])
    return EXIT_OK


def cmd_catamp(a, cfg: RunConfig) -> int:
    D = cfg.cutoff
    rows = apps.cat_amp_plan(parse_complex(a.alpha), a.theta, a.rounds, a.check_fidelity, D)
    names = apps.field_names(apps.CatAmpRound)
    doc = {"schema_version": SCHEMA_VERSION, "kind": "catamp",
           "alpha0": parse_complex(a.alpha), "theta": a.theta,
           "rows": [{n: getattr(r, n) for n in names} for r in rows]}
    if a.check_fidelity:
        doc["cutoff"] = D or fock.default_cutoff(math.sqrt(2) * rows[-1].alpha)
    emit_report(doc, cfg, names, [[getattr(r, n) for n in names] for r in rows])
    return EXIT_OK


def _load_symplectic(spec: str):
    if spec == "balanced-pair":
        return gaussian.balanced_pair_symplectic(2, 0, 1), 1, 1
    if spec == "local":
        return gaussian.direct_sum(gaussian.squeeze_symplectic(1, 0.3, 0),
                                   gaussian.squeeze_symplectic(1, -0.5, 0)), 1, 1
    obj = read_json(spec)
    if not isinstance(obj, dict) or "matrix" not in obj:
        raise InputError(f"{spec}: expected an object with 'matrix', 'Ma', 'Mb'")
    extra = set(obj) - {"matrix", "Ma", "Mb", "schema_version", "kind"}
    if extra:
        raise InputError(f"{spec}: unknown field(s) {sorted(extra)}")
    try:
        S = np.asarray(obj["matrix"], dtype=float)
    except (TypeError, ValueError):
        raise InputError(f"{spec}: matrix must be numeric") from None
    Ma, Mb = obj.get("Ma"), obj.get("Mb")
    if not isinstance(Ma, int) or not isinstance(Mb, int) or Ma < 1 or Mb < 1:
        raise InputError(f"{spec}: Ma and Mb must be positive integers")
    return S, Ma, Mb


def cmd_nogo_scan(a, cfg: RunConfig) -> int:
    S, Ma, Mb = _load_symplectic(a.S)
    if not a.rmax > 0 or a.points < 2:
        raise InputError("nogo scan needs --rmax > 0 and --points >= 2")
    grid = np.linspace(0.0, a.rmax, a.points)
    scan = gaussian.nogo_scan(S, grid, Ma, Mb, threshold=a.threshold)
    doc = {"schema_version": SCHEMA_VERSION, "kind": "nogo_scan", "Ma": Ma, "Mb": Mb,
           "r": list(scan.r), "bound": list(scan.bound), "constant": scan.constant,
           "increasing": scan.increasing, "exceeds_threshold": scan.exceeds_threshold,
           "threshold": scan.threshold, "verdict": scan.verdict}
    emit_report(doc, cfg, ["r", "bound"], list(zip(scan.r, scan.bound)))
    return EXIT_OK


def cmd_figure(a, cfg: RunConfig) -> int:
    if a.which == "gkp":
        rows = apps.gkp_figure_rows(a.Lmax, tuple(a.r_values))
        header = apps.GKP_FIGURE_HEADER
        doc = {"schema_version": SCHEMA_VERSION, "kind": "figure_gkp",
               "rows": [dict(zip(header, r)) for r in rows]}
        if cfg.format == "json":
            emit(stable_dumps(doc), cfg.output)
        else:
            emit(csv_text(header, rows), cfg.output)
    else:
        if cfg.format == "json":
            rows = apps.catamp_figure_rows(tuple(a.alpha_values), a.theta, a.rounds)
            names = apps.field_names(apps.CatAmpRound)
            emit(stable_dumps({"schema_version": SCHEMA_VERSION, "kind": "figure_catamp",
                               "theta": a.theta,
                               "rows": [{n: getattr(r, n) for n in names} for r in rows]}),
                 cfg.output)
        else:
            emit(apps.catamp_figure_csv(tuple(a.alpha_values), a.theta, a.rounds), cfg.output)
    return EXIT_OK


# -- parser ----------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(f"{self.prog}: {message}")


def _common(p):
    p.add_argument("-o", "--output", help="output file (default: stdout)")
    p.add_argument("--cutoff", type=int, help="per-mode Fock cutoff (default: heuristic)")
    p.add_argument("--format", choices=("json", "csv"), help="output format (default: json)")
    p.add_argument("--config", help="JSON file with RunConfig defaults")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cvknit", description="Quasiprobability decompositions of continuous-variable states.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    st = sub.add_parser("state", help="build or inspect state files")
    sts = st.add_subparsers(dest="action", required=True, parser_class=_Parser)
    b = sts.add_parser("build")
    _common(b)
    b.add_argument("--fock", type=int, metavar="N")
    b.add_argument("--coherent", metavar="ALPHA")
    b.add_argument("--squeezed", nargs=2, metavar=("ALPHA", "ZETA"))
    b.add_argument("--cat", nargs=3, metavar=("ALPHA", "BETA", "THETA"))
    b.add_argument("--ring", type=float, metavar="EPS")
    b.add_argument("--min-photon", type=int, default=0, choices=(0, 1))
    b.add_argument("--spec", metavar="JSON", help="inline state JSON")
    b.add_argument("--normalize", action="store_true")
    b.set_defaults(func=cmd_state_build)
    i = sts.add_parser("inspect")
    _common(i)
    i.add_argument("input")
    i.set_defaults(func=cmd_state_inspect)

    qp = sub.add_parser("qpd", help="build or validate decompositions")
    qps = qp.add_subparsers(dest="action", required=True, parser_class=_Parser)
    b = qps.add_parser("build")
    _common(b)
    b.add_argument("--method", required=True,
                   choices=("g2", "c2", "photon-eps", "fock-k", "bell-cat", "gkp"))
    b.add_argument("--input", help="state file (g2, c2)")
    b.add_argument("--normalize", action="store_true", help="normalize a g2 superposition first")
    b.add_argument("--eps", type=float)
    b.add_argument("--k", type=int)
    b.add_argument("--delta", type=float)
    b.add_argument("--alpha")
    b.add_argument("--theta", type=float, default=0.0)
    b.add_argument("--r", type=float)
    b.add_argument("--mu", type=int, default=0, choices=(0, 1))
    b.add_argument("--walk-steps", type=int)
    b.add_argument("--coeffs", help="comma-separated GKP peak weights")
    b.add_argument("--dr", type=float)
    b.add_argument("--tail-tol", type=float)
    b.add_argument("--radius", type=float)
    b.add_argument("--n-phi", type=int)
    b.set_defaults(func=cmd_qpd_build)
    v = qps.add_parser("validate")
    _common(v)
    v.add_argument("input")
    v.add_argument("--target", help="state file (default: the decomposition's reference)")
    v.add_argument("--tolerance", type=float, help="fail (exit 3) above this 1-norm distance")
    v.set_defaults(func=cmd_qpd_validate)

    e = sub.add_parser("estimate", help="Monte Carlo estimate of an observable")
    _common(e)
    e.add_argument("--task")
    e.add_argument("--qpd")
    e.add_argument("--observable", help="number | quadrature-Q | quadrature-P | fock-projector:N")
    e.add_argument("--shots", type=int)
    e.add_argument("--seed", type=int)
    e.add_argument("--mode", choices=("exact", "projective"), default="exact")
    e.add_argument("--bound", type=float)
    e.add_argument("--chunk-size", type=int, default=8192)
    e.add_argument("--workers", type=int, default=1)
    e.set_defaults(func=cmd_estimate)

    g = sub.add_parser("gkp", help="GKP shot-count benchmark")
    gs = g.add_subparsers(dest="action", required=True, parser_class=_Parser)
    b = gs.add_parser("bench")
    _common(b)
    b.add_argument("--Lmax", type=int, required=True)
    b.add_argument("--r", type=float, required=True)
    b.set_defaults(func=cmd_gkp_bench)

    c = sub.add_parser("catamp", help="cat amplification overheads")
    _common(c)
    c.add_argument("--alpha", required=True)
    c.add_argument("--theta", type=float, default=0.0)
    c.add_argument("--rounds", type=int, required=True)
    c.add_argument("--check-fidelity", action="store_true")
    c.set_defaults(func=cmd_catamp)

    n = sub.add_parser("nogo", help="separability-overhead witness")
    ns = n.add_subparsers(dest="action", required=True, parser_class=_Parser)
    s = ns.add_parser("scan")
    _common(s)
    s.add_argument("--S", required=True, help="balanced-pair | local | JSON file {matrix, Ma, Mb}")
    s.add_argument("--rmax", type=float, required=True)
    s.add_argument("--points", type=int, default=31)
    s.add_argument("--threshold", type=float, default=1e3)
    s.set_defaults(func=cmd_nogo_scan)

    f = sub.add_parser("figure", help="figure datasets")
    _common(f)
    f.add_argument("which", choices=("gkp", "catamp"))
    f.add_argument("--Lmax", type=int, default=10)
    f.add_argument("--r-values", type=float, nargs="+", default=[0.1, 1.0])
    f.add_argument("--alpha-values", type=float, nargs="+", default=[0.1, 0.5, 1.0])
    f.add_argument("--theta", type=float, default=0.0)
    f.add_argument("--rounds", type=int, default=5)
    f.set_defaults(func=cmd_figure, format_default="csv")
    return p


def _config(a) -> RunConfig:
    base: dict[str, Any] = {}
    if getattr(a, "config", None):
        obj = read_json(a.config)
        if not isinstance(obj, dict):
            raise InputError(f"{a.config}: expected a JSON object")
        base.update(obj)
    base["command"] = " ".join(x for x in (a.command, getattr(a, "action", None)) if x)
    inputs = [x for x in (getattr(a, "input", None), getattr(a, "target", None),
                          getattr(a, "task", None), getattr(a, "qpd", None)) if isinstance(x, str)]
    base["inputs"] = tuple(inputs)
    for name in ("output", "cutoff", "seed", "shots", "dr", "tail_tol", "radius", "n_phi", "format"):
        v = getattr(a, name, None)
        if v is not None:
            base[name] = v
    if "format" not in base and getattr(a, "format_default", None):
        base["format"] = a.format_default
    return RunConfig.from_dict(base)


def main(argv: Sequence[str] | None = None) -> int:
    try:
        a = build_parser().parse_args(argv)
        cfg = _config(a)
        return a.func(a, cfg)
    except OutputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except (ToleranceError, TruncationError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_TOLERANCE
    except (InputError, DegeneracyError, ResourceError, TypeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
