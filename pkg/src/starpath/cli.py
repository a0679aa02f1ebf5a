"""Batch runner: ``starpath {amplitude,convergence,qdist,star-product,selftest}``.

Exit status: 0 pass, 1 tolerance violation, 2 bad configuration, 3 numerical
failure. Reports are written atomically; only the ``timing_seconds`` field
varies between identical runs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import acceptance, fock
from .errors import StarpathError
from .pathintegral import ROUTES, SliceConfig, compare_all, convergence_study
from .quasiprob import QuasiDistribution, distribution_rule, quasi_distribution
from .symbols import NormalSymbol, star_multiply

EXIT_OK, EXIT_TOLERANCE, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


def _pair(x) -> list[float]:
    if isinstance(x, (int, float)):
        return [float(x), 0.0]
    if not isinstance(x, (list, tuple)) or len(x) != 2:
        raise ConfigError(f"complex values are [re, im] pairs, got {x!r}")
    return [float(x[0]), float(x[1])]


@dataclass
class ExperimentConfig:
    hamiltonian: list = field(default_factory=lambda: [[1, 1, 1.0, 0.0]])
    alpha_i: list = field(default_factory=lambda: [0.5, 0.0])
    alpha_f: list = field(default_factory=lambda: [0.0, 0.3])
    T: float = 1.0
    routes: list = field(default_factory=lambda: ["star", "oracle"])
    D: int | None = None
    K: int = 64
    tol: float = 1e-10
    nodes: int | None = None
    N: int = 8
    N_list: list = field(default_factory=lambda: [10, 20, 40, 80])
    kernel: str = "linear"
    rtol: float = 1e-6
    s: float = -1.0
    state: list = field(default_factory=lambda: [0.0, 0.0])
    window: list = field(default_factory=lambda: [-3.0, 3.0])
    grid: int = 61
    output: str = "."

    def __post_init__(self):
        try:
            self.hamiltonian = [
                [int(m), int(n), float(re), float(im)] for m, n, re, im in self.hamiltonian
            ]
            self.alpha_i = _pair(self.alpha_i)
            self.alpha_f = _pair(self.alpha_f)
            self.state = _pair(self.state)
            self.T = float(self.T)
            self.routes = [str(r) for r in self.routes]
            self.D = None if self.D is None else int(self.D)
            self.K = int(self.K)
            self.tol = float(self.tol)
            self.nodes = None if self.nodes is None else int(self.nodes)
            self.N = int(self.N)
            self.N_list = [int(n) for n in self.N_list]
            self.rtol = float(self.rtol)
            self.s = float(self.s)
            self.window = [float(w) for w in self.window]
            self.grid = int(self.grid)
            self.output = str(self.output)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        if not self.routes:
            raise ConfigError("routes must be nonempty")
        bad = set(self.routes) - set(ROUTES)
        if bad:
            raise ConfigError(f"unknown routes {sorted(bad)}")
        for name in ("K", "tol", "N", "rtol", "grid"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        for name in ("D", "nodes"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ConfigError(f"{name} must be positive")
        if any(n <= 0 for n in self.N_list):
            raise ConfigError("N_list entries must be positive")
        if self.kernel not in ("linear", "exponential"):
            raise ConfigError(f"unknown kernel {self.kernel!r}")
        if len(self.window) != 2 or not self.window[0] < self.window[1]:
            raise ConfigError("window must be [lo, hi] with lo < hi")
        if not -1.0 <= self.s <= 1.0:
            raise ConfigError("s must lie in [-1, 1]")

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentConfig:
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys {sorted(extra)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def H(self) -> NormalSymbol:
        return NormalSymbol.from_records(self.hamiltonian)

    def slice_config(self, N: int | None = None) -> SliceConfig:
        return SliceConfig(
            self.N if N is None else N, self.T, complex(*self.alpha_i), complex(*self.alpha_f)
        )


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_atomic(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run_amplitude(cfg: ExperimentConfig) -> int:
    sc = cfg.slice_config()
    H = cfg.H
    if "oracle" in cfg.routes:
        D = cfg.D if cfg.D is not None else fock.default_dim(sc.alpha_i, sc.alpha_f)
        for a in (sc.alpha_i, sc.alpha_f):
            fock.check_admissible(a, D)
    start = time.perf_counter()
    report = compare_all(
        sc,
        H,
        routes=cfg.routes,
        D=cfg.D,
        max_order=cfg.K,
        tol=cfg.tol,
        nodes=cfg.nodes,
        kernel=cfg.kernel,
    )
    elapsed = time.perf_counter() - start
    worst = report.max_error()
    passed = worst <= cfg.rtol
    out = report.to_json()
    out["config"] = cfg.to_dict()
    out["passed"] = passed
    out["timing_seconds"] = elapsed
    lines = [f"{k}: {v.real:+.15e} {v.imag:+.15e}i" for k, v in report.values.items()]
    lines += [f"rel_error {k}: {v:.3e}" for k, v in report.relative_errors().items()]
    lines.append(f"{'PASS' if passed else 'FAIL'} max relative error {worst:.3e} (rtol {cfg.rtol:g})")
    summary = "\n".join(lines) + "\n"
    outdir = Path(cfg.output)
    write_atomic(outdir / "amplitude.json", _dumps(out))
    write_atomic(outdir / "amplitude.txt", summary)
    sys.stdout.write(summary)
    return EXIT_OK if passed else EXIT_TOLERANCE


def run_convergence(cfg: ExperimentConfig) -> int:
    if len(cfg.N_list) < 3:
        raise ConfigError("N_list needs at least three entries")
    start = time.perf_counter()
    study = convergence_study(
        cfg.slice_config(),
        cfg.H,
        cfg.N_list,
        nodes=cfg.nodes or 32,
        D=cfg.D,
        kernel=cfg.kernel,
    )
    elapsed = time.perf_counter() - start
    passed = study.exact or (study.slope is not None and 0.9 <= study.slope <= 1.1)
    side = study.to_json()
    side.update(config=cfg.to_dict(), passed=passed, timing_seconds=elapsed)
    outdir = Path(cfg.output)
    write_atomic(outdir / "convergence.csv", study.to_csv())
    write_atomic(outdir / "convergence.json", _dumps(side))
    msg = "exact (errors at rounding floor)" if study.exact else f"slope {study.slope:.4f}"
    sys.stdout.write(f"{'PASS' if passed else 'FAIL'} {msg}\n")
    return EXIT_OK if passed else EXIT_TOLERANCE


def run_qdist(cfg: ExperimentConfig) -> int:
    gamma = complex(*cfg.state)
    D = cfg.D if cfg.D is not None else fock.default_dim(gamma)
    v = fock.coherent_vector(gamma, D)
    rho = np.outer(v, v.conj())
    xs = np.linspace(cfg.window[0], cfg.window[1], cfg.grid)
    pts = (xs[:, None] + 1j * xs[None, :]).ravel()
    start = time.perf_counter()
    vals = quasi_distribution(rho, pts, cfg.s)
    norm = QuasiDistribution.from_state(rho, cfg.s, distribution_rule(cfg.s).shifted(gamma))
    elapsed = time.perf_counter() - start
    dist = QuasiDistribution(cfg.s, "grid", pts, None, vals.real, vals.imag)
    residual = abs(norm.normalization() - 1.0)
    side = {
        "config": cfg.to_dict(),
        "normalization_residual": residual,
        "max_imag_residual": float(np.abs(vals.imag).max()),
        "timing_seconds": elapsed,
    }
    outdir = Path(cfg.output)
    write_atomic(outdir / "qdist.csv", dist.to_csv())
    write_atomic(outdir / "qdist.json", _dumps(side))
    sys.stdout.write(f"s={cfg.s:g}: {pts.size} points, normalization residual {residual:.3e}\n")
    return EXIT_OK


def run_star_product(left: list, right: list, output: str | None) -> int:
    try:
        B = NormalSymbol.from_records(left)
        C = NormalSymbol.from_records(right)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    text = _dumps({"product": star_multiply(B, C).to_records()})
    if output:
        write_atomic(Path(output) / "star_product.json", text)
    sys.stdout.write(text)
    return EXIT_OK


def run_selftest(output: str | None, check_determinism: bool = True) -> int:
    start = time.perf_counter()
    results = acceptance.run_all()
    if check_determinism:
        results.append(acceptance.determinism(results))
    elapsed = time.perf_counter() - start
    for r in results:
        sys.stdout.write(r.line() + "\n")
    passed = all(r.passed for r in results)
    report = {
        "results": json.loads(acceptance.report_json(results)),
        "passed": passed,
        "timing_seconds": elapsed,
    }
    if output:
        write_atomic(Path(output) / "selftest.json", _dumps(report))
    return EXIT_OK if passed else EXIT_TOLERANCE


def _json_arg(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise argparse.ArgumentTypeError(f"not JSON: {exc}") from exc


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON file; its keys override flags")
    p.add_argument("--hamiltonian", type=_json_arg, help="[[m, n, re, im], ...]")
    p.add_argument("--alpha-i", dest="alpha_i", type=_json_arg, help="[re, im]")
    p.add_argument("--alpha-f", dest="alpha_f", type=_json_arg, help="[re, im]")
    p.add_argument("--T", type=float)
    p.add_argument("--routes", type=lambda s: [r for r in s.split(",") if r])
    p.add_argument("--D", type=int)
    p.add_argument("--K", type=int, help="maximum star-series order")
    p.add_argument("--tol", type=float)
    p.add_argument("--nodes", type=int, help="quadrature nodes per axis")
    p.add_argument("--N", type=int, help="time slices")
    p.add_argument("--N-list", dest="N_list", type=lambda s: [int(x) for x in s.split(",")])
    p.add_argument("--kernel", choices=("linear", "exponential"))
    p.add_argument("--rtol", type=float, help="route agreement tolerance")
    p.add_argument("--s", type=float, help="ordering parameter")
    p.add_argument("--state", type=_json_arg, help="coherent label [re, im] for qdist")
    p.add_argument("--window", type=_json_arg, help="[lo, hi]")
    p.add_argument("--grid", type=int)
    p.add_argument("--output", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="starpath", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("amplitude", "convergence", "qdist"):
        _add_config_flags(sub.add_parser(name))
    sp = sub.add_parser("star-product", help="normal star product of two symbols")
    sp.add_argument("left", type=_json_arg, help="[[m, n, re, im], ...]")
    sp.add_argument("right", type=_json_arg)
    sp.add_argument("--output")
    st = sub.add_parser("selftest", help="run the acceptance checks")
    st.add_argument("--output")
    st.add_argument("--no-determinism", action="store_true", help="skip the repeat run")
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    keys = {f.name for f in fields(ExperimentConfig)}
    merged = {k: v for k, v in vars(args).items() if k in keys and v is not None}
    if args.config is not None:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        merged.update(data)
    return ExperimentConfig.from_dict(merged)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        if args.command == "star-product":
            return run_star_product(args.left, args.right, args.output)
        if args.command == "selftest":
            return run_selftest(args.output, not args.no_determinism)
        cfg = resolve_config(args)
        runner = {"amplitude": run_amplitude, "convergence": run_convergence, "qdist": run_qdist}
        return runner[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StarpathError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, ArithmeticError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
