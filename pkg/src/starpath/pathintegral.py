"""Time-sliced coherent-state amplitudes and the star-exponential route.

Three independent routes to ``<a_f| exp(-iTH) |a_i>``:

* ``star``: overlap times the star exponential of ``-iTH`` evaluated at
  ``a = a_i``, ``a* = conj(a_f)``;
* ``oracle``: exponentiation in a truncated number basis;
* ``sliced``: the ``N``-slice coherent-state integral, contracted one
  intermediate label at a time.

A fourth value re-derives the star route through the non-diagonal P function.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import fock
from .errors import StarpathError
from .quadrature import ComplexPlaneRule, gauss_hermite_rule
from .quasiprob import p_nondiagonal
from .symbols import NormalSymbol, StarSeries, evaluate, star_exponential

ROUTES = ("star", "oracle", "sliced", "optical")


@dataclass(frozen=True)
class SliceConfig:
    N: int
    T: float
    alpha_i: complex
    alpha_f: complex

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "T", float(self.T))
        object.__setattr__(self, "alpha_i", complex(self.alpha_i))
        object.__setattr__(self, "alpha_f", complex(self.alpha_f))

    @property
    def epsilon(self) -> float:
        return self.T / self.N

    def with_slices(self, N: int) -> SliceConfig:
        return SliceConfig(N, self.T, self.alpha_i, self.alpha_f)


def _as_path(path) -> np.ndarray:
    path = np.asarray(path, dtype=complex)
    if path.ndim != 1 or path.size < 2:
        raise ValueError("a path needs at least two points")
    return path


def discrete_exponent(path, H: NormalSymbol, epsilon: float) -> complex:
    """Exponent of the ``N``-slice integrand along ``path = (a_0, ..., a_N)``.

    ``H`` is evaluated with ``a = a_{j-1}`` and ``a* = conj(a_j)`` on each slice.
    """
    p = _as_path(path)
    prev, nxt = p[:-1], p[1:]
    out = -0.5 * abs(p[0]) ** 2 - 0.5 * abs(p[-1]) ** 2 - np.sum(np.abs(p[1:-1]) ** 2)
    out = out + np.sum(np.conj(nxt) * prev)
    out = out - 1j * epsilon * np.sum(evaluate(H, prev, np.conj(nxt)))
    return complex(out)


def novikov_sides(path, epsilon: float) -> tuple[complex, complex, float]:
    """Both sides of the summation-by-parts rearrangement and the size of their terms.

    ``lhs = sum_{j=1}^N a_j* a_{j-1} - sum_{j=1}^{N-1} |a_j|^2`` and ``rhs``
    re-expresses it through endpoint terms and forward/backward differences
    divided by ``epsilon``.
    """
    p = _as_path(path)
    if p.size < 3:
        raise ValueError("need N >= 2")
    cp = np.conj(p)
    inner = np.arange(1, p.size - 1)
    lhs_terms = np.concatenate([cp[1:] * p[:-1], -np.abs(p[inner]) ** 2])
    fwd = p[inner] * (cp[inner + 1] - cp[inner]) / epsilon
    bwd = cp[inner] * (p[inner] - p[inner - 1]) / epsilon
    rhs_terms = np.concatenate(
        [[0.5 * cp[-1] * p[-2], 0.5 * cp[1] * p[0]], 0.5 * epsilon * (fwd - bwd)]
    )
    scale = float(np.sum(np.abs(lhs_terms)) + np.sum(np.abs(rhs_terms)))
    return complex(np.sum(lhs_terms)), complex(np.sum(rhs_terms)), scale


def novikov_identity_residual(path, epsilon: float) -> float:
    lhs, rhs, _ = novikov_sides(path, epsilon)
    return abs(lhs - rhs)


def _slice_factor(H: NormalSymbol, a, a_star, epsilon: float, kernel: str):
    h = evaluate(H, a, a_star)
    if kernel == "linear":
        return 1.0 - 1j * epsilon * h
    if kernel == "exponential":
        return np.exp(-1j * epsilon * h)
    raise ValueError(f"unknown kernel {kernel!r}")


def _kernel(p, q, H, epsilon, kernel):
    """``<p|q> f(H(q, conj p))`` for every pair, with shapes broadcast."""
    log_ov = -0.5 * np.abs(p) ** 2 - 0.5 * np.abs(q) ** 2 + np.conj(p) * q
    return np.exp(log_ov) * _slice_factor(H, q, np.conj(p), epsilon, kernel)


def sliced_amplitude(
    cfg: SliceConfig,
    H: NormalSymbol,
    rule: ComplexPlaneRule | None = None,
    *,
    kernel: str = "linear",
) -> complex:
    """``N``-slice coherent-state amplitude by transfer-kernel contraction.

    Each slice contributes ``K(p, q) = <p|q> (1 - i eps H(q, conj p))``, the
    exact coherent-state matrix element of ``1 - i eps H`` for normally
    ordered ``H``; the ``N - 1`` intermediate integrals
    ``(1/pi) int d^2q`` are then done one at a time on the nodes of ``rule``.
    The result is ``<a_f|(1 - i eps H)^N|a_i>`` up to quadrature error, which
    vanishes when ``rule`` is exact for the polynomial-times-Gaussian slice
    integrands. ``kernel="exponential"`` uses ``<p|q> exp(-i eps H(q, conj p))``
    instead, which agrees to first order in ``eps``.

    ``rule`` must be Gaussian-factored with unit scale (default: 32 nodes per
    axis).
    """
    if rule is None:
        rule = gauss_hermite_rule(32)
    if not rule.gaussian_factored or not math.isclose(rule.scale, 1.0) or rule.center != 0:
        raise ValueError("sliced_amplitude needs a centred Gaussian-factored rule with scale 1")
    eps = cfg.epsilon
    a_i, a_f = cfg.alpha_i, cfg.alpha_f
    if cfg.N == 1:
        return complex(_kernel(a_f, a_i, H, eps, kernel))

    q = rule.nodes
    # weight for a full integrand: w e^{|q|^2} / pi, kept in log form so the
    # product with the kernel magnitude exp(-|p - q|^2 / 2) never overflows
    log_w = np.log(rule.weights) + np.abs(q) ** 2 - math.log(math.pi)
    F = _kernel(q, a_i, H, eps, kernel)

    def transfer(p):
        p = np.asarray(p, dtype=complex)[..., None]
        mag = log_w - 0.5 * np.abs(p - q) ** 2
        phase = np.imag(np.conj(p) * q)
        return np.exp(mag + 1j * phase) * _slice_factor(H, q, np.conj(p), eps, kernel)

    M = transfer(q)
    for _ in range(cfg.N - 2):
        F = M @ F
    return complex(transfer(a_f) @ F)


def sliced_node_count(H: NormalSymbol, N: int, minimum: int = 16) -> int:
    """Nodes per axis from the total polynomial degree carried along ``N`` slices.

    The slice integrands are polynomials times ``exp(conj(p) q)`` times a
    Gaussian, so this is a starting point for a doubling check rather than
    an exactness guarantee.
    """
    return max(minimum, (N * max(H.degree, 1)) // 2 + 4)


def star_series(
    cfg: SliceConfig, H: NormalSymbol, max_order: int = 64, tol: float = 1e-10, **kw
) -> StarSeries:
    """The star exponential of ``-iTH`` sized for the labels of ``cfg``."""
    kw.setdefault("radius", max(abs(cfg.alpha_i), abs(cfg.alpha_f), 0.5))
    return star_exponential(H, -1j * cfg.T, max_order, tol, **kw)


def star_amplitude(
    cfg: SliceConfig,
    H: NormalSymbol,
    max_order: int = 64,
    tol: float = 1e-10,
    *,
    series: StarSeries | None = None,
    **kw,
) -> complex:
    """``<a_f|a_i>`` times the star exponential at ``a = a_i``, ``a* = conj(a_f)``.

    The evaluation point was fixed against the number-basis oracle on
    Hamiltonians without ``a <-> a*`` symmetry; the swapped point fails there.
    """
    if series is None:
        series = star_series(cfg, H, max_order, tol, strict=True, **kw)
    val = evaluate(series.value, cfg.alpha_i, np.conj(cfg.alpha_f))
    return fock.overlap(cfg.alpha_f, cfg.alpha_i) * complex(val)


def oracle_amplitude(cfg: SliceConfig, H: NormalSymbol, D: int | None = None) -> complex:
    """``<a_f|exp(-iTH)|a_i>`` in the first ``D`` number states."""
    D = fock.default_dim(cfg.alpha_i, cfg.alpha_f) if D is None else D
    U = fock.evolve(fock.from_symbol(H, D), cfg.T)
    return fock.matrix_element(cfg.alpha_f, U, cfg.alpha_i)


def oracle_product_amplitude(cfg: SliceConfig, H: NormalSymbol, D: int | None = None) -> complex:
    """``<a_f|(1 - i eps H)^N|a_i>`` in the first ``D`` number states."""
    D = fock.default_dim(cfg.alpha_i, cfg.alpha_f) if D is None else D
    Hm = fock.from_symbol(H, D)
    step = np.eye(D, dtype=complex) - 1j * cfg.epsilon * Hm
    return fock.matrix_element(cfg.alpha_f, np.linalg.matrix_power(step, cfg.N), cfg.alpha_i)


def oracle_truncation_bound(cfg: SliceConfig, H: NormalSymbol, D: int) -> float:
    """Change of the oracle amplitude when ``D`` is doubled, plus the labels' tail weight."""
    a = oracle_amplitude(cfg, H, D)
    b = oracle_amplitude(cfg, H, 2 * D)
    tails = fock.coherent_tail(cfg.alpha_i, D) + fock.coherent_tail(cfg.alpha_f, D)
    return abs(a - b) + math.sqrt(tails)


def _rel(a: complex, b: complex) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


@dataclass(frozen=True)
class AmplitudeReport:
    """Route values for one configuration; errors are derived on access."""

    values: dict[str, complex]
    metadata: dict = field(default_factory=dict)

    @property
    def star_value(self):
        return self.values.get("star")

    @property
    def oracle_value(self):
        return self.values.get("oracle")

    @property
    def sliced_value(self):
        return self.values.get("sliced")

    @property
    def optical_value(self):
        return self.values.get("optical")

    def relative_errors(self) -> dict[str, float]:
        """Pairwise ``|x - y| / |y|``, keyed ``"x-y"`` for routes in canonical order."""
        names = [r for r in ROUTES if r in self.values]
        return {
            f"{x}-{y}": _rel(self.values[x], self.values[y])
            for i, x in enumerate(names)
            for y in names[i + 1 :]
        }

    def max_error(self) -> float:
        errs = self.relative_errors()
        return max(errs.values()) if errs else 0.0

    def to_json(self) -> dict:
        return {
            "values": {k: [v.real, v.imag] for k, v in self.values.items()},
            "relative_errors": self.relative_errors(),
            "metadata": self.metadata,
        }


def compare_all(
    cfg: SliceConfig,
    H: NormalSymbol,
    *,
    routes=ROUTES,
    D: int | None = None,
    max_order: int = 64,
    tol: float = 1e-10,
    nodes: int | None = None,
    kernel: str = "linear",
) -> AmplitudeReport:
    """Evaluate the requested routes and collect them in one report."""
    requested = set(routes)
    routes = [r for r in ROUTES if r in requested]
    if not routes or requested - set(ROUTES):
        raise ValueError(f"routes must be a nonempty subset of {ROUTES}")
    values: dict[str, complex] = {}
    meta: dict = {"N": cfg.N, "T": cfg.T, "epsilon": cfg.epsilon}
    series = None
    if "star" in routes or "optical" in routes:
        series = star_series(cfg, H, max_order, tol, strict=True)
        meta.update(
            K=series.order,
            squarings=series.squarings,
            tail_estimate=series.tail_estimate,
            truncation_error=series.truncation_error,
            fock_cutoff=series.fock_cutoff,
        )
    if "star" in routes:
        values["star"] = star_amplitude(cfg, H, series=series)
    if "oracle" in routes:
        D = fock.default_dim(cfg.alpha_i, cfg.alpha_f) if D is None else D
        values["oracle"] = oracle_amplitude(cfg, H, D)
        meta["D"] = D
        meta["oracle_truncation_bound"] = oracle_truncation_bound(cfg, H, D)
    if "sliced" in routes:
        n = sliced_node_count(H, cfg.N) if nodes is None else nodes
        values["sliced"] = sliced_amplitude(cfg, H, gauss_hermite_rule(n), kernel=kernel)
        meta["rule_nodes"] = n * n
        meta["kernel"] = kernel
    if "optical" in routes:
        values["optical"] = p_nondiagonal(cfg.alpha_i, cfg.alpha_f).pair(series.value)
    return AmplitudeReport(values, meta)


@dataclass(frozen=True)
class ConvergenceStudy:
    rows: list[tuple[int, float, float, float]]
    slope: float | None
    exact: bool

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["N", "epsilon", "abs_error", "rel_error"])
        for N, eps, ae, re in self.rows:
            w.writerow([N, repr(eps), repr(ae), repr(re)])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {"slope": self.slope, "exact": self.exact, "points": len(self.rows)}


EXACT_FLOOR = 1e-13


def convergence_study(
    cfg: SliceConfig,
    H: NormalSymbol,
    Ns=(10, 20, 40, 80),
    *,
    nodes: int = 32,
    D: int | None = None,
    kernel: str = "linear",
) -> ConvergenceStudy:
    """Error of the sliced amplitude against the exact propagator as ``N`` grows.

    The slope is a least-squares fit of ``log|error|`` on ``log eps``. When
    every error is at the rounding floor the fit is skipped and ``exact`` set.
    """
    Ns = [int(n) for n in Ns]
    if len(Ns) < 3:
        raise ValueError("need at least three slice counts")
    ref = oracle_amplitude(cfg, H, D)
    rows = []
    for N in Ns:
        c = cfg.with_slices(N)
        val = sliced_amplitude(c, H, gauss_hermite_rule(nodes), kernel=kernel)
        err = abs(val - ref)
        rows.append((N, c.epsilon, err, err / max(abs(ref), 1e-300)))
    errs = np.array([r[2] for r in rows])
    if np.all(errs <= EXACT_FLOOR * max(abs(ref), 1.0)):
        return ConvergenceStudy(rows, None, True)
    if np.any(errs == 0):
        raise StarpathError("some but not all errors vanish; slope undefined")
    eps = np.array([r[1] for r in rows])
    slope = float(np.polyfit(np.log(eps), np.log(errs), 1)[0])
    return ConvergenceStudy(rows, slope, False)
