"""Acceptance checks, shared by the test suite and ``starpath selftest``.

Each check returns a :class:`CriterionResult` whose ``measured`` value is
compared against ``threshold``. Random inputs come from fixed seeds.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import fock
from .pathintegral import (
    SliceConfig,
    convergence_study,
    novikov_sides,
    oracle_amplitude,
    oracle_product_amplitude,
    oracle_truncation_bound,
    sliced_amplitude,
    star_amplitude,
    star_series,
)
from .quadrature import covering_scale, gauss_hermite_rule, star_multiply_integral
from .quasiprob import (
    QuasiDistribution,
    distribution_rule,
    optical_expectation,
    p_nondiagonal,
    quasi_distribution,
)
from .symbols import NormalSymbol, evaluate, star_commutator, star_multiply

SEED = 20240611
LABELS_I = (0.5, 0.3 + 0.4j)
LABELS_F = (0.2j, -0.5)


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    measured: float
    threshold: float
    detail: str = ""

    def __post_init__(self):
        # numpy scalars do not serialize
        object.__setattr__(self, "passed", bool(self.passed))
        object.__setattr__(self, "measured", float(self.measured))
        object.__setattr__(self, "threshold", float(self.threshold))

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"[{status}] {self.number:2d} {self.name}: measured {self.measured:.3e}"
            f" (threshold {self.threshold:.1e}){' ' + self.detail if self.detail else ''}"
        )


def random_symbol(rng: np.random.Generator, degree: int) -> NormalSymbol:
    """Dense symbol with standard complex normal coefficients for ``m + n <= degree``."""
    terms = {}
    for m in range(degree + 1):
        for n in range(degree + 1 - m):
            terms[(m, n)] = complex(rng.normal(), rng.normal())
    return NormalSymbol(terms)


def random_disk_point(rng: np.random.Generator, radius: float) -> complex:
    r = radius * math.sqrt(rng.uniform())
    return cmath.rect(r, rng.uniform(0, 2 * math.pi))


def _max_coeff(B: NormalSymbol) -> float:
    return max((abs(c) for c in B.terms.values()), default=0.0)


def _golden(T, ai, af, omega=1.0):
    return cmath.exp(
        -0.5 * abs(ai) ** 2 - 0.5 * abs(af) ** 2 + np.conj(af) * ai * cmath.exp(-1j * omega * T)
    )


def quadratic_star() -> CriterionResult:
    H = NormalSymbol.monomial(1, 1, 1.0)
    worst = 0.0
    for T in (0.1, 1.0, math.pi):
        for ai in LABELS_I:
            for af in LABELS_F:
                cfg = SliceConfig(1, T, ai, af)
                v = star_amplitude(cfg, H, max_order=40, tol=1e-10)
                g = _golden(T, ai, af)
                worst = max(worst, abs(v - g) / abs(g))
    return CriterionResult(1, "star amplitude, quadratic H", worst <= 1e-8, worst, 1e-8)


def anharmonic_star() -> CriterionResult:
    H = NormalSymbol({(1, 1): 1.0, (2, 2): 0.1})
    worst = 0.0
    consistent = True
    worst_ratio = 0.0
    for T in (0.1, 0.5, 1.0):
        for ai in LABELS_I:
            for af in LABELS_F:
                cfg = SliceConfig(1, T, ai, af)
                series = star_series(cfg, H, 64, 1e-10, strict=True)
                v = star_amplitude(cfg, H, series=series)
                o = oracle_amplitude(cfg, H, 40)
                bound = 10 * series.tail_estimate + oracle_truncation_bound(cfg, H, 40)
                err = abs(v - o)
                worst = max(worst, err / abs(o))
                consistent = consistent and err <= bound
                worst_ratio = max(worst_ratio, err / bound)
    return CriterionResult(
        2,
        "star amplitude, anharmonic H",
        worst <= 1e-4 and consistent,
        worst,
        1e-4,
        f"error/bound max {worst_ratio:.2e}",
    )


def star_algebra() -> CriterionResult:
    rng = np.random.default_rng(SEED + 3)
    a, a_star = NormalSymbol.alpha(), NormalSymbol.alpha_star()
    comm_ok = star_commutator(a, a_star) == NormalSymbol.constant(1.0)
    assoc = 0.0
    for _ in range(100):
        A, B, C = (random_symbol(rng, int(rng.integers(0, 5))) for _ in range(3))
        left = star_multiply(star_multiply(A, B), C)
        right = star_multiply(A, star_multiply(B, C))
        diff = _max_coeff(left - right) if left != right else 0.0
        assoc = max(assoc, diff / max(_max_coeff(left), 1.0))
    rule = gauss_hermite_rule(64)
    route = 0.0
    for _ in range(50):
        B, C = random_symbol(rng, 4), random_symbol(rng, 4)
        prod = star_multiply(B, C)
        for _ in range(20):
            x = random_disk_point(rng, 1.5)
            ref = complex(evaluate(prod, x, np.conj(x)))
            val = star_multiply_integral(B, C, x, None, rule)
            route = max(route, abs(val - ref) / max(abs(ref), 1.0))
    passed = comm_ok and assoc <= 1e-12 and route <= 1e-8
    return CriterionResult(
        3,
        "star algebra",
        passed,
        route,
        1e-8,
        f"commutator exact: {comm_ok}; associativity {assoc:.2e} (<= 1e-12)",
    )


def sliced_exactness() -> CriterionResult:
    H = NormalSymbol.monomial(1, 1, 1.0)
    worst = 0.0
    for N in (1, 2, 4, 8):
        for ai in LABELS_I:
            for af in LABELS_F:
                cfg = SliceConfig(N, 1.0, ai, af)
                v = sliced_amplitude(cfg, H, gauss_hermite_rule(32))
                worst = max(worst, abs(v - oracle_product_amplitude(cfg, H, 40)))
    return CriterionResult(4, "sliced amplitude exact at finite N", worst <= 1e-10, worst, 1e-10)


def continuum_convergence() -> CriterionResult:
    H = NormalSymbol.monomial(1, 1, 1.0)
    study = convergence_study(SliceConfig(1, 1.0, 0.5, 0.3j), H, (10, 20, 40, 80), nodes=32)
    slope = study.slope if study.slope is not None else float("nan")
    dev = abs(slope - 1.0)
    return CriterionResult(
        5, "continuum convergence slope", dev <= 0.1, dev, 0.1, f"slope {slope:.4f}"
    )


def novikov() -> CriterionResult:
    rng = np.random.default_rng(SEED + 6)
    worst = 0.0
    for _ in range(1000):
        N = int(rng.integers(2, 65))
        path = rng.normal(size=N + 1) + 1j * rng.normal(size=N + 1)
        eps = float(rng.uniform(1e-3, 1.0))
        lhs, rhs, scale = novikov_sides(path, eps)
        worst = max(worst, abs(lhs - rhs) / scale)
    return CriterionResult(6, "summation-by-parts identity", worst <= 1e-12, worst, 1e-12)


def quasi_closed_forms() -> CriterionResult:
    rho = np.zeros((2, 2), dtype=complex)
    rho[0, 0] = 1.0
    xs = np.linspace(-3, 3, 25)
    grid = (xs[:, None] + 1j * xs[None, :]).ravel()
    grid = grid[np.abs(grid) <= 3]
    q = quasi_distribution(rho, grid, -1)
    w = quasi_distribution(rho, grid, 0)
    point = max(
        np.abs(q - np.exp(-np.abs(grid) ** 2) / np.pi).max(),
        np.abs(w - 2 / np.pi * np.exp(-2 * np.abs(grid) ** 2)).max(),
    )
    norm = max(
        abs(QuasiDistribution.from_state(rho, s, distribution_rule(s)).normalization() - 1.0)
        for s in (-1, 0)
    )
    return CriterionResult(
        7,
        "vacuum Q and Wigner closed forms",
        point <= 1e-8 and norm <= 1e-6,
        point,
        1e-8,
        f"normalization error {norm:.2e} (<= 1e-6)",
    )


def optical_equivalence() -> CriterionResult:
    rng = np.random.default_rng(SEED + 8)
    D = 40
    diag = 0.0
    for _ in range(50):
        g = random_disk_point(rng, 1.0)
        B = random_symbol(rng, int(rng.integers(0, 5)))
        v = fock.coherent_vector(g, D)
        ref = np.vdot(v, fock.from_symbol(B, D) @ v)
        diag = max(diag, abs(optical_expectation(QuasiDistribution.point_mass(g), B) - ref))
    off = 0.0
    for _ in range(50):
        ai, af = random_disk_point(rng, 1.0), random_disk_point(rng, 1.0)
        B = random_symbol(rng, int(rng.integers(0, 4)))
        ref = fock.matrix_element(af, fock.from_symbol(B, D), ai)
        P = QuasiDistribution.from_delta_pair(p_nondiagonal(ai, af))
        off = max(off, abs(optical_expectation(P, B) - ref))
    worst = max(diag, off)
    return CriterionResult(
        8,
        "optical equivalence",
        worst <= 1e-8,
        worst,
        1e-8,
        f"diagonal {diag:.2e}, non-diagonal {off:.2e}",
    )


def completeness() -> CriterionResult:
    scale = covering_scale(64, 6.0)
    r64 = fock.completeness_residual(16, gauss_hermite_rule(64, scale))
    r128 = fock.completeness_residual(16, gauss_hermite_rule(128, scale))
    return CriterionResult(
        9,
        "completeness relation",
        r64 <= 1e-6 and r128 < r64,
        r64,
        1e-6,
        f"128 nodes: {r128:.2e}",
    )


CHECKS = (
    quadratic_star,
    anharmonic_star,
    star_algebra,
    sliced_exactness,
    continuum_convergence,
    novikov,
    quasi_closed_forms,
    optical_equivalence,
    completeness,
)


def report_json(results) -> str:
    """Serialized results; deterministic for identical inputs."""
    return json.dumps([asdict(r) for r in results], indent=2, sort_keys=True)


def run_all() -> list[CriterionResult]:
    return [check() for check in CHECKS]


def determinism(first: list[CriterionResult] | None = None) -> CriterionResult:
    """Run every check twice and compare the serialized reports byte for byte."""
    a = report_json(first if first is not None else run_all())
    b = report_json(run_all())
    same = a == b
    return CriterionResult(10, "determinism", same, 0.0 if same else 1.0, 0.0)
