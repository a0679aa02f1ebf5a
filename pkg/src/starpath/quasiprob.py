"""s-ordered quasi-probability transforms and generalized delta functions.

The s-ordered family is the Fourier transform of the characteristic function
``G(b, s) = tr{D(b) rho} exp(s |b|^2 / 2)``: ``s = -1`` gives the Husimi Q
function, ``s = 0`` the Wigner function and ``s = 1`` the Glauber-Sudarshan P
function. Only ``s <= 0`` is evaluated on grids. The P function of a
non-diagonal operator ``|a_i><a_f|`` is represented symbolically as a pair of
generalized (complex-shift) delta functions.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergentTransform, InadmissibleTestFunction
from .fock import displacement_elements
from .quadrature import ComplexPlaneRule, gauss_hermite_rule
from .symbols import NormalSymbol, evaluate

P_ORDER = 1.0
WIGNER_ORDER = 0.0
Q_ORDER = -1.0


@dataclass(frozen=True)
class SOrder:
    """Ordering parameter: 1 normal (P), 0 symmetric (Wigner), -1 antinormal (Q)."""

    s: float

    def __post_init__(self):
        object.__setattr__(self, "s", check_order(self.s))

    def __float__(self):
        return self.s


def check_order(s) -> float:
    s = float(s)
    if not -1.0 <= s <= 1.0:
        raise ValueError(f"ordering parameter s={s} outside [-1, 1]")
    return s


def characteristic_function(rho: np.ndarray, beta, s: float, *, chunk: int = 1024):
    """``tr{D(beta) rho} exp(s |beta|^2 / 2)``, vectorised over ``beta``.

    Displacement matrix elements come from their Laguerre closed form, so the
    result is exact for any ``beta`` given ``rho`` on the first ``D`` states.
    """
    s = check_order(s)
    rho = np.asarray(rho, dtype=complex)
    tr = np.trace(rho)
    if not np.isclose(tr, 1.0, rtol=0, atol=1e-9):
        warnings.warn(f"density operator has trace {tr:.6g}", RuntimeWarning, stacklevel=2)
    beta = np.asarray(beta, dtype=complex)
    flat = beta.ravel()
    out = np.empty(flat.shape, dtype=complex)
    D = rho.shape[0]
    for start in range(0, flat.size, chunk):
        b = flat[start : start + chunk]
        Dm = displacement_elements(b, D)
        # tr(D rho) = sum_mn D[m, n] rho[n, m]
        out[start : start + chunk] = np.einsum("kmn,nm->k", Dm, rho)
    out *= np.exp(0.5 * s * np.abs(flat) ** 2)
    return out.reshape(beta.shape)[()] if beta.ndim == 0 else out.reshape(beta.shape)


def default_transform_rule(s: float, n: int = 64) -> ComplexPlaneRule:
    """Gauss-Hermite rule whose Gaussian matches ``exp((s-1)|b|^2/2)``."""
    return gauss_hermite_rule(n, math.sqrt(2.0 / (1.0 - s)))


def distribution_rule(s: float, n: int = 16) -> ComplexPlaneRule:
    """Rule for integrating an s-ordered distribution over ``alpha``.

    Its Gaussian matches the coherent-state envelope
    ``exp(-2 |alpha|^2 / (1 - s))``. Keep ``n`` modest: far nodes land where
    the oscillating transform kernel is no longer resolved.
    """
    s = check_order(s)
    if s >= 1:
        raise DivergentTransform("no sampling rule for the P function")
    return gauss_hermite_rule(n, math.sqrt((1.0 - s) / 2.0))


def quasi_distribution(
    rho: np.ndarray,
    alpha,
    s: float,
    rule: ComplexPlaneRule | None = None,
    *,
    chunk: int = 256,
):
    """``F(alpha, s) = (1/pi^2) int d^2b G(b, s) exp(alpha b* - alpha* b)``.

    Returns complex values; for Hermitian ``rho`` the imaginary part is
    quadrature noise. ``s > 0`` raises :class:`DivergentTransform` because the
    integrand stops decaying for a generic truncated ``rho``.
    """
    s = check_order(s)
    if s > 0:
        raise DivergentTransform(
            f"s={s} > 0 transforms diverge for generic states; use symbolic P functions"
        )
    if rule is None:
        rule = default_transform_rule(s)
    if rule.gaussian_factored:
        w = rule.weights / rule.gaussian()
    else:
        w = rule.weights
    G = characteristic_function(rho, rule.nodes, s) * w
    b = rule.nodes
    alpha = np.asarray(alpha, dtype=complex)
    flat = alpha.ravel()
    out = np.empty(flat.shape, dtype=complex)
    for start in range(0, flat.size, chunk):
        a = flat[start : start + chunk, None]
        phase = np.exp(a * np.conj(b)[None, :] - np.conj(a) * b[None, :])
        out[start : start + chunk] = phase @ G
    out /= np.pi**2
    return out.reshape(alpha.shape)[()] if alpha.ndim == 0 else out.reshape(alpha.shape)


def q_representation(B: NormalSymbol, alpha):
    """Husimi symbol ``<alpha|B|alpha>`` of a normally ordered operator."""
    alpha = np.asarray(alpha, dtype=complex)
    return evaluate(B, alpha, np.conj(alpha))


# -- admissible test functions ----------------------------------------------


@dataclass(frozen=True)
class GaussPoly:
    """``f(x) = poly(x) exp(c0 + c1 x + c2 x^2)`` on the real line.

    ``poly`` holds ascending coefficients. Admissible when the exponential
    does not grow along the real axis: ``Re c2 < 0``, or ``Re c2 == 0`` and
    ``Re c1 == 0``.
    """

    poly: tuple[complex, ...] = (1.0,)
    exponent: tuple[complex, complex, complex] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "poly", tuple(complex(c) for c in self.poly))
        if len(self.exponent) != 3:
            raise ValueError("exponent needs (c0, c1, c2)")
        object.__setattr__(self, "exponent", tuple(complex(c) for c in self.exponent))

    def admissible(self) -> bool:
        c0, c1, c2 = self.exponent
        return c2.real < 0 or (c2.real == 0 and c1.real == 0)

    def __call__(self, x):
        x = np.asarray(x, dtype=complex)
        c0, c1, c2 = self.exponent
        return np.polynomial.polynomial.polyval(x, self.poly) * np.exp(c0 + c1 * x + c2 * x * x)


@dataclass(frozen=True)
class PhaseSpaceFunction:
    """``f(a, a*) = poly(a, a*) exp(exponent(a, a*))`` with a quadratic exponent.

    Both parts are normal symbols, so the function continues analytically to
    independent ``a`` and ``a*``. Admissible when ``Re exponent`` restricted
    to ``a* = conj(a)`` is bounded above on the plane.
    """

    poly: NormalSymbol
    exponent: NormalSymbol = field(default_factory=NormalSymbol)

    @classmethod
    def of(cls, B: NormalSymbol) -> PhaseSpaceFunction:
        return cls(B)

    def admissible(self) -> bool:
        if self.exponent.degree > 2:
            return False
        e = self.exponent
        c11, c20, c02 = e.coefficient(1, 1), e.coefficient(2, 0), e.coefficient(0, 2)
        c10, c01 = e.coefficient(1, 0), e.coefficient(0, 1)
        # a = x + iy: real quadratic form and linear part of Re(exponent)
        Q = np.array(
            [
                [(c11 + c20 + c02).real, (1j * (c02 - c20)).real],
                [(1j * (c02 - c20)).real, (c11 - c20 - c02).real],
            ]
        )
        L = np.array([(c10 + c01).real, (1j * (c01 - c10)).real])
        w, V = np.linalg.eigh(Q)
        tol = 1e-14 * max(1.0, np.abs(Q).max())
        if w.max() > tol:
            return False
        null = V[:, np.abs(w) <= tol]
        return bool(np.all(np.abs(L @ null) <= tol))

    def __call__(self, a, a_star):
        return evaluate(self.poly, a, a_star) * np.exp(evaluate(self.exponent, a, a_star))


def delta_sift(f: GaussPoly, z: complex) -> complex:
    """``int dx f(x) delta(x - z)`` for a complex shift ``z``: the value ``f(z)``."""
    if not isinstance(f, GaussPoly) or not f.admissible():
        raise InadmissibleTestFunction(f"cannot sift {f!r}: need an admissible GaussPoly")
    return complex(f(complex(z)))


def regularized_delta_sift(f, z: complex, eps: float, *, nodes: int = 160) -> complex:
    """Numerical witness for sifting, with no symbolic evaluation at ``z``.

    Computes ``int dx f(x) (1/2pi) int dk exp(-eps k^2 - i k (x - z))`` as a
    Gauss-Hermite sum in ``k`` against ``exp(-eps k^2)`` and a trapezoid sum in
    ``x`` over the window where the regularized delta lives. For polynomial ``f`` the
    result is ``f(z)`` plus a polynomial in ``eps``, so extrapolating over a
    few ``eps`` recovers the sifted value. The regularized delta grows like
    ``exp(Im(z)^2 / (4 eps))`` on the real axis, which limits how small
    ``eps`` can be in double precision.
    """
    z = complex(z)
    t, w = np.polynomial.hermite.hermgauss(nodes)
    k = t / math.sqrt(eps)
    wk = w / math.sqrt(eps)
    # the regularized delta decays like exp(-(x - Re z)^2 / (4 eps)) on the real axis
    half = 8.0 * math.sqrt(4.0 * eps)
    xs = np.linspace(z.real - half, z.real + half, 2 * nodes + 1)
    dx = xs[1] - xs[0]
    delta = np.exp(-1j * np.outer(xs - z, k)) @ wk / (2.0 * np.pi)
    return complex(np.sum(np.asarray(f(xs)) * delta) * dx)


def richardson(values, ratio: float = 2.0) -> complex:
    """Extrapolate ``v(eps), v(eps/r), v(eps/r^2), ...`` to ``eps -> 0`` (polynomial error model)."""
    table = [complex(v) for v in values]
    p = 1
    while len(table) > 1:
        fac = ratio**p
        table = [(fac * b - a) / (fac - 1.0) for a, b in zip(table, table[1:])]
        p += 1
    return table[0]


@dataclass(frozen=True)
class GeneralizedDeltaPair:
    """``prefactor * delta(Re a - re_point) * delta(Im a - im_point)`` with complex points.

    Pairing with a test function evaluates it at ``a = re + i im``,
    ``a* = re - i im`` (independent values once the points are complex).
    The prefactor is ``exp(prefactor_exponent(a, a*))``, an
    exponential-quadratic stored as a normal symbol.
    """

    re_point: complex
    im_point: complex
    prefactor_exponent: NormalSymbol

    @property
    def point(self) -> tuple[complex, complex]:
        return (
            self.re_point + 1j * self.im_point,
            self.re_point - 1j * self.im_point,
        )

    def prefactor(self) -> complex:
        a, a_star = self.point
        return complex(np.exp(evaluate(self.prefactor_exponent, a, a_star)))

    def pair(self, f) -> complex:
        """``int d^2a P(a) f(a)`` by sifting both deltas."""
        if isinstance(f, NormalSymbol):
            f = PhaseSpaceFunction(f)
        if not isinstance(f, PhaseSpaceFunction) or not f.admissible():
            raise InadmissibleTestFunction(f"cannot pair with {f!r}")
        a, a_star = self.point
        return self.prefactor() * complex(f(a, a_star))

    def to_json(self) -> dict:
        return {
            "re_point": [self.re_point.real, self.re_point.imag],
            "im_point": [self.im_point.real, self.im_point.imag],
            "prefactor_exponent": self.prefactor_exponent.to_records(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> GeneralizedDeltaPair:
        return cls(
            complex(*obj["re_point"]),
            complex(*obj["im_point"]),
            NormalSymbol.from_records(obj["prefactor_exponent"]),
        )


def p_nondiagonal(
    alpha_i: complex, alpha_f: complex, convention: str = "derived"
) -> GeneralizedDeltaPair:
    """Glauber-Sudarshan P function of ``|alpha_i><alpha_f|``.

    Doing the Gaussian integral in the P-function formula analytically gives
    ``exp(|a|^2 - (|a_i|^2 + |a_f|^2)/2)`` times deltas fixing
    ``Re a = (a_i + conj a_f)/2`` and ``Im a = (a_i - conj a_f)/(2i)``, i.e.
    the evaluation point ``a = a_i``, ``a* = conj(a_f)``.

    ``convention="printed"`` flips the sign of the second point to
    ``i (a_i - conj a_f)/2``, which swaps the evaluation pair. The two agree
    only for symbols symmetric under ``a <-> a*``; the Fock oracle selects
    ``"derived"`` (see the tests).
    """
    alpha_i = complex(alpha_i)
    alpha_f = complex(alpha_f)
    re_point = 0.5 * (alpha_i + alpha_f.conjugate())
    if convention == "derived":
        im_point = (alpha_i - alpha_f.conjugate()) / 2j
    elif convention == "printed":
        im_point = 0.5j * (alpha_i - alpha_f.conjugate())
    else:
        raise ValueError(f"unknown convention {convention!r}")
    c = -0.5 * (abs(alpha_i) ** 2 + abs(alpha_f) ** 2)
    exponent = NormalSymbol({(1, 1): 1.0, (0, 0): c}, rtol=0.0)
    return GeneralizedDeltaPair(re_point, im_point, exponent)


# -- distributions and optical equivalence ----------------------------------


@dataclass(frozen=True, eq=False)
class QuasiDistribution:
    """An s-ordered distribution, sampled on quadrature nodes or symbolic.

    ``kind`` is ``"grid"`` (``points``, ``weights``, ``values``,
    ``imag_residual``), ``"point"`` (a delta at ``center``) or ``"delta_pair"``.
    Grid weights are plain measure weights for ``d^2a``.
    """

    s: float
    kind: str
    points: np.ndarray | None = None
    weights: np.ndarray | None = None
    values: np.ndarray | None = None
    imag_residual: np.ndarray | None = None
    center: complex | None = None
    delta: GeneralizedDeltaPair | None = None

    @classmethod
    def point_mass(cls, gamma: complex) -> QuasiDistribution:
        """P function of the coherent state ``|gamma><gamma|``."""
        return cls(P_ORDER, "point", center=complex(gamma))

    @classmethod
    def from_delta_pair(cls, pair: GeneralizedDeltaPair) -> QuasiDistribution:
        return cls(P_ORDER, "delta_pair", delta=pair)

    @classmethod
    def from_function(cls, s: float, func, rule: ComplexPlaneRule) -> QuasiDistribution:
        """Sample a closed-form distribution on the nodes of ``rule``."""
        plain = rule.absorbed()
        vals = np.asarray(func(plain.nodes), dtype=complex)
        return cls(
            check_order(s), "grid", plain.nodes, plain.weights, vals.real, vals.imag
        )

    @classmethod
    def from_state(
        cls, rho: np.ndarray, s: float, rule: ComplexPlaneRule, transform_rule=None
    ) -> QuasiDistribution:
        """Evaluate :func:`quasi_distribution` on the nodes of ``rule``."""
        plain = rule.absorbed()
        vals = quasi_distribution(rho, plain.nodes, s, transform_rule)
        return cls(check_order(s), "grid", plain.nodes, plain.weights, vals.real, vals.imag)

    def normalization(self) -> float:
        if self.kind != "grid":
            raise ValueError("normalization is only defined for sampled distributions")
        return float(np.sum(self.weights * self.values))

    def to_csv(self) -> str:
        if self.kind != "grid":
            raise ValueError("only sampled distributions export as CSV")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["re_alpha", "im_alpha", "value", "imag_residual"])
        for p, v, r in zip(self.points, self.values, self.imag_residual):
            w.writerow([repr(float(p.real)), repr(float(p.imag)), repr(float(v)), repr(float(r))])
        return buf.getvalue()

    def to_json(self) -> dict:
        if self.kind == "grid":
            return {
                "s": self.s,
                "kind": "grid",
                "samples": [
                    [float(p.real), float(p.imag), float(v), float(r)]
                    for p, v, r in zip(self.points, self.values, self.imag_residual)
                ],
            }
        if self.kind == "point":
            return {"s": self.s, "kind": "point", "center": [self.center.real, self.center.imag]}
        return {"s": self.s, "kind": "delta_pair", "delta": self.delta.to_json()}


def optical_expectation(P: QuasiDistribution, B: NormalSymbol) -> complex:
    """``int d^2a P(a) B_Q(a, a*)``: the trace ``tr{B rho}`` for normally ordered ``B``."""
    if P.s != P_ORDER:
        raise ValueError("optical equivalence pairs the P function (s = 1) with Q symbols")
    if P.kind == "grid":
        bq = q_representation(B, P.points)
        vals = P.values + 1j * P.imag_residual
        return complex(np.sum(P.weights * vals * bq))
    if P.kind == "point":
        return complex(q_representation(B, P.center))
    if P.kind == "delta_pair":
        return P.delta.pair(B)
    raise ValueError(f"unknown distribution kind {P.kind!r}")


def to_json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)
