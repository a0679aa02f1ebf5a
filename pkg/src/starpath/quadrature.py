"""Quadrature over the complex plane, ``d^2 b = dRe(b) dIm(b)``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .symbols import NormalSymbol, evaluate


@dataclass(frozen=True, eq=False)
class ComplexPlaneRule:
    """Nodes and weights for integrals over the complex plane.

    With ``gaussian_factored`` the weights already carry
    ``exp(-|b - center|^2 / scale^2)`` and :func:`integrate` expects only the
    remaining factor of the integrand.
    """

    nodes: np.ndarray
    weights: np.ndarray
    gaussian_factored: bool = True
    scale: float = 1.0
    center: complex = 0j

    def __post_init__(self):
        if self.nodes.shape != self.weights.shape:
            raise ValueError("nodes and weights must have the same shape")
        if not np.all(np.isfinite(self.weights)):
            raise ValueError("weights must be finite")

    def __len__(self):
        return self.nodes.size

    def shifted(self, center: complex) -> ComplexPlaneRule:
        """Same rule translated so its Gaussian is centred at ``center``."""
        delta = complex(center) - self.center
        return ComplexPlaneRule(
            self.nodes + delta, self.weights, self.gaussian_factored, self.scale, complex(center)
        )

    def absorbed(self) -> ComplexPlaneRule:
        """Plain rule for full integrands: the Gaussian is folded out of the weights."""
        if not self.gaussian_factored:
            return self
        gauss = np.abs(self.nodes - self.center) ** 2 / self.scale**2
        return ComplexPlaneRule(
            self.nodes, self.weights * np.exp(gauss), False, self.scale, self.center
        )

    def gaussian(self, points=None) -> np.ndarray:
        """The factored weight function at ``points`` (default: the nodes)."""
        b = self.nodes if points is None else np.asarray(points)
        return np.exp(-np.abs(b - self.center) ** 2 / self.scale**2)


@lru_cache(maxsize=32)
def _hermgauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.hermite.hermgauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_hermite_rule(n: int, scale: float = 1.0) -> ComplexPlaneRule:
    """Tensor product of two ``n``-point Gauss-Hermite rules.

    Exact for ``exp(-|b|^2/scale^2)`` times any bivariate polynomial in
    ``Re b, Im b`` of degree at most ``2n - 1`` in each variable.
    """
    if n < 2:
        raise ValueError("need at least 2 nodes per axis")
    if scale <= 0:
        raise ValueError("scale must be positive")
    x, w = _hermgauss(n)
    x = x * scale
    w = w * scale
    nodes = (x[:, None] + 1j * x[None, :]).ravel()
    weights = np.outer(w, w).ravel()
    return ComplexPlaneRule(nodes, weights, True, float(scale))


def covering_scale(n: int, radius: float) -> float:
    """Scale that puts the outermost node of an ``n``-point rule at ``radius`` on each axis."""
    return float(radius) / float(_hermgauss(n)[0].max())


def _pairwise_sum(x: np.ndarray):
    # fixed reduction tree, independent of thread count
    x = np.asarray(x)
    while x.size > 1:
        if x.size % 2:
            x = np.append(x, np.zeros(1, dtype=x.dtype))
        x = x[0::2] + x[1::2]
    return x[0] if x.size else 0.0


def integrate(f, rule: ComplexPlaneRule) -> complex:
    """``sum_k w_k f(b_k)``.

    ``f`` receives the node array and must broadcast over it. For a
    Gaussian-factored rule ``f`` is the integrand divided by the rule's
    Gaussian.
    """
    vals = np.asarray(f(rule.nodes), dtype=complex)
    vals = np.broadcast_to(vals, rule.nodes.shape)
    return complex(_pairwise_sum(rule.weights * vals))


def star_multiply_integral(
    B: NormalSymbol,
    C: NormalSymbol,
    alpha: complex,
    alpha_star: complex | None = None,
    rule: ComplexPlaneRule | None = None,
) -> complex:
    """Integral form of the normal star product at one phase-space point.

    Computes ``(1/pi) int d^2b B(b, a*) C(a, b*) |<a|b>|^2``. The overlap
    ``exp(-|a - b|^2)`` is the rule's Gaussian after moving its centre to
    ``a``, so polynomial symbols are integrated exactly. For
    ``alpha_star != conj(alpha)`` the continued overlap
    ``exp(-(a* - b*)(a - b))`` differs from the Gaussian by an entire factor
    that is included in the integrand.
    """
    if rule is None:
        rule = gauss_hermite_rule(64)
    if not rule.gaussian_factored or not math.isclose(rule.scale, 1.0):
        raise ValueError("star_multiply_integral needs a Gaussian-factored rule with scale 1")
    alpha = complex(alpha)
    alpha_star = np.conj(alpha) if alpha_star is None else complex(alpha_star)
    r = rule.shifted(alpha)
    skew = alpha_star - np.conj(alpha)

    def f(b):
        out = evaluate(B, b, alpha_star) * evaluate(C, alpha, np.conj(b))
        if skew != 0:
            out = out * np.exp(skew * (b - alpha))
        return out

    return integrate(f, r) / np.pi
