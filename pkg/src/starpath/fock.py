"""Truncated number-basis oracle.

Operators are ``(D, D)`` complex arrays and vectors length-``D`` arrays on
``|0>, ..., |D-1>``. Ladder truncation corrupts the last row and column of
products, so comparisons against infinite-dimensional results should use the
leading ``D // 2`` block (see :func:`interior`).
"""

from __future__ import annotations

import math

import numpy as np
import scipy.linalg
from scipy.special import eval_genlaguerre, gammainc, gammaln

from .errors import DimensionTooSmall, TruncationTooCoarse
from .symbols import NormalSymbol

ADMISSIBILITY_TOL = 1e-12


def default_dim(*alphas: complex) -> int:
    """Cutoff rule ``max(32, ceil(8 (1 + |a|^2)))`` over the given labels."""
    r2 = max((abs(a) ** 2 for a in alphas), default=0.0)
    return max(32, math.ceil(8.0 * (1.0 + r2)))


def coherent_tail(alpha: complex, D: int) -> float:
    """Probability weight of ``|alpha>`` on number states ``n >= D``."""
    return float(gammainc(D, abs(alpha) ** 2))


def check_admissible(alpha: complex, D: int, tol: float = ADMISSIBILITY_TOL) -> float:
    tail = coherent_tail(alpha, D)
    if not tail < tol:
        raise TruncationTooCoarse(
            f"|alpha|={abs(alpha):.4g} leaves weight {tail:.3g} beyond D={D} (limit {tol:g})"
        )
    return tail


def annihilation(D: int) -> np.ndarray:
    if D < 2:
        raise DimensionTooSmall(f"need D >= 2, got {D}")
    return np.diag(np.sqrt(np.arange(1, D, dtype=float)), k=1).astype(complex)


def creation(D: int) -> np.ndarray:
    return annihilation(D).conj().T


def number(D: int) -> np.ndarray:
    if D < 1:
        raise DimensionTooSmall(f"need D >= 1, got {D}")
    return np.diag(np.arange(D, dtype=complex))


def basis(n: int, D: int) -> np.ndarray:
    v = np.zeros(D, dtype=complex)
    v[n] = 1.0
    return v


def from_symbol(B: NormalSymbol, D: int) -> np.ndarray:
    """Operator ``sum b_mn (a^dag)**m a**n`` in the first ``D`` number states.

    Each normally ordered monomial is the exact block of its infinite
    counterpart, since ``a**n`` never leaves the truncated space.
    """
    if D < B.degree + 2:
        raise DimensionTooSmall(f"D={D} too small for a symbol of degree {B.degree}")
    a = annihilation(D)
    ad = a.conj().T
    out = np.zeros((D, D), dtype=complex)
    for (m, n), c in B.terms.items():
        out += c * np.linalg.matrix_power(ad, m) @ np.linalg.matrix_power(a, n)
    return out


def coherent_vector(alpha: complex, D: int, tol: float = ADMISSIBILITY_TOL) -> np.ndarray:
    """Components ``exp(-|alpha|^2/2) alpha**n / sqrt(n!)`` for ``n < D``."""
    check_admissible(alpha, D, tol)
    alpha = complex(alpha)
    n = np.arange(D)
    if alpha == 0:
        return basis(0, D)
    log_mag = -0.5 * abs(alpha) ** 2 + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    return np.exp(log_mag + 1j * n * np.angle(alpha))


def displacement(alpha: complex, D: int, tol: float = ADMISSIBILITY_TOL) -> np.ndarray:
    """``expm(alpha a^dag - conj(alpha) a)`` in the truncated space."""
    check_admissible(alpha, D, tol)
    a = annihilation(D)
    return scipy.linalg.expm(alpha * a.conj().T - np.conj(alpha) * a)


def displacement_elements(beta, D: int) -> np.ndarray:
    """Exact matrix elements ``<m|D(beta)|n>`` for ``m, n < D``.

    Uses the Laguerre form of the infinite-dimensional operator, so there is
    no truncation pollution. ``beta`` may be an array; the result then has
    shape ``beta.shape + (D, D)``.
    """
    beta = np.asarray(beta, dtype=complex)
    x = np.abs(beta) ** 2
    m = np.arange(D)[:, None]
    n = np.arange(D)[None, :]
    lo = np.minimum(m, n)
    diff = np.abs(m - n)
    b = beta[..., None, None]
    # <m|D|n> = sqrt(n!/m!) beta^(m-n) L_n^(m-n)(|b|^2) e^(-|b|^2/2) for m >= n;
    # the m < n case follows from D(b)^dag = D(-b)
    lag = eval_genlaguerre(lo, diff, x[..., None, None])
    mag = np.exp(0.5 * (gammaln(lo + 1) - gammaln(lo + diff + 1)) - 0.5 * x[..., None, None])
    phase = np.where(m >= n, b ** diff, (-np.conj(b)) ** diff)
    return mag * phase * lag


def evolve(H: np.ndarray, T: float) -> np.ndarray:
    """``exp(-i T H)``; eigendecomposition when ``H`` is Hermitian, Pade otherwise."""
    H = np.asarray(H, dtype=complex)
    if T == 0:
        return np.eye(H.shape[0], dtype=complex)
    scale = max(np.abs(H).max(), 1.0)
    if np.allclose(H, H.conj().T, rtol=0.0, atol=1e-14 * scale):
        w, V = np.linalg.eigh(0.5 * (H + H.conj().T))
        return (V * np.exp(-1j * T * w)) @ V.conj().T
    return scipy.linalg.expm(-1j * T * H)


def matrix_element(
    alpha_f: complex, op: np.ndarray, alpha_i: complex, tol: float = ADMISSIBILITY_TOL
) -> complex:
    """``<alpha_f| op |alpha_i>`` in the truncated basis of ``op``."""
    D = op.shape[0]
    vf = coherent_vector(alpha_f, D, tol)
    vi = coherent_vector(alpha_i, D, tol)
    return complex(np.vdot(vf, op @ vi))


def overlap(alpha_f: complex, alpha_i: complex) -> complex:
    """Closed form ``<alpha_f|alpha_i>``."""
    return complex(
        np.exp(-0.5 * abs(alpha_i) ** 2 - 0.5 * abs(alpha_f) ** 2 + np.conj(alpha_f) * alpha_i)
    )


def interior(x: np.ndarray, size: int | None = None) -> np.ndarray:
    """Leading block (default ``D // 2``) of a vector or square matrix."""
    k = x.shape[0] // 2 if size is None else size
    return x[:k] if x.ndim == 1 else x[:k, :k]


def completeness_residual(D: int, rule) -> float:
    """Max deviation of ``(1/pi) int d^2a |a><a|`` from the identity on the leading ``D // 2`` block."""
    k = D // 2
    nodes = rule.nodes
    n = np.arange(k)
    # |a><a| entries carry exp(-|a|^2); with a Gaussian-factored rule only the
    # remainder relative to the rule's weight is evaluated
    with np.errstate(divide="ignore"):
        logr = np.log(np.abs(nodes))
    log_vec = n[None, :] * logr[:, None] - 0.5 * gammaln(n + 1)[None, :]
    vec = np.exp(log_vec + 1j * n[None, :] * np.angle(nodes)[:, None])
    vec[nodes == 0] = (n == 0).astype(float)
    gauss = -np.abs(nodes) ** 2
    if rule.gaussian_factored:
        gauss = gauss + np.abs(nodes) ** 2 / rule.scale**2
    w = rule.weights * np.exp(gauss)
    M = (vec * w[:, None]).T @ vec.conj() / np.pi
    return float(np.abs(M - np.eye(k)).max())


def to_json(x: np.ndarray) -> dict:
    """``{"dim": D, "entries": [[re, im], ...]}`` in row-major order."""
    x = np.asarray(x, dtype=complex)
    return {
        "dim": int(x.shape[0]),
        "entries": [[float(v.real), float(v.imag)] for v in x.ravel()],
    }


def from_json(obj: dict) -> np.ndarray:
    D = int(obj["dim"])
    flat = np.array([complex(re, im) for re, im in obj["entries"]])
    if flat.size == D:
        return flat
    if flat.size == D * D:
        return flat.reshape(D, D)
    raise ValueError(f"{flat.size} entries do not fit dim={D}")
