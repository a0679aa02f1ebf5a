"""Normal symbols and the normal star product.

A normal symbol ``B(a, a*) = sum b_mn (a*)**m a**n`` is the phase-space
counterpart of the normally ordered operator ``sum b_mn (a^dag)**m a**n``.
The two arguments are independent complex variables; on the diagonal
``a* = conj(a)`` the symbol is the Husimi value ``<a|B|a>``.

The star product reproduces operator composition on symbols::

    (B * C)(a, a*) = sum_k 1/k! (d^k B / da^k) (d^k C / da*^k)

and terminates because symbols are polynomials.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np
from scipy.special import gammainc

from .errors import NonConvergence, NonConvergenceWarning

__all__ = [
    "NormalSymbol",
    "StarSeries",
    "add",
    "evaluate",
    "star_multiply",
    "star_commutator",
    "star_power",
    "star_exponential",
]

CANONICAL_RTOL = 1e-15
REFERENCE_RADIUS = 2.0
# largest term bound tolerated in the scaled Taylor stage; keeps cancellation
# losses near 1e-14 absolute
_PEAK_LIMIT = 1e2


def _canonical(
    terms: dict[tuple[int, int], complex], rtol: float = CANONICAL_RTOL
) -> dict[tuple[int, int], complex]:
    if not terms:
        return {}
    cut = rtol * max(abs(c) for c in terms.values())
    return {k: c for k, c in sorted(terms.items()) if c != 0 and abs(c) >= cut}


class NormalSymbol:
    """Sparse polynomial in ``(a*, a)`` keyed by exponent pairs ``(m, n)``.

    ``terms[(m, n)]`` is the coefficient of ``(a*)**m a**n``. Instances are
    immutable and always in canonical form: no zero coefficients and nothing
    below ``1e-15`` times the largest coefficient magnitude.

    ``B @ C`` is the star product; ``*`` only scales by a number.

    Pass ``rtol=0`` to keep every nonzero coefficient. Symbols that feed long
    chains of star products need this: a coefficient that is negligible on
    its own is multiplied by factorials when contracted.
    """

    __slots__ = ("_terms",)

    def __init__(
        self,
        terms: Mapping[tuple[int, int], complex] | None = None,
        *,
        rtol: float = CANONICAL_RTOL,
    ):
        clean: dict[tuple[int, int], complex] = {}
        for (m, n), c in (terms or {}).items():
            m, n = int(m), int(n)
            if m < 0 or n < 0:
                raise ValueError(f"negative exponent in term {(m, n)}")
            clean[(m, n)] = clean.get((m, n), 0j) + complex(c)
        self._terms = MappingProxyType(_canonical(clean, rtol))

    # -- constructors --------------------------------------------------------

    @classmethod
    def zero(cls) -> NormalSymbol:
        return cls()

    @classmethod
    def constant(cls, c: complex) -> NormalSymbol:
        return cls({(0, 0): c})

    @classmethod
    def monomial(cls, m: int, n: int, c: complex = 1.0) -> NormalSymbol:
        return cls({(m, n): c})

    @classmethod
    def alpha(cls) -> NormalSymbol:
        return cls({(0, 1): 1.0})

    @classmethod
    def alpha_star(cls) -> NormalSymbol:
        return cls({(1, 0): 1.0})

    @classmethod
    def from_array(cls, coeffs, *, rtol: float = CANONICAL_RTOL) -> NormalSymbol:
        """Build from a dense array with ``coeffs[m, n]`` on ``(a*)**m a**n``."""
        coeffs = np.asarray(coeffs, dtype=complex)
        ms, ns = np.nonzero(coeffs)
        return cls({(int(m), int(n)): coeffs[m, n] for m, n in zip(ms, ns)}, rtol=rtol)

    @classmethod
    def from_records(cls, records: Iterable[Iterable[float]]) -> NormalSymbol:
        """Load the interchange format: ``[m, n, re, im]`` rows, duplicates summed."""
        terms: dict[tuple[int, int], complex] = {}
        for rec in records:
            m, n, re, im = rec
            if int(m) != m or int(n) != n:
                raise ValueError(f"non-integer exponent in record {rec!r}")
            key = (int(m), int(n))
            terms[key] = terms.get(key, 0j) + complex(float(re), float(im))
        return cls(terms)

    def to_records(self) -> list[list[float]]:
        return [[m, n, c.real, c.imag] for (m, n), c in self._terms.items()]

    def to_array(self) -> np.ndarray:
        if not self._terms:
            return np.zeros((1, 1), dtype=complex)
        shape = (self.degree_star + 1, self.degree_alpha + 1)
        out = np.zeros(shape, dtype=complex)
        for (m, n), c in self._terms.items():
            out[m, n] = c
        return out

    # -- inspection ----------------------------------------------------------

    @property
    def terms(self) -> Mapping[tuple[int, int], complex]:
        return self._terms

    @property
    def degree(self) -> int:
        """Total degree ``max(m + n)``; the zero symbol has degree 0."""
        return max((m + n for m, n in self._terms), default=0)

    @property
    def degree_alpha(self) -> int:
        return max((n for _, n in self._terms), default=0)

    @property
    def degree_star(self) -> int:
        return max((m for m, _ in self._terms), default=0)

    def coefficient(self, m: int, n: int) -> complex:
        return self._terms.get((m, n), 0j)

    def is_zero(self) -> bool:
        return not self._terms

    def disk_bound(self, radius: float) -> float:
        """Upper bound of ``|B(a, a*)|`` for ``|a|, |a*| <= radius``."""
        if not self._terms:
            return 0.0
        with np.errstate(over="ignore"):
            return float(
                sum(abs(c) * float(radius) ** (m + n) for (m, n), c in self._terms.items())
            )

    def adjoint(self) -> NormalSymbol:
        """Symbol of the Hermitian adjoint operator."""
        return NormalSymbol(
            {(n, m): c.conjugate() for (m, n), c in self._terms.items()}, rtol=0.0
        )

    def __call__(self, a, a_star):
        return evaluate(self, a, a_star)

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = NormalSymbol.constant(other)
        if not isinstance(other, NormalSymbol):
            return NotImplemented
        return add(self, other)

    __radd__ = __add__

    def __neg__(self):
        return NormalSymbol({k: -c for k, c in self._terms.items()}, rtol=0.0)

    def __sub__(self, other):
        if isinstance(other, (int, float, complex)):
            other = NormalSymbol.constant(other)
        if not isinstance(other, NormalSymbol):
            return NotImplemented
        return add(self, -other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, scalar):
        if not isinstance(scalar, (int, float, complex, np.number)):
            return NotImplemented
        return NormalSymbol({k: c * scalar for k, c in self._terms.items()}, rtol=0.0)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def __matmul__(self, other):
        if not isinstance(other, NormalSymbol):
            return NotImplemented
        return star_multiply(self, other)

    def __eq__(self, other):
        if not isinstance(other, NormalSymbol):
            return NotImplemented
        return dict(self._terms) == dict(other._terms)

    def __hash__(self):
        return hash(tuple(self._terms.items()))

    def __bool__(self):
        return bool(self._terms)

    def __len__(self):
        return len(self._terms)

    def __repr__(self):
        if not self._terms:
            return "NormalSymbol(0)"
        parts = []
        for (m, n), c in self._terms.items():
            mono = "".join(
                s for s in (
                    f"a*^{m}" if m > 1 else ("a*" if m == 1 else ""),
                    f"a^{n}" if n > 1 else ("a" if n == 1 else ""),
                ) if s
            )
            parts.append(f"({c:.6g}){mono}")
        return "NormalSymbol(" + " + ".join(parts) + ")"


def add(B: NormalSymbol, C: NormalSymbol, *, rtol: float = CANONICAL_RTOL) -> NormalSymbol:
    terms = dict(B.terms)
    for k, c in C.terms.items():
        terms[k] = terms.get(k, 0j) + c
    return NormalSymbol(terms, rtol=rtol)


def evaluate(B: NormalSymbol, a, a_star):
    """Substitute ``a`` for the annihilation slot and ``a_star`` for the creation slot.

    The arguments are independent; pass ``a_star=np.conj(a)`` for the Husimi
    value. Broadcasts over numpy arrays.
    """
    a = np.asarray(a, dtype=complex)
    a_star = np.asarray(a_star, dtype=complex)
    out = np.zeros(np.broadcast(a, a_star).shape, dtype=complex)
    for (m, n), c in B.terms.items():
        out = out + c * a_star**m * a**n
    return out[()] if out.ndim == 0 else out


@lru_cache(maxsize=16)
def _contraction_tables(size: int) -> tuple[np.ndarray, np.ndarray]:
    """``perm[n, k] = n!/(n-k)!`` and ``comb[m, k] = C(m, k)`` as floats."""
    perm = np.zeros((size, size))
    comb = np.zeros((size, size))
    for n in range(size):
        for k in range(n + 1):
            try:
                perm[n, k] = float(math.perm(n, k))
            except OverflowError:
                perm[n, k] = np.inf
            comb[n, k] = float(math.comb(n, k))
    perm.setflags(write=False)
    comb.setflags(write=False)
    return perm, comb


def star_multiply(
    B: NormalSymbol, C: NormalSymbol, *, rtol: float = CANONICAL_RTOL
) -> NormalSymbol:
    """Normal star product, exact up to floating-point rounding."""
    if not B or not C:
        return NormalSymbol()
    bk = np.array(list(B.terms.keys()), dtype=np.int64)
    bv = np.array(list(B.terms.values()), dtype=complex)
    ck = np.array(list(C.terms.keys()), dtype=np.int64)
    cv = np.array(list(C.terms.values()), dtype=complex)
    m1, n1 = bk[:, 0], bk[:, 1]
    m2, n2 = ck[:, 0], ck[:, 1]

    kmax = int(min(n1.max(), m2.max()))
    perm, comb = _contraction_tables(max(int(n1.max()), int(m2.max()), 1) + 1)

    out_m = int(m1.max() + m2.max()) + 1
    out_n = int(n1.max() + n2.max()) + 1
    re = np.zeros(out_m * out_n)
    im = np.zeros(out_m * out_n)
    for k in range(kmax + 1):
        sb = n1 >= k
        sc = m2 >= k
        if not sb.any() or not sc.any():
            continue
        wb = bv[sb] * perm[n1[sb], k]
        wc = cv[sc] * comb[m2[sc], k]
        vals = np.outer(wb, wc).ravel()
        mm = (m1[sb][:, None] + m2[sc][None, :] - k).ravel()
        nn = (n1[sb][:, None] + n2[sc][None, :] - k).ravel()
        idx = mm * out_n + nn
        re += np.bincount(idx, weights=vals.real, minlength=out_m * out_n)
        im += np.bincount(idx, weights=vals.imag, minlength=out_m * out_n)
    return NormalSymbol.from_array((re + 1j * im).reshape(out_m, out_n), rtol=rtol)


def star_commutator(B: NormalSymbol, C: NormalSymbol) -> NormalSymbol:
    return star_multiply(B, C) - star_multiply(C, B)


def star_power(H: NormalSymbol, k: int) -> NormalSymbol:
    if k < 0:
        raise ValueError("star powers are defined for k >= 0")
    out = NormalSymbol.constant(1.0)
    for _ in range(k):
        out = star_multiply(out, H)
    return out


@dataclass(frozen=True)
class StarSeries:
    """Result of :func:`star_exponential`.

    ``order`` is the Taylor order of the (possibly scaled) series and
    ``tail_estimate`` the bound of its last term (on the reference disk for
    the plain series, in operator norm on the Fock block when squaring),
    multiplied by ``2**squarings`` for error growth under repeated squaring.
    ``truncation_error`` is the weight of a disk coherent state outside the
    Fock block plus the disk bound of terms removed by a degree cap.
    """

    value: NormalSymbol
    order: int
    tail_estimate: float
    converged: bool = True
    squarings: int = 0
    truncation_error: float = 0.0
    radius: float = REFERENCE_RADIUS
    fock_cutoff: int = 0
    degree_capped: bool = False

    @property
    def error_bound(self) -> float:
        return self.tail_estimate + self.truncation_error

    def __call__(self, a, a_star):
        return evaluate(self.value, a, a_star)


def default_fock_cutoff(radius: float) -> int:
    """Number-state cutoff covering coherent states with ``|a| <= radius``."""
    r = max(float(radius), 0.0)
    return min(150, math.ceil(r * r + 12.0 * r + 30.0))


def _term_bound(log_zk: float, bound: float, log_fact: float) -> float:
    if bound == 0.0:
        return 0.0
    if not math.isfinite(bound):
        return math.inf
    return math.exp(min(log_zk + math.log(bound) - log_fact, 700.0))


def _cut(B: NormalSymbol, cutoff: int, radius: float, max_degree: int | None):
    """Restrict ``B`` to the first ``cutoff`` number states.

    ``(a^dag)**m a**n`` vanishes between states below ``cutoff`` once
    ``m >= cutoff`` or ``n >= cutoff``; dropping those terms leaves the block
    unchanged. Terms above ``max_degree`` are dropped too and their disk
    bound is returned as a genuine truncation error.
    """
    keep: dict[tuple[int, int], complex] = {}
    capped_bound = 0.0
    capped = False
    for (m, n), c in B.terms.items():
        if max_degree is not None and m + n > max_degree:
            capped_bound += abs(c) * radius ** (m + n)
            capped = True
        elif m < cutoff and n < cutoff:
            keep[(m, n)] = c
    return NormalSymbol(keep, rtol=0.0), capped_bound, capped


def block_norm_bound(B: NormalSymbol, cutoff: int) -> float:
    """Upper bound on the operator norm of ``B`` between the first ``cutoff`` number states."""
    total = 0.0
    top = cutoff - 1
    for (m, n), c in B.terms.items():
        j = min(top, top + n - m)
        if j < n:
            continue
        log_w = 0.5 * (
            math.lgamma(j + 1) - math.lgamma(j - n + 1)
            + math.lgamma(j - n + m + 1) - math.lgamma(j - n + 1)
        )
        total += abs(c) * math.exp(log_w)
    return total


def star_exponential(
    H: NormalSymbol,
    z: complex,
    max_order: int = 64,
    tol: float = 1e-10,
    *,
    radius: float = REFERENCE_RADIUS,
    fock_cutoff: int | None = None,
    max_degree: int | None = None,
    max_squarings: int = 60,
    strict: bool = False,
) -> StarSeries:
    """Star exponential ``sum_k z**k / k! H**(*k)``.

    The plain series is tried first: each term is bounded on the disk
    ``|a| <= radius`` and the sum stops at the first term below ``tol``.

    When that fails within ``max_order`` terms, or the terms grow large
    enough to cancel badly, the argument is scaled by ``2**-s`` and the
    partial sum star-squared ``s`` times (``exp(zH) = exp(zH/2) * exp(zH/2)``
    in the star algebra). Squaring amplifies any error of the scaled series
    on highly excited states, so in this branch the scaled series must
    converge in operator norm on the first ``fock_cutoff`` number states,
    and all symbols are cut to that block (terms that annihilate every state
    below the cutoff are dropped). The default cutoff covers coherent states
    on the reference disk. ``max_degree`` optionally caps ``m + n`` as well.

    If neither branch reaches ``tol`` the best partial sum is returned with
    ``converged=False`` and a :class:`NonConvergenceWarning`, or
    :class:`NonConvergence` is raised when ``strict``.
    """
    if max_order < 1:
        raise ValueError("max_order must be at least 1")
    if tol <= 0:
        raise ValueError("tol must be positive")
    cutoff = default_fock_cutoff(radius) if fock_cutoff is None else int(fock_cutoff)
    one = NormalSymbol.constant(1.0)
    az = abs(complex(z))
    if not H or az == 0.0:
        return StarSeries(one, 0, 0.0, radius=radius, fock_cutoff=cutoff)
    H = NormalSymbol(H.terms, rtol=0.0)
    log_az = math.log(az)

    # plain series, controlled on the reference disk
    powers = [one]
    terms = [1.0]
    log_fact = 0.0
    plain_ok = False
    for k in range(1, max_order + 1):
        powers.append(star_multiply(powers[-1], H, rtol=0.0))
        if max_degree is not None and powers[-1].degree > max_degree:
            break
        log_fact += math.log(k)
        terms.append(_term_bound(k * log_az, powers[-1].disk_bound(radius), log_fact))
        if max(terms) > _PEAK_LIMIT:
            break
        if terms[-1] < tol:
            plain_ok = True
            break

    if plain_ok:
        value = _partial_sum(powers, complex(z))
        return StarSeries(
            value=value,
            order=len(powers) - 1,
            tail_estimate=terms[-1],
            radius=radius,
            fock_cutoff=cutoff,
        )

    # scaling and squaring, controlled on the Fock block
    theta = az * block_norm_bound(H, cutoff)
    chosen = None
    for s in range(1, max_squarings + 1):
        th = theta / 2**s
        if th > 1.0:
            continue
        log_fact = 0.0
        for k in range(1, max_order + 1):
            log_fact += math.log(k)
            log_term = k * math.log(th) - log_fact if th > 0 else -math.inf
            if log_term < math.log(tol):
                chosen = (s, k, math.exp(log_term))
                break
        if chosen:
            break

    if chosen is None:
        # best effort: return the plain partial sum
        value = _partial_sum(powers, complex(z))
        result = StarSeries(value, len(powers) - 1, terms[-1], converged=False,
                            radius=radius, fock_cutoff=cutoff,
                            degree_capped=max_degree is not None)
        _warn_or_raise(result, tol, max_order, strict)
        return result

    s, K, last = chosen
    dropped = 0.0
    capped = False
    block = [one]
    for _ in range(K):
        P, d, c = _cut(star_multiply(block[-1], H, rtol=0.0), cutoff, radius, max_degree)
        block.append(P)
        capped = capped or c
    value = _partial_sum(block, complex(z) / 2**s)
    for _ in range(s):
        value, d, c = _cut(star_multiply(value, value, rtol=0.0), cutoff, radius, max_degree)
        dropped += d
        capped = capped or c

    dropped += float(gammainc(cutoff, radius * radius))
    result = StarSeries(
        value=value,
        order=K,
        tail_estimate=last * 2**s,
        converged=not capped,
        squarings=s,
        truncation_error=dropped,
        radius=radius,
        fock_cutoff=cutoff,
        degree_capped=capped,
    )
    if capped:
        _warn_or_raise(result, tol, max_order, strict)
    return result


def _partial_sum(powers: list[NormalSymbol], t: complex) -> NormalSymbol:
    coeff = 1.0 + 0j
    value = NormalSymbol()
    for k, P in enumerate(powers):
        if k:
            coeff *= t / k
        value = add(value, P * coeff, rtol=0.0)
    return value


def _warn_or_raise(result: StarSeries, tol: float, max_order: int, strict: bool) -> None:
    msg = (
        f"star exponential did not reach tol={tol:g} within max_order={max_order}"
        f" (last term bound {result.tail_estimate:.3g}, degree capped: {result.degree_capped})"
    )
    if strict:
        raise NonConvergence(msg)
    warnings.warn(msg, NonConvergenceWarning, stacklevel=3)
