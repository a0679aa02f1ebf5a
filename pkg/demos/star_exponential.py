"""Coherent-state amplitudes from the star exponential.

The amplitude <a_f| exp(-iTH) |a_i> is the overlap <a_f|a_i> times the star
exponential of -iTH, read off at a = a_i and a* = conj(a_f). Here we check it
against brute-force exponentiation in the number basis for a Kerr-type
Hamiltonian, and watch the series order and squarings the expansion needs.
"""

import numpy as np

from starpath import NormalSymbol, SliceConfig, compare_all
from starpath.pathintegral import star_series

# a*a + 0.1 a*^2 a^2
H = NormalSymbol({(1, 1): 1.0, (2, 2): 0.1})
alpha_i, alpha_f = 0.5, 0.3 + 0.4j

print(f"H = {H!r}")
print(f"{'T':>5} {'order':>5} {'sq':>3} {'tail':>9} {'|star - oracle|':>16}")
for T in (0.1, 0.5, 1.0, 2.0):
    cfg = SliceConfig(1, T, alpha_i, alpha_f)
    series = star_series(cfg, H)
    rep = compare_all(cfg, H, routes=("star", "oracle", "optical"), D=48)
    err = abs(rep.star_value - rep.oracle_value)
    print(f"{T:5.1f} {series.order:5d} {series.squarings:3d} {series.tail_estimate:9.1e} {err:16.2e}")

# The optical-equivalence value pairs the non-diagonal P function of
# |a_i><a_f| with the same symbol, so it should coincide with the star value.
print("optical - star:", abs(rep.optical_value - rep.star_value))

# Number of terms in the star exponential grows with T; show the largest few.
top = sorted(series.value.terms.items(), key=lambda kv: -abs(kv[1]))[:5]
for (m, n), c in top:
    print(f"  a*^{m} a^{n}: {c:.4f}")
print("value at (a_i, conj a_f):", series(alpha_i, np.conj(alpha_f)))
