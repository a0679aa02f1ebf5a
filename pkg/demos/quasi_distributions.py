"""s-ordered distributions of a cat state, and a P function with complex deltas.

Q (s=-1) and Wigner (s=0) are sampled on a grid from the characteristic
function. The P function (s=1) of a coherent state is a point mass, and that
of |a_i><a_f| is a pair of deltas at complex points; pairing either with the
Husimi symbol of an operator gives its expectation value.
"""

import numpy as np

from starpath import NormalSymbol, QuasiDistribution, fock, optical_expectation, p_nondiagonal
from starpath.quasiprob import distribution_rule, quasi_distribution

D = 40
g = 1.5
v = fock.coherent_vector(g, D) + fock.coherent_vector(-g, D)
v /= np.linalg.norm(v)
rho = np.outer(v, v.conj())

xs = np.linspace(-3, 3, 7)
for s, name in ((-1, "Q"), (0, "W")):
    vals = quasi_distribution(rho, xs + 0j, s)
    print(f"{name} on the real axis:", np.array2string(vals.real, precision=4))
    print(f"  largest imaginary part: {np.abs(vals.imag).max():.1e}")
# The interference fringes make the Wigner function negative on the imaginary axis.
w = quasi_distribution(rho, 1j * np.linspace(0, 1.2, 5), 0).real
print("W on the imaginary axis:", np.array2string(w, precision=4))

d = QuasiDistribution.from_state(rho, -1, distribution_rule(-1, 24))
print("Q normalization:", d.normalization())

B = NormalSymbol({(1, 1): 1.0, (0, 2): 0.5})
gam = 0.4 - 0.2j
print("\n<gam|B|gam> via point mass:", optical_expectation(QuasiDistribution.point_mass(gam), B))

ai, af = 0.6, -0.2 + 0.5j
pair = p_nondiagonal(ai, af)
print("delta points:", pair.re_point, pair.im_point)
print("paired with B:", pair.pair(B))
print("number basis: ", fock.matrix_element(af, fock.from_symbol(B, D), ai))
