"""The time-sliced coherent-state integral at finite N and as N grows.

With the per-slice kernel <p|q>(1 - i eps H(q, conj p)) the N-slice integral
is exactly <a_f|(1 - i eps H)^N|a_i>. It approaches exp(-iTH) only in the
limit, with an error proportional to eps.
"""

import numpy as np

from starpath import NormalSymbol, SliceConfig, convergence_study, sliced_amplitude
from starpath.pathintegral import oracle_product_amplitude
from starpath.quadrature import gauss_hermite_rule

H = NormalSymbol.monomial(1, 1)
cfg = SliceConfig(1, 1.0, 0.5, 0.3j)
rule = gauss_hermite_rule(24)

print("finite N against the product operator")
for N in (1, 2, 4, 8, 16):
    c = cfg.with_slices(N)
    s = sliced_amplitude(c, H, rule)
    print(f"  N={N:3d}  |sliced - oracle| = {abs(s - oracle_product_amplitude(c, H, 40)):.1e}")

study = convergence_study(cfg, H, (10, 20, 40, 80, 160), nodes=24)
print("\ncontinuum limit")
print(study.to_csv(), end="")
print(f"fitted slope {study.slope:.4f}")

# The exponentiated kernel differs from the linear one at O(eps^2) per slice,
# so the two chains meet as N grows.
for N in (10, 40, 160):
    c = cfg.with_slices(N)
    d = sliced_amplitude(c, H, rule) - sliced_amplitude(c, H, rule, kernel="exponential")
    print(f"  N={N:3d}  linear - exponential kernel: {abs(d):.2e}")
print("exact:", np.exp(-0.5 * 0.25 - 0.5 * 0.09 + np.conj(0.3j) * 0.5 * np.exp(-1j)))
