import cmath
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from starpath import fock
from starpath.errors import NonConvergence
from starpath.pathintegral import (
    AmplitudeReport,
    SliceConfig,
    compare_all,
    convergence_study,
    discrete_exponent,
    novikov_identity_residual,
    novikov_sides,
    oracle_amplitude,
    oracle_product_amplitude,
    sliced_amplitude,
    star_amplitude,
)
from starpath.quadrature import gauss_hermite_rule
from starpath.symbols import NormalSymbol

NUM = NormalSymbol.monomial(1, 1)


def golden(T, ai, af):
    return cmath.exp(
        -0.5 * abs(ai) ** 2 - 0.5 * abs(af) ** 2 + np.conj(af) * ai * cmath.exp(-1j * T)
    )


def test_slice_config_epsilon_is_derived():
    c = SliceConfig(7, 1.4, 0.1, 0.2)
    assert c.epsilon * c.N == pytest.approx(c.T)
    with pytest.raises(ValueError):
        SliceConfig(0, 1.0, 0, 0)
    with pytest.raises(ValueError):
        SliceConfig(2.5, 1.0, 0, 0)


def test_discrete_exponent_single_slice_free():
    ai, af = 0.3 + 0.1j, -0.4j
    assert cmath.exp(discrete_exponent([ai, af], NormalSymbol(), 0.1)) == pytest.approx(
        fock.overlap(af, ai)
    )


def test_discrete_exponent_first_order_matches_linear_matrix_element():
    ai, af, eps = 0.5, 0.2 - 0.3j, 1e-4
    H = NormalSymbol({(1, 1): 1.0, (0, 2): 0.4, (2, 1): 0.1j})
    D = 32
    ref = fock.matrix_element(af, np.eye(D) - 1j * eps * fock.from_symbol(H, D), ai)
    got = cmath.exp(discrete_exponent([ai, af], H, eps))
    assert abs(got - ref) <= 1e-7
    exact_linear = sliced_amplitude(SliceConfig(1, eps, ai, af), H)
    assert abs(exact_linear - ref) <= 1e-15


def test_discrete_exponent_zero_path():
    assert discrete_exponent(np.zeros(6), NUM, 0.3) == 0


def test_novikov_constant_path():
    path = np.full(9, 0.4 - 0.7j)
    lhs, rhs, _ = novikov_sides(path, 0.1)
    assert rhs == abs(path[0]) ** 2
    assert novikov_identity_residual(path, 0.1) <= 1e-15


def test_novikov_three_points_by_hand():
    a0, a1, a2 = 0.3 + 0.1j, -0.5j, 1.1
    eps = 0.25
    lhs, rhs, _ = novikov_sides([a0, a1, a2], eps)
    assert lhs == pytest.approx(np.conj(a1) * a0 + np.conj(a2) * a1 - abs(a1) ** 2, abs=1e-15)
    hand = 0.5 * (np.conj(a2) * a1 + np.conj(a1) * a0) + 0.5 * (
        a1 * (np.conj(a2) - np.conj(a1)) - np.conj(a1) * (a1 - a0)
    )
    assert rhs == pytest.approx(hand, abs=1e-15)


@settings(max_examples=200, deadline=None)
@given(
    st.integers(2, 64),
    st.floats(1e-3, 1.0),
    st.integers(0, 2**32 - 1),
)
def test_novikov_random_paths(N, eps, seed):
    rng = np.random.default_rng(seed)
    path = rng.normal(size=N + 1) + 1j * rng.normal(size=N + 1)
    lhs, rhs, scale = novikov_sides(path, eps)
    assert abs(lhs - rhs) <= 1e-12 * scale


def test_novikov_needs_intermediate_point():
    with pytest.raises(ValueError):
        novikov_identity_residual([0.1, 0.2], 0.1)


@pytest.mark.parametrize("N", [1, 3, 6])
def test_sliced_free_chain_telescopes(N):
    ai, af = 0.3 + 0.4j, -0.5
    got = sliced_amplitude(SliceConfig(N, 1.0, ai, af), NormalSymbol(), gauss_hermite_rule(16))
    assert abs(got - fock.overlap(af, ai)) <= 1e-10


@pytest.mark.parametrize("N", [1, 2, 4, 8])
def test_sliced_exact_for_product_operator(N):
    cfg = SliceConfig(N, 0.4 * N, 0.5, 0.3j)
    got = sliced_amplitude(cfg, NUM, gauss_hermite_rule(24))
    assert abs(got - oracle_product_amplitude(cfg, NUM, 40)) <= 1e-10


def test_sliced_exact_for_non_hermitian_quadratic():
    H = NormalSymbol({(1, 1): 1.0, (0, 2): 0.3, (1, 0): 0.2})
    cfg = SliceConfig(5, 1.0, 0.2 - 0.1j, 0.4)
    got = sliced_amplitude(cfg, H, gauss_hermite_rule(32))
    assert abs(got - oracle_product_amplitude(cfg, H, 60)) <= 1e-10


def test_exponential_kernel_agrees_to_first_order():
    c = SliceConfig(40, 1.0, 0.5, 0.3j)
    lin = sliced_amplitude(c, NUM)
    exp = sliced_amplitude(c, NUM, kernel="exponential")
    c2 = c.with_slices(80)
    lin2 = sliced_amplitude(c2, NUM)
    exp2 = sliced_amplitude(c2, NUM, kernel="exponential")
    assert abs(lin2 - exp2) < 0.6 * abs(lin - exp)


def test_sliced_rule_validation():
    with pytest.raises(ValueError):
        sliced_amplitude(SliceConfig(3, 1, 0, 0), NUM, gauss_hermite_rule(8, 2.0))
    with pytest.raises(ValueError):
        sliced_amplitude(SliceConfig(3, 1, 0, 0), NUM, kernel="cubic")


@pytest.mark.parametrize("T", [0.0, 0.1, 1.0, np.pi])
def test_star_amplitude_quadratic(T):
    cfg = SliceConfig(1, T, 0.3 + 0.4j, 0.2j)
    got = star_amplitude(cfg, NUM, max_order=40)
    want = golden(T, cfg.alpha_i, cfg.alpha_f)
    assert abs(got - want) <= 1e-8 * abs(want)


def test_star_amplitude_husimi_value():
    g = 0.4 - 0.2j
    cfg = SliceConfig(1, 0.8, g, g)
    assert star_amplitude(cfg, NUM) == pytest.approx(golden(0.8, g, g), abs=1e-10)


def test_star_amplitude_propagates_nonconvergence():
    with pytest.raises(NonConvergence):
        star_amplitude(SliceConfig(1, 3.0, 0.5, 0.5), NormalSymbol({(2, 2): 1.0}), 3, max_squarings=0)


def test_compare_all_quadratic():
    cfg = SliceConfig(8, 1.0, 0.5, 0.3j)
    rep = compare_all(cfg, NUM, routes=("star", "oracle", "optical"))
    g = golden(1.0, 0.5, 0.3j)
    for v in rep.values.values():
        assert abs(v - g) <= 1e-6
    assert rep.sliced_value is None
    assert set(rep.relative_errors()) == {"star-oracle", "star-optical", "oracle-optical"}


def test_compare_all_free():
    cfg = SliceConfig(4, 1.0, 0.5, 0.3j)
    rep = compare_all(cfg, NormalSymbol())
    ov = fock.overlap(0.3j, 0.5)
    for v in rep.values.values():
        assert abs(v - ov) <= 1e-10


def test_compare_all_anharmonic():
    H = NormalSymbol({(1, 1): 1.0, (2, 2): 0.1})
    rep = compare_all(SliceConfig(1, 1.0, 0.5, -0.5), H, routes=("star", "oracle"), D=40)
    assert rep.relative_errors()["star-oracle"] <= 1e-4


def test_compare_all_rejects_bad_routes():
    with pytest.raises(ValueError):
        compare_all(SliceConfig(1, 1.0, 0, 0), NUM, routes=())
    with pytest.raises(ValueError):
        compare_all(SliceConfig(1, 1.0, 0, 0), NUM, routes=("star", "magic"))


def test_report_errors_recomputed_from_values():
    rep = AmplitudeReport({"star": 1.0 + 0j, "oracle": 1.1 + 0j})
    assert rep.relative_errors()["star-oracle"] == pytest.approx(0.1 / 1.1)
    out = json.loads(json.dumps(rep.to_json()))
    assert out["values"]["oracle"] == [1.1, 0.0]


def test_convergence_first_order():
    study = convergence_study(SliceConfig(1, 1.0, 0.5, 0.3j), NUM, (10, 20, 40, 80), nodes=24)
    assert abs(study.slope - 1.0) <= 0.1
    assert study.to_csv().splitlines()[0] == "N,epsilon,abs_error,rel_error"


def test_convergence_free_is_exact():
    study = convergence_study(SliceConfig(1, 1.0, 0.5, 0.3j), NormalSymbol(), (2, 4, 8), nodes=16)
    assert study.exact and study.slope is None


def test_oracle_amplitude_matches_golden():
    cfg = SliceConfig(1, 2.0, 0.3 + 0.4j, -0.5)
    assert abs(oracle_amplitude(cfg, NUM, 32) - golden(2.0, cfg.alpha_i, cfg.alpha_f)) <= 1e-12
