import cmath
import csv
import io
import json
import math

import numpy as np
import pytest

from starpath import fock
from starpath.errors import DivergentTransform, InadmissibleTestFunction
from starpath.quadrature import gauss_hermite_rule
from starpath.quasiprob import (
    GaussPoly,
    GeneralizedDeltaPair,
    PhaseSpaceFunction,
    QuasiDistribution,
    SOrder,
    characteristic_function,
    delta_sift,
    distribution_rule,
    optical_expectation,
    p_nondiagonal,
    q_representation,
    quasi_distribution,
    regularized_delta_sift,
    richardson,
)
from starpath.symbols import NormalSymbol, star_exponential

VACUUM = np.diag([1.0, 0.0]).astype(complex)


def coherent_rho(g, D=32):
    v = fock.coherent_vector(g, D)
    return np.outer(v, v.conj())


def test_sorder_validation():
    assert float(SOrder(0)) == 0.0
    with pytest.raises(ValueError):
        SOrder(1.5)


@pytest.mark.parametrize("s", [-1.0, -0.3, 0.0, 1.0])
def test_vacuum_characteristic_function(s):
    beta = np.array([0.0, 0.4 - 0.2j, 1.3j])
    want = np.exp((s - 1) * np.abs(beta) ** 2 / 2)
    np.testing.assert_allclose(characteristic_function(VACUUM, beta, s), want, atol=1e-15)


def test_characteristic_function_bounded_for_coherent_state():
    xs = np.linspace(-3, 3, 13)
    grid = (xs[:, None] + 1j * xs[None, :]).ravel()
    G = characteristic_function(coherent_rho(0.6 + 0.2j), grid, -1)
    assert np.abs(G).max() <= 1 + 1e-12
    assert characteristic_function(coherent_rho(0.6 + 0.2j), 0.0, 0) == pytest.approx(1.0)


def test_characteristic_function_warns_on_trace():
    with pytest.warns(RuntimeWarning):
        characteristic_function(2 * VACUUM, 0.1, 0)


@pytest.mark.parametrize("s", [-1.0, 0.0, -0.5])
def test_coherent_state_closed_form(s):
    g = 0.7 + 0.2j
    pts = np.array([0.0, g, 1 - 1j, 2.5])
    want = 2 / (math.pi * (1 - s)) * np.exp(-2 * np.abs(pts - g) ** 2 / (1 - s))
    got = quasi_distribution(coherent_rho(g), pts, s)
    np.testing.assert_allclose(got, want, atol=1e-12)


def test_vacuum_closed_forms_on_disk_and_normalization():
    xs = np.linspace(-3, 3, 31)
    grid = (xs[:, None] + 1j * xs[None, :]).ravel()
    grid = grid[np.abs(grid) <= 3]
    q = quasi_distribution(VACUUM, grid, -1)
    w = quasi_distribution(VACUUM, grid, 0)
    assert np.abs(q - np.exp(-np.abs(grid) ** 2) / np.pi).max() <= 1e-8
    assert np.abs(w - 2 / np.pi * np.exp(-2 * np.abs(grid) ** 2)).max() <= 1e-8
    for s in (-1, 0):
        d = QuasiDistribution.from_state(VACUUM, s, distribution_rule(s))
        assert abs(d.normalization() - 1) <= 1e-6


def test_wigner_of_fock_state_is_negative_at_origin():
    rho = np.diag([0.0, 1.0, 0.0]).astype(complex)
    w = quasi_distribution(rho, 0.0, 0).real
    assert w == pytest.approx(-2 / math.pi, abs=1e-10)


def test_hermitian_state_has_small_imaginary_residual():
    rho = 0.5 * coherent_rho(0.5) + 0.5 * coherent_rho(-0.3j)
    pts = np.linspace(-2, 2, 9) + 0.3j
    assert np.abs(quasi_distribution(rho, pts, -0.5).imag).max() <= 1e-12


def test_positive_s_refused():
    with pytest.raises(DivergentTransform):
        quasi_distribution(VACUUM, 0.0, 0.5)


def test_q_representation_examples():
    g = 0.4 - 0.9j
    assert q_representation(NormalSymbol.monomial(1, 1), g) == pytest.approx(abs(g) ** 2)
    assert q_representation(NormalSymbol.constant(1), g) == pytest.approx(1)
    x = 0.8
    B = NormalSymbol.alpha() + NormalSymbol.alpha_star()
    D = 32
    ref = fock.matrix_element(x, fock.from_symbol(B, D), x)
    assert q_representation(B, x) == pytest.approx(2 * x) == pytest.approx(ref)


def test_delta_sift_examples():
    assert delta_sift(GaussPoly((0, 0, 1)), 1 + 1j) == pytest.approx(2j)
    assert delta_sift(GaussPoly(exponent=(0, 0, -1)), 1j) == pytest.approx(math.e)


def test_regularized_witness_extrapolates_to_sifted_value():
    f = GaussPoly((0, 0, 1))
    z = 1 + 1j
    vals = [regularized_delta_sift(f, z, e) for e in (0.4, 0.2, 0.1)]
    # first-order bias: x^2 against a Gaussian of variance 2 eps
    assert vals[0] == pytest.approx(z * z + 0.8, abs=1e-10)
    assert abs(richardson(vals) - delta_sift(f, z)) <= 1e-6


def test_regularized_witness_cubic():
    f = GaussPoly((1, -2, 0, 1))
    z = -0.4 + 0.7j
    vals = [regularized_delta_sift(f, z, e) for e in (0.2, 0.1, 0.05)]
    assert abs(richardson(vals) - delta_sift(f, z)) <= 1e-6


def test_inadmissible_test_functions():
    with pytest.raises(InadmissibleTestFunction):
        delta_sift(GaussPoly(exponent=(0, 0, 1)), 0.5)
    with pytest.raises(InadmissibleTestFunction):
        delta_sift(GaussPoly(exponent=(0, 1, 0)), 0.5)
    with pytest.raises(InadmissibleTestFunction):
        delta_sift(lambda x: x, 0.5)
    grow = PhaseSpaceFunction(NormalSymbol.constant(1), NormalSymbol.monomial(1, 1))
    with pytest.raises(InadmissibleTestFunction):
        p_nondiagonal(0.1, 0.2).pair(grow)


def test_phase_space_admissibility():
    gauss = PhaseSpaceFunction(NormalSymbol.constant(1), NormalSymbol.monomial(1, 1, -1))
    assert gauss.admissible()
    # -|a|^2 + a^2 + a*^2 = x^2 - 3 y^2 grows along x
    saddle = PhaseSpaceFunction(
        NormalSymbol.constant(1), NormalSymbol({(1, 1): -1, (2, 0): 1, (0, 2): 1})
    )
    assert not saddle.admissible()
    # -|a|^2 + (a^2 + a*^2)/2 = -2 y^2: flat along x, so bounded
    ridge = PhaseSpaceFunction(
        NormalSymbol.constant(1), NormalSymbol({(1, 1): -1, (2, 0): 0.5, (0, 2): 0.5})
    )
    assert ridge.admissible()
    # ... unless a linear term pushes along the flat direction
    tilted = PhaseSpaceFunction(
        NormalSymbol.constant(1), NormalSymbol({(1, 1): -1, (2, 0): 0.5, (0, 2): 0.5, (0, 1): 1})
    )
    assert not tilted.admissible()
    # pure phase: bounded
    assert PhaseSpaceFunction(NormalSymbol.constant(1), NormalSymbol.monomial(1, 1, 1j)).admissible()


def test_pairing_identity_gives_overlap():
    ai, af = 0.3 + 0.4j, -0.5
    pair = p_nondiagonal(ai, af)
    assert pair.pair(NormalSymbol.constant(1)) == pytest.approx(fock.overlap(af, ai), abs=1e-15)
    assert pair.prefactor() == pytest.approx(fock.overlap(af, ai), abs=1e-15)


def test_diagonal_pairing_reduces_to_point():
    g = 0.6 - 0.1j
    pair = p_nondiagonal(g, g)
    assert pair.re_point == pytest.approx(g.real)
    assert pair.im_point == pytest.approx(g.imag)
    B = NormalSymbol({(2, 1): 1.0, (0, 1): -0.5j})
    assert pair.pair(B) == pytest.approx(q_representation(B, g))


def test_pairing_with_free_evolution():
    ai, af, T = 0.5, 0.2j, 1.3
    U = star_exponential(NormalSymbol.monomial(1, 1), -1j * T, radius=1.0, strict=True)
    want = cmath.exp(
        -0.5 * abs(ai) ** 2 - 0.5 * abs(af) ** 2 + np.conj(af) * ai * cmath.exp(-1j * T)
    )
    assert abs(p_nondiagonal(ai, af).pair(U.value) - want) <= 1e-9


def test_evaluation_point_convention_against_oracle():
    # H = a*a + lambda a^2 is not symmetric under a <-> a*, so the two
    # candidate evaluation points give different answers; only one is right
    H = NormalSymbol({(1, 1): 1.0, (0, 2): 0.3})
    T = 1.0
    D = 60
    U = fock.evolve(fock.from_symbol(H, D), T)
    series = star_exponential(H, -1j * T, radius=1.0, strict=True)
    for ai, af in [(0.5 + 0.2j, -0.3 + 0.4j), (0.1, 0.7j)]:
        ref = fock.matrix_element(af, U, ai)
        derived = p_nondiagonal(ai, af, "derived").pair(series.value)
        printed = p_nondiagonal(ai, af, "printed").pair(series.value)
        assert abs(derived - ref) <= 1e-9
        assert abs(printed - ref) >= 1e-3


def test_conventions_agree_for_symmetric_symbols():
    B = NormalSymbol({(1, 1): 2.0, (2, 2): -0.3, (0, 0): 1.0})
    ai, af = 0.4 - 0.2j, 0.1 + 0.6j
    a = p_nondiagonal(ai, af, "derived").pair(B)
    b = p_nondiagonal(ai, af, "printed").pair(B)
    assert a == pytest.approx(b, abs=1e-14)


def test_pairing_matches_matrix_elements_for_random_symbols():
    rng = np.random.default_rng(11)
    D = 40
    for _ in range(20):
        B = NormalSymbol(
            {(m, n): complex(*rng.normal(size=2)) for m in range(4) for n in range(4 - m)}
        )
        ai, af = complex(*rng.uniform(-0.7, 0.7, 2)), complex(*rng.uniform(-0.7, 0.7, 2))
        ref = fock.matrix_element(af, fock.from_symbol(B, D), ai)
        assert abs(p_nondiagonal(ai, af).pair(B) - ref) <= 1e-10


def test_pairing_is_linear():
    pair = p_nondiagonal(0.2, -0.4j)
    B, C = NormalSymbol.monomial(2, 0), NormalSymbol.monomial(0, 1, 3j)
    assert pair.pair(B + C * 2) == pytest.approx(pair.pair(B) + 2 * pair.pair(C))


def test_delta_pair_json_round_trip():
    pair = p_nondiagonal(0.3 + 0.1j, -0.2 + 0.5j)
    back = GeneralizedDeltaPair.from_json(json.loads(json.dumps(pair.to_json())))
    assert back == pair


def test_optical_expectation_point_mass():
    g = 0.5 + 0.5j
    P = QuasiDistribution.point_mass(g)
    assert optical_expectation(P, NormalSymbol.monomial(1, 1)) == pytest.approx(abs(g) ** 2)
    assert optical_expectation(P, NormalSymbol.constant(1)) == pytest.approx(1)


def test_optical_expectation_grid_thermal_state():
    # thermal P function exp(-|a|^2/n)/(pi n) gives <a*a> = n
    n = 0.7
    rule = gauss_hermite_rule(24, math.sqrt(n))
    P = QuasiDistribution.from_function(1, lambda a: np.exp(-np.abs(a) ** 2 / n) / (math.pi * n), rule)
    assert P.normalization() == pytest.approx(1, abs=1e-12)
    assert optical_expectation(P, NormalSymbol.monomial(1, 1)) == pytest.approx(n, abs=1e-12)
    assert optical_expectation(P, NormalSymbol.monomial(2, 2)) == pytest.approx(2 * n * n, abs=1e-12)


def test_optical_expectation_requires_p_function():
    d = QuasiDistribution.from_state(VACUUM, -1, distribution_rule(-1, 4))
    with pytest.raises(ValueError):
        optical_expectation(d, NormalSymbol.constant(1))


def test_grid_csv_and_json_export():
    d = QuasiDistribution.from_state(VACUUM, -1, distribution_rule(-1, 3))
    rows = list(csv.reader(io.StringIO(d.to_csv())))
    assert rows[0] == ["re_alpha", "im_alpha", "value", "imag_residual"]
    assert len(rows) == 10
    re, im, v, _ = map(float, rows[1])
    assert v == pytest.approx(math.exp(-(re * re + im * im)) / math.pi, abs=1e-12)
    assert json.loads(json.dumps(d.to_json()))["kind"] == "grid"
