import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tomolab import DomainError, ModeConstants, PolynomialPotential, harmonic, parse_potential


def test_parse_single_mode():
    U = parse_potential("q^2/2")
    assert U.terms == {(2,): 0.5} and U.modes == 1 and U.degree == 2


def test_parse_two_modes_and_coupling():
    U = parse_potential("0.5*q1^2 + 0.5*q2^2 - q1*q2")
    assert U.modes == 2
    assert U.terms == {(2, 0): 0.5, (0, 2): 0.5, (1, 1): -1.0}


def test_parse_scientific_and_constant():
    U = parse_potential("-2.5e-1*q^2+1")
    assert U.terms == {(2,): -0.25, (0,): 1.0}


def test_parse_errors():
    with pytest.raises(DomainError):
        parse_potential("q^5")
    with pytest.raises(DomainError):
        parse_potential("x^2")
    with pytest.raises(DomainError):
        parse_potential("q3^2", modes=2)


def test_zero_potential():
    assert parse_potential("0").is_zero()


def test_complex_coefficient_rejected():
    with pytest.raises(DomainError):
        PolynomialPotential({(2,): 1 + 1j})


def test_shared_hbar_required():
    with pytest.raises(DomainError):
        PolynomialPotential({(1, 1): 1.0}, 2, (ModeConstants(hbar=1.0), ModeConstants(hbar=2.0)))


def test_harmonic_uses_constants():
    U = harmonic(2, (ModeConstants(mass=2.0, frequency=3.0), ModeConstants()))
    assert U.terms == {(2, 0): 9.0, (0, 2): 0.5}


def test_derivatives():
    U = parse_potential("q^4/4 + q^3/10")
    assert U.derivative(3).terms == pytest.approx({(1,): 6.0, (0,): 0.6})
    assert U.derivative(5).is_zero()
    V = parse_potential("q1^2*q2")
    assert V.derivative((1, 1)).terms == {(1, 0): 2.0}


def test_multi_indices_by_parity():
    U = parse_potential("q1^2*q2 + q2^3")
    odd = U.multi_indices(1)
    assert all(sum(k) % 2 == 1 for k in odd)
    assert (1, 0) in odd and (0, 3) in odd and (2, 1) in odd


coef = st.floats(-3, 3, allow_nan=False)


@given(coef, coef, coef, st.floats(-2, 2), st.floats(-2, 2))
def test_evaluation_and_describe_roundtrip(a, b, c, x, y):
    U = PolynomialPotential({(2, 0): a, (1, 1): b, (0, 3): c}, 2)
    expected = a * x ** 2 + b * x * y + c * y ** 3
    assert U(x, y) == pytest.approx(expected, abs=1e-12)
    V = parse_potential(U.describe().replace("+ -", "- "), modes=2)
    assert V(x, y) == pytest.approx(expected, rel=1e-5, abs=1e-5)


@given(coef, coef, st.floats(-2, 2))
def test_derivative_matches_finite_difference(a, b, x):
    U = PolynomialPotential({(4,): a, (2,): b})
    h = 1e-4
    fd = (U(x + h) - U(x - h)) / (2 * h)
    assert U.derivative(1)(x) == pytest.approx(fd, abs=1e-6)


def test_addition_and_scaling():
    U = parse_potential("q^2") + parse_potential("q^2/2")
    assert U.terms == {(2,): 1.5}
    assert U.scaled(2.0).terms == {(2,): 3.0}
    assert np.isclose(U(2.0), 6.0)
