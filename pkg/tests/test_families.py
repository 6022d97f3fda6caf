import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import TOY_A, X, Y, Z
from hhl_nopost import families, numkit, spectral
from hhl_nopost.errors import DimMismatch, NotPowerOfTwo, NotUnitary, ParseError
from hhl_nopost.families import Parity, PauliPolynomial, PauliString, TridiagSpec
from randmat import haar_unitary, hermitian, unit_vector

PAIRS = [("X", "Y"), ("Y", "Z"), ("Z", "X")]


def brute_commutator(a, b):
    return numkit.commutator(a.matrix(), b.matrix())


# Pauli strings


def test_pauli_string_matrix():
    np.testing.assert_array_equal(PauliString("X").matrix(), X)
    np.testing.assert_array_equal(PauliString("ZZ").matrix(), np.diag([1, -1, -1, 1]))
    np.testing.assert_array_equal(PauliString("xi", 2).matrix(), 2 * np.kron(X, np.eye(2)))
    assert PauliString("XIZ").weight == 2
    assert not PauliString("X", 1j).is_hermitian
    with pytest.raises(ValueError):
        PauliString("XA")


@pytest.mark.parametrize("p1,p2", PAIRS)
@pytest.mark.parametrize("K", range(1, 6))
def test_k_commutator_closed_form(K, p1, p2):
    scalar, string = families.pauli_k_commutator(K, p1, p2)
    brute = brute_commutator(families.uniform_string(p1, K), families.uniform_string(p2, K))
    np.testing.assert_allclose(scalar * string.matrix(), brute, atol=1e-12)
    if K % 2 == 0:
        assert scalar == 0
        assert np.abs(brute).max() == 0


def test_k_commutator_examples():
    scalar, string = families.pauli_k_commutator(1)
    assert scalar == 2j and string.factors == "Z"
    scalar, string = families.pauli_k_commutator(3)
    assert scalar == pytest.approx(-2j) and string.factors == "ZZZ"


@pytest.mark.parametrize("p1,p2", PAIRS)
@pytest.mark.parametrize("K,N", [(1, 1), (1, 2), (2, 3), (3, 3), (3, 5), (4, 4)])
def test_padded_commutator_closed_form(K, N, p1, p2):
    scalar, string = families.pauli_padded_commutator(K, N, p1, p2)
    a = PauliString(p1 * K + "I" * (N - K))
    brute = brute_commutator(a, families.uniform_string(p2, N))
    np.testing.assert_allclose(scalar * string.matrix(), brute, atol=1e-12)


def test_padded_commutator_example():
    scalar, string = families.pauli_padded_commutator(1, 2)
    assert scalar == 2j and string.factors == "ZY"
    np.testing.assert_allclose(2j * np.kron(Z, Y), brute_commutator(PauliString("XI"), PauliString("YY")))


def test_commutator_argument_checks():
    with pytest.raises(ValueError):
        families.pauli_k_commutator(0)
    with pytest.raises(ValueError):
        families.pauli_padded_commutator(3, 2)


# polynomials


def test_parity():
    assert PauliPolynomial([PauliString("XX"), PauliString("ZI")]).parity is Parity.MIXED
    assert PauliPolynomial([PauliString("XX"), PauliString("YY")]).parity is Parity.EVEN
    assert PauliPolynomial([PauliString("XI"), PauliString("IY")]).parity is Parity.ODD


def test_even_constructor_filters():
    PauliPolynomial.even([PauliString("XX"), PauliString("ZZ")])
    with pytest.raises(ValueError, match="odd"):
        PauliPolynomial.even([PauliString("XI")])
    with pytest.raises(ValueError, match="mixes"):
        PauliPolynomial.even([PauliString("XZ")])
    with pytest.raises(DimMismatch):
        PauliPolynomial([PauliString("XX"), PauliString("X")])


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), N=st.integers(2, 5), p=st.sampled_from("XYZ"))
def test_even_polynomial_commutes_with_uniform_string(seed, N, p):
    degrees = [d for d in range(2, N + 1, 2)]
    poly = families.even_pauli_polynomial(N, degrees, seed)
    assert poly.parity is Parity.EVEN
    # each term with an even number of one type commutes with the uniform string of that type
    # and anticommutes an even number of times with the others
    M = families.uniform_string(p, N).matrix()
    np.testing.assert_allclose(numkit.commutator(M, poly.matrix()), 0, atol=1e-12)
    A = families.shift_positive(poly.matrix())
    assert families.postselection_free_check(A, M).is_free
    assert numkit.eigh(A).values[0] >= 1.0 - 1e-12


def test_even_polynomial_argument_checks():
    with pytest.raises(ValueError):
        families.even_pauli_polynomial(4, [3])
    with pytest.raises(ValueError):
        families.even_pauli_polynomial(2, [4])


def test_even_polynomial_reproducible():
    a = families.even_pauli_polynomial(4, [2, 4], 9)
    b = families.even_pauli_polynomial(4, [2, 4], 9)
    assert a == b


def test_odd_string_breaks_condition():
    A = families.shift_positive(PauliString("XI").matrix() + PauliString("ZZ").matrix())
    rep = families.postselection_free_check(A, PauliString("YY").matrix())
    assert not rep.is_free
    assert rep.norm_double > 0


# tridiagonal family


def test_tridiag_example():
    np.testing.assert_array_equal(
        families.tridiag(TridiagSpec(2, -1, 4)),
        [[2, -1, 0, 0], [-1, 2, -1, 0], [0, -1, 2, -1], [0, 0, -1, 2]],
    )
    with pytest.raises(NotPowerOfTwo):
        families.tridiag(TridiagSpec(2, -1, 6))


def test_reflection_is_x_string():
    for n in (1, 2, 3):
        np.testing.assert_array_equal(
            families.x_string_reflection(2**n), families.uniform_string("X", n).matrix()
        )
    with pytest.raises(NotPowerOfTwo):
        families.x_string_reflection(3)


@pytest.mark.parametrize("N", [2, 4, 8, 16, 32])
def test_tridiag_commutes_with_reflection(N):
    A = families.tridiag(TridiagSpec(2.0, -1.0, N))
    Xs = families.x_string_reflection(N)
    np.testing.assert_array_equal(numkit.commutator(Xs, A), 0)
    rep = families.postselection_free_check(A, Xs)
    assert rep.is_free and rep.norm_inner == 0.0


def test_tridiag_second_difference_eigenvalues():
    N = 8
    lam = numkit.eigh(families.tridiag(TridiagSpec(2.0, -1.0, N))).values
    k = np.arange(1, N + 1)
    np.testing.assert_allclose(lam, np.sort(2 - 2 * np.cos(k * math.pi / (N + 1))), atol=1e-12)


def test_tridiag_reconstruction_is_exact():
    N = 8
    A = families.tridiag(TridiagSpec(2.0, -1.0, N))
    M = families.x_string_reflection(N)
    b = unit_vector(N, np.random.default_rng(5)).real
    b /= np.linalg.norm(b)
    lam_min = numkit.eigh(A).values[0]
    p = spectral.SpectralProblem(A, b, 0.5 * lam_min)
    br = spectral.hhl_branches(p)
    est = spectral.reconstruct_x1_expectation(
        spectral.expectation(M, b), spectral.expectation(M, br.x0_norm), br.p0, br.p1
    )
    assert est == pytest.approx(spectral.expectation(M, br.x1_norm), abs=1e-10)


# condition checks


def test_condition_examples():
    assert families.postselection_free_check(TOY_A, X).is_free
    rep = families.postselection_free_check(np.diag([1.0, 2.0]), X)
    assert not rep.is_free
    assert rep.norm_inner == 1.0 and rep.norm_double == 1.0
    assert families.postselection_free_check(np.diag([1.0, 2.0]), Z).is_free
    with pytest.raises(DimMismatch):
        families.postselection_free_check(np.eye(2), np.eye(4))


# basis change


def test_check_unitary():
    families.check_unitary(haar_unitary(4, np.random.default_rng(0)))
    with pytest.raises(NotUnitary):
        families.check_unitary(2 * np.eye(2))
    with pytest.raises(NotUnitary):
        families.check_unitary(np.ones((2, 3)))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), dim=st.sampled_from([2, 4, 8]))
def test_basis_change_covariance(seed, dim):
    rng = np.random.default_rng(seed)
    U = haar_unitary(dim, rng)
    A, M = hermitian(dim, rng), hermitian(dim, rng)
    psi = unit_vector(dim, rng)
    chk = families.basis_change_covariance(U, A, M, psi)
    scale = np.abs(M).max() * np.abs(A).max() ** 2
    np.testing.assert_allclose(chk.lhs, chk.rhs, atol=1e-10 * scale)
    assert chk.expectation_gap <= 1e-12 * np.abs(M).max() * dim
    free = families.postselection_free_check(A, M).is_free
    assert families.postselection_free_check(U @ A @ U.conj().T, U @ M @ U.conj().T).is_free == free


def test_basis_change_preserves_freedom():
    U = haar_unitary(2, np.random.default_rng(2))
    bc = families.BasisChange(U, TOY_A, X)
    assert families.postselection_free_check(bc.A_U, bc.M_U).is_free


# text format


def test_parse_pauli_polynomial():
    text = "# toy\n1.0 0.0 X X\n\n-0.5 0 Z Z  # trailing\n"
    poly = families.parse_pauli_polynomial(text)
    assert [t.factors for t in poly.terms] == ["XX", "ZZ"]
    assert poly.terms[1].coefficient == -0.5
    np.testing.assert_allclose(poly.matrix(), np.kron(X, X) - 0.5 * np.kron(Z, Z))
    assert families.parse_pauli_polynomial(families.format_pauli_polynomial(poly)) == poly


@pytest.mark.parametrize(
    "text,match",
    [
        ("1.0 0.0\n", "line 1"),
        ("1.0 0.0 X\nfoo 0 X\n", "line 2"),
        ("1 0 X Q\n", "unknown"),
        ("# nothing\n", "no terms"),
        ("1 0 X\n1 0 X X\n", "same number"),
    ],
)
def test_parse_errors(text, match):
    with pytest.raises(ParseError, match=match):
        families.parse_pauli_polynomial(text)


def test_load_pauli_polynomial(tmp_path):
    path = tmp_path / "m.txt"
    path.write_text("1 0 Y Y\n")
    assert families.load_pauli_polynomial(path).terms == (PauliString("YY", 1 + 0j),)
