"""Matrix/observable pairs for which the failure branch is usable.

Covers Pauli strings and even Pauli polynomials, the tridiagonal
second-difference matrix with the all-X observable, and conjugation of a pair
by a unitary.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import numkit
from .errors import DimMismatch, NotPowerOfTwo, NotUnitary, ParseError

PAULI = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}
# P1 P2 = i P3 for each cyclic triple
_CYCLIC = {("X", "Y"): "Z", ("Y", "Z"): "X", ("Z", "X"): "Y"}


@dataclass(frozen=True)
class PauliString:
    factors: str
    coefficient: complex = 1.0

    def __post_init__(self):
        factors = self.factors.upper()
        if not factors or set(factors) - set(PAULI):
            raise ValueError(f"Pauli string must be a non-empty word over IXYZ, got {self.factors!r}")
        object.__setattr__(self, "factors", factors)

    @property
    def n_qubits(self) -> int:
        return len(self.factors)

    @property
    def weight(self) -> int:
        return sum(f != "I" for f in self.factors)

    @property
    def is_hermitian(self) -> bool:
        return complex(self.coefficient).imag == 0.0

    def matrix(self) -> np.ndarray:
        return self.coefficient * numkit.kron_all(PAULI[f] for f in self.factors)

    def __str__(self):
        return f"{self.coefficient}*{self.factors}"


def uniform_string(p: str, n: int, coefficient: complex = 1.0) -> PauliString:
    """P^{(x) n}."""
    return PauliString(p * n, coefficient)


class Parity(enum.Enum):
    EVEN = "even"
    ODD = "odd"
    MIXED = "mixed"


@dataclass(frozen=True)
class PauliPolynomial:
    terms: tuple  # of PauliString, coefficient = J

    def __post_init__(self):
        terms = tuple(self.terms)
        if not terms:
            raise ValueError("empty Pauli polynomial")
        n = terms[0].n_qubits
        if any(t.n_qubits != n for t in terms):
            raise DimMismatch("all terms must act on the same number of qubits")
        object.__setattr__(self, "terms", terms)

    @property
    def n_qubits(self) -> int:
        return self.terms[0].n_qubits

    @property
    def parity(self) -> Parity:
        odd = [t.weight % 2 for t in self.terms]
        if not any(odd):
            return Parity.EVEN
        if all(odd):
            return Parity.ODD
        return Parity.MIXED

    def matrix(self) -> np.ndarray:
        return sum(t.matrix() for t in self.terms)

    @classmethod
    def even(cls, terms) -> "PauliPolynomial":
        """Build a polynomial whose terms each hold an even number of one Pauli type."""
        terms = tuple(terms)
        for t in terms:
            kinds = set(t.factors) - {"I"}
            if t.weight % 2:
                raise ValueError(f"term {t.factors} has odd weight {t.weight}")
            if len(kinds) > 1:
                raise ValueError(f"term {t.factors} mixes Pauli types {sorted(kinds)}")
        return cls(terms)


def pauli_k_commutator(K: int, p1: str = "X", p2: str = "Y") -> tuple[complex, PauliString]:
    """Closed form of [P1^{(x)K}, P2^{(x)K}] = (i^K - (-i)^K) P3^{(x)K}."""
    if K < 1:
        raise ValueError("K must be >= 1")
    p3 = _CYCLIC[(p1, p2)]
    return 1j**K - (-1j) ** K, uniform_string(p3, K)


def pauli_padded_commutator(K: int, N: int, p1: str = "X", p2: str = "Y") -> tuple[complex, PauliString]:
    """Closed form of [P1^{(x)K} (x) I^{(x)(N-K)}, P2^{(x)N}]."""
    if not 1 <= K <= N:
        raise ValueError(f"need 1 <= K <= N, got K={K}, N={N}")
    scalar, head = pauli_k_commutator(K, p1, p2)
    return scalar, PauliString(head.factors + p2 * (N - K))


def even_pauli_polynomial(N: int, degree_terms, rng_seed: int | None = None) -> PauliPolynomial:
    """Random even polynomial on ``N`` qubits, one term per entry of ``degree_terms``.

    Each entry is an even weight; the term puts one randomly chosen Pauli type
    on that many random positions, with a standard-normal real coefficient.
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    rng = np.random.default_rng(rng_seed)
    terms = []
    for deg in degree_terms:
        deg = int(deg)
        if deg % 2 or not 2 <= deg <= N:
            raise ValueError(f"term degree {deg} must be even and within 2..{N}")
        kind = "XYZ"[rng.integers(3)]
        slots = rng.choice(N, size=deg, replace=False)
        word = ["I"] * N
        for s in slots:
            word[s] = kind
        terms.append(PauliString("".join(word), float(rng.standard_normal())))
    return PauliPolynomial.even(terms)


def shift_positive(A) -> np.ndarray:
    """A + (|lambda_min| + 1) I; the shift commutes with every observable."""
    A = numkit.check_hermitian(A)
    lam_min = numkit.eigh(A).values[0]
    return A + (abs(lam_min) + 1.0) * np.eye(A.shape[0])


# tridiagonal family


@dataclass(frozen=True)
class TridiagSpec:
    a: float
    b: float
    N: int


def _log2_exact(N: int) -> int:
    n = int(round(math.log2(N))) if N >= 1 else -1
    if N < 1 or 2**n != N:
        raise NotPowerOfTwo(f"N = {N} is not a power of two")
    return n


def tridiag(spec: TridiagSpec) -> np.ndarray:
    """a on the diagonal, b on both neighbouring diagonals."""
    _log2_exact(spec.N)
    off = np.full(spec.N - 1, spec.b, dtype=np.complex128)
    return spec.a * np.eye(spec.N, dtype=np.complex128) + np.diag(off, 1) + np.diag(off, -1)


def x_string_reflection(N: int) -> np.ndarray:
    """sum_k |k><N-1-k|, i.e. X^{(x) log2 N}."""
    _log2_exact(N)
    return np.eye(N, dtype=np.complex128)[::-1].copy()


# condition checks


class ConditionReport(NamedTuple):
    is_free: bool
    norm_inner: float
    norm_double: float


def postselection_free_check(A, M, tol: float = 1e-10) -> ConditionReport:
    """Test [[M, A], A] = 0 relative to max|M| * max|A|^2 (max-entry norms)."""
    A, M = numkit.as_matrix(A), numkit.as_matrix(M)
    if A.shape != M.shape:
        raise DimMismatch(f"A is {A.shape}, M is {M.shape}")
    inner = numkit.commutator(M, A)
    double = numkit.commutator(inner, A)
    norm_inner = numkit.max_norm(inner)
    norm_double = numkit.max_norm(double)
    scale = numkit.max_norm(M) * numkit.max_norm(A) ** 2
    return ConditionReport(norm_double <= tol * scale or norm_double == 0.0, norm_inner, norm_double)


def check_unitary(U, tol: float = 1e-10) -> np.ndarray:
    U = numkit.as_matrix(U)
    if U.shape[0] != U.shape[1]:
        raise NotUnitary(f"U is not square: {U.shape}")
    err = numkit.max_norm(U @ U.conj().T - np.eye(U.shape[0]))
    if err > tol:
        raise NotUnitary(f"U U^dagger deviates from I by {err:.3e}")
    return U


@dataclass(frozen=True, eq=False)
class BasisChange:
    U: np.ndarray
    A: np.ndarray
    M: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "U", check_unitary(self.U))

    @property
    def A_U(self) -> np.ndarray:
        return self.U @ self.A @ self.U.conj().T

    @property
    def M_U(self) -> np.ndarray:
        return self.U @ self.M @ self.U.conj().T


class CovarianceCheck(NamedTuple):
    lhs: np.ndarray
    rhs: np.ndarray
    expectation_gap: float


def basis_change_covariance(U, A, M, psi=None) -> CovarianceCheck:
    """[[M_U, A_U], A_U] and U [[M, A], A] U^dagger, plus |<psi_U|M_U|psi_U> - <psi|M|psi>|.

    ``psi`` defaults to the first basis vector.
    """
    bc = BasisChange(U, numkit.as_matrix(A), numkit.as_matrix(M))
    if bc.A.shape != bc.U.shape or bc.M.shape != bc.U.shape:
        raise DimMismatch("U, A and M must share a dimension")
    cm = numkit.commutator
    A_U, M_U = bc.A_U, bc.M_U
    lhs = cm(cm(M_U, A_U), A_U)
    rhs = bc.U @ cm(cm(bc.M, bc.A), bc.A) @ bc.U.conj().T
    if psi is None:
        psi = np.zeros(bc.U.shape[0], dtype=np.complex128)
        psi[0] = 1.0
    psi = numkit.as_vector(psi)
    psi_U = bc.U @ psi
    gap = abs(numkit.inner(psi_U, M_U @ psi_U) - numkit.inner(psi, bc.M @ psi))
    return CovarianceCheck(lhs, rhs, gap)


# text format: one term per line, "J_re J_im P P ... P"


def parse_pauli_polynomial(text: str) -> PauliPolynomial:
    terms = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) < 3:
            raise ParseError(f"line {lineno}: expected 'J_re J_im P ...', got {raw!r}")
        try:
            coeff = complex(float(fields[0]), float(fields[1]))
        except ValueError:
            raise ParseError(f"line {lineno}: coefficient is not numeric: {fields[0]} {fields[1]}") from None
        word = "".join(fields[2:]).upper()
        if set(word) - set(PAULI):
            raise ParseError(f"line {lineno}: unknown Pauli symbol in {''.join(fields[2:])!r}")
        terms.append(PauliString(word, coeff))
    if not terms:
        raise ParseError("no terms found")
    try:
        return PauliPolynomial(terms)
    except DimMismatch as exc:
        raise ParseError(str(exc)) from None


def format_pauli_polynomial(poly: PauliPolynomial) -> str:
    lines = []
    for t in poly.terms:
        c = complex(t.coefficient)
        lines.append(f"{c.real!r} {c.imag!r} " + " ".join(t.factors))
    return "\n".join(lines) + "\n"


def load_pauli_polynomial(path) -> PauliPolynomial:
    return parse_pauli_polynomial(Path(path).read_text())
