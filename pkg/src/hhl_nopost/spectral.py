"""Exact eigenbasis model of the HHL output state.

For a positive-definite Hermitian ``A`` with eigenpairs (lambda_j, u_j), an
input ``b = sum_j beta_j u_j`` and rotation constant ``C``, the algorithm
leaves the system register in

    x0 = sum_j beta_j sqrt(1 - C^2/lambda_j^2) u_j     (ancilla reads 0)
    x1 = sum_j beta_j (C/lambda_j) u_j                 (ancilla reads 1)

Everything here is built from spectral functions of ``A``, so results are
independent of the eigenvector basis chosen inside a degenerate eigenspace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from . import numkit
from .errors import (
    CTooLarge,
    DimMismatch,
    NotHermitian,
    NotPositiveDefinite,
    SingularMatrix,
    ZeroSuccessProbability,
)

NORM_TOL = 1e-12
IMAG_TOL = 1e-10
MIN_SUCCESS_PROB = 1e-15


def rotation_constant(r: int) -> float:
    """C = 2*pi / 2**r."""
    if r < 1:
        raise ValueError(f"r must be a positive integer, got {r}")
    return 2.0 * math.pi / 2.0**r


@dataclass(frozen=True, eq=False)
class SpectralProblem:
    """One HHL instance: Hermitian ``A`` > 0, unit vector ``b``, constant ``C``."""

    A: np.ndarray
    b: np.ndarray
    C: float

    def __post_init__(self):
        A = numkit.check_hermitian(self.A)
        b = numkit.as_vector(self.b)
        if A.shape[0] != A.shape[1] or A.shape[0] != b.shape[0]:
            raise DimMismatch(f"A is {A.shape}, b has length {b.shape[0]}")
        if abs(numkit.norm(b) - 1.0) > NORM_TOL:
            raise ValueError(f"b must be normalized, |b| = {numkit.norm(b)!r}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "C", float(self.C))
        lam_min = float(self.eigenvalues[0])
        if lam_min <= 0.0:
            raise NotPositiveDefinite(f"smallest eigenvalue is {lam_min:.6g}; A must be positive definite")
        if not self.C > 0.0:
            raise ValueError(f"C must be positive, got {self.C}")
        if self.C > lam_min * (1.0 + 1e-12):
            raise CTooLarge(f"C = {self.C:.6g} exceeds the smallest eigenvalue {lam_min:.6g}")

    @classmethod
    def from_r(cls, A, b, r: int) -> "SpectralProblem":
        return cls(A, b, rotation_constant(r))

    @property
    def dim(self) -> int:
        return self.b.shape[0]

    @cached_property
    def operator(self) -> numkit.HermitianOperator:
        return numkit.HermitianOperator(self.A)

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.operator.eig.values

    @property
    def beta(self) -> np.ndarray:
        """Coordinates <u_j|b> in the eigenbasis."""
        return self.operator.eig.vectors.conj().T @ self.b

    # spectral amplitudes, clipped so C == lambda_min gives exactly 0
    def failure_amplitudes(self) -> np.ndarray:
        return np.sqrt(np.clip(1.0 - (self.C / self.eigenvalues) ** 2, 0.0, None))

    def success_amplitudes(self) -> np.ndarray:
        return np.minimum(self.C / self.eigenvalues, 1.0)


def classical_solution(A, b) -> np.ndarray:
    """A^{-1} b through the eigendecomposition."""
    eig = numkit.eigh(A)
    b = numkit.as_vector(b)
    if b.shape[0] != eig.values.shape[0]:
        raise DimMismatch(f"A is {eig.values.shape[0]}-dimensional, b has length {b.shape[0]}")
    scale = float(np.max(np.abs(eig.values))) if eig.values.size else 0.0
    if scale == 0.0 or np.min(np.abs(eig.values)) < 1e-12 * scale:
        raise SingularMatrix("A has an eigenvalue numerically equal to zero")
    beta = eig.vectors.conj().T @ b
    return eig.vectors @ (beta / eig.values)


@dataclass(frozen=True)
class HHLBranches:
    """Unnormalized system states for each ancilla outcome and their probabilities."""

    x0_unnorm: np.ndarray
    x1_unnorm: np.ndarray
    p0: float
    p1: float
    # population left outside the clock |0...0> subspace; circuit runs only
    clock_residual: float = 0.0

    @staticmethod
    def _normalized(x, p):
        return x / math.sqrt(p) if p > 0.0 else None

    @property
    def x0_norm(self) -> np.ndarray | None:
        return self._normalized(self.x0_unnorm, self.p0)

    @property
    def x1_norm(self) -> np.ndarray | None:
        return self._normalized(self.x1_unnorm, self.p1)

    def joint_state(self) -> np.ndarray:
        """x0 (x) |0>_a + x1 (x) |1>_a with the ancilla as the least significant index."""
        return np.stack([self.x0_unnorm, self.x1_unnorm], axis=1).ravel()


def hhl_branches(p: SpectralProblem) -> HHLBranches:
    vecs = p.operator.eig.vectors
    beta = p.beta
    x0 = vecs @ (beta * p.failure_amplitudes())
    x1 = vecs @ (beta * p.success_amplitudes())
    return HHLBranches(x0, x1, float(np.vdot(x0, x0).real), float(np.vdot(x1, x1).real))


@dataclass(frozen=True, eq=False)
class DerivedOperators:
    """Operators appearing in the failure-branch analysis, for observable ``M``.

    ``AC`` is A/C up to spectral rescaling, ``D`` = sqrt(AC^2 - 1),
    ``Delta`` = I - D, ``R`` = [M, Delta], ``K`` = [[M, AC], AC] / 2 and
    ``deltaM`` = Delta M Delta - {M, Delta}. ``RD_comm`` = [R, D] is the term
    that separates the symmetric form of ``deltaM`` from the K form.
    """

    M: np.ndarray
    AC_inv: np.ndarray
    AC: np.ndarray
    A_tilde_inv: np.ndarray
    D: np.ndarray
    Delta: np.ndarray
    R: np.ndarray
    deltaM: np.ndarray
    K: np.ndarray
    RD_comm: np.ndarray

    def deltaM_first_form(self) -> np.ndarray:
        """M AC^2 - 2M + R D."""
        return self.M @ self.AC @ self.AC - 2.0 * self.M + self.R @ self.D

    def deltaM_second_form(self) -> np.ndarray:
        """AC^2 M - 2M - D R."""
        return self.AC @ self.AC @ self.M - 2.0 * self.M - self.D @ self.R

    def deltaM_final_form(self) -> np.ndarray:
        """AC M AC - 2M + K; equals deltaM only up to RD_comm / 2."""
        return self.AC @ self.M @ self.AC - 2.0 * self.M + self.K


def derived_operators(p: SpectralProblem, M) -> DerivedOperators:
    M = numkit.check_hermitian(M)
    if M.shape != p.A.shape:
        raise DimMismatch(f"M is {M.shape}, A is {p.A.shape}")
    eig = p.operator.eig
    C = p.C
    AC_inv = eig.spectral_function(lambda lam: np.minimum(C / lam, 1.0))
    AC = eig.spectral_function(lambda lam: lam / C)
    D = eig.spectral_function(lambda lam: np.sqrt(np.clip((lam / C) ** 2 - 1.0, 0.0, None)))
    A_tilde_inv = eig.spectral_function(lambda lam: np.sqrt(np.clip(1.0 - (C / lam) ** 2, 0.0, None)))
    eye = np.eye(p.dim, dtype=np.complex128)
    Delta = eye - D
    R = numkit.commutator(M, Delta)
    deltaM = Delta @ M @ Delta - numkit.anticommutator(M, Delta)
    K = 0.5 * numkit.commutator(numkit.commutator(M, AC), AC)
    return DerivedOperators(
        M=M,
        AC_inv=AC_inv,
        AC=AC,
        A_tilde_inv=A_tilde_inv,
        D=D,
        Delta=Delta,
        R=R,
        deltaM=deltaM,
        K=K,
        RD_comm=numkit.commutator(R, D),
    )


def expectation(M, x) -> float:
    """<x|M|x> for Hermitian ``M``; ``x`` need not be normalized."""
    val = numkit.inner(x, numkit.matvec(M, x))
    if abs(val.imag) > IMAG_TOL * max(1.0, abs(val.real)):
        raise NotHermitian(f"<x|M|x> has imaginary part {val.imag:.3e}")
    return val.real


class RelationCheck(NamedTuple):
    lhs: float
    rhs: float
    k_term: float


def check_relation_unnormalized(p: SpectralProblem, M) -> RelationCheck:
    """Both sides of <x0|M|x0> = <b|M|b> - <x1|M|x1> + <x1|K|x1> on unnormalized branches.

    The two sides agree whenever [M, A] = 0. For general ``M`` they differ by
    :func:`relation_gap`.
    """
    ops = derived_operators(p, M)
    br = hhl_branches(p)
    k_term = expectation(ops.K, br.x1_unnorm)
    lhs = expectation(ops.M, br.x0_unnorm)
    rhs = expectation(ops.M, p.b) - expectation(ops.M, br.x1_unnorm) + k_term
    return RelationCheck(lhs, rhs, k_term)


def relation_gap(p: SpectralProblem, M) -> float:
    """<x1|[R, D]|x1> / 2, the exact value of lhs - rhs in :func:`check_relation_unnormalized`."""
    ops = derived_operators(p, M)
    x1 = hhl_branches(p).x1_unnorm
    val = numkit.inner(x1, ops.RD_comm @ x1)
    # [R, D] is Hermitian, so the expectation is real
    return 0.5 * val.real


def reconstruct_x1_expectation(Mb: float, M0: float, p0: float, p1: float) -> float:
    """(Mb - p0*M0) / p1: the success-branch value recovered from the failure branch."""
    if p1 < MIN_SUCCESS_PROB:
        raise ZeroSuccessProbability(f"p1 = {p1!r} is too small to divide by")
    return (Mb - p0 * M0) / p1
