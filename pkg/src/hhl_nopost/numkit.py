"""Dense complex linear algebra used by every other module.

Vectors and matrices are plain ``numpy`` complex128 arrays. The one piece of
real machinery here is :func:`eigh`, a cyclic complex Jacobi solver; the rest
are thin, dimension-checked wrappers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Callable, NamedTuple

import numpy as np

from . import kernels
from .errors import DimMismatch, NoConvergence, NotHermitian, ParseError, SizeOverflow

MAX_DIM = 2**12
HERMITIAN_TOL = 1e-12
PHASE_TOL = 1e-12


def as_matrix(x) -> np.ndarray:
    m = np.asarray(x, dtype=np.complex128)
    if m.ndim != 2:
        raise DimMismatch(f"expected a 2-d matrix, got shape {m.shape}")
    return m


def as_vector(x) -> np.ndarray:
    v = np.asarray(x, dtype=np.complex128)
    if v.ndim != 1:
        raise DimMismatch(f"expected a 1-d vector, got shape {v.shape}")
    return v


def _square(m: np.ndarray) -> int:
    if m.shape[0] != m.shape[1]:
        raise DimMismatch(f"matrix is not square: {m.shape}")
    return m.shape[0]


def max_norm(m) -> float:
    """Largest absolute entry."""
    m = np.asarray(m)
    return float(np.max(np.abs(m))) if m.size else 0.0


def hermitian_defect(m) -> float:
    m = as_matrix(m)
    _square(m)
    return max_norm(m - m.conj().T)


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    m = as_matrix(m)
    return hermitian_defect(m) <= tol * max(1.0, max_norm(m))


def check_hermitian(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    m = as_matrix(m)
    if not is_hermitian(m, tol):
        raise NotHermitian(f"matrix deviates from its adjoint by {hermitian_defect(m):.3e}")
    return m


# ------------------------------------------------------------- basic algebra


def dagger(m) -> np.ndarray:
    return as_matrix(m).conj().T


def matmul(x, y) -> np.ndarray:
    x, y = as_matrix(x), as_matrix(y)
    if x.shape[1] != y.shape[0]:
        raise DimMismatch(f"cannot multiply {x.shape} by {y.shape}")
    return x @ y


def matvec(m, v) -> np.ndarray:
    m, v = as_matrix(m), as_vector(v)
    if m.shape[1] != v.shape[0]:
        raise DimMismatch(f"cannot apply {m.shape} matrix to length-{v.shape[0]} vector")
    return m @ v


def inner(x, y) -> complex:
    """<x|y> with the first argument conjugated."""
    x, y = as_vector(x), as_vector(y)
    if x.shape != y.shape:
        raise DimMismatch(f"vector lengths differ: {x.shape[0]} vs {y.shape[0]}")
    return complex(np.vdot(x, y))


def norm(v) -> float:
    return float(np.linalg.norm(as_vector(v)))


def commutator(x, y) -> np.ndarray:
    """XY - YX."""
    x, y = as_matrix(x), as_matrix(y)
    if _square(x) != _square(y):
        raise DimMismatch(f"commutator of {x.shape} and {y.shape}")
    return x @ y - y @ x


def anticommutator(x, y) -> np.ndarray:
    x, y = as_matrix(x), as_matrix(y)
    if _square(x) != _square(y):
        raise DimMismatch(f"anticommutator of {x.shape} and {y.shape}")
    return x @ y + y @ x


def kron(x, y) -> np.ndarray:
    x, y = as_matrix(x), as_matrix(y)
    rows, cols = x.shape[0] * y.shape[0], x.shape[1] * y.shape[1]
    if max(rows, cols) > MAX_DIM:
        raise SizeOverflow(f"Kronecker product would be {rows}x{cols}, limit is {MAX_DIM}")
    return np.kron(x, y)


def kron_all(factors) -> np.ndarray:
    out = np.ones((1, 1), dtype=np.complex128)
    for f in factors:
        out = kron(out, f)
    return out


# ----------------------------------------------------------- eigensolver


class EigenDecomposition(NamedTuple):
    """Ascending eigenvalues and matching orthonormal eigenvectors (columns)."""

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.conj().T

    def spectral_function(self, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """sum_j f(lambda_j) |u_j><u_j|."""
        return (self.vectors * f(self.values)) @ self.vectors.conj().T


def _fix_phases(vectors: np.ndarray) -> None:
    for j in range(vectors.shape[1]):
        col = vectors[:, j]
        nz = np.flatnonzero(np.abs(col) > PHASE_TOL)
        if nz.size:
            lead = col[nz[0]]
            vectors[:, j] = col * (np.conj(lead) / abs(lead))
            vectors[nz[0], j] = abs(lead)


def eigh(a, max_sweeps: int = 100) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi.

    Eigenvalues come back ascending. Each eigenvector has its first entry of
    modulus above 1e-12 rotated to be real and positive. Within a degenerate
    eigenspace the basis is whatever the sweeps converge to.

    Raises:
        NotHermitian: ``a`` differs from its adjoint by more than 1e-12 (relative).
        SizeOverflow: dimension above 4096.
        NoConvergence: off-diagonal mass still above tolerance after ``max_sweeps``.
    """
    a = check_hermitian(a)
    n = _square(a)
    if n > MAX_DIM:
        raise SizeOverflow(f"dimension {n} exceeds {MAX_DIM}")
    work = np.ascontiguousarray(0.5 * (a + a.conj().T))
    vecs = np.eye(n, dtype=np.complex128)
    scale = float(np.linalg.norm(work))
    if scale == 0.0:
        return EigenDecomposition(np.zeros(n), vecs)
    sweeps = kernels.jacobi_hermitian(work, vecs, 1e-15 * scale, max_sweeps)
    if sweeps < 0:
        raise NoConvergence(f"Jacobi did not converge within {max_sweeps} sweeps")
    values = work.diagonal().real.copy()
    order = np.argsort(values, kind="stable")
    values = values[order]
    vecs = np.ascontiguousarray(vecs[:, order])
    _fix_phases(vecs)
    return EigenDecomposition(values, vecs)


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """A Hermitian matrix with its eigendecomposition computed once, on demand."""

    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", check_hermitian(self.matrix))
        _square(self.matrix)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def eig(self) -> EigenDecomposition:
        return eigh(self.matrix)

    def func(self, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        return self.eig.spectral_function(f)

    def expectation(self, v) -> complex:
        v = as_vector(v)
        return inner(v, matvec(self.matrix, v))


# -------------------------------------------------------------- file format


def matrix_to_json(m) -> dict:
    m = np.atleast_2d(np.asarray(m, dtype=np.complex128))
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "data": [[float(z.real), float(z.imag)] for z in m.ravel()],
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    try:
        rows, cols, data = int(obj["rows"]), int(obj["cols"]), obj["data"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"matrix object needs integer rows, cols and a data list: {exc}") from None
    if rows < 1 or cols < 1:
        raise ParseError(f"non-positive shape {rows}x{cols}")
    if len(data) != rows * cols:
        raise ParseError(f"data has {len(data)} entries, expected {rows * cols}")
    out = np.empty(rows * cols, dtype=np.complex128)
    for i, entry in enumerate(data):
        try:
            re, im = entry
            out[i] = complex(float(re), float(im))
        except (TypeError, ValueError):
            raise ParseError(f"entry {i} is not a [re, im] pair: {entry!r}") from None
    return out.reshape(rows, cols)


def load_matrix(path) -> np.ndarray:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    return matrix_from_json(obj)


def load_vector(path) -> np.ndarray:
    m = load_matrix(path)
    if 1 not in m.shape:
        raise ParseError(f"{path}: a vector needs rows == 1 or cols == 1, got {m.shape}")
    return m.ravel()


def save_matrix(path, m) -> None:
    Path(path).write_text(json.dumps(matrix_to_json(m)))
