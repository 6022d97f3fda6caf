"""Shot sampling of the HHL output and the statistics built on it.

Random streams come from numpy's Philox (counter-based) generator keyed by
``SeedSequence([seed, stream])``. Trial ``i`` of a plan uses ``seed + i``;
stream 0 samples the HHL output, stream 1 samples the bare input state for
<b|M|b>, so the two budgets are independent.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple

import numpy as np

from .circuit import H_MATRIX, Circuit, FullState
from .errors import EmptyBranch, NotPauliString, ZeroSuccessProbability
from .families import PauliString

_SDG = np.array([[1, 0], [0, -1j]], dtype=np.complex128)
# maps the +1/-1 eigenvectors of each Pauli onto |0>/|1>
_DIAGONALIZER = {"X": H_MATRIX, "Y": H_MATRIX @ _SDG}

STREAM_CIRCUIT = 0
STREAM_INPUT = 1


@dataclass(frozen=True)
class SamplingPlan:
    n_shots: int
    seed: int = 0
    n_trials: int = 1

    def __post_init__(self):
        if self.n_shots < 1 or self.n_trials < 1:
            raise ValueError("n_shots and n_trials must be >= 1")

    def rng(self, stream: int = STREAM_CIRCUIT) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(np.random.SeedSequence([self.seed, stream])))

    def for_trial(self, i: int) -> "SamplingPlan":
        return replace(self, seed=self.seed + i, n_trials=1)


class EstimateWithError(NamedTuple):
    mean: float
    std: float
    n: int


@dataclass(frozen=True, eq=False)
class ShotTally:
    """counts[a, s]: shots with ancilla bit ``a`` and system outcome ``s``.

    System outcomes are in the eigenbasis of ``observable`` (after the
    diagonalizing rotation), clock register marginalized.
    """

    counts: np.ndarray
    observable: PauliString

    @property
    def n_shots(self) -> int:
        return int(self.counts.sum())

    def as_dict(self) -> dict:
        return {(int(a), int(s)): int(c) for (a, s), c in np.ndenumerate(self.counts) if c}


def pauli_eigenvalues(pauli: PauliString) -> np.ndarray:
    """Eigenvalue of ``pauli`` on each computational basis index after rotation."""
    n = pauli.n_qubits
    mask = 0
    for j, f in enumerate(pauli.factors):
        if f != "I":
            mask |= 1 << (n - 1 - j)
    idx = np.arange(2**n)
    parity = np.array([bin(i & mask).count("1") & 1 for i in idx])
    return complex(pauli.coefficient).real * (1.0 - 2.0 * parity)


def _rotate_into_z(state: FullState, pauli: PauliString) -> FullState:
    circ = Circuit(state.n_qubits)
    first = 1 + state.n_clock
    for j, f in enumerate(pauli.factors):
        if f in _DIAGONALIZER:
            circ.unitary(f"to_z_{f}", (first + j,), _DIAGONALIZER[f])
    return circ.run(state.copy())


def sample(state: FullState, M, plan: SamplingPlan, stream: int = STREAM_CIRCUIT) -> ShotTally:
    """Draw ``plan.n_shots`` joint (ancilla, system) outcomes in the eigenbasis of ``M``."""
    if not isinstance(M, PauliString):
        raise NotPauliString("shot sampling needs a PauliString observable; use statevector mode for general M")
    if not M.is_hermitian:
        raise NotPauliString(f"coefficient {M.coefficient} is not real")
    if M.n_qubits != state.n_sys:
        raise NotPauliString(f"observable acts on {M.n_qubits} qubits, system has {state.n_sys}")
    rotated = _rotate_into_z(state, M)
    probs = np.sum(np.abs(rotated.tensor()) ** 2, axis=1).ravel()
    probs /= probs.sum()
    counts = plan.rng(stream).multinomial(plan.n_shots, probs)
    return ShotTally(counts.reshape(2, -1), M)


def _branch_estimate(tally: ShotTally, eig: np.ndarray, a: int) -> EstimateWithError:
    row = tally.counts[a]
    n = int(row.sum())
    if n == 0:
        raise EmptyBranch(a)
    mean = float(row @ eig) / n
    second = float(row @ eig**2) / n
    return EstimateWithError(mean, math.sqrt(max(second - mean**2, 0.0) / n), n)


def estimate_expectations(tally: ShotTally, allow_empty: bool = False):
    """(M0, M1, p1) from one tally.

    M_i is the mean Pauli eigenvalue over shots with ancilla ``i`` and its
    standard error; p1 is the ancilla-1 fraction with binomial standard error.
    An empty branch raises :class:`EmptyBranch` unless ``allow_empty``, in
    which case its estimate is ``None``.
    """
    eig = pauli_eigenvalues(tally.observable)
    total = tally.n_shots
    if total == 0:
        raise ValueError("empty tally")
    out = []
    for a in (0, 1):
        try:
            out.append(_branch_estimate(tally, eig, a))
        except EmptyBranch:
            if not allow_empty:
                raise
            out.append(None)
    p1 = int(tally.counts[1].sum()) / total
    return out[0], out[1], EstimateWithError(p1, math.sqrt(p1 * (1.0 - p1) / total), total)


def estimate_input_expectation(b, M: PauliString, plan: SamplingPlan) -> EstimateWithError:
    """<b|M|b> from ``plan.n_shots`` shots on the bare input state."""
    tally = sample(FullState.product(b), M, plan, stream=STREAM_INPUT)
    m0, _, _ = estimate_expectations(tally, allow_empty=True)
    return m0


def reconstruct_from_samples(Mb: EstimateWithError, M0: EstimateWithError, p1: EstimateWithError) -> EstimateWithError:
    """(Mb - (1 - p1) M0) / p1 with first-order error propagation over independent inputs."""
    p = p1.mean
    if p < 1e-15:
        raise ZeroSuccessProbability(f"p1 estimate {p!r} is too small to divide by")
    mean = (Mb.mean - (1.0 - p) * M0.mean) / p
    d_mb = 1.0 / p
    d_m0 = -(1.0 - p) / p
    d_p1 = -(Mb.mean - M0.mean) / p**2
    var = (d_mb * Mb.std) ** 2 + (d_m0 * M0.std) ** 2 + (d_p1 * p1.std) ** 2
    return EstimateWithError(mean, math.sqrt(var), Mb.n + p1.n)


def trial_statistics(run: Callable[[SamplingPlan], float | None], plan: SamplingPlan, workers: int = 1):
    """Mean and sample std of ``run`` over ``plan.n_trials`` seeded repetitions.

    ``run`` receives the per-trial plan and may return ``None`` for an
    unusable trial; those are dropped. Returns ``None`` if none remain.
    """
    plans = [plan.for_trial(i) for i in range(plan.n_trials)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            values = list(pool.map(run, plans))
    else:
        values = [run(p) for p in plans]
    vals = np.array([v for v in values if v is not None], dtype=float)
    if vals.size == 0:
        return None
    std = float(vals.std(ddof=1)) if vals.size > 1 else 0.0
    return EstimateWithError(float(vals.mean()), std, int(vals.size))


class TrialResult(NamedTuple):
    p1: EstimateWithError
    direct: EstimateWithError | None
    reconstructed: EstimateWithError | None


def sampling_trial(state: FullState, b, M: PauliString, plan: SamplingPlan) -> TrialResult:
    """One experiment: shots on the HHL output plus an equal budget on |b>.

    ``direct`` is the ancilla-1 conditional mean; ``reconstructed`` combines
    <b|M|b>, the ancilla-0 mean and p1. Either is ``None`` when its branch got
    no shots.
    """
    m0, m1, p1 = estimate_expectations(sample(state, M, plan), allow_empty=True)
    recon = None
    if m0 is not None and p1.mean > 0.0:
        recon = reconstruct_from_samples(estimate_input_expectation(b, M, plan), m0, p1)
    return TrialResult(p1, m1, recon)
