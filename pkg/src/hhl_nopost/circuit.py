"""Gate-level statevector simulation of the small HHL circuit.

Register layout, most significant qubit first::

    qubit 0                 ancilla
    qubits 1 .. n_clock     clock register, most significant bit first
    remaining qubits        system register (dim A = 2**n_sys)

Qubit ``q`` of an ``n``-qubit state lives at bit ``n - 1 - q`` of the basis
index, so the amplitude array reshapes to ``(2, 2**n_clock, 2**n_sys)``.

With ``t0`` the evolution time, QPE writes eigenvalue ``lam`` into the clock
as ``lam * t0 / (2*pi)``. The default ``t0 = 2*pi`` therefore stores
eigenvalues 1 and 2 exactly as clock values 1 and 2.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels, numkit
from .errors import CTooLarge, DimMismatch, EncodingOverflow, IndexOutOfRange, UncomputeLeak
from .spectral import HHLBranches, rotation_constant

LEAK_TOL = 1e-6

H_MATRIX = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=np.complex128) / math.sqrt(2.0)


def ry_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def phase_matrix(phi: float) -> np.ndarray:
    return np.array([[1.0, 0.0], [0.0, np.exp(1j * phi)]], dtype=np.complex128)


class RotationMode(enum.Enum):
    LINEAR = "linear"  # one fixed-angle Ry per clock bit
    ARCSIN = "arcsin"  # Ry(2 asin(C / lambda)) multiplexed on the clock value


@dataclass(frozen=True)
class CircuitSpec:
    n_clock: int = 2
    n_sys: int = 1
    r: int = 4
    t0: float = 2.0 * math.pi
    rotation_mode: RotationMode = RotationMode.ARCSIN
    # overrides 2*pi/2**r in ARCSIN mode
    C: float | None = None

    def __post_init__(self):
        if self.n_clock < 1 or self.n_sys < 1:
            raise ValueError("n_clock and n_sys must be positive")
        if self.r < 1:
            raise ValueError("r must be >= 1")
        if not self.t0 > 0:
            raise ValueError("t0 must be positive")
        object.__setattr__(self, "rotation_mode", RotationMode(self.rotation_mode))

    @property
    def n_qubits(self) -> int:
        return 1 + self.n_clock + self.n_sys

    @property
    def rotation_constant(self) -> float:
        return self.C if self.C is not None else rotation_constant(self.r)

    @property
    def clock_qubits(self) -> range:
        return range(1, 1 + self.n_clock)

    @property
    def system_qubits(self) -> range:
        return range(1 + self.n_clock, self.n_qubits)

    def clock_value(self, lam):
        """Clock integer (unrounded) that QPE assigns to eigenvalue ``lam``."""
        return np.asarray(lam) * self.t0 / (2.0 * math.pi)

    def eigenvalue_of(self, v: int) -> float:
        return 2.0 * math.pi * v / self.t0


@dataclass
class FullState:
    """Amplitudes over ancilla (x) clock (x) system; mutated in place by gates."""

    amplitudes: np.ndarray
    n_clock: int
    n_sys: int

    def __post_init__(self):
        self.amplitudes = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (2 ** self.n_qubits,):
            raise DimMismatch(f"{self.n_qubits} qubits need {2 ** self.n_qubits} amplitudes")

    @classmethod
    def product(cls, system, n_clock: int = 0, ancilla=(1.0, 0.0)) -> "FullState":
        system = numkit.as_vector(system)
        n_sys = int(round(math.log2(system.shape[0])))
        if 2**n_sys != system.shape[0]:
            raise DimMismatch(f"system vector length {system.shape[0]} is not a power of two")
        clock = np.zeros(2**n_clock, dtype=np.complex128)
        clock[0] = 1.0
        amps = np.kron(np.asarray(ancilla, dtype=np.complex128), np.kron(clock, system))
        return cls(amps, n_clock, n_sys)

    @property
    def n_qubits(self) -> int:
        return 1 + self.n_clock + self.n_sys

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(2, 2**self.n_clock, 2**self.n_sys)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "FullState":
        return FullState(self.amplitudes.copy(), self.n_clock, self.n_sys)


@dataclass(frozen=True, eq=False)
class Gate:
    """A unitary on the contiguous qubit block ``targets``, optionally controlled.

    ``ctrl_values`` gives the required bit per control qubit (all ones when
    omitted). ``swap`` gates carry no matrix.
    """

    name: str
    targets: tuple
    matrix: np.ndarray | None = None
    controls: tuple = ()
    ctrl_values: tuple = ()
    params: tuple = ()

    def inverse(self) -> "Gate":
        if self.name == "swap":
            return self
        return Gate(
            self.name + "_dg" if not self.name.endswith("_dg") else self.name[:-3],
            self.targets,
            self.matrix.conj().T,
            self.controls,
            self.ctrl_values,
            tuple(-p for p in self.params),
        )

    def to_json(self) -> dict:
        return {
            "gate": self.name,
            "targets": list(self.targets),
            "controls": list(self.controls),
            "params": [float(p) for p in self.params],
        }


def apply_gate(state: FullState, gate: Gate) -> FullState:
    n = state.n_qubits
    for q in gate.targets + gate.controls:
        if not 0 <= q < n:
            raise IndexOutOfRange(f"qubit {q} outside 0..{n - 1}")
    if gate.name == "swap":
        a, b = gate.targets
        if a != b:
            kernels.swap_bits(state.amplitudes, n - 1 - a, n - 1 - b)
        return state
    lo, k = gate.targets[0], len(gate.targets)
    if gate.targets != tuple(range(lo, lo + k)):
        raise IndexOutOfRange(f"targets {gate.targets} are not a contiguous block")
    if set(gate.targets) & set(gate.controls):
        raise IndexOutOfRange("a qubit cannot be both target and control")
    values = gate.ctrl_values or (1,) * len(gate.controls)
    ctrl_mask = ctrl_val = 0
    for q, bit in zip(gate.controls, values):
        ctrl_mask |= 1 << (n - 1 - q)
        ctrl_val |= (bit & 1) << (n - 1 - q)
    mat = np.ascontiguousarray(gate.matrix, dtype=np.complex128)
    kernels.apply_block(state.amplitudes, n - lo - k, k, mat, ctrl_mask, ctrl_val)
    return state


@dataclass
class Circuit:
    """Ordered gate list. Builders append; :meth:`run` applies in order."""

    n_qubits: int
    ops: list = field(default_factory=list)

    def h(self, q):
        self.ops.append(Gate("h", (q,), H_MATRIX))
        return self

    def ry(self, target, theta, controls=(), ctrl_values=()):
        self.ops.append(Gate("ry", (target,), ry_matrix(theta), tuple(controls), tuple(ctrl_values), (theta,)))
        return self

    def cp(self, control, target, phi):
        self.ops.append(Gate("cp", (target,), phase_matrix(phi), (control,), (), (phi,)))
        return self

    def swap(self, a, b):
        self.ops.append(Gate("swap", (a, b)))
        return self

    def unitary(self, name, targets, matrix, controls=(), params=()):
        self.ops.append(Gate(name, tuple(targets), np.asarray(matrix, dtype=np.complex128), tuple(controls), (), tuple(params)))
        return self

    def qft(self, qubits):
        qs = list(qubits)
        n = len(qs)
        for j in range(n):
            self.h(qs[j])
            for k in range(j + 1, n):
                self.cp(qs[k], qs[j], math.pi / 2 ** (k - j))
        for j in range(n // 2):
            self.swap(qs[j], qs[n - 1 - j])
        return self

    def qft_inverse(self, qubits):
        block = Circuit(self.n_qubits).qft(qubits)
        self.ops.extend(block.inverse().ops)
        return self

    def inverse(self) -> "Circuit":
        return Circuit(self.n_qubits, [g.inverse() for g in reversed(self.ops)])

    def run(self, state: FullState) -> FullState:
        if state.n_qubits != self.n_qubits:
            raise DimMismatch(f"circuit has {self.n_qubits} qubits, state has {state.n_qubits}")
        for g in self.ops:
            apply_gate(state, g)
        return state

    def trace(self) -> list:
        return [g.to_json() for g in self.ops]

    def dump_trace(self, path) -> None:
        Path(path).write_text(json.dumps(self.trace(), indent=1))


# state-level gate helpers


def apply_hadamard(state: FullState, q: int) -> FullState:
    return Circuit(state.n_qubits).h(q).run(state)


def controlled_phase(state: FullState, control: int, target: int, phi: float) -> FullState:
    return Circuit(state.n_qubits).cp(control, target, phi).run(state)


def controlled_ry(state: FullState, controls, target: int, theta: float, ctrl_values=()) -> FullState:
    if isinstance(controls, int):
        controls = (controls,)
    return Circuit(state.n_qubits).ry(target, theta, controls, ctrl_values).run(state)


def swap(state: FullState, a: int, b: int) -> FullState:
    return Circuit(state.n_qubits).swap(a, b).run(state)


def qft_inverse(state: FullState, clock_range) -> FullState:
    """Inverse QFT on ``clock_range``; phases e^{2 pi i k v / 2^n} on |k> map to |v>."""
    return Circuit(state.n_qubits).qft_inverse(clock_range).run(state)


# HHL


def build_unitary_exp(A, t: float) -> np.ndarray:
    """exp(i A t) from the eigendecomposition of Hermitian ``A``."""
    eig = numkit.eigh(A)
    return eig.spectral_function(lambda lam: np.exp(1j * lam * t))


def _check_encoding(spec: CircuitSpec, eigenvalues: np.ndarray) -> np.ndarray:
    v = spec.clock_value(eigenvalues)
    rounded = np.rint(v).astype(np.int64)
    top = 2**spec.n_clock - 1
    bad = (rounded < 1) | (rounded > top)
    if np.any(bad):
        raise EncodingOverflow(
            f"eigenvalues {eigenvalues[bad]} map to clock values {v[bad]}, outside 1..{top}"
        )
    return rounded


def phase_estimation(spec: CircuitSpec, A) -> Circuit:
    """H on the clock, controlled powers of exp(i A t0 / 2^n_clock), inverse QFT."""
    circ = Circuit(spec.n_qubits)
    clock = list(spec.clock_qubits)
    for q in clock:
        circ.h(q)
    step = spec.t0 / 2**spec.n_clock
    for i, q in enumerate(clock):
        weight = 2 ** (spec.n_clock - 1 - i)
        circ.unitary("c_exp", spec.system_qubits, build_unitary_exp(A, step * weight), (q,), (step * weight,))
    circ.qft_inverse(clock)
    return circ


def ancilla_rotation(spec: CircuitSpec) -> Circuit:
    circ = Circuit(spec.n_qubits)
    clock = list(spec.clock_qubits)
    if spec.rotation_mode is RotationMode.LINEAR:
        # bit of weight 2^m gets Ry(2 pi / (2^r 2^m))
        for i, q in enumerate(clock):
            m = spec.n_clock - 1 - i
            circ.ry(0, 2.0 * math.pi / (2.0**spec.r * 2.0**m), (q,))
        return circ
    C = spec.rotation_constant
    for v in range(1, 2**spec.n_clock):
        ratio = min(C / spec.eigenvalue_of(v), 1.0)
        bits = tuple((v >> (spec.n_clock - 1 - i)) & 1 for i in range(spec.n_clock))
        circ.ry(0, 2.0 * math.asin(ratio), clock, bits)
    return circ


def build_hhl_circuit(spec: CircuitSpec, A) -> Circuit:
    A = numkit.check_hermitian(A)
    if A.shape[0] != 2**spec.n_sys:
        raise DimMismatch(f"A is {A.shape[0]}-dimensional, system register holds {2**spec.n_sys}")
    lam = numkit.eigh(A).values
    rounded = _check_encoding(spec, lam)
    if spec.rotation_mode is RotationMode.ARCSIN:
        smallest = spec.eigenvalue_of(int(rounded.min()))
        if spec.rotation_constant > smallest * (1.0 + 1e-12):
            raise CTooLarge(f"C = {spec.rotation_constant:.6g} exceeds encoded eigenvalue {smallest:.6g}")
    qpe = phase_estimation(spec, A)
    circ = Circuit(spec.n_qubits)
    circ.ops.extend(qpe.ops)
    circ.ops.extend(ancilla_rotation(spec).ops)
    circ.ops.extend(qpe.inverse().ops)
    return circ


def run_hhl_circuit(spec: CircuitSpec, A, b, circuit: Circuit | None = None) -> FullState:
    """Pre-measurement state of the HHL circuit for input ``b``.

    Pass a prebuilt ``circuit`` (from :func:`build_hhl_circuit`) to reuse it
    across many inputs.
    """
    b = numkit.as_vector(b)
    if b.shape[0] != 2**spec.n_sys:
        raise DimMismatch(f"b has length {b.shape[0]}, system register holds {2**spec.n_sys}")
    if circuit is None:
        circuit = build_hhl_circuit(spec, A)
    state = FullState.product(b, spec.n_clock)
    return circuit.run(state)


def clock_residual(state: FullState) -> float:
    t = state.tensor()
    return float(np.sqrt(np.sum(np.abs(t[:, 1:, :]) ** 2)))


def extract_branches(state: FullState, leak_tol: float = LEAK_TOL) -> HHLBranches:
    """Project onto ancilla 0/1 with the clock in |0...0>."""
    residual = clock_residual(state)
    if residual > leak_tol:
        raise UncomputeLeak(f"clock register residual amplitude {residual:.3e} > {leak_tol:g}")
    t = state.tensor()
    x0 = t[0, 0, :].copy()
    x1 = t[1, 0, :].copy()
    return HHLBranches(x0, x1, float(np.vdot(x0, x0).real), float(np.vdot(x1, x1).real), residual)
