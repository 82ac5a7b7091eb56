"""Reference state-vector simulator.

Single qubits, registers of ``n`` qubits holding ``2**n`` complex amplitudes,
single-qubit rotations and projective measurement. This is the quantum
oracle every hidden-variable experiment is compared against.

Amplitude order is little-endian: qubit 0 is the least significant bit of
the amplitude index. Channel ``i`` of the photon scheme (1-based) is qubit
``i - 1``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, ContractError, DegenerateStateError
from .rng import SeedLike, as_generator

MAX_QUBITS = 24
QUBIT_NORM_TOL = 1e-12
REGISTER_NORM_TOL = 1e-10
UNITARY_TOL = 1e-12


def _amplitude(z) -> complex:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ContractError(f"amplitude must be finite, got {z!r}")
    return z


@dataclass(frozen=True)
class QubitState:
    """``a0|0> + a1|1>`` with unit norm."""

    a0: complex
    a1: complex

    def __post_init__(self):
        a0, a1 = _amplitude(self.a0), _amplitude(self.a1)
        object.__setattr__(self, "a0", a0)
        object.__setattr__(self, "a1", a1)
        norm = abs(a0) ** 2 + abs(a1) ** 2
        if abs(norm - 1.0) > QUBIT_NORM_TOL:
            raise ContractError(f"qubit state not normalized: |a0|^2+|a1|^2 = {norm!r}")

    @property
    def p0(self) -> float:
        return abs(self.a0) ** 2

    @property
    def p1(self) -> float:
        return abs(self.a1) ** 2

    def as_array(self) -> np.ndarray:
        return np.array([self.a0, self.a1], dtype=complex)

    def equals_up_to_phase(self, other: QubitState, tol: float = 1e-12) -> bool:
        overlap = self.a0.conjugate() * other.a0 + self.a1.conjugate() * other.a1
        return abs(abs(overlap) - 1.0) <= tol


ZERO = QubitState(1.0, 0.0)
ONE = QubitState(0.0, 1.0)


def make_qubit(a0, a1) -> QubitState:
    """Normalize ``(a0, a1)`` into a qubit state.

    >>> s = make_qubit(3, 4j)
    >>> round(s.p0, 12), round(s.p1, 12)
    (0.36, 0.64)
    """
    a0, a1 = _amplitude(a0), _amplitude(a1)
    norm = math.sqrt(abs(a0) ** 2 + abs(a1) ** 2)
    if norm == 0.0:
        raise DegenerateStateError("both amplitudes are zero")
    return QubitState(a0 / norm, a1 / norm)


@dataclass(frozen=True)
class SingleQubitUnitary:
    m00: complex
    m01: complex
    m10: complex
    m11: complex

    @classmethod
    def from_matrix(cls, m) -> SingleQubitUnitary:
        m = np.asarray(m, dtype=complex)
        if m.shape != (2, 2):
            raise ContractError(f"expected a 2x2 matrix, got shape {m.shape}")
        return cls(*(_amplitude(x) for x in m.ravel()))

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.m00, self.m01], [self.m10, self.m11]], dtype=complex)

    def unitarity_error(self) -> float:
        m = self.matrix
        return float(np.max(np.abs(m.conj().T @ m - np.eye(2))))

    def is_unitary(self, tol: float = UNITARY_TOL) -> bool:
        return self.unitarity_error() <= tol

    def dagger(self) -> SingleQubitUnitary:
        return SingleQubitUnitary(
            self.m00.conjugate(), self.m10.conjugate(), self.m01.conjugate(), self.m11.conjugate()
        )


IDENTITY = SingleQubitUnitary(1.0, 0.0, 0.0, 1.0)


def rotation_unitary(theta: float, phi: float = 0.0) -> SingleQubitUnitary:
    """``[[cos t, -e^{-i phi} sin t], [e^{i phi} sin t, cos t]]``.

    ``rotation_unitary(theta, 0)`` takes ``|0>`` to ``cos(theta)|0> + sin(theta)|1>``.
    """
    c, s = math.cos(theta), math.sin(theta)
    e = cmath.exp(1j * phi)
    return SingleQubitUnitary(c, -e.conjugate() * s, e * s, c)


def _check_unitary(u: SingleQubitUnitary) -> None:
    err = u.unitarity_error()
    if err > UNITARY_TOL:
        raise ContractError(f"matrix is not unitary (max |U^H U - I| = {err:.3e})")


def apply_unitary(state: QubitState, u: SingleQubitUnitary) -> QubitState:
    _check_unitary(u)
    a0 = u.m00 * state.a0 + u.m01 * state.a1
    a1 = u.m10 * state.a0 + u.m11 * state.a1
    return QubitState(a0, a1)


@dataclass(frozen=True, eq=False)
class RegisterState:
    """``n_qubits`` qubits stored as a read-only complex vector of length ``2**n_qubits``."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        n = self.n_qubits
        if not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_QUBITS:
            raise CapacityError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n!r}")
        amps = np.array(self.amplitudes, dtype=np.complex128)
        if amps.shape != (1 << n,):
            raise ContractError(f"expected {1 << n} amplitudes, got shape {amps.shape}")
        if not np.all(np.isfinite(amps)):
            raise ContractError("register amplitudes must be finite")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > REGISTER_NORM_TOL:
            raise ContractError(f"register not normalized: sum |a|^2 = {norm!r}")
        amps.setflags(write=False)
        object.__setattr__(self, "n_qubits", int(n))
        object.__setattr__(self, "amplitudes", amps)

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.amplitudes, self.amplitudes).real))

    def marginal_p1(self, index: int) -> float:
        """Probability that qubit ``index`` reads 1."""
        _check_index(self, index)
        p = self.probabilities.reshape(-1, 2, 1 << index)
        return float(p[:, 1, :].sum())


def _check_index(reg: RegisterState, index: int) -> None:
    if not 0 <= index < reg.n_qubits:
        raise ContractError(f"qubit index {index} out of range for {reg.n_qubits} qubits")


def make_register(n_qubits: int) -> RegisterState:
    """All qubits initialized to ``|0>``."""
    if not isinstance(n_qubits, (int, np.integer)) or not 1 <= n_qubits <= MAX_QUBITS:
        raise CapacityError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits!r}")
    amps = np.zeros(1 << int(n_qubits), dtype=np.complex128)
    amps[0] = 1.0
    return RegisterState(int(n_qubits), amps)


def apply_unitary_at(reg: RegisterState, index: int, u: SingleQubitUnitary) -> RegisterState:
    _check_index(reg, index)
    _check_unitary(u)
    # amplitude index = high * 2**(index+1) + bit * 2**index + low
    psi = reg.amplitudes.reshape(-1, 2, 1 << index)
    out = np.empty_like(psi)
    out[:, 0, :] = u.m00 * psi[:, 0, :] + u.m01 * psi[:, 1, :]
    out[:, 1, :] = u.m10 * psi[:, 0, :] + u.m11 * psi[:, 1, :]
    return RegisterState(reg.n_qubits, out.reshape(-1))


def sample_indices(reg: RegisterState, shots: int, seed: SeedLike) -> np.ndarray:
    """Draw ``shots`` basis-state indices with probability ``|amplitude|^2``."""
    if shots < 0:
        raise ContractError("shots must be non-negative")
    rng = as_generator(seed)
    cdf = np.cumsum(reg.probabilities)
    u = rng.random(shots) * cdf[-1]
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, cdf.size - 1)


def index_to_bits(index: int, n_qubits: int) -> str:
    """Bitstring whose character ``i`` is the value of qubit ``i``."""
    return "".join("1" if (index >> i) & 1 else "0" for i in range(n_qubits))


def measure_all(reg: RegisterState, seed: SeedLike) -> str:
    """One projective measurement of every qubit, as a bitstring (qubit 0 first)."""
    (k,) = sample_indices(reg, 1, seed)
    return index_to_bits(int(k), reg.n_qubits)


def sample_counts(reg: RegisterState, shots: int, seed: SeedLike) -> np.ndarray:
    """Histogram over all ``2**n`` outcomes for ``shots`` measurements."""
    idx = sample_indices(reg, shots, seed)
    return np.bincount(idx, minlength=1 << reg.n_qubits)


# --- singlet oracle -------------------------------------------------------

def singlet_register() -> RegisterState:
    """``(|01> - |10>)/sqrt(2)`` on two qubits."""
    amps = np.zeros(4, dtype=np.complex128)
    amps[0b10] = 1 / math.sqrt(2)  # qubit1=1, qubit0=0
    amps[0b01] = -1 / math.sqrt(2)
    return RegisterState(2, amps)


def spin_analyzer(angle: float) -> SingleQubitUnitary:
    """Rotation that maps a spin measurement along ``angle`` (x-z plane) onto Z.

    ``rotation_unitary(t, 0)`` is a Bloch-sphere rotation by ``2t``, hence the half angle.
    """
    return rotation_unitary(-angle / 2.0, 0.0)


def singlet_analyzed(a: float, b: float) -> RegisterState:
    reg = singlet_register()
    reg = apply_unitary_at(reg, 0, spin_analyzer(a))
    return apply_unitary_at(reg, 1, spin_analyzer(b))


# spin value s = 1 - 2*bit; product s_a * s_b for indices 0b00, 0b01, 0b10, 0b11
_SPIN_PRODUCT = np.array([1.0, -1.0, -1.0, 1.0])


def singlet_correlation_exact(a: float, b: float) -> float:
    """Sum over the four joint outcomes of the analyzed singlet."""
    return float(_SPIN_PRODUCT @ singlet_analyzed(a, b).probabilities)


def singlet_correlation_mc(a: float, b: float, shots: int, seed: SeedLike) -> tuple[float, float]:
    """Monte Carlo spin correlation of the singlet: ``(estimate, standard error)``."""
    counts = sample_counts(singlet_analyzed(a, b), shots, seed)
    same = int(counts[0] + counts[3])
    return correlation_from_agreements(same, shots)


def correlation_from_agreements(same: int, n: int) -> tuple[float, float]:
    """Estimate ``E = P(same) - P(differ)`` with its binomial standard error.

    The error uses the add-one (Laplace) proportion so it stays positive when
    every trial agrees.
    """
    if n < 1:
        raise ContractError("need at least one trial")
    e = (2 * same - n) / n
    p = (same + 1) / (n + 2)
    return e, 2.0 * math.sqrt(p * (1.0 - p) / n)


def pair_correlation_qm(a: float, b: float) -> float:
    """Singlet spin correlation ``-cos(a - b)``."""
    return -math.cos(a - b)
