"""Dense statevector simulation of the qubit register.

Basis-state index convention: qubit 0 is the least-significant bit, so a
computational basis state |b_{n-1} ... b_1 b_0> has index sum_k b_k 2^k.
Two-qubit gate matrices are written in the (q1, q2) ordering where the
FIRST listed qubit supplies the most-significant bit of the 2-bit local
index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .pauli import PauliString, PauliSum

_SQ2 = 1.0 / math.sqrt(2.0)

_H = np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_SDG = np.array([[1, 0], [0, -1j]], dtype=complex)

PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": _X,
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class Gate:
    """A unitary gate: kind, target qubits, and real parameters.

    Supported kinds: X, H, Sdg, RZ(theta), CNOT(control, target),
    GIVENS(theta), CPHASE(phi), PAULI_ROT(label, theta).  Rotation angles
    use the half-angle convention: RZ(t) = diag(e^{-it/2}, e^{it/2}) and
    PAULI_ROT(P, t) = exp(-i t/2 P).
    """

    kind: str
    qubits: Tuple[int, ...]
    params: Tuple[float, ...] = ()
    label: str = ""  # Pauli letters for PAULI_ROT

    def matrix(self) -> np.ndarray:
        """Dense unitary on the gate's local qubits."""
        k = self.kind
        if k == "X":
            return _X
        if k == "H":
            return _H
        if k == "Sdg":
            return _SDG
        if k == "RZ":
            t = self.params[0]
            return np.array(
                [[np.exp(-0.5j * t), 0], [0, np.exp(0.5j * t)]], dtype=complex
            )
        if k == "CNOT":
            # (control, target): basis |c t>
            return np.array(
                [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
                dtype=complex,
            )
        if k == "GIVENS":
            # |01> -> cos|01> + sin|10>, |10> -> -sin|01> + cos|10>,
            # identity on |00> and |11>.
            t = self.params[0]
            c, s = math.cos(t), math.sin(t)
            return np.array(
                [[1, 0, 0, 0], [0, c, -s, 0], [0, s, c, 0], [0, 0, 0, 1]],
                dtype=complex,
            )
        if k == "CPHASE":
            t = self.params[0]
            return np.diag([1, 1, 1, np.exp(1j * t)]).astype(complex)
        if k == "PAULI_ROT":
            t = self.params[0]
            p = _pauli_matrix_from_label(self.label)
            dim = p.shape[0]
            return math.cos(0.5 * t) * np.eye(dim) - 1j * math.sin(0.5 * t) * p
        raise ValueError(f"unknown gate kind {self.kind!r}")

    def inverse_gates(self) -> List["Gate"]:
        """A gate sequence realizing the exact inverse (no global phase)."""
        k = self.kind
        if k in ("X", "H", "CNOT"):
            return [self]
        if k == "Sdg":
            return [self, self, self]  # Sdg^4 = I
        if k in ("RZ", "GIVENS", "CPHASE", "PAULI_ROT"):
            return [Gate(k, self.qubits, (-self.params[0],), self.label)]
        raise ValueError(f"unknown gate kind {self.kind!r}")


def _pauli_matrix_from_label(label: str) -> np.ndarray:
    m = np.array([[1.0 + 0j]])
    # label[i] acts on the i-th listed qubit; build with the first listed
    # qubit as the most-significant local bit to match Gate ordering.
    for ch in label:
        m = np.kron(m, PAULI_1Q[ch])
    return m


@dataclass
class Circuit:
    """Ordered gate list; gates apply left to right (index 0 first)."""

    n_qubits: int
    gates: List[Gate] = field(default_factory=list)

    def add(self, gate: Gate) -> "Circuit":
        for q in gate.qubits:
            if not 0 <= q < self.n_qubits:
                raise ValueError(f"qubit {q} out of range")
        if len(set(gate.qubits)) != len(gate.qubits):
            raise ValueError("repeated qubit in gate")
        self.gates.append(gate)
        return self

    def extend(self, other: "Circuit") -> "Circuit":
        if other.n_qubits != self.n_qubits:
            raise ValueError("circuit sizes differ")
        for g in other.gates:
            self.add(g)
        return self

    def copy(self) -> "Circuit":
        return Circuit(self.n_qubits, list(self.gates))

    def inverse(self) -> "Circuit":
        inv = Circuit(self.n_qubits)
        for g in reversed(self.gates):
            for gi in g.inverse_gates():
                inv.add(gi)
        return inv

    def __len__(self) -> int:
        return len(self.gates)


class StateVector:
    """Complex amplitudes over the 2^n computational basis states."""

    __slots__ = ("n_qubits", "amplitudes")

    def __init__(self, n_qubits: int, amplitudes: np.ndarray | None = None):
        self.n_qubits = n_qubits
        dim = 1 << n_qubits
        if amplitudes is None:
            amps = np.zeros(dim, dtype=complex)
            amps[0] = 1.0
        else:
            amps = np.asarray(amplitudes, dtype=complex)
            if amps.shape != (dim,):
                raise ValueError("amplitude length does not match qubit count")
        self.amplitudes = amps

    @classmethod
    def computational_basis(cls, n_qubits: int, index: int) -> "StateVector":
        sv = cls(n_qubits)
        sv.amplitudes[0] = 0.0
        sv.amplitudes[index] = 1.0
        return sv

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    """Apply one gate in place and return the state."""
    n = state.n_qubits
    qubits = gate.qubits
    for q in qubits:
        if not 0 <= q < n:
            raise ValueError(f"qubit {q} out of range")
    mat = gate.matrix()
    k = len(qubits)
    psi = state.amplitudes.reshape([2] * n)
    # Axis for qubit q is n-1-q (C order: first axis = most significant bit).
    # Gate matrix ordering puts the first listed qubit as the high local bit.
    axes = [n - 1 - q for q in qubits]
    psi = np.moveaxis(psi, axes, range(k))
    shape = psi.shape
    psi = mat @ psi.reshape(1 << k, -1)
    psi = np.moveaxis(psi.reshape(shape), range(k), axes)
    state.amplitudes = np.ascontiguousarray(psi).reshape(-1)
    return state


def run_circuit(state: StateVector, circuit: Circuit) -> StateVector:
    if circuit.n_qubits != state.n_qubits:
        raise ValueError("circuit and state sizes differ")
    for g in circuit.gates:
        apply_gate(state, g)
    return state


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    """Dense unitary of the whole circuit (small registers only)."""
    dim = 1 << circuit.n_qubits
    u = np.eye(dim, dtype=complex)
    for col in range(dim):
        sv = StateVector.computational_basis(circuit.n_qubits, col)
        run_circuit(sv, circuit)
        u[:, col] = sv.amplitudes
    return u


def _parity_table(n_qubits: int) -> np.ndarray:
    dim = 1 << n_qubits
    bits = np.arange(dim, dtype=np.uint64)
    par = np.zeros(dim, dtype=np.int8)
    for k in range(n_qubits):
        par ^= ((bits >> np.uint64(k)) & np.uint64(1)).astype(np.int8)
    return par


_PARITY_CACHE: Dict[int, np.ndarray] = {}


def _parity_of_and(indices: np.ndarray, mask: int, n_qubits: int) -> np.ndarray:
    if n_qubits not in _PARITY_CACHE:
        _PARITY_CACHE[n_qubits] = _parity_table(n_qubits)
    return _PARITY_CACHE[n_qubits][indices & mask]


def apply_pauli_string(state_amps: np.ndarray, p: PauliString) -> np.ndarray:
    """P |psi> computed via bit arithmetic (no matrix build)."""
    n = p.n_qubits
    dim = 1 << n
    idx = np.arange(dim)
    n_y = bin(p.x_mask & p.z_mask).count("1")
    sign = 1 - 2 * _parity_of_and(idx, p.z_mask, n).astype(np.int64)
    phase = (1j) ** (n_y % 4)
    out = np.empty(dim, dtype=complex)
    out[idx ^ p.x_mask] = phase * sign * state_amps
    return out


def pauli_expectation(state: StateVector, p: PauliString) -> complex:
    if p.n_qubits != state.n_qubits:
        raise ValueError("string size does not match state")
    return complex(np.vdot(state.amplitudes, apply_pauli_string(state.amplitudes, p)))


def expectation(state: StateVector, obs: PauliSum) -> float:
    """Exact <psi|obs|psi> for a Hermitian observable."""
    if not obs.is_hermitian():
        raise ValueError("observable must have real coefficients")
    if obs.n_qubits != state.n_qubits:
        raise ValueError("observable size does not match state")
    total = 0.0
    for p, c in obs.terms.items():
        total += c.real * pauli_expectation(state, p).real
    return total


def measurement_rotation(p: PauliString) -> Circuit:
    """Pre-measurement basis change: X -> H, Y -> Sdg then H, Z/I -> none."""
    circ = Circuit(p.n_qubits)
    for q in range(p.n_qubits):
        letter = p.letter(q)
        if letter == "X":
            circ.add(Gate("H", (q,)))
        elif letter == "Y":
            circ.add(Gate("Sdg", (q,)))
            circ.add(Gate("H", (q,)))
    return circ


def sample_bitstrings(
    state: StateVector, shots: int, rng: np.random.Generator
) -> np.ndarray:
    probs = np.abs(state.amplitudes) ** 2
    probs = probs / probs.sum()
    return rng.choice(len(probs), size=shots, p=probs)


def sample_pauli(
    state: StateVector, p: PauliString, shots: int, seed: int
) -> Tuple[float, Dict[str, int]]:
    """Shot-based estimate of <P> with the explicit basis-rotation protocol.

    Returns (estimate, counts) where counts maps measured bitstrings
    (qubit 0 rightmost) to frequencies.  The estimate averages the +/-1
    parity over the string's non-identity positions.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rotated = state.copy()
    run_circuit(rotated, measurement_rotation(p))
    rng = np.random.default_rng(seed)
    outcomes = sample_bitstrings(rotated, shots, rng)
    support = p.support
    n = state.n_qubits
    par = _parity_of_and(outcomes, support, n)
    estimate = float(np.mean(1.0 - 2.0 * par))
    counts: Dict[str, int] = {}
    uniq, cnt = np.unique(outcomes, return_counts=True)
    for u, c in zip(uniq, cnt):
        counts[format(int(u), f"0{n}b")] = int(c)
    return estimate, counts


def counts_to_text(counts: Dict[str, int]) -> str:
    """Counts export: lines ``bitstring count``, qubit 0 rightmost."""
    return "\n".join(f"{b} {c}" for b, c in sorted(counts.items())) + "\n"


def counts_from_text(text: str) -> Dict[str, int]:
    counts: Dict[str, int] = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2 or not set(parts[0]) <= {"0", "1"}:
            raise ValueError(f"line {ln}: expected 'bitstring count'")
        counts[parts[0]] = counts.get(parts[0], 0) + int(parts[1])
    return counts


def pauli_sum_matrix(obs: PauliSum) -> np.ndarray:
    """Dense matrix of a PauliSum (test/oracle use)."""
    dim = 1 << obs.n_qubits
    m = np.zeros((dim, dim), dtype=complex)
    eye = np.eye(dim, dtype=complex)
    for p, c in obs.terms.items():
        cols = np.empty((dim, dim), dtype=complex)
        for col in range(dim):
            cols[:, col] = apply_pauli_string(eye[:, col], p)
        m += c * cols
    return m
