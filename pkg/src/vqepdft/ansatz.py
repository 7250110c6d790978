"""Reference-state preparation and the particle-number-conserving ansatz.

The trial circuit is a brick-wall of two-qubit blocks on a line: each
block is a Givens rotation composed with a controlled phase, so every
block (and therefore the whole circuit) commutes with the total particle
number.  Layer parity alternates the pairing offset.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from .fermion import ActiveSpaceSpec
from .simulator import Circuit, Gate, StateVector


@dataclass(frozen=True)
class AnsatzLayout:
    """Structure descriptor: register size, depth, connectivity."""

    n_qubits: int
    depth: int
    connectivity: str = "line"

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if self.connectivity != "line":
            raise ValueError(f"unsupported connectivity {self.connectivity!r}")

    def blocks(self) -> List[Tuple[int, int]]:
        """Ordered (low, high) qubit pairs across all layers."""
        pairs = []
        for layer in range(self.depth):
            start = layer % 2
            for q in range(start, self.n_qubits - 1, 2):
                pairs.append((q, q + 1))
        return pairs

    @property
    def n_parameters(self) -> int:
        # Two angles per block: Givens theta and controlled phase phi.
        return 2 * len(self.blocks())

    def to_dict(self) -> Dict:
        return {
            "n_qubits": self.n_qubits,
            "depth": self.depth,
            "connectivity": self.connectivity,
        }


@dataclass
class AnsatzParameters:
    layout: AnsatzLayout
    theta: np.ndarray

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        if self.theta.shape != (self.layout.n_parameters,):
            raise ValueError(
                f"expected {self.layout.n_parameters} parameters, "
                f"got {self.theta.shape}"
            )


def prepare_hf(spec: ActiveSpaceSpec) -> Circuit:
    """X gates on the occupied spin-orbital qubits (aufbau filling)."""
    circ = Circuit(spec.n_qubits)
    for q in spec.hf_occupied():
        circ.add(Gate("X", (q,)))
    return circ


def build_ansatz(params: AnsatzParameters) -> Circuit:
    """Brick-wall Givens+CPHASE circuit for the given angles."""
    layout = params.layout
    circ = Circuit(layout.n_qubits)
    for i, (a, b) in enumerate(layout.blocks()):
        theta, phi = params.theta[2 * i], params.theta[2 * i + 1]
        circ.add(Gate("GIVENS", (a, b), (theta,)))
        circ.add(Gate("CPHASE", (a, b), (phi,)))
    return circ


def prepare_state(
    spec: ActiveSpaceSpec,
    params: AnsatzParameters,
    extra_circuits: List[Circuit] | None = None,
) -> StateVector:
    """|psi> = [extra circuits] * ansatz * HF-preparation * |0...0>."""
    from .simulator import run_circuit

    sv = StateVector(spec.n_qubits)
    run_circuit(sv, prepare_hf(spec))
    run_circuit(sv, build_ansatz(params))
    for c in extra_circuits or ():
        run_circuit(sv, c)
    return sv


def amplitudes_in_sector(
    state: StateVector, spec: ActiveSpaceSpec
) -> Tuple[Dict[str, complex], float]:
    """Amplitudes on the fixed-particle-number bitstrings, plus leakage.

    Keys are bitstrings with qubit 0 rightmost; leakage is
    1 - sum |c_k|^2 over the sector.
    """
    n = spec.n_qubits
    amps: Dict[str, complex] = {}
    in_sector = 0.0
    for idx in range(1 << n):
        if bin(idx).count("1") == spec.n_elec:
            a = complex(state.amplitudes[idx])
            amps[format(idx, f"0{n}b")] = a
            in_sector += abs(a) ** 2
    return amps, 1.0 - in_sector


def initial_parameters(
    layout: AnsatzLayout, perturbation: float = 0.0, seed: int = 0
) -> AnsatzParameters:
    """Zero angles (HF fixed point), optionally with a small seeded kick
    to move off the gradient saddle at the reference state."""
    theta = np.zeros(layout.n_parameters)
    if perturbation:
        rng = np.random.default_rng(seed)
        theta = perturbation * rng.standard_normal(layout.n_parameters)
    return AnsatzParameters(layout, theta)
