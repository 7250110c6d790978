"""Variational minimization of <H> over ansatz parameters.

Exact backend: gradient descent with Armijo backtracking on the exact
statevector expectation, central finite-difference gradients.  Shot
backend: Nelder-Mead simplex on the sampled energy with a plateau
stopping rule.  Both are deterministic for fixed configuration and
seeds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Sequence

import numpy as np

from .ansatz import AnsatzLayout, AnsatzParameters, prepare_state
from .fermion import ActiveSpaceSpec
from .pauli import PauliSum
from .simulator import Circuit, StateVector, expectation


@dataclass(frozen=True)
class Backend:
    """Energy evaluation mode: exact expectations or sampled estimates."""

    kind: str = "exact"  # "exact" | "shots"
    shots: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("exact", "shots"):
            raise ValueError(f"unknown backend kind {self.kind!r}")
        if self.kind == "shots" and self.shots < 1:
            raise ValueError("shot backend needs shots >= 1")


@dataclass(frozen=True)
class OptimizerConfig:
    max_iter: int = 2000
    tol_energy: float = 1e-8
    tol_grad: float = 1e-5
    fd_step: float = 1e-4
    armijo_c1: float = 1e-4
    step_init: float = 0.5
    step_max: float = 50.0  # cap on the spectral step
    restarts: Sequence[float] = (0.0,)  # extra-start perturbation scales
    restart_seed: int = 7
    plateau_window: int = 20  # shot backend stopping rule


@dataclass
class VqeResult:
    energy: float
    theta_opt: np.ndarray
    iterations: int
    converged: bool
    history: List[float] = field(default_factory=list)
    message: str = ""


def _shot_energy(
    state: StateVector, ham: PauliSum, shots: int, seed: int
) -> float:
    from .rdm import grouped_pauli_estimates

    strings = [p for p, _ in ham.terms.items() if not p.is_identity()]
    est = grouped_pauli_estimates(state, strings, shots, seed)
    total = 0.0
    for p, c in ham.terms.items():
        total += c.real * (1.0 if p.is_identity() else est[p])
    return total


def sparse_pauli_sum(ham: PauliSum):
    """CSR matrix of a PauliSum; every string touches one entry per row."""
    from scipy.sparse import csr_matrix

    from .simulator import apply_pauli_string

    dim = 1 << ham.n_qubits
    idx = np.arange(dim)
    data = np.zeros(dim, dtype=complex)
    rows_all = []
    cols_all = []
    vals_all = []
    for p, c in ham.terms.items():
        unit = apply_pauli_string(np.ones(dim, dtype=complex), p)
        # column j maps to row j ^ x_mask with the per-column phase
        rows_all.append(idx ^ p.x_mask)
        cols_all.append(idx)
        vals_all.append(c * unit[idx ^ p.x_mask])
    m = csr_matrix(
        (np.concatenate(vals_all), (np.concatenate(rows_all), np.concatenate(cols_all))),
        shape=(dim, dim),
    )
    m.sum_duplicates()
    return m


def make_energy_function(
    ham: PauliSum,
    spec: ActiveSpaceSpec,
    layout: AnsatzLayout,
    backend: Backend,
    extra_circuits: Sequence[Circuit] = (),
) -> Callable[[np.ndarray], float]:
    """Bind Hamiltonian + circuit stack into E(theta)."""
    if not ham.is_hermitian():
        raise ValueError("Hamiltonian must be Hermitian")
    extras = list(extra_circuits)
    h_sparse = sparse_pauli_sum(ham) if backend.kind == "exact" else None

    def energy(theta: np.ndarray) -> float:
        state = prepare_state(spec, AnsatzParameters(layout, theta), extras)
        if backend.kind == "exact":
            return float(np.vdot(state.amplitudes, h_sparse @ state.amplitudes).real)
        return _shot_energy(state, ham, backend.shots, backend.seed)

    return energy


def gradient(
    energy: Callable[[np.ndarray], float], theta: np.ndarray, fd_step: float = 1e-4
) -> np.ndarray:
    """Central finite-difference gradient of the energy."""
    g = np.zeros_like(theta)
    for i in range(len(theta)):
        tp = theta.copy()
        tm = theta.copy()
        tp[i] += fd_step
        tm[i] -= fd_step
        g[i] = (energy(tp) - energy(tm)) / (2.0 * fd_step)
    return g


def _minimize_exact(
    energy: Callable[[np.ndarray], float],
    theta0: np.ndarray,
    opts: OptimizerConfig,
) -> VqeResult:
    """Gradient descent with spectral (Barzilai-Borwein) step sizes and an
    Armijo backtracking safeguard."""
    theta = theta0.copy()
    e = energy(theta)
    g = gradient(energy, theta, opts.fd_step)
    history = [e]
    step = opts.step_init
    converged = False
    message = "max_iter reached"
    it = 0
    for it in range(1, opts.max_iter + 1):
        gnorm = float(np.max(np.abs(g))) if len(g) else 0.0
        if gnorm < opts.tol_grad:
            converged = True
            message = "gradient below tolerance"
            break
        g2 = float(np.dot(g, g))
        alpha = step
        accepted = False
        for _ in range(60):
            trial = theta - alpha * g
            e_trial = energy(trial)
            if e_trial <= e - opts.armijo_c1 * alpha * g2:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            converged = gnorm < 10 * opts.tol_grad
            message = "line search stalled"
            break
        g_new = gradient(energy, trial, opts.fd_step)
        s = trial - theta
        y = g_new - g
        sy = float(np.dot(s, y))
        # Spectral step for the next iteration; fall back on the accepted
        # step when the curvature estimate is unusable.
        step = (
            min(float(np.dot(s, s)) / sy, opts.step_max) if sy > 1e-14 else alpha
        )
        de = e - e_trial
        theta, e, g = trial, e_trial, g_new
        history.append(e)
        if de < opts.tol_energy and float(np.max(np.abs(g))) < opts.tol_grad:
            converged = True
            message = "energy and gradient converged"
            break
    return VqeResult(
        energy=e,
        theta_opt=theta,
        iterations=it,
        converged=converged,
        history=history,
        message=message,
    )


def _minimize_exact_multistart(
    energy: Callable[[np.ndarray], float],
    theta0: np.ndarray,
    opts: OptimizerConfig,
) -> VqeResult:
    """Run the descent from theta0 and from seeded perturbed starts; keep
    the lowest energy.  The reference state is a local minimum of this
    circuit family for some systems, so a single small kick is not enough."""
    best: VqeResult | None = None
    for i, scale in enumerate(opts.restarts):
        if scale == 0.0:
            start = theta0
        else:
            rng = np.random.default_rng([opts.restart_seed, i])
            start = theta0 + scale * rng.standard_normal(len(theta0))
        res = _minimize_exact(energy, start, opts)
        if best is None or res.energy < best.energy - 1e-12:
            best = res
    return best


def _minimize_shots(
    energy: Callable[[np.ndarray], float],
    theta0: np.ndarray,
    opts: OptimizerConfig,
) -> VqeResult:
    from scipy.optimize import minimize as scipy_minimize

    history: List[float] = []

    def wrapped(t):
        e = energy(t)
        history.append(e)
        return e

    res = scipy_minimize(
        wrapped,
        theta0,
        method="Nelder-Mead",
        options={"maxiter": opts.max_iter, "xatol": 1e-4, "fatol": 1e-6},
    )
    # Plateau rule: last window of best-so-far values must be flat.
    best = np.minimum.accumulate(history) if history else np.array([res.fun])
    w = opts.plateau_window
    plateaued = len(best) > w and (best[-w] - best[-1]) < 10 * opts.tol_energy
    return VqeResult(
        energy=float(res.fun),
        theta_opt=np.asarray(res.x),
        iterations=int(res.nit),
        converged=bool(res.success or plateaued),
        history=history,
        message=res.message,
    )


def minimize(
    ham: PauliSum,
    spec: ActiveSpaceSpec,
    layout: AnsatzLayout,
    theta0: np.ndarray,
    backend: Backend = Backend(),
    opts: OptimizerConfig = OptimizerConfig(),
    extra_circuits: Sequence[Circuit] = (),
) -> VqeResult:
    """Minimize <H> over the ansatz angles from the given start point."""
    if ham.n_qubits != spec.n_qubits:
        raise ValueError("Hamiltonian register size does not match spec")
    energy = make_energy_function(ham, spec, layout, backend, extra_circuits)
    theta0 = np.asarray(theta0, dtype=float)
    if backend.kind == "exact":
        return _minimize_exact_multistart(energy, theta0, opts)
    return _minimize_shots(energy, theta0, opts)
