"""The hybrid quantum-classical loop: cost function, config, restarts."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import DegenerateSimplex, DimensionMismatch
from ..hamiltonian import PauliHamiltonian, StandardHamiltonian, pauli_reconstruct
from ..quantum import AnsatzSpec, apply_ansatz, expectation_exact, expectation_shots
from .optimizers import MINIMIZERS, OptimizeOutcome

OPTIMIZERS = tuple(MINIMIZERS)
INITS = ("zeros", "random_uniform")


@dataclass(frozen=True)
class VqeConfig:
    tol: float = 1e-4
    maxiter: int = 100_000
    shots: object = "exact"  # positive int or the string "exact"
    seed: int = 0
    optimizer: str = "LBFGSB"
    optimizer_options: dict = field(default_factory=dict)
    n_restarts: int = 1
    init: str = "zeros"

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.maxiter < 1:
            raise ValueError(f"maxiter must be >= 1, got {self.maxiter}")
        if self.shots != "exact" and (not isinstance(self.shots, int) or self.shots < 1):
            raise ValueError(f"shots must be a positive integer or 'exact', got {self.shots!r}")
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"optimizer must be one of {OPTIMIZERS}, got {self.optimizer!r}")
        if self.n_restarts < 1:
            raise ValueError(f"n_restarts must be >= 1, got {self.n_restarts}")
        if self.init not in INITS:
            raise ValueError(f"init must be one of {INITS}, got {self.init!r}")


@dataclass(frozen=True)
class VqeResult:
    lambda_q: float
    theta_opt: np.ndarray
    energy_history: tuple  # (iteration, energy) pairs of the winning restart
    converged: bool
    stop_reason: str
    evaluations: int  # total cost calls across all restarts
    restart_index: int


def _sub_seed(*parts) -> int:
    """Derive an independent integer seed from a tuple of integers."""
    return int(np.random.SeedSequence(parts).generate_state(1, np.uint64)[0])


def cost(h, ansatz: AnsatzSpec, theta, shots="exact", seed: int = 0) -> float:
    """C(theta) = <psi(theta)|H|psi(theta)>, exact or shot-estimated."""
    state = apply_ansatz(ansatz, theta)
    if shots == "exact":
        return expectation_exact(state, h)
    if not isinstance(h, PauliHamiltonian):
        raise ValueError("shot-based cost needs a PauliHamiltonian operator")
    return expectation_shots(state, h, int(shots), seed)


def run_vqe(h: PauliHamiltonian, ansatz: AnsatzSpec, cfg: VqeConfig) -> VqeResult:
    """Minimize the expectation of h over the ansatz parameters.

    Restart r starts from zeros (r = 0 with init='zeros') or from seeded
    uniform angles in [-pi, pi]; each runs the configured optimizer under the
    shared tolerance rule.  The smallest accepted energy across the winning
    restart is lambda_q; ties go to the lowest restart index.  Optimizer
    errors are recorded, never raised.
    """
    if isinstance(h, PauliHamiltonian):
        n_qubits = h.n_qubits
    elif isinstance(h, StandardHamiltonian):
        n_qubits = h.n_qubits
    else:
        raise ValueError("h must be a PauliHamiltonian or StandardHamiltonian")
    if n_qubits != ansatz.n_qubits:
        raise DimensionMismatch(
            f"operator acts on {n_qubits} qubits, ansatz on {ansatz.n_qubits}"
        )

    # exact mode: one dense matvec per evaluation beats a Pauli-term sweep,
    # and the two paths agree to roundoff
    if cfg.shots == "exact":
        h_eval = pauli_reconstruct(h) if isinstance(h, PauliHamiltonian) else h.matrix
    else:
        h_eval = h

    best = None
    total_evaluations = 0
    for r in range(cfg.n_restarts):
        if r == 0 and cfg.init == "zeros":
            theta0 = np.zeros(ansatz.n_params)
        else:
            init_rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, 101, r)))
            theta0 = init_rng.uniform(-np.pi, np.pi, size=ansatz.n_params)

        counter = [0]
        restart = r

        def objective(theta):
            eval_seed = _sub_seed(cfg.seed, restart, counter[0])
            counter[0] += 1
            return cost(h_eval, ansatz, theta, cfg.shots, eval_seed)

        cfg_r = replace(cfg, seed=_sub_seed(cfg.seed, 202, r))
        try:
            theta_opt, outcome = MINIMIZERS[cfg.optimizer](objective, theta0, cfg_r)
        except DegenerateSimplex as exc:
            if exc.partial is None or exc.partial[0] is None:
                theta_opt = theta0
                outcome = OptimizeOutcome((), 0, "optimizer_internal", False, np.inf)
            else:
                theta_opt, outcome = exc.partial
        total_evaluations += outcome.evaluations

        if best is None or outcome.best_energy < best[1].best_energy:
            best = (theta_opt, outcome, r)

    theta_opt, outcome, winner = best
    return VqeResult(
        lambda_q=float(outcome.best_energy),
        theta_opt=np.asarray(theta_opt, dtype=float),
        energy_history=outcome.history,
        converged=outcome.converged,
        stop_reason=outcome.stop_reason,
        evaluations=total_evaluations,
        restart_index=winner,
    )


def result_to_json(result: VqeResult, cfg: VqeConfig, indent=2) -> str:
    """VqeResult plus a full config echo, for provenance."""
    payload = {
        "lambda_q": result.lambda_q,
        "theta_opt": list(result.theta_opt),
        "energy_history": [[i, e] for i, e in result.energy_history],
        "converged": result.converged,
        "stop_reason": result.stop_reason,
        "evaluations": result.evaluations,
        "restart_index": result.restart_index,
        "config": {
            "tol": cfg.tol,
            "maxiter": cfg.maxiter,
            "shots": cfg.shots,
            "seed": cfg.seed,
            "optimizer": cfg.optimizer,
            "optimizer_options": dict(cfg.optimizer_options),
            "n_restarts": cfg.n_restarts,
            "init": cfg.init,
        },
    }
    return json.dumps(payload, indent=indent, sort_keys=True)
