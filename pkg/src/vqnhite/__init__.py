"""State-vector simulation of variational and quantum-neural hybrid imaginary-time evolution."""

from .errors import (
    ContractError,
    DegeneracyError,
    DivergenceError,
    NotApplicableError,
    ResourceError,
    SingularSystemError,
    VQNHITEError,
)
from .kernels import backend_name, set_backend, use_backend
from .pauli import PauliString, PauliSum, build_heisenberg, pauli_apply, pauli_mul, taylor_ite_pauli
from .statevector import AnsatzCircuit, initial_plus_state, run_circuit
from .neural import MLPParams, init_params, nn_forward, nn_gradient
from .oracle import exact_ite, fidelity, finite_diff
from .trace import FidelityTrace, TraceRecord
from .vite import EvolutionConfig, compute_C, compute_M, solve_update, vite_evolve
from .hybrid import (
    HybridParams,
    build_hybrid_state,
    compute_D,
    cost_F,
    cost_gradients,
    expectation_energy,
    hybrid_force,
    hybrid_metric,
    init_optimize,
    vqnhite_evolve,
)

__version__ = "0.1.0"
