"""f2c: free-fermion-aware Trotter circuit compiler."""

from ._kernels import get_backend
from .env import Action, EnvConfig, alphabet
from .ffsim import FFState, assemble_generator, fidelity, identity_state
from .pauli import Hamiltonian, PauliString, PauliTerm, parse_hamiltonian, render_hamiltonian
from .pipeline import CompileJob, CompileReport, split, trotter_bound
from .planner import PlanResult, SearchConfig, fallback_compile

__all__ = [
    "Action",
    "CompileJob",
    "CompileReport",
    "EnvConfig",
    "FFState",
    "Hamiltonian",
    "PauliString",
    "PauliTerm",
    "PlanResult",
    "SearchConfig",
    "alphabet",
    "assemble_generator",
    "fallback_compile",
    "fidelity",
    "get_backend",
    "identity_state",
    "parse_hamiltonian",
    "render_hamiltonian",
    "split",
    "trotter_bound",
]
__version__ = "0.1.0"
