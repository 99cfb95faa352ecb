"""Schwinger pair production in (3+1)D from parallel five-qubit lattice simulations."""

__version__ = "0.1.0"

from .hamiltonian import (  # noqa: E402
    LatticeParams,
    PauliOperator,
    PauliTerm,
    TrotterSplit,
    analytic_rate_1p1,
    analytic_rate_3p1,
    build_parity_hamiltonian,
    charge_weight,
    effective_mass,
    split_trotter_terms,
    to_dense,
)
from .noise import Counts, NoiseModel, post_select, pvac, sample_noisy  # noqa: E402
from .pipeline import (  # noqa: E402
    DecaySeries,
    ExperimentConfig,
    RateTable,
    default_windows,
    fit_decay,
    integrate_rates,
    run_benchmark,
    run_curve,
)
from .simulator import (  # noqa: E402
    Circuit,
    Gate,
    Statevector,
    apply,
    apply_circuit,
    basis_state,
    evolve_exact,
    evolve_trotter,
    expectation,
    probabilities,
    sample,
    trotter_step_circuit,
)
from .vqe import ansatz_circuit, energy, exact_ground_state, fidelity, optimize  # noqa: E402
