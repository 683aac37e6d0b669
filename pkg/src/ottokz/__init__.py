"""Otto-cycle simulator for free-fermionic chains driven across criticality."""

__version__ = "0.1.0"

from .analysis import (
    BoundResult,
    ScalingFit,
    UnusableWindowError,
    adiabatic_floor_time,
    appendix_energies,
    efficiency_bound,
    eta_at_max_power,
    fit_kz_exponent,
    generalized_eta_power,
    power_curve,
    predicted_work_exponent,
    tau_opt,
    w_infinity,
)
from .cycle import (
    CycleConfig,
    CycleRecord,
    GroundState,
    ModeRecord,
    aggregate_efficiency_power,
    classify_mode,
    run_cycle,
)
from .dynamics import (
    BathSpec,
    FixedDuration,
    ToSteadyState,
    energy,
    evolve_dissipative,
    evolve_unitary_ramp,
    ground_state_projector,
    jump_operators,
    liouvillian_matrix,
    liouvillian_rhs,
    steady_state_direct,
    tim_hamiltonian4,
    validate_density_matrix,
)
from .model import (
    CriticalExponents,
    ModeHamiltonian,
    gap,
    ground_state_energy,
    momentum_grid,
    tim_exponents,
    tim_mode,
)

__all__ = [
    "__version__",
    "BathSpec",
    "BoundResult",
    "CriticalExponents",
    "CycleConfig",
    "CycleRecord",
    "FixedDuration",
    "GroundState",
    "ModeHamiltonian",
    "ModeRecord",
    "ScalingFit",
    "ToSteadyState",
    "UnusableWindowError",
    "adiabatic_floor_time",
    "aggregate_efficiency_power",
    "appendix_energies",
    "classify_mode",
    "efficiency_bound",
    "energy",
    "eta_at_max_power",
    "evolve_dissipative",
    "evolve_unitary_ramp",
    "fit_kz_exponent",
    "gap",
    "generalized_eta_power",
    "ground_state_energy",
    "ground_state_projector",
    "jump_operators",
    "liouvillian_matrix",
    "liouvillian_rhs",
    "momentum_grid",
    "power_curve",
    "predicted_work_exponent",
    "run_cycle",
    "steady_state_direct",
    "tau_opt",
    "tim_exponents",
    "tim_hamiltonian4",
    "tim_mode",
    "validate_density_matrix",
    "w_infinity",
]
