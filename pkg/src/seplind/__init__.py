"""Full and separability-restricted Lindblad dynamics for two-party systems."""
from .ensemble import run_ensemble
from .full import (
    EvolutionConfig,
    integrate_master,
    kraus_step_full,
    lindblad_rhs,
    mcwf_trajectory_full,
)
from .kernels import BACKEND
from .model import (
    ProductState,
    SystemModel,
    effective_hamiltonian,
    is_separable_generator,
    reduce_all,
)
from .observables import TimeSeries, negativity, population
from .rng import TrajectoryStream
from .scenarios import build_bell_decay, build_swap
from .separable import (
    generator_consistency_check,
    mcwf_trajectory_separable,
    separable_kraus_step,
    swap_restricted_closed_form,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "EvolutionConfig",
    "ProductState",
    "SystemModel",
    "TimeSeries",
    "TrajectoryStream",
    "build_bell_decay",
    "build_swap",
    "effective_hamiltonian",
    "generator_consistency_check",
    "integrate_master",
    "is_separable_generator",
    "kraus_step_full",
    "lindblad_rhs",
    "mcwf_trajectory_full",
    "mcwf_trajectory_separable",
    "negativity",
    "population",
    "reduce_all",
    "run_ensemble",
    "separable_kraus_step",
    "swap_restricted_closed_form",
]
