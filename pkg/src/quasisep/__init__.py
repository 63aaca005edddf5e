"""Quasiparticle states of a coupled fermion-boson system and their separability."""

from .fock import (
    ModeKind,
    ModeSpec,
    StateVector,
    apply_annihilation,
    apply_creation,
    apply_mixed_creation,
    boson,
    canonical_phase,
    fermion,
    fixed_number_sector,
    inner_product,
    vacuum,
)
from .model import (
    JCParams,
    derive_params,
    eigenenergy,
    eigenstate,
    energy_bands,
    hamiltonian_apply,
    noon_coefficients,
    product_state_pm,
    quasiparticle_weights,
)
from .separability import (
    Constraint,
    SeparabilityVerdict,
    angular_momentum_constraint,
    eigenstate_factorization_conditions,
    projected_product,
    separability_bilinear,
    separability_fixed_N,
    separable_mixture,
)

__version__ = "0.1.0"

__all__ = [
    "angular_momentum_constraint",
    "apply_annihilation",
    "apply_creation",
    "apply_mixed_creation",
    "boson",
    "canonical_phase",
    "Constraint",
    "derive_params",
    "eigenenergy",
    "eigenstate",
    "eigenstate_factorization_conditions",
    "energy_bands",
    "fermion",
    "fixed_number_sector",
    "hamiltonian_apply",
    "inner_product",
    "JCParams",
    "ModeKind",
    "ModeSpec",
    "noon_coefficients",
    "product_state_pm",
    "projected_product",
    "quasiparticle_weights",
    "separability_bilinear",
    "separability_fixed_N",
    "SeparabilityVerdict",
    "separable_mixture",
    "StateVector",
    "vacuum",
]
