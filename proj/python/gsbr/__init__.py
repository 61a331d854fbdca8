"""Generalized spin-boson toolkit: truncated Fock spaces, Krein resolvents, cutoff renormalization."""

from ._gsbr import (
    ClassificationConflict,
    ConfigError,
    FormFactor,
    Model,
    ModeGrid,
    NumericalError,
    PreconditionError,
    SingularFormula,
    StructuralError,
    classify_divergence,
    convergence_study,
    norm_resolvent_distance,
    pairing,
    preset_names,
    report_schema,
    resolvent_direct,
    run_config,
    scale_norm,
    self_energy,
    study_names,
    truncate,
    van_hove_dressing,
)

__all__ = [name for name in dir() if not name.startswith("_")]
