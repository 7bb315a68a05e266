"""Finite-dimensional measurement models: superselection audits and WAY-type bounds."""

__version__ = "0.1.0"

from superselect.algebra import (
    CompositeSpace,
    GroupAction,
    SectorDecomposition,
    act,
    commutator,
    embed,
    heisenberg,
    off_sector_norm,
    sector_decompose,
)
from superselect.correlation import (
    gns_compress,
    ozawa_equal_gns,
    perfect_correlation,
    spectral_decompose,
)
from superselect.errors import (
    BadDimension,
    DimMismatch,
    EmptyCommutant,
    FlagViolation,
    FloorViolation,
    MixedActionKinds,
    NotHermitian,
    NotNormalized,
    NotUnitary,
    ParseError,
    PreconditionViolated,
    StatesDontSpan,
    SuperselectError,
    UnknownElement,
    UnresolvedReference,
)
from superselect.linops import (
    eig_hermitian,
    expi,
    kron,
)
from superselect.schemes import (
    FockModel,
    MeasurementScheme,
    build_conjugated_von_neumann,
    build_discrete_von_neumann,
    build_fock_model,
    build_symmetry_breaking_model,
    build_way_spin_model,
    evolve_meter,
)
from superselect.verdicts import (
    check_covariant_indicator,
    check_isolated_conservation,
    check_superselection,
    check_total_conservation,
    constrained_search,
    main_theorem_audit,
    way_ozawa_bound,
)

__all__ = [
    "act",
    "BadDimension",
    "build_conjugated_von_neumann",
    "build_discrete_von_neumann",
    "build_fock_model",
    "build_symmetry_breaking_model",
    "build_way_spin_model",
    "check_covariant_indicator",
    "check_isolated_conservation",
    "check_superselection",
    "check_total_conservation",
    "commutator",
    "CompositeSpace",
    "constrained_search",
    "DimMismatch",
    "eig_hermitian",
    "embed",
    "EmptyCommutant",
    "evolve_meter",
    "expi",
    "FlagViolation",
    "FloorViolation",
    "FockModel",
    "gns_compress",
    "GroupAction",
    "heisenberg",
    "kron",
    "main_theorem_audit",
    "MeasurementScheme",
    "MixedActionKinds",
    "NotHermitian",
    "NotNormalized",
    "NotUnitary",
    "off_sector_norm",
    "ozawa_equal_gns",
    "ParseError",
    "perfect_correlation",
    "PreconditionViolated",
    "sector_decompose",
    "SectorDecomposition",
    "spectral_decompose",
    "StatesDontSpan",
    "SuperselectError",
    "UnknownElement",
    "UnresolvedReference",
    "way_ozawa_bound",
]
