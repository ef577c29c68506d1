"""Finite-basis spectral solver with a squared-operator test for spurious eigenstates."""

from .basis import (
    BasisSpec,
    CoordinateMap,
    QuadratureRule,
    build_coordinate_map,
    build_mapped_basis,
    build_sine_basis,
    eval_basis,
    eval_basis_d1,
    eval_basis_d2,
    quadrature_rule,
)
from .diagnostics import (
    Classification,
    DeltaRecord,
    Trend,
    Verdict,
    classify,
    delta_diagnostic,
    forbidden_fraction,
    trk_sum_rule,
)
from .eigensolve import (
    EigenDecomposition,
    LanczosState,
    RitzPair,
    eigh_dense,
    lanczos_start,
    lanczos_step,
    ritz_pairs,
    track_states,
)
from .hamiltonians import (
    DiracParams,
    OperatorPair,
    assemble_dirac,
    assemble_schrodinger,
    dirac_energy_oracle,
    schrodinger_energy_oracle,
)
from .potentials import (
    CoulombRadial,
    FreeParticle,
    HarmonicOscillator,
    PoschlTeller,
    Potential,
    SquareWell,
)

__version__ = "0.1.0"

__all__ = [
    "BasisSpec",
    "Classification",
    "CoordinateMap",
    "CoulombRadial",
    "DeltaRecord",
    "DiracParams",
    "EigenDecomposition",
    "FreeParticle",
    "HarmonicOscillator",
    "LanczosState",
    "OperatorPair",
    "PoschlTeller",
    "Potential",
    "QuadratureRule",
    "RitzPair",
    "SquareWell",
    "Trend",
    "Verdict",
    "assemble_dirac",
    "assemble_schrodinger",
    "build_coordinate_map",
    "build_mapped_basis",
    "build_sine_basis",
    "classify",
    "delta_diagnostic",
    "dirac_energy_oracle",
    "eigh_dense",
    "eval_basis",
    "eval_basis_d1",
    "eval_basis_d2",
    "forbidden_fraction",
    "lanczos_start",
    "lanczos_step",
    "quadrature_rule",
    "ritz_pairs",
    "schrodinger_energy_oracle",
    "track_states",
    "trk_sum_rule",
]
