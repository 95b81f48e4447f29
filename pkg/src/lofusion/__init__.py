"""Linear-optical cluster-state fusion: Fock-space simulation, post-selected
gate evaluation and optimization over mode unitaries."""

__version__ = "0.1.0"

from .fock import (
    DimensionError,
    PhotonicState,
    SectorError,
    apply_mode_unitary,
    compose,
    embed,
    permanent,
    transition_amplitude,
)
from .dualrail import LogicalState, QubitLayout, encode, make_chain_cluster, project_computational, stabilizer_check
from .gates import HybridOpSpec, evaluate_hybrid, make_standard_specs
from .fusion import fuse_bell, fuse_single, grow_chain
from .optimizer import OptimizerConfig, UnitaryParams, decompose, optimize, parametrize
