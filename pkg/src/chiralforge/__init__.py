"""Exact verification engine for U(1)-current vertex operators and pointed sector data."""
from .errors import (
    ChiralForgeError,
    ContractViolationError,
    GridError,
    MissingEnergyBoundError,
    NormConvergenceError,
    ParameterError,
    ShapeError,
    SpecError,
    SpinError,
    TruncationOverflowError,
    UnsupportedGroupError,
    WindowError,
)
from .exactlin import ExactPhase, FloatPhase, SparseBlock, block_mul, operator_norm_upper, phase_mul
from .fock import FockTruncation, FockVector, apply_j, apply_l, gram, inner, partitions
from .props import VerificationReport
from .testfunctions import TestFunction
from .vertex import ModeMatrix, VertexSeries, normal_product_mode, vertex_mode

__version__ = "0.1.0"
