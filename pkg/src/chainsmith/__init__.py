"""Spin-chain coupling design for perfect transfer, fractional revivals and W-states."""

from __future__ import annotations

from .analysis import (
    RobustnessReport,
    SpeedReport,
    gate_model_simulation,
    gate_model_time,
    lower_bound,
    robustness_sweep,
    speed_report,
)
from .config import Tolerances, load_config, tolerances
from .design import DesignResult, ReferenceFrame
from .errors import (
    ChainsmithError,
    ConvergenceFailure,
    DegenerateMoment,
    InvalidChain,
    InvalidSpectrum,
    InvalidTarget,
    InvalidWeights,
    NoValidRoot,
    NumericalBreakdown,
    PatternMismatch,
    RootNotBracketed,
    SpectrumMismatch,
    UnsupportedTarget,
)
from .inverse import SpectralData, chain_from_v1, lanczos_reconstruct, persymmetric_weights
from .mirror import extend_from_middle, predict_extended_target
from .numeric import SolverConfig, design_numeric, initial_guess, moment_fields, refine
from .pst import PstSpectrum, christandl_chain, pst_chain_from_spectrum, validate_synthesis_spectrum
from .revival import (
    RevivalSpec,
    design_end_pair,
    design_last_k,
    design_small_r,
    design_triple,
    parity_reduce,
)
from .spectral import (
    BetaTable,
    ChainSpec,
    EigenSystem,
    TargetState,
    beta_residual,
    beta_table,
    eigensystem,
    evolve,
    fidelity,
    v_basis,
)

__version__ = "0.1.0"
