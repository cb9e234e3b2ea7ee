"""Photon-number resolved dissipation of a microwave mode coupled to an SIS junction.

Modules, from the bottom up:

``fockfc``
    Franck-Condon weights of l-photon processes.
``junction``
    Quasiparticle I(V) and its Kramers-Kronig partner, tabulated.
``rates``
    Fock-state loss rates and Lamb shifts vs bias.
``lindblad``
    Driven-dissipative master equation, steady state and time evolution.
``spectroscopy``
    Reflection maps, saturation sweeps, lineshape fits, two-tone.
"""

from .errors import (
    DimensionMismatch,
    FitFailed,
    GridTooNarrow,
    OutOfRange,
    PhysicsError,
    QuadratureNotConverged,
    SingularLiouvillian,
    StepSizeUnderflow,
)
from .fockfc import FcTable, displacement_matrix, franck_condon, lambda_from_impedance
from .junction import IvTable, JunctionParams, i_at, ikk_at, kk_transform, qp_current, table_for_mode
from .lindblad import LiouvillianSpec, build_liouvillian, evolve, observables, spec_from_bias, steady_state
from .rates import ModeParams, gamma_n, lamb_shift_n, rate_profile, transition_shift
from .spectroscopy import (
    SpectrumResult,
    TlsFit,
    ZenoResult,
    fit_tls_lineshape,
    reflection,
    spectrum_map,
    two_tone,
    zeno_sweep,
)

__all__ = [
    "DimensionMismatch",
    "FcTable",
    "FitFailed",
    "GridTooNarrow",
    "IvTable",
    "JunctionParams",
    "LiouvillianSpec",
    "ModeParams",
    "OutOfRange",
    "PhysicsError",
    "QuadratureNotConverged",
    "SingularLiouvillian",
    "SpectrumResult",
    "StepSizeUnderflow",
    "TlsFit",
    "ZenoResult",
    "build_liouvillian",
    "displacement_matrix",
    "evolve",
    "fit_tls_lineshape",
    "franck_condon",
    "gamma_n",
    "i_at",
    "ikk_at",
    "kk_transform",
    "lamb_shift_n",
    "lambda_from_impedance",
    "observables",
    "qp_current",
    "rate_profile",
    "reflection",
    "spec_from_bias",
    "spectrum_map",
    "steady_state",
    "table_for_mode",
    "transition_shift",
    "two_tone",
    "zeno_sweep",
]
