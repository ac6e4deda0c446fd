"""Wavelet scattering on periodic 1-D grids and its behaviour under deformations."""

__version__ = "0.1.0"

from .deformation import (Bump, DeformationField, DeformationMetrics, apply_deformation,
                          compute_metrics, deformation_adjoint, holder_seminorm,
                          k1alpha_functional, k2_functional, scale_pair, theorem1_f,
                          theorem1_tau)
from .exceptions import (BandwidthExceeded, ConfigError, DepthBudgetExceeded, DomainEscape,
                         GridMismatch, InvalidProfile, NoConvergence, NumericalFailure,
                         NyquistViolation, ParameterViolation, ScatStabError,
                         StructureMismatch, UnknownScale, UsabilityViolation)
from .filters import (FilterBank, MeyerAnalytic, TabulatedProfile, build_filter_bank,
                      littlewood_paley_residual, wavelet_transform)
from .operators import (LinearOperatorHandle, NormEstimate, commutator_bound_ratio,
                        commutator_handle, operator_norm)
from .scattering import (Path, ScatteringCoefficients, scatter, scattering_distance,
                         u_norm, u_norm_mixed)
from .signal import (Grid, Signal, Spectrum, band_project, dilate, fourier, inverse_fourier,
                     l2_norm, resample_at, translate)

__all__ = [name for name in dir() if not name.startswith("_")]
