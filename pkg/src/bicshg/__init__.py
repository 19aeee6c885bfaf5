"""Bound states in the continuum and second-harmonic generation in a double
array of subwavelength nonlinear dielectric cylinders."""

from ._backend import BACKEND
from .dispersion import (ChannelSet, CouplingMatrix, StructureParams, alpha, beta,
                         channel_set, coupling_matrix, far_field_coefficients,
                         scattering_phase)
from .errors import (BicShgError, ConfigError, NumericalFailure,
                     ValidityViolation)
from .flux import (BicConstants, FluxReport, bic_constants, conservation_check,
                   efficiency_estimates, flux_report, optimal_distance, sigma1,
                   sigma2, sigma2_of_u)
from .shg import (NonlinearSolution, SHCoupling, cardano_unique_root, sh_coupling,
                  solve_fields, validity, zeta_xi)
from .siegert import (BoundState, ResonancePoint, find_bound_state,
                      find_bound_states, resonance_k, trace_curve, width)

__version__ = "0.1.0"
