"""Finsler geometry on compact domains: measures, geodesic flows, Santalo's formula,
first eigenvalues and the inequalities that bound them."""

__version__ = "0.1.0"

from .errors import (ConfigError, ConjugatePointError, ConvergenceError, DomainExitError, FinslerError,
                     IllConditionedError, InvalidDomainError, InvalidInputError, RunawayError, StepSizeError,
                     UnsupportedDomainError)
from .metric import (Euclidean, FinslerMetric, FunkBall, Randers, ReversedMetric, Riemannian, constants_at,
                     constants_sup, dual_norm, fundamental_tensor, legendre, legendre_inverse, reverse_metric,
                     ricci, spray_coefficients)
from .domains import Domain, boundary_quadrature, domain_quadrature
from .measures import (MeasureKind, boundary_area, distortion, indicatrix_quadrature, omega_pm, sigma,
                       sphere_volume, volume)
from .geodesics import (FlowState, builtin_integrand, exit_time, flow, forward_ball, polar_density,
                        trace_to_exit)
from .santalo import Quadrature, SantaloReport, lhs_integral, rhs_inward, rhs_outward, verify
from .spectral import disk_eigenvalue, energy, grid, hemisphere_eigenvalue, minimize, torus_grid
from .bounds import (BoundsReport, funk_reference, funk_report, thm12_bound, thm13_check)

__all__ = [name for name in dir() if not name.startswith("_")]
