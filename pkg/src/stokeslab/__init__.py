"""Spectral slab toolkit for the stationary Navier-Stokes mild formulation.

Horizontal directions are periodic and handled by FFT; the bounded
vertical direction is handled by exponential-kernel convolutions and
finite differences.  The package provides dyadic (Littlewood-Paley)
analysis, hybrid mixed-norm Besov functionals, paraproducts, the linear
solution operator, a Picard solver for the nonlinear problem, and a CLI
for reproducible verification experiments.
"""

from .errors import (FormatError, GridError, LadderError, ParameterError,
                     PreconditionError, ShapeError, StokeslabError)
from .grid import SlabGrid, make_grid
from .field import (SPECTRAL, PHYSICAL, SpectralField, boundary_magnitude,
                    multiplier_h, symbol_values, to_physical, to_spectral,
                    transform_h, vertical_derivative, weight_vertical,
                    zero_field)
from .io import read_field, write_field, field_io
from .ladder import (INF, BesovIndex, DyadicLadder, besov_norm, build_ladder,
                     bump, chi, dyadic_block, low_pass, mixed_norm)
from .bony import (bony_reconstruction_error, dealiased_product, paraproduct,
                   product_law_report, remainder)
from .modelops import (ExpConvolutionPlan, apply_model_operator, exp_convolve,
                       kernel_estimate_report, model_operator_d3,
                       semigroup_decay_report)
from .leray import (ForcingTensor, VelocityField, apply_D, linear_bound_report,
                    linear_residual)
from .picard import (DecayReport, IterationTrace, SolverConfig, decay_fit,
                     hypothesis_check, nonlinear_term, ns_residual,
                     picard_solve, supercritical_report)
from .randomfields import (block_random_field, dealias_mask, gaussian_profile,
                           random_field, single_mode_field)
from .experiments import (compact_bump, decay_forcing, halved_grid,
                          rescaled_field, small_forcing)

__version__ = "0.1.0"
