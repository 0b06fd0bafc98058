"""Structured-matrix sequences on lattice grids of bounded and unbounded domains."""
from .errors import (AsymmetryError, ConfigError, ContainmentError, DimensionError,
                     DomainError, EvaluationError, GltError, SizeLimitError)
from .grid import (DomainSpec, Grid, Hypercube, domain_grid, domain_measure,
                   exhaustion_domain, get_domain, grid_dim, hypercube_grid, n_total)
from .generators import (FourierTable, SymbolFn, diag_sampling, fourier_coeffs, get_trig,
                         reduced_toeplitz, toeplitz)
from .selection import (PermutationCompletion, SelectionMap, commuting_square, extend,
                        gram_identities, restrict, selection_map)
from .spectral import (SpectralMeasure, SymbolSample, acs_distance_profile, p_metric,
                       pm_metric, singular_values, sv_tail_fractions, sym_eigenvalues,
                       w1_distance)
from .algebra import (GacsCertificate, GltSequence, gacs_decompose, isometry_check,
                      reduced_sequence, seq_add, seq_adjoint, seq_mul, seq_pinv,
                      unbounded_diag, unbounded_toeplitz)

__version__ = "0.1.0"
