"""Projections and contractions on finite-dimensional complex l^p spaces.

Powers of projection products and averages, Apostol moduli, Halperin
constants, Dye radii, boundary spectra and the bounds tying them together.
"""
from .apostol import (PHI, PHI_TILDE, apostol_phi, check_beta_bound, check_composition_bounds,
                      check_modulus_chain, omega)
from .classes import (class_report, closure_report, d_radius_interval, halperin_constant,
                      wprime_defect)
from .dynamics import (check_decay_bound, check_kernel_formulas, check_range_formula,
                       ergodic_projection, iterate)
from .eigen import eigenvalues, spectral_radius
from .errors import (ConstructionError, DomainError, InputError, NumericalError,
                     PreconditionError, ProjlabError, StructuralError)
from .expm import expm
from .geometry import beta_modulus, delta_modulus
from .linalg import (SpaceDescriptor, adjoint, compose, matrix_from_json, matrix_to_json,
                     operator_norm, principal_angles, vec_norm)
from .projections import (ProjectionSpec, hermitian_defect, is_orthoprojection,
                          make_projection)
from .semigroup import Convex, Leaf, Product, evaluate, index_set, random_element, validate
from .spectral import check_amplitude_omega, kt_bound, spectral_report
from ._search import SamplingConfig

__version__ = "0.1.0"
