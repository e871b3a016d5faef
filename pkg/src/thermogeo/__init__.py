"""Geometric theory of thermal stresses on coordinate charts.

Temperature-dependent material metrics, curvature-based stress-free
classification, axisymmetric nonlinear thermal stresses, orthonormal-frame
decompositions and the linearization recovering classical thermoelasticity.
"""
from .errors import InputError, SolverError, ThermogeoError
from .fields import Chart, MetricField, ScalarField, VectorField
from .geometry import (ConnectionField, CurvatureBundle, conformal_ricci, curvature,
                       levi_civita, weyl_schouten)
from .thermal_metric import ExpansionLaw, build_material_metric
from .stress_free import (check_stress_free_2d, check_stress_free_3d, closed_form_3d,
                          cone_from_beta, inverse_alpha_radial)
from .embedding import embed_radial, export_surface
from .frames import ap_connection, orthonormal_frame, thermal_ap_connection
from .axisym import AxisymProblem, NeoHookean2D, solve_axisym
from .linearized import (SVKModuli, bc_condition_check, classical_navier_residual,
                         linearized_operator, solve_linearized_1d, svk_tensors)

__version__ = "0.1.0"
