"""Controllability analysis of magnetically actuated spacecraft attitude.

The linearized reduced-quaternion model with gravity-gradient terms and a
tilted-dipole geomagnetic field is a periodic linear time-varying system
``x' = A x + B(t) m``. This package builds that model, checks the inertia
and orbit conditions under which it is controllable, and steers it to the
origin with minimum-energy magnetic-coil commands.
"""

from .controllability import (
    ControllabilityReport,
    KMatrices,
    Verdict,
    analytic_conditions,
    analyze,
    closed_form_combination,
    condition1_value,
    equatorial_degeneracy,
    gramian,
    k_matrices,
    rank_test,
    row_reduction_identity,
    submatrix_determinant,
)
from .errors import ModelError, NumericalError, SingularGramianError
from .maneuver import (
    ManeuverResult,
    min_energy_control,
    nonlinear_consistency,
    simulate_maneuver,
)
from .model import (
    FieldSample,
    GravityGradientCoefficients,
    InertiaTensor,
    InfluenceMatrices,
    OrbitConfig,
    StateVector,
    SystemMatrices,
    full_input_matrix,
    gravity_coefficients,
    influence_matrix,
    magnetic_field,
    magnetic_torque,
    reduced_kinematics,
    system_matrix,
)
from .numerics import RankResult, expm, svd_rank

__version__ = "0.1.0"
