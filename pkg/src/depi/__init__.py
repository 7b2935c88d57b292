"""depi: discrete Euler-Poincare integrators on SO(3).

Structure-preserving discrete-time mechanics on a Lie group: variational
steppers for the reduced equations on coalgebra x orbit, trivialized and
unreduced steppers, semidirect-product Lie-Poisson brackets with numerical
Poisson-map and Jacobi verification, exact-invariant audits, and
continuous-limit convergence studies.  Instantiated on SO(3) with the free
rigid body and the heavy top.
"""

from .continuum import (
    ContinuousReducedLagrangian,
    LegendreNotInvertible,
    Scheme,
    convergence_study,
    discretize,
    ep_vector_field,
    one_step_consistency,
    rk4_integrate,
)
from .lagrangian import (
    FullLagrangian,
    NonFinite,
    NotInvariant,
    ReducedLagrangian,
    Side,
    TrivializedLagrangian,
    VariationSequence,
    action,
    legendre_reduced,
    lie_deriv_left,
    lie_deriv_right,
    reduce,
    trivialize,
)
from .liegroup import NearBranchCut, Rotation
from .poisson import (
    BracketKind,
    Observable,
    bracket,
    casimir,
    verify_jacobi,
    verify_poisson_map,
)
from .representation import Representation, RepKind, diamond
from .stepper import (
    NewtonConfig,
    NoConvergence,
    OrbitDrift,
    ReducedState,
    Trajectory,
    extremize_action_bruteforce,
    reconstruct,
    run_ep,
    step_ep_left,
    step_ep_right,
    step_full,
    step_left_trivialized,
    step_right_trivialized,
)
from .systems import (
    HeavyTopParams,
    RigidBodyParams,
    invariant_report,
    make_heavy_top,
    make_rigid_body,
)

__version__ = "0.1.0"

__all__ = [
    "BracketKind",
    "ContinuousReducedLagrangian",
    "FullLagrangian",
    "HeavyTopParams",
    "LegendreNotInvertible",
    "NearBranchCut",
    "NewtonConfig",
    "NoConvergence",
    "NonFinite",
    "NotInvariant",
    "Observable",
    "OrbitDrift",
    "ReducedLagrangian",
    "ReducedState",
    "Representation",
    "RepKind",
    "RigidBodyParams",
    "Rotation",
    "Scheme",
    "Side",
    "Trajectory",
    "TrivializedLagrangian",
    "VariationSequence",
    "action",
    "bracket",
    "casimir",
    "convergence_study",
    "diamond",
    "discretize",
    "ep_vector_field",
    "extremize_action_bruteforce",
    "invariant_report",
    "legendre_reduced",
    "lie_deriv_left",
    "lie_deriv_right",
    "make_heavy_top",
    "make_rigid_body",
    "one_step_consistency",
    "reconstruct",
    "reduce",
    "rk4_integrate",
    "run_ep",
    "step_ep_left",
    "step_ep_right",
    "step_full",
    "step_left_trivialized",
    "step_right_trivialized",
    "trivialize",
    "verify_jacobi",
    "verify_poisson_map",
]
