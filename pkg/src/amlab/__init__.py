"""Numerical laboratory for special flows over circle rotations and Aubry-Mather sets."""

__version__ = "0.1.0"

from .arithmetic import (
    ContinuedFraction,
    build_cf,
    circle_norm,
    frac,
    general_position,
    golden_cf,
    orbit_point,
    parity_certificate,
    search_reciprocal_relation,
)
from .cocycle import (
    JumpSequence,
    birkhoff_spread,
    birkhoff_sum,
    bv_from_jumps,
    eigenfunction_integral,
    jump_basis_eval,
    jumps_from_ceiling,
    sigma_from_jumps,
    transfer_function,
)
from .denjoy import (
    CantorPoint,
    DenjoyModel,
    HoleSpec,
    build_denjoy,
    denjoy_map,
    gap_decay_fit,
    integrate_invariant,
    invariant_measure_cdf,
    semiconj_h,
    semiconj_h_inv,
)
from .hamiltonian import (
    HamiltonianSystem,
    TrigPoly,
    TrigTerm,
    TwoLevelTimeChange,
    am_cantor_approx,
    am_minimize,
    builtin_kick,
    integrate,
    jacobian_determinant,
    lyapunov_exponent,
    poincare_map,
    poincare_tangent,
    reparam_ceiling,
    twist_check,
)
from .specialflow import (
    ConstantCeiling,
    JumpBVCeiling,
    SampledCeiling,
    SpecialFlowPoint,
    StepCeiling,
    cesaro_mixing_test,
    correlation,
    default_lambda_grid,
    eigenvalue_exclusion,
    eigenvalue_scan,
    flow_advance,
    make_step_ceiling,
    weyl_sum,
)

__all__ = [name for name in dir() if not name.startswith("_")]
