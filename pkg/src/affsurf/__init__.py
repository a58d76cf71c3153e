"""Branched affine surfaces at genus 0 and 1: holonomy characters, turning
numbers, flat-form residues, cohomological dimension bookkeeping, twisted
cochain complexes with their Hermitian pairing, and isoresidual deformations.
"""

from . import errors
from .errors import (
    AffsurfError,
    AllResiduesZero,
    BranchJump,
    DegenerateLattice,
    DegeneratePairing,
    EvaluationAtConePoint,
    GenusUnsupported,
    InvalidComplex,
    InvalidDirection,
    InvalidSpec,
    NewtonDivergence,
    NonFiniteEvaluation,
    NonFlatCharacter,
    NonUnitaryCharacter,
    NotInAdmissibleLocus,
    NotIntegralPole,
    NotTranslationSurface,
    ResidueSumNonzero,
    StepCollision,
    ToleranceNotReached,
    UnstableConfiguration,
    ZeroDerivativeSample,
    ZeroKernel,
)
from .numerics import (
    Quadrature,
    integrate,
    continuous_log,
    cauchy_residue,
    weierstrass_sigma,
    weierstrass_zeta,
    quasi_periods,
)
from .cohomology import (
    DimReport,
    coderivative_rows,
    dim_H1_L,
    dim_report,
    line_bundle_dims,
    trans_dims,
)
from .deformation import (
    LambdaShift,
    MovePoint,
    OrderPair,
    RankReport,
    SpecFamily,
    TauShift,
    family_from_json,
    family_to_json,
    hol_jacobian,
    hol_res_jacobian,
    isoresidual_family,
    leaf_step,
    on_same_leaf,
    projective_distance,
)

__version__ = "0.1.0"
