"""Exception hierarchy shared by every affsurf module.

Everything raised on purpose derives from AffsurfError so the CLI can
separate domain failures (exit 1, machine-readable) from usage mistakes
and genuine bugs.
"""


class AffsurfError(Exception):
    """Base class for all domain errors raised by this package."""


# --- numerics ---------------------------------------------------------------

class NonFiniteEvaluation(AffsurfError):
    """An integrand or log argument produced inf/nan (or an exact zero)."""


class ToleranceNotReached(AffsurfError):
    """Adaptive refinement hit its depth cap before the error estimate fell
    below the requested tolerance."""


class BranchJump(AffsurfError):
    """Two consecutive samples of a branch-tracked logarithm differ in
    argument by at least pi, so the branch cannot be followed."""


class DegenerateLattice(AffsurfError):
    """tau does not span a lattice (Im tau <= 0) or its reduction failed."""


class ZeroDerivativeSample(AffsurfError):
    """A sampled loop has a vanishing discrete derivative, so its velocity
    winding is undefined."""


# --- surface ----------------------------------------------------------------

class InvalidSpec(AffsurfError):
    """A surface spec failed validation; message lists the problems."""


class ResidueSumNonzero(InvalidSpec):
    """Order sum differs from 2g-2 beyond tolerance (angle-defect count)."""


class EvaluationAtConePoint(AffsurfError):
    """A path or loop passed within 1e-12 of a cone point."""


# --- residues ---------------------------------------------------------------

class NotIntegralPole(AffsurfError):
    """A residue was requested at a point whose order is not a negative
    integer, or the transported branch failed to close around it."""


class NotTranslationSurface(AffsurfError):
    """An operation that needs trivial holonomy got a surface without it."""


class AllResiduesZero(AffsurfError):
    """Every integral pole has zero flat-form residue, so the projectivized
    residue tuple is undefined."""


# --- cohomology -------------------------------------------------------------

class GenusUnsupported(AffsurfError):
    """Dimension formulas are implemented for genus 0 and 1 only (complexes
    go up to genus 2)."""


class UnstableConfiguration(AffsurfError):
    """(g, n) with 2g-2+n <= 0 outside the explicitly supported cases."""


# --- localsys ---------------------------------------------------------------

class InvalidComplex(AffsurfError):
    """Triangulated-surface data failed a combinatorial check."""


class NonFlatCharacter(AffsurfError):
    """Edge weights violate the cocycle relation on some triangle."""


class NonUnitaryCharacter(AffsurfError):
    """The pairing needs |chi| = 1 on every generator."""


class DegeneratePairing(AffsurfError):
    """Pairing matrix singular beyond tolerance; signals a bug upstream or a
    non-unitary character that slipped through."""


# --- deformation ------------------------------------------------------------

class InvalidDirection(AffsurfError):
    """A deformation family is malformed (bad index, integral pole moved
    while an arc tree is active, lattice direction at genus 0, ...)."""


class StepCollision(AffsurfError):
    """A deformation step brought two cone points too close together."""


class ZeroKernel(AffsurfError):
    """leaf_step found no kernel direction at the base point."""


class NewtonDivergence(AffsurfError):
    """leaf_step's corrector failed to restore the leaf constraints."""


class NotInAdmissibleLocus(AffsurfError):
    """hol_res operations need a non-translation surface with an integral
    pole of nonzero residue."""
