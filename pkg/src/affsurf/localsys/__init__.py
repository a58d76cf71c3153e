"""Rank-1 local systems on triangulated punctured surfaces: complexes,
flat characters, twisted and compactly supported cohomology, and the
Hermitian cup-product form."""

from .characters import (
    Character,
    character_from_json,
    character_to_json,
    flatness_defect,
    refine_character,
)
from .complexes import (
    RefinementMaps,
    SurfaceComplex,
    barycentric_refine,
    boundary_vertex_loops,
    complex_from_json,
    complex_to_json,
    derive_boundary_cycles,
    refinement_vertex_parent,
    standard_complex,
    validate_complex,
)
from .pairing import PairingReport, cup_evaluate, veech_pairing
from .twisted import (
    CohomologyReport,
    coboundaries,
    compact_support_cohomology,
    twisted_cohomology,
)
