"""
Reaction right-hand sides: coagulation, linear fragmentation and
collision-induced fragmentation on a truncated size range.
"""

from src.rhs.identities import mass_flux, weak_form_pair, weak_form_terms
from src.rhs.reaction import (
    CellState,
    CollisionTerms,
    RateTerms,
    ReactionSystem,
    ReactionTerms,
    eval_coag,
    eval_collision_frag,
    eval_frag,
)

__all__ = [
    "CellState",
    "CollisionTerms",
    "RateTerms",
    "ReactionSystem",
    "ReactionTerms",
    "eval_coag",
    "eval_collision_frag",
    "eval_frag",
    "mass_flux",
    "weak_form_pair",
    "weak_form_terms",
]
