"""Substitution coding of the infinite staircase and forged rotation numbers."""

from .forge import Certificate, Summable, forge_alpha, scale_bound, zeta_certificate
from .levels import LevelHistogram, LevelTower, level_histograms, max_hits, run_hits
from .renorm import coding_by_expansion, coding_of_point, decompose, expansion, zeta_enclosure
from .words import (
    StaircaseParams,
    drift,
    letter_matrix,
    level_drifts,
    level_lengths,
    level_word,
    substitute,
    word_histogram,
)

__all__ = [
    "Certificate", "LevelHistogram", "LevelTower", "StaircaseParams", "Summable",
    "coding_by_expansion", "coding_of_point", "decompose", "drift", "expansion",
    "forge_alpha", "letter_matrix", "level_drifts", "level_histograms", "level_lengths",
    "level_word", "max_hits", "run_hits", "scale_bound", "substitute", "word_histogram",
    "zeta_certificate", "zeta_enclosure",
]
