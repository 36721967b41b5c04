"""genlab: finitary procedures for spaces of countable groups.

Words and systems of equations, group oracles with three-valued equality,
Cayley balls and the marked-group metric, bounded orderability tests,
Folner and sofic verification, and a finite-stage forcing game.
"""

from genlab.verdict import Outcome, Verdict, UnknownResult
from genlab.words import (
    Letter,
    Word,
    Equation,
    System,
    parse_word,
    free_reduce,
    substitute,
    system_substitute,
)

__version__ = "0.1.0"

__all__ = [
    "Outcome",
    "Verdict",
    "UnknownResult",
    "Letter",
    "Word",
    "Equation",
    "System",
    "parse_word",
    "free_reduce",
    "substitute",
    "system_substitute",
]
