"""Three-valued results for semi-decidable questions."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any, Optional


class Outcome(enum.Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Verdict:
    """Yes / No / Unknown, with a witness and the bound it was produced at.

    Definite answers carry a certificate that the producing module knows how
    to re-check. Unknown always records the search bound.
    """

    outcome: Outcome
    certificate: Any = None
    bound: Optional[int] = None

    @classmethod
    def yes(cls, certificate=None, bound=None) -> "Verdict":
        return cls(Outcome.YES, certificate, bound)

    @classmethod
    def no(cls, certificate=None, bound=None) -> "Verdict":
        return cls(Outcome.NO, certificate, bound)

    @classmethod
    def unknown(cls, bound: Optional[int], certificate=None) -> "Verdict":
        return cls(Outcome.UNKNOWN, certificate, bound)

    @property
    def is_yes(self) -> bool:
        return self.outcome is Outcome.YES

    @property
    def is_no(self) -> bool:
        return self.outcome is Outcome.NO

    @property
    def is_unknown(self) -> bool:
        return self.outcome is Outcome.UNKNOWN

    def __repr__(self):
        return f"Verdict({self.outcome.value}, bound={self.bound})"


class UnknownResult(Exception):
    """Raised when an operation needing exact equality hit an Unknown."""

    def __init__(self, message, bound=None):
        super().__init__(message)
        self.bound = bound
