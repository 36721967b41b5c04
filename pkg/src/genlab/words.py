"""Words over variables and constants, free reduction, and systems.

A word is a freely reduced sequence of letters ``x_i^{+-1}`` (variables) and
``c_n^{+-1}`` (natural-number constants). Systems are finite sets of clauses
``w = e`` / ``w != e``.

Text grammar::

    word := term ('*' term)* | 'e'
    term := atom ('^' integer)?
    atom := 'x' posint | 'c' posint
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple, Sequence

VAR = "x"
CONST = "c"


class Letter(NamedTuple):
    kind: str  # VAR or CONST
    index: int
    sign: int = 1

    def inverse(self) -> "Letter":
        return Letter(self.kind, self.index, -self.sign)

    def sort_key(self):
        return (0 if self.kind == VAR else 1, self.index, 0 if self.sign > 0 else 1)

    def __str__(self):
        return f"{self.kind}{self.index}" + ("" if self.sign > 0 else "^-1")


def x(i: int, sign: int = 1) -> Letter:
    return Letter(VAR, i, sign)


def c(n: int, sign: int = 1) -> Letter:
    return Letter(CONST, n, sign)


def _reduce(letters: Iterable[Letter]) -> tuple:
    out: list = []
    for letter in letters:
        if out and out[-1].kind == letter.kind and out[-1].index == letter.index \
                and out[-1].sign == -letter.sign:
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


@dataclass(frozen=True, order=False)
class Word:
    letters: tuple = ()

    def __post_init__(self):
        for letter in self.letters:
            if not isinstance(letter, Letter):
                raise TypeError(f"not a Letter: {letter!r}")
            if letter.index < 1:
                raise ValueError(f"letter index must be >= 1: {letter!r}")
            if letter.sign not in (1, -1):
                raise ValueError(f"letter sign must be +1 or -1: {letter!r}")
        if _reduce(self.letters) != self.letters:
            raise ValueError("Word letters must be freely reduced; use free_reduce")

    @classmethod
    def empty(cls) -> "Word":
        return cls(())

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        return free_reduce(self.letters + other.letters)

    def __pow__(self, n: int) -> "Word":
        base = self if n >= 0 else self.inverse()
        return free_reduce(base.letters * abs(n))

    def inverse(self) -> "Word":
        return Word(tuple(letter.inverse() for letter in reversed(self.letters)))

    @property
    def is_empty(self) -> bool:
        return not self.letters

    @property
    def arity(self) -> int:
        """Largest variable index occurring, 0 if none."""
        return max((l.index for l in self.letters if l.kind == VAR), default=0)

    def variables(self) -> frozenset:
        return frozenset(l.index for l in self.letters if l.kind == VAR)

    def constants(self) -> frozenset:
        return frozenset(l.index for l in self.letters if l.kind == CONST)

    def sort_key(self):
        return (len(self.letters), tuple(l.sort_key() for l in self.letters))

    def canonical_inverse_rep(self) -> "Word":
        """The shortlex-smaller of w and w^-1 (w = e iff w^-1 = e)."""
        inv = self.inverse()
        return inv if inv.sort_key() < self.sort_key() else self

    def cyclic_reduce(self) -> "Word":
        letters = self.letters
        while len(letters) > 1 and letters[0] == letters[-1].inverse():
            letters = letters[1:-1]
        return Word(letters)

    def render(self) -> str:
        if not self.letters:
            return "e"
        parts = []
        i = 0
        n = len(self.letters)
        while i < n:
            j = i
            while j < n and self.letters[j] == self.letters[i]:
                j += 1
            run = (j - i) * self.letters[i].sign
            head = f"{self.letters[i].kind}{self.letters[i].index}"
            parts.append(head if run == 1 else f"{head}^{run}")
            i = j
        return "*".join(parts)

    def __str__(self):
        return self.render()

    def __repr__(self):
        return f"Word({self.render()!r})"


def free_reduce(letters: Sequence[Letter]) -> Word:
    """Cancel adjacent inverse pairs until none remain."""
    return Word(_reduce(letters))


class WordSyntaxError(ValueError):
    def __init__(self, message: str, text: str, position: int):
        super().__init__(f"{message} at position {position} in {text!r}")
        self.text = text
        self.position = position


_TOKEN = re.compile(r"\s*(?:(?P<atom>[xc])(?P<idx>\d+)|(?P<e>e)(?![0-9A-Za-z])"
                    r"|(?P<pow>\^\s*(?P<exp>[+-]?\d+))|(?P<star>\*))")


def parse_word(text: str) -> Word:
    """Parse the text form of a word and freely reduce it.

    >>> parse_word("x1*x2*x2^-1*x1").render()
    'x1^2'
    """
    pos = 0
    n = len(text)
    letters: list = []
    expect_term = True
    saw_term = False
    saw_e = False
    while True:
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n:
            break
        m = _TOKEN.match(text, pos)
        if m is None:
            raise WordSyntaxError("unexpected character", text, pos)
        start = m.start(m.lastgroup) if m.lastgroup else pos
        if m.group("atom"):
            if not expect_term or saw_e:
                raise WordSyntaxError("expected '*'", text, start)
            idx = int(m.group("idx"))
            if idx < 1:
                raise WordSyntaxError(f"{m.group('atom')} index must be >= 1", text, start)
            pos = m.end()
            exp = 1
            m2 = _TOKEN.match(text, pos)
            if m2 is not None and m2.group("pow"):
                exp = int(m2.group("exp"))
                pos = m2.end()
            letter = Letter(m.group("atom"), idx, 1 if exp > 0 else -1)
            letters.extend([letter] * abs(exp))
            expect_term = False
            saw_term = True
        elif m.group("e"):
            if saw_term or saw_e:
                raise WordSyntaxError("'e' must stand alone", text, start)
            saw_e = True
            expect_term = False
            pos = m.end()
        elif m.group("star"):
            if expect_term or saw_e:
                raise WordSyntaxError("unexpected '*'", text, start)
            expect_term = True
            pos = m.end()
        else:
            raise WordSyntaxError("unexpected exponent", text, start)
    if expect_term and (saw_term or not saw_e):
        raise WordSyntaxError("expected a term", text, pos)
    return free_reduce(letters)


def substitute(w: Word, assignment: Mapping[int, int]) -> Word:
    """Replace each variable x_i by the constant c_{assignment[i]}."""
    out = []
    for letter in w.letters:
        if letter.kind == VAR:
            if letter.index not in assignment:
                raise ValueError(f"no assignment for x{letter.index}")
            value = assignment[letter.index]
            if value < 1:
                raise ValueError(f"constants are positive integers, got {value}")
            out.append(Letter(CONST, value, letter.sign))
        else:
            out.append(letter)
    return free_reduce(out)


@dataclass(frozen=True)
class Equation:
    word: Word
    equal: bool = True  # False means w != e

    def render(self) -> str:
        return f"{self.word.render()} {'=' if self.equal else '!='} e"

    def canonical(self) -> "Equation":
        return Equation(self.word.canonical_inverse_rep(), self.equal)

    def to_json(self) -> dict:
        return {"word": self.word.render(), "eq": self.equal}

    @classmethod
    def from_json(cls, obj) -> "Equation":
        return cls(parse_word(obj["word"]), bool(obj["eq"]))

    def __str__(self):
        return self.render()


def eq(w) -> Equation:
    return Equation(parse_word(w) if isinstance(w, str) else w, True)


def neq(w) -> Equation:
    return Equation(parse_word(w) if isinstance(w, str) else w, False)


class System:
    """A finite set of clauses, kept in first-insertion order.

    The arity is the largest variable index used unless a larger one is
    declared.
    """

    __slots__ = ("clauses", "_set", "arity")

    def __init__(self, clauses: Iterable[Equation] = (), arity: int | None = None):
        seen: set = set()
        ordered = []
        for cl in clauses:
            if not isinstance(cl, Equation):
                raise TypeError(f"not an Equation: {cl!r}")
            if cl not in seen:
                seen.add(cl)
                ordered.append(cl)
        self.clauses = tuple(ordered)
        self._set = frozenset(seen)
        used = max((cl.word.arity for cl in self.clauses), default=0)
        if arity is not None and arity < used:
            raise ValueError(f"declared arity {arity} < variable index {used}")
        self.arity = used if arity is None else arity

    def __iter__(self):
        return iter(self.clauses)

    def __len__(self):
        return len(self.clauses)

    def __contains__(self, clause):
        return clause in self._set

    def __eq__(self, other):
        return isinstance(other, System) and self._set == other._set \
            and self.arity == other.arity

    def __hash__(self):
        return hash((self._set, self.arity))

    def __repr__(self):
        return "System({" + ", ".join(cl.render() for cl in self.clauses) + "})"

    def issuperset(self, other: "System") -> bool:
        return self._set >= other._set

    def union(self, other: Iterable[Equation]) -> "System":
        other = tuple(other)
        used = max((cl.word.arity for cl in other), default=0)
        return System(self.clauses + other, arity=max(self.arity, used))

    def equations(self):
        return [cl for cl in self.clauses if cl.equal]

    def inequations(self):
        return [cl for cl in self.clauses if not cl.equal]

    def constants(self) -> frozenset:
        out: set = set()
        for cl in self.clauses:
            out |= cl.word.constants()
        return frozenset(out)

    def to_json(self) -> dict:
        return {"arity": self.arity, "clauses": [cl.to_json() for cl in self.clauses]}

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, obj) -> "System":
        return cls([Equation.from_json(cl) for cl in obj.get("clauses", [])],
                   arity=obj.get("arity"))

    @classmethod
    def loads(cls, text: str) -> "System":
        return cls.from_json(json.loads(text))


def system_substitute(s: System, assignment: Mapping[int, int]) -> System:
    missing = [i for i in range(1, s.arity + 1) if i not in assignment]
    if missing:
        raise ValueError(f"assignment not total on 1..{s.arity}: missing {missing}")
    return System([Equation(substitute(cl.word, assignment), cl.equal) for cl in s.clauses])
