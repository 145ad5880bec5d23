"""The 64-item syllogistic domain and its 29-dimensional multi-hot encoding.

Terms are ``a``, ``b`` and ``c`` with ``b`` always the middle term. A
syllogism code is mood of premise 1, mood of premise 2, figure (e.g. ``EA2``).

Figures fix the term order of each premise::

    1: a-b, b-c     2: b-a, c-b     3: a-b, c-b     4: b-a, b-c
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import product

import numpy as np

MOODS = ("A", "E", "I", "O")
FIGURES = (1, 2, 3, 4)
TERMS = ("a", "b", "c")
RESPONSES = ("Aac", "Eac", "Iac", "Oac", "Aca", "Eca", "Ica", "Oca", "NVC")
N_FEATURES = 29
BLOCK_SIZE = 14

_FIGURE_TERMS = {
    1: (("a", "b"), ("b", "c")),
    2: (("b", "a"), ("c", "b")),
    3: (("a", "b"), ("c", "b")),
    4: (("b", "a"), ("b", "c")),
}
_CODE_RE = re.compile(r"^[AEIO][AEIO][1-4]$")


class SyllogismError(ValueError):
    """Rejected syllogism code or premise."""


@dataclass(frozen=True)
class Premise:
    quantifier: str
    subject: str
    obj: str

    def __post_init__(self):
        if self.quantifier not in MOODS:
            raise SyllogismError(f"unknown quantifier {self.quantifier!r}")
        if self.subject not in TERMS or self.obj not in TERMS:
            raise SyllogismError(f"unknown term in premise {self.format()!r}")
        if (self.subject == "b") == (self.obj == "b"):
            raise SyllogismError(
                f"premise {self.format()!r} must contain the middle term b exactly once"
            )

    def format(self) -> str:
        return f"{self.quantifier}{self.subject}{self.obj}"

    @classmethod
    def parse(cls, text: str) -> "Premise":
        text = text.strip()
        if len(text) != 3:
            raise SyllogismError(f"malformed premise {text!r}")
        return cls(text[0], text[1], text[2])


@dataclass(frozen=True)
class Syllogism:
    code: str
    mood1: str
    mood2: str
    figure: int
    premise1: Premise
    premise2: Premise

    def format(self) -> str:
        return self.code

    def with_premises(self, p1: Premise, p2: Premise) -> "Syllogism":
        """Copy with explicit premises; quantifiers must agree with the code."""
        if p1.quantifier != self.mood1 or p2.quantifier != self.mood2:
            raise SyllogismError(
                f"{self.code}: premises {p1.format()},{p2.format()} disagree with code moods"
            )
        return Syllogism(self.code, self.mood1, self.mood2, self.figure, p1, p2)


def premise_terms(figure: int, index: int) -> tuple[str, str]:
    """(subject, object) of premise ``index`` (1 or 2) under ``figure``."""
    if figure not in _FIGURE_TERMS or index not in (1, 2):
        raise SyllogismError(f"invalid figure/index ({figure}, {index})")
    return _FIGURE_TERMS[figure][index - 1]


def parse_code(code: str) -> Syllogism:
    if not isinstance(code, str) or not _CODE_RE.match(code):
        raise SyllogismError(f"malformed syllogism code {code!r}")
    m1, m2, fig = code[0], code[1], int(code[2])
    p1 = Premise(m1, *premise_terms(fig, 1))
    p2 = Premise(m2, *premise_terms(fig, 2))
    return Syllogism(code, m1, m2, fig, p1, p2)


def enumerate_syllogisms() -> list[Syllogism]:
    """All 64 items, ordered mood1, then mood2, then figure (AA1 ... OO4)."""
    return [parse_code(f"{m1}{m2}{f}") for m1, m2, f in product(MOODS, MOODS, FIGURES)]


def canonical_codes() -> list[str]:
    return [s.code for s in enumerate_syllogisms()]


def _encode_premise(p: Premise) -> list[float]:
    block = [0.0] * BLOCK_SIZE
    block[MOODS.index(p.quantifier)] = 1.0
    block[4 + TERMS.index(p.subject)] = 1.0
    block[7 + TERMS.index(p.obj)] = 1.0
    block[10] = float(p.quantifier in "AE")
    block[11] = float(p.quantifier in "EO")
    block[12] = float("a" in (p.subject, p.obj))
    block[13] = float("c" in (p.subject, p.obj))
    return block


def encode(s: Syllogism) -> np.ndarray:
    """29-vector: premise-1 block, premise-2 block, constant 1.

    Each 14-wide block is quantifier one-hot (4), subject one-hot (3),
    object one-hot (3), universal flag, negative flag, has-a flag, has-c flag.
    """
    return np.array(_encode_premise(s.premise1) + _encode_premise(s.premise2) + [1.0])


def encode_all(items=None) -> np.ndarray:
    """Stack encodings into an (n, 29) matrix; defaults to all 64 items."""
    items = enumerate_syllogisms() if items is None else items
    return np.vstack([encode(s) for s in items])
