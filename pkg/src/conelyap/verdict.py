from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any

import numpy as np


class Verdict(str, Enum):
    MEMBER = "member"
    NONMEMBER = "nonmember"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class MembershipVerdict:
    """Outcome of a membership test for M(C), End(C), Hom(C1, C2) or Aut(C).

    ``witness`` carries whatever certifies a positive answer (the scalar of
    an S-lemma inequality, a permutation/diagonal factorization, ...);
    ``counterexample`` is an ``(x, xi)`` pair when one was found.
    """

    verdict: Verdict
    margin: float
    witness: Any = None
    counterexample: tuple | None = None

    @property
    def member(self) -> bool:
        return self.verdict is Verdict.MEMBER

    def __bool__(self):
        return self.member

    def to_dict(self) -> dict:
        def enc(v):
            if isinstance(v, np.ndarray):
                return v.tolist()
            if isinstance(v, dict):
                return {k: enc(w) for k, w in v.items()}
            if isinstance(v, (list, tuple)):
                return [enc(w) for w in v]
            if isinstance(v, (np.floating, np.integer)):
                return v.item()
            return v

        return {
            "verdict": self.verdict.value,
            "margin": float(self.margin),
            "witness": enc(self.witness),
            "counterexample": enc(self.counterexample),
        }


def member(margin, witness=None):
    return MembershipVerdict(Verdict.MEMBER, float(margin), witness)


def nonmember(margin, witness=None, counterexample=None):
    return MembershipVerdict(Verdict.NONMEMBER, float(margin), witness, counterexample)
