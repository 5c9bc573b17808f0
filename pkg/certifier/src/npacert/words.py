"""Operator words for the tripartite instrumental moment problem.

Three commuting families of projectors act on a shared state: Alice's
setting projectors A_x (x = 0,1,2), Bob's B_y (y = 0,1), and the
eavesdropper's E_e (e = 0,1,2; the fourth outcome projector is eliminated
as identity minus the sum).  A word is a finite product of these letters.
Reduction to canonical form uses exactly three relations:

* different parties commute (letters sort by party, A < B < E);
* projectors are idempotent (adjacent equal letters collapse);
* distinct projectors of the same measurement are orthogonal, which for
  the single Eve measurement kills any word with two different E letters.

Within a party, distinct letters do not commute (A_0 A_1 != A_1 A_0), so
the within-party order is preserved.  All letters are self-adjoint, hence
the adjoint of a word is its reversal, and a real feasibility problem may
identify each moment with that of the reversed word.
"""

from __future__ import annotations

from itertools import product

Letter = tuple[str, int]
Word = tuple[Letter, ...]

PARTY_ORDER = {"A": 0, "B": 1, "E": 2}

ALICE = [("A", x) for x in range(3)]
BOB = [("B", y) for y in range(2)]
EVE = [("E", e) for e in range(3)]
LETTERS: list[Letter] = ALICE + BOB + EVE


def reduce_word(letters: tuple[Letter, ...]) -> tuple[int, Word]:
    """Canonical form: (coefficient, word); coefficient 0 marks the zero word."""
    ordered = sorted(letters, key=lambda L: PARTY_ORDER[L[0]])
    out: list[Letter] = []
    for L in ordered:
        if out and out[-1] == L:
            continue
        if out and out[-1][0] == L[0] == "E" and out[-1] != L:
            return 0, ()
        out.append(L)
    return 1, tuple(out)


def adjoint(word: Word) -> Word:
    return tuple(reversed(word))


def moment_key(word: Word) -> Word:
    """Moments of a word and its adjoint coincide in the real relaxation."""
    return min(word, adjoint(word))


def basis_words(level: int) -> list[Word]:
    """All distinct nonzero canonical words of length <= level."""
    if level < 1:
        raise ValueError(f"hierarchy level must be >= 1, got {level}")
    words = {(): None}
    frontier = [()]
    for _ in range(level):
        new = []
        for w in frontier:
            for L in LETTERS:
                coeff, r = reduce_word(w + (L,))
                if coeff and len(r) == len(w) + 1 and r not in words:
                    words[r] = None
                    new.append(r)
        frontier = new
    return sorted(words, key=lambda w: (len(w), w))


# --- linear combinations of words ------------------------------------------

Combo = list[tuple[float, tuple[Letter, ...]]]


def projector(letter: Letter, outcome: int) -> Combo:
    """Outcome-0 projector is the letter itself; outcome 1 its complement."""
    if outcome == 0:
        return [(1.0, (letter,))]
    return [(1.0, ()), (-1.0, (letter,))]


def eve_projector(e: int) -> Combo:
    """Eve's four-outcome measurement with E_3 eliminated."""
    if not 0 <= e <= 3:
        raise ValueError(f"Eve outcome must be in 0..3, got {e}")
    if e < 3:
        return [(1.0, (EVE[e],))]
    return [(1.0, ())] + [(-1.0, (L,)) for L in EVE]


def multiply(*combos: Combo) -> Combo:
    out: Combo = [(1.0, ())]
    for combo in combos:
        out = [(c1 * c2, w1 + w2) for c1, w1 in out for c2, w2 in combo]
    return out


def outcome_projectors(a: int, b: int, x: int) -> Combo:
    """Joint projector for Alice outcome a at setting x and Bob outcome b.

    Bob's measurement index equals Alice's outcome (the instrumental wiring).
    """
    return multiply(projector(ALICE[x], a), projector(BOB[a], b))


def functional_coefficient(x: int, a: int, b: int) -> float:
    """Coefficient of p(a,b|x) in the instrumental functional (x zero-based)."""
    if x == 0:
        return (-1) ** a - (-1) ** b - (-1) ** (a + b)
    if x == 1:
        return 2.0 * (-1) ** b
    return 2.0 * (-1) ** (a + b)


def all_outcomes():
    return product(range(3), range(2), range(2))
