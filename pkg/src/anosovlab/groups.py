"""Free-group words, their matrix images, and boundary order on RP^1.

Boundary combinatorics (cyclic order, linkedness) is always read off a
fixed 2x2 reference representation; the boundary circle of the group
does not depend on the target representation, and RP^1 carries an
explicit angle coordinate.  The default reference is the once-punctured
torus pair A = [[1,1],[1,2]], B = [[1,-1],[-1,2]] whose commutator has
trace -2 and whose generator axes cross.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .core_linalg import Mat
from .errors import (
    BudgetError,
    DomainError,
    InputError,
    PreconditionError,
)

__all__ = [
    "Word",
    "BoundaryPoint",
    "words_of_length",
    "evaluate",
    "rp1_fixed_points",
    "is_cyclically_ordered",
    "is_linked",
    "circle_separation",
]

RENORMALIZE_ABOVE = 30      # word length beyond which products are rescaled
ANGLE_SEPARATION = 1e-10    # below this two boundary angles count as coincident
LOXODROMIC_TRACE = 2.0 + 1e-8


def _reduce(letters) -> tuple:
    out = []
    for letter in letters:
        if letter == 0:
            raise InputError("generator indices are nonzero signed integers")
        if out and out[-1] == -letter:
            out.pop()
        else:
            out.append(int(letter))
    return tuple(out)


@dataclass(frozen=True, order=True)
class Word:
    """Freely reduced word; letters are signed 1-based generator indices."""

    letters: tuple = ()

    def __post_init__(self):
        letters = tuple(int(x) for x in self.letters)
        for a, b in zip(letters, letters[1:]):
            if a == -b:
                raise InputError(f"word {letters} is not freely reduced")
        if any(x == 0 for x in letters):
            raise InputError("generator indices are nonzero signed integers")
        object.__setattr__(self, "letters", letters)

    @classmethod
    def from_letters(cls, letters) -> "Word":
        """Build a word, freely reducing adjacent inverse pairs."""
        return cls(_reduce(letters))

    def __len__(self) -> int:
        return len(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        return Word(_reduce(self.letters + other.letters))

    def inverse(self) -> "Word":
        return Word(tuple(-x for x in reversed(self.letters)))

    def __str__(self) -> str:
        if not self.letters:
            return "e"
        names = "abcdefgh"
        out = []
        for x in self.letters:
            name = names[abs(x) - 1] if abs(x) <= len(names) else f"g{abs(x)}"
            out.append(name.upper() if x < 0 else name)
        return "".join(out)


def words_of_length(rank: int, max_length: int, cap: int = 500_000) -> list:
    """All freely reduced words of length <= max_length, identity first.

    The sphere of radius l in rank n has 2n (2n-1)^(l-1) words; a
    BudgetError is raised when the ball would exceed ``cap``.
    """
    if rank < 1:
        raise InputError("rank must be >= 1")
    if max_length < 0:
        raise InputError("max length must be >= 0")
    letters = [i for i in range(1, rank + 1)] + [-i for i in range(1, rank + 1)]
    ball = [Word()]
    sphere = [Word()]
    for _ in range(max_length):
        nxt = []
        for w in sphere:
            last = w.letters[-1] if w.letters else 0
            for letter in letters:
                if letter == -last:
                    continue
                nxt.append(Word(w.letters + (letter,)))
        ball.extend(nxt)
        sphere = nxt
        if len(ball) > cap:
            raise BudgetError(
                f"word ball exceeds the configured cap of {cap} words")
    return ball


def evaluate(rep, word: Word) -> Mat:
    """Image of a word: ordered product of generator images and inverses.

    For words longer than 30 letters the partial products are rescaled by
    their largest singular value, with the log scale tracked on the Mat.
    """
    d = rep.dim
    gens = rep.generator_images
    for letter in word.letters:
        if abs(letter) > len(gens):
            raise InputError(
                f"word uses generator {abs(letter)}, representation has {len(gens)}")
    acc = np.eye(d)
    log_scale = 0.0
    renormalize = len(word) > RENORMALIZE_ABOVE
    for letter in word.letters:
        g = gens[abs(letter) - 1]
        a = g.entries if letter > 0 else np.linalg.inv(g.entries)
        ls = g.log_scale if letter > 0 else -g.log_scale
        acc = acc @ a
        log_scale += ls
        if renormalize:
            s = np.linalg.norm(acc, 2)
            acc /= s
            log_scale += np.log(s)
    return Mat(acc, log_scale)


def _angle_of_direction(v: np.ndarray) -> float:
    theta = float(np.arctan2(v[1], v[0])) % np.pi
    return 0.0 if theta >= np.pi else theta


@dataclass(frozen=True)
class BoundaryPoint:
    """Point of RP^1 given by its angle in [0, pi), tagged by its source word."""

    angle: float
    source_word: Word | None = None


def circle_separation(a: float, b: float) -> float:
    """Distance of two angles on RP^1 (circle of circumference pi)."""
    delta = abs(a - b) % np.pi
    return min(delta, np.pi - delta)


def rp1_fixed_points(m, word: Word | None = None):
    """Attracting and repelling fixed lines of a loxodromic 2x2 matrix."""
    a = m.entries if isinstance(m, Mat) else np.asarray(m, dtype=float)
    if a.shape != (2, 2):
        raise InputError("fixed points on RP^1 need a 2x2 matrix")
    tr = a[0, 0] + a[1, 1]
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    disc = tr * tr - 4.0 * det
    if abs(tr) <= LOXODROMIC_TRACE * np.sqrt(abs(det)) or disc <= 0:
        raise DomainError(
            f"matrix is not loxodromic: trace {tr:.6g}, det {det:.6g}")
    sq = np.sqrt(disc)
    lam_plus = (tr + sq) / 2.0
    lam_minus = (tr - sq) / 2.0
    if abs(lam_plus) < abs(lam_minus):
        lam_plus, lam_minus = lam_minus, lam_plus

    def eigdir(lam):
        # rows of (a - lam I) are proportional; pick the better-conditioned kernel
        cand1 = np.array([a[0, 1], lam - a[0, 0]])
        cand2 = np.array([lam - a[1, 1], a[1, 0]])
        v = cand1 if np.linalg.norm(cand1) >= np.linalg.norm(cand2) else cand2
        return v / np.linalg.norm(v)

    att = BoundaryPoint(_angle_of_direction(eigdir(lam_plus)), word)
    rep_pt = BoundaryPoint(_angle_of_direction(eigdir(lam_minus)), word)
    return att, rep_pt


def _angles(points) -> list:
    out = []
    for p in points:
        out.append(p.angle if isinstance(p, BoundaryPoint) else float(p))
    return out


def is_cyclically_ordered(points) -> bool:
    """True iff the angle sequence is monotone around RP^1 for one orientation.

    Cyclic shifts and full reversal of the tuple preserve the verdict;
    coincident points (separation below 1e-10) are a precondition error.
    """
    angles = _angles(points)
    n = len(angles)
    if n < 4:
        raise PreconditionError("cyclic order needs at least 4 points")
    for i, j in itertools.combinations(range(n), 2):
        if circle_separation(angles[i], angles[j]) < ANGLE_SEPARATION:
            raise PreconditionError(
                f"boundary points {i} and {j} coincide (angles {angles[i]:.12g}, "
                f"{angles[j]:.12g})")
    descents = sum(
        1 for i in range(n) if angles[(i + 1) % n] < angles[i])
    return descents == 1 or descents == n - 1


def is_linked(g: Word, h: Word, ref) -> bool:
    """Whether the axes of g and h cross: (g-, h-, g+, h+) cyclically ordered.

    ``ref`` is a 2x2 reference representation supplying the boundary
    circle.  Both images must be loxodromic and the four fixed points
    pairwise distinct.
    """
    g_plus, g_minus = rp1_fixed_points(evaluate(ref, g), g)
    h_plus, h_minus = rp1_fixed_points(evaluate(ref, h), h)
    return is_cyclically_ordered([g_minus, h_minus, g_plus, h_plus])
