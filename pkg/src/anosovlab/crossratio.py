"""Projective and Grassmannian cross ratios, triple ratio and shear.

All four quantities are ratios of wedge volumes of orthonormal bases;
each basis appears exactly once in a numerator and once in a denominator,
so the values are independent of every basis choice.  Degenerate
denominators produce an explicit infinity marker rather than a float
inf, so identity tests can assert on it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core_linalg import (
    PartialFlag,
    Subspace,
    direct_sum_defect,
    quotient_project,
    wedge_volume,
)
from .errors import DomainError, PreconditionError

__all__ = [
    "CrossRatioValue",
    "pcr",
    "pcr_quotient",
    "gcr",
    "triple_ratio",
    "shear",
]

DEGENERACY_TOL = 1e-14      # wedges below this count as vanishing
COINCIDENCE_TOL = 1e-10     # projective points closer than this coincide
GCR_TRANSVERSALITY = 1e-9   # pairwise defect needed on the gcr domain


@dataclass(frozen=True)
class CrossRatioValue:
    """Extended-real cross ratio value: a finite float or the infinity marker."""

    value: float | None

    @classmethod
    def finite(cls, v: float) -> "CrossRatioValue":
        if not np.isfinite(v):
            raise DomainError(f"cross ratio produced non-finite float {v}")
        if abs(v) >= 1e300:
            raise DomainError(f"cross ratio overflow: {v:g}")
        return cls(float(v))

    @classmethod
    def infinity(cls) -> "CrossRatioValue":
        return cls(None)

    @property
    def is_infinite(self) -> bool:
        return self.value is None

    def __float__(self) -> float:
        if self.value is None:
            raise DomainError("cross ratio is the infinity marker")
        return self.value

    def reciprocal(self) -> "CrossRatioValue":
        if self.value is None:
            return CrossRatioValue.finite(0.0)
        if self.value == 0.0:
            return CrossRatioValue.infinity()
        return CrossRatioValue.finite(1.0 / self.value)


def _line2(x) -> np.ndarray:
    if isinstance(x, Subspace):
        if x.ambient_dim != 2 or x.rank != 1:
            raise PreconditionError(
                "projective cross ratio entries must be lines in a plane")
        return x.basis[:, 0]
    v = np.asarray(x, dtype=float).reshape(-1)
    if v.shape != (2,):
        raise PreconditionError("projective points must be 2-vectors")
    n = np.linalg.norm(v)
    if n == 0:
        raise PreconditionError("zero vector is not a projective point")
    return v / n


def _wedge2(a: np.ndarray, b: np.ndarray) -> float:
    return float(a[0] * b[1] - a[1] * b[0])


def pcr(x1, x2, x3, x4) -> CrossRatioValue:
    """Projective cross ratio of four points of RP^1.

    Value (x1^x3 / x1^x2) (x4^x2 / x4^x3) on any lifts; no three of the
    four points may coincide.  A vanishing denominator with nonvanishing
    numerator gives the infinity marker.
    """
    pts = [_line2(x) for x in (x1, x2, x3, x4)]
    coincide = [[abs(_wedge2(pts[i], pts[j])) < COINCIDENCE_TOL
                 for j in range(4)] for i in range(4)]
    for i in range(4):
        group = sum(coincide[i])
        if group >= 3:
            raise PreconditionError(
                "three of the four projective points coincide")
    num = _wedge2(pts[0], pts[2]) * _wedge2(pts[3], pts[1])
    den = _wedge2(pts[0], pts[1]) * _wedge2(pts[3], pts[2])
    if abs(den) < DEGENERACY_TOL:
        if abs(num) < DEGENERACY_TOL:
            raise PreconditionError(
                "cross ratio is 0/0; configuration too degenerate")
        return CrossRatioValue.infinity()
    return CrossRatioValue.finite(num / den)


def pcr_quotient(v_low: Subspace, v_high: Subspace, w1, w2, w3, w4) -> CrossRatioValue:
    """Cross ratio of a pencil: pcr of the images in P(V_high / V_low).

    The quotient must be 2-dimensional.  Each entry is a subspace of
    V_high whose quotient image is a line: either a subspace containing
    V_low with one extra dimension, or any line transverse to V_low
    (which is implicitly augmented by V_low).
    """
    if v_high.rank - v_low.rank != 2:
        raise PreconditionError(
            f"pencil quotient must be 2-dimensional, got "
            f"{v_high.rank} - {v_low.rank}")
    lines = []
    for w in (w1, w2, w3, w4):
        img = quotient_project(w, v_low, v_high)
        if img.rank != 1:
            raise PreconditionError(
                f"pencil entry projects to rank {img.rank}, expected a line "
                "(containment of V_low fails or entry meets V_low)")
        lines.append(img)
    return pcr(*lines)


def gcr(v1: Subspace, w2: Subspace, w3: Subspace, v4: Subspace) -> CrossRatioValue:
    """Grassmannian cross ratio of (k, d-k, d-k, k)-dimensional subspaces.

    (V1^W3 / V1^W2)(V4^W2 / V4^W3) through wedge volumes of concatenated
    orthonormal bases; each basis choice cancels between numerator and
    denominator.  Requires V_j transverse to W_i for j in {1,4}, i in
    {2,3}; the failing pair is named in the error.
    """
    d = v1.ambient_dim
    k = v1.rank
    if v4.rank != k or w2.rank != d - k or w3.rank != d - k:
        raise PreconditionError(
            f"rank pattern must be (k, d-k, d-k, k); got "
            f"({v1.rank}, {w2.rank}, {w3.rank}, {v4.rank}) in dimension {d}")
    wedges = {}
    for vi, vname in ((v1, "V1"), (v4, "V4")):
        for wj, wname in ((w2, "W2"), (w3, "W3")):
            w = wedge_volume([vi, wj])
            if abs(w) < DEGENERACY_TOL or \
                    direct_sum_defect([vi, wj]) <= GCR_TRANSVERSALITY:
                raise DomainError(
                    f"transversality failure between {vname} and {wname}")
            wedges[vname, wname] = w
    value = (wedges["V1", "W3"] / wedges["V1", "W2"]
             * wedges["V4", "W2"] / wedges["V4", "W3"])
    return CrossRatioValue.finite(value)


def _flag_line_plane(fl: PartialFlag):
    """Line vector and a completing plane vector of a (1,2)-flag in R^3."""
    if fl.ambient_dim != 3 or fl.dims != (1, 2):
        raise PreconditionError("triple ratio needs (line < plane) flags in R^3")
    a1 = fl.parts[0].basis[:, 0]
    plane = fl.parts[1].basis
    # completing vector: plane basis column with the largest residual off a1
    resid = plane - np.outer(a1, a1 @ plane)
    idx = int(np.argmax(np.linalg.norm(resid, axis=0)))
    a2 = resid[:, idx]
    norm = np.linalg.norm(a2)
    if norm < 1e-12:
        raise PreconditionError("flag plane does not extend the flag line")
    return a1, a2 / norm


def triple_ratio(a: PartialFlag, b: PartialFlag, c: PartialFlag) -> CrossRatioValue:
    """Triple ratio of three (line < plane) flags in R^3.

    Product of three wedge ratios; the value does not depend on the
    choice of lifts or completing plane vectors.  Each of the six wedges
    must be nondegenerate (> 1e-12).
    """
    a1, a2 = _flag_line_plane(a)
    b1, b2 = _flag_line_plane(b)
    c1, c2 = _flag_line_plane(c)

    def w(u, v, z):
        return float(np.linalg.det(np.column_stack([u, v, z])))

    factors = [
        (w(a1, a2, b1), w(a1, a2, c1)),
        (w(b1, b2, c1), w(b1, b2, a1)),
        (w(c1, c2, a1), w(c1, c2, b1)),
    ]
    value = 1.0
    for num, den in factors:
        if abs(num) < 1e-12 or abs(den) < 1e-12:
            raise DomainError(
                "degenerate flag configuration: a triple-ratio wedge vanishes")
        value *= num / den
    return CrossRatioValue.finite(value)


def shear(a: PartialFlag, line_b: Subspace, c: PartialFlag,
          line_d: Subspace) -> tuple:
    """Shear pair of two flags and two lines in R^3.

    (log(-pcr over the line of A of: plane of A, l_B, l_D, line of C),
     log(-pcr over the line of C of: plane of C, l_B, l_D, line of A)).
    Zero exactly in harmonic position.  The cross ratios must be
    negative; otherwise the configuration is outside the domain.
    """
    for fl in (a, c):
        if fl.ambient_dim != 3 or fl.dims != (1, 2):
            raise PreconditionError("shear needs (line < plane) flags in R^3")
    for ln in (line_b, line_d):
        if ln.ambient_dim != 3 or ln.rank != 1:
            raise PreconditionError("shear needs lines in R^3")
    full = Subspace.full(3)

    def component(flag_from: PartialFlag, other_line: Subspace) -> float:
        val = pcr_quotient(flag_from.parts[0], full,
                           flag_from.parts[1], line_b, line_d, other_line)
        if val.is_infinite or float(val) >= 0.0:
            raise DomainError(
                f"shear cross ratio must be negative, got "
                f"{'infinity' if val.is_infinite else float(val):}")
        return float(np.log(-float(val)))

    return (component(a, c.parts[0]), component(c, a.parts[0]))
