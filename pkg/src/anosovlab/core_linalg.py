"""Exterior-algebra and subspace numerics.

Everything downstream (cross ratios, transversality defects, boundary
flags) reduces to a handful of primitives on orthonormal subspace bases:
wedge volumes, principal angles, numerical intersections and quotient
projections.  Subspaces are always stored re-orthonormalized, so defect
values are comparable across configurations and wedge volumes never
overflow; quantities that depend on basis scalings are only ever used in
ratios where the scalings cancel.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    AmbiguityError,
    DimensionError,
    GapError,
    InputError,
    NumericError,
    PreconditionError,
)

__all__ = [
    "Mat",
    "Subspace",
    "PartialFlag",
    "ModulusCluster",
    "EigenDecomposition",
    "TRANSVERSALITY_ACCEPT",
    "TRANSVERSALITY_REJECT",
    "transversality_verdict",
    "wedge_volume",
    "direct_sum_defect",
    "intersect",
    "quotient_project",
    "grassmann_distance",
    "min_angle",
    "svd",
    "eig_by_modulus",
    "power_normalized",
]

# Direct sums are accepted above the first threshold, rejected below the
# second; in between the verdict is explicitly "ambiguous".  The tested
# conditions are open, so a three-way answer is the honest one.
TRANSVERSALITY_ACCEPT = 1e-7
TRANSVERSALITY_REJECT = 1e-9

ORTHONORMALITY_TOL = 1e-12
CONTAINMENT_TOL = 1e-9


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


def transversality_verdict(defect: float,
                           accept: float = TRANSVERSALITY_ACCEPT,
                           reject: float = TRANSVERSALITY_REJECT) -> str:
    """Classify a direct-sum defect as ``direct``/``degenerate``/``ambiguous``."""
    if defect > accept:
        return "direct"
    if defect < reject:
        return "degenerate"
    return "ambiguous"


@dataclass(frozen=True)
class Mat:
    """Dense square real matrix, optionally carrying a log scale.

    The matrix represented is ``exp(log_scale) * entries``; the scale is
    tracked separately so long products and high powers stay inside
    floating-point range.  All ratio-type quantities (singular gaps,
    eigenvalue ratios, length functions, cross ratios of images) are
    scale-free, so most consumers can ignore ``log_scale``.
    """

    entries: np.ndarray
    log_scale: float = 0.0

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionError(f"matrix must be square, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InputError("matrix entries must be finite")
        object.__setattr__(self, "entries", _readonly(a))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def identity(cls, d: int) -> "Mat":
        return cls(np.eye(d))

    def __matmul__(self, other: "Mat") -> "Mat":
        return Mat(self.entries @ other.entries,
                   self.log_scale + other.log_scale)

    def inverse(self) -> "Mat":
        return Mat(np.linalg.inv(self.entries), -self.log_scale)

    def transpose(self) -> "Mat":
        return Mat(self.entries.T, self.log_scale)

    def log_abs_det(self) -> float:
        sign, logdet = np.linalg.slogdet(self.entries)
        if sign == 0:
            return -np.inf
        return logdet + self.dim * self.log_scale

    def is_unimodular(self, tol: float = 1e-8) -> bool:
        """Check |det - 1| <= tol * sigma_1^d, the group-element tag."""
        sigma1 = float(np.linalg.norm(self.entries, 2)) * np.exp(self.log_scale)
        det = np.linalg.det(self.entries) * np.exp(self.dim * self.log_scale)
        return abs(det - 1.0) <= tol * max(1.0, sigma1) ** self.dim


def as_matrix(m) -> np.ndarray:
    """Accept a Mat or a raw square array and return the entries."""
    if isinstance(m, Mat):
        return m.entries
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected square matrix, got shape {a.shape}")
    return a


def _orthonormal_basis(a: np.ndarray, rank_rtol: float = 1e-10):
    """Orthonormalize the columns of ``a``, detecting rank by SVD."""
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.shape[1] == 0:
        return a.reshape(a.shape[0], 0), 0
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return a[:, :0], 0
    rank = int(np.sum(s > rank_rtol * s[0]))
    return u[:, :rank], rank


@dataclass(frozen=True)
class Subspace:
    """Linear subspace of R^d stored as an orthonormal basis matrix.

    ``basis`` has shape (d, k); the rank-0 subspace (k = 0) is allowed,
    it occurs naturally as an intersection result and as the vacuous
    summand of boundary-index transversality sums.
    """

    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float)
        if b.ndim == 1:
            b = b[:, None]
        if b.ndim != 2:
            raise DimensionError(f"basis must be 2-d, got shape {b.shape}")
        d, k = b.shape
        if k > d:
            raise DimensionError(f"rank {k} exceeds ambient dimension {d}")
        if k > 0:
            gram = b.T @ b
            if np.max(np.abs(gram - np.eye(k))) > ORTHONORMALITY_TOL:
                raise InputError(
                    "basis columns are not orthonormal; use Subspace.from_spanning")
        object.__setattr__(self, "basis", _readonly(b))

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    @classmethod
    def from_spanning(cls, vectors, ambient_dim: int | None = None,
                      rank_rtol: float = 1e-10) -> "Subspace":
        """Subspace spanned by the given (column) vectors, re-orthonormalized."""
        a = np.asarray(vectors, dtype=float)
        if a.ndim == 1:
            a = a[:, None]
        if ambient_dim is not None and a.shape[0] != ambient_dim:
            raise DimensionError(
                f"vectors live in R^{a.shape[0]}, expected R^{ambient_dim}")
        q, _ = _orthonormal_basis(a, rank_rtol)
        return cls(q)

    @classmethod
    def zero(cls, d: int) -> "Subspace":
        return cls(np.zeros((d, 0)))

    @classmethod
    def full(cls, d: int) -> "Subspace":
        return cls(np.eye(d))

    @classmethod
    def coordinate(cls, d: int, *indices: int) -> "Subspace":
        """Span of the listed standard basis vectors (0-indexed)."""
        return cls(np.eye(d)[:, list(indices)])

    def contains(self, other: "Subspace", tol: float = CONTAINMENT_TOL) -> bool:
        """True when ``other`` lies inside self up to residual ``tol``."""
        if other.ambient_dim != self.ambient_dim:
            raise DimensionError("ambient dimensions differ")
        if other.rank == 0:
            return True
        if self.rank == 0:
            return False
        resid = other.basis - self.basis @ (self.basis.T @ other.basis)
        return float(np.linalg.norm(resid, 2)) <= tol

    def apply(self, m) -> "Subspace":
        """Image of the subspace under an invertible matrix, re-orthonormalized."""
        a = as_matrix(m)
        if a.shape[0] != self.ambient_dim:
            raise DimensionError("matrix and subspace dimensions differ")
        return Subspace.from_spanning(a @ self.basis)


def span(*vectors, d: int | None = None) -> Subspace:
    """Convenience constructor: subspace spanned by row-listed vectors."""
    a = np.array(vectors, dtype=float).T
    return Subspace.from_spanning(a, ambient_dim=d)


@dataclass(frozen=True)
class PartialFlag:
    """Nested subspaces with strictly increasing ranks."""

    parts: tuple

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise InputError("a flag needs at least one part")
        d = parts[0].ambient_dim
        for p in parts:
            if p.ambient_dim != d:
                raise DimensionError("flag parts have mixed ambient dimensions")
        ranks = [p.rank for p in parts]
        if any(b <= a for a, b in zip(ranks, ranks[1:])):
            raise InputError(f"flag ranks must strictly increase, got {ranks}")
        for small, big in zip(parts, parts[1:]):
            if not big.contains(small):
                raise PreconditionError(
                    f"flag part of rank {small.rank} is not contained in the "
                    f"rank-{big.rank} part")
        object.__setattr__(self, "parts", parts)

    @property
    def dims(self) -> tuple:
        return tuple(p.rank for p in self.parts)

    @property
    def ambient_dim(self) -> int:
        return self.parts[0].ambient_dim

    def part(self, rank: int) -> Subspace:
        for p in self.parts:
            if p.rank == rank:
                return p
        raise InputError(f"flag has no part of rank {rank}; dims {self.dims}")


def flag(*parts) -> PartialFlag:
    return PartialFlag(tuple(parts))


# ---------------------------------------------------------------------------
# wedge volumes and direct sums
# ---------------------------------------------------------------------------

def _concat_bases(parts) -> np.ndarray:
    parts = list(parts)
    if not parts:
        raise InputError("empty list of subspaces")
    d = parts[0].ambient_dim
    for p in parts:
        if p.ambient_dim != d:
            raise DimensionError("subspaces have mixed ambient dimensions")
    mats = [p.basis for p in parts if p.rank > 0]
    if not mats:
        return np.zeros((d, 0))
    return np.hstack(mats)


def wedge_volume(parts) -> float:
    """Determinant of the concatenated orthonormal bases.

    The ranks must sum to the ambient dimension.  The value depends on
    each part's basis choice only through an overall scaling per part, so
    it is meaningful only inside ratios where those scalings cancel
    (cross ratios, triple ratios).
    """
    b = _concat_bases(parts)
    d = b.shape[0]
    if b.shape[1] != d:
        raise DimensionError(
            f"ranks sum to {b.shape[1]}, ambient dimension is {d}")
    return float(np.linalg.det(b))


def direct_sum_defect(parts) -> float:
    """Smallest singular value of the concatenated orthonormal bases.

    Returns a value in [0, 1]: zero iff the sum of the subspaces is not
    direct, one iff they are mutually orthogonal.  The empty or all-rank-0
    sum is trivially direct (defect 1).
    """
    b = _concat_bases(parts)
    d, s = b.shape
    if s > d:
        raise DimensionError(f"ranks sum to {s} > ambient dimension {d}")
    if s == 0:
        return 1.0
    sv = np.linalg.svd(b, compute_uv=False)
    return float(sv[-1])


# ---------------------------------------------------------------------------
# principal angles, intersections, quotients
# ---------------------------------------------------------------------------

def principal_cosines(v: Subspace, w: Subspace) -> np.ndarray:
    """Cosines of the principal angles, descending (closest pair first)."""
    if v.ambient_dim != w.ambient_dim:
        raise DimensionError("ambient dimensions differ")
    if v.rank == 0 or w.rank == 0:
        return np.zeros(0)
    s = np.linalg.svd(v.basis.T @ w.basis, compute_uv=False)
    return np.clip(s, 0.0, 1.0)


def intersect(v: Subspace, w: Subspace, tol: float = 1e-8,
              ambiguity_band: float = 100.0) -> Subspace:
    """Numerical intersection of two subspaces.

    Keeps the principal directions whose angle cosine is >= 1 - tol.
    Cosines inside the band (1 - ambiguity_band*tol, 1 - tol) mean the
    configuration is too close to the cutoff to call; an AmbiguityError
    carrying the cosine spectrum is raised so the caller can inspect it.
    """
    if v.ambient_dim != w.ambient_dim:
        raise DimensionError("ambient dimensions differ")
    d = v.ambient_dim
    if v.rank == 0 or w.rank == 0:
        return Subspace.zero(d)
    if v.rank == d:
        return w
    if w.rank == d:
        return v
    u, s, _ = np.linalg.svd(v.basis.T @ w.basis)
    s = np.clip(s, 0.0, 1.0)
    accept = s >= 1.0 - tol
    fuzzy = (~accept) & (s > 1.0 - ambiguity_band * tol)
    if np.any(fuzzy):
        raise AmbiguityError(
            "principal-angle cosines fall inside the ambiguity band around "
            f"1 - {tol:g}", spectrum=s.copy())
    k = int(np.sum(accept))
    if k == 0:
        return Subspace.zero(d)
    q, rank = _orthonormal_basis(v.basis @ u[:, :k])
    if rank != k:
        raise NumericError("intersection basis lost rank during orthonormalization")
    return Subspace(q)


def quotient_complement(x_low: Subspace, x_high: Subspace) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of X_low inside X_high."""
    if not x_high.contains(x_low):
        raise PreconditionError("X_low is not contained in X_high")
    h, l = x_high.rank, x_low.rank
    if h == l:
        return np.zeros((x_high.ambient_dim, 0))
    b = x_high.basis
    if l > 0:
        b = b - x_low.basis @ (x_low.basis.T @ b)
    q, rank = _orthonormal_basis(b)
    if rank != h - l:
        raise NumericError(
            f"complement of rank-{l} inside rank-{h} came out rank {rank}")
    return q


def quotient_project(v: Subspace, x_low: Subspace, x_high: Subspace,
                     rank_cut: float = 1e-8) -> Subspace:
    """Image of V in the quotient X_high / X_low.

    Returns the image in the coordinates of an orthonormal basis of the
    orthogonal complement of X_low inside X_high; the ambient dimension
    of the result is rank(X_high) - rank(X_low).  The image rank drops by
    dim(V ∩ X_low).
    """
    if not x_high.contains(v):
        raise PreconditionError("V is not contained in X_high")
    if x_low.rank > 0 and x_low.contains(v):
        raise PreconditionError("V is contained in X_low; quotient image is zero")
    comp = quotient_complement(x_low, x_high)
    coords = comp.T @ v.basis
    q, rank = _orthonormal_basis(coords, rank_rtol=rank_cut)
    if rank == 0:
        raise PreconditionError("quotient image of V is numerically zero")
    return Subspace(q)


def grassmann_distance(x: Subspace, y: Subspace) -> float:
    """Sine of the largest principal angle; a metric on each Grassmannian."""
    if x.ambient_dim != y.ambient_dim:
        raise DimensionError("ambient dimensions differ")
    if x.rank != y.rank:
        raise DimensionError(f"ranks differ: {x.rank} vs {y.rank}")
    if x.rank == 0:
        return 0.0
    angles = scipy.linalg.subspace_angles(x.basis, y.basis)
    return float(np.sin(angles[0]))


def min_angle(x: Subspace, y: Subspace) -> float:
    """Smallest principal angle in radians; zero iff the intersection is nontrivial."""
    if x.ambient_dim != y.ambient_dim:
        raise DimensionError("ambient dimensions differ")
    if x.rank == 0 or y.rank == 0:
        return np.pi / 2
    angles = scipy.linalg.subspace_angles(x.basis, y.basis)
    return float(angles[-1])


# ---------------------------------------------------------------------------
# matrix factorizations
# ---------------------------------------------------------------------------

def svd(m) -> tuple:
    """Singular value decomposition (U, sigma, Vt) with M = U diag(sigma) Vt.

    Validates the reconstruction residual against 1e-10 * ||M||.
    """
    a = as_matrix(m)
    u, s, vt = np.linalg.svd(a)
    scale = s[0] if s.size else 0.0
    resid = np.linalg.norm(u @ np.diag(s) @ vt - a, 2)
    if scale > 0 and resid > 1e-10 * scale:
        raise NumericError(f"SVD reconstruction residual {resid:g} too large")
    return u, s, vt


@dataclass(frozen=True)
class ModulusCluster:
    """One group of eigenvalues of (numerically) equal modulus."""

    modulus: float
    eigenvalues: tuple
    basis: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.eigenvalues)


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues sorted by descending modulus plus per-cluster invariant bases."""

    values: tuple
    clusters: tuple

    @property
    def moduli(self) -> np.ndarray:
        return np.abs(np.array(self.values))

    def pairs(self, rtol: float = 1e-8) -> list:
        """Distinct eigenvalues with multiplicities, descending modulus."""
        out = []
        scale = max(self.moduli.max(), 1e-300)
        for lam in self.values:
            if out and abs(lam - out[-1][0]) <= rtol * scale:
                out[-1] = (out[-1][0], out[-1][1] + 1)
            else:
                out.append((lam, 1))
        return out


def _sorted_eigenvalues(a: np.ndarray) -> np.ndarray:
    vals = np.linalg.eigvals(a)
    order = np.lexsort((-vals.imag, -vals.real, -np.abs(vals)))
    return vals[order]


def _modulus_clusters(moduli: np.ndarray, rtol: float) -> list:
    """Split a descending modulus sequence into tied groups."""
    groups = []
    start = 0
    scale = max(moduli[0], 1e-300)
    for i in range(1, len(moduli)):
        if moduli[start] - moduli[i] > rtol * scale:
            groups.append((start, i))
            start = i
    groups.append((start, len(moduli)))
    return groups


def eig_by_modulus(m, cluster_rtol: float = 1e-8) -> EigenDecomposition:
    """Eigenvalues ordered by descending modulus with cluster bases.

    Each modulus cluster gets an orthonormal basis of the sum of the
    generalized eigenspaces of its eigenvalues, obtained from a reordered
    real Schur form.  Postconditions checked: |det(M - lambda I)| <=
    1e-8 ||M||^d per eigenvalue, and per-cluster invariance residual
    ||(I - P P^T) M P|| <= 1e-8 ||M||.
    """
    a = as_matrix(m)
    d = a.shape[0]
    vals = _sorted_eigenvalues(a)
    norm = float(np.linalg.norm(a, 2))
    if norm > 0:
        budget = 1e-8 * max(norm, 1.0) ** d
        for lam in vals:
            resid = abs(np.linalg.det(a - lam * np.eye(d)))
            if resid > budget:
                raise NumericError(
                    f"characteristic-polynomial residual {resid:g} exceeds "
                    f"{budget:g} at eigenvalue {lam}",
                    diagnostics={"eigenvalue": lam, "residual": resid})
    moduli = np.abs(vals)
    clusters = []
    for start, stop in _modulus_clusters(moduli, cluster_rtol):
        lo = moduli[stop - 1] - cluster_rtol * max(norm, 1.0)
        hi = moduli[start] + cluster_rtol * max(norm, 1.0)

        def in_cluster(re, im, lo=lo, hi=hi):
            mod = np.hypot(re, im)
            return bool((mod >= lo) & (mod <= hi))

        _, z, sdim = scipy.linalg.schur(a, output="real", sort=in_cluster)
        if sdim != stop - start:
            raise NumericError(
                f"Schur reordering selected {sdim} eigenvalues for a cluster "
                f"of size {stop - start}",
                diagnostics={"moduli": moduli.tolist()})
        basis = z[:, :sdim]
        resid = np.linalg.norm(a @ basis - basis @ (basis.T @ a @ basis), 2)
        if norm > 0 and resid > 1e-8 * norm:
            raise NumericError(
                f"cluster basis invariance residual {resid:g} exceeds "
                f"{1e-8 * norm:g}")
        clusters.append(ModulusCluster(
            modulus=float(moduli[start:stop].mean()),
            eigenvalues=tuple(vals[start:stop]),
            basis=_readonly(basis)))
    return EigenDecomposition(values=tuple(vals), clusters=tuple(clusters))


def power_normalized(m, n: int) -> Mat:
    """M^n with per-step renormalization by the largest singular value.

    Returns a Mat whose ``entries`` have unit spectral norm and whose
    ``log_scale`` tracks the removed factor, so powers up to n ~ 60 never
    overflow.  Only scale-free quantities (singular directions, gap
    ratios) should be read off the result.
    """
    if n < 0:
        return power_normalized(Mat(np.linalg.inv(as_matrix(m))), -n)
    a = as_matrix(m)
    log_scale = n * (m.log_scale if isinstance(m, Mat) else 0.0)
    d = a.shape[0]
    acc = np.eye(d)
    for _ in range(n):
        acc = a @ acc
        s = np.linalg.norm(acc, 2)
        if s == 0:
            raise NumericError("matrix power collapsed to zero")
        acc = acc / s
        log_scale += np.log(s)
    return Mat(acc, log_scale)
