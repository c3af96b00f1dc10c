"""Gap functionals, attractors and length functions of a single matrix.

The two basic objects are the singular-value side (Cartan attractors
``U_k``, gap ratios ``sigma_k/sigma_{k+1}``) and the eigenvalue side
(attracting invariant subspaces, signed/modulus eigenvalue ratios, the
root and weight length functions).  Boundary flags of a representation
at fixed points are attracting spaces of the corresponding matrices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core_linalg import (
    Mat,
    Subspace,
    as_matrix,
    eig_by_modulus,
    grassmann_distance,
    svd,
)
from .errors import GapError, NumericError

__all__ = [
    "SpectralGaps",
    "LengthPair",
    "singular_gap",
    "cartan_attractor",
    "attracting_space",
    "eigenvalue_ratios",
    "length_functions",
]

SIGMA_GAP_MIN = 1e-9     # relative singular gap needed for a Cartan attractor
EIGEN_GAP_MIN = 1e-8     # relative modulus gap needed for an attracting space
REAL_IMAG_TOL = 1e-8     # |Im| below this times the modulus counts as real


@dataclass(frozen=True)
class SpectralGaps:
    """Gap data of one matrix at index k.

    ``lambda_ratio_signed`` is present only when the k-th and (k+1)-st
    eigenvalues are both real; signed statements about eigenvalue ratios
    only concern real spectra.
    """

    k: int
    sigma_ratio: float
    lambda_ratio_signed: float | None
    lambda_ratio_modulus: float


@dataclass(frozen=True)
class LengthPair:
    """Weight length log|l1...lk / (ld...l(d-k+1))| and root length log|lk/l(k+1)|."""

    weight_length: float
    root_length: float


def _check_index(k: int, d: int):
    if not 1 <= k < d:
        raise GapError(f"gap index k={k} outside 1..{d - 1}", index=k)


def singular_gap(m, k: int) -> float:
    """sigma_k / sigma_{k+1} of the matrix (1-indexed)."""
    a = as_matrix(m)
    _check_index(k, a.shape[0])
    _, s, _ = svd(a)
    if s[k] < 1e-300:
        raise NumericError(
            f"sigma_{k + 1} = {s[k]:g} underflows after renormalization")
    return float(s[k - 1] / s[k])


def cartan_attractor(m, k: int) -> Subspace:
    """Span of the k leading left singular vectors.

    Requires an actual singular gap of index k; without one the attractor
    depends on the arbitrary choices inside the decomposition.
    """
    a = as_matrix(m)
    _check_index(k, a.shape[0])
    u, s, _ = svd(a)
    if s[k] <= 0 or s[k - 1] / s[k] <= 1.0 + SIGMA_GAP_MIN:
        raise GapError(
            f"no singular gap of index {k}: ratio {s[k - 1] / max(s[k], 1e-300):.6g}",
            index=k, ratio=float(s[k - 1] / max(s[k], 1e-300)))
    return Subspace(u[:, :k])


def _eigen_moduli(a: np.ndarray) -> np.ndarray:
    vals = np.linalg.eigvals(a)
    return np.sort(np.abs(vals))[::-1]


def attracting_space(m, k: int, tol: float = 1e-12,
                     max_iter: int = 10_000) -> Subspace:
    """Invariant subspace of the k largest-modulus eigenvalues.

    Computed by orthogonal subspace iteration with per-step
    renormalization, seeded by the Cartan attractor when a singular gap
    is available.  Convergence is declared when successive iterates are
    closer than ``tol`` in Grassmannian distance; the invariance residual
    ||(I - P P^T) M P|| <= 1e-8 ||M|| is certified at the end.
    """
    a = as_matrix(m)
    d = a.shape[0]
    _check_index(k, d)
    moduli = _eigen_moduli(a)
    if moduli[k] <= 0 or moduli[k - 1] <= moduli[k] * (1.0 + EIGEN_GAP_MIN):
        raise GapError(
            f"no eigenvalue-modulus gap of index {k}: "
            f"|lambda_{k}|/|lambda_{k + 1}| = "
            f"{moduli[k - 1] / max(moduli[k], 1e-300):.6g}",
            index=k,
            ratio=float(moduli[k - 1] / max(moduli[k], 1e-300)))
    try:
        q = cartan_attractor(a, k).basis
    except GapError:
        u, _, _ = svd(a)
        q = u[:, :k]
    prev = Subspace(q)
    for iteration in range(max_iter):
        q, _ = np.linalg.qr(a @ prev.basis)
        cur = Subspace(q)
        dist = grassmann_distance(prev, cur)
        prev = cur
        if dist < tol:
            break
    p = prev.basis
    norm = np.linalg.norm(a, 2)
    resid = np.linalg.norm(a @ p - p @ (p.T @ a @ p), 2)
    if resid > 1e-8 * norm:
        raise NumericError(
            f"subspace iteration did not converge at index {k}: invariance "
            f"residual {resid:g} after {iteration + 1} iterations",
            diagnostics={"residual": float(resid), "iterations": iteration + 1,
                         "gap_ratio": float(moduli[k - 1] / moduli[k])})
    return prev


def eigenvalue_ratios(m, k: int) -> SpectralGaps:
    """Populate SpectralGaps from the SVD and the eigenvalue list."""
    a = as_matrix(m)
    d = a.shape[0]
    _check_index(k, d)
    dec = eig_by_modulus(a)
    vals = np.array(dec.values)
    lk, lk1 = vals[k - 1], vals[k]
    modulus_ratio = float(abs(lk) / abs(lk1)) if abs(lk1) > 0 else np.inf
    signed = None
    if (abs(lk.imag) <= REAL_IMAG_TOL * max(abs(lk), 1e-300)
            and abs(lk1.imag) <= REAL_IMAG_TOL * max(abs(lk1), 1e-300)
            and lk1.real != 0.0):
        signed = float(lk.real / lk1.real)
        if abs(abs(signed) - modulus_ratio) > 1e-9 * max(modulus_ratio, 1.0):
            raise NumericError(
                "signed and modulus eigenvalue ratios disagree beyond tolerance")
    return SpectralGaps(k=k, sigma_ratio=singular_gap(a, k),
                        lambda_ratio_signed=signed,
                        lambda_ratio_modulus=modulus_ratio)


def length_functions(m, k: int) -> LengthPair:
    """Weight and root lengths at index k, from eigenvalue moduli only."""
    a = as_matrix(m)
    d = a.shape[0]
    _check_index(k, d)
    moduli = _eigen_moduli(a)
    if moduli[-1] < 1e-300:
        raise NumericError("matrix has an eigenvalue of modulus zero")
    logs = np.log(moduli)
    weight = float(np.sum(logs[:k]) - np.sum(logs[d - k:]))
    root = float(logs[k - 1] - logs[k])
    return LengthPair(weight_length=weight, root_length=root)
