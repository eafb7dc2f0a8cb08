"""Finite-dimensional spectral order: projections, joins/meets, a v b.

Hermitian matrices carry an eagerly computed spectral resolution;
projections are stored as orthonormal range bases.  The lattice meet uses
principal angles, the join a rank-revealing orthonormalization, and the
spectral max/min of two matrices are assembled directly from joins of
upper spectral projections, so the output's eigenvalues are exactly
members of the inputs' spectra (no re-diagonalization noise).  Haar
sampling and derived seeds make every randomized experiment replayable.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .cdf import CdfError, SteppedCdf

__all__ = [
    "RngSeed",
    "HermitianMatrix",
    "Projection",
    "spectral_projection",
    "proj_join",
    "proj_meet",
    "range_contains",
    "spectral_max",
    "spectral_min",
    "spectral_leq",
    "pnorm_approx",
    "pnorm_approx_shifted",
    "logexp_approx",
    "haar_projection",
    "haar_orthogonal",
    "haar_conjugate",
    "general_position_check",
    "empirical_spectral_cdf",
    "derive_seed",
    "rng_from_seed",
    "read_matrix_csv",
    "write_matrix_csv",
    "write_eigenvalues_csv",
]

#: A singular value counts as nonzero iff it exceeds this times the largest.
RANK_RTOL = 1e-9
#: Principal-angle cosines at least 1 - ANGLE_TOL indicate a shared direction.
ANGLE_TOL = 1e-9
#: Eigenvalues within this of a threshold go to the closed side of the interval.
EIG_TIE_TOL = 1e-9

HERMITIAN_TOL = 1e-12

SeedLike = Union[int, "RngSeed"]


def _seed_int(seed: SeedLike) -> int:
    if isinstance(seed, RngSeed):
        return int(seed.seed)
    return int(seed)


def rng_from_seed(seed: SeedLike, *path: int) -> np.random.Generator:
    """Deterministic generator for a seed and a split path."""
    ss = np.random.SeedSequence(entropy=_seed_int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(seed: SeedLike, *path: int) -> int:
    """Stable 63-bit child seed for independent sub-experiments."""
    ss = np.random.SeedSequence(entropy=_seed_int(seed), spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> 1)


@dataclass(frozen=True)
class RngSeed:
    """64-bit seed plus the (fixed, splittable) generator identity."""

    seed: int
    algorithm: str = "pcg64-seedseq"

    def generator(self, *path: int) -> np.random.Generator:
        return rng_from_seed(self.seed, *path)

    def derive(self, *path: int) -> "RngSeed":
        return RngSeed(derive_seed(self.seed, *path), self.algorithm)


# ----------------------------------------------------------------------
# core types
# ----------------------------------------------------------------------
class HermitianMatrix:
    """Self-adjoint matrix with a cached spectral resolution.

    Real-symmetric by default; pass a complex array for the Hermitian
    backend.  ``tau`` is the normalized trace Tr/N.  Instances are
    immutable: the arrays are set once and never written again.
    """

    def __init__(self, array: np.ndarray):
        array = np.asarray(array)
        if array.ndim != 2 or array.shape[0] != array.shape[1]:
            raise CdfError("Hermitian input must be a square matrix")
        scale = max(1.0, float(np.max(np.abs(array))) if array.size else 1.0)
        if float(np.max(np.abs(array - array.conj().T))) > HERMITIAN_TOL * scale:
            raise CdfError("matrix is not self-adjoint within tolerance")
        array = 0.5 * (array + array.conj().T)
        if np.isrealobj(array):
            array = array.astype(float, copy=False)
        eigenvalues, eigenvectors = np.linalg.eigh(array)
        self._init_from(array, eigenvalues, eigenvectors)

    def _init_from(self, array, eigenvalues, eigenvectors):
        self.array = array
        self.eigenvalues = np.asarray(eigenvalues, dtype=float)
        self.eigenvectors = eigenvectors
        self.n = array.shape[0]

    @classmethod
    def from_spectrum(cls, eigenvalues, eigenvectors) -> "HermitianMatrix":
        """Assemble from known spectral data (kept exactly, no re-eigh)."""
        eigenvalues = np.asarray(eigenvalues, dtype=float).ravel()
        vecs = np.asarray(eigenvectors)
        n = vecs.shape[0]
        if vecs.shape != (n, n) or eigenvalues.size != n:
            raise CdfError("spectral data must be a full n x n eigensystem")
        gram_err = float(np.max(np.abs(vecs.conj().T @ vecs - np.eye(eigenvalues.size))))
        if gram_err > 1e-8:
            raise CdfError("eigenvector matrix is not orthonormal")
        order = np.argsort(eigenvalues, kind="stable")
        eigenvalues = eigenvalues[order]
        vecs = vecs[:, order]
        array = (vecs * eigenvalues) @ vecs.conj().T
        array = 0.5 * (array + array.conj().T)
        if np.isrealobj(array):
            array = array.astype(float, copy=False)
        obj = cls.__new__(cls)
        obj._init_from(array, eigenvalues, vecs)
        return obj

    @property
    def tau(self) -> float:
        """Normalized trace Tr/N."""
        return float(np.real(np.trace(self.array))) / self.n

    def apply(self, fn: Callable[[np.ndarray], np.ndarray]) -> "HermitianMatrix":
        """Functional calculus: apply ``fn`` to the eigenvalues."""
        return HermitianMatrix.from_spectrum(fn(self.eigenvalues), self.eigenvectors)

    def shifted(self, c: float) -> "HermitianMatrix":
        return HermitianMatrix.from_spectrum(self.eigenvalues + c, self.eigenvectors)

    def neg(self) -> "HermitianMatrix":
        return HermitianMatrix.from_spectrum(-self.eigenvalues, self.eigenvectors)

    def __repr__(self):
        lo = self.eigenvalues[0] if self.n else math.nan
        hi = self.eigenvalues[-1] if self.n else math.nan
        return f"HermitianMatrix(n={self.n}, spectrum=[{lo:.4g}, {hi:.4g}])"


class Projection:
    """Orthogonal projection stored as an N x r orthonormal range basis."""

    def __init__(self, basis: np.ndarray, dim: Optional[int] = None):
        basis = np.asarray(basis)
        if basis.ndim != 2:
            raise CdfError("projection basis must be a 2-D array")
        n = basis.shape[0] if dim is None else int(dim)
        if basis.shape[0] != n:
            raise CdfError("projection basis has the wrong ambient dimension")
        r = basis.shape[1]
        if r:
            gram_err = float(np.max(np.abs(basis.conj().T @ basis - np.eye(r))))
            if gram_err > 1e-10:
                raise CdfError("projection basis columns are not orthonormal")
        self.basis = basis
        self.n = n
        self.rank = r

    @classmethod
    def zero(cls, n: int) -> "Projection":
        return cls(np.zeros((n, 0)))

    @classmethod
    def identity(cls, n: int) -> "Projection":
        return cls(np.eye(n))

    @property
    def matrix(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    @property
    def tau(self) -> float:
        return self.rank / self.n

    def __repr__(self):
        return f"Projection(n={self.n}, rank={self.rank})"


def _check_same_dim(a, b):
    if a.n != b.n:
        raise CdfError(f"dimension mismatch: {a.n} vs {b.n}")


# ----------------------------------------------------------------------
# spectral projections and the projection lattice
# ----------------------------------------------------------------------
_KINDS = ("closed_up", "open_up", "closed_down", "open_down")


def spectral_projection(a: HermitianMatrix, t: float, kind: str = "closed_up") -> Projection:
    """Projection onto the eigenspace of an interval anchored at t.

    Eigenvalues within EIG_TIE_TOL of t count as equal to t and go to the
    closed side, which makes the open/closed distinction deterministic.
    """
    if kind not in _KINDS:
        raise CdfError(f"unknown spectral interval kind {kind!r}")
    lam = a.eigenvalues
    if kind == "closed_up":
        mask = lam > t - EIG_TIE_TOL
    elif kind == "open_up":
        mask = lam > t + EIG_TIE_TOL
    elif kind == "closed_down":
        mask = lam < t + EIG_TIE_TOL
    else:
        mask = lam < t - EIG_TIE_TOL
    return Projection(a.eigenvectors[:, mask], dim=a.n)


def proj_join(p: Projection, q: Projection) -> Projection:
    """Lattice join: projection onto the closed span of both ranges."""
    _check_same_dim(p, q)
    if p.rank == 0:
        return q
    if q.rank == 0:
        return p
    stacked = np.hstack([p.basis, q.basis])
    u, s, _ = np.linalg.svd(stacked, full_matrices=False)
    keep = s > RANK_RTOL * s[0]
    return Projection(u[:, keep], dim=p.n)


def proj_meet(p: Projection, q: Projection) -> Projection:
    """Lattice meet: projection onto the range intersection.

    Principal directions with cosine >= 1 - ANGLE_TOL are taken as common
    to both ranges.
    """
    _check_same_dim(p, q)
    if p.rank == 0 or q.rank == 0:
        return Projection.zero(p.n)
    overlap = p.basis.conj().T @ q.basis
    u, s, _ = np.linalg.svd(overlap, full_matrices=False)
    keep = s >= 1.0 - ANGLE_TOL
    if not np.any(keep):
        return Projection.zero(p.n)
    basis = p.basis @ u[:, keep]
    # re-orthonormalize for hygiene; ranks are decided above
    qbasis, _ = np.linalg.qr(basis)
    return Projection(qbasis, dim=p.n)


def range_contains(outer: Projection, inner: Projection) -> bool:
    """True when range(inner) lies inside range(outer) (angle tolerance)."""
    _check_same_dim(outer, inner)
    if inner.rank == 0:
        return True
    if outer.rank < inner.rank:
        return False
    s = np.linalg.svd(outer.basis.conj().T @ inner.basis, compute_uv=False)
    return s.size >= inner.rank and bool(np.min(s) >= 1.0 - ANGLE_TOL)


def general_position_check(p: Projection, q: Projection, tol: float = 1e-9) -> bool:
    """Trace law test: tau(join) = min(tau p + tau q, 1) and the meet dual."""
    _check_same_dim(p, q)
    join_tau = proj_join(p, q).tau
    meet_tau = proj_meet(p, q).tau
    want_join = min(p.tau + q.tau, 1.0)
    want_meet = max(0.0, p.tau + q.tau - 1.0)
    return abs(join_tau - want_join) <= tol and abs(meet_tau - want_meet) <= tol


# ----------------------------------------------------------------------
# spectral max / min
# ----------------------------------------------------------------------
def _merge_batches(values: np.ndarray) -> list[tuple[float, np.ndarray]]:
    """Group sorted-descending values that agree within EIG_TIE_TOL."""
    batches = []
    start = 0
    for i in range(1, values.size + 1):
        if i == values.size or values[start] - values[i] > EIG_TIE_TOL:
            batches.append((float(values[start]), np.arange(start, i)))
            start = i
    return batches


def spectral_max(a: HermitianMatrix, b: HermitianMatrix) -> HermitianMatrix:
    """The spectral-order supremum a v b.

    Its upper spectral projections are the joins of the inputs': sweeping
    the merged spectrum downward, each eigenvector that enlarges the
    running joined range contributes an output eigenvalue equal to the
    level at which it entered.  Equivalently the output is
    sum_i t_i (Q_{i-1} - Q_i) for the join family Q_i, assembled here by
    incremental orthonormalization so output eigenvalues are exact copies
    of input ones.
    """
    _check_same_dim(a, b)
    n = a.n
    lam = np.concatenate([a.eigenvalues, b.eigenvalues])
    vecs = np.hstack([a.eigenvectors, b.eigenvectors])
    order = np.argsort(-lam, kind="stable")
    lam = lam[order]
    vecs = vecs[:, order]
    basis = np.zeros((n, 0), dtype=vecs.dtype)
    out_vals: list[float] = []
    out_cols: list[np.ndarray] = []
    for value, idx in _merge_batches(lam):
        if basis.shape[1] >= n:
            break
        for j in idx:
            col = vecs[:, j]
            # two rounds of Gram-Schmidt keep the basis orthonormal
            for _ in range(2):
                if basis.shape[1]:
                    col = col - basis @ (basis.conj().T @ col)
            norm = float(np.linalg.norm(col))
            if norm > 1e-8:
                col = col / norm
                basis = np.hstack([basis, col[:, None]])
                out_vals.append(value)
                out_cols.append(col)
            if basis.shape[1] >= n:
                break
    if basis.shape[1] < n:
        # residual directions sit below every level where the joined
        # family grows; they belong to the lowest merged value
        q, _ = np.linalg.qr(np.hstack([basis, np.eye(n, dtype=basis.dtype)]))
        fill = q[:, basis.shape[1] : n]
        floor = float(lam[-1])
        for k in range(fill.shape[1]):
            out_vals.append(floor)
            out_cols.append(fill[:, k])
    return HermitianMatrix.from_spectrum(np.asarray(out_vals), np.column_stack(out_cols))


def spectral_min(a: HermitianMatrix, b: HermitianMatrix) -> HermitianMatrix:
    """The spectral-order infimum, via (-a) v (-b) = -(a ^ b)."""
    return spectral_max(a.neg(), b.neg()).neg()


def spectral_leq(a: HermitianMatrix, b: HermitianMatrix) -> bool:
    """Spectral order a < b: every upper spectral projection of a is
    dominated by the matching one of b.

    Both projection families are piecewise constant in t, so checking the
    closed and open intervals at each point of the merged spectra decides
    the relation everywhere.
    """
    _check_same_dim(a, b)
    thresholds = np.unique(np.concatenate([a.eigenvalues, b.eigenvalues]))
    for t in thresholds:
        for kind in ("closed_up", "open_up"):
            pa = spectral_projection(a, float(t), kind)
            pb = spectral_projection(b, float(t), kind)
            if not range_contains(pb, pa):
                return False
    return True


# ----------------------------------------------------------------------
# monotone approximations of the supremum
# ----------------------------------------------------------------------
def _psd_scale(a: HermitianMatrix, b: HermitianMatrix) -> float:
    lo = min(float(a.eigenvalues[0]), float(b.eigenvalues[0]))
    hi = max(float(a.eigenvalues[-1]), float(b.eigenvalues[-1]))
    tol = 1e-10 * max(1.0, abs(hi))
    if lo < -tol:
        raise CdfError(
            "pnorm approximation needs positive semidefinite inputs; shift by c*I first"
        )
    return hi


def pnorm_approx(a: HermitianMatrix, b: HermitianMatrix, p: float) -> HermitianMatrix:
    """(  (a^p + b^p)/2 )^(1/p): increases to a v b as p grows (PSD inputs).

    Powers are taken relative to the joint spectral radius so that large p
    underflows gracefully instead of overflowing.
    """
    _check_same_dim(a, b)
    if not p >= 1.0:
        raise CdfError("pnorm approximation needs p >= 1")
    s = _psd_scale(a, b)
    if s <= 0.0:
        return HermitianMatrix(np.zeros((a.n, a.n)))

    def power(lams):
        ratio = np.clip(lams, 0.0, None) / s
        with np.errstate(divide="ignore"):
            return np.where(ratio > 0.0, np.exp(p * np.log(ratio)), 0.0)

    mean = HermitianMatrix(0.5 * (a.apply(power).array + b.apply(power).array))

    def root(lams):
        lams = np.clip(lams, 0.0, None)
        with np.errstate(divide="ignore"):
            return np.where(lams > 0.0, s * np.exp(np.log(lams) / p), 0.0)

    return mean.apply(root)


def pnorm_approx_shifted(a: HermitianMatrix, b: HermitianMatrix, p: float) -> HermitianMatrix:
    """Shift-invariant wrapper: a v b = ((a + cI) v (b + cI)) - cI."""
    c = max(0.0, -float(a.eigenvalues[0]), -float(b.eigenvalues[0])) + 1.0
    return pnorm_approx(a.shifted(c), b.shifted(c), p).shifted(-c)


def logexp_approx(a: HermitianMatrix, b: HermitianMatrix, p: float) -> HermitianMatrix:
    """log(exp(pa) + exp(pb)) / p, stabilized by the joint max shift.

    Converges to a v b with an O(log 2 / p) defect.  The max shift rules
    out overflow, but the eigensolver resolves the stabilized sum only
    down to eps * ||sum||, so spectrum more than ~ln(1/eps)/p (about
    36/p) below the joint maximum saturates at that resolution floor;
    keep p times the spectral diameter under ~36 for full accuracy.
    """
    _check_same_dim(a, b)
    if not p >= 1.0:
        raise CdfError("logexp approximation needs p >= 1")
    m = max(float(a.eigenvalues[-1]), float(b.eigenvalues[-1]))
    ea = a.apply(lambda lam: np.exp(p * (lam - m)))
    eb = b.apply(lambda lam: np.exp(p * (lam - m)))
    total = HermitianMatrix(ea.array + eb.array)
    lam_top = float(total.eigenvalues[-1])
    if not (math.isfinite(lam_top) and lam_top > 0.0):
        raise CdfError(
            "logexp approximation produced a non-finite stabilized sum "
            f"(top eigenvalue {lam_top!r}) at p={p}"
        )
    floor = np.finfo(float).eps * lam_top
    return total.apply(lambda lam: m + np.log(np.maximum(lam, floor)) / p)


# ----------------------------------------------------------------------
# Haar sampling
# ----------------------------------------------------------------------
def haar_orthogonal(
    n: int, seed: SeedLike, *path: int, complex_field: bool = False
) -> np.ndarray:
    """Haar orthogonal (or, behind the flag, unitary) matrix.

    QR of a Gaussian with the diagonal phase of R pushed back into Q,
    which is what makes the distribution exactly Haar.
    """
    rng = rng_from_seed(seed, *path)
    if complex_field:
        g = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2)
        q, r = np.linalg.qr(g)
        d = np.diag(r)
        return q * (d / np.abs(d))
    g = rng.standard_normal((n, n))
    q, r = np.linalg.qr(g)
    d = np.diag(r)
    return q * np.where(d < 0.0, -1.0, 1.0)


def haar_projection(
    n: int, r: int, seed: SeedLike, *path: int, complex_field: bool = False
) -> Projection:
    """Projection onto the span of an orthonormalized N x r Gaussian."""
    if not 0 <= r <= n:
        raise CdfError("projection rank must satisfy 0 <= r <= N")
    if r == 0:
        return Projection.zero(n)
    rng = rng_from_seed(seed, *path)
    g = rng.standard_normal((n, r))
    if complex_field:
        g = g + 1j * rng.standard_normal((n, r))
    q, _ = np.linalg.qr(g)
    return Projection(q, dim=n)


def haar_conjugate(
    a: HermitianMatrix, seed: SeedLike, *path: int, complex_field: bool = False
) -> HermitianMatrix:
    """U a U* for Haar U; the spectrum is carried over exactly."""
    u = haar_orthogonal(a.n, seed, *path, complex_field=complex_field)
    return HermitianMatrix.from_spectrum(a.eigenvalues, u @ a.eigenvectors)


# ----------------------------------------------------------------------
# spectral measures
# ----------------------------------------------------------------------
def empirical_spectral_cdf(a: HermitianMatrix) -> SteppedCdf:
    """Stepped CDF with jump (multiplicity)/N at each distinct eigenvalue."""
    lam = np.sort(a.eigenvalues)
    scale = max(1.0, float(np.max(np.abs(lam))) if lam.size else 1.0)
    atol = 1e-12 * scale
    xs: list[float] = []
    counts: list[int] = []
    for value in lam:
        if xs and value - xs[-1] <= atol:
            counts[-1] += 1
        else:
            xs.append(float(value))
            counts.append(1)
    return SteppedCdf(xs, np.cumsum(counts) / lam.size)


# ----------------------------------------------------------------------
# matrix file interfaces
# ----------------------------------------------------------------------
def write_matrix_csv(a: HermitianMatrix, path: str) -> str:
    """Dense entries, row-major, one matrix row per CSV row."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        for row in np.asarray(a.array, dtype=float):
            writer.writerow([repr(float(v)) for v in row])
    return path


def read_matrix_csv(path: str) -> HermitianMatrix:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if row:
                rows.append([float(v) for v in row])
    return HermitianMatrix(np.asarray(rows))


def write_eigenvalues_csv(a: HermitianMatrix, path: str) -> str:
    """Compact spectral export: rows ``index,lambda``."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "lambda"])
        for i, lam in enumerate(a.eigenvalues):
            writer.writerow([i, repr(float(lam))])
    return path
