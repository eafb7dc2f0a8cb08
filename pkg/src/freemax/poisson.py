"""Random-matrix realizations of the free Poisson and extremal processes.

A finite partition (atoms with nonnegative masses) indexes everything.
Wishart-type blocks Gamma_j Gamma_j^T with variance-1/N Gaussian entries
realize the free Poisson process over the partition: each atom owns a
fixed block of columns, so the process is additive over disjoint subsets
by construction.  Range projections of those matrices realize the
projection-valued upper extremal process, and quantile-diagonal matrices
under independent Haar rotations realize the triangular one.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from typing import Dict, Iterable, Sequence, Tuple

import numpy as np
from scipy import integrate

from .cdf import Cdf, CdfError, ks_distance
from .spectral import (
    HermitianMatrix,
    Projection,
    SeedLike,
    derive_seed,
    haar_orthogonal,
    proj_join,
    rng_from_seed,
    spectral_max,
)
from .util import parallel_map

__all__ = [
    "Partition",
    "ProcessRecord",
    "ProcessReport",
    "RANGE_TOL",
    "sample_free_poisson_matrix",
    "range_projection",
    "mp_cdf",
    "triangular_law_cdf",
    "realize_triangular_process",
    "triangular_snapshot",
    "extremal_process_report",
]

#: Eigenvalues above RANGE_TOL * lambda_max count as range directions.
RANGE_TOL = 1e-8


@dataclass(frozen=True)
class Partition:
    """Finite measure space: ordered atoms with nonnegative masses."""

    atoms: Tuple[Tuple[str, float], ...]

    def __post_init__(self):
        seen = set()
        for atom_id, mass in self.atoms:
            if atom_id in seen:
                raise CdfError(f"duplicate atom id {atom_id!r}")
            seen.add(atom_id)
            if mass < 0:
                raise CdfError(f"atom {atom_id!r} has negative mass")

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[str, float]]) -> "Partition":
        return cls(tuple((str(i), float(m)) for i, m in pairs))

    @classmethod
    def from_json(cls, text: str) -> "Partition":
        raw = json.loads(text)
        if not isinstance(raw, dict) or "atoms" not in raw:
            raise CdfError("partition JSON must be an object with an 'atoms' array")
        return cls.from_pairs((a["id"], a["mass"]) for a in raw["atoms"])

    def to_json(self) -> str:
        return json.dumps(
            {"atoms": [{"id": i, "mass": m} for i, m in self.atoms]}
        )

    @property
    def ids(self) -> Tuple[str, ...]:
        return tuple(i for i, _ in self.atoms)

    @property
    def total_mass(self) -> float:
        return float(sum(m for _, m in self.atoms))

    def mass(self, subset: Iterable[str]) -> float:
        chosen = self._validate(subset)
        return float(sum(m for i, m in self.atoms if i in chosen))

    def _validate(self, subset: Iterable[str]) -> frozenset:
        chosen = frozenset(str(s) for s in subset)
        unknown = chosen - set(self.ids)
        if unknown:
            raise CdfError(f"unknown atom ids: {sorted(unknown)}")
        return chosen

    def column_counts(self, n: int) -> Dict[str, int]:
        """Columns allotted per atom: round(mass * N), fixed by the partition."""
        counts = {}
        for atom_id, mass in self.atoms:
            c = int(round(mass * n))
            if mass > 0 and c == 0:
                warnings.warn(
                    f"atom {atom_id!r} with mass {mass} receives no columns at N={n}",
                    stacklevel=2,
                )
            counts[atom_id] = c
        return counts


def _atom_block(partition: Partition, index: int, count: int, n: int, seed: SeedLike) -> np.ndarray:
    """The atom's dedicated Gaussian block, variance 1/N, drawn by split seed."""
    rng = rng_from_seed(seed, index)
    return rng.standard_normal((n, count)) / math.sqrt(n)


def sample_free_poisson_matrix(
    partition: Partition, subset: Iterable[str], n: int, seed: SeedLike
) -> HermitianMatrix:
    """Wishart-type matrix for a subset: sum of its atoms' Gamma_j Gamma_j^T.

    Atom blocks depend only on (seed, atom index), so disjoint subsets
    with the same seed are built from disjoint column blocks and the
    process is additive over them (bitwise so whenever the accumulation
    trees coincide, e.g. singleton unions; always so up to roundoff).
    """
    if n < 8:
        raise CdfError("free Poisson sampling needs N >= 8")
    chosen = partition._validate(subset)
    counts = partition.column_counts(n)
    total = np.zeros((n, n))
    for index, (atom_id, _) in enumerate(partition.atoms):
        if atom_id not in chosen:
            continue
        c = counts[atom_id]
        if c == 0:
            continue
        block = _atom_block(partition, index, c, n, seed)
        total = total + block @ block.T
    return HermitianMatrix(total)


def range_projection(a: HermitianMatrix, tol: float = RANGE_TOL) -> Projection:
    """Projection onto the span of eigenvectors with eigenvalue > tol * max."""
    lam = a.eigenvalues
    lam_max = float(lam[-1]) if lam.size else 0.0
    if lam_max <= 0.0:
        if lam.size and float(lam[0]) < -tol:
            raise CdfError("range projection needs a positive semidefinite input")
        return Projection.zero(a.n)
    if float(lam[0]) < -tol * max(1.0, lam_max):
        raise CdfError("range projection needs a positive semidefinite input")
    mask = lam > tol * lam_max
    return Projection(a.eigenvectors[:, mask], dim=a.n)


# ----------------------------------------------------------------------
# limit laws
# ----------------------------------------------------------------------
class MpCdf(Cdf):
    """Free Poisson (Marchenko-Pastur) law with rate a and jump size 1.

    Atom max(0, 1-a) at zero plus the semicircle-type density
    sqrt((lam+ - x)(x - lam-)) / (2 pi x) on [(1-sqrt a)^2, (1+sqrt a)^2],
    integrated by adaptive quadrature.
    """

    backend = "parametric"

    def __init__(self, a_param: float):
        super().__init__()
        if not a_param > 0:
            raise CdfError("free Poisson rate must be positive")
        self.rate = float(a_param)
        root = math.sqrt(self.rate)
        self.lam_minus = (1.0 - root) ** 2
        self.lam_plus = (1.0 + root) ** 2
        self.atom = max(0.0, 1.0 - self.rate)
        self._alpha_cache = 0.0 if self.atom > 0.0 else self.lam_minus
        self._omega_cache = self.lam_plus

    def density(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        inside = (x > self.lam_minus) & (x < self.lam_plus)
        safe = np.where(inside, x, 1.0)
        out = np.sqrt(np.clip((self.lam_plus - safe) * (safe - self.lam_minus), 0.0, None))
        return np.where(inside, out / (2.0 * math.pi * safe), 0.0)

    def _segment(self, lo: float, hi: float) -> float:
        if hi <= lo:
            return 0.0
        val, _ = integrate.quad(
            lambda s: float(self.density(np.asarray(s))),
            lo,
            hi,
            epsabs=1e-10,
            epsrel=1e-10,
            limit=200,
        )
        return float(val)

    def _value(self, x):
        flat = np.ravel(x)
        order = np.argsort(flat, kind="stable")
        out = np.empty_like(flat)
        acc = 0.0
        prev = self.lam_minus
        for pos in order:
            xi = flat[pos]
            if xi < 0.0:
                out[pos] = 0.0
                continue
            if xi >= self.lam_plus:
                out[pos] = 1.0
                continue
            hi = min(max(xi, self.lam_minus), self.lam_plus)
            if hi > prev:
                acc += self._segment(prev, hi)
                prev = hi
            out[pos] = min(self.atom + acc, 1.0)
        return out.reshape(np.shape(x))

    def _left(self, x):
        vals = self._value(x)
        return np.where(np.asarray(x) == 0.0, 0.0, vals)

    def conditional_nonzero(self) -> Cdf:
        """The law conditioned on the continuous (nonzero) part."""
        if self.atom <= 0.0:
            return self
        parent = self
        scale = 1.0 - parent.atom

        from .cdf import FunctionCdf

        def value_fn(x):
            return np.clip((parent._value(x) - parent.atom) / scale, 0.0, 1.0)

        return FunctionCdf(value_fn, alpha=parent.lam_minus, omega=parent.lam_plus)


def mp_cdf(a_param: float) -> MpCdf:
    """Free Poisson (Marchenko-Pastur) CDF with rate ``a_param``."""
    return MpCdf(a_param)


class TriangularCdf(Cdf):
    """Marginal law of the triangular extremal process at total mass m.

    The tail at t is min((1-t) m, 1) on [0, 1): an atom 1-m at zero plus
    uniform density m on (0, 1) when m <= 1, uniform on [1 - 1/m, 1]
    when m > 1.
    """

    backend = "parametric"

    def __init__(self, m: float):
        super().__init__()
        if not m > 0:
            raise CdfError("triangular law mass must be positive")
        self.m = float(m)
        self._alpha_cache = max(0.0, 1.0 - 1.0 / self.m)
        self._omega_cache = 1.0

    def _value(self, x):
        return np.where(x < 0.0, 0.0, np.clip((1.0 - self.m) + self.m * x, 0.0, 1.0))

    def _tail(self, x):
        return np.where(x < 0.0, 1.0, np.clip(self.m * (1.0 - x), 0.0, 1.0))

    def _tail_affine(self, a, b, x):
        inner = np.clip(self.m * ((1.0 - b) - a * x), 0.0, 1.0)
        return np.where(a * x + b < 0.0, 1.0, inner)

    def _tail_gap(self, h):
        return np.clip(self.m * h, 0.0, 1.0)

    def _left(self, x):
        vals = self._value(x)
        if self.m < 1.0:
            return np.where(np.asarray(x) == 0.0, 0.0, vals)
        return vals

    def _quantile(self, p):
        return np.clip((p - (1.0 - self.m)) / self.m, self._alpha_cache, 1.0)


def triangular_law_cdf(m: float) -> TriangularCdf:
    return TriangularCdf(m)


# ----------------------------------------------------------------------
# triangular process realization
# ----------------------------------------------------------------------
def realize_triangular_process(
    partition: Partition, n: int, seed: SeedLike
) -> Dict[str, HermitianMatrix]:
    """One matrix per atom: quantile-diagonal spectrum of its triangular
    law under an independent Haar rotation (freeness surrogate)."""
    if n < 8:
        raise CdfError("triangular process realization needs N >= 8")
    out = {}
    probs = (np.arange(n) + 0.5) / n
    for index, (atom_id, mass) in enumerate(partition.atoms):
        if mass <= 0:
            out[atom_id] = HermitianMatrix(np.zeros((n, n)))
            continue
        law = TriangularCdf(mass)
        spectrum = np.asarray(law.quantile(probs), dtype=float)
        u = haar_orthogonal(n, seed, index)
        out[atom_id] = HermitianMatrix.from_spectrum(spectrum, u)
    return out


def triangular_snapshot(
    realization: Dict[str, HermitianMatrix], subset: Iterable[str]
) -> HermitianMatrix:
    """Process value over a subset: spectral max across its atoms."""
    wanted = set(str(s) for s in subset)
    unknown = wanted - set(realization)
    if unknown:
        raise CdfError(f"unknown atom ids: {sorted(unknown)}")
    keys = [k for k in realization if k in wanted]
    if not keys:
        raise CdfError("snapshot needs a nonempty subset")
    result = realization[keys[0]]
    for key in keys[1:]:
        result = spectral_max(result, realization[key])
    return result


# ----------------------------------------------------------------------
# process report
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class ProcessRecord:
    subset: Tuple[str, ...]
    n_dim: int
    tau_y: float
    expected: float
    join_additivity_ok: bool
    ks_distance: float

    def to_dict(self) -> dict:
        return {
            "subset": list(self.subset),
            "N": self.n_dim,
            "tau_Y": self.tau_y,
            "expected": self.expected,
            "join_additivity_ok": self.join_additivity_ok,
            "ks_distance": self.ks_distance,
        }


@dataclass(frozen=True)
class ProcessReport:
    records: Tuple[ProcessRecord, ...]
    trials: int
    seed: int
    warnings: Tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "seed": self.seed,
            "records": [r.to_dict() for r in self.records],
            "warnings": list(self.warnings),
        }


def _subset_rank(partition, subset, n, seed) -> tuple[int, np.ndarray]:
    pi = sample_free_poisson_matrix(partition, subset, n, seed)
    lam = pi.eigenvalues
    lam_max = float(lam[-1])
    if lam_max <= 0.0:
        return 0, lam
    return int(np.count_nonzero(lam > RANGE_TOL * lam_max)), lam


def extremal_process_report(
    partition: Partition,
    subsets: Sequence[Iterable[str]],
    n: int,
    trials: int,
    seed: SeedLike,
) -> ProcessReport:
    """Trace law, join additivity, and spectrum fit for each subset.

    Per subset: the mean normalized rank of the range projection across
    trials against min(mass, 1); for multi-atom subsets, whether on the
    first trial the range of the subset matrix equals the join of its
    atoms' ranges (integer rank equality); and the mean KS distance of
    the nonzero spectrum to the conditional free Poisson law.
    """
    if trials < 1:
        raise CdfError("at least one trial required")
    seed = derive_seed(seed) if not isinstance(seed, int) else int(seed)
    canonical = [tuple(i for i in partition.ids if i in partition._validate(s)) for s in subsets]
    starved = tuple(
        f"atom {atom_id!r} with mass {mass} receives no columns at N={n}"
        for atom_id, mass in partition.atoms
        if mass > 0 and int(round(mass * n)) == 0
    )

    def run_subset(subset: Tuple[str, ...]) -> ProcessRecord:
        mu = partition.mass(subset)
        expected = min(mu, 1.0)
        law = mp_cdf(mu) if mu > 0 else None
        cond = law.conditional_nonzero() if law is not None else None
        taus = []
        ks_vals = []
        for t in range(trials):
            trial_seed = derive_seed(seed, t)
            rank, lam = _subset_rank(partition, subset, n, trial_seed)
            taus.append(rank / n)
            if cond is not None and rank > 0:
                nonzero = lam[lam > RANGE_TOL * float(lam[-1])]
                ks_vals.append(ks_distance(nonzero, cond))
        join_ok = True
        if len(subset) > 1:
            trial_seed = derive_seed(seed, 0)
            whole = sample_free_poisson_matrix(partition, subset, n, trial_seed)
            joined = None
            for atom in subset:
                y = range_projection(sample_free_poisson_matrix(partition, [atom], n, trial_seed))
                joined = y if joined is None else proj_join(joined, y)
            join_ok = bool(range_projection(whole).rank == joined.rank)
        return ProcessRecord(
            subset=subset,
            n_dim=n,
            tau_y=float(np.mean(taus)),
            expected=expected,
            join_additivity_ok=join_ok,
            ks_distance=float(np.mean(ks_vals)) if ks_vals else 1.0,
        )

    records = tuple(parallel_map(run_subset, canonical))
    return ProcessReport(records=records, trials=trials, seed=seed, warnings=starved)
