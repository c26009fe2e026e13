"""Random positive definite correlation matrices with band-constrained entries.

A matrix is built in three steps:

1. a constant-correlation base, the Gram matrix of vectors
   ``v_i = c*u + sqrt(1 - c^2)*e_i`` with ``c^2`` at the band midpoint;
2. Hardin-style noise ``eps * (V^T V - I)`` where the columns of ``V`` are
   random unit vectors, with ``eps`` below both the base's smallest
   eigenvalue and its distance to the band edges;
3. conjugation by a random sign pattern, ``diag(s) S diag(s)``, which mixes
   positive and negative correlations without touching the spectrum.

With the default noise dimension of 3 the inner product of two independent
unit vectors is uniform on [-1, 1], so every off-diagonal perturbation is
marginally ``eps * Uniform(-1, 1)``.
"""

from __future__ import annotations

import csv
import enum
import functools
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import (
    BandInfeasibleError,
    InvalidArgumentError,
    InvalidDimensionError,
    MatrixGenerationError,
    NotPositiveDefiniteError,
)

PD_TOLERANCE = 1e-10
NOISE_SAFETY = 0.99
DEFAULT_NOISE_DIM = 3


class Regime(str, enum.Enum):
    HIGH = "high"
    LOW = "low"

    @classmethod
    def parse(cls, value) -> "Regime":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise InvalidArgumentError(f"unknown correlation regime {value!r}") from None


DEFAULT_BANDS = {
    Regime.HIGH: (0.8, 0.99),
    Regime.LOW: (0.1, 0.4),
}


@dataclass(frozen=True)
class NoiseBand:
    """Admissible range for the magnitude of every off-diagonal entry."""

    rho_min: float
    rho_max: float
    regime_label: Regime | None = None

    def __post_init__(self):
        if not (0.0 < self.rho_min <= self.rho_max <= 1.0):
            raise InvalidArgumentError(
                f"band must satisfy 0 < rho_min <= rho_max <= 1, got "
                f"[{self.rho_min}, {self.rho_max}]"
            )

    @classmethod
    def for_regime(cls, regime) -> "NoiseBand":
        regime = Regime.parse(regime)
        lo, hi = DEFAULT_BANDS[regime]
        return cls(lo, hi, regime)

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.rho_min + self.rho_max)

    @property
    def half_width(self) -> float:
        return 0.5 * (self.rho_max - self.rho_min)

    def contains(self, values) -> np.ndarray:
        mag = np.abs(values)
        return (mag >= self.rho_min) & (mag <= self.rho_max)


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    """Dense correlation matrix.

    ``eigenvalue_floor`` is a certified lower bound on the smallest eigenvalue
    when the construction provides one (None otherwise).
    """

    entries: np.ndarray
    eigenvalue_floor: float | None = None

    def __post_init__(self):
        arr = np.array(self.entries, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise InvalidDimensionError(f"expected a square matrix, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @classmethod
    def _wrap(cls, entries: np.ndarray, eigenvalue_floor=None) -> "CorrelationMatrix":
        # takes ownership of a freshly computed array instead of copying it
        entries.setflags(write=False)
        obj = object.__new__(cls)
        object.__setattr__(obj, "entries", entries)
        object.__setattr__(obj, "eigenvalue_floor", eigenvalue_floor)
        return obj

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def off_diagonal(self) -> np.ndarray:
        iu = np.triu_indices(self.dim, 1)
        return self.entries[iu]

    def min_eigenvalue(self) -> float:
        return min_eigenvalue(self.entries)


@dataclass(frozen=True, eq=False)
class SignPattern:
    signs: np.ndarray = field()

    def __post_init__(self):
        s = np.array(self.signs, dtype=np.float64).ravel()
        if not np.all((s == 1.0) | (s == -1.0)):
            raise InvalidArgumentError("sign pattern entries must be +1 or -1")
        s.setflags(write=False)
        object.__setattr__(self, "signs", s)

    @classmethod
    def random(cls, dim: int, rng: np.random.Generator) -> "SignPattern":
        return cls(2.0 * rng.integers(0, 2, size=dim) - 1.0)

    @classmethod
    def ones(cls, dim: int) -> "SignPattern":
        return cls(np.ones(dim))


def min_eigenvalue(mat) -> float:
    """Smallest eigenvalue of a symmetric matrix (LAPACK ``syevd``)."""
    mat = np.asarray(mat, dtype=np.float64)
    return float(np.linalg.eigvalsh(mat)[0])


def cholesky_factor(mat) -> np.ndarray:
    """Lower-triangular ``L`` with ``L @ L.T == mat``.

    Raises :class:`NotPositiveDefiniteError` naming the first pivot (0-based)
    that is not strictly positive.
    """
    mat = np.asarray(mat, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise InvalidDimensionError(f"expected a square matrix, got shape {mat.shape}")
    try:
        low = np.linalg.cholesky(mat)
    except np.linalg.LinAlgError:
        low = None
    if low is not None and np.all(np.diagonal(low) > 0) and np.all(np.isfinite(low)):
        return low
    _raise_failed_pivot(mat)
    raise AssertionError("unreachable")  # pragma: no cover


def _raise_failed_pivot(mat: np.ndarray):
    # plain row-by-row factorization, only used to locate the failing pivot
    n = mat.shape[0]
    low = np.zeros_like(mat)
    for j in range(n):
        d = mat[j, j] - low[j, :j] @ low[j, :j]
        if not d > 0 or not np.isfinite(d):
            raise NotPositiveDefiniteError(
                f"matrix is not positive definite: pivot {j} is {d:.3e}", pivot=j
            )
        low[j, j] = np.sqrt(d)
        low[j + 1 :, j] = (mat[j + 1 :, j] - low[j + 1 :, :j] @ low[j, :j]) / low[j, j]
    raise NotPositiveDefiniteError(
        "matrix is not positive definite (LAPACK factorization failed)", pivot=n - 1
    )


def generate_base_matrix(dim: int, band: NoiseBand, rng: np.random.Generator | None = None):
    """Constant-correlation base with every off-diagonal entry at the band midpoint.

    It is the Gram matrix of ``c*u + sqrt(1 - c^2)*e_i`` (``c^2`` = midpoint),
    so it is positive definite with smallest eigenvalue ``1 - midpoint``. The
    construction is deterministic; ``rng`` is accepted for signature symmetry
    with the other generators.
    """
    if dim < 2:
        raise InvalidDimensionError(f"dimension must be at least 2, got {dim}")
    return _constant_matrix(dim, band.midpoint)


@functools.lru_cache(maxsize=16)
def _constant_matrix(dim: int, rho: float) -> CorrelationMatrix:
    # cached: instances are immutable and the grid reuses a few sizes
    entries = np.full((dim, dim), rho)
    np.fill_diagonal(entries, 1.0)
    return CorrelationMatrix._wrap(entries, 1.0 - rho)


def band_margin(entries: np.ndarray, band: NoiseBand) -> float:
    """Smallest distance from an off-diagonal magnitude to the band edges.

    Negative when some entry already lies outside the band.
    """
    lo, hi = kernels.offdiag_abs_range(entries)
    if entries.shape[0] < 2:
        return np.inf
    return float(min(lo - band.rho_min, band.rho_max - hi))


def safe_noise_level(base: CorrelationMatrix, band: NoiseBand, pd_tol: float = PD_TOLERANCE) -> float:
    """Largest noise level (times a 0.99 safety factor) that keeps PD and band."""
    lam = base.eigenvalue_floor if base.eigenvalue_floor is not None else base.min_eigenvalue()
    margin = band_margin(base.entries, band)
    if margin < 0:
        raise BandInfeasibleError("base matrix already has entries outside the band")
    return max(0.0, NOISE_SAFETY * min(lam - pd_tol, margin))


def _unit_vectors(rng: np.random.Generator, noise_dim: int, dim: int) -> np.ndarray:
    vecs = rng.standard_normal((noise_dim, dim))
    norms = np.sqrt(np.einsum("ij,ij->j", vecs, vecs))
    return vecs / norms


def _check_band(entries: np.ndarray, band: NoiseBand):
    lo, hi = kernels.offdiag_abs_range(entries)
    if lo >= band.rho_min and hi <= band.rho_max:
        return
    n = entries.shape[0]
    iu = np.triu_indices(n, 1)
    ok = band.contains(entries[iu])
    if not np.all(ok):
        k = int(np.argmin(ok))
        i, j = int(iu[0][k]), int(iu[1][k])
        raise BandInfeasibleError(
            f"entry ({i}, {j}) = {entries[i, j]:.6g} lies outside "
            f"[{band.rho_min}, {band.rho_max}] in magnitude",
            entry=(i, j),
            value=float(entries[i, j]),
        )


def apply_banded_noise(
    base: CorrelationMatrix,
    band: NoiseBand,
    rng: np.random.Generator,
    epsilon: float | None = None,
    noise_dim: int = DEFAULT_NOISE_DIM,
    pd_tol: float = PD_TOLERANCE,
) -> CorrelationMatrix:
    """Perturb the off-diagonal entries by ``eps * <q_i, q_j>``.

    ``epsilon`` defaults to :func:`safe_noise_level`. An explicit value must
    stay below the base's smallest eigenvalue; if it is too large for the band
    the offending entry is reported through :class:`BandInfeasibleError`.
    """
    lam = base.eigenvalue_floor if base.eigenvalue_floor is not None else base.min_eigenvalue()
    if epsilon is None:
        epsilon = safe_noise_level(base, band, pd_tol)
    elif epsilon < 0:
        raise InvalidArgumentError(f"noise level must be nonnegative, got {epsilon}")
    elif epsilon > 0 and epsilon >= lam - pd_tol:
        raise InvalidArgumentError(
            f"noise level {epsilon} does not leave a positive definiteness margin "
            f"(smallest eigenvalue {lam:.6g})"
        )
    vecs = _unit_vectors(rng, noise_dim, base.dim)
    entries = kernels.gram_noise(base.entries, vecs, float(epsilon), np.ones(base.dim))
    _check_band(entries, band)
    return CorrelationMatrix(entries, eigenvalue_floor=lam - epsilon)


def apply_sign_pattern(mat: CorrelationMatrix, pattern: SignPattern) -> CorrelationMatrix:
    if pattern.signs.size != mat.dim:
        raise InvalidArgumentError(
            f"sign pattern has length {pattern.signs.size}, matrix has dimension {mat.dim}"
        )
    s = pattern.signs
    return CorrelationMatrix(mat.entries * np.outer(s, s), eigenvalue_floor=mat.eigenvalue_floor)


def generate_correlation_matrix(
    dim: int,
    band: NoiseBand,
    rng: np.random.Generator,
    noise_dim: int = DEFAULT_NOISE_DIM,
    signed: bool = True,
    max_attempts: int = 10,
    verify: bool = False,
) -> CorrelationMatrix:
    """Base, noise and random signs in a single fused pass.

    Equivalent to ``apply_sign_pattern(apply_banded_noise(base, ...), ...)``
    drawing the noise vectors first and the signs second. A draw that fails
    the band check or the eigenvalue certificate is redrawn from the same
    stream, up to ``max_attempts`` times. ``verify`` additionally computes the
    smallest eigenvalue explicitly.
    """
    base = generate_base_matrix(dim, band)
    eps = safe_noise_level(base, band)
    floor = base.eigenvalue_floor - eps
    last_error = None
    for _ in range(max_attempts):
        vecs = _unit_vectors(rng, noise_dim, dim)
        signs = SignPattern.random(dim, rng).signs if signed else np.ones(dim)
        entries = kernels.gram_noise(base.entries, vecs, eps, signs)
        try:
            if not floor > PD_TOLERANCE:
                raise NotPositiveDefiniteError("eigenvalue certificate below tolerance", pivot=-1)
            _check_band(entries, band)
            if verify:
                lam = min_eigenvalue(entries)
                if not lam > PD_TOLERANCE:
                    raise NotPositiveDefiniteError(f"smallest eigenvalue {lam:.3e}", pivot=-1)
        except (BandInfeasibleError, NotPositiveDefiniteError) as exc:
            last_error = exc
            continue
        return CorrelationMatrix._wrap(entries, floor)
    raise MatrixGenerationError(
        f"no valid {dim}x{dim} matrix after {max_attempts} attempts: {last_error}"
    )


def write_matrix_csv(path, mat) -> None:
    """Row-major CSV, 17 significant digits, no header."""
    entries = mat.entries if isinstance(mat, CorrelationMatrix) else np.asarray(mat)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for row in entries:
            writer.writerow([repr(float(v)) for v in row])


def read_matrix_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = [[float(v) for v in row] for row in csv.reader(fh) if row]
    return np.array(rows, dtype=np.float64)
