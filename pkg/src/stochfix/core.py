"""Systems of stochastic fixed-point equations and per-draw spectral quantities.

A system describes, for every equation ``r`` (0-based), the identity in law

    X_r  =  sum_j A_{r,j} X^{(j)}_{l_r(j)} + b_r

with independent copies on the right.  The coefficient law of equation ``r``
is given by a *batch sampler*: a callable ``sampler(rng, n)`` returning
``(A, b)`` with ``A.shape == (n, J_r, d, d)`` and ``b.shape == (n, d)``.
Term ``j`` of equation ``r`` always refers to equation ``index_map[r][j]``;
terms that are absent in a particular draw are zero matrices.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import DomainError

Sampler = Callable[[np.random.Generator, int], "tuple[np.ndarray, np.ndarray]"]
ComplexSampler = Callable[[np.random.Generator, int], "tuple[np.ndarray, np.ndarray]"]

DEFAULT_TRUNCATION = 64
MAX_DIM = 4


@dataclass(frozen=True)
class Guard:
    """Which summability condition keeps the series finite.

    ``kind == "finite"``: finitely many nonzero terms a.s., all within the
    truncation.  ``kind == "tail"``: infinitely many terms whose operator
    norms decay; ``eps`` is the moment order and ``tail_bound`` must describe
    the error incurred by cutting the series at the truncation.
    """

    kind: str = "finite"
    eps: float | None = None
    tail_bound: str | None = None

    def __post_init__(self):
        if self.kind not in ("finite", "tail"):
            raise DomainError(f"unknown guard kind {self.kind!r}")
        if self.kind == "tail":
            if self.eps is None or not self.eps > 0:
                raise DomainError("tail-bounded guard needs eps > 0")
            if not self.tail_bound:
                raise DomainError("tail-bounded guard must document its truncation error")


FINITE_TERMS = Guard()


def tail_bounded(eps: float, tail_bound: str) -> Guard:
    return Guard("tail", eps, tail_bound)


@dataclass(frozen=True, eq=False)
class EquationSystem:
    """A samplable system of ``m`` fixed-point equations on ``R^d``.

    ``target_mean`` (shape ``(m, d)``), when given, pins the first moment of
    the solution the solver is asked to find; systems whose solutions are
    unique only among laws with a prescribed mean set it.
    """

    m: int
    d: int
    index_map: tuple[tuple[int, ...], ...]
    samplers: tuple[Sampler, ...]
    truncation: int = DEFAULT_TRUNCATION
    guard: Guard = FINITE_TERMS
    name: str = "custom"
    target_mean: np.ndarray | None = None
    params: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.m < 1 or self.d < 1 or self.truncation < 1:
            raise DomainError("need m >= 1, d >= 1 and truncation >= 1")
        if self.d > MAX_DIM:
            raise DomainError(f"d = {self.d} exceeds the supported maximum {MAX_DIM}")
        object.__setattr__(self, "index_map", tuple(tuple(int(i) for i in row) for row in self.index_map))
        object.__setattr__(self, "samplers", tuple(self.samplers))
        if len(self.index_map) != self.m or len(self.samplers) != self.m:
            raise DomainError("index_map and samplers need one entry per equation")
        for r, row in enumerate(self.index_map):
            if not row:
                raise DomainError(f"equation {r} has no terms")
            if len(row) > self.truncation:
                raise DomainError(f"equation {r} has {len(row)} terms, above truncation {self.truncation}")
            if any(not 0 <= i < self.m for i in row):
                raise DomainError(f"equation {r} refers outside [0, {self.m})")
        if self.target_mean is not None:
            tm = np.asarray(self.target_mean, dtype=float).reshape(self.m, self.d)
            tm.setflags(write=False)
            object.__setattr__(self, "target_mean", tm)

    def n_terms(self, r: int) -> int:
        return len(self.index_map[self._check_r(r)])

    def _check_r(self, r: int) -> int:
        if not (isinstance(r, (int, np.integer)) and 0 <= r < self.m):
            raise DomainError(f"equation index {r!r} not in [0, {self.m})")
        return int(r)

    def sample(self, r: int, rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Draw ``n`` independent coefficient realizations of equation ``r``."""
        r = self._check_r(r)
        A, b = self.samplers[r](rng, n)
        A = np.asarray(A, dtype=float)
        b = np.asarray(b, dtype=float)
        J = len(self.index_map[r])
        if A.shape != (n, J, self.d, self.d) or b.shape != (n, self.d):
            raise DomainError(
                f"sampler of equation {r} returned shapes {A.shape}, {b.shape}; "
                f"expected {(n, J, self.d, self.d)}, {(n, self.d)}"
            )
        return A, b


# --------------------------------------------------------------------------
# singular values


def _as_matrix(matrix) -> np.ndarray:
    a = np.asarray(matrix, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError("matrix has non-finite entries")
    return a


def singular_extremes(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Smallest and largest singular values over the last two axes."""
    A = np.asarray(A, dtype=float)
    if A.shape[-1] == 1:
        s = np.abs(A[..., 0, 0])
        return s, s
    sv = np.linalg.svd(A, compute_uv=False)
    return sv[..., -1], sv[..., 0]


def min_gain(matrix) -> float:
    """``min_{|t|=1} |A^T t|``, the smallest singular value."""
    return float(singular_extremes(_as_matrix(matrix))[0])


def op_norm(matrix) -> float:
    """``max_{|t|=1} |A^T t|``, the largest singular value."""
    return float(singular_extremes(_as_matrix(matrix))[1])


# --------------------------------------------------------------------------
# draws and summaries


@dataclass(frozen=True, eq=False)
class CoefficientDraw:
    matrices: np.ndarray  # (J, d, d)
    shift: np.ndarray  # (d,)
    alphas: np.ndarray  # (J,)
    opnorms: np.ndarray  # (J,)

    @classmethod
    def from_arrays(cls, matrices, shift) -> "CoefficientDraw":
        A = np.array(matrices, dtype=float)
        if A.ndim == 1:
            A = A.reshape(-1, 1, 1)
        b = np.array(shift, dtype=float).reshape(-1)
        if A.ndim != 3 or A.shape[1] != A.shape[2] or A.shape[1] != b.shape[0]:
            raise DomainError("matrices must be (J, d, d) with a matching shift")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise DomainError("non-finite coefficients")
        lo, hi = singular_extremes(A)
        for arr in (A, b, lo, hi):
            arr.setflags(write=False)
        return cls(A, b, lo, hi)

    def __len__(self) -> int:
        return self.matrices.shape[0]


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    closed_lo: bool = False
    closed_hi: bool = False

    def contains(self, x):
        x = np.asarray(x)
        lo_ok = x >= self.lo if self.closed_lo else x > self.lo
        hi_ok = x <= self.hi if self.closed_hi else x < self.hi
        return lo_ok & hi_ok


OPEN_UNIT = Interval(0.0, 1.0)
HALF_OPEN_UNIT = Interval(0.0, 1.0, closed_hi=True)


@dataclass(frozen=True)
class SpectralSummary:
    alpha_max: float
    alpha_sec: float
    n_interval: int


def top_two(alphas: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Largest and second-largest entries along the last axis (missing -> 0)."""
    a = np.asarray(alphas, dtype=float)
    if a.shape[-1] == 1:
        return a[..., 0], np.zeros(a.shape[:-1])
    part = -np.partition(-a, 1, axis=-1)
    return part[..., 0], part[..., 1]


def count_in(alphas: np.ndarray, opnorms: np.ndarray, interval: Interval) -> np.ndarray:
    """N_r(I) per draw: terms whose min gain and op norm both lie in ``interval``."""
    return np.sum(interval.contains(alphas) & interval.contains(opnorms), axis=-1)


def spectral_summary(draw: CoefficientDraw, interval: Interval = OPEN_UNIT) -> SpectralSummary:
    amax, asec = top_two(draw.alphas)
    return SpectralSummary(float(amax), float(asec), int(count_in(draw.alphas, draw.opnorms, interval)))


def sample_draw(system: EquationSystem, r: int, rng: np.random.Generator) -> CoefficientDraw:
    """One realization ``((A_{r,j})_j, b_r)`` with its spectral statistics."""
    A, b = system.sample(r, rng, 1)
    return CoefficientDraw.from_arrays(A[0], b[0])


# --------------------------------------------------------------------------
# complex systems


def complex_matrices(V) -> np.ndarray:
    """Real 2x2 representation ``[[x, -y], [y, x]]`` of ``V = x + iy`` (broadcast)."""
    V = np.asarray(V, dtype=complex)
    out = np.empty(V.shape + (2, 2))
    out[..., 0, 0] = V.real
    out[..., 0, 1] = -V.imag
    out[..., 1, 0] = V.imag
    out[..., 1, 1] = V.real
    return out


def embed_complex(
    index_map: Sequence[Sequence[int]],
    samplers: Sequence[ComplexSampler],
    *,
    name: str = "complex",
    target_mean=None,
    truncation: int = DEFAULT_TRUNCATION,
    params: Mapping | None = None,
) -> EquationSystem:
    """Embed a system over C with scalar coefficients into R^2.

    Each complex sampler returns ``(V, B)`` with ``V.shape == (n, J)`` and
    ``B.shape == (n,)``.  ``target_mean`` may be given as complex numbers.
    """

    def wrap(cs):
        def real_sampler(rng, n):
            V, B = cs(rng, n)
            B = np.asarray(B, dtype=complex)
            return complex_matrices(V), np.stack([B.real, B.imag], axis=-1)

        return real_sampler

    tm = None
    if target_mean is not None:
        z = np.asarray(target_mean, dtype=complex).reshape(-1)
        tm = np.stack([z.real, z.imag], axis=-1)
    return EquationSystem(
        m=len(index_map),
        d=2,
        index_map=tuple(tuple(row) for row in index_map),
        samplers=tuple(wrap(s) for s in samplers),
        truncation=truncation,
        name=name,
        target_mean=tm,
        params=dict(params or {}),
    )


# --------------------------------------------------------------------------
# finitely supported laws


def finite_law_sampler(probs, matrices, shifts) -> Sampler:
    """Sampler for a coefficient law with finitely many atoms.

    ``matrices[k]`` is the ``(J, d, d)`` term list of atom ``k`` and
    ``shifts[k]`` its shift vector; atom ``k`` has probability ``probs[k]``.
    """
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or np.any(p < 0) or not np.isclose(p.sum(), 1.0, atol=1e-12):
        raise DomainError("atom probabilities must be non-negative and sum to 1")
    mats = np.asarray(matrices, dtype=float)
    sh = np.asarray(shifts, dtype=float)
    if mats.ndim != 4 or mats.shape[0] != p.size or sh.shape != (p.size, mats.shape[2]):
        raise DomainError("atoms need (J, d, d) matrices and length-d shifts")
    cdf = np.cumsum(p)
    cdf[-1] = 1.0

    def sampler(rng, n):
        k = np.searchsorted(cdf, rng.random(n), side="right")
        return mats[k], sh[k]

    return sampler
