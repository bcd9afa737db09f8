"""Pool iteration for systems of fixed-point equations.

The law of each ``X_r`` is represented by a pool of ``N`` samples.  One
iteration replaces every slot of pool ``r`` by ``sum_j A_j x_j + b`` where
the coefficients are fresh and each ``x_j`` is drawn uniformly, independently
and with replacement from pool ``l_r(j)``.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .core import EquationSystem, singular_extremes
from .errors import DomainError, NumericalError
from .streams import TAG_DISTANCE, TAG_INIT, TAG_ITERATE, TAG_MOMENTS, blocks, stream


@dataclass(frozen=True, eq=False)
class SamplePool:
    """Empirical stand-in for the law of one ``X_r``: ``values`` has shape (N, d)."""

    values: np.ndarray
    generation: int = 0
    seed_lineage: tuple = ()
    n_resampled: int = 0

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[0] == 0:
            raise DomainError("pool values must be a non-empty (N, d) array")
        if not np.all(np.isfinite(v)):
            raise DomainError("pool contains non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def N(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def mean(self) -> np.ndarray:
        return self.values.mean(axis=0)

    def cov(self) -> np.ndarray:
        c = np.atleast_2d(np.cov(self.values, rowvar=False, bias=True))
        return 0.5 * (c + c.T)


@dataclass
class SolveDiagnostics:
    distances: list = field(default_factory=list)  # per iteration, shape (m,)
    noise_floors: list = field(default_factory=list)  # per iteration, shape (m,)
    means: list = field(default_factory=list)  # per iteration, shape (m, d)
    covariances: list = field(default_factory=list)  # per iteration, shape (m, d, d)
    converged: bool = False
    stop_rule: str = ""
    iterations: int = 0
    tol: object = None
    p: float = 2.0
    n_resampled: int = 0

    def to_dict(self) -> dict:
        return {
            "converged": self.converged,
            "stop_rule": self.stop_rule,
            "iterations": self.iterations,
            "tol": self.tol,
            "p": self.p,
            "n_resampled": self.n_resampled,
            "distances": [d.tolist() for d in self.distances],
            "noise_floors": [d.tolist() for d in self.noise_floors],
            "means": [m.tolist() for m in self.means],
            "covariances": [c.tolist() for c in self.covariances],
        }


# --------------------------------------------------------------------------
# distances


def wasserstein_1d(a, b, p: float = 1.0) -> float:
    """Exact empirical ``l_p`` distance between two equal-size samples on R."""
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    if a.size != b.size:
        raise DomainError(f"samples must have equal size ({a.size} != {b.size})")
    if a.size == 0:
        raise DomainError("empty samples")
    if p < 1:
        raise DomainError("order p must be >= 1")
    diff = np.abs(a - b)
    if p == 1:
        return float(diff.mean())
    return float(np.mean(diff ** p) ** (1.0 / p))


def lp_distance(a, b, p: float = 1.0) -> float:
    """``l_p`` distance between two empirical laws on R of any sizes.

    Integrates ``|F^-1(u) - G^-1(u)|^p`` exactly over the merged breakpoints
    of the two quantile functions; equals :func:`wasserstein_1d` for equal sizes.
    """
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise DomainError("empty samples")
    if p < 1:
        raise DomainError("order p must be >= 1")
    if a.size == b.size:
        return wasserstein_1d(a, b, p)
    u = np.union1d(np.arange(1, a.size + 1) / a.size, np.arange(1, b.size + 1) / b.size)
    w = np.diff(np.concatenate(([0.0], u)))
    mid = u - w / 2
    qa = a[np.minimum((mid * a.size).astype(np.int64), a.size - 1)]
    qb = b[np.minimum((mid * b.size).astype(np.int64), b.size - 1)]
    return float(np.sum(w * np.abs(qa - qb) ** p) ** (1.0 / p))


def random_directions(rng: np.random.Generator, count: int, d: int) -> np.ndarray:
    u = rng.standard_normal((count, d))
    return u / np.linalg.norm(u, axis=1, keepdims=True)


def sliced_distance(a, b, directions: int = 64, p: float = 2.0, rng=None) -> float:
    """Mean of :func:`wasserstein_1d` over random one-dimensional projections."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[1]:
        raise DomainError("pools must be (N, d) arrays of equal dimension")
    if a.shape[1] < 2:
        raise DomainError("sliced distance needs d >= 2")
    if a.shape[0] != b.shape[0]:
        raise DomainError(f"pools must have equal size ({a.shape[0]} != {b.shape[0]})")
    rng = np.random.default_rng(0) if rng is None else rng
    dirs = random_directions(rng, directions, a.shape[1])
    pa, pb = a @ dirs.T, b @ dirs.T
    return float(np.mean([wasserstein_1d(pa[:, k], pb[:, k], p) for k in range(directions)]))


def pool_distance(a: np.ndarray, b: np.ndarray, p: float, directions: int, rng) -> float:
    if a.shape[1] == 1:
        return wasserstein_1d(a[:, 0], b[:, 0], p)
    return sliced_distance(a, b, directions, p, rng)


def ks_rate_bound(lp_distance: float, f_sup: float, p: float) -> float:
    """Kolmogorov distance bound ``((p+1) |f|^p)^{1/(1+p)} l_p^{p/(1+p)}``."""
    if not (lp_distance > 0 and f_sup > 0 and p > 0):
        raise DomainError("ks_rate_bound needs positive inputs")
    if p < 1:
        raise DomainError("order p must be >= 1")
    return float(((p + 1.0) * f_sup ** p) ** (1.0 / (1.0 + p)) * lp_distance ** (p / (1.0 + p)))


# --------------------------------------------------------------------------
# iteration


def initial_pools(system: EquationSystem, n: int, seed: int = 0, init: str = "default",
                  scale: float = 1.0) -> list[SamplePool]:
    """Starting pools: ``"default"`` is the constant target mean (or 0),
    ``"zeros"`` is 0, ``"gaussian"`` adds an isotropic N(0, scale^2) warm start."""
    base = np.zeros((system.m, system.d)) if system.target_mean is None else system.target_mean
    pools = []
    for r in range(system.m):
        if init in ("default", "zeros"):
            mu = base[r] if init == "default" else np.zeros(system.d)
            vals = np.broadcast_to(mu, (n, system.d))
        elif init == "gaussian":
            vals = base[r] + scale * stream(seed, TAG_INIT, r).standard_normal((n, system.d))
        else:
            raise DomainError(f"unknown init {init!r}")
        pools.append(SamplePool(vals, 0, (int(seed), 0)))
    return pools


def _check_alignment(system: EquationSystem, pools) -> int:
    if len(pools) != system.m:
        raise DomainError(f"need {system.m} pools, got {len(pools)}")
    sizes = {p.N for p in pools}
    if len(sizes) != 1:
        raise DomainError(f"pools have unequal sizes {sorted(sizes)}")
    if any(p.d != system.d for p in pools):
        raise DomainError(f"pools must have dimension d = {system.d}")
    gens = {p.generation for p in pools}
    if len(gens) != 1:
        raise DomainError("pools come from different generations")
    return sizes.pop()


def _apply(system, pools, r, rng, n):
    A, b = system.sample(r, rng, n)
    N = pools[0].N
    row = system.index_map[r]
    idx = rng.integers(0, N, size=(n, len(row)))
    out = b.copy()
    for j, src in enumerate(row):
        x = pools[src].values[idx[:, j]]
        if system.d == 1:
            out[:, 0] += A[:, j, 0, 0] * x[:, 0]
        else:
            out += np.einsum("nkl,nl->nk", A[:, j], x)
    return out


def _block(system, pools, seed, gen, r, bi, start, stop):
    n = stop - start
    with np.errstate(over="ignore", invalid="ignore"):
        out = _apply(system, pools, r, stream(seed, TAG_ITERATE, gen, r, bi), n)
    bad = ~np.all(np.isfinite(out), axis=1)
    nbad = int(bad.sum())
    if nbad:
        with np.errstate(over="ignore", invalid="ignore"):
            redo = _apply(system, pools, r, stream(seed, TAG_ITERATE, gen, r, bi, 1), nbad)
        if not np.all(np.isfinite(redo)):
            raise NumericalError(
                f"equation {r}: non-finite outputs persisted after resampling ({nbad} slots in block {bi})")
        out[bad] = redo
    return out, nbad


def iterate(system: EquationSystem, pools, seed: int = 0, threads: int = 1) -> list[SamplePool]:
    """Apply the distributional map once to the empirical laws in ``pools``.

    Randomness for slot block ``k`` of equation ``r`` comes from the stream
    ``(seed, TAG_ITERATE, generation, r, k)``, so the result does not depend
    on ``threads``.
    """
    N = _check_alignment(system, pools)
    gen = pools[0].generation
    jobs = [(r, bi, s, e) for r in range(system.m) for bi, s, e in blocks(N)]

    def run(job):
        return _block(system, pools, seed, gen, *job)

    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(run, jobs))
    else:
        results = [run(j) for j in jobs]

    new = []
    for r in range(system.m):
        parts = [res for (rr, *_), res in zip(jobs, results) if rr == r]
        vals = np.concatenate([p[0] for p in parts])
        nbad = sum(p[1] for p in parts)
        new.append(SamplePool(vals, gen + 1, (int(seed), gen + 1), nbad))
    return new


def recenter(pools, target_mean) -> list[SamplePool]:
    """Translate each pool so its empirical mean equals ``target_mean[r]``."""
    out = []
    for r, p in enumerate(pools):
        vals = p.values - p.mean() + np.asarray(target_mean)[r]
        out.append(replace(p, values=vals))
    return out


def contraction_factor(system: EquationSystem, n_draws: int = 4096, seed: int = 0) -> float:
    """Monte Carlo estimate of ``max_r E sum_j |A_rj|_op^2``."""
    rho = 0.0
    for r in range(system.m):
        A, _ = system.sample(r, stream(seed, TAG_MOMENTS, r, 1), n_draws)
        rho = max(rho, float(np.mean(np.sum(singular_extremes(A)[1] ** 2, axis=1))))
    return rho


def auto_min_iters(system: EquationSystem, max_iters: int, seed: int = 0) -> int:
    rho = contraction_factor(system, seed=seed)
    k = int(np.ceil(np.log(1e-3) / np.log(rho))) if 0 < rho < 1 else max_iters
    return int(min(max(k, 10), max_iters))


def solve(system: EquationSystem, n: int, max_iters: int = 60, tol="auto", p: float = 2.0,
          seed: int = 0, init: str = "default", init_scale: float = 1.0, threads: int = 1,
          directions: int = 64, recenter_mean: bool | None = None, min_iters="auto",
          min_size: int = 1000):
    """Iterate to an approximate fixed point.

    Stops when the ``l_p`` distance between consecutive pools is below ``tol``
    for every equation on three consecutive iterations.  ``tol="auto"``
    compares against twice the resampling noise floor (distance between two
    independent resamplings of the new pool).  When the system pins a target
    mean, pools are translated back to it after every iteration unless
    ``recenter_mean`` is False.  The stopping test is only armed after
    ``min_iters`` iterations: close to the noise floor the distance cannot
    see the remaining geometric drift of the second moment.  ``"auto"``
    waits until ``rho**k < 1e-3`` where ``rho`` estimates the contraction
    factor ``max_r E sum_j |A_rj|^2`` (between 10 and ``max_iters``).

    Returns ``(pools, SolveDiagnostics)``; non-convergence is reported, not raised.
    """
    if min_iters == "auto":
        min_iters = auto_min_iters(system, max_iters, seed)
    if max_iters < 1 or min_iters < 0:
        raise DomainError("need max_iters >= 1 and min_iters >= 0")
    if n < min_size:
        raise DomainError(f"pool size must be at least {min_size}")
    if recenter_mean is None:
        recenter_mean = system.target_mean is not None
    pools = initial_pools(system, n, seed, init, init_scale)
    diag = SolveDiagnostics(tol=tol, p=p)
    streak = 0
    for it in range(max_iters):
        new = iterate(system, pools, seed, threads)
        if recenter_mean:
            new = recenter(new, system.target_mean)
        gen = new[0].generation
        dist = np.empty(system.m)
        floor = np.empty(system.m)
        for r in range(system.m):
            rng = stream(seed, TAG_DISTANCE, gen, r)
            dist[r] = pool_distance(pools[r].values, new[r].values, p, directions, rng)
            i1 = rng.integers(0, n, n)
            i2 = rng.integers(0, n, n)
            floor[r] = pool_distance(new[r].values[i1], new[r].values[i2], p, directions, rng)
        diag.distances.append(dist)
        diag.noise_floors.append(floor)
        diag.means.append(np.stack([q.mean() for q in new]))
        diag.covariances.append(np.stack([q.cov() for q in new]))
        diag.n_resampled += sum(q.n_resampled for q in new)
        diag.iterations = it + 1
        pools = new
        limit = 2.0 * floor if tol == "auto" else float(tol)
        streak = streak + 1 if np.all(dist < limit) and it + 1 >= min_iters else 0
        if streak >= 3:
            diag.converged = True
            diag.stop_rule = ("distance below twice the noise floor" if tol == "auto"
                              else f"distance below tol={tol}") + " on 3 consecutive iterations"
            break
    if not diag.converged:
        diag.stop_rule = f"max_iters={max_iters} reached"
    return pools, diag


# --------------------------------------------------------------------------
# moment checks


@dataclass(frozen=True)
class MomentResidual:
    order: int
    residual: np.ndarray  # (m, d) or (m, d, d)
    se: np.ndarray  # same shape

    @property
    def z(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.se > 0, np.abs(self.residual) / self.se, np.where(self.residual == 0, 0.0, np.inf))


def moment_residual(system: EquationSystem, pools, order: int = 1, n_draws: int = 200_000,
                    seed: int = 0) -> MomentResidual:
    """Difference between a pool moment and the same moment of the right-hand side.

    Order 1: ``mean_r - E[sum_j A_j mean_{l(j)} + b]``.  Order 2: second-moment
    matrices, using ``E[Y Y^T] = E[T T^T] + sum_j E[A_j Cov_{l(j)} A_j^T]`` with
    ``T = sum_j A_j mean_{l(j)} + b``, which reduces to
    ``m2_r - sum_j E[A_j^2] m2_{l(j)} - E[b^2]`` for centered scalar pools.
    Standard errors treat pool samples and coefficient draws as independent.
    """
    if order not in (1, 2):
        raise DomainError("order must be 1 or 2")
    N = _check_alignment(system, pools)
    d = system.d
    mus = np.stack([p.mean() for p in pools])
    covs = np.stack([p.cov() for p in pools])
    res = np.empty((system.m, d) if order == 1 else (system.m, d, d))
    se = np.empty_like(res)
    for r in range(system.m):
        A, b = system.sample(r, stream(seed, TAG_MOMENTS, r), n_draws)
        row = system.index_map[r]
        T = b + sum(np.einsum("nkl,l->nk", A[:, j], mus[s]) for j, s in enumerate(row))
        if order == 1:
            res[r] = mus[r] - T.mean(axis=0)
            var = T.var(axis=0) / n_draws
            for s in range(system.m):
                C = (np.eye(d) if s == r else 0.0) - sum(
                    A[:, j].mean(axis=0) for j, ss in enumerate(row) if ss == s) * 1.0
                C = np.broadcast_to(C, (d, d))
                var = var + np.diag(C @ covs[s] @ C.T) / N
            se[r] = np.sqrt(var)
        else:
            per = np.einsum("nk,nl->nkl", T, T)
            w = {}
            for j, s in enumerate(row):
                per = per + np.einsum("nkl,lm,npm->nkp", A[:, j], covs[s], A[:, j])
                w[s] = w.get(s, 0.0) + np.mean(np.sum(A[:, j] ** 2, axis=(1, 2))) / d
            x = pools[r].values
            m2 = x.T @ x / N
            res[r] = m2 - per.mean(axis=0)
            var = per.var(axis=0) / n_draws
            for s in range(system.m):
                xs = pools[s].values
                v2 = np.einsum("nk,nl->nkl", xs, xs).var(axis=0) / N
                coef = (1.0 if s == r else 0.0) - w.get(s, 0.0)
                var = var + coef ** 2 * v2
            se[r] = np.sqrt(var)
    return MomentResidual(order, res, se)
