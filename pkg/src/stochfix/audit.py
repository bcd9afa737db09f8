"""Monte Carlo audits of the smoothness conditions on coefficients and pools.

Every verdict is one of ``"pass"``, ``"fail"`` or ``"inconclusive"`` and
comes with the sample size it was computed from.  Audits on samples are
evidence, not proof.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from .core import HALF_OPEN_UNIT, OPEN_UNIT, EquationSystem, count_in, singular_extremes, top_two
from .errors import DomainError
from .streams import TAG_AUDIT, TAG_LATTICE, stream

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"
Z99 = 2.5758293035489004  # two-sided 99% normal quantile
Z99_ONE_SIDED = 2.3263478740408408


def wilson_interval(k: int, n: int, z: float = Z99) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n <= 0:
        return 0.0, 1.0
    ph = k / n
    den = 1 + z * z / n
    mid = (ph + z * z / (2 * n)) / den
    half = z * np.sqrt(ph * (1 - ph) / n + z * z / (4 * n * n)) / den
    lo = 0.0 if k == 0 else max(0.0, mid - half)
    hi = 1.0 if k == n else min(1.0, mid + half)
    return float(lo), float(hi)


@dataclass
class ConditionEntry:
    verdict: str
    n: int
    estimates: dict = field(default_factory=dict)
    se: dict = field(default_factory=dict)
    note: str = ""


@dataclass
class ConditionReport:
    r: int
    n_draws: int
    entries: dict
    a_hat: float
    lambda_hat: float | None
    nu_hat: float | None
    eta_feasible: float | None

    def verdict(self, name: str) -> str:
        return self.entries[name].verdict

    def failed(self) -> list[str]:
        return [k for k, e in self.entries.items() if e.verdict == FAIL]

    @property
    def ok(self) -> bool:
        return not self.failed()

    def to_dict(self) -> dict:
        out = asdict(self)
        return _jsonable(out)


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.generic):
        x = x.item()
    if isinstance(x, float) and not np.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    return x


# --------------------------------------------------------------------------
# draws


@dataclass(frozen=True, eq=False)
class SpectralSample:
    """Per-draw spectral statistics of one equation, as parallel arrays."""

    alpha_max: np.ndarray
    alpha_sec: np.ndarray
    opnorm_max: np.ndarray
    n_open: np.ndarray  # N_r((0, 1))
    n_half_open: np.ndarray  # N_r((0, 1])
    alphas: np.ndarray | None = None  # (n, J), kept for the product moment

    def __len__(self) -> int:
        return self.alpha_max.shape[0]

    def permuted(self, perm) -> "SpectralSample":
        pick = lambda a: None if a is None else a[perm]  # noqa: E731
        return SpectralSample(*(pick(getattr(self, f)) for f in
                                ("alpha_max", "alpha_sec", "opnorm_max", "n_open", "n_half_open", "alphas")))


def spectral_sample(system: EquationSystem, r: int, n_draws: int, seed: int = 0) -> SpectralSample:
    A, _ = system.sample(r, stream(seed, TAG_AUDIT, r), n_draws)
    lo, hi = singular_extremes(A)
    amax, asec = top_two(lo)
    return SpectralSample(amax, asec, hi.max(axis=1), count_in(lo, hi, OPEN_UNIT),
                          count_in(lo, hi, HALF_OPEN_UNIT), lo)


def _as_arrays(draws):
    if isinstance(draws, SpectralSample):
        amax, asec = draws.alpha_max, draws.alpha_sec
    else:
        draws = list(draws)
        if not draws:
            raise DomainError("no draws")
        amax = np.array([d.alpha_max for d in draws], dtype=float)
        asec = np.array([d.alpha_sec for d in draws], dtype=float)
    # canonical order makes every estimate exactly permutation-invariant
    order = np.lexsort((asec, amax))
    return amax[order], asec[order]


# --------------------------------------------------------------------------
# tail fits and heavy-tailed means


@dataclass(frozen=True)
class TailFit:
    """Power law ``P(Z <= x) = lam x^nu`` fitted to the lower tail.

    ``nu`` and ``lam`` are conditional maximum-likelihood estimates given the
    ``n_fit`` smallest values (``nu_se = nu / sqrt(n_fit)``); ``r2`` is the
    coefficient of determination of the empirical log-log CDF on the same
    points and serves as the goodness-of-fit check.
    """

    lam: float
    nu: float
    r2: float
    nu_se: float
    n_fit: int


def lower_tail_fit(z: np.ndarray, fraction: float = 0.1, min_points: int = 10) -> TailFit | None:
    z = np.sort(np.asarray(z, dtype=float))
    n = z.size
    k = max(int(np.floor(fraction * n)), min_points)
    if k >= n:
        return None
    pos_start = np.searchsorted(z, 0.0, side="right")
    idx = np.arange(pos_start, k)
    x0 = z[k]  # edge of the fitting window
    if idx.size < min_points or not x0 > 0:
        return None
    logs = np.log(z[idx])
    if np.ptp(logs) == 0:
        return None
    nu = idx.size / np.sum(np.log(x0) - logs)
    lam = (k / n) * x0 ** -nu
    r2 = stats.linregress(logs, np.log((idx + 1) / n)).rvalue ** 2
    return TailFit(float(lam), float(nu), float(r2), float(nu / np.sqrt(idx.size)), int(idx.size))


@dataclass(frozen=True)
class TrimmedMean:
    value: float
    se: float
    raw_mean: float
    divergent: bool
    n: int


def trimmed_mean(values: np.ndarray, winsor: float = 1e-3, top: float = 1e-2,
                 share: float = 0.5) -> TrimmedMean:
    """Winsorized mean (top ``winsor`` fraction clipped) with a divergence flag.

    The flag is raised when the largest ``top`` fraction of the values carries
    more than ``share`` of the total: the signature of an infinite mean.
    """
    v = np.sort(np.asarray(values, dtype=float))
    n = v.size
    if n == 0:
        return TrimmedMean(0.0, 0.0, 0.0, False, 0)
    if np.any(~np.isfinite(v)):
        return TrimmedMean(np.inf, np.inf, np.inf, True, n)
    total = v.sum()
    k_top = max(1, int(np.ceil(top * n)))
    divergent = bool(total > 0 and v[-k_top:].sum() > share * total)
    cap = np.quantile(v, 1.0 - winsor)
    w = np.minimum(v, cap)
    se = float(w.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return TrimmedMean(float(w.mean()), se, float(v.mean()), divergent, n)


@dataclass(frozen=True)
class C46Estimate:
    eta: float
    c4_hat: float
    c4_se: float
    c4_divergent: bool
    c4_raw: float  # plain mean, unbiased when finite
    c5_exponent: float  # inf when alpha_max is bounded away from 0
    c5_r2: float | None
    c6_hat: float
    c6_se: float
    n: int

    @property
    def c4_ok(self) -> bool:
        return np.isfinite(self.c4_hat) and not self.c4_divergent

    @property
    def c5_ok(self) -> bool:
        return self.c5_exponent >= self.eta

    @property
    def c6_ok(self) -> bool:
        return self.c6_hat < 1.0

    @property
    def ok(self) -> bool:
        return self.c4_ok and self.c5_ok and self.c6_ok


def c4_c6_estimates(draws, eta: float, floor: float = 0.01) -> C46Estimate:
    """Estimates behind the moment conditions at exponent ``eta``.

    ``draws`` is a list of :class:`~stochfix.core.SpectralSummary` or a
    :class:`SpectralSample`.  ``c4_hat`` is the trimmed mean of
    ``alpha_sec^-eta`` over draws with ``alpha_sec > 0``; ``c5_exponent`` is
    the fitted lower-tail exponent of ``alpha_max`` (``inf`` if no draw falls
    below ``floor``); ``c6_hat`` is the mean of
    ``alpha_max^-eta * 1{alpha_sec = 0}`` over all draws.
    """
    if not eta > 0:
        raise DomainError("eta must be positive")
    amax, asec = _as_arrays(draws)
    n = amax.size
    pos = asec > 0
    with np.errstate(divide="ignore"):
        c4 = trimmed_mean(asec[pos] ** -eta)
    if amax.min() >= floor:
        c5, c5_r2 = np.inf, None
    else:
        fit = lower_tail_fit(amax)
        c5, c5_r2 = (fit.nu, fit.r2) if fit is not None else (0.0, None)
    with np.errstate(divide="ignore"):
        terms = np.where(pos, 0.0, np.where(amax > 0, amax, np.inf) ** -eta)
    terms = np.where(pos, 0.0, terms)
    c6 = float(terms.mean())
    c6_se = float(terms.std(ddof=1) / np.sqrt(n)) if n > 1 and np.isfinite(c6) else 0.0
    return C46Estimate(float(eta), c4.value, c4.se, c4.divergent, c4.raw_mean, float(c5), c5_r2, c6, c6_se, n)


# --------------------------------------------------------------------------
# chi bootstrap


def chi(beta: float, nu: float) -> float:
    return beta + min(beta, nu) / 2.0


@dataclass(frozen=True)
class ChiTrace:
    nu: float
    eta0: float
    values: tuple
    target: float

    def steps_to(self, beta: float | None = None, max_steps: int = 1_000_000) -> int:
        """Number of applications of chi until the value reaches ``beta``."""
        beta = self.target if beta is None else beta
        v, k = self.eta0, 0
        while v < beta:
            v = chi(v, self.nu)
            k += 1
            if k > max_steps:
                raise DomainError("chi iteration did not reach the target")
        return k

    @property
    def steps(self) -> int:
        return len(self.values) - 1


def chi_bootstrap(eta0: float, nu: float, beta_target: float) -> ChiTrace:
    """Iterate ``chi(b) = b + min(b, nu)/2`` from ``eta0`` until ``>= beta_target``."""
    for name, v in (("eta0", eta0), ("nu", nu), ("beta_target", beta_target)):
        if not (np.isfinite(v) and v > 0):
            raise DomainError(f"{name} must be a positive number")
    vals = [float(eta0)]
    while vals[-1] < beta_target:
        vals.append(chi(vals[-1], nu))
    return ChiTrace(float(nu), float(eta0), tuple(vals), float(beta_target))


# --------------------------------------------------------------------------
# coefficient audit


def product_moment(alphas: np.ndarray, beta: float, x: float) -> TrimmedMean:
    """Trimmed estimate of ``E[prod_j min((alpha_j x)^-beta, 1)]``."""
    with np.errstate(divide="ignore"):
        f = np.minimum((alphas * x) ** -beta, 1.0)
    return trimmed_mean(np.prod(f, axis=1))


def audit_draws(sample: SpectralSample, floor: float = 0.01,
                etas=(0.125, 0.25, 0.5, 1.0, 2.0, 4.0), c7_beta: float = 1.0, c7_x: float = 10.0,
                r: int = 0) -> ConditionReport:
    """Audit the coefficient conditions from a sample of spectral statistics."""
    n = len(sample)
    amax, asec = _as_arrays(sample)
    E = {}

    a_hat = float(amax.min())
    gap = float(np.partition(amax, 1)[1] - a_hat) if n > 1 else 0.0
    E["A1"] = ConditionEntry(
        PASS if a_hat >= floor else FAIL, n, {"a_hat": a_hat, "floor": floor},
        {"a_hat": gap},
        note=f"empirical minimum; with 99% confidence at most {1 - 0.01 ** (1 / n):.2e} "
             "of the mass lies below it")

    zeros = int(np.sum(asec <= 0))
    fit = lower_tail_fit(asec) if zeros == 0 else None
    lam = nu = None
    if zeros:
        lo, hi = wilson_interval(zeros, n)
        E["A2"] = ConditionEntry(FAIL, n, {"p_zero": zeros / n, "p_zero_lower": lo}, {},
                                 note="alpha_sec has an atom at 0")
    elif fit is None:
        E["A2"] = ConditionEntry(INCONCLUSIVE, n, {}, {}, note="too few positive values to fit")
    else:
        lam, nu = fit.lam, fit.nu
        ok = fit.r2 >= 0.95 and fit.nu > 0
        E["A2"] = ConditionEntry(PASS if ok else FAIL, n,
                                 {"lambda_hat": lam, "nu_hat": nu, "r2": fit.r2, "n_fit": fit.n_fit},
                                 {"nu_hat": fit.nu_se},
                                 note="log-log fit on the lower decile; certifies the observed range only")

    opmax = float(sample.opnorm_max.max())
    E["A3"] = ConditionEntry(PASS if opmax <= 1 + 1e-12 else FAIL, n, {"max_opnorm": opmax}, {})
    E["A4"] = ConditionEntry(INCONCLUSIVE, n, {}, {}, note="needs the solution; see audit_support")

    k5 = int(np.sum(sample.n_open >= 1))
    lo5, _ = wilson_interval(k5, n)
    E["A5"] = ConditionEntry(PASS if lo5 > 0 else FAIL, n, {"p_hat": k5 / n, "p_lower": lo5}, {})

    k1 = int(np.sum(amax <= 0))
    _, hi1 = wilson_interval(k1, n)
    E["C1"] = ConditionEntry(PASS if k1 == 0 else FAIL, n, {"p_zero": k1 / n, "p_zero_upper": hi1}, {})

    nh = sample.n_half_open.astype(float)
    m2, s2 = float(nh.mean()), float(nh.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    E["C2"] = ConditionEntry(PASS if m2 - Z99_ONE_SIDED * s2 > 1 else FAIL, n,
                             {"mean_count": m2, "lower_bound": m2 - Z99_ONE_SIDED * s2}, {"mean_count": s2})
    E["C3"] = ConditionEntry(INCONCLUSIVE, n, {}, {}, note="needs the solution; see audit_lattice")

    ests = [c4_c6_estimates(sample, eta, floor) for eta in etas]
    good = [e for e in ests if e.ok]
    eta_feasible = max(e.eta for e in good) if good else None
    shown = max(good, key=lambda e: e.eta) if good else ests[0]
    E["C4"] = ConditionEntry(PASS if shown.c4_ok else FAIL, n,
                             {"eta": shown.eta, "c4_hat": shown.c4_hat, "divergent": shown.c4_divergent},
                             {"c4_hat": shown.c4_se})
    E["C5"] = ConditionEntry(PASS if shown.c5_ok else FAIL, n,
                             {"eta": shown.eta, "exponent": shown.c5_exponent, "r2": shown.c5_r2}, {})
    E["C6"] = ConditionEntry(PASS if shown.c6_ok else FAIL, n,
                             {"eta": shown.eta, "c6_hat": shown.c6_hat}, {"c6_hat": shown.c6_se})

    if sample.alphas is None:
        E["C7"] = ConditionEntry(INCONCLUSIVE, n, {}, {}, note="per-term gains not available")
    else:
        xs = c7_x * 2.0 ** np.arange(4)
        pm = [product_moment(sample.alphas, c7_beta, x) for x in xs]
        est = {"beta": c7_beta, "x": c7_x, "value": pm[0].value, "divergent": pm[0].divergent}
        if nu is None or any(p.value <= 0 for p in pm):
            verdict, note = INCONCLUSIVE, "no decay exponent available"
        else:
            slope = float(np.polyfit(np.log(xs), np.log([p.value for p in pm]), 1)[0])
            target = -chi(c7_beta, nu)
            est.update({"slope": slope, "chi": -target})
            verdict = PASS if slope <= target + 0.1 else FAIL
            note = "log-log slope over x, 2x, 4x, 8x compared with -chi(beta)"
        E["C7"] = ConditionEntry(verdict, n, est, {"value": pm[0].se}, note=note)

    return ConditionReport(r, n, E, a_hat, lam, nu, eta_feasible)


def audit_coefficients(system: EquationSystem, r: int, n_draws: int = 20_000, seed: int = 0,
                       **kwargs) -> ConditionReport:
    """Audit the coefficient conditions of equation ``r`` from fresh draws."""
    if n_draws < 1000:
        raise DomainError("n_draws must be at least 1000")
    system._check_r(r)
    return audit_draws(spectral_sample(system, r, n_draws, seed), r=r, **kwargs)


# --------------------------------------------------------------------------
# pool audits


def _values(pool) -> np.ndarray:
    v = getattr(pool, "values", pool)
    v = np.asarray(v, dtype=float)
    return v[:, None] if v.ndim == 1 else v


@dataclass(frozen=True)
class SupportVerdict:
    verdict: str
    normalized_min_eig: float
    normalized_min_sv: float
    eigenvalues: tuple
    n: int
    threshold: float

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))


def audit_support(pool, threshold: float = 1e-6) -> SupportVerdict:
    """Is the support of the pool in general position (not inside a hyperplane)?

    Reports the smallest covariance eigenvalue over the trace.  The pass test
    applies ``threshold`` to its square root (the normalized smallest singular
    value of the centered cloud), which moves by at most the condition number
    under an affine map, so verdicts are stable under well-conditioned
    changes of coordinates.  For d = 1 the scale is the largest deviation
    from the mean.
    """
    x = _values(pool)
    n, d = x.shape
    if n < d + 1:
        return SupportVerdict(INCONCLUSIVE, np.nan, np.nan, (), n, threshold)
    xc = x - x.mean(axis=0)
    if d == 1:
        scale2 = float(np.max(xc ** 2))
        ratio = float(np.mean(xc ** 2) / scale2) if scale2 > 0 else 0.0
        eig = (float(np.mean(xc ** 2)),)
    else:
        cov = xc.T @ xc / n
        ev = np.linalg.eigvalsh(0.5 * (cov + cov.T))
        tr = float(ev.sum())
        ratio = float(max(ev[0], 0.0) / tr) if tr > 0 else 0.0
        eig = tuple(float(e) for e in ev)
    sv = float(np.sqrt(ratio))
    return SupportVerdict(PASS if sv >= threshold else FAIL, ratio, sv, eig, n, threshold)


@dataclass(frozen=True)
class LatticeVerdict:
    verdict: str
    max_abs_cf: float
    direction: tuple
    span: float
    n: int
    note: str = "one-sided evidence: passing does not prove a non-lattice law"

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))


def audit_lattice(pool, directions: int = 16, seed: int = 0, max_divisor: int = 64,
                  threshold: float = 1e-3, max_samples: int = 20_000) -> LatticeVerdict:
    """Look for lattice structure through |E exp(2 pi i <s, X> / h)| close to 1.

    Candidate spans ``h`` are the range, interquartile and interdecile ranges
    of each projection divided by 1..``max_divisor``: any lattice law has
    these as multiples of its span.  Directions are the coordinate axes plus
    ``directions`` random unit vectors.  Large pools are subsampled to
    ``max_samples`` points (noise level about ``1/sqrt(max_samples)``).
    """
    x = _values(pool)
    n, d = x.shape
    if n < 1000:
        raise DomainError("audit_lattice needs at least 1000 samples")
    rng = stream(seed, TAG_LATTICE)
    if n > max_samples:
        x = x[rng.choice(n, max_samples, replace=False)]
    dirs = np.eye(d)
    if d > 1 and directions > 0:
        u = rng.standard_normal((directions, d))
        dirs = np.vstack([dirs, u / np.linalg.norm(u, axis=1, keepdims=True)])
    best = (0.0, tuple(dirs[0]), 0.0)
    ks = np.arange(1, max_divisor + 1)
    for s in dirs:
        p = x @ s
        q = np.quantile(p, [0.0, 0.1, 0.25, 0.75, 0.9, 1.0])
        bases = np.array([q[5] - q[0], q[3] - q[2], q[4] - q[1]])
        bases = bases[bases > 0]
        if bases.size == 0:
            return LatticeVerdict(FAIL, 1.0, tuple(float(v) for v in s), 0.0, n,
                                  note="projection is constant (degenerate lattice)")
        spans = np.unique((bases[:, None] / ks[None, :]).ravel())
        pc = p - np.median(p)
        for h in spans:
            val = abs(np.mean(np.exp(2j * np.pi * pc / h)))
            if val > best[0]:
                best = (float(val), tuple(float(v) for v in s), float(h))
    verdict = FAIL if best[0] > 1 - threshold else PASS
    return LatticeVerdict(verdict, best[0], best[1], best[2], n)
