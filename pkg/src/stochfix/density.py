"""Empirical characteristic functions, Fourier inversion, KDE and decay fits.

Frequency axes use the centered layout ``t_k = (k - n/2) dt`` with ``n``
divisible by 4; see :func:`frequency_axis`.  With that layout the discrete
inversion

    f(x_j) = dt/(2 pi) sum_k phi(t_k) exp(-i x_j t_k),   x_j = c + (j - n/2) dx,

with ``dx dt = 2 pi / n`` is a single FFT up to alternating signs.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import _kernels as K
from .errors import DomainError, NumericalError

CHUNK = 64
BOUNDARY_LEVEL = 0.01
NOISE_EDGE = 4.5
DEFAULT_POINTS = {1: 4096, 2: 128}


def _values(pool) -> np.ndarray:
    v = np.asarray(getattr(pool, "values", pool), dtype=float)
    v = v[:, None] if v.ndim == 1 else v
    if v.ndim != 2 or v.shape[0] == 0:
        raise DomainError("pool must be a non-empty (N, d) array")
    return v


def frequency_axis(T: float, n: int) -> np.ndarray:
    """``n`` frequencies ``(k - n/2) * 2T/n``, i.e. ``[-T, T)``."""
    if n % 4 or n < 4:
        raise DomainError("number of frequencies must be a positive multiple of 4")
    if not T > 0:
        raise DomainError("frequency extent must be positive")
    dt = 2.0 * T / n
    return (np.arange(n) - n // 2) * dt


def _axis_step(t: np.ndarray) -> float:
    """Return ``dt`` if ``t`` has the centered layout, else raise."""
    t = np.asarray(t, dtype=float)
    n = t.size
    if t.ndim != 1 or n < 4 or n % 4:
        raise DomainError("frequency axis needs a multiple of 4 points")
    dt = (t[-1] - t[0]) / (n - 1)
    if not dt > 0 or not np.allclose(t, (np.arange(n) - n // 2) * dt, rtol=0, atol=1e-9 * dt * n):
        raise DomainError("frequency axis must be uniform with t_k = (k - n/2) dt")
    return float(dt)


@dataclass(frozen=True, eq=False)
class CharFunGrid:
    axes: tuple
    values: np.ndarray
    n_samples: int | None = None
    center: tuple = ()
    radial: bool = False

    @property
    def d(self) -> int:
        return len(self.axes)

    @classmethod
    def from_function(cls, phi, T, n: int) -> "CharFunGrid":
        """Tabulate an analytic characteristic function (1D or 2D) on a grid."""
        Ts = np.atleast_1d(np.asarray(T, dtype=float))
        axes = tuple(frequency_axis(float(t), n) for t in Ts)
        mesh = np.meshgrid(*axes, indexing="ij")
        return cls(axes, np.asarray(phi(*mesh), dtype=complex), None, (0.0,) * len(axes))

    def noise_floor(self, factor: float = 3.0) -> float:
        return factor / np.sqrt(self.n_samples) if self.n_samples else 1e-12


@dataclass(frozen=True, eq=False)
class DensityGrid:
    axes: tuple
    values: np.ndarray
    method: str
    params: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    @property
    def d(self) -> int:
        return len(self.axes)

    @property
    def cell_volume(self) -> float:
        return float(np.prod([a[1] - a[0] for a in self.axes]))

    def integral(self) -> float:
        return float(self.values.sum() * self.cell_volume)

    def max(self) -> float:
        return float(self.values.max())

    def negative_ratio(self) -> float:
        """``min / max`` of the stored values (0 if nothing is negative)."""
        return float(min(self.values.min(), 0.0) / self.values.max())

    def argmax(self) -> tuple:
        idx = np.unravel_index(np.argmax(self.values), self.values.shape)
        return tuple(float(a[i]) for a, i in zip(self.axes, idx))

    def at(self, x) -> np.ndarray:
        """Linear interpolation of a 1D grid (0 outside)."""
        if self.d != 1:
            raise DomainError("interpolation is provided for 1D grids")
        return np.interp(x, self.axes[0], self.values, left=0.0, right=0.0)


# --------------------------------------------------------------------------
# characteristic functions


def _run_chunks(fn, n, threads):
    starts = list(range(0, n, CHUNK))
    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            list(ex.map(fn, starts))
    else:
        for s in starts:
            fn(s)


def _half_line(x, dt, n_half, threads):
    """sum_i exp(i j dt x_i) for j = 0..n_half (inclusive), normalized."""
    out = np.empty(n_half + 1, dtype=complex)

    def job(s):
        e = min(s + CHUNK, out.size)
        K.ecf1d_chunk(x, s * dt, dt, out[s:e])

    _run_chunks(job, out.size, threads)
    return out / x.size


def ecf(pool, axes, threads: int = 1) -> CharFunGrid:
    """Empirical characteristic function on a centered-layout grid (d <= 2).

    Only frequencies with ``t_1 >= 0`` are summed; the rest follow from
    ``phi(-t) = conj(phi(t))``, which therefore holds exactly.
    """
    x = _values(pool)
    N, d = x.shape
    axes = tuple(np.asarray(a, dtype=float) for a in (axes if isinstance(axes, (tuple, list)) else (axes,)))
    if len(axes) != d:
        raise DomainError(f"need {d} frequency axes, got {len(axes)}")
    if d > 2:
        raise DomainError("grid characteristic functions are provided for d <= 2; use ecf_at")
    steps = [_axis_step(a) for a in axes]
    c = x.mean(axis=0)
    xc = np.ascontiguousarray(x - c)
    if d == 1:
        n = axes[0].size
        h = _half_line(xc[:, 0], steps[0], n // 2, threads)
        h *= np.exp(1j * np.arange(n // 2 + 1) * steps[0] * c[0])
        vals = np.empty(n, dtype=complex)
        vals[n // 2:] = h[: n // 2]
        vals[: n // 2] = np.conj(h[1:][::-1])
        vals[n // 2] = 1.0
    else:
        n1, n2 = axes[0].size, axes[1].size
        dt1, dt2 = steps
        t1 = np.arange(n1 // 2 + 1) * dt1
        P = np.empty((t1.size, n2 + 1), dtype=complex)

        def job(s):
            e = min(s + CHUNK, t1.size)
            K.ecf2d_rows(xc, t1[s:e], -(n2 // 2) * dt2, dt2, P[s:e])

        _run_chunks(job, t1.size, threads)
        P /= N
        t2 = (np.arange(n2 + 1) - n2 // 2) * dt2
        P *= np.exp(1j * (t1[:, None] * c[0] + t2[None, :] * c[1]))
        vals = np.empty((n1, n2), dtype=complex)
        vals[n1 // 2:, :] = P[: n1 // 2, :n2]
        # negative t1: phi(-a, t2_b) = conj(phi(a, t2_{n2-b}))
        rev = np.conj(P[1:, ::-1][:, :n2])  # row a, column b -> conj P[a, n2 - b]
        vals[: n1 // 2, :] = rev[::-1]
        row = vals[n1 // 2]
        row[: n2 // 2] = np.conj(P[0, n2:n2 // 2:-1])
        row[n2 // 2] = 1.0
    return CharFunGrid(axes, vals, N, tuple(float(v) for v in c))


def ecf_at(pool, points) -> np.ndarray:
    """Empirical characteristic function at arbitrary frequency points (P, d)."""
    x = _values(pool)
    t = np.atleast_2d(np.asarray(points, dtype=float))
    if t.shape[1] != x.shape[1]:
        t = t.reshape(-1, x.shape[1])
    out = np.empty(t.shape[0], dtype=complex)
    K.ecf_points(np.ascontiguousarray(x), np.ascontiguousarray(t), out)
    return out / x.shape[0]


def _boundary_points(Ts, steps, axis):
    """Frequencies on the two outermost grid lines orthogonal to ``axis``."""
    d = len(Ts)
    edge = np.array([-Ts[axis], -Ts[axis] + steps[axis], Ts[axis] - steps[axis]])
    if d == 1:
        return edge[:, None]
    other = 1 - axis
    n_other = int(round(2 * Ts[other] / steps[other]))
    line = (np.arange(n_other) - n_other // 2) * steps[other]
    pts = np.empty((edge.size * line.size, 2))
    pts[:, axis] = np.repeat(edge, line.size)
    pts[:, other] = np.tile(line, edge.size)
    return pts


def boundary_level(cf: CharFunGrid) -> float:
    """max |phi| on the outermost two grid lines of every axis."""
    v = np.abs(cf.values)
    if cf.d == 1:
        return float(max(v[:2].max(), v[-1]))
    return float(max(v[:2].max(), v[-1].max(), v[:, :2].max(), v[:, -1].max()))


def auto_axes(pool, level: float = BOUNDARY_LEVEL, period_factor: float = 2.0,
              taper_margin: float = 4.0, max_doublings: int = 12) -> tuple:
    """Frequency axes for inversion.

    The spacing is set so that the reconstruction period ``2 pi / dt`` is
    ``period_factor`` times the pool range; the extent ``T`` doubles from
    ``4 / sd`` until ``|phi|`` on the grid boundary is below ``level`` (or
    the noise level ``4.5 / sqrt(N)`` if larger) and is
    then stretched by ``taper_margin`` so that a Hann taper is close to 1
    wherever ``phi`` carries signal (the taper bias falls like ``1/T^2``).
    """
    x = _values(pool)
    d = x.shape[1]
    if d > 2:
        raise DomainError("automatic grids are provided for d <= 2")
    span = np.ptp(x, axis=0)
    sd = x.std(axis=0)
    if np.any(span <= 0):
        raise NumericalError("pool is constant along an axis: a point mass has no density to invert")
    dt = 2.0 * np.pi / (period_factor * span)
    T = 4.0 / sd
    level = max(level, NOISE_EDGE / np.sqrt(x.shape[0]))
    xc = x - x.mean(axis=0)

    def sizes():
        return [4 * int(np.ceil(2 * T[i] / dt[i] / 4)) for i in range(d)]

    for ax in range(d):
        for _ in range(max_doublings + 1):
            steps = [2 * T[i] / n for i, n in enumerate(sizes())]
            if np.abs(ecf_at(xc, _boundary_points(T, steps, ax))).max() < level:
                break
            T[ax] *= 2
        else:
            raise NumericalError(f"|phi| stays above {level} at the grid boundary; pool too small or lattice-like")
    T = T * taper_margin
    return tuple(frequency_axis(T[i], n) for i, n in enumerate(sizes()))


# --------------------------------------------------------------------------
# inversion


def _window(t: np.ndarray, kind: str) -> np.ndarray:
    if kind in (None, "none"):
        return np.ones_like(t)
    if kind == "hann":
        T = np.abs(t).max()
        return 0.5 * (1.0 + np.cos(np.pi * t / T))
    raise DomainError(f"unknown window {kind!r}")


def invert(cf: CharFunGrid, window: str = "hann", n_out: int | None = None,
           level: float = BOUNDARY_LEVEL) -> DensityGrid:
    """Density on the FFT-dual grid of a characteristic-function grid.

    Raises :class:`NumericalError` when ``|phi|`` on the boundary is at least
    ``level`` (the density would alias).  For empirical transforms the
    threshold is raised to ``4.5 / sqrt(N)``: ``|phi_hat|`` of pure noise is
    Rayleigh with scale ``1/sqrt(2N)`` and exceeds that with probability
    ``exp(-20)`` per point.  ``n_out`` zero-pads every axis to
    refine the spatial grid without changing its period ``2 pi / dt``.
    """
    if cf.radial:
        raise DomainError("radial profiles cannot be inverted")
    d = cf.d
    if d > 2:
        raise DomainError("inversion is provided for d <= 2")
    steps = [_axis_step(a) for a in cf.axes]
    vals = np.asarray(cf.values, dtype=complex)
    if vals.shape != tuple(a.size for a in cf.axes):
        raise DomainError("values do not match the axes")
    edge = boundary_level(cf)
    if cf.n_samples:
        level = max(level, NOISE_EDGE / np.sqrt(cf.n_samples))
    if edge >= level:
        raise NumericalError(f"|phi| = {edge:.3g} at the grid boundary (>= {level}); enlarge the frequency grid")
    center = np.asarray(cf.center if cf.center else (0.0,) * d, dtype=float)
    mesh = np.meshgrid(*cf.axes, indexing="ij")
    phase = np.exp(-1j * sum(m * c for m, c in zip(mesh, center)))
    w = np.ones(vals.shape)
    for i, a in enumerate(cf.axes):
        shape = [1] * d
        shape[i] = a.size
        w = w * _window(a, window).reshape(shape)
    g = vals * phase * w

    n_in = vals.shape
    target = n_out if n_out is not None else DEFAULT_POINTS[d]
    n_pad = tuple(max(4 * int(np.ceil(target / 4)), n) for n in n_in)
    buf = np.zeros(n_pad, dtype=complex)
    sl = tuple(slice((p - n) // 2, (p - n) // 2 + n) for p, n in zip(n_pad, n_in))
    buf[sl] = g
    for i, p in enumerate(n_pad):
        shape = [1] * d
        shape[i] = p
        buf *= ((-1.0) ** np.arange(p)).reshape(shape)
    F = np.fft.fftn(buf)
    for i, p in enumerate(n_pad):
        shape = [1] * d
        shape[i] = p
        F *= ((-1.0) ** np.arange(p)).reshape(shape)
    F *= np.prod(steps) / (2 * np.pi) ** d
    dx = [2 * np.pi / (p * s) for p, s in zip(n_pad, steps)]
    axes = tuple(c + (np.arange(p) - p // 2) * h for c, p, h in zip(center, n_pad, dx))
    re = F.real.copy()
    scale = np.abs(re).max()
    diag = {
        "boundary_level": edge,
        "imag_relative": float(np.abs(F.imag).max() / scale) if scale > 0 else 0.0,
        "frequency_extent": [float(np.abs(a).max()) for a in cf.axes],
        "n_frequencies": list(n_in),
    }
    out = DensityGrid(axes, re, "fourier", {"window": window or "none"}, diag)
    diag.update({"integral": out.integral(), "negative_ratio": out.negative_ratio()})
    return out


def invert_pool(pool, window: str = "hann", n_out: int | None = None, threads: int = 1) -> DensityGrid:
    """Automatic grid, empirical characteristic function, inversion."""
    return invert(ecf(pool, auto_axes(pool), threads), window, n_out)


# --------------------------------------------------------------------------
# kernel density estimate


def silverman_bandwidth(x: np.ndarray) -> np.ndarray:
    x = _values(x)
    sd = x.std(axis=0, ddof=1) if x.shape[0] > 1 else np.zeros(x.shape[1])
    iqr = stats.iqr(x, axis=0) / 1.34
    spread = np.where(iqr > 0, np.minimum(sd, iqr), sd)
    return 0.9 * spread * x.shape[0] ** (-0.2)


def kde(pool, bandwidth="auto", axes=None, n: int | None = None) -> DensityGrid:
    """Gaussian-kernel density on a grid (d <= 2), kernel cut at 8 bandwidths."""
    x = _values(pool)
    N, d = x.shape
    if d > 2:
        raise DomainError("kde is provided for d <= 2")
    if bandwidth == "auto":
        h = silverman_bandwidth(x)
        if np.any(h <= 0):
            raise DomainError("automatic bandwidth needs a pool with spread; pass a bandwidth")
    else:
        h = np.broadcast_to(np.asarray(bandwidth, dtype=float), (d,)).copy()
        if np.any(h <= 0):
            raise DomainError("bandwidth must be positive")
    if axes is None:
        n = n or DEFAULT_POINTS[d]
        axes = tuple(np.linspace(x[:, i].min() - 4 * h[i], x[:, i].max() + 4 * h[i], n) for i in range(d))
    axes = tuple(np.asarray(a, dtype=float) for a in (axes if isinstance(axes, (tuple, list)) else (axes,)))
    steps = [a[1] - a[0] for a in axes]
    for a, s in zip(axes, steps):
        if not (s > 0 and np.allclose(np.diff(a), s, rtol=1e-8, atol=0)):
            raise DomainError("kde axes must be uniform and increasing")
    if d == 1:
        out = np.empty(axes[0].size)
        K.kde1d(np.ascontiguousarray(x[:, 0]), axes[0][0], steps[0], h[0], out)
    else:
        out = np.empty((axes[0].size, axes[1].size))
        K.kde2d(np.ascontiguousarray(x), axes[0][0], steps[0], axes[1][0], steps[1], h[0], h[1], out)
    g = DensityGrid(axes, out, "kde", {"bandwidth": h.tolist()})
    g.diagnostics["integral"] = g.integral()
    return g


def l1_distance(a: DensityGrid, b: DensityGrid) -> float:
    """``int |f_a - f_b|`` on the grid of ``a`` (1D: ``b`` interpolated)."""
    if a.d == 1:
        return float(np.sum(np.abs(a.values - b.at(a.axes[0]))) * a.cell_volume)
    if any(x.shape != y.shape or not np.allclose(x, y) for x, y in zip(a.axes, b.axes)):
        raise DomainError("2D grids must share axes")
    return float(np.sum(np.abs(a.values - b.values)) * a.cell_volume)


# --------------------------------------------------------------------------
# decay of |phi|


@dataclass(frozen=True)
class DecayFit:
    beta_hat: float
    window: tuple
    r_squared: float
    superpolynomial: bool | None
    half_slopes: tuple
    n_points: int
    status: str = "ok"

    @property
    def conclusive(self) -> bool:
        return self.status == "ok"


def decay_grid(pool, n: int = 4096, factor: float = 3.0, max_doublings: int = 16,
               threads: int = 1) -> CharFunGrid:
    """1D frequency grid long enough for |phi_hat| to reach its noise floor."""
    x = _values(pool)
    if x.shape[1] != 1:
        raise DomainError("decay_grid is 1D; use radial_ecf for d = 2")
    floor = factor / np.sqrt(x.shape[0])
    xc = x - x.mean(axis=0)
    T = 4.0 / max(float(x.std()), 1e-300)
    for _ in range(max_doublings):
        probe = np.linspace(0.75 * T, T, 32)[:, None]
        if np.abs(ecf_at(xc, probe)).max() < floor:
            break
        T *= 2
    return ecf(x, frequency_axis(T, n), threads)


def radial_ecf(pool, t_max: float, n: int = 256, directions: int = 32) -> CharFunGrid:
    """Radial profile: |phi_hat| averaged over equally spaced directions on [0, pi)."""
    x = _values(pool)
    if x.shape[1] != 2:
        raise DomainError("radial_ecf needs d = 2")
    r = np.linspace(0.0, t_max, n)
    th = np.pi * np.arange(directions) / directions
    u = np.stack([np.cos(th), np.sin(th)], axis=1)
    pts = (r[:, None, None] * u[None, :, :]).reshape(-1, 2)
    mags = np.abs(ecf_at(x - x.mean(axis=0), pts)).reshape(n, directions).mean(axis=1)
    return CharFunGrid((r,), mags.astype(complex), x.shape[0], (), radial=True)


def _slope(lt, le):
    res = stats.linregress(lt, le)
    return float(res.slope), float(res.rvalue ** 2)


def decay_fit(cf: CharFunGrid, t_min: float | None = None, t_max: float | None = None,
              floor: float | None = None, edge_factor: float = 2.0, n_fit: int = 64) -> DecayFit:
    """Fit ``|phi(t)| ~ C t^-beta`` to the upper envelope of |phi_hat|.

    Only record points (where |phi_hat| equals its running maximum from the
    right) enter the fit, averaged in ``n_fit`` bins equally spaced in log t;
    for oscillating transforms these are the local peaks.

    The window runs from ``t_min`` (default: where the envelope drops below
    1/2) to the first frequency ``t`` where |phi_hat| stays below
    ``edge_factor`` times the noise floor ``3/sqrt(n_samples)`` on all of
    ``[t, 2t]``.  Near the floor the record points are maxima of signal plus
    noise and bias the slope toward zero, hence the margin.
    ``superpolynomial`` is set when the slope on the upper half of the window
    (in log t) is at least 1.5 times steeper than on the lower half.
    """
    if cf.d != 1:
        raise DomainError("decay_fit needs a 1D grid or a radial profile")
    t = np.asarray(cf.axes[0], dtype=float)
    m = np.abs(cf.values)
    keep = t > 0
    t, m = t[keep], m[keep]
    floor = cf.noise_floor() if floor is None else floor
    empty = DecayFit(np.nan, (np.nan, np.nan), np.nan, None, (np.nan, np.nan), 0, "inconclusive")
    # upper edge: first t whose local maximum over [t, 2t] is at the noise floor,
    # so an isolated noise spike far out cannot stretch the window
    j2 = np.searchsorted(t, 2 * t, side="right")
    local = np.array([m[i:max(j, i + 1)].max() for i, j in enumerate(j2)]) if t.size else m
    cross = np.nonzero(local <= edge_factor * floor)[0]
    stop = cross[0] if cross.size else t.size
    if stop == 0:
        return empty
    t, m = t[:stop], m[:stop]
    env = np.maximum.accumulate(m[::-1])[::-1]
    hi = t[-1] if t_max is None else min(t_max, t[-1])
    if t_min is None:
        below = np.nonzero(env <= 0.5)[0]
        if below.size == 0:
            return empty
        t_min = t[below[0]]
    lo = float(t_min)
    sel = (t >= lo) & (t <= hi)
    if sel.sum() < 5 or hi / lo < 1.5:
        return DecayFit(np.nan, (lo, float(hi)), np.nan, None, (np.nan, np.nan), int(sel.sum()), "inconclusive")
    # record points (where |phi_hat| touches its envelope), averaged in log-t bins
    rec = sel & (m >= env)
    lt_all, lm_all = np.log(t[rec]), np.log(m[rec])
    edges = np.linspace(np.log(lo), np.log(hi), n_fit + 1)
    bins = np.clip(np.searchsorted(edges, lt_all, side="right") - 1, 0, n_fit - 1)
    cnt = np.bincount(bins, minlength=n_fit)
    used = cnt > 0
    if used.sum() < 4:
        return DecayFit(np.nan, (lo, float(hi)), np.nan, None, (np.nan, np.nan), int(sel.sum()), "inconclusive")
    lt = np.bincount(bins, lt_all, n_fit)[used] / cnt[used]
    le = np.bincount(bins, lm_all, n_fit)[used] / cnt[used]
    slope, r2 = _slope(lt, le)
    mid = 0.5 * (np.log(lo) + np.log(hi))
    lower, upper = lt <= mid, lt > mid
    s1 = _slope(lt[lower], le[lower])[0] if lower.sum() >= 2 else np.nan
    s2 = _slope(lt[upper], le[upper])[0] if upper.sum() >= 2 else np.nan
    superpoly = bool(-s2 > 1.5 * max(-s1, 0.0) and -s2 > 0.5) if np.isfinite(s1 + s2) else None
    return DecayFit(-slope, (lo, float(hi)), r2, superpoly, (-s1, -s2), int(sel.sum()))


def decay_profile(cf: CharFunGrid, t0: float, max_doublings: int = 10) -> list[DecayFit]:
    """Decay fits with the lower window edge at ``t0, 2 t0, 4 t0, ...``."""
    fits = []
    for k in range(max_doublings + 1):
        f = decay_fit(cf, t_min=t0 * 2 ** k)
        if not f.conclusive:
            break
        fits.append(f)
    return fits
