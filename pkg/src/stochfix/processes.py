"""Finite-size random processes whose rescaled statistics converge to the fixed points.

Each run draws from its own generator, seeded from ``(seed, TAG_PROCESS, run)``,
so batches are reproducible and independent of the number of threads.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ConfigError, DomainError
from .models import SplitLaw
from .streams import TAG_PROCESS, child_seed

RUN_CHUNK = 256


# --------------------------------------------------------------------------
# compiled simulators (one run each; the caller seeds numba's generator)


@njit(nogil=True, cache=True)
def _quicksort(n, exchanges):
    """Comparisons (and partition exchanges) of random-pivot Quicksort on n keys."""
    stack = np.empty(128, dtype=np.int64)
    stack_size = stack.shape[0]
    top = 0
    stack[top] = n
    top += 1
    cmp = 0
    xch = 0
    while top > 0:
        top -= 1
        m = stack[top]
        if m <= 1:
            continue
        cmp += m - 1
        k = np.random.randint(0, m)  # keys smaller than the pivot
        if exchanges and k > 0 and m - 1 - k > 0:
            xch += np.random.hypergeometric(m - 1 - k, k, k)
        if top + 2 > stack_size:
            new = np.empty(2 * stack_size, dtype=np.int64)
            new[:top] = stack[:top]
            stack = new
            stack_size = 2 * stack_size
        # larger part first so the stack stays logarithmic
        if k > m - 1 - k:
            stack[top] = k
            stack[top + 1] = m - 1 - k
        else:
            stack[top] = m - 1 - k
            stack[top + 1] = k
        top += 2
    return cmp, xch


@njit(nogil=True, cache=True)
def _rrt_pathlen(n):
    depth = np.zeros(n, dtype=np.int64)
    total = 0
    for i in range(1, n):
        d = depth[np.random.randint(0, i)] + 1
        depth[i] = d
        total += d
    return total


@njit(nogil=True, cache=True)
def _polya_det(R, init, n):
    counts = init.copy()
    q = counts.shape[0]
    total = counts.sum()
    for _ in range(n):
        u = np.random.random() * total
        i = 0
        acc = counts[0]
        while acc <= u and i < q - 1:
            i += 1
            acc += counts[i]
        for k in range(q):
            counts[k] += R[i, k]
            if counts[k] < 0:
                return counts, False
        total = counts.sum()
        if total <= 0:
            return counts, False
    return counts, True


@njit(nogil=True, cache=True)
def _polya_rand(p, init, n):
    """Two colours; a drawn ball of colour i adds colour i w.p. p[i], else the other."""
    counts = init.copy()
    for _ in range(n):
        i = 0 if np.random.random() * (counts[0] + counts[1]) < counts[0] else 1
        if np.random.random() < p[i]:
            counts[i] += 1
        else:
            counts[1 - i] += 1
    return counts


@njit(nogil=True, cache=True)
def _split_vector(kind, b, alpha, v, out):
    if kind == 0:
        u = np.random.random()
        out[0] = u
        out[1] = 1.0 - u
    elif kind == 1:
        s = 0.0
        for j in range(b):
            g = np.random.gamma(alpha, 1.0)
            out[j] = g
            s += g
        if s <= 0.0:
            for j in range(b):
                out[j] = 1.0 / b
        else:
            for j in range(b):
                out[j] /= s
    else:
        for j in range(b):
            out[j] = v[j]


@njit(nogil=True, cache=True)
def _pick(V, u, b):
    x = np.random.random()
    acc = 0.0
    for j in range(b - 1):
        acc += V[u, j]
        if x < acc:
            return j
    return b - 1


@njit(nogil=True, cache=True)
def _split_tree(n, b, s, s0, s1, kind, alpha, v):
    """Insert n balls into a random split tree; return (path length, Wiener index).

    Both statistics are taken over balls: the path length sums the depth of
    the node holding each ball and the Wiener index sums, over edges, the
    product of the ball counts on either side.
    """
    cap = 1024
    while cap < 2 * n + 2 * b:
        cap *= 2
    parent = np.empty(cap, dtype=np.int64)
    depth = np.empty(cap, dtype=np.int64)
    count = np.zeros(cap, dtype=np.int64)
    first = np.full(cap, -1, dtype=np.int64)  # first child, -1 for leaves
    V = np.empty((cap, b))
    parent[0] = -1
    depth[0] = 0
    _split_vector(kind, b, alpha, v, V[0])
    nodes = 1
    pend_u = np.empty(64, dtype=np.int64)  # overflowing leaves
    tmp = np.zeros(b, dtype=np.int64)
    for _ in range(n):
        u = 0
        while first[u] >= 0:
            u = first[u] + _pick(V, u, b)
        count[u] += 1
        if count[u] <= s:
            continue
        top = 1
        pend_u[0] = u
        while top > 0:
            top -= 1
            u = pend_u[top]
            # overflow: keep s0, open b children, s1 balls each, route the rest
            extra = count[u] - s0
            count[u] = s0
            if nodes + b > cap:
                cap2 = 2 * cap
                parent = np.concatenate((parent, np.empty(cap2 - cap, dtype=np.int64)))
                depth = np.concatenate((depth, np.empty(cap2 - cap, dtype=np.int64)))
                count = np.concatenate((count, np.zeros(cap2 - cap, dtype=np.int64)))
                first = np.concatenate((first, np.full(cap2 - cap, -1, dtype=np.int64)))
                V2 = np.empty((cap2, b))
                V2[:cap] = V[:cap]
                V = V2
                cap = cap2
            f = nodes
            first[u] = f
            for j in range(b):
                c = f + j
                parent[c] = u
                depth[c] = depth[u] + 1
                count[c] = 0
                first[c] = -1
                _split_vector(kind, b, alpha, v, V[c])
            nodes += b
            for j in range(b):
                tmp[j] = s1
            for _r in range(extra - b * s1):
                tmp[_pick(V, u, b)] += 1
            for j in range(b):
                c = f + j
                count[c] = tmp[j]
                if tmp[j] > s:
                    if top >= pend_u.shape[0]:
                        pend_u = np.concatenate((pend_u, np.empty(pend_u.shape[0], dtype=np.int64)))
                    pend_u[top] = c
                    top += 1
    psi = 0
    for u in range(nodes):
        psi += count[u] * depth[u]
    sub = count[:nodes].copy()
    for u in range(nodes - 1, 0, -1):
        sub[parent[u]] += sub[u]
    w = 0
    for u in range(1, nodes):
        w += sub[u] * (n - sub[u])
    return psi, w


# --------------------------------------------------------------------------
# tree statistics for explicit trees


def path_length(parent, counts=None) -> int:
    """Sum over stored items of the depth of their node (``parent[root] = -1``)."""
    parent = np.asarray(parent, dtype=np.int64)
    counts = np.ones(parent.size, dtype=np.int64) if counts is None else np.asarray(counts, dtype=np.int64)
    depth = np.zeros(parent.size, dtype=np.int64)
    for u in _topological(parent):
        if parent[u] >= 0:
            depth[u] = depth[parent[u]] + 1
    return int(np.sum(depth * counts))


def wiener_index(parent, counts=None) -> int:
    """Sum of distances over unordered pairs of items, via subtree sizes."""
    parent = np.asarray(parent, dtype=np.int64)
    counts = np.ones(parent.size, dtype=np.int64) if counts is None else np.asarray(counts, dtype=np.int64)
    total = int(counts.sum())
    sub = counts.copy()
    for u in reversed(_topological(parent)):
        if parent[u] >= 0:
            sub[parent[u]] += sub[u]
    return int(sum(sub[u] * (total - sub[u]) for u in range(parent.size) if parent[u] >= 0))


def _topological(parent) -> list[int]:
    children = [[] for _ in range(parent.size)]
    roots = []
    for u, p in enumerate(parent):
        (roots if p < 0 else children[p]).append(u)
    if len(roots) != 1:
        raise DomainError("parent array must describe a single rooted tree")
    order, todo = [], list(roots)
    while todo:
        u = todo.pop()
        order.append(u)
        todo.extend(children[u])
    if len(order) != parent.size:
        raise DomainError("parent array contains a cycle")
    return order


# --------------------------------------------------------------------------
# exact means


def harmonic(n: int) -> float:
    return float(np.sum(1.0 / np.arange(1, n + 1))) if n > 0 else 0.0


def quicksort_mean(n: int) -> float:
    """``E[C_n] = 2(n+1) H_n - 4n``."""
    return 2.0 * (n + 1) * harmonic(n) - 4.0 * n


def rrt_pathlen_mean(n: int) -> float:
    """``E[Y_n] = sum_{i<n} H_i = n H_{n-1} - (n-1)``."""
    return n * harmonic(n - 1) - (n - 1) if n > 1 else 0.0


def polya_mean(replacement, init, n: int) -> np.ndarray:
    """Exact mean composition of a balanced urn after ``n`` draws.

    ``replacement`` is the (mean) replacement matrix with constant row sum S:
    ``m_{k+1} = m_k (I + R / (tau_0 + k S))``.
    """
    R = np.asarray(replacement, dtype=float)
    m = np.asarray(init, dtype=float).copy()
    tau = m.sum()
    S = R.sum(axis=1)[0]
    for k in range(n):
        m = m + m @ R / (tau + k * S)
    return m


# --------------------------------------------------------------------------
# public API


@dataclass(frozen=True)
class ProcessSpec:
    model: str
    params: dict
    exponents: tuple
    labels: tuple


@dataclass(frozen=True, eq=False)
class ProcessRun:
    model: str
    n: int
    statistic: np.ndarray  # raw value(s)
    scaled: np.ndarray | None  # centered at the exact mean when one is known


@dataclass(frozen=True, eq=False)
class ScaledBatch:
    model: str
    n: int
    raw: np.ndarray  # (runs, k)
    scaled: np.ndarray  # (runs, k)
    center: np.ndarray
    exponents: tuple
    centering: str
    labels: tuple


PROCESS_MODELS = ("quicksort_cmp", "quicksort_cmp_xch", "polya", "rrt_pathlen",
                  "split_pathlen", "split_pathlen_wiener")


def _split_params(p):
    b = int(p.get("b", 2))
    s = int(p.get("s", 1))
    s0 = int(p.get("s0", 1))
    s1 = int(p.get("s1", 0))
    law = SplitLaw.from_params(b, p.get("law", "bst"))
    if s < 1 or not 0 <= s0 <= s or s1 < 0 or b * s1 > s + 1 - s0:
        raise ConfigError("split tree needs s >= 1, 0 <= s0 <= s and 0 <= b*s1 <= s+1-s0")
    kind = {"bst": 0, "dirichlet": 1, "deterministic": 2}[law.kind]
    v = np.asarray(law.v if law.v is not None else np.full(b, 1.0 / b), dtype=float)
    return (b, s, s0, s1, kind, float(law.alpha or 1.0), v)


def _polya_params(p):
    init = np.asarray(p.get("init", [1, 0]), dtype=np.int64)
    if init.ndim != 1 or init.size < 2 or np.any(init < 0) or init.sum() < 1:
        raise ConfigError("urn needs a non-negative initial composition with at least one ball")
    if "replacement" in p:
        R = np.asarray(p["replacement"], dtype=np.int64)
        if R.shape != (init.size, init.size) or np.any(R != np.asarray(p["replacement"])):
            raise ConfigError("replacement must be an integer q x q matrix matching init")
        sums = R.sum(axis=1)
        if np.any(sums != sums[0]) or sums[0] < 1:
            raise ConfigError("replacement matrix must be balanced with positive row sum")
        ev = np.linalg.eigvals(R.astype(float))
        S = float(sums[0])
        others = [z for z in ev if abs(z - S) > 1e-9]
        lam = max(z.real for z in others) / S if others else 1.0
        return ("det", R, init, lam, R.astype(float))
    if "p1" in p and "p2" in p:
        pr = np.array([float(p["p1"]), float(p["p2"])])
        if init.size != 2 or np.any((pr < 0) | (pr > 1)):
            raise ConfigError("random two-colour urn needs p1, p2 in [0, 1] and two colours")
        mean_R = np.array([[pr[0], 1 - pr[0]], [1 - pr[1], pr[1]]])
        return ("rand", pr, init, pr.sum() - 1.0, mean_R)
    raise ConfigError("polya needs a 'replacement' matrix or probabilities 'p1', 'p2'")


def describe_process(model: str, params: dict | None = None) -> ProcessSpec:
    p = dict(params or {})
    if model in ("quicksort_cmp", "rrt_pathlen", "split_pathlen"):
        if model == "split_pathlen":
            _split_params(p)
        return ProcessSpec(model, p, (1.0,), ("stat",))
    if model == "quicksort_cmp_xch":
        return ProcessSpec(model, p, (1.0, 1.0), ("comparisons", "exchanges"))
    if model == "split_pathlen_wiener":
        _split_params(p)
        return ProcessSpec(model, p, (2.0, 1.0), ("wiener", "pathlen"))
    if model == "polya":
        lam = _polya_params(p)[3]
        return ProcessSpec(model, p, (lam,), ("colour1",))
    raise ConfigError(f"unknown process {model!r}; choose from {', '.join(PROCESS_MODELS)}")


@njit(nogil=True, cache=True)
def _batch_quicksort(n, exchanges, seeds, out):
    for i in range(seeds.shape[0]):
        np.random.seed(seeds[i])
        c, x = _quicksort(n, exchanges)
        out[i, 0] = c
        if exchanges:
            out[i, 1] = x


@njit(nogil=True, cache=True)
def _batch_rrt(n, seeds, out):
    for i in range(seeds.shape[0]):
        np.random.seed(seeds[i])
        out[i, 0] = _rrt_pathlen(n)


@njit(nogil=True, cache=True)
def _batch_split(n, b, s, s0, s1, kind, alpha, v, wiener, seeds, out):
    for i in range(seeds.shape[0]):
        np.random.seed(seeds[i])
        psi, w = _split_tree(n, b, s, s0, s1, kind, alpha, v)
        if wiener:
            out[i, 0] = w
            out[i, 1] = psi
        else:
            out[i, 0] = psi


@njit(nogil=True, cache=True)
def _batch_polya_det(R, init, n, seeds, out):
    """Returns False if some run empties the urn."""
    for i in range(seeds.shape[0]):
        np.random.seed(seeds[i])
        counts, ok = _polya_det(R, init, n)
        if not ok:
            return False
        out[i, :] = counts
    return True


@njit(nogil=True, cache=True)
def _batch_polya_rand(pr, init, n, seeds, out):
    for i in range(seeds.shape[0]):
        np.random.seed(seeds[i])
        out[i, :] = _polya_rand(pr, init, n)


def _simulate_chunk(model, n, p, seeds, out):
    if model in ("quicksort_cmp", "quicksort_cmp_xch"):
        _batch_quicksort(n, model == "quicksort_cmp_xch", seeds, out)
    elif model == "rrt_pathlen":
        _batch_rrt(n, seeds, out)
    elif model in ("split_pathlen", "split_pathlen_wiener"):
        _batch_split(n, *p, model == "split_pathlen_wiener", seeds, out)
    elif model == "polya":
        kind, M, init, _, _ = p
        if kind == "det":
            if not _batch_polya_det(M, init, n, seeds, out):
                raise ConfigError("urn ran out of balls: replacement scheme is not tenable")
        else:
            _batch_polya_rand(M, init, n, seeds, out)
    else:
        raise ConfigError(f"unknown process {model!r}")


def _width(model, p):
    if model == "polya":
        return p[2].size
    return 2 if model in ("quicksort_cmp_xch", "split_pathlen_wiener") else 1


def _prepared(model, params):
    describe_process(model, params)
    if model.startswith("split"):
        return _split_params(params)
    if model == "polya":
        return _polya_params(params)
    return None


def _exact_mean(model, n, p):
    if model == "quicksort_cmp":
        return np.array([quicksort_mean(n)])
    if model == "rrt_pathlen":
        return np.array([rrt_pathlen_mean(n)])
    if model == "polya":
        return polya_mean(p[4], p[2], n)
    return None


def run(model: str, n: int, seed: int = 0, run_index: int = 0, params: dict | None = None) -> ProcessRun:
    """Simulate one process of size ``n``.

    Raw statistics: comparisons (and exchanges), the urn composition after
    ``n`` draws, or tree path length (and Wiener index).  ``scaled`` is
    ``(stat - E stat) / n^exponent`` when the exact mean is available, else None.
    """
    if n < 1:
        raise DomainError("process size must be at least 1")
    params = dict(params or {})
    spec = describe_process(model, params)
    p = _prepared(model, params)
    seeds = np.array([child_seed(seed, TAG_PROCESS, run_index)], dtype=np.int64)
    out = np.zeros((1, _width(model, p)), dtype=np.int64)
    _simulate_chunk(model, int(n), p, seeds, out)
    stat = out[0]
    mean = _exact_mean(model, n, p)
    scaled = None
    if mean is not None:
        head = stat[: len(spec.exponents)]
        scaled = (head - mean[: len(spec.exponents)]) / float(n) ** np.asarray(spec.exponents)
    return ProcessRun(model, int(n), stat, scaled)


def simulate_raw(model: str, n: int, runs: int, seed: int = 0, params: dict | None = None,
                 threads: int = 1) -> np.ndarray:
    """Raw statistics of ``runs`` independent runs, shape (runs, k)."""
    params = dict(params or {})
    p = _prepared(model, params)
    seeds = np.array([child_seed(seed, TAG_PROCESS, i) for i in range(runs)], dtype=np.int64)
    out = np.zeros((runs, _width(model, p)), dtype=np.int64)

    def chunk(start):
        stop = min(start + RUN_CHUNK, runs)
        _simulate_chunk(model, int(n), p, seeds[start:stop], out[start:stop])

    starts = list(range(0, runs, RUN_CHUNK))
    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            list(ex.map(chunk, starts))
    else:
        for st in starts:
            chunk(st)
    return out


def scaled_batch(model: str, n: int, runs: int, seed: int = 0, params: dict | None = None,
                 centering: str = "auto", threads: int = 1, min_runs: int = 1000) -> ScaledBatch:
    """Centered and rescaled statistics of ``runs`` independent runs.

    Scaling exponents: 1 for comparison counts and path lengths, ``(2, 1)``
    for (Wiener index, path length) and ``lambda`` for the first urn colour.
    ``centering="auto"`` uses the exact mean where one is known (Quicksort
    comparisons, recursive-tree path length, urns) and the batch mean otherwise.
    """
    if runs < min_runs:
        raise DomainError(f"need at least {min_runs} runs")
    if centering not in ("auto", "exact", "batch"):
        raise DomainError("centering must be 'auto', 'exact' or 'batch'")
    params = dict(params or {})
    spec = describe_process(model, params)
    p = _prepared(model, params)
    raw = simulate_raw(model, n, runs, seed, params, threads)
    k = len(spec.exponents)
    head = raw[:, :k].astype(float)
    mean = _exact_mean(model, n, p)
    if centering == "exact" and mean is None:
        raise DomainError(f"no exact mean is available for {model}")
    if centering == "batch" or mean is None:
        center, how = head.mean(axis=0), "batch"
    else:
        center, how = np.asarray(mean[:k], dtype=float), "exact"
    scaled = (head - center) / float(n) ** np.asarray(spec.exponents)
    return ScaledBatch(model, int(n), raw, scaled, center, spec.exponents, how, spec.labels)


# fixed-point model that each process converges to (after rescaling)
LIMIT_MODEL = {
    "quicksort_cmp": {"model": "quicksort"},
    "rrt_pathlen": {"model": "rrt"},
    "split_pathlen": {"model": "split"},
    "split_pathlen_wiener": {"model": "split2d"},
}
