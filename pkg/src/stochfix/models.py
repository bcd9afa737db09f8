"""Constructors for the worked examples: Quicksort, Pólya urns, recursive and split trees.

Every builder returns an :class:`~stochfix.core.EquationSystem` with exact
coefficient laws.  Configurations are plain ``{"model": name, **params}``
mappings so they round-trip through JSON.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from scipy.special import digamma, xlogy

from .core import EquationSystem, embed_complex, finite_law_sampler
from .errors import ConfigError


def _xlogx(x):
    return xlogy(x, x)


def quicksort_toll(u):
    """``2u ln u + 2(1-u) ln(1-u) + 1``; integrates to 0 over (0, 1)."""
    return 2.0 * _xlogx(u) + 2.0 * _xlogx(1.0 - u) + 1.0


def rrt_toll(u):
    """``u + u ln u + (1-u) ln(1-u)``; integrates to 0 over (0, 1)."""
    return u + _xlogx(u) + _xlogx(1.0 - u)


def quicksort2d_toll(u, variant: str = "centered"):
    """Shift of the comparisons/exchanges equation.

    ``"centered"`` uses ``(u ln u + (1-u) ln(1-u)) * (2, 1/3) + (1, u(1-u))``:
    both components have mean 0 and the first equals :func:`quicksort_toll`.
    ``"as_printed"`` doubles the entropy term, which leaves a mean of
    ``(-1, -1/6)``; under it no centered fixed point exists.
    """
    u = np.asarray(u, dtype=float)
    ent = _xlogx(u) + _xlogx(1.0 - u)
    if variant == "as_printed":
        ent = 2.0 * ent
    elif variant != "centered":
        raise ConfigError(f"unknown quicksort2d shift variant {variant!r}")
    return np.stack([2.0 * ent + 1.0, ent / 3.0 + u * (1.0 - u)], axis=-1)


def _uniform(rng, n):
    # open interval keeps logarithms and powers finite
    u = rng.random(n)
    while np.any(u == 0.0):
        bad = u == 0.0
        u[bad] = rng.random(int(bad.sum()))
    return u


def _dirichlet(rng, n, k, alpha, positive=False):
    g = rng.standard_gamma(alpha, size=(n, k))
    s = g.sum(axis=1)
    bad = s == 0.0
    if positive:
        bad |= np.any(g == 0.0, axis=1)
    while np.any(bad):
        g[bad] = rng.standard_gamma(alpha, size=(int(bad.sum()), k))
        s[bad] = g[bad].sum(axis=1)
        bad = s == 0.0
        if positive:
            bad |= np.any(g == 0.0, axis=1)
    return g / s[:, None]


# --------------------------------------------------------------------------
# split vectors


@dataclass(frozen=True)
class SplitLaw:
    """Law of a random split vector on the unit simplex of R^b.

    ``kind`` is ``"bst"`` ((U, 1-U)), ``"dirichlet"`` (symmetric, parameter
    ``alpha``) or ``"deterministic"`` (fixed vector ``v``).
    """

    kind: str
    b: int
    alpha: float | None = None
    v: tuple[float, ...] | None = None

    @classmethod
    def from_params(cls, b: int, law) -> "SplitLaw":
        if isinstance(law, SplitLaw):
            return law
        if isinstance(law, str):
            law = {"kind": law}
        law = dict(law)
        kind = law.pop("kind", None)
        if kind == "bst":
            if b != 2:
                raise ConfigError("the (U, 1-U) split law needs b = 2")
            return cls("bst", 2)
        if kind == "dirichlet":
            alpha = float(law.get("alpha", 1.0))
            if not alpha > 0:
                raise ConfigError("dirichlet split law needs alpha > 0")
            return cls("dirichlet", int(b), alpha=alpha)
        if kind == "deterministic":
            v = tuple(float(x) for x in law["v"])
            if len(v) != b:
                raise ConfigError(f"split vector has {len(v)} entries, expected b = {b}")
            if min(v) < 0 or abs(sum(v) - 1.0) > 1e-12:
                raise ConfigError("split vector must lie on the unit simplex")
            return cls("deterministic", int(b), v=v)
        raise ConfigError(f"unknown split law {kind!r}")

    def __post_init__(self):
        if self.b < 2:
            raise ConfigError("branch factor b must be >= 2")
        if self.kind == "deterministic" and max(self.v) >= 1.0:
            raise ConfigError("need P(some V_i = 1) < 1 (otherwise mu = 0)")

    @property
    def is_deterministic(self) -> bool:
        return self.kind == "deterministic"

    def sample(self, rng, n) -> np.ndarray:
        if self.kind == "bst":
            u = _uniform(rng, n)
            return np.stack([u, 1.0 - u], axis=1)
        if self.kind == "dirichlet":
            return _dirichlet(rng, n, self.b, self.alpha)
        return np.broadcast_to(np.asarray(self.v), (n, self.b)).copy()

    @property
    def mu(self) -> float:
        """``-E[sum_j V_j ln V_j]``."""
        if self.kind == "deterministic":
            return float(-np.sum(_xlogx(np.asarray(self.v))))
        a = 1.0 if self.kind == "bst" else self.alpha
        return float(digamma(self.b * a + 1.0) - digamma(a + 1.0))

    @property
    def mean_sum_sq(self) -> float:
        """``E[sum_j V_j^2]``."""
        if self.kind == "deterministic":
            return float(np.sum(np.square(self.v)))
        a = 1.0 if self.kind == "bst" else self.alpha
        return (a + 1.0) / (self.b * a + 1.0)

    def toll(self, V: np.ndarray) -> np.ndarray:
        """``C(V) = 1 + (1/mu) sum_j V_j ln V_j``."""
        return 1.0 + np.sum(_xlogx(V), axis=-1) / self.mu

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.alpha is not None:
            out["alpha"] = self.alpha
        if self.v is not None:
            out["v"] = list(self.v)
        return out


def split2d_matrices(V: np.ndarray) -> np.ndarray:
    """``[[V^2, V(1-V)], [0, V]]`` for every entry of ``V`` (broadcast)."""
    V = np.asarray(V, dtype=float)
    out = np.zeros(V.shape + (2, 2))
    out[..., 0, 0] = V * V
    out[..., 0, 1] = V * (1.0 - V)
    out[..., 1, 1] = V
    return out


def split2d_singular_values(v):
    """Closed-form (min gain, op norm) of :func:`split2d_matrices`."""
    v = np.asarray(v, dtype=float)
    root = (1.0 - v) * np.sqrt(1.0 + v * v)
    base = 1.0 - v * (1.0 - v)
    return v * np.sqrt(np.maximum(base - root, 0.0)), v * np.sqrt(base + root)


# --------------------------------------------------------------------------
# urns


def _beta1_power_mean(alpha, power):
    """``E[D^power]`` for ``D ~ Beta(alpha, 1)`` (power may be complex)."""
    return alpha / (alpha + power)


def urn_mean_direction(a, b, c, d) -> np.ndarray:
    """Mean-consistent direction ``(b, -c)`` of the deterministic two-colour urn."""
    return np.array([b, -c], dtype=float) / max(b, c)


def _mean_consistent(e, index_row, r):
    e = np.asarray(e, dtype=float)
    w = e[list(index_row)]

    def shift(coeffs):
        return coeffs @ w - e[r]

    return shift


# --------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class ModelConfig:
    """A named model with its parameters (JSON-compatible)."""

    name: str
    params: Mapping = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: Mapping) -> "ModelConfig":
        data = dict(data)
        name = data.pop("model", None)
        if name is None:
            raise ConfigError("config needs a 'model' entry")
        if name not in MODELS:
            raise ConfigError(f"unknown model {name!r}; choose from {sorted(MODELS)}")
        return cls(name, data)

    def to_dict(self) -> dict:
        return {"model": self.name, **_jsonable(self.params)}

    @property
    def derived(self) -> dict:
        return build(self).params.get("derived", {})


def _jsonable(params):
    out = {}
    for k, v in params.items():
        if callable(v) or (isinstance(v, (list, tuple)) and v and all(callable(x) for x in v)):
            continue
        out[k] = v.to_dict() if isinstance(v, SplitLaw) else v
    return out


def _check_keys(name, params, allowed):
    extra = set(params) - set(allowed)
    if extra:
        raise ConfigError(f"{name}: unknown parameter(s) {sorted(extra)}")


def _quicksort(p):
    _check_keys("quicksort", p, ())

    def sampler(rng, n):
        u = _uniform(rng, n)
        A = np.empty((n, 2, 1, 1))
        A[:, 0, 0, 0] = u
        A[:, 1, 0, 0] = 1.0 - u
        return A, quicksort_toll(u)[:, None]

    return EquationSystem(1, 1, ((0, 0),), (sampler,), name="quicksort",
                          target_mean=np.zeros((1, 1)), params={"derived": {"m": 1, "d": 1}})


def _quicksort2d(p):
    _check_keys("quicksort2d", p, ("shift_variant",))
    variant = p.get("shift_variant", "centered")
    quicksort2d_toll(0.5, variant)

    def sampler(rng, n):
        u = _uniform(rng, n)
        A = np.zeros((n, 2, 2, 2))
        A[:, 0, 0, 0] = A[:, 0, 1, 1] = u
        A[:, 1, 0, 0] = A[:, 1, 1, 1] = 1.0 - u
        return A, quicksort2d_toll(u, variant)

    return EquationSystem(1, 2, ((0, 0),), (sampler,), name="quicksort2d",
                          target_mean=np.zeros((1, 2)) if variant == "centered" else None,
                          params={"shift_variant": variant, "derived": {"m": 1, "d": 2}})


def _rrt(p):
    _check_keys("rrt", p, ())

    def sampler(rng, n):
        u = _uniform(rng, n)
        A = np.empty((n, 2, 1, 1))
        A[:, 0, 0, 0] = u
        A[:, 1, 0, 0] = 1.0 - u
        return A, rrt_toll(u)[:, None]

    return EquationSystem(1, 1, ((0, 0),), (sampler,), name="rrt",
                          target_mean=np.zeros((1, 1)), params={"derived": {"m": 1, "d": 1}})


def _urn_det(p):
    _check_keys("urn_det", p, ("a", "b", "c", "d", "scale", "shifts"))
    try:
        a, b, c, d = (int(p[k]) for k in "abcd")
    except KeyError as exc:
        raise ConfigError(f"urn_det needs parameters a, b, c, d (missing {exc})") from None
    if any(int(p[k]) != p[k] for k in "abcd") or min(a, b, c, d) < 0:
        raise ConfigError("urn_det entries must be non-negative integers")
    if a + b != c + d:
        raise ConfigError(f"urn_det must be balanced: a+b = {a + b} != c+d = {c + d}")
    if b * c <= 0:
        raise ConfigError("urn_det needs bc > 0")
    S = a + b
    lam = (a - c) / S
    if not (0.5 < lam <= 1.0):
        raise ConfigError(f"urn_det needs lambda = (a-c)/(a+b) in (1/2, 1], got lambda = {lam:g}")
    K = S + 1
    alpha = 1.0 / (K - 1)
    rows = (tuple([0] * (a + 1) + [1] * (K - a - 1)), tuple([0] * c + [1] * (K - c)))
    shifts = p.get("shifts")
    custom = shifts is not None
    if not custom:
        e = float(p.get("scale", 1.0)) * urn_mean_direction(a, b, c, d)
        shifts = [_mean_consistent(e, rows[r], r) for r in range(2)]

    def make(r):
        def sampler(rng, n):
            D = _dirichlet(rng, n, K, alpha)
            coeffs = D ** lam
            shift = shifts[r](D) if custom else shifts[r](coeffs)
            return coeffs[:, :, None, None], np.asarray(shift, dtype=float).reshape(n, 1)

        return sampler

    derived = {"m": 2, "d": 1, "K": K, "lambda_urn": lam, "dirichlet": [alpha] * K, "S": S}
    return EquationSystem(2, 1, rows, (make(0), make(1)), name="urn_det",
                          target_mean=np.zeros((2, 1)), params={**p, "derived": derived})


def _urn_rand(p):
    _check_keys("urn_rand", p, ("p1", "p2", "scale", "shifts"))
    try:
        p1, p2 = float(p["p1"]), float(p["p2"])
    except KeyError as exc:
        raise ConfigError(f"urn_rand needs parameters p1, p2 (missing {exc})") from None
    if not (0 <= p1 <= 1 and 0 <= p2 <= 1):
        raise ConfigError("urn_rand probabilities must lie in [0, 1]")
    lam = p1 + p2 - 1.0
    if not (0.5 < lam < 1.0):
        raise ConfigError(f"urn_rand needs lambda = p1+p2-1 in (1/2, 1), got lambda = {lam:g}")
    rows = ((0, 0, 1), (1, 1, 0))
    probs = (p1, p2)
    shifts = p.get("shifts")
    if shifts is None:
        e = float(p.get("scale", 1.0)) * np.array([1.0 - p1, -(1.0 - p2)]) / max(1.0 - p1, 1.0 - p2)
        shifts = [_mean_consistent(e, rows[r], r) for r in range(2)]
        custom = False
    else:
        custom = True

    def make(r):
        def sampler(rng, n):
            u = _uniform(rng, n)
            f = (rng.random(n) < probs[r]).astype(float)
            coeffs = np.stack([u ** lam, f * (1.0 - u) ** lam, (1.0 - f) * (1.0 - u) ** lam], axis=1)
            b = shifts[r](u, f) if custom else shifts[r](coeffs)
            return coeffs[:, :, None, None], np.asarray(b, dtype=float).reshape(n, 1)

        return sampler

    derived = {"m": 2, "d": 1, "lambda_urn": lam}
    return EquationSystem(2, 1, rows, (make(0), make(1)), name="urn_rand",
                          target_mean=np.zeros((2, 1)), params={**p, "derived": derived})


def large_eigenvalue(R: np.ndarray, S: int):
    """Eigenvalue ``!= S`` of largest real part (upper half plane preferred)."""
    ev = np.linalg.eigvals(R)
    cand = [z for z in ev if abs(z - S) > 1e-9]
    if not cand:
        raise ConfigError("replacement matrix has no eigenvalue other than S")
    return max(cand, key=lambda z: (round(z.real, 9), z.imag))


def _urn_multi(p):
    _check_keys("urn_multi", p, ("replacement", "eigenvalue", "scale"))
    if "replacement" not in p:
        raise ConfigError("urn_multi needs a 'replacement' matrix")
    R = np.asarray(p["replacement"], dtype=float)
    q = R.shape[0]
    if R.ndim != 2 or R.shape[1] != q or q < 2:
        raise ConfigError("replacement matrix must be square with at least 2 colours")
    if np.any(R < 0) or np.any(R != np.round(R)):
        raise ConfigError("replacement entries must be non-negative integers")
    sums = R.sum(axis=1)
    if np.any(sums != sums[0]) or sums[0] < 1:
        raise ConfigError(f"replacement matrix must be balanced, row sums are {sums.tolist()}")
    S = int(sums[0])
    lam = p.get("eigenvalue")
    lam = large_eigenvalue(R, S) if lam is None else complex(*lam) if isinstance(lam, (list, tuple)) else complex(lam)
    ev = np.linalg.eigvals(R)
    if np.min(np.abs(ev - lam)) > 1e-8:
        raise ConfigError(f"{lam} is not an eigenvalue of the replacement matrix")
    if abs(lam - S) < 1e-9:
        raise ConfigError("the eigenvalue must differ from the row sum S")
    if not lam.real > S / 2:
        raise ConfigError(f"need Re(lambda) > S/2 = {S / 2:g}, got Re(lambda) = {lam.real:g}")
    w, vecs = np.linalg.eig(R)
    v = vecs[:, int(np.argmin(np.abs(w - lam)))]
    v = v / v[int(np.argmax(np.abs(v)))] * float(p.get("scale", 1.0))
    rows = tuple(tuple([r] + [k for k in range(q) for _ in range(int(R[r, k]))]) for r in range(q))
    K = S + 1
    alpha = 1.0 / S
    expo = lam / S
    real = abs(lam.imag) < 1e-12
    derived = {"m": q, "d": 1 if real else 2, "S": S, "K": K, "dirichlet": [alpha] * K,
               "lambda_eig": [lam.real, lam.imag]}
    params = {**p, "derived": derived}

    if real:
        def sampler(rng, n):
            D = _dirichlet(rng, n, K, alpha, positive=True)
            return (D ** expo.real)[:, :, None, None], np.zeros((n, 1))

        return EquationSystem(q, 1, rows, (sampler,) * q, name="urn_multi",
                              target_mean=v.real.reshape(q, 1), params=params)

    def csampler(rng, n):
        D = _dirichlet(rng, n, K, alpha, positive=True)
        return np.exp(expo * np.log(D)), np.zeros(n, dtype=complex)

    return embed_complex(rows, (csampler,) * q, name="urn_multi", target_mean=v, params=params)


def _split(p):
    _check_keys("split", p, ("b", "law"))
    law = SplitLaw.from_params(int(p.get("b", 2)), p.get("law", "bst"))
    b = law.b

    def sampler(rng, n):
        V = law.sample(rng, n)
        return V[:, :, None, None], law.toll(V)[:, None]

    derived = {"m": 1, "d": 1, "mu_split": law.mu}
    return EquationSystem(1, 1, ((0,) * b,), (sampler,), name="split",
                          target_mean=np.zeros((1, 1)), params={"b": b, "law": law, "derived": derived})


def forced_wiener_constant(law: SplitLaw) -> float:
    """The constant c with ``E[c (1 - sum_j V_j^2)] = 1``."""
    return 1.0 / (1.0 - law.mean_sum_sq)


def _split2d(p):
    _check_keys("split2d", p, ("b", "law", "c_const"))
    law = SplitLaw.from_params(int(p.get("b", 2)), p.get("law", "bst"))
    b = law.b
    c = p.get("c_const")
    c = forced_wiener_constant(law) if c is None else float(c)

    def sampler(rng, n):
        V = law.sample(rng, n)
        C = law.toll(V)
        eta = np.stack([C + c * (1.0 - np.sum(V * V, axis=1)) - 1.0, C], axis=1)
        return split2d_matrices(V), eta

    derived = {"m": 1, "d": 2, "mu_split": law.mu, "c_const": c}
    return EquationSystem(1, 2, ((0,) * b,), (sampler,), name="split2d",
                          target_mean=np.zeros((1, 2)), params={"b": b, "law": law, "c_const": c, "derived": derived})


def _custom(p):
    _check_keys("custom", p, ("m", "d", "equations", "target_mean", "truncation"))
    try:
        m, d = int(p["m"]), int(p["d"])
        eqs = p["equations"]
    except KeyError as exc:
        raise ConfigError(f"custom system needs m, d and equations (missing {exc})") from None
    if len(eqs) != m:
        raise ConfigError(f"custom system declares m = {m} but lists {len(eqs)} equations")
    rows, samplers = [], []
    for r, eq in enumerate(eqs):
        atoms = eq["atoms"]
        probs = [a["prob"] for a in atoms]
        mats = [np.asarray(a["matrices"], dtype=float).reshape(-1, d, d) for a in atoms]
        J = len(eq["index_map"])
        if any(mm.shape[0] != J for mm in mats):
            raise ConfigError(f"equation {r}: every atom needs {J} matrices")
        shifts = [np.asarray(a.get("shift", [0.0] * d), dtype=float).reshape(d) for a in atoms]
        rows.append(tuple(eq["index_map"]))
        samplers.append(finite_law_sampler(probs, mats, shifts))
    tm = p.get("target_mean")
    return EquationSystem(m, d, tuple(rows), tuple(samplers), name="custom",
                          truncation=int(p.get("truncation", 64)),
                          target_mean=None if tm is None else np.asarray(tm, dtype=float),
                          params={**p, "derived": {"m": m, "d": d}})


@dataclass(frozen=True)
class ModelInfo:
    builder: Callable[[Mapping], EquationSystem]
    summary: str
    parameters: Mapping[str, str]


MODELS: dict[str, ModelInfo] = {
    "quicksort": ModelInfo(_quicksort, "Quicksort key comparisons: X = U X' + (1-U) X'' + g(U).", {}),
    "quicksort2d": ModelInfo(
        _quicksort2d, "Quicksort comparisons and exchanges jointly in R^2 (diagonal coefficients).",
        {"shift_variant": "'centered' (default) or 'as_printed'"}),
    "rrt": ModelInfo(_rrt, "Random recursive tree path length: X = U X' + (1-U) X'' + h(U).", {}),
    "urn_det": ModelInfo(
        _urn_det, "Two-colour Pólya urn with deterministic replacement [[a, b], [c, d]].",
        {"a,b,c,d": "non-negative integers, a+b = c+d, bc > 0, (a-c)/(a+b) > 1/2",
         "scale": "size of the mean-consistent shift family (default 1)"}),
    "urn_rand": ModelInfo(
        _urn_rand, "Two-colour Pólya urn with Bernoulli replacement [[F1, 1-F1], [1-F2, F2]].",
        {"p1,p2": "probabilities with 1/2 < p1+p2-1 < 1",
         "scale": "size of the mean-consistent shift family (default 1)"}),
    "urn_multi": ModelInfo(
        _urn_multi, "Balanced q-colour urn projected on a large eigenvalue (complex values embedded in R^2).",
        {"replacement": "q x q non-negative integer matrix with equal row sums S",
         "eigenvalue": "eigenvalue (number or [re, im]); default: largest real part other than S",
         "scale": "mean of the projected limit of colour 1 after normalization (default 1)"}),
    "split": ModelInfo(
        _split, "Split tree total path length: X = sum_j V_j X^(j) + C(V).",
        {"b": "branch factor (default 2)",
         "law": "'bst' | {'kind': 'dirichlet', 'alpha': a} | {'kind': 'deterministic', 'v': [...]}"}),
    "split2d": ModelInfo(
        _split2d, "Split tree Wiener index and path length jointly in R^2.",
        {"b": "branch factor (default 2)", "law": "as for split",
         "c_const": "constant in the Wiener shift; default forces E[c(1 - sum V_j^2)] = 1"}),
    "custom": ModelInfo(
        _custom, "Finitely supported coefficient laws given inline.",
        {"m,d": "counts", "equations": "[{'index_map': [...], 'atoms': [{'prob', 'matrices', 'shift'}]}]",
         "target_mean": "optional (m, d) mean to pin"}),
}


def build(config) -> EquationSystem:
    """Build the system described by a :class:`ModelConfig` or a config mapping."""
    if not isinstance(config, ModelConfig):
        config = ModelConfig.from_dict(config)
    if config.name not in MODELS:
        raise ConfigError(f"unknown model {config.name!r}")
    return MODELS[config.name].builder(dict(config.params))


def degenerate_variant(config) -> EquationSystem:
    """Wiener/path-length system with a deterministic split vector.

    With ``sum_j v_j^2`` constant the forced constant makes the Wiener shift
    collinear with ``(1, 1)``, so the diagonal ``(X, X)`` solves the system and
    the solution has no density on R^2.
    """
    if not isinstance(config, ModelConfig):
        config = ModelConfig.from_dict(config)
    if config.name != "split2d":
        raise ConfigError("degenerate_variant applies to split2d configurations")
    params = dict(config.params)
    law = SplitLaw.from_params(int(params.get("b", 2)), params.get("law", "bst"))
    if not law.is_deterministic:
        raise ConfigError("degenerate_variant needs a deterministic split vector")
    params.pop("c_const", None)
    system = _split2d({**params, "law": law})
    return system


def list_models() -> list[tuple[str, str, Mapping[str, str]]]:
    return [(k, v.summary, v.parameters) for k, v in MODELS.items()]


def describe(name: str) -> str:
    info = MODELS[name]
    lines = [f"{name}: {info.summary}"]
    lines += [f"    {k}: {v}" for k, v in info.parameters.items()]
    return "\n".join(lines)


def example_configs() -> dict[str, dict]:
    """One valid configuration per model, used by the CLI and tests."""
    return {
        "quicksort": {"model": "quicksort"},
        "quicksort2d": {"model": "quicksort2d"},
        "rrt": {"model": "rrt"},
        "urn_det": {"model": "urn_det", "a": 4, "b": 1, "c": 1, "d": 4},
        "urn_rand": {"model": "urn_rand", "p1": 0.9, "p2": 0.8},
        "urn_multi": {"model": "urn_multi", "replacement": [[6, 1, 0], [0, 6, 1], [1, 0, 6]]},
        "split": {"model": "split", "b": 2, "law": "bst"},
        "split2d": {"model": "split2d", "b": 2, "law": "bst"},
    }


__all__ = [
    "ModelConfig", "SplitLaw", "build", "degenerate_variant", "MODELS", "list_models", "describe",
    "quicksort_toll", "rrt_toll", "quicksort2d_toll", "split2d_matrices", "split2d_singular_values",
    "forced_wiener_constant", "urn_mean_direction", "large_eigenvalue", "example_configs",
]
