"""File formats: pools, density grids, sample tables, configs and run manifests.

All writers are deterministic: floats are written with 17 significant
digits, JSON keys are sorted and no timestamps enter data files (only the
manifest records wall-clock time).
"""
from __future__ import annotations

import hashlib
import json
import re
import struct
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .solver import SamplePool

POOLS_MAGIC = "stochfix-pools"
FLOAT_FMT = "%.17g"


def dumps(obj) -> str:
    return json.dumps(_plain(obj), sort_keys=True, indent=2) + "\n"


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, np.generic):
        x = x.item()
    if isinstance(x, float) and not np.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(dumps(obj))
    return path


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


# --------------------------------------------------------------------------
# configs


def load_config(path) -> dict:
    """Read a JSON config; syntax errors are reported with line and column."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    return parse_config(text, str(path))


def parse_config(text: str, source: str = "<config>") -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{source}:1:1: config must be a JSON object")
    return data


def key_lines(text: str) -> dict:
    """Line number (1-based) of the first occurrence of every JSON object key."""
    out = {}
    for m in re.finditer(r'"((?:[^"\\]|\\.)*)"\s*:', text):
        out.setdefault(m.group(1), text.count("\n", 0, m.start()) + 1)
    return out


def locate_error(exc: ConfigError, source: str, text: str) -> ConfigError:
    """Prefix a schema error with ``source:line`` of the key it most likely refers to.

    The key is the first config key (in file order) whose name appears as a
    word in the message; failing that, the ``model`` entry.
    """
    msg = str(exc)
    lines = key_lines(text)
    hits = [(ln, k) for k, ln in lines.items() if re.search(rf"(?<!\w){re.escape(k)}(?!\w)", msg)]
    if hits:
        line = min(hits)[0]
    elif "model" in lines:
        line = lines["model"]
    else:
        line = 1
    return ConfigError(f"{source}:{line}: {msg}")


# --------------------------------------------------------------------------
# pools
#
# layout: uint64 (little endian) header length, UTF-8 JSON header,
# then float64 little endian values in (equation, sample, coordinate) order


def write_pools(path, pools, seed: int | None = None, extra: dict | None = None) -> Path:
    pools = list(pools)
    N, d = pools[0].N, pools[0].d
    if any(p.N != N or p.d != d for p in pools):
        raise ValueError("all pools must share size and dimension")
    header = {"format": POOLS_MAGIC, "version": 1, "m": len(pools), "N": N, "d": d,
              "generation": int(pools[0].generation), "seed": seed, **(extra or {})}
    raw = json.dumps(_plain(header), sort_keys=True).encode()
    data = np.stack([p.values for p in pools]).astype("<f8", copy=False)
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(struct.pack("<Q", len(raw)))
        fh.write(raw)
        fh.write(data.tobytes(order="C"))
    return path


def read_pools(path) -> tuple[list[SamplePool], dict]:
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read pools {path}: {exc.strerror}") from exc
    if len(blob) < 8:
        raise ConfigError(f"{path}: not a pools file")
    (hlen,) = struct.unpack("<Q", blob[:8])
    try:
        header = json.loads(blob[8:8 + hlen])
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"{path}: corrupt pools header") from exc
    if header.get("format") != POOLS_MAGIC:
        raise ConfigError(f"{path}: not a pools file")
    m, N, d = header["m"], header["N"], header["d"]
    body = blob[8 + hlen:]
    if len(body) != 8 * m * N * d:
        raise ConfigError(f"{path}: truncated pools data")
    values = np.frombuffer(body, dtype="<f8").reshape(m, N, d)
    gen = int(header.get("generation", 0))
    return [SamplePool(values[r].copy(), generation=gen) for r in range(m)], header


# --------------------------------------------------------------------------
# tables


def write_density(path, grid) -> tuple[Path, Path]:
    """CSV with one column per axis plus ``density``, and a JSON sidecar."""
    path = Path(path)
    mesh = np.meshgrid(*grid.axes, indexing="ij")
    cols = [m.ravel() for m in mesh] + [np.asarray(grid.values, dtype=float).ravel()]
    names = [f"x{i + 1}" for i in range(grid.d)] + ["density"]
    np.savetxt(path, np.column_stack(cols), delimiter=",", header=",".join(names),
               comments="", fmt=FLOAT_FMT)
    side = path.with_suffix(".json")
    write_json(side, {"method": grid.method, "shape": list(grid.values.shape),
                      "axes": [{"start": float(a[0]), "step": float(a[1] - a[0]), "size": a.size}
                               for a in grid.axes],
                      "params": grid.params, "diagnostics": grid.diagnostics})
    return path, side


def write_samples(path, values, labels) -> Path:
    path = Path(path)
    values = np.atleast_2d(np.asarray(values, dtype=float))
    np.savetxt(path, values, delimiter=",", header=",".join(labels), comments="", fmt=FLOAT_FMT)
    return path


def read_samples(path) -> np.ndarray:
    """Numeric CSV with one header line; returns shape (rows, columns)."""
    try:
        arr = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read samples {path}: {exc}") from exc
    return arr


# --------------------------------------------------------------------------
# manifests


@dataclass
class RunManifest:
    command: str
    argv: list
    config: dict
    seed: int
    version: str
    wall_clock: float
    outputs: dict = field(default_factory=dict)  # file name -> sha256
    inputs: dict = field(default_factory=dict)  # path -> sha256

    def write(self, path) -> Path:
        return write_json(path, asdict(self))

    @classmethod
    def read(cls, path) -> "RunManifest":
        data = load_config(path)
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(f"{path}: not a run manifest ({exc})") from exc
