"""Command line front end: ``stochfix {solve,audit,density,simulate,compare,models,replay}``.

Every command writes its outputs plus ``manifest.json`` into ``--out-dir``
(default ``$STOCHFIX_OUT_DIR`` or the working directory).  Exit codes:
0 success, 2 configuration error, 3 numerical failure, 4 audit failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
from scipy import stats

from . import __version__
from . import audit as au
from . import density as dn
from . import io
from .errors import ConfigError, DomainError, NumericalError
from .models import ModelConfig, build, describe, example_configs, list_models
from .processes import PROCESS_MODELS, scaled_batch
from .solver import ks_rate_bound, lp_distance, moment_residual, solve

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_AUDIT = 0, 2, 3, 4
OUT_DIR_ENV = "STOCHFIX_OUT_DIR"
SECTIONS = ("solver", "audit")


class _Fail(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _split_config(data: dict) -> tuple[ModelConfig, dict]:
    sections = {k: data.get(k, {}) for k in SECTIONS}
    model = {k: v for k, v in data.items() if k not in SECTIONS}
    for k, v in sections.items():
        if not isinstance(v, dict):
            raise ConfigError(f"section {k!r} must be an object")
    return ModelConfig.from_dict(model), sections


def _config_source(value: str) -> tuple[dict, str, str | None]:
    """Config dict, source name and raw text from a file path, inline JSON or example name."""
    if value in example_configs():
        return dict(example_configs()[value]), value, None
    if value.lstrip().startswith("{"):
        return io.parse_config(value, "<inline>"), "<inline>", value
    try:
        text = Path(value).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {value}: {exc.strerror}") from exc
    return io.parse_config(text, value), value, text


def _config_from_arg(value: str) -> dict:
    return _config_source(value)[0]


def _load_model(value: str):
    """Parse and build a model config; schema errors point at a line of the source."""
    data, source, text = _config_source(value)
    try:
        cfg, sections = _split_config(data)
        return cfg, sections, build(cfg)
    except ConfigError as exc:
        if text is None:
            raise
        raise io.locate_error(exc, source, text) from exc


class Run:
    """Collects outputs of one command and writes the manifest."""

    def __init__(self, args, argv, command, config=None):
        self.out = Path(args.out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.args = args
        self.argv = argv
        self.command = command
        self.config = config or {}
        self.outputs: dict[str, str] = {}
        self.inputs: dict[str, str] = {}
        self.t0 = time.perf_counter()

    def path(self, name: str) -> Path:
        return self.out / name

    def add(self, *paths):
        for p in paths:
            p = Path(p)
            self.outputs[p.name] = io.sha256_file(p)

    def add_input(self, path):
        self.inputs[str(Path(path).resolve())] = io.sha256_file(path)

    def finish(self):
        io.RunManifest(self.command, self.argv, self.config, self.args.seed, __version__,
                       round(time.perf_counter() - self.t0, 3), self.outputs,
                       self.inputs).write(self.path("manifest.json"))


# --------------------------------------------------------------------------
# commands


def cmd_solve(args, argv):
    if (args.config is None) == (args.model is None):
        raise ConfigError("solve needs exactly one model config (positional or --model)")
    cfg, sections, system = _load_model(args.config or args.model)
    opts = dict(sections["solver"])
    for key in ("n", "max_iters"):
        if getattr(args, key) is not None:
            opts[key] = getattr(args, key)
    n = int(opts.pop("n", 200_000))
    run = Run(args, argv, "solve", {**cfg.to_dict(), "solver": {"n": n, **opts}})
    try:
        pools, diag = solve(system, n, seed=args.seed, threads=args.threads, **opts)
    except TypeError as exc:
        raise ConfigError(f"bad solver option: {exc}") from exc
    res1 = moment_residual(system, pools, 1, seed=args.seed)
    out = {"model": cfg.name, "m": system.m, "d": system.d, "N": n, **diag.to_dict(),
           "final_mean": [p.mean() for p in pools],
           "final_scale": [np.sqrt(np.diag(p.cov())) for p in pools],
           "moment_residual_1": {"residual": res1.residual, "se": res1.se}}
    run.add(io.write_pools(run.path(args.out), pools, args.seed, {"model": cfg.name}),
            io.write_json(run.path("diagnostics.json"), out))
    run.finish()
    if not diag.converged:
        raise _Fail(EXIT_NUMERICAL, f"solver did not converge: {diag.stop_rule}")
    print(f"solved {cfg.name}: {diag.iterations} iterations, {diag.stop_rule}")


def cmd_audit(args, argv):
    cfg, sections, system = _load_model(args.config)
    opts = dict(sections["audit"])
    draws = int(args.draws or opts.pop("n_draws", 20_000))
    run = Run(args, argv, "audit", {**cfg.to_dict(), "audit": {"n_draws": draws, **opts}})
    report = {"model": cfg.name, "equations": []}
    failed = []
    for r in range(system.m):
        rep = au.audit_coefficients(system, r, draws, seed=args.seed, **opts)
        report["equations"].append(rep.to_dict())
        failed += [f"r={r}:{c}" for c in rep.failed()]
    if args.pools:
        pools, _ = io.read_pools(args.pools)
        run.add_input(args.pools)
        if len(pools) != system.m or pools[0].d != system.d:
            raise ConfigError("pools do not match the model dimensions")
        report["pools"] = []
        for r, pool in enumerate(pools):
            sup = au.audit_support(pool)
            lat = au.audit_lattice(pool, seed=args.seed)
            report["pools"].append({"r": r, "support": sup.to_dict(), "lattice": lat.to_dict()})
            failed += [f"r={r}:{k}" for k, v in (("A4", sup), ("C3", lat)) if v.verdict == au.FAIL]
    report["failed"] = failed
    run.add(io.write_json(run.path("report.json"), report))
    run.finish()
    if failed:
        raise _Fail(EXIT_AUDIT, "audit failed: " + ", ".join(failed))
    print(f"audit {cfg.name}: all conditions pass or are inconclusive")


def cmd_density(args, argv):
    if (args.pools is None) == (args.pools_opt is None):
        raise ConfigError("density needs exactly one pools file (positional or --pools)")
    source = args.pools or args.pools_opt
    pools, header = io.read_pools(source)
    pool = _pick_pool(pools, args.equation)
    method = "kde" if args.method == "kde" else "fourier"
    run = Run(args, argv, "density", {"method": method, "equation": args.equation,
                                      "points": args.points, "window": args.window})
    run.add_input(source)
    if method == "fourier":
        grid = dn.invert_pool(pool, window=args.window, n_out=args.points, threads=args.threads)
    else:
        grid = dn.kde(pool, n=args.points)
    run.add(*io.write_density(run.path(args.out), grid))
    run.finish()
    print(f"density ({grid.method}) on {'x'.join(str(a.size) for a in grid.axes)} grid, "
          f"integral {grid.integral():.4f}")


def cmd_simulate(args, argv):
    params = _config_from_arg(args.params) if args.params else {}
    run = Run(args, argv, "simulate", {"model": args.model, "n": args.n, "runs": args.runs,
                                       "params": params, "centering": args.centering})
    batch = scaled_batch(args.model, args.n, args.runs, seed=args.seed, params=params,
                         centering=args.centering, threads=args.threads)
    out = run.path(args.out)
    run.add(io.write_samples(out, batch.scaled, batch.labels),
            io.write_json(out.with_suffix(".json"),
                          {"model": args.model, "n": args.n, "runs": args.runs, "params": params,
                           "exponents": batch.exponents, "center": batch.center,
                           "centering": batch.centering, "labels": batch.labels}))
    run.finish()
    print(f"simulated {args.runs} runs of {args.model} (n={args.n})")


def compare_samples(x, y, p: float = 1.0) -> dict:
    """KS statistic, empirical ``l_p`` distance and the KS bound for two 1D samples.

    ``x`` is the reference (solver pool); its density maximum is estimated
    from a kernel density estimate.
    """
    ks = float(stats.ks_2samp(x, y).statistic)
    lp = lp_distance(x, y, p)
    f_sup = dn.kde(x[:, None]).max()
    bound = ks_rate_bound(lp, f_sup, p) if lp > 0 else 0.0
    return {"ks": ks, "lp": lp, "p": p, "f_sup": f_sup, "ks_bound": bound,
            "bound_holds": bool(ks <= bound + 1e-12)}


def cmd_compare(args, argv):
    pools, _ = io.read_pools(args.pools)
    pool = _pick_pool(pools, args.equation)
    samples = io.read_samples(args.samples)
    if samples.shape[1] != pool.d:
        raise ConfigError(f"dimension mismatch: pool has d={pool.d}, samples have "
                          f"{samples.shape[1]} columns")
    run = Run(args, argv, "compare", {"equation": args.equation, "p": args.p})
    run.add_input(args.pools)
    run.add_input(args.samples)
    res = {"coordinates": [compare_samples(pool.values[:, c], samples[:, c], args.p)
                           for c in range(pool.d)],
           "n_pool": pool.N, "n_samples": samples.shape[0]}
    res["ks_max"] = max(c["ks"] for c in res["coordinates"])
    run.add(io.write_json(run.path("compare.json"), res))
    run.finish()
    print(f"KS = {res['ks_max']:.4f}")


def cmd_models(args, argv):
    if args.example:
        ex = example_configs()
        if args.example not in ex:
            raise ConfigError(f"no example for {args.example!r}")
        print(json.dumps(ex[args.example], indent=2))
        return
    names = [args.name] if args.name else [n for n, _, _ in list_models()]
    for name in names:
        try:
            print(describe(name))
        except KeyError:
            raise ConfigError(f"unknown model {name!r}") from None
    if not args.name:
        print("processes: " + ", ".join(PROCESS_MODELS))


def cmd_replay(args, argv):
    """Re-run the command recorded in a manifest and compare output digests."""
    man = io.RunManifest.read(args.manifest)
    target = Path(args.into) if args.into else Path(tempfile.mkdtemp(prefix="stochfix-replay-"))
    code = main(["--out-dir", str(target)] + list(man.argv))
    if code not in (EXIT_OK, EXIT_NUMERICAL, EXIT_AUDIT):
        raise _Fail(code, "replayed command failed")
    mismatched = [name for name, digest in man.outputs.items()
                  if not (target / name).exists() or io.sha256_file(target / name) != digest]
    if mismatched:
        raise _Fail(EXIT_NUMERICAL, "digest mismatch: " + ", ".join(mismatched))
    print(f"replay reproduced {len(man.outputs)} outputs in {target}")


def _pick_pool(pools, r):
    if not 0 <= r < len(pools):
        raise ConfigError(f"equation index {r} out of range (m={len(pools)})")
    return pools[r]


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stochfix", description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    ap.add_argument("--threads", type=int, default=1, help="worker threads (default 1)")
    ap.add_argument("--out-dir", default=os.environ.get(OUT_DIR_ENV, "."),
                    help=f"output directory (default ${OUT_DIR_ENV} or .)")
    ap.add_argument("--version", action="version", version=__version__)
    # the global flags are also accepted after the command name
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    shared.add_argument("--threads", type=int, default=argparse.SUPPRESS)
    shared.add_argument("--out-dir", default=argparse.SUPPRESS)
    sub = ap.add_subparsers(dest="command", required=True)

    def command(name, help):
        return sub.add_parser(name, help=help, parents=[shared])

    p = command("solve", "iterate pools to the fixed point")
    p.add_argument("config", nargs="?", help="JSON file, inline JSON or an example model name")
    p.add_argument("--model", help="same as the positional config")
    p.add_argument("--n", type=int, help="pool size")
    p.add_argument("--max-iters", "--iters", type=int, dest="max_iters")
    p.add_argument("--out", default="pools.bin", help="pools file name (default pools.bin)")
    p.set_defaults(func=cmd_solve)

    p = command("audit", "audit the smoothness conditions")
    p.add_argument("config")
    p.add_argument("--pools", help="pools file; adds support and lattice audits")
    p.add_argument("--draws", type=int, help="coefficient draws per equation")
    p.set_defaults(func=cmd_audit)

    p = command("density", "density grid from a pools file")
    p.add_argument("pools", nargs="?")
    p.add_argument("--pools", dest="pools_opt", help="same as the positional pools file")
    p.add_argument("--equation", type=int, default=0)
    p.add_argument("--method", choices=("fourier", "invert", "kde"), default="fourier",
                   help="Fourier inversion of the empirical characteristic function (default) or KDE")
    p.add_argument("--out", default="density.csv")
    p.add_argument("--points", type=int, help="grid points per axis")
    p.add_argument("--window", choices=("hann", "none"), default="hann")
    p.set_defaults(func=cmd_density)

    p = command("simulate", "scaled statistics of a discrete process")
    p.add_argument("--model", required=True, choices=PROCESS_MODELS)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--runs", type=int, default=10_000)
    p.add_argument("--params", help="JSON file or inline JSON with process parameters")
    p.add_argument("--centering", choices=("auto", "exact", "batch"), default="auto")
    p.add_argument("--out", default="samples.csv")
    p.set_defaults(func=cmd_simulate)

    p = command("compare", "KS and l_p distances between a pool and samples")
    p.add_argument("pools")
    p.add_argument("samples")
    p.add_argument("--equation", type=int, default=0)
    p.add_argument("--p", type=float, default=1.0)
    p.set_defaults(func=cmd_compare)

    p = command("models", "list models")
    p.add_argument("name", nargs="?")
    p.add_argument("--example", help="print an example config for a model")
    p.set_defaults(func=cmd_models)

    p = command("replay", "re-run a manifest and verify its output digests")
    p.add_argument("manifest")
    p.add_argument("--into", help="directory for the replayed outputs (default: a temp dir)")
    p.set_defaults(func=cmd_replay)
    return ap


def _recorded_argv(args, argv):
    """argv without --out-dir and with input paths made absolute, for replay."""
    out, skip = [], False
    for i, a in enumerate(argv):
        if skip:
            skip = False
            continue
        if a == "--out-dir":
            skip = True
            continue
        if a.startswith("--out-dir="):
            continue
        out.append(a)
    if "--seed" not in out and not any(a.startswith("--seed=") for a in out):
        out = ["--seed", str(args.seed)] + out
    for name in ("pools", "pools_opt", "samples", "config", "model", "params"):
        val = getattr(args, name, None)
        if val and Path(val).is_file():
            out = [str(Path(val).resolve()) if a == val else a for a in out]
    return out


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        args.func(args, _recorded_argv(args, argv))
    except _Fail as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
