"""Command line interface: ``hadamard-sm {poisson,rigidity,sublinear,oscillatory,check}``.

Each scenario subcommand reads an optional JSON config, runs the driver,
and writes to ``--out``:

* ``report.json`` -- verdicts, energies, norms, residuals and the config echo;
* ``<run>.csv`` -- one file per solution with columns ``r, u, phi, alpha``;
* ``manifest.json`` -- resolved config, package version, wall time per stage
  and the list of files written.

``report.json`` and the CSV files are byte-identical for identical inputs;
``manifest.json`` is not, since it records wall time.

Exit codes: 0 success, 1 verdict or invariant failure under ``--strict``
(``check`` always fails on a failed invariant), 2 usage or config error.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .errors import HadamardSMError
from .geometry import SpaceFormParams
from .model import SCENARIOS, Nonlinearity, ProblemConfig, RadialWeight, lambda_tilde

log = logging.getLogger("hadamard_sm")

SUBCOMMANDS = SCENARIOS + ("check",)
_TOP_KEYS = {"scenario", "space", "e", "q", "lambda", "nonlinearity", "weight", "grid", "solver",
             "seed", "options"}


class CLIConfigError(HadamardSMError, ValueError):
    """Config file could not be read or validated."""


# --------------------------------------------------------------------------
# config
# --------------------------------------------------------------------------

def _default_nonlinearity(scenario):
    return {"sublinear": {"kind": "sublinear_log"},
            "oscillatory": {"kind": "oscillatory", "a": 0.5, "b": 1.0}}.get(scenario, {"kind": "poisson"})


def _default_weight(scenario, space):
    if scenario == "oscillatory":
        from .experiments import default_oscillatory_weight

        return default_oscillatory_weight(space).to_dict()
    if scenario == "rigidity":
        from .experiments import default_rigidity_weight

        return default_rigidity_weight().to_dict()
    return {"kind": "gaussian", "A": 1.0, "sigma": 1.0}


def _nonlinearity_from(d):
    d = dict(d)
    kind = d.pop("kind", None)
    if kind is None:
        raise CLIConfigError("nonlinearity needs a 'kind'")
    kw = {}
    for key in ("a", "b", "cap"):
        if key in d:
            kw[key] = float(d.pop(key))
    if "s" in d or "f" in d:
        kw["table_s"] = tuple(d.pop("s", ()))
        kw["table_f"] = tuple(d.pop("f", ()))
    if "flags" in d:
        kw["flags"] = frozenset(d.pop("flags"))
    if d:
        raise CLIConfigError(f"unknown nonlinearity keys: {sorted(d)}")
    return Nonlinearity(kind, **kw)


def _weight_from(d):
    d = dict(d)
    kind = d.pop("kind", None)
    if kind is None:
        raise CLIConfigError("weight needs a 'kind'")
    kw = {}
    for key in ("A", "sigma", "r_in", "r_out"):
        if key in d:
            kw[key] = float(d.pop(key))
    if "r" in d or "alpha" in d:
        kw["table_r"] = tuple(d.pop("r", ()))
        kw["table_alpha"] = tuple(d.pop("alpha", ()))
    if d:
        raise CLIConfigError(f"unknown weight keys: {sorted(d)}")
    return RadialWeight(kind, **kw)


def config_from_dict(raw: dict, scenario: str | None = None) -> tuple[ProblemConfig, int]:
    """Validate a config mapping and fill defaults; returns ``(config, seed)``."""
    if not isinstance(raw, dict):
        raise CLIConfigError("config must be a JSON object")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise CLIConfigError(f"unknown config keys: {sorted(unknown)}")
    file_scenario = raw.get("scenario")
    if scenario is not None and file_scenario not in (None, scenario):
        raise CLIConfigError(f"config is for scenario {file_scenario!r}, not {scenario!r}")
    scenario = scenario or file_scenario
    sp = raw.get("space", {"n": 3, "c": 0.0})
    missing = {"n", "c"} - set(sp)
    if missing or set(sp) - {"n", "c"}:
        raise CLIConfigError("space needs exactly the keys 'n' and 'c'")
    space = SpaceFormParams(sp["n"], float(sp["c"]))
    grid = dict(raw.get("grid", {}))
    solver = dict(raw.get("solver", {}))
    if set(grid) - {"R_max", "N"} or set(solver) - {"tol", "max_iter"}:
        raise CLIConfigError("grid accepts R_max, N; solver accepts tol, max_iter")
    if scenario == "rigidity":
        grid.setdefault("R_max", 10.0)
        grid.setdefault("N", 4000)
    lam = raw.get("lambda", 1.0)
    cfg = ProblemConfig(
        space=space,
        nonlinearity=_nonlinearity_from(raw.get("nonlinearity", _default_nonlinearity(scenario))),
        weight=_weight_from(raw.get("weight", _default_weight(scenario, space))),
        e=float(raw.get("e", 1.0)), q=float(raw.get("q", 1.0)), lam=float(lam),
        R_max=None if grid.get("R_max") is None else float(grid["R_max"]),
        N=int(grid.get("N", 2000)),
        tol=float(solver.get("tol", 1e-8)), max_iter=int(solver.get("max_iter", 5000)),
        scenario=scenario, options=dict(raw.get("options", {})),
    )
    seed = raw.get("seed", 0)
    if not (isinstance(seed, int) and 0 <= seed < 2 ** 64):
        raise CLIConfigError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    return cfg, seed


def parse_config(path, scenario: str | None = None) -> ProblemConfig:
    """Read and validate a JSON config file (see :func:`load_config` for the seed)."""
    return load_config(path, scenario)[0]


def load_config(path, scenario: str | None = None) -> tuple[ProblemConfig, int]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise CLIConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CLIConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    try:
        return config_from_dict(raw, scenario)
    except (TypeError, KeyError) as exc:
        raise CLIConfigError(f"{path}: invalid value ({exc})") from None


# --------------------------------------------------------------------------
# output
# --------------------------------------------------------------------------

def _clean(obj):
    """JSON-ready copy: numpy scalars to Python, non-finite floats to ``None``."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, (frozenset, set)):
        return sorted(obj)
    return obj


def dump_json(obj, path: Path):
    path.write_text(json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n")


def write_solution_csv(path: Path, r, u, phi, alpha):
    """Columns ``r,u,phi,alpha``; floats in shortest round-trip form."""
    lines = ["r,u,phi,alpha"]
    for row in zip(r, u, phi, alpha):
        lines.append(",".join(repr(float(x)) for x in row))
    path.write_text("\n".join(lines) + "\n")


def _failed_verdicts(verdicts, prefix=""):
    out = []
    for k, v in verdicts.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out += _failed_verdicts(v, key + ".")
        elif v is False:
            out.append(key)
    return out


# --------------------------------------------------------------------------
# dispatch
# --------------------------------------------------------------------------

def _parse_sweep(text):
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise CLIConfigError(f"--lambda-sweep expects comma-separated numbers, got {text!r}") from None
    if not vals or any(not (math.isfinite(v) and v >= 0) for v in vals):
        raise CLIConfigError("--lambda-sweep needs a non-empty list of non-negative numbers")
    return vals


def _scenario(sub, cfg, seed, levels, sweep):
    from . import experiments as ex

    opts = cfg.options
    if sub == "poisson":
        return ex.run_poisson(cfg, starts=int(opts.get("starts", 5)), seed=seed,
                              refine=bool(opts.get("refine", True)))
    if sub == "rigidity":
        return ex.rigidity_matrix(opts.get("c_values", [0.0, -0.5, -1.0]), cfg.space.n, cfg.weight,
                                  cfg.e, cfg.q, cfg.R_max, cfg.N)
    if sub == "sublinear":
        lam_values = None
        if sweep is not None:
            lt = lambda_tilde(cfg.nonlinearity, cfg.weight)
            lam_values = [x * lt for x in sweep]
        elif "lambda_values" in opts:
            lam_values = opts["lambda_values"]
        return ex.run_sublinear(cfg, lam_values, starts=int(opts.get("starts", 5)), seed=seed,
                                P=int(opts.get("path_nodes", 21)))
    if sub == "oscillatory":
        J = levels if levels is not None else int(opts.get("levels", 3))
        return ex.run_oscillatory(cfg, J)
    raise CLIConfigError(f"unknown scenario {sub!r}")


def run(subcommand: str, cfg: ProblemConfig | None, out: Path, seed: int = 0, strict: bool = False,
        levels: int | None = None, sweep=None) -> int:
    """Run one subcommand and write its outputs; returns the exit code."""
    out.mkdir(parents=True, exist_ok=True)
    files, stages = [], {}
    t0 = time.perf_counter()
    if subcommand == "check":
        from .checks import run_suite

        results = run_suite(seed)
        stages["check"] = time.perf_counter() - t0
        report = {"scenario": "check", "seed": seed,
                  "passed": all(r.passed for r in results),
                  "checks": [{k: v for k, v in r.to_dict().items() if k != "seconds"} for r in results]}
        for r in results:
            print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}  value={r.value:.3e}  threshold={r.threshold:.1e}")
        dump_json(report, out / "report.json")
        files.append("report.json")
        failed = [r.name for r in results if not r.passed]
        config_echo = {"seed": seed}
    else:
        rep = _scenario(subcommand, cfg, seed, levels, sweep)
        stages["solve"] = time.perf_counter() - t0
        t1 = time.perf_counter()
        body = rep.to_dict()
        body["seed"] = seed
        dump_json(body, out / "report.json")
        files.append("report.json")
        for name, sol in rep.runs.items():
            g = sol.u.grid
            alpha = cfg.weight(g.r)
            fname = f"{name}.csv".replace("|", "_").replace("=", "")
            write_solution_csv(out / fname, g.r, sol.u.values, sol.phi.values, alpha)
            files.append(fname)
        stages["write"] = time.perf_counter() - t1
        failed = _failed_verdicts(rep.verdicts)
        print(f"{subcommand}: {'PASS' if not failed else 'FAIL'} ({len(failed)} failed verdicts)")
        config_echo = cfg.to_dict()
        config_echo["seed"] = seed
    manifest = {"version": __version__, "subcommand": subcommand, "config": config_echo,
                "wall_time_s": stages, "files": sorted(files + ["manifest.json"])}
    dump_json(manifest, out / "manifest.json")
    if failed and (strict or subcommand == "check"):
        print(json.dumps({"error": "verdict_failure", "subcommand": subcommand, "failed": failed}),
              file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hadamard-sm",
                                description="Radial Schrodinger-Maxwell experiments on model spaces.")
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", type=Path, help="JSON config file")
    p.add_argument("--out", type=Path, default=Path("results"), help="output directory")
    p.add_argument("--seed", type=int, help="unsigned 64-bit seed (overrides the config)")
    p.add_argument("--strict", action="store_true", help="exit 1 on any failed verdict")
    p.add_argument("--levels", type=int, help="oscillatory: number of levels J")
    p.add_argument("--lambda-sweep", help="sublinear: comma-separated lambdas in units of lambda_tilde")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.seed is not None and not 0 <= args.seed < 2 ** 64:
            raise CLIConfigError("--seed must be an unsigned 64-bit integer")
        if args.levels is not None and args.levels < 0:
            raise CLIConfigError("--levels must be >= 0")
        sweep = _parse_sweep(args.lambda_sweep) if args.lambda_sweep is not None else None
        cfg, seed = None, 0
        if args.subcommand != "check":
            if args.config is not None:
                cfg, seed = load_config(args.config, args.subcommand)
            else:
                cfg, seed = config_from_dict({}, args.subcommand)
        elif args.config is not None:
            _, seed = load_config(args.config)
        if args.seed is not None:
            seed = args.seed
        return run(args.subcommand, cfg, args.out, seed, args.strict, args.levels, sweep)
    except (HadamardSMError, ValueError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
