"""Turn a run configuration into simulation artifacts on disk.

Each run owns one output directory containing ``meta.json``, ``log.csv``,
``snapshots/t_<time>.f64grid``, and for manufactured-solution sweeps a
``report.txt`` convergence table.  Identical config + seed reproduces
byte-identical outputs.
"""

from __future__ import annotations

import json
import math
import os
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, resolve_config
from .diagnostics import observe, run_convergence
from .errors import AnichError, ConfigError, NumericalBlowup
from .gridio import write_log, write_snapshot
from .spectral import Field, GridSpec, build_grid, integrate
from .uniform import bootstrap_bdf1, step_UL, step_UW
from .variable import bootstrap_variable, make_steps, step_VL, step_VW

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

OUTPUT_ROOT_ENV = "ANICH_OUTPUT_ROOT"


def build_initial(config: RunConfig, grid: GridSpec) -> Field:
    """Initial profiles of the reference experiments."""
    kind = config["ic.kind"]
    meshes = grid.meshes
    if kind == "abs_sin":
        if grid.dim != 1:
            raise ConfigError("abs_sin is a one-dimensional profile")
        return Field(grid, np.abs(np.sin(meshes[0])))
    if kind == "random_uniform":
        rng = np.random.default_rng(config.seed)
        noise = rng.random(grid.shape)
        return Field(grid, config["ic.mean"] + config["ic.amplitude"] * noise)
    if kind == "two_circles":
        if grid.dim != 2:
            raise ConfigError("two_circles is a two-dimensional profile")
        X, Y = meshes
        eps = config["model.epsilon"]
        vals = np.ones(grid.shape)
        for (cx, cy, radius) in config.circles():
            dist = np.sqrt((X - cx) ** 2 + (Y - cy) ** 2)
            vals -= np.tanh((dist - radius) / (1.2 * eps))
        return Field(grid, vals)
    if kind == "expression":
        ns = {"np": np, "pi": np.pi, "sin": np.sin, "cos": np.cos, "tanh": np.tanh,
              "exp": np.exp, "sqrt": np.sqrt, "abs": np.abs, "x": meshes[0]}
        if grid.dim == 2:
            ns["y"] = meshes[1]
        try:
            vals = eval(config["ic.expression"], {"__builtins__": {}}, ns)
        except Exception as exc:
            raise ConfigError(f"bad ic.expression: {exc}") from exc
        return Field(grid, np.broadcast_to(np.asarray(vals, float), grid.shape).copy())
    raise ConfigError(f"unknown ic.kind {kind!r}")


def _grid_from_config(config: RunConfig) -> GridSpec:
    dim = config["grid.dim"]
    n = config["grid.n"]
    length = config["grid.length"]
    n = n if len(n) > 1 else n * dim
    length = length if len(length) > 1 else length * dim
    return build_grid(dim, tuple(n), tuple(length))


def _output_dir(config: RunConfig, output_root) -> Path:
    root = Path(output_root) if output_root else Path(os.environ.get(OUTPUT_ROOT_ENV, "."))
    return root / config["output.dir"]


def _write_meta(outdir: Path, config: RunConfig, status: str, extra: dict) -> None:
    meta = {
        "name": config.name,
        "seed": config.seed,
        "status": status,
        "scheme": config.scheme_kind,
        "version": __version__,
        "config": {k: v for k, v in sorted(config.values.items())},
    }
    meta.update(extra)
    (outdir / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def _run_mms(config: RunConfig, outdir: Path) -> int:
    v = config.values
    rep = run_convergence(
        config.scheme_kind, v["scheme.theta"], v["model.alpha"],
        s1=v["scheme.s1"], s2=v["scheme.s2"], tau_list=v["mms.tau_list"],
        n=v["grid.n"][0], T=v["steps.T"], c0=v["sav.c0"],
        lambda1=v["sav.lambda1"], lambda2=v["sav.lambda2"],
        beta=v["model.beta"], epsilon=v["model.epsilon"], seed=config.seed,
        delta=v["steps.delta"])
    lines = ["# tau  l2_error  order"]
    orders = (math.nan,) + rep.orders
    for tau, err, order in zip(rep.taus, rep.errors, orders):
        err_txt = "inf" if not math.isfinite(err) else f"{err:.17g}"
        order_txt = "" if not math.isfinite(order) else f"{order:.4f}"
        lines.append(f"{tau:.17g}  {err_txt}  {order_txt}")
    (outdir / "report.txt").write_text("\n".join(lines) + "\n")
    status = "ok" if rep.complete else "incomplete"
    _write_meta(outdir, config, status, {"errors": [
        None if not math.isfinite(e) else e for e in rep.errors]})
    return EXIT_OK if rep.complete else EXIT_NUMERICAL


def _snapshot_path(outdir: Path, t: float) -> Path:
    return outdir / "snapshots" / f"t_{t:.6g}.f64grid"


def run(config: RunConfig, output_root=None) -> int:
    """Execute one run; returns the process exit code (0 ok, 3 numerical)."""
    outdir = _output_dir(config, output_root)
    outdir.mkdir(parents=True, exist_ok=True)

    if config.is_mms:
        return _run_mms(config, outdir)

    grid = _grid_from_config(config)
    model = config.model_params()
    phi0 = build_initial(config, grid)
    mass0 = integrate(phi0)
    T = config["steps.T"]
    n_steps = config["steps.n"]
    log_every = max(1, config["output.log_every"])

    snap_times = sorted(config["output.snapshot_times"])
    if snap_times and snap_times[0] <= 1e-12:
        write_snapshot(_snapshot_path(outdir, 0.0), phi0, 0.0)
        snap_times = snap_times[1:]

    records = []
    status = "ok"
    extra: dict = {}

    def log_state(state, k, scheme, gamma_next=0.0):
        nonlocal snap_times
        if k % log_every == 0 or k == n_steps - 1:
            records.append(observe(state, model, scheme, mass0, gamma_next=gamma_next))
        half = state.tau_n / 2 if hasattr(state, "tau_n") else scheme.tau / 2
        while snap_times and state.t >= snap_times[0] - half:
            write_snapshot(_snapshot_path(outdir, snap_times[0]), state.phi_n, state.t)
            snap_times = snap_times[1:]

    try:
        if config.is_uniform:
            scheme = config.uniform_scheme()
            stepper = step_UL if config.scheme_kind == "UL" else step_UW
            state = bootstrap_bdf1(phi0, model, scheme)
            log_state(state, 0, scheme)
            for k in range(1, n_steps):
                state = stepper(state, model, scheme)
                log_state(state, k, scheme)
        else:
            scheme = config.variable_scheme()
            stepper = step_VL if config.scheme_kind == "VL" else step_VW
            steps = make_steps(config["steps.kind"], T, n_steps,
                               config["scheme.theta"], delta=config["steps.delta"],
                               seed=config.seed, gamma_cap=config["steps.gamma_cap"])
            extra["tau_max"] = steps.tau_max
            state = bootstrap_variable(phi0, model, scheme, steps.taus[0])
            log_state(state, 0, scheme, gamma_next=steps.gamma_after(0))
            for k in range(1, n_steps):
                state = stepper(state, model, scheme, steps.taus[k])
                log_state(state, k, scheme, gamma_next=steps.gamma_after(k))
    except NumericalBlowup as exc:
        status = "incomplete"
        extra["failure"] = str(exc)
        extra["failed_at_t"] = exc.t
    except AnichError as exc:
        status = "incomplete"
        extra["failure"] = f"{type(exc).__name__}: {exc}"

    write_log(outdir / "log.csv", records)
    _write_meta(outdir, config, status, extra)
    return EXIT_OK if status == "ok" else EXIT_NUMERICAL


def run_path(spec: str, output_root=None) -> int:
    return run(resolve_config(spec), output_root=output_root)


def sweep(specs, output_root=None, max_workers=None) -> int:
    """Run several configs in parallel processes; nonzero if any failed."""
    from concurrent.futures import ProcessPoolExecutor

    specs = list(specs)
    if not specs:
        raise ConfigError("sweep got no configs")
    worst = EXIT_OK
    with ProcessPoolExecutor(max_workers=max_workers) as pool:
        for spec, code in zip(specs, pool.map(_sweep_one, [(s, output_root) for s in specs])):
            print(f"{spec}: {'ok' if code == EXIT_OK else f'exit {code}'}")
            worst = max(worst, code)
    return worst


def _sweep_one(args) -> int:
    spec, output_root = args
    try:
        return run_path(spec, output_root=output_root)
    except ConfigError as exc:
        print(f"{spec}: config error: {exc}")
        return EXIT_CONFIG
    except AnichError as exc:
        print(f"{spec}: {exc}")
        return EXIT_NUMERICAL
