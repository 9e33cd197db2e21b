"""Command-line entry point.

Subcommands: build, run, quadtest, convtest, stabscan, blayer,
export-contours. Exit codes: 0 success, 2 configuration error, 3
real-root regime, 4 blow-up, 5 I/O failure.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from .cheb import chebyshev_nodes
from .config import RunConfig, load_config
from .errors import (
    BlowUpError,
    ConfigError,
    KsgreenError,
    RealRootError,
)
from .operators import (
    ConvolutionOperators,
    ResourceError,
    build_operators,
    load_operators,
    save_operators,
)
from .stepping import (
    SimState,
    load_checkpoint,
    save_checkpoint,
    seed_eigenmode_growth,
    seed_exact_soliton,
    seed_richardson,
    seed_small_step_order1,
    step,
)
from .experiments import (
    boundary_layer_profile,
    contour_export,
    convergence_test,
    quadrature_error_test,
    random_mode_amplitudes,
    simulate_series,
    stability_scan,
)
from .series_io import TimeSeriesWriter, format_float, read_time_series, write_csv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_REAL_ROOT = 3
EXIT_BLOW_UP = 4
EXIT_IO = 5


def _log(msg: str) -> None:
    print(msg, flush=True)


def seed_state(cfg: RunConfig, workers: int) -> SimState:
    """Build the initial multistep history from the configured method."""
    method = cfg.seed_method
    if method == "exact_soliton":
        return seed_exact_soliton(
            cfg.nu, cfg.h, cfg.n, cfg.order, cfg.soliton_c, cfg.soliton_x0
        )
    rng = np.random.default_rng(cfg.rng_seed)
    odd, even = random_mode_amplitudes(cfg.nu, rng, cfg.seed_scale)
    if method == "eigenmode_growth":
        return seed_eigenmode_growth(
            cfg.nu, cfg.h, cfg.n, cfg.order, odd, even, l=cfg.l, r=cfg.r
        )
    if method == "constant":
        zeros = np.zeros(cfg.n + 1)
        return seed_eigenmode_growth(
            cfg.nu, cfg.h, cfg.n, cfg.order, zeros[:1], zeros[:1],
            l=cfg.l, r=cfg.r,
        )
    # deviation-profile seeders start from the random spectrum at t = 0
    v0 = seed_eigenmode_growth(cfg.nu, cfg.h, cfg.n, 1, odd, even,
                               l=cfg.l, r=cfg.r).newest
    if method == "small_step_order1":
        return seed_small_step_order1(
            v0, cfg.nu, cfg.h, cfg.n, cfg.order, l=cfg.l, r=cfg.r,
            policy=cfg.subgrid_policy(), workers=workers,
        )
    if method == "richardson":
        return seed_richardson(
            v0, cfg.nu, cfg.h, cfg.n, cfg.order, l=cfg.l, r=cfg.r,
            policy=cfg.subgrid_policy(), workers=workers,
        )
    raise ConfigError(f"unknown seed method {method!r}")


def ensure_operators(
    cfg: RunConfig, workers: int, force: bool = False
) -> ConvolutionOperators:
    """Load the operator cache if it matches the config, else build + save."""
    params = cfg.problem_params()
    policy = cfg.subgrid_policy()
    path = cfg.cache_path
    if not force and os.path.exists(path):
        try:
            ops = load_operators(path, params=params, n=cfg.n, policy=policy)
            _log(f"loaded operator cache {path}")
            return ops
        except KsgreenError as exc:
            raise KsgreenError(
                f"stale operator cache {path}: {exc}; rebuild with --force"
            ) from exc
    t0 = time.perf_counter()
    ops = build_operators(params, cfg.n, policy, workers=workers)
    elapsed = time.perf_counter() - t0
    nbytes = ops.M.nbytes + ops.N.nbytes + ops.J.nbytes
    _log(
        f"built operators n={cfg.n} in {elapsed:.2f} s "
        f"({nbytes / 1e6:.1f} MB, {workers} workers)"
    )
    save_operators(ops, path)
    _log(f"wrote operator cache {path}")
    return ops


def cmd_build(cfg: RunConfig, args) -> int:
    if args.dry_run:
        _log(
            f"build: n={cfg.n} nu={cfg.nu} delta={cfg.effective_delta()} "
            f"l={cfg.l} r={cfg.r} policy={cfg.subgrid_mode} -> {cfg.cache_path}"
        )
        return EXIT_OK
    ensure_operators(cfg, args.workers or cfg.workers(), force=args.force)
    return EXIT_OK


def cmd_run(cfg: RunConfig, args) -> int:
    workers = args.workers or cfg.workers()
    if args.dry_run:
        _log(
            f"run: n={cfg.n} nu={cfg.nu} h={cfg.h} o={cfg.order} "
            f"seed={cfg.seed_method} steps={cfg.total_steps} "
            f"-> {cfg.output_path}"
        )
        return EXIT_OK
    ops = ensure_operators(cfg, workers, force=args.force)
    if args.restart:
        state = load_checkpoint(args.restart)
        if state.n != cfg.n or state.scheme.order != cfg.order:
            raise KsgreenError(
                f"checkpoint {args.restart} has n={state.n}, "
                f"o={state.scheme.order}; config wants n={cfg.n}, o={cfg.order}"
            )
        _log(f"restarted from {args.restart} at step {state.step_index}")
    else:
        state = seed_state(cfg, workers)
    phi = cfg.problem_params().phi_profile(chebyshev_nodes(cfg.n).nodes)
    target = state.step_index + cfg.total_steps
    with TimeSeriesWriter(cfg.output_path, cfg.n, as_csv=args.csv) as out:
        try:
            while state.step_index < target:
                state = step(state, ops, workers=workers)
                if state.step_index % cfg.output_every == 0:
                    out.write(state.time, state.newest + phi)
                if (
                    cfg.checkpoint_every
                    and state.step_index % cfg.checkpoint_every == 0
                ):
                    save_checkpoint(state, cfg.checkpoint_path)
        except BlowUpError as exc:
            # final diagnostic frame: the last finite history row
            out.write(state.time, state.newest + phi)
            _log(f"blow-up at step {exc.step_index}")
            return EXIT_BLOW_UP
    save_checkpoint(state, cfg.checkpoint_path)
    _log(
        f"integrated to step {state.step_index} (t = {state.time:.6g}); "
        f"series -> {cfg.output_path}, checkpoint -> {cfg.checkpoint_path}"
    )
    return EXIT_OK


def cmd_quadtest(cfg: RunConfig, args) -> int:
    workers = args.workers or cfg.workers()
    n_values = cfg.n_list or (cfg.n,)
    if args.dry_run:
        _log(
            f"quadtest: nu={cfg.nu} delta={cfg.effective_delta()} "
            f"k={cfg.k} n={list(n_values)}"
        )
        return EXIT_OK
    params = cfg.problem_params()
    rows = []
    for n in n_values:
        e_q = quadrature_error_test(
            params, n, cfg.k, cfg.subgrid_policy(), workers=workers
        )
        rows.append((int(n), cfg.k, cfg.nu, params.delta, float(e_q)))
        _log(f"n = {n:6d}  n/k = {n / cfg.k:7.1f}  e_q = {e_q:.6e}")
    write_csv(cfg.output_path, ["n", "k", "nu", "h", "e_q"], rows)
    _log(f"wrote {cfg.output_path}")
    return EXIT_OK


def cmd_convtest(cfg: RunConfig, args) -> int:
    workers = args.workers or cfg.workers()
    h_values = cfg.h_list
    if not h_values:
        raise ConfigError("convtest needs a non-empty h_list")
    horizon = cfg.horizon_scaled * cfg.nu
    if args.dry_run:
        _log(
            f"convtest: o={cfg.order} nu={cfg.nu} c={cfg.soliton_c} "
            f"x0={cfg.soliton_x0} n={cfg.n} horizon={horizon} "
            f"h={list(h_values)}"
        )
        return EXIT_OK
    rows = convergence_test(
        cfg.order, cfg.nu, cfg.soliton_c, cfg.soliton_x0, cfg.n,
        horizon, h_values, policy=cfg.subgrid_policy(), workers=workers,
    )
    out = []
    for h, steps, err, verdict in rows:
        out.append((cfg.n, cfg.nu, cfg.order, float(h), float(err), verdict))
        _log(f"h = {h:.6e}  steps = {steps:6d}  error = {err:.6e}  {verdict}")
    write_csv(cfg.output_path, ["n", "nu", "o", "h", "error", "verdict"], out)
    _log(f"wrote {cfg.output_path}")
    return EXIT_OK


def cmd_stabscan(cfg: RunConfig, args) -> int:
    workers = args.workers or cfg.workers()
    if not cfg.nu_list or not cfg.h_list:
        raise ConfigError("stabscan needs non-empty nu_list and h_list")
    if args.dry_run:
        _log(
            f"stabscan: o={cfg.order} n={cfg.n} nu={list(cfg.nu_list)} "
            f"h={list(cfg.h_list)} horizon t/nu = {cfg.horizon_scaled}"
        )
        return EXIT_OK
    result = stability_scan(
        cfg.order, cfg.n, cfg.nu_list, cfg.h_list,
        seed_amplitude=cfg.seed_scale, rng_seed=cfg.rng_seed,
        horizon_scaled=cfg.horizon_scaled, l=cfg.l, r=cfg.r,
        policy=cfg.subgrid_policy(), workers=workers,
    )
    rows = []
    for i, nu in enumerate(result.nu_grid):
        for j, h in enumerate(result.h_grid):
            verdict = result.verdict(i, j)
            rows.append((cfg.n, cfg.order, float(nu), float(h), verdict))
            _log(f"nu = {nu:.3e}  h = {h:.3e}  {verdict}")
    write_csv(cfg.output_path, ["n", "o", "nu", "h", "verdict"], rows)
    _log(f"wrote {cfg.output_path}")
    return EXIT_OK


def cmd_blayer(cfg: RunConfig, args) -> int:
    workers = args.workers or cfg.workers()
    steps = int(np.ceil(cfg.t_max_scaled * cfg.nu / cfg.h))
    if args.dry_run:
        _log(
            f"blayer: nu={cfg.nu} n={cfg.n} o={cfg.order} h={cfg.h} "
            f"steps={steps} average t/nu in "
            f"[{cfg.t_min_scaled}, {cfg.t_max_scaled}]"
        )
        return EXIT_OK
    ops = ensure_operators(cfg, workers, force=args.force)
    state = seed_state(cfg, workers)
    times, frames, state, verdict = simulate_series(
        state, ops, steps, sample_every=cfg.sample_every, workers=workers
    )
    if verdict != "ok":
        _log(f"run ended early: {verdict}")
        return EXIT_BLOW_UP
    xbar, rms, thickness = boundary_layer_profile(
        times, frames, cfg.nu,
        t_range=(cfg.t_min_scaled * cfg.nu, cfg.t_max_scaled * cfg.nu),
    )
    rows = [
        (cfg.n, cfg.order, cfg.nu, float(xb), float(rv), float(thickness))
        for xb, rv in zip(xbar, rms)
    ]
    write_csv(
        cfg.output_path, ["n", "o", "nu", "xbar", "rms", "thickness"], rows
    )
    _log(f"layer thickness = {thickness:.3f} scaled units")
    _log(f"wrote {cfg.output_path}")
    return EXIT_OK


def cmd_export_contours(cfg: RunConfig, args) -> int:
    if args.dry_run:
        _log(
            f"export-contours: series={args.series} nu={cfg.nu} "
            f"window t/nu in [{cfg.t_min_scaled}, {cfg.t_max_scaled}] "
            f"stride={cfg.contour_stride} points={cfg.contour_points}"
        )
        return EXIT_OK
    times, frames = read_time_series(args.series, cfg.n)
    t_scaled, xbar, field = contour_export(
        times, frames, cfg.nu,
        t_window=(cfg.t_min_scaled * cfg.nu, cfg.t_max_scaled * cfg.nu),
        stride=cfg.contour_stride, n_points=cfg.contour_points,
    )
    if args.csv:
        rows = []
        for tv, frame in zip(t_scaled, field):
            rows.append([float(tv)] + [float(v) for v in frame])
        header = ["t_scaled"] + [format_float(v) for v in xbar]
        write_csv(cfg.output_path, header, rows)
    else:
        with TimeSeriesWriter(cfg.output_path, field.shape[1] - 1) as out:
            for tv, frame in zip(t_scaled, field):
                out.write(float(tv), frame)
    _log(f"wrote {len(t_scaled)} frames on {xbar.size} points to {cfg.output_path}")
    return EXIT_OK


_COMMANDS = {
    "build": cmd_build,
    "run": cmd_run,
    "quadtest": cmd_quadtest,
    "convtest": cmd_convtest,
    "stabscan": cmd_stabscan,
    "blayer": cmd_blayer,
    "export-contours": cmd_export_contours,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ksgreen",
        description=(
            "Green's-function time stepper for the Kuramoto-Sivashinsky "
            "equation with fixed boundary values"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="run config file")
        p.add_argument("--force", action="store_true",
                       help="rebuild the operator cache even if present")
        p.add_argument("--workers", type=int, default=0,
                       help="worker threads (0 = config / auto)")
        p.add_argument("--csv", action="store_true",
                       help="emit CSV instead of binary frames")
        p.add_argument("--dry-run", action="store_true",
                       help="print the resolved parameters and exit")
        p.add_argument("--output", help="override the configured output path")
        if name == "run":
            p.add_argument("--restart", help="checkpoint file to resume from")
        if name == "export-contours":
            p.add_argument("--series", required=True,
                           help="binary time-series file to resample")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.output:
            cfg.output_path = args.output
        return _COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RealRootError as exc:
        print(f"real-root regime: {exc}", file=sys.stderr)
        return EXIT_REAL_ROOT
    except BlowUpError as exc:
        print(f"blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOW_UP
    except ResourceError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, KsgreenError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
