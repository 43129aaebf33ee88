"""Command-line entry point.

Subcommands: ``run`` an INI config, ``preset`` a built-in experiment,
``chart`` a CSV into SVG, and ``analytics`` to print a phase-noise budget.
Exit codes: 0 success, 1 config error, 2 divergence flags present.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .analytics import phase_noise_budget
from .harness import (ConfigError, emit_chart, emit_csv, parse_config,
                      preset_experiments, read_csv, run_sweep)
from .link import LinkSpec


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="override master seed")
    p.add_argument("--trials", type=int, default=None, help="override trial count")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")


def _execute(configs, out_dir: Path, seed, trials, jobs) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    any_diverged = False
    for cfg in configs:
        if seed is not None:
            cfg = replace(cfg, master_seed=seed)
        if trials is not None:
            cfg = replace(cfg, trials=trials)
        rows = run_sweep(cfg, jobs=jobs)
        path = out_dir / f"{cfg.name}.csv"
        emit_csv(rows, path)
        any_diverged |= any(r.diverged for r in rows)
        print(f"{cfg.name}: {len(rows)} rows -> {path}")
    return 2 if any_diverged else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="eepnsim",
                                     description="Coherent DP-QPSK EEPN simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an INI experiment config")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=".", help="output directory")
    _add_run_options(p_run)

    p_preset = sub.add_parser("preset", help="run a built-in experiment preset")
    p_preset.add_argument("name")
    p_preset.add_argument("--out", default=".", help="output directory")
    p_preset.add_argument("--list", action="store_true", help="list presets and exit")
    _add_run_options(p_preset)

    p_chart = sub.add_parser("chart", help="render a CSV into an SVG chart")
    p_chart.add_argument("csv")
    p_chart.add_argument("--x", required=True)
    p_chart.add_argument("--y", required=True)
    p_chart.add_argument("--series", required=True)
    p_chart.add_argument("--out", default=None, help="output SVG path")

    p_ana = sub.add_parser("analytics", help="print the phase-noise budget")
    p_ana.add_argument("--length-km", type=float, default=0.0)
    p_ana.add_argument("--tx-linewidth", type=float, default=0.0)
    p_ana.add_argument("--lo-linewidth", type=float, default=0.0)
    p_ana.add_argument("--symbol-rate", type=float, default=28e9)
    p_ana.add_argument("--dispersion", type=float, default=16.0,
                       help="ps/nm/km")
    p_ana.add_argument("--wavelength-nm", type=float, default=1553.6)
    p_ana.add_argument("--rho", type=float, default=0.0)

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            cfg = parse_config(args.config)
            return _execute([cfg], Path(args.out), args.seed, args.trials, args.jobs)
        if args.command == "preset":
            presets = preset_experiments()
            if args.list:
                for name in presets:
                    print(name)
                return 0
            if args.name not in presets:
                raise ConfigError(f"unknown preset {args.name!r}; "
                                  f"choose from {', '.join(presets)}")
            return _execute(presets[args.name], Path(args.out), args.seed,
                            args.trials, args.jobs)
        if args.command == "chart":
            rows = read_csv(args.csv)
            out = args.out or str(Path(args.csv).with_suffix(".svg"))
            emit_chart(rows, args.x, args.y, args.series, out)
            print(f"chart -> {out}")
            return 0
        if args.command == "analytics":
            link = LinkSpec(fiber_length_m=args.length_km * 1e3,
                            tx_linewidth_hz=args.tx_linewidth,
                            lo_linewidth_hz=args.lo_linewidth,
                            symbol_rate=args.symbol_rate,
                            wavelength_m=args.wavelength_nm * 1e-9,
                            dispersion_ps_nm_km=args.dispersion)
            b = phase_noise_budget(link, rho=args.rho)
            print(f"var_tx              = {b.var_tx:.6e} rad^2")
            print(f"var_lo              = {b.var_lo:.6e} rad^2")
            print(f"var_eepn            = {b.var_eepn:.6e} rad^2")
            print(f"rho                 = {b.correlation_rho:g}")
            print(f"var_total           = {b.var_total:.6e} rad^2")
            print(f"effective_linewidth = {b.effective_linewidth_hz:.6e} Hz")
            return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
