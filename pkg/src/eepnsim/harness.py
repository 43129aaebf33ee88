"""Experiment orchestration: seeded sweeps over scenario grids, CSV emission,
SVG charts, and the built-in experiment presets."""

from __future__ import annotations

import configparser
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import chart as chart_mod
from .analytics import phase_noise_budget
from .frontend import FrontendSpec
from .link import CPR_METHODS, EQUALIZERS, DspChainSpec, LinkSpec, run_trial


class ConfigError(ValueError):
    """Raised for malformed experiment configuration (CLI exit code 1)."""


# Sweep axes in canonical grid order; every row carries all of them.
SWEEP_AXES = ("fiber_length_km", "tx_linewidth_hz", "lo_linewidth_hz",
              "osnr_db", "block_size", "step_size")

CSV_COLUMNS = ("scenario", "grid_index", "trial", "equalizer", "cpr",
               *SWEEP_AXES, "effective_linewidth_hz", "bit_errors",
               "bits_counted", "ber", "diverged", "seed")


@dataclass(frozen=True)
class ExperimentConfig:
    name: str = "experiment"
    link: LinkSpec = field(default_factory=LinkSpec)
    dsp: DspChainSpec = field(default_factory=DspChainSpec)
    sweep: dict = field(default_factory=dict)
    trials: int = 4
    master_seed: int = 0
    counted_bits: int = 2**18

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        for key, values in self.sweep.items():
            if key not in SWEEP_AXES:
                raise ConfigError(f"unknown sweep axis {key!r}")
            if len(values) == 0:
                raise ConfigError(f"swept axis {key!r} is empty")

    def grid(self) -> list[dict]:
        axes = []
        base = {
            "fiber_length_km": self.link.fiber_length_m / 1e3,
            "tx_linewidth_hz": self.link.tx_linewidth_hz,
            "lo_linewidth_hz": self.link.lo_linewidth_hz,
            "osnr_db": math.inf if self.link.osnr_db is None else self.link.osnr_db,
            "block_size": self.dsp.block_size,
            "step_size": self.dsp.nlms_step,
        }
        for key in SWEEP_AXES:
            axes.append([float(v) for v in self.sweep.get(key, [base[key]])])
        return [dict(zip(SWEEP_AXES, combo)) for combo in itertools.product(*axes)]


@dataclass(frozen=True)
class ResultRow:
    scenario: str
    grid_index: int
    trial: int
    equalizer: str
    cpr: str
    fiber_length_km: float
    tx_linewidth_hz: float
    lo_linewidth_hz: float
    osnr_db: float
    block_size: float
    step_size: float
    effective_linewidth_hz: float
    bit_errors: int
    bits_counted: int
    ber: float
    diverged: bool
    seed: str


def _point_link_dsp(cfg: ExperimentConfig, point: dict) -> tuple[LinkSpec, DspChainSpec]:
    link = replace(
        cfg.link,
        fiber_length_m=point["fiber_length_km"] * 1e3,
        tx_linewidth_hz=point["tx_linewidth_hz"],
        lo_linewidth_hz=point["lo_linewidth_hz"],
        osnr_db=None if math.isinf(point["osnr_db"]) else point["osnr_db"],
    )
    block = int(round(point["block_size"]))
    dsp = replace(cfg.dsp, block_size=block, nlms_step=point["step_size"])
    return link, dsp


def _run_point(args) -> ResultRow:
    cfg, grid_index, point, trial = args
    link, dsp = _point_link_dsp(cfg, point)
    ss = np.random.SeedSequence(entropy=cfg.master_seed, spawn_key=(grid_index, trial))
    res = run_trial(link, dsp, ss, counted_bits=cfg.counted_bits)
    return ResultRow(
        scenario=cfg.name, grid_index=grid_index, trial=trial,
        equalizer=dsp.equalizer, cpr=dsp.cpr,
        fiber_length_km=point["fiber_length_km"],
        tx_linewidth_hz=point["tx_linewidth_hz"],
        lo_linewidth_hz=point["lo_linewidth_hz"],
        osnr_db=point["osnr_db"], block_size=point["block_size"],
        step_size=point["step_size"],
        effective_linewidth_hz=res.effective_linewidth_hz,
        bit_errors=res.report.bit_errors, bits_counted=res.report.bits_compared,
        ber=res.report.ber, diverged=res.diverged,
        seed=f"{cfg.master_seed}:{grid_index}:{trial}")


def run_sweep(cfg: ExperimentConfig, jobs: int = 1) -> list[ResultRow]:
    """Cartesian sweep over the configured axes; one row per grid point and
    trial, in deterministic grid order regardless of parallelism."""
    tasks = [(cfg, gi, point, trial)
             for gi, point in enumerate(cfg.grid())
             for trial in range(cfg.trials)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_point, tasks))
    return [_run_point(t) for t in tasks]


def _format_value(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return f"{v:.9g}"
    return str(v)


def emit_csv(rows: list[ResultRow], path) -> None:
    """Stable-order CSV, decimals at 9 significant digits."""
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        lines.append(",".join(_format_value(getattr(row, c)) for c in CSV_COLUMNS))
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def read_csv(path) -> list[dict]:
    with open(path) as f:
        lines = [ln for ln in f.read().splitlines() if ln]
    header = lines[0].split(",")
    return [dict(zip(header, ln.split(","))) for ln in lines[1:]]


def emit_chart(rows: list[dict] | list[ResultRow], x_axis: str, y_axis: str,
               series_key: str, path) -> None:
    """Static SVG chart of ``y_axis`` (log scale) against ``x_axis``, one
    polyline per distinct ``series_key`` value.  Zero BER rows are plotted at
    the rule-of-three bound 3/bits with an open marker."""
    dict_rows = [r if isinstance(r, dict) else
                 {c: getattr(r, c) for c in CSV_COLUMNS} for r in rows]
    for axis in (x_axis, y_axis, series_key):
        if dict_rows and axis not in dict_rows[0]:
            raise ConfigError(f"unknown column {axis!r}")
        if not dict_rows and axis not in CSV_COLUMNS:
            raise ConfigError(f"unknown column {axis!r}")
    series: dict[str, dict[float, list[tuple[float, bool]]]] = {}
    for r in dict_rows:
        x = float(r[x_axis])
        y = float(r[y_axis])
        is_bound = False
        if y == 0.0 and y_axis == "ber":
            y = 3.0 / float(r["bits_counted"])
            is_bound = True
        elif y <= 0.0:
            continue
        series.setdefault(str(r[series_key]), {}).setdefault(x, []).append((y, is_bound))
    merged: dict[str, list[tuple[float, float, bool]]] = {}
    for name, by_x in series.items():
        pts = []
        for x, vals in sorted(by_x.items()):
            mean = sum(v for v, _ in vals) / len(vals)
            pts.append((x, mean, all(b for _, b in vals)))
        merged[name] = pts
    svg = chart_mod.render_chart(merged, x_axis, y_axis)
    with open(path, "w") as f:
        f.write(svg)


def _split_presets(name: str, total_hz: float) -> list[tuple[float, float]]:
    return [(total_hz, 0.0), (total_hz / 2, total_hz / 2), (0.0, total_hz)]


TABLE1_LENGTHS_KM = (20.0, 40.0, 100.0, 400.0, 600.0, 1000.0, 2000.0)


def preset_experiments() -> dict[str, list[ExperimentConfig]]:
    """Built-in experiment definitions mirroring the published sweeps."""
    osnr_grid = [10.0, 12.0, 14.0, 16.0, 18.0, 20.0, 22.0]
    presets: dict[str, list[ExperimentConfig]] = {}

    def split_configs(base_name: str, equalizer: str, cpr: str, total_lw: float,
                      lengths: tuple) -> list[ExperimentConfig]:
        cfgs = []
        for tx_lw, lo_lw in _split_presets(base_name, total_lw):
            cfgs.append(ExperimentConfig(
                name=f"{base_name}_tx{tx_lw / 1e6:g}MHz_lo{lo_lw / 1e6:g}MHz",
                dsp=DspChainSpec(equalizer=equalizer, cpr=cpr),
                sweep={"fiber_length_km": list(lengths),
                       "tx_linewidth_hz": [tx_lw], "lo_linewidth_hz": [lo_lw],
                       "osnr_db": osnr_grid}))
        return cfgs

    lengths = (0.0, 400.0, 2000.0)   # BtB plus the two published lengths
    presets["fig4_tde"] = split_configs("fig4_tde", "tde", "nlms", 4e6, lengths)
    presets["fig5_fde"] = split_configs("fig5_fde", "fde", "nlms", 4e6, lengths)
    presets["fig6_lms_nocpr"] = [
        ExperimentConfig(name="fig6a_lms_20km",
                         dsp=DspChainSpec(equalizer="lms", cpr="none"),
                         sweep={"fiber_length_km": [20.0],
                                "tx_linewidth_hz": [1e5, 5e5, 1e6, 2e6],
                                "lo_linewidth_hz": [1e5, 5e5, 1e6, 2e6],
                                "osnr_db": osnr_grid}),
        ExperimentConfig(name="fig6b_lms_500kHz",
                         dsp=DspChainSpec(equalizer="lms", cpr="none"),
                         sweep={"fiber_length_km": [0.0, 20.0, 400.0, 2000.0],
                                "tx_linewidth_hz": [5e5], "lo_linewidth_hz": [5e5],
                                "osnr_db": osnr_grid}),
    ]
    presets["fig7_lms"] = split_configs("fig7_lms", "lms", "nlms", 1e6, lengths)
    presets["fig9_odc"] = split_configs("fig9_odc", "odc", "nlms", 4e6, lengths)
    presets["fig11_penalty"] = [
        ExperimentConfig(name=f"fig11_{eq}",
                         dsp=DspChainSpec(equalizer=eq, cpr="nlms"),
                         sweep={"fiber_length_km": [0.0, 2000.0],
                                "tx_linewidth_hz": [lw], "lo_linewidth_hz": [lw],
                                "osnr_db": osnr_grid})
        for eq in ("tde", "fde", "lms")
        for lw in (2.5e5, 5e5, 1e6, 2e6)
    ]
    floors = []
    for lw in (5e6, 10e6):
        floors.append(ExperimentConfig(
            name=f"fig12_bwa_{lw / 1e6:g}MHz",
            dsp=DspChainSpec(equalizer="fde", cpr="bwa"),
            sweep={"fiber_length_km": [2000.0], "osnr_db": [40.0],
                   "tx_linewidth_hz": [lw], "lo_linewidth_hz": [lw],
                   "block_size": [1, 3, 5, 7, 9, 11, 15, 21, 31, 41]}))
        floors.append(ExperimentConfig(
            name=f"fig12_vv_{lw / 1e6:g}MHz",
            dsp=DspChainSpec(equalizer="fde", cpr="vv"),
            sweep={"fiber_length_km": [2000.0], "osnr_db": [40.0],
                   "tx_linewidth_hz": [lw], "lo_linewidth_hz": [lw],
                   "block_size": [1, 3, 5, 7, 9, 11, 15, 21, 31, 41]}))
        floors.append(ExperimentConfig(
            name=f"fig12_nlms_{lw / 1e6:g}MHz",
            dsp=DspChainSpec(equalizer="fde", cpr="nlms"),
            sweep={"fiber_length_km": [2000.0], "osnr_db": [40.0],
                   "tx_linewidth_hz": [lw], "lo_linewidth_hz": [lw],
                   "step_size": [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]}))
    presets["fig12_floors"] = floors
    presets["fig13_tolerance"] = [
        ExperimentConfig(name=f"fig13_{cpr}",
                         dsp=DspChainSpec(equalizer="fde", cpr=cpr),
                         sweep={"fiber_length_km": [2000.0], "osnr_db": [40.0],
                                "tx_linewidth_hz": [5e5, 1e6, 2e6, 5e6, 1e7],
                                "lo_linewidth_hz": [5e5, 1e6, 2e6, 5e6, 1e7],
                                "block_size": [1, 5, 11, 21, 41] if cpr != "nlms" else [11]})
        for cpr in ("bwa", "vv", "nlms")
    ]
    return presets


def parse_config(path) -> ExperimentConfig:
    """INI-style experiment file: [link], [dsp], [sweep], [run] sections of
    flat key = value pairs (sweep values are comma lists)."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")

    def fval(section, key, default):
        if parser.has_option(section, key):
            return float(parser.get(section, key))
        return default

    known = {
        "link": {"symbol_rate", "wavelength_nm", "dispersion_ps_nm_km",
                 "fiber_length_km", "tx_linewidth_hz", "lo_linewidth_hz", "osnr_db"},
        "dsp": {"equalizer", "cpr", "block_size", "nlms_step", "nlms_training",
                "lms_step", "lms_taps", "lms_training", "odc_mode"},
        "sweep": set(SWEEP_AXES),
        "run": {"trials", "master_seed", "counted_bits", "name"},
    }
    for section in parser.sections():
        if section not in known:
            raise ConfigError(f"unknown section [{section}]")
        for key in parser.options(section):
            if key not in known[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")

    osnr = fval("link", "osnr_db", None) if parser.has_option("link", "osnr_db") else None
    link = LinkSpec(
        fiber_length_m=fval("link", "fiber_length_km", 0.0) * 1e3,
        tx_linewidth_hz=fval("link", "tx_linewidth_hz", 0.0),
        lo_linewidth_hz=fval("link", "lo_linewidth_hz", 0.0),
        osnr_db=osnr,
        symbol_rate=fval("link", "symbol_rate", 28e9),
        wavelength_m=fval("link", "wavelength_nm", 1553.6) * 1e-9,
        dispersion_ps_nm_km=fval("link", "dispersion_ps_nm_km", 16.0))
    try:
        dsp = DspChainSpec(
            equalizer=parser.get("dsp", "equalizer", fallback="fde"),
            cpr=parser.get("dsp", "cpr", fallback="nlms"),
            block_size=int(fval("dsp", "block_size", 11)),
            nlms_step=fval("dsp", "nlms_step", 0.5),
            nlms_training=int(fval("dsp", "nlms_training", 500)),
            lms_step=fval("dsp", "lms_step", 1e-3),
            lms_taps=(int(fval("dsp", "lms_taps", 0)) or None),
            lms_training=int(fval("dsp", "lms_training", 10_000)),
            odc_mode=parser.get("dsp", "odc_mode", fallback="dcf"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    sweep = {}
    if parser.has_section("sweep"):
        for key in parser.options("sweep"):
            text = parser.get("sweep", key).strip()
            if text:
                sweep[key] = [float(v) for v in text.split(",")]
    return ExperimentConfig(
        name=parser.get("run", "name", fallback="experiment"),
        link=link, dsp=dsp, sweep=sweep,
        trials=int(fval("run", "trials", 4)),
        master_seed=int(fval("run", "master_seed", 0)),
        counted_bits=int(fval("run", "counted_bits", 2**18)))
