"""Single-trial end-to-end simulation: configs, the ordered receive chain, and
BER scoring for one seeded realization.

The trial is split into two stages so that several carrier-recovery variants
can be scored against one equalized realization: ``equalize_trial`` runs the
transmitter, channel, front end, and dispersion compensation; ``score_trial``
applies carrier recovery and counts errors.  ``run_trial`` chains both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import cpr as cpr_mod
from . import edc as edc_mod
from . import frontend as fe
from . import signals as sig
from . import transmitter as tx_mod

EQUALIZERS = ("tde", "fde", "lms", "odc", "none")
CPR_METHODS = ("nlms", "bwa", "vv", "none")

CPR_HEADROOM = 500   # worst-case CPR training prefix budgeted per record


@dataclass(frozen=True)
class LinkSpec:
    """Physical link parameters."""

    fiber_length_m: float = 0.0
    tx_linewidth_hz: float = 0.0
    lo_linewidth_hz: float = 0.0
    osnr_db: float | None = None
    symbol_rate: float = 28e9
    wavelength_m: float = 1553.6e-9
    dispersion_ps_nm_km: float = 16.0

    def fiber(self) -> fe.FiberSpec:
        return fe.FiberSpec(self.dispersion_ps_nm_km * 1e-6, self.fiber_length_m,
                            self.wavelength_m)

    @property
    def symbol_period(self) -> float:
        return 1.0 / self.symbol_rate


@dataclass(frozen=True)
class DspChainSpec:
    """Receiver DSP selection and tuning."""

    equalizer: str = "fde"
    cpr: str = "nlms"
    block_size: int = 11
    nlms_step: float = 0.5
    nlms_training: int = 500
    lms_step: float = 1e-3
    lms_taps: int | None = None          # default: tde_tap_count for the link
    lms_training: int = 10_000
    samples_per_symbol: int = 4
    odc_mode: str = "dcf"
    pilot_slip_removal: bool = True

    def __post_init__(self):
        if self.equalizer not in EQUALIZERS:
            raise ValueError(f"unknown equalizer {self.equalizer!r}")
        if self.cpr not in CPR_METHODS:
            raise ValueError(f"unknown cpr {self.cpr!r}")
        if self.cpr == "vv" and self.block_size % 2 != 1:
            raise ValueError("Viterbi-Viterbi block size must be odd")
        if self.nlms_training > CPR_HEADROOM:
            raise ValueError(f"nlms_training must be <= {CPR_HEADROOM}")


@dataclass(frozen=True)
class EqualizedTrial:
    """Front-end output of one seeded realization, before carrier recovery."""

    frame: sig.SymbolFrame
    symbols: dict[str, np.ndarray]       # 1 sps per polarization, post-EDC
    head_discard: int                    # symbols excluded at the record head
    tail_discard: int
    diverged: bool
    effective_linewidth_hz: float
    internals: dict | None = None


@dataclass(frozen=True)
class TrialResult:
    report: sig.BerReport                # both polarizations combined
    per_pol: dict[str, sig.BerReport]
    diverged: bool
    effective_linewidth_hz: float = 0.0
    internals: dict | None = None


def _combined(reports: dict[str, sig.BerReport]) -> sig.BerReport:
    errors = sum(r.bit_errors for r in reports.values())
    bits = sum(r.bits_compared for r in reports.values())
    return sig.BerReport(errors, bits, errors / bits)


def edc_edge_discard(link: LinkSpec, dsp: DspChainSpec) -> int:
    """Symbols rendered unreliable at each record edge by the equalizer."""
    t_half = link.symbol_period / 2.0
    fiber = link.fiber()
    if dsp.equalizer == "tde":
        return -(-edc_mod.tde_tap_count(fiber, t_half) // 2 // 2) + 1
    if dsp.equalizer == "fde":
        return edc_mod.fde_min_zero_padding(fiber, t_half) // 4 + 1
    if dsp.equalizer == "lms":
        taps = dsp.lms_taps or edc_mod.tde_tap_count(fiber, t_half)
        return taps // 4 + 1
    return 1


def discard_budget(link: LinkSpec, dsp: DspChainSpec) -> tuple[int, int]:
    """(head, tail) symbols excluded from BER counting: equalizer edges, any
    training prefixes, and a safety margin."""
    edge = edc_edge_discard(link, dsp)
    head = edge + 32 + CPR_HEADROOM
    if dsp.equalizer == "lms":
        head += dsp.lms_training
    return head, edge + 8


def equalize_trial(link: LinkSpec, dsp: DspChainSpec, seed, counted_bits: int = 2**18,
                   frontend: fe.FrontendSpec | None = None,
                   diagnostics: bool = False) -> EqualizedTrial:
    """Generate one seeded realization, run the canonical chain through
    dispersion compensation, and return symbol-rate streams ready for CPR.

    ``seed`` is an integer or a ``numpy.random.SeedSequence``; all random
    streams (data, both laser walks, noise) derive from it, so identical
    arguments reproduce bit-identical results.
    """
    from .analytics import phase_noise_budget  # local import, avoids cycle

    if frontend is None:
        frontend = fe.FrontendSpec(osnr_db=link.osnr_db)
    elif frontend.osnr_db != link.osnr_db:
        frontend = replace(frontend, osnr_db=link.osnr_db)

    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    prbs_ss, tx_ss, lo_ss, noise_ss = ss.spawn(4)
    rng_prbs = np.random.Generator(np.random.Philox(prbs_ss))
    rng_noise = np.random.Generator(np.random.Philox(noise_ss))

    constellation = sig.qpsk()
    head, tail = discard_budget(link, dsp)
    n_sym = -(-counted_bits // (2 * constellation.bits_per_symbol)) + head + tail

    bits = {p: sig.prbs15_generate(int(rng_prbs.integers(1, 2**15)),
                                   n_sym * constellation.bits_per_symbol)
            for p in ("x", "y")}
    frame = sig.SymbolFrame(
        pol_x=sig.map_symbols(bits["x"], constellation),
        pol_y=sig.map_symbols(bits["y"], constellation),
        constellation=constellation, bits_x=bits["x"], bits_y=bits["y"],
        symbol_rate=link.symbol_rate)

    waves = tx_mod.synthesize_waveform(frame, dsp.samples_per_symbol, link.wavelength_m)
    n4 = len(waves["x"])
    sample_period = 1.0 / waves["x"].sample_rate
    tx_walk = tx_mod.phase_walk(tx_mod.LaserSpec(link.tx_linewidth_hz, link.wavelength_m),
                                n4, sample_period, np.random.Generator(np.random.Philox(tx_ss)))
    lo_walk = tx_mod.phase_walk(tx_mod.LaserSpec(link.lo_linewidth_hz, link.wavelength_m),
                                n4, sample_period, np.random.Generator(np.random.Philox(lo_ss)))

    stages = ["tx_phase", "cd_propagate"]
    if dsp.equalizer == "odc":
        stages.append("odc_compensate")
    stages += ["load_awgn", "lo_mix", "bessel_lpf", "adc_quantize", "decimate_to_2sps"]
    fe.validate_pipeline_order(stages)

    fiber = link.fiber()
    waves = {p: tx_mod.apply_phase(w, tx_walk) for p, w in waves.items()}
    waves = {p: fe.cd_propagate(w, fiber) for p, w in waves.items()}
    if dsp.equalizer == "odc":
        waves = {p: fe.odc_compensate(w, fiber, dsp.odc_mode) for p, w in waves.items()}
    waves["x"], waves["y"] = fe.load_awgn(waves["x"], waves["y"], frontend, rng_noise)
    waves = {p: fe.lo_mix(w, lo_walk) for p, w in waves.items()}
    waves = {p: fe.bessel_lpf(w, frontend) for p, w in waves.items()}
    waves = {p: fe.adc_quantize(w, frontend) for p, w in waves.items()}
    two_sps = {p: fe.decimate_to_2sps(w, link.symbol_rate) for p, w in waves.items()}

    t_half = link.symbol_period / 2.0
    diverged = False
    internals: dict = {}
    one_sps: dict[str, np.ndarray] = {}
    if dsp.equalizer == "tde":
        filt = edc_mod.tde_build(fiber, t_half)
        for p, w in two_sps.items():
            one_sps[p] = edc_mod.tde_equalize(w, filt).samples[::2]
    elif dsp.equalizer == "fde":
        plan = edc_mod.fde_plan(fiber, t_half)
        for p, w in two_sps.items():
            one_sps[p] = edc_mod.fde_equalize(w, plan).samples[::2]
    elif dsp.equalizer == "lms":
        taps = dsp.lms_taps or edc_mod.tde_tap_count(fiber, t_half)
        eq = edc_mod.LmsEqualizer(taps, dsp.lms_step, dsp.lms_training)
        for p, w in two_sps.items():
            res = edc_mod.lms_equalize(w, eq, frame.pol(p), constellation)
            one_sps[p] = res.symbols
            diverged |= res.diverged
            if diagnostics:
                internals[f"lms_taps_{p}"] = res.taps
                internals[f"lms_error_{p}"] = res.error_magnitude
    else:  # odc / none: symbol centers sit at the even 2-sps samples
        for p, w in two_sps.items():
            one_sps[p] = w.samples[::2]

    budget = phase_noise_budget(link)
    return EqualizedTrial(frame, one_sps, head, tail, diverged,
                          budget.effective_linewidth_hz,
                          internals if diagnostics else None)


def score_trial(eq: EqualizedTrial, dsp: DspChainSpec,
                diagnostics: bool = False) -> TrialResult:
    """Apply the configured carrier recovery to an equalized realization and
    count aligned bit errors for both polarizations."""
    frame = eq.frame
    constellation = frame.constellation
    internals = dict(eq.internals) if (diagnostics and eq.internals) else {}
    reports: dict[str, sig.BerReport] = {}
    for p, symbols in eq.symbols.items():
        if dsp.cpr == "nlms":
            trace = cpr_mod.nlms_cpr(symbols, cpr_mod.NlmsCprConfig(dsp.nlms_step,
                                                                    dsp.nlms_training),
                                     frame.pol(p), constellation)
        elif dsp.cpr == "bwa":
            trace = cpr_mod.bwa_cpr(symbols, cpr_mod.BlockCprSpec.for_constellation(
                dsp.block_size, constellation))
        elif dsp.cpr == "vv":
            trace = cpr_mod.vv_cpr(symbols, cpr_mod.BlockCprSpec.for_constellation(
                dsp.block_size, constellation))
        else:
            trace = cpr_mod.passthrough_cpr(symbols)
        if dsp.pilot_slip_removal and dsp.cpr != "none":
            trace = cpr_mod.pilot_branch_correct(
                trace, frame.pol(p)[:len(trace.corrected_symbols)],
                constellation.phase_symmetry_n)
        if diagnostics:
            internals[f"cpr_trace_{p}"] = trace
        reports[p] = cpr_mod.align_and_count(trace, frame.pol(p), frame.bits(p),
                                             constellation, max_delay=8,
                                             head_discard=eq.head_discard,
                                             tail_discard=eq.tail_discard)
    return TrialResult(_combined(reports), reports, eq.diverged,
                       eq.effective_linewidth_hz,
                       internals if diagnostics else None)


def run_trial(link: LinkSpec, dsp: DspChainSpec, seed, counted_bits: int = 2**18,
              frontend: fe.FrontendSpec | None = None,
              diagnostics: bool = False) -> TrialResult:
    """Run one seeded realization through the canonical chain and count errors."""
    eq = equalize_trial(link, dsp, seed, counted_bits, frontend, diagnostics)
    return score_trial(eq, dsp, diagnostics)
