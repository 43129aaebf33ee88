"""Fiber propagation, noise loading, LO mixing, and the receiver analog front end.

The dispersive channel is the all-pass exp(+j*D*lambda^2*L*omega^2/(4*pi*c));
every equalizer in :mod:`eepnsim.edc` applies the conjugate phase, and
``odc_compensate`` applies it in the optical domain before the LO.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal as _sig

from .signals import ComplexSequence
from .transmitter import PhaseWalk

C_LIGHT = 299792458.0


@dataclass(frozen=True)
class FiberSpec:
    """Dispersive fiber; ``dispersion`` is D in s/m^2 (SI form of ps/nm/km)."""

    dispersion: float
    length: float
    wavelength: float

    def __post_init__(self):
        if self.length < 0:
            raise ValueError("fiber length must be >= 0")

    @classmethod
    def from_engineering(cls, d_ps_nm_km: float, length_km: float,
                         wavelength_nm: float = 1553.6) -> "FiberSpec":
        # 1 ps/nm/km = 1e-6 s/m^2
        return cls(d_ps_nm_km * 1e-6, length_km * 1e3, wavelength_nm * 1e-9)

    @property
    def group_delay_spread(self) -> float:
        """Two-sided chirp constant D*lambda^2*L (s^2 * rad/s units fold in later)."""
        return self.dispersion * self.wavelength**2 * self.length


@dataclass(frozen=True)
class FrontendSpec:
    """Receiver analog front end and noise-loading parameters."""

    lpf_order: int = 5
    lpf_3db: float = 19.6e9
    adc_bits: int = 8
    adc_clip_sigma: float = 4.0
    osnr_db: float | None = None    # None = no noise loading
    osnr_ref_bw: float = 12.5e9

    def __post_init__(self):
        if self.adc_bits < 1:
            raise ValueError("adc_bits must be >= 1")
        if self.lpf_3db <= 0:
            raise ValueError("lpf_3db must be positive")
        if self.adc_clip_sigma <= 0:
            raise ValueError("adc_clip_sigma must be positive")


def _dispersion_phase_factor(n: int, sample_rate: float, fiber: FiberSpec,
                             sign: float) -> np.ndarray:
    omega = 2.0 * np.pi * np.fft.fftfreq(n, d=1.0 / sample_rate)
    k = fiber.group_delay_spread / (4.0 * np.pi * C_LIGHT)
    return np.exp(1j * sign * k * omega**2)


def cd_propagate(wave: ComplexSequence, fiber: FiberSpec) -> ComplexSequence:
    """All-pass chromatic dispersion over the full record in one transform."""
    if len(wave) == 0:
        raise ValueError("empty waveform")
    h = _dispersion_phase_factor(len(wave), wave.sample_rate, fiber, +1.0)
    return wave.with_samples(np.fft.ifft(np.fft.fft(wave.samples) * h))


def odc_compensate(wave: ComplexSequence, fiber: FiberSpec, mode: str = "dcf") -> ComplexSequence:
    """Ideal optical dispersion compensation (exact inverse of cd_propagate).

    ``mode`` selects DCF or ideally channelized FBG; both are the same ideal
    all-pass, so the outputs are bit-identical.
    """
    if mode not in ("dcf", "fbg"):
        raise ValueError(f"unknown ODC mode {mode!r}")
    h = _dispersion_phase_factor(len(wave), wave.sample_rate, fiber, -1.0)
    return wave.with_samples(np.fft.ifft(np.fft.fft(wave.samples) * h))


def load_awgn(wave_x: ComplexSequence, wave_y: ComplexSequence, spec: FrontendSpec,
              rng: np.random.Generator) -> tuple[ComplexSequence, ComplexSequence]:
    """Add circular complex white noise so that

        OSNR = P_total / (2 * N0 * osnr_ref_bw)

    with N0 the per-polarization noise PSD and P_total the two-polarization
    signal power.  Noise is white over the full simulation bandwidth.
    """
    if len(wave_x) != len(wave_y) or wave_x.sample_rate != wave_y.sample_rate:
        raise ValueError("polarizations must share length and sample rate")
    if spec.osnr_db is None or math.isinf(spec.osnr_db):
        return wave_x, wave_y
    osnr_lin = 10.0 ** (spec.osnr_db / 10.0)
    if not osnr_lin > 0:
        raise ValueError("OSNR must be positive in linear units")
    p_total = float(np.mean(np.abs(wave_x.samples) ** 2) + np.mean(np.abs(wave_y.samples) ** 2))
    n0 = p_total / (2.0 * spec.osnr_ref_bw * osnr_lin)
    var = n0 * wave_x.sample_rate
    scale = np.sqrt(var / 2.0)
    out = []
    for w in (wave_x, wave_y):
        n = len(w)
        noise = scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
        out.append(w.with_samples(w.samples + noise))
    return out[0], out[1]


def lo_mix(wave: ComplexSequence, lo_walk: PhaseWalk) -> ComplexSequence:
    """Coherent mixing with the local oscillator: multiply by exp(-j*phi_LO).

    Must run after fiber propagation and before any electronic equalizer;
    this ordering is what lets the equalizer disperse the LO phase noise.
    """
    if len(wave) != len(lo_walk):
        raise ValueError(f"length mismatch {len(wave)} != {len(lo_walk)}")
    return wave.with_samples(wave.samples * np.exp(-1j * lo_walk.phases))


def bessel_lpf(wave: ComplexSequence, spec: FrontendSpec) -> ComplexSequence:
    """Bessel-Thomson low-pass applied to each quadrature.

    The analog prototype response is frequency-sampled over the whole record,
    which keeps the filter exact for periodic blocks and pins the -3 dB point
    at ``lpf_3db`` by construction.  The constant (DC) group delay is removed
    so downstream symbol-center sampling stays on the sample grid; the
    filter's phase distortion relative to that flat delay is retained.
    """
    if wave.sample_rate <= 2.0 * spec.lpf_3db:
        raise ValueError("sample rate too low for the requested LPF bandwidth")
    z, p, k = _sig.besselap(spec.lpf_order, norm="mag")
    w = np.fft.fftfreq(len(wave), d=1.0 / wave.sample_rate) / spec.lpf_3db
    _, h = _sig.freqs_zpk(z, p, k, worN=w)
    tau0 = np.sum(-p.real / np.abs(p) ** 2) - np.sum(-z.real / np.abs(z) ** 2)
    h = h * np.exp(1j * w * tau0)
    return wave.with_samples(np.fft.ifft(np.fft.fft(wave.samples) * h))


def adc_quantize(wave: ComplexSequence, spec: FrontendSpec) -> ComplexSequence:
    """Uniform midrise quantization per quadrature.

    Full scale is ``adc_clip_sigma`` times the RMS of that quadrature; values
    beyond full scale clip to the outermost level.
    """
    def quantize(q: np.ndarray) -> np.ndarray:
        rms = np.sqrt(np.mean(q**2))
        if rms == 0:
            return q
        full_scale = spec.adc_clip_sigma * rms
        step = 2.0 * full_scale / 2**spec.adc_bits
        levels = step * (np.floor(q / step) + 0.5)
        return np.clip(levels, -full_scale + step / 2, full_scale - step / 2)

    s = wave.samples
    return wave.with_samples(quantize(s.real) + 1j * quantize(s.imag))


def decimate_to_2sps(wave: ComplexSequence, symbol_rate: float) -> ComplexSequence:
    """Keep every (sample_rate / (2*symbol_rate))-th sample, phased so the
    even-indexed output samples sit at symbol centers."""
    ratio = wave.sample_rate / (2.0 * symbol_rate)
    if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
        raise ValueError(f"sample rate {wave.sample_rate} is not an integer "
                         f"multiple of 2x symbol rate")
    r = int(round(ratio))
    return ComplexSequence(wave.samples[r::r].copy(), 2.0 * symbol_rate,
                           wave.center_wavelength)


# Canonical receive-chain stage order (the Fig.-1 ordering that creates EEPN).
PIPELINE_ORDER = (
    "tx_phase",
    "cd_propagate",
    "odc_compensate",
    "load_awgn",
    "lo_mix",
    "bessel_lpf",
    "adc_quantize",
    "decimate_to_2sps",
)

_OPTIONAL_STAGES = {"odc_compensate"}


def validate_pipeline_order(stages: tuple[str, ...] | list[str]) -> None:
    """Reject any stage sequence that is not the canonical front-end order
    (optional stages may be omitted, nothing may be reordered or repeated)."""
    expected = [s for s in PIPELINE_ORDER if s in stages or s not in _OPTIONAL_STAGES]
    if list(stages) != expected:
        raise ValueError(
            f"front-end stages {list(stages)} violate required order {expected}")
