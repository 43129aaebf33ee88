"""Laser phase-noise walks and NRZ waveform synthesis."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signals import ComplexSequence, SymbolFrame

DEFAULT_WAVELENGTH = 1553.6e-9


@dataclass(frozen=True)
class LaserSpec:
    """Laser with Lorentzian line shape; ``linewidth`` is the 3-dB width in Hz."""

    linewidth: float
    center_wavelength: float = DEFAULT_WAVELENGTH

    def __post_init__(self):
        if self.linewidth < 0:
            raise ValueError("linewidth must be >= 0")
        if self.center_wavelength <= 0:
            raise ValueError("wavelength must be positive")


@dataclass(frozen=True)
class PhaseWalk:
    phases: np.ndarray
    sample_period: float

    def __len__(self) -> int:
        return len(self.phases)


def phase_walk(laser: LaserSpec, n_samples: int, sample_period: float,
               rng: np.random.Generator) -> PhaseWalk:
    """Wiener phase walk: phi(0)=0, i.i.d. Gaussian increments of variance
    2*pi*linewidth*sample_period.

    The unit-variance draws are scaled afterwards, so two walks built from
    identically seeded generators differ only by the linewidth scale factor.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    sigma = np.sqrt(2.0 * np.pi * laser.linewidth * sample_period)
    steps = sigma * rng.standard_normal(n_samples - 1)
    phases = np.empty(n_samples)
    phases[0] = 0.0
    np.cumsum(steps, out=phases[1:])
    return PhaseWalk(phases, sample_period)


def synthesize_waveform(frame: SymbolFrame, samples_per_symbol: int,
                        wavelength: float = DEFAULT_WAVELENGTH) -> dict[str, ComplexSequence]:
    """Rectangular NRZ pulses: each symbol repeated ``samples_per_symbol`` times."""
    if samples_per_symbol < 2 or samples_per_symbol % 2 != 0:
        raise ValueError("samples_per_symbol must be an even count >= 2")
    rate = frame.symbol_rate * samples_per_symbol
    return {
        p: ComplexSequence(np.repeat(frame.pol(p), samples_per_symbol), rate, wavelength)
        for p in ("x", "y")
    }


def apply_phase(wave: ComplexSequence, walk: PhaseWalk) -> ComplexSequence:
    """Multiply sample-wise by exp(+j*phi(k)); modulus is preserved."""
    if len(wave) != len(walk):
        raise ValueError(f"length mismatch {len(wave)} != {len(walk)}")
    return wave.with_samples(wave.samples * np.exp(1j * walk.phases))
