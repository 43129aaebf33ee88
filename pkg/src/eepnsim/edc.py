"""Electronic chromatic-dispersion compensation at 2 samples/symbol.

Three back-ends: a static time-domain FIR chirp, a static frequency-domain
overlap-add equalizer, and a fractionally spaced LMS adaptive filter
(T/2-spaced input, symbol-spaced output).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.signal import fftconvolve

from .frontend import C_LIGHT, FiberSpec
from .signals import ComplexSequence, ConstellationSpec


@dataclass(frozen=True)
class TdeFilter:
    """Static FIR chirp; taps indexed k in [-N//2, +N//2], all equal magnitude."""

    taps: np.ndarray
    sampling_period: float

    def __post_init__(self):
        if len(self.taps) % 2 != 1:
            raise ValueError("tap count must be odd")
        mags = np.abs(self.taps)
        if np.ptp(mags) > 1e-9 * mags[0]:
            raise ValueError("chirp taps must share one magnitude")

    def __len__(self) -> int:
        return len(self.taps)


@dataclass(frozen=True)
class FdePlan:
    """Overlap-add plan; ``weights`` hold the all-pass response in FFT bin order."""

    fft_size: int
    overlap: int
    weights: np.ndarray
    nyquist_angular_freq: float

    def __post_init__(self):
        if self.fft_size & (self.fft_size - 1):
            raise ValueError("fft_size must be a power of two")
        if self.fft_size < self.overlap:
            raise ValueError("fft_size must cover the overlap")
        if np.max(np.abs(np.abs(self.weights) - 1.0)) > 1e-12:
            raise ValueError("equalizer weights must be all-pass")


@dataclass
class LmsEqualizer:
    """Fractionally spaced LMS configuration: trained, then decision-directed."""

    tap_count: int
    step_size: float = 1e-3
    training_length: int = 10_000

    def __post_init__(self):
        if self.tap_count % 2 != 1:
            raise ValueError("tap count must be odd")
        if self.step_size <= 0:
            raise ValueError("step size must be positive")
        if self.training_length < 1:
            raise ValueError("training length must be >= 1")


@dataclass(frozen=True)
class LmsResult:
    symbols: np.ndarray          # 1 sample/symbol output
    taps: np.ndarray             # converged weight vector
    error_magnitude: np.ndarray  # |e(k)| per output symbol
    diverged: bool


def _chirp_ratio(fiber: FiberSpec, sampling_period: float) -> float:
    return abs(fiber.group_delay_spread) / (2.0 * C_LIGHT * sampling_period**2)


def tde_tap_count(fiber: FiberSpec, sampling_period: float) -> int:
    """Tap count for full CD compensation: 2*floor(|D| lambda^2 L / (2 c T^2)) + 1."""
    if sampling_period <= 0:
        raise ValueError("sampling period must be positive")
    return 2 * int(math.floor(_chirp_ratio(fiber, sampling_period))) + 1


def tde_build(fiber: FiberSpec, sampling_period: float) -> TdeFilter:
    """Time-domain chirp taps

        W(k) = sqrt(j c T^2 / (D lambda^2 L)) * exp(-j pi c T^2 k^2 / (D lambda^2 L))

    over k in [-N//2, N//2].  Zero length degrades to the single-tap identity.

    The sign of the chirp is tied to the transform convention: under numpy's
    forward-FFT sign these taps must produce the same all-pass response as the
    frequency-domain equalizer, exp(-j D lambda^2 L omega^2 / (4 pi c)), which
    requires the conjugate of the textbook form above.
    """
    if fiber.length == 0 or fiber.dispersion == 0:
        return TdeFilter(np.ones(1, dtype=complex), sampling_period)
    n = tde_tap_count(fiber, sampling_period)
    half = n // 2
    k = np.arange(-half, half + 1)
    dll = fiber.group_delay_spread
    ct2 = C_LIGHT * sampling_period**2
    taps = np.conj(np.sqrt(1j * ct2 / dll) * np.exp(-1j * np.pi * ct2 * k**2 / dll))
    return TdeFilter(taps, sampling_period)


def tde_equalize(wave: ComplexSequence, filt: TdeFilter) -> ComplexSequence:
    """Center-aligned linear convolution; group delay is removed by the
    symmetric tap indexing."""
    if len(wave) < len(filt):
        raise ValueError("waveform shorter than the filter")
    out = fftconvolve(wave.samples, filt.taps, mode="same")
    return wave.with_samples(out)


def fde_min_zero_padding(fiber: FiberSpec, sampling_period: float) -> int:
    """Minimum zero padding for overlap-add CD compensation:

        2 * ceil( sqrt(pi^2 c^2 T^4 + 4 lambda^4 D^2 L^2) / (pi c T^2) + 1 )
    """
    if sampling_period <= 0:
        raise ValueError("sampling period must be positive")
    pict2 = np.pi * C_LIGHT * sampling_period**2
    bracket = math.sqrt(pict2**2 + 4.0 * fiber.group_delay_spread**2) / pict2 + 1.0
    return 2 * math.ceil(bracket)


def fde_plan(fiber: FiberSpec, sampling_period: float) -> FdePlan:
    """Radix-2 overlap-add plan: FFT size is the smallest power of two strictly
    greater than the minimum zero padding; weights sample the all-pass inverse
    of the fiber on the FFT grid."""
    overlap = fde_min_zero_padding(fiber, sampling_period)
    fft_size = 1
    while fft_size <= overlap:
        fft_size *= 2
    omega_n = np.pi / sampling_period
    k = np.fft.fftfreq(fft_size, d=1.0 / fft_size)  # bin indices in FFT order
    weights = np.exp(-1j * (fiber.group_delay_spread / (np.pi * C_LIGHT))
                     * (k * omega_n / fft_size) ** 2)
    return FdePlan(fft_size, overlap, weights, omega_n)


def fde_equalize(wave: ComplexSequence, plan: FdePlan) -> ComplexSequence:
    """Overlap-add block convolution with the all-pass weights.

    Each block is padded with overlap/2 zeros on both sides (the chirp impulse
    response is two-sided and zero-delay), transformed, weighted, and the
    overlapping tails are summed.  Output length equals input length.
    """
    x = wave.samples
    n = len(x)
    f = plan.fft_size
    v = plan.overlap
    half = v // 2
    block = f - v
    out = np.zeros(n + f, dtype=complex)
    for start in range(0, n, block):
        seg = x[start:start + block]
        buf = np.zeros(f, dtype=complex)
        buf[half:half + len(seg)] = seg
        out[start:start + f] += np.fft.ifft(np.fft.fft(buf) * plan.weights)
    return wave.with_samples(out[half:half + n])


def _qpsk_slicer(y: complex) -> complex:
    a = math.sqrt(0.5)
    return complex(a if y.real >= 0 else -a, a if y.imag >= 0 else -a)


def _make_slicer(constellation: ConstellationSpec):
    # Fast sign slicer for standard QPSK (identical decisions incl. tie-break);
    # generic nearest-point fallback otherwise.
    pts = np.asarray(constellation.points)
    std_qpsk = (constellation.modulation_order == 4
                and np.allclose(pts * np.sqrt(2.0), [1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j]))
    if std_qpsk:
        return _qpsk_slicer
    pts_list = [complex(p) for p in pts]

    def nearest(y: complex) -> complex:
        return min(pts_list, key=lambda p: abs(y - p))

    return nearest


def lms_equalize(wave: ComplexSequence, eq: LmsEqualizer, training: np.ndarray,
                 constellation: ConstellationSpec) -> LmsResult:
    """Fractionally spaced LMS: per output symbol k the input vector is the
    window of 2-sps samples centered on sample 2k, and

        y = W^H x,   e = d - y,   W <- W + mu * x * conj(e)

    with d taken from ``training`` for the first ``training_length`` symbols
    and from the slicer afterwards.  Divergence (||W|| growing 1000x beyond
    its initial norm) freezes adaptation and flags the result.
    """
    n = eq.tap_count
    if len(wave) < n:
        raise ValueError("waveform shorter than the equalizer")
    if len(training) < eq.training_length:
        raise ValueError("training sequence shorter than training_length")
    half = n // 2
    x = np.concatenate([np.zeros(half, dtype=complex), wave.samples,
                        np.zeros(half, dtype=complex)])
    windows = sliding_window_view(x, n)       # windows[j] centered on sample j
    n_sym = len(wave) // 2
    slicer = _make_slicer(constellation)

    w = np.zeros(n, dtype=complex)
    w[half] = 1.0
    norm_limit = 1e3
    mu = eq.step_size
    out = np.empty(n_sym, dtype=complex)
    err = np.empty(n_sym)
    diverged = False
    check_every = 2048
    for k in range(n_sym):
        xv = windows[2 * k]
        y = np.vdot(w, xv)
        d = training[k] if k < eq.training_length else slicer(y)
        e = d - y
        out[k] = y
        err[k] = abs(e)
        if not diverged:
            w += (mu * np.conj(e)) * xv
            if k % check_every == 0 and np.linalg.norm(w) > norm_limit:
                diverged = True
    return LmsResult(out, w, err, diverged)
