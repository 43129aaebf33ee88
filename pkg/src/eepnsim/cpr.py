"""Carrier phase recovery at 1 sample/symbol, plus ambiguity-tolerant BER scoring.

Three estimators: a one-tap NLMS tracker, block-wise average (one estimate per
processing unit), and Viterbi-Viterbi (sliding window, central symbol only).
All use the constellation's n-th power to strip the modulation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .edc import _make_slicer
from .signals import BerReport, BitStream, ConstellationSpec, decide_indices


@dataclass(frozen=True)
class NlmsCprConfig:
    step_size: float = 0.5
    training_length: int = 500

    def __post_init__(self):
        if not 0.0 < self.step_size < 2.0:
            raise ValueError("NLMS step size must lie in (0, 2)")
        if self.training_length < 0:
            raise ValueError("training length must be >= 0")


@dataclass(frozen=True)
class BlockCprSpec:
    """Block estimator setup.  ``nth_power_angle`` is the angle any
    constellation point lands on when raised to the n-th power (pi for the
    diagonal QPSK constellation); it is subtracted before the 1/n division so
    the estimate is the carrier phase itself."""

    block_size: int
    symmetry_n: int = 4
    nth_power_angle: float = math.pi

    def __post_init__(self):
        if self.block_size < 1:
            raise ValueError("block size must be >= 1")

    @classmethod
    def for_constellation(cls, block_size: int, c: ConstellationSpec) -> "BlockCprSpec":
        return cls(block_size, c.phase_symmetry_n,
                   float(np.angle(complex(c.points[0]) ** c.phase_symmetry_n)))


@dataclass(frozen=True)
class CprTrace:
    corrected_symbols: np.ndarray
    phase_estimates: np.ndarray
    cycle_slip_count: int
    weight_magnitudes: np.ndarray | None = None  # NLMS diagnostic


def _unwrap_estimates(raw: np.ndarray, symmetry_n: int) -> tuple[np.ndarray, int]:
    """Remove 2*pi/n jumps between consecutive estimates; a jump whose raw size
    exceeds pi/n counts as one avoided cycle slip."""
    period = 2.0 * np.pi / symmetry_n
    if len(raw) < 2:
        return raw, 0
    jumps = np.floor(np.diff(raw) / period + 0.5)
    adj = np.concatenate([[0.0], np.cumsum(jumps)])
    return raw - period * adj, int(np.count_nonzero(jumps))


def nlms_cpr(symbols: np.ndarray, cfg: NlmsCprConfig, training: np.ndarray,
             constellation: ConstellationSpec) -> CprTrace:
    """One-tap NLMS phase tracker:

        W(k) = W(k-1) + mu/|x(k-1)|^2 * conj(x(k-1)) * e(k-1)
        e(k) = d(k) - W(k) x(k),   y(k) = W(k) x(k)

    d comes from ``training`` for the first ``training_length`` symbols and from
    the slicer afterwards.  Zero-magnitude inputs skip the update.
    """
    if len(symbols) == 0:
        raise ValueError("empty input")
    slicer = _make_slicer(constellation)
    xs = [complex(v) for v in symbols]
    train = [complex(v) for v in training[:cfg.training_length]]
    mu = cfg.step_size
    n = len(xs)
    out = np.empty(n, dtype=complex)
    phases = np.empty(n)
    mags = np.empty(n)
    w = 1.0 + 0.0j
    e_prev = 0.0 + 0.0j
    x_prev = None
    n_train = len(train)
    for k in range(n):
        if x_prev is not None:
            p2 = x_prev.real * x_prev.real + x_prev.imag * x_prev.imag
            if p2 > 0.0:
                w = w + (mu / p2) * x_prev.conjugate() * e_prev
        x = xs[k]
        y = w * x
        d = train[k] if k < n_train else slicer(y)
        e_prev = d - y
        x_prev = x
        out[k] = y
        phases[k] = -math.atan2(w.imag, w.real)
        mags[k] = abs(w)
    _, slips = _unwrap_estimates(phases, constellation.phase_symmetry_n)
    return CprTrace(out, phases, slips, mags)


def bwa_cpr(symbols: np.ndarray, spec: BlockCprSpec) -> CprTrace:
    """Block-wise average: per block of N symbols the estimate is
    arg(sum x^n)/n, removed from every symbol of that block.  Consecutive
    block estimates are unwrapped modulo 2*pi/n."""
    x = np.asarray(symbols)
    if len(x) == 0:
        raise ValueError("empty input")
    n = spec.symmetry_n
    starts = np.arange(0, len(x), spec.block_size)
    sums = np.add.reduceat(x**n, starts) * np.exp(-1j * spec.nth_power_angle)
    raw = np.angle(sums) / n
    est, slips = _unwrap_estimates(raw, n)
    per_symbol = np.repeat(est, spec.block_size)[:len(x)]
    return CprTrace(x * np.exp(-1j * per_symbol), per_symbol, slips)


def vv_cpr(symbols: np.ndarray, spec: BlockCprSpec) -> CprTrace:
    """Viterbi-Viterbi: sliding window of N (odd) symbols; the estimate
    arg(sum x^n)/n applies to the central symbol only.  Edge windows shrink
    symmetrically; the same 2*pi/n unwrapping as BWA runs across symbols."""
    if spec.block_size % 2 != 1:
        raise ValueError("Viterbi-Viterbi block size must be odd")
    x = np.asarray(symbols)
    if len(x) == 0:
        raise ValueError("empty input")
    n = spec.symmetry_n
    window = np.ones(spec.block_size)
    sums = np.convolve(x**n, window, mode="same") * np.exp(-1j * spec.nth_power_angle)
    raw = np.angle(sums) / n
    est, slips = _unwrap_estimates(raw, n)
    return CprTrace(x * np.exp(-1j * est), est, slips)


def pilot_branch_correct(trace: CprTrace, reference: np.ndarray, symmetry_n: int,
                         window: int = 129) -> CprTrace:
    """Data-aided removal of persistent n-fold lock losses.

    The residual rotation of the corrected stream against the transmitted
    symbols is smoothed over ``window`` symbols; where its 2*pi/n branch is
    nonzero the stream is rotated back.  Short noise excursions stay counted
    as errors (the smoothing hides them from the branch decision); a genuine
    cycle slip costs only the symbols inside the transition window instead of
    rotating the rest of the record.
    """
    y = trace.corrected_symbols
    period = 2.0 * np.pi / symmetry_n
    residual = np.convolve(y * np.conj(reference), np.ones(window), mode="same")
    branch = np.floor(np.angle(residual) / period + 0.5)
    corrected = y * np.exp(-1j * period * branch)
    slips = int(np.count_nonzero(np.diff(branch)))
    return CprTrace(corrected, trace.phase_estimates + period * branch,
                    slips, trace.weight_magnitudes)


def passthrough_cpr(symbols: np.ndarray) -> CprTrace:
    """No carrier recovery; keeps the trace contract for chains without CPR."""
    x = np.asarray(symbols)
    return CprTrace(x, np.zeros(len(x)), 0)


def align_and_count(trace: CprTrace, tx_symbols: np.ndarray, tx_bits: BitStream,
                    constellation: ConstellationSpec, max_delay: int = 8,
                    head_discard: int = 0, tail_discard: int = 0) -> BerReport:
    """Search integer symbol delays and all n global rotations; report the BER
    of the best (delay, rotation) pair.

    ``head_discard``/``tail_discard`` drop equalizer-edge and training symbols
    from the count.  Positive delay means the recovered stream lags the
    transmitted one.
    """
    k = constellation.bits_per_symbol
    y = trace.corrected_symbols
    lo = head_discard
    hi = len(y) - tail_discard
    if hi - lo <= max_delay:
        raise ValueError("no symbol overlap after edge discards")
    idx0 = decide_indices(y[lo:hi], constellation)
    labels = np.asarray(constellation.bit_labels, dtype=np.uint8)
    perms = [constellation.rotation_index_permutation(r)
             for r in range(constellation.phase_symmetry_n)]
    tx_sym_count = len(tx_symbols)
    tx_bit_arr = np.asarray(tx_bits.bits, dtype=np.uint8)

    best = None
    for delay in range(-max_delay, max_delay + 1):
        # recovered symbol (lo + j) corresponds to transmitted symbol (lo + j - delay)
        t0 = lo - delay
        src_lo = max(0, -t0)
        src_hi = min(len(idx0), tx_sym_count - t0)
        if src_hi - src_lo < 1:
            continue
        tx_slice = tx_bit_arr[(t0 + src_lo) * k:(t0 + src_hi) * k]
        rx_idx = idx0[src_lo:src_hi]
        for r in range(constellation.phase_symmetry_n):
            rx_bits = labels[perms[r][rx_idx]].reshape(-1)
            errors = int(np.count_nonzero(rx_bits != tx_slice))
            cand = (errors / len(tx_slice), errors, len(tx_slice), r, delay)
            if best is None or cand[0] < best[0]:
                best = cand
    if best is None:
        raise ValueError("no valid alignment found")
    ber, errors, bits, rot, delay = best
    return BerReport(errors, bits, ber, rotation_applied=rot, delay_applied=delay)
