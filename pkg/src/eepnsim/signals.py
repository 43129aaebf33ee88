"""Symbol-level primitives: PRBS generation, Gray mapping, slicing, error counting."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

PRBS15_PERIOD = 2**15 - 1


@dataclass(frozen=True)
class ConstellationSpec:
    """Unit-energy constellation with n-fold rotational symmetry and a Gray bit map.

    ``points[i]`` is the complex point with constellation index ``i`` and
    ``bit_labels[i]`` its bit tuple.  Slicer ties are broken toward the
    smallest index, so the ordering of ``points`` is part of the contract.
    """

    modulation_order: int
    phase_symmetry_n: int
    points: np.ndarray
    bit_labels: np.ndarray

    def __post_init__(self):
        m = self.modulation_order
        if len(self.points) != m or len(self.bit_labels) != m:
            raise ValueError("points/bit_labels must have modulation_order entries")
        energy = np.mean(np.abs(self.points) ** 2)
        if abs(energy - 1.0) > 1e-12:
            raise ValueError(f"constellation mean energy {energy} != 1")
        # n-fold rotational symmetry: rotating the set maps it onto itself.
        rotated = self.points * np.exp(2j * np.pi / self.phase_symmetry_n)
        for p in rotated:
            if np.min(np.abs(self.points - p)) > 1e-9:
                raise ValueError("constellation lacks declared rotational symmetry")
        labels = {tuple(row) for row in np.asarray(self.bit_labels)}
        if len(labels) != m:
            raise ValueError("bit labels are not a bijection")

    @property
    def bits_per_symbol(self) -> int:
        return int(np.log2(self.modulation_order))

    @property
    def gray_map(self) -> dict[tuple[int, ...], complex]:
        return {
            tuple(int(b) for b in bits): complex(p)
            for bits, p in zip(self.bit_labels, self.points)
        }

    def rotation_index_permutation(self, r: int) -> np.ndarray:
        """Index permutation induced by rotating the received field by ``-r*2pi/n``.

        If a stream was decided as index ``i``, the same stream rotated back by
        ``r`` symmetry steps decides as ``perm[i]``.
        """
        rotated = self.points * np.exp(-2j * np.pi * r / self.phase_symmetry_n)
        dists = np.abs(rotated[:, None] - self.points[None, :])
        return np.argmin(dists, axis=1)


def qpsk() -> ConstellationSpec:
    """Gray-mapped unit-energy QPSK: 00 -> (+1+j)/sqrt2, 01 -> (-1+j)/sqrt2,
    11 -> (-1-j)/sqrt2, 10 -> (+1-j)/sqrt2."""
    points = np.array([1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j]) / np.sqrt(2.0)
    labels = np.array([[0, 0], [0, 1], [1, 1], [1, 0]], dtype=np.uint8)
    return ConstellationSpec(4, 4, points, labels)


@dataclass(frozen=True)
class BitStream:
    bits: np.ndarray
    origin: str = "external"

    def __post_init__(self):
        if len(self.bits) == 0:
            raise ValueError("empty bit stream")

    def __len__(self) -> int:
        return len(self.bits)


@dataclass(frozen=True)
class SymbolFrame:
    """Per-polarization symbol streams plus the bits they encode."""

    pol_x: np.ndarray
    pol_y: np.ndarray
    constellation: ConstellationSpec
    bits_x: BitStream
    bits_y: BitStream
    symbol_rate: float

    def __post_init__(self):
        k = self.constellation.bits_per_symbol
        if len(self.pol_x) * k != len(self.bits_x) or len(self.pol_y) * k != len(self.bits_y):
            raise ValueError("symbol count x bits-per-symbol != bit count")

    @property
    def symbol_period(self) -> float:
        return 1.0 / self.symbol_rate

    def pol(self, name: str) -> np.ndarray:
        return self.pol_x if name == "x" else self.pol_y

    def bits(self, name: str) -> BitStream:
        return self.bits_x if name == "x" else self.bits_y


@dataclass(frozen=True)
class ComplexSequence:
    """Uniformly sampled complex baseband waveform for one polarization."""

    samples: np.ndarray
    sample_rate: float
    center_wavelength: float = 1553.6e-9

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        if not np.all(np.isfinite(self.samples.view(np.float64))):
            raise ValueError("non-finite samples")

    def __len__(self) -> int:
        return len(self.samples)

    def with_samples(self, samples: np.ndarray) -> "ComplexSequence":
        return ComplexSequence(samples, self.sample_rate, self.center_wavelength)


@dataclass(frozen=True)
class BerReport:
    bit_errors: int
    bits_compared: int
    ber: float
    rotation_applied: int = 0
    delay_applied: int = 0

    def __post_init__(self):
        if self.bits_compared <= 0:
            raise ValueError("bits_compared must be positive")
        if abs(self.ber - self.bit_errors / self.bits_compared) > 1e-15:
            raise ValueError("inconsistent BER")


def _lfsr15_step(state: int) -> tuple[int, int]:
    # Fibonacci LFSR for x^15 + x^14 + 1: output and feedback from the two MSBs.
    out = (state >> 14) & 1
    fb = ((state >> 14) ^ (state >> 13)) & 1
    return ((state << 1) | fb) & 0x7FFF, out


@lru_cache(maxsize=64)
def _prbs15_period(seed: int) -> bytes:
    state = seed
    out = bytearray(PRBS15_PERIOD)
    for i in range(PRBS15_PERIOD):
        state, bit = _lfsr15_step(state)
        out[i] = bit
    return bytes(out)


def prbs15_generate(seed: int, length: int) -> BitStream:
    """Maximal-length PRBS from the x^15 + x^14 + 1 LFSR, period 32767."""
    if not 1 <= seed <= 0x7FFF:
        raise ValueError("seed must be a nonzero 15-bit state")
    if length < 1:
        raise ValueError("length must be >= 1")
    period = np.frombuffer(_prbs15_period(seed), dtype=np.uint8)
    reps = -(-length // PRBS15_PERIOD)
    bits = np.tile(period, reps)[:length].copy()
    return BitStream(bits, origin=f"prbs15:{seed:#06x}")


def map_symbols(bits: BitStream, c: ConstellationSpec) -> np.ndarray:
    """Gray-map a bit stream onto constellation symbols."""
    k = c.bits_per_symbol
    raw = np.asarray(bits.bits, dtype=np.uint8)
    if len(raw) % k != 0:
        raise ValueError(f"bit count {len(raw)} not divisible by {k}")
    groups = raw.reshape(-1, k)
    weights = 1 << np.arange(k - 1, -1, -1)
    codes = groups @ weights
    # Lookup table from bit-tuple integer to point.
    lut = np.zeros(2**k, dtype=complex)
    label_codes = np.asarray(c.bit_labels, dtype=np.uint8) @ weights
    lut[label_codes] = c.points
    return lut[codes]


def decide_symbols(rx: np.ndarray, c: ConstellationSpec) -> tuple[BitStream, np.ndarray]:
    """Nearest-neighbor slicer; exact ties go to the smallest constellation index."""
    idx = decide_indices(rx, c)
    bits = np.asarray(c.bit_labels, dtype=np.uint8)[idx].reshape(-1)
    return BitStream(bits, origin="decision"), np.asarray(c.points)[idx]


def decide_indices(rx: np.ndarray, c: ConstellationSpec) -> np.ndarray:
    rx = np.asarray(rx)
    d2 = np.abs(rx[:, None] - np.asarray(c.points)[None, :])
    return np.argmin(d2, axis=1)


def count_errors(tx: BitStream, rx: BitStream) -> BerReport:
    """Hamming distance between equal-length bit streams (no alignment here)."""
    a = np.asarray(tx.bits, dtype=np.uint8)
    b = np.asarray(rx.bits, dtype=np.uint8)
    if len(a) != len(b):
        raise ValueError(f"length mismatch {len(a)} != {len(b)}")
    errors = int(np.count_nonzero(a != b))
    return BerReport(errors, len(a), errors / len(a))
