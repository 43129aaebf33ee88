"""Closed-form phase-noise arithmetic and derived experiment metrics: OSNR
penalties at a target BER, BER floors, and effective-linewidth tolerance."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .frontend import C_LIGHT
from .link import DspChainSpec, LinkSpec, run_trial


@dataclass(frozen=True)
class PhaseNoiseBudget:
    var_tx: float
    var_lo: float
    var_eepn: float
    correlation_rho: float
    var_total: float
    effective_linewidth_hz: float

    def __post_init__(self):
        if min(self.var_tx, self.var_lo, self.var_eepn) < 0:
            raise ValueError("variances must be >= 0")


@dataclass(frozen=True)
class BerCurve:
    """Ordered (OSNR dB, BER) samples of one scenario."""

    osnr_db: np.ndarray
    ber: np.ndarray
    label: str = ""

    def __post_init__(self):
        if np.any(np.diff(self.osnr_db) <= 0):
            raise ValueError("OSNR axis must be strictly increasing")
        if np.any((self.ber <= 0) | (self.ber > 1)):
            raise ValueError("BER values must lie in (0, 1]")


def eepn_variance(link: LinkSpec) -> float:
    """Variance of the dispersion-enhanced LO phase noise:
    (pi*lambda^2 / 2c) * D*L*df_LO / Ts."""
    d_si = link.dispersion_ps_nm_km * 1e-6
    return (np.pi * link.wavelength_m**2 / (2.0 * C_LIGHT)) \
        * d_si * link.fiber_length_m * link.lo_linewidth_hz * link.symbol_rate


def phase_noise_budget(link: LinkSpec, rho: float = 0.0) -> PhaseNoiseBudget:
    """Total phase-noise variance and the equivalent single-laser linewidth.

    rho is the correlation between the enhanced and the intrinsic LO terms;
    it decays to ~0 beyond roughly 80 km, which covers every long-haul case,
    so the default is 0.
    """
    if abs(rho) > 1.0:
        raise ValueError("|rho| must be <= 1")
    ts = link.symbol_period
    var_tx = 2.0 * np.pi * link.tx_linewidth_hz * ts
    var_lo = 2.0 * np.pi * link.lo_linewidth_hz * ts
    var_eepn = eepn_variance(link)
    var_total = var_tx + var_lo + var_eepn + 2.0 * rho * math.sqrt(var_lo * var_eepn)
    return PhaseNoiseBudget(var_tx, var_lo, var_eepn, rho, var_total,
                            var_total / (2.0 * np.pi * ts))


def qfunc(x):
    return 0.5 * erfc(np.asarray(x) / np.sqrt(2.0))


def awgn_qpsk_ber(osnr_db, symbol_rate: float = 28e9, ref_bw: float = 12.5e9):
    """Matched-filter QPSK BER over AWGN under the dual-polarization 12.5-GHz
    OSNR convention: Q(sqrt(OSNR * B_ref / R_s))."""
    osnr = 10.0 ** (np.asarray(osnr_db, dtype=float) / 10.0)
    return qfunc(np.sqrt(osnr * ref_bw / symbol_rate))


def osnr_at_ber(curve: BerCurve, target_ber: float) -> float:
    """OSNR where the curve crosses ``target_ber``, interpolated linearly in
    (OSNR dB, log10 BER).  Returns +inf when the curve floors above the target."""
    if np.min(curve.ber) > target_ber:
        return math.inf
    if np.max(curve.ber) < target_ber:
        raise ValueError("curve lies entirely below the target BER")
    logb = np.log10(curve.ber)
    logt = math.log10(target_ber)
    for i in range(len(logb) - 1):
        b0, b1 = logb[i], logb[i + 1]
        if (b0 - logt) * (b1 - logt) <= 0 and b0 != b1:
            frac = (logt - b0) / (b1 - b0)
            return float(curve.osnr_db[i] + frac * (curve.osnr_db[i + 1] - curve.osnr_db[i]))
    # target touched only at a sample point
    idx = int(np.argmin(np.abs(logb - logt)))
    return float(curve.osnr_db[idx])


def osnr_penalty_at_ber(curve: BerCurve, reference: BerCurve, target_ber: float) -> float:
    """OSNR penalty of ``curve`` against ``reference`` at ``target_ber`` in dB;
    +inf when the tested curve never reaches the target."""
    test = osnr_at_ber(curve, target_ber)
    if math.isinf(test):
        return math.inf
    return test - osnr_at_ber(reference, target_ber)


def wilson_interval(errors: int, bits: int, z: float = 1.96) -> tuple[float, float]:
    if bits == 0:
        raise ValueError("no bits counted")
    p = errors / bits
    denom = 1.0 + z**2 / bits
    center = (p + z**2 / (2 * bits)) / denom
    half = z * math.sqrt(p * (1 - p) / bits + z**2 / (4 * bits**2)) / denom
    return max(center - half, 0.0), min(center + half, 1.0)


@dataclass(frozen=True)
class FloorEstimate:
    ber: float
    bit_errors: int
    bits_counted: int
    interval: tuple[float, float]
    is_upper_bound: bool     # True when no errors were seen (rule of three)


def ber_floor(link: LinkSpec, dsp: DspChainSpec, trials: int = 4,
              osnr_db: float = 40.0, counted_bits: int = 2**18,
              master_seed: int = 0) -> FloorEstimate:
    """Monte-Carlo BER floor at high OSNR, aggregated over independent trials.
    Zero observed errors report the rule-of-three upper bound 3/bits."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    from dataclasses import replace
    floored_link = replace(link, osnr_db=osnr_db)
    errors = 0
    bits = 0
    for t in range(trials):
        ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(0, t))
        res = run_trial(floored_link, dsp, ss, counted_bits=counted_bits)
        errors += res.report.bit_errors
        bits += res.report.bits_compared
    if errors == 0:
        return FloorEstimate(3.0 / bits, 0, bits, (0.0, 3.0 / bits), True)
    return FloorEstimate(errors / bits, errors, bits,
                         wilson_interval(errors, bits), False)


def measure_curve(link: LinkSpec, dsp: DspChainSpec, osnr_grid, trials: int = 2,
                  counted_bits: int = 2**18, master_seed: int = 0,
                  label: str = "") -> BerCurve:
    """Simulated BER-vs-OSNR curve; zero-error points are clamped to the
    rule-of-three bound so the curve stays in (0, 1]."""
    bers = []
    for gi, osnr in enumerate(osnr_grid):
        from dataclasses import replace
        pt_link = replace(link, osnr_db=float(osnr))
        errors = 0
        bits = 0
        for t in range(trials):
            ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(gi, t))
            res = run_trial(pt_link, dsp, ss, counted_bits=counted_bits)
            errors += res.report.bit_errors
            bits += res.report.bits_compared
        bers.append(errors / bits if errors else 3.0 / bits)
    return BerCurve(np.asarray(osnr_grid, dtype=float), np.asarray(bers), label)


def max_tolerable_effective_linewidth(link: LinkSpec, dsp: DspChainSpec,
                                      target_floor: float, trials: int = 2,
                                      counted_bits: int = 2**18, master_seed: int = 0,
                                      lw_lo: float = 1e3, lw_hi: float = 1e8) -> float:
    """Largest effective linewidth whose BER floor stays at ``target_floor``.

    Realized by scaling both laser linewidths together at fixed fiber length
    and bisecting in the log domain until the bracket is within 5% relative.
    Raises when the target is outside the search range.
    """
    from dataclasses import replace
    if not 0.0 < target_floor < 0.5:
        raise ValueError("target floor must lie in (0, 0.5)")

    def floor_at(lw: float) -> float:
        trial_link = replace(link, tx_linewidth_hz=lw, lo_linewidth_hz=lw)
        return ber_floor(trial_link, dsp, trials=trials, counted_bits=counted_bits,
                         master_seed=master_seed).ber

    def eff(lw: float) -> float:
        return phase_noise_budget(replace(link, tx_linewidth_hz=lw,
                                          lo_linewidth_hz=lw)).effective_linewidth_hz

    if floor_at(lw_lo) > target_floor:
        raise ValueError("target floor unreachable: exceeded at the lower search bound")
    if floor_at(lw_hi) < target_floor:
        raise ValueError("target floor unreachable: not reached at the upper search bound")
    lo, hi = lw_lo, lw_hi
    while (eff(hi) - eff(lo)) > 0.05 * eff(0.5 * (lo + hi)):
        mid = math.sqrt(lo * hi)
        if floor_at(mid) > target_floor:
            hi = mid
        else:
            lo = mid
    return eff(math.sqrt(lo * hi))
