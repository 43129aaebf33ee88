"""Coherent optical DP-QPSK transmission simulator with equalization-enhanced
phase noise: dispersion compensation back-ends, carrier phase recovery, and
Monte-Carlo BER experiments."""

from .analytics import (BerCurve, PhaseNoiseBudget, awgn_qpsk_ber, ber_floor,
                        eepn_variance, max_tolerable_effective_linewidth,
                        measure_curve, osnr_penalty_at_ber, phase_noise_budget)
from .cpr import (BlockCprSpec, CprTrace, NlmsCprConfig, align_and_count,
                  bwa_cpr, nlms_cpr, vv_cpr)
from .edc import (FdePlan, LmsEqualizer, TdeFilter, fde_equalize,
                  fde_min_zero_padding, fde_plan, lms_equalize, tde_build,
                  tde_equalize, tde_tap_count)
from .frontend import (FiberSpec, FrontendSpec, adc_quantize, bessel_lpf,
                       cd_propagate, decimate_to_2sps, load_awgn, lo_mix,
                       odc_compensate)
from .harness import (ExperimentConfig, ResultRow, emit_chart, emit_csv,
                      parse_config, preset_experiments, run_sweep)
from .link import DspChainSpec, LinkSpec, TrialResult, run_trial
from .signals import (BerReport, BitStream, ComplexSequence, ConstellationSpec,
                      SymbolFrame, count_errors, decide_symbols, map_symbols,
                      prbs15_generate, qpsk)
from .transmitter import (LaserSpec, PhaseWalk, apply_phase, phase_walk,
                          synthesize_waveform)

__version__ = "0.1.0"
