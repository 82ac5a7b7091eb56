"""Quasiclassical hidden-variable cells built from a shared random phase.

A carrier ``cos(w0 t)`` is phase-modulated by a slow random process
``phi(t)``. Each cell adds its own controlled phase shift ``alpha``, mixes the
result with the stable homodyne oscillation ``cos(w0 t)``, squares it in a
square-law detector and low-pass filters away the ``2 w0`` terms. With
detector gain 2 the filtered baseband is ``2 + 2 cos(phi + alpha)``;
subtracting the pedestal and taking the sign gives a two-valued outcome.

Cells driven by the *same* ``phi(t)`` are correlated; that shared phase is the
hidden variable. For a uniformly distributed phase the sign correlation of
two cells separated by ``delta`` is the sawtooth ``1 - 2|delta|/pi``.

Two evaluation paths exist:

* trace level (:func:`modulate` ... :func:`threshold_sign`, :func:`build_cells`),
  which processes complete sampled waveforms, and
* a batched frozen-phase path (:func:`frozen_baseband`) which evaluates the
  same chain only over the filter support around the read-out sample, for
  many trials at once. Correlation statistics use the batched path.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy.signal import oaconvolve

from .errors import (
    ConfigError,
    ContractError,
    SlownessViolation,
    StatisticalCheckError,
    TransientRegionError,
)
from .qubit import correlation_from_agreements
from .rng import CHUNK_TRIALS, SeedLike, as_generator, child_seed, chunk_sizes

TWO_PI = 2.0 * math.pi

DEFAULT_CARRIER_HZ = 1.0e3
DEFAULT_OMEGA0 = TWO_PI * DEFAULT_CARRIER_HZ
DEFAULT_SAMPLE_RATE = 1.0e5
DEFAULT_CORRELATION_TIME = 1.0
DETECTOR_GAIN = 2.0

MIN_SAMPLES_PER_PERIOD = 20.0
MIN_PERIODS_PER_CORRELATION = 100.0
STOPBAND_DB = 60.0
PASSBAND_RIPPLE_DB = 0.1
# coherence self-check runs only on traces at least this many correlation times long
COHERENCE_CHECK_SPAN = 100.0


# --- configuration and traces -------------------------------------------

@dataclass(frozen=True)
class CarrierConfig:
    omega0: float = DEFAULT_OMEGA0
    sample_rate: float = DEFAULT_SAMPLE_RATE
    duration: float = 0.02

    def __post_init__(self):
        if not (self.omega0 > 0 and math.isfinite(self.omega0)):
            raise ContractError(f"omega0 must be positive, got {self.omega0!r}")
        if not (self.sample_rate > 0 and math.isfinite(self.sample_rate)):
            raise ContractError(f"sample_rate must be positive, got {self.sample_rate!r}")
        if self.sample_rate < MIN_SAMPLES_PER_PERIOD * self.carrier_hz * (1 - 1e-12):
            raise ContractError(
                f"sample_rate {self.sample_rate} Hz is below {MIN_SAMPLES_PER_PERIOD:g} x carrier "
                f"frequency {self.carrier_hz} Hz"
            )
        n = self.duration * self.sample_rate
        if not math.isfinite(n) or abs(n - round(n)) > 1e-6 * max(1.0, n) or round(n) < 2:
            raise ContractError(
                f"duration x sample_rate must be an integer >= 2, got {n!r}"
            )

    @property
    def carrier_hz(self) -> float:
        return self.omega0 / TWO_PI

    @property
    def period(self) -> float:
        return TWO_PI / self.omega0

    @property
    def n_samples(self) -> int:
        return int(round(self.duration * self.sample_rate))

    @property
    def dt(self) -> float:
        return 1.0 / self.sample_rate

    def times(self) -> np.ndarray:
        return np.arange(self.n_samples) / self.sample_rate

    def with_samples(self, n: int) -> CarrierConfig:
        return replace(self, duration=n / self.sample_rate)


@dataclass(frozen=True, eq=False)
class SignalTrace:
    """Uniformly sampled real waveform.

    ``valid_start``/``valid_stop`` bound the samples not affected by filter
    transients (the whole trace unless a filter has been applied).
    """

    samples: np.ndarray
    sample_rate: float
    valid_start: int = 0
    valid_stop: Optional[int] = None

    def __post_init__(self):
        s = np.array(self.samples, dtype=float)
        if s.ndim != 1:
            raise ContractError("trace samples must be one-dimensional")
        if not np.all(np.isfinite(s)):
            raise ContractError("trace samples must be finite")
        if not self.sample_rate > 0:
            raise ContractError("sample_rate must be positive")
        stop = s.size if self.valid_stop is None else int(self.valid_stop)
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "valid_stop", stop)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def valid(self) -> slice:
        return slice(self.valid_start, self.valid_stop)

    def is_valid_index(self, i: int) -> bool:
        return self.valid_start <= i < self.valid_stop

    def times(self) -> np.ndarray:
        return np.arange(self.samples.size) / self.sample_rate


@dataclass(frozen=True, eq=False)
class StochasticPhase:
    samples: np.ndarray
    correlation_time: float
    seed: object = None
    frozen: bool = False

    def __len__(self) -> int:
        return self.samples.size


def _check_grid(trace_len: int, cfg: CarrierConfig, what: str) -> None:
    if trace_len != cfg.n_samples:
        raise ContractError(f"{what} has {trace_len} samples, carrier grid has {cfg.n_samples}")


def check_slowness(omega0: float, correlation_time: float) -> None:
    period = TWO_PI / omega0
    if not correlation_time >= MIN_PERIODS_PER_CORRELATION * period:
        raise SlownessViolation(
            f"correlation_time {correlation_time!r} s must be >= {MIN_PERIODS_PER_CORRELATION:g} "
            f"carrier periods ({MIN_PERIODS_PER_CORRELATION * period:.3g} s)"
        )


# --- phase process ------------------------------------------------------

def gen_phase(
    cfg: CarrierConfig,
    correlation_time: float,
    seed: SeedLike,
    *,
    frozen: bool = False,
) -> StochasticPhase:
    """Sample the shared phase on the carrier grid.

    The phase performs a Wiener random walk with diffusion constant
    ``1/correlation_time``, so ``<cos(phi(t+s) - phi(t))> = exp(-s/correlation_time)``,
    starting from a uniform draw on ``[0, 2pi)``. With ``frozen=True`` (or an
    infinite correlation time) the trace is that single uniform draw held constant.
    """
    check_slowness(cfg.omega0, correlation_time)
    rng = as_generator(seed)
    n = cfg.n_samples
    phi0 = rng.uniform(0.0, TWO_PI)
    if frozen or math.isinf(correlation_time):
        samples = np.full(n, phi0)
        frozen = True
    else:
        samples = np.empty(n)
        samples[0] = phi0
        steps = rng.standard_normal(n - 1)
        steps *= math.sqrt(2.0 * cfg.dt / correlation_time)
        np.cumsum(steps, out=samples[1:])
        samples[1:] += phi0
        del steps
        if cfg.duration >= COHERENCE_CHECK_SPAN * correlation_time:
            est = phase_coherence_time(samples, cfg.sample_rate, correlation_time)
            if not 0.5 * correlation_time <= est <= 2.0 * correlation_time:
                raise StatisticalCheckError(
                    f"phase coherence time {est:.4g} s is not within x2 of {correlation_time:.4g} s"
                )
    samples.setflags(write=False)
    seed_record = seed if isinstance(seed, (int, np.integer)) or seed is None else repr(seed)
    return StochasticPhase(samples, float(correlation_time), seed_record, frozen)


def phase_coherence_time(samples: np.ndarray, sample_rate: float, lag_hint: float) -> float:
    """Decay constant of the carrier phasor autocorrelation, probed at lag ``lag_hint/4``."""
    lag = max(1, int(round(0.25 * lag_hint * sample_rate)))
    if lag >= samples.size:
        raise ContractError("trace too short for a coherence estimate")
    g = float(np.mean(np.cos(samples[lag:] - samples[:-lag])))
    if g <= 0.0:
        return 0.0
    return (lag / sample_rate) / -math.log(g)


# --- DSP stages ---------------------------------------------------------

def _carrier_phase(cfg: CarrierConfig, phase: StochasticPhase, alpha: float) -> SignalTrace:
    _check_grid(len(phase), cfg, "phase")
    return SignalTrace(np.cos(cfg.omega0 * cfg.times() + phase.samples + alpha), cfg.sample_rate)


def modulate(cfg: CarrierConfig, phase: StochasticPhase) -> SignalTrace:
    """``X(t) = cos(w0 t + phi(t))``."""
    return _carrier_phase(cfg, phase, 0.0)


def phase_shift(cfg: CarrierConfig, phase: StochasticPhase, alpha: float) -> SignalTrace:
    """``cos(w0 t + phi(t) + alpha)``, ``alpha`` taken modulo 2pi."""
    return _carrier_phase(cfg, phase, float(alpha) % TWO_PI)


def homodyne_mix(shifted: SignalTrace, cfg: CarrierConfig) -> SignalTrace:
    """Additive superposition with the stable reference ``cos(w0 t)``."""
    _check_grid(len(shifted), cfg, "trace")
    if shifted.sample_rate != cfg.sample_rate:
        raise ContractError("trace and carrier sample rates differ")
    return SignalTrace(shifted.samples + np.cos(cfg.omega0 * cfg.times()), cfg.sample_rate)


def square_law_detect(z: SignalTrace, gain: float = DETECTOR_GAIN) -> SignalTrace:
    if not gain > 0:
        raise ContractError(f"detector gain must be positive, got {gain!r}")
    return SignalTrace(gain * z.samples * z.samples, z.sample_rate, z.valid_start, z.valid_stop)


@dataclass(frozen=True, eq=False)
class FirLowPass:
    """Linear-phase windowed-sinc (Blackman) low-pass filter with odd length."""

    taps: np.ndarray
    cutoff: float
    omega0: float
    sample_rate: float

    @property
    def half(self) -> int:
        return (self.taps.size - 1) // 2

    def response(self, omega) -> np.ndarray:
        """Zero-phase (real) frequency response at angular frequencies ``omega``."""
        omega = np.atleast_1d(np.asarray(omega, dtype=float))
        k = np.arange(1, self.half + 1)
        h = self.taps
        c = np.cos(np.outer(omega / self.sample_rate, k))
        return h[self.half] + 2.0 * c @ h[self.half + 1:]

    def attenuation_db(self, omega) -> np.ndarray:
        return -20.0 * np.log10(np.abs(self.response(omega)) + 1e-300)

    def passband_ripple_db(self, points: int = 257) -> float:
        w = np.linspace(0.0, self.cutoff / 2.0, points)
        return float(np.max(np.abs(20.0 * np.log10(np.abs(self.response(w))))))

    def stopband_attenuation_db(self) -> float:
        """Minimum attenuation over ``[2 w0, Nyquist]`` (dense FFT grid plus ``2 w0`` itself)."""
        nfft = 1 << int(math.ceil(math.log2(16 * self.taps.size)))
        mag = np.abs(np.fft.rfft(self.taps, nfft))
        w = np.arange(mag.size) * TWO_PI * self.sample_rate / nfft
        band = mag[w >= 2.0 * self.omega0]
        worst = max(float(band.max()) if band.size else 0.0, float(abs(self.response(2.0 * self.omega0)[0])))
        return -20.0 * math.log10(worst + 1e-300)

    def noise_gain(self) -> float:
        """Output/input variance ratio for white noise, ``sum h^2``."""
        return float(self.taps @ self.taps)


def _blackman_sinc(n_taps: int, fc: float) -> np.ndarray:
    n = np.arange(n_taps) - (n_taps - 1) / 2.0
    h = 2.0 * fc * np.sinc(2.0 * fc * n) * np.blackman(n_taps)
    return h / h.sum()


@lru_cache(maxsize=32)
def design_lowpass(cutoff: float, omega0: float, sample_rate: float) -> FirLowPass:
    """Shortest odd-length Blackman windowed sinc meeting the passband and stopband targets.

    Targets: ripple <= 0.1 dB below ``cutoff/2`` and >= 60 dB attenuation from ``2 w0`` up.
    """
    if not 0.0 < cutoff < omega0:
        raise ConfigError(f"cutoff must be in (0, omega0) = (0, {omega0:.6g}), got {cutoff!r}")
    if 2.0 * omega0 >= math.pi * sample_rate:
        raise ConfigError("2 w0 is above the Nyquist frequency")
    fc = cutoff / (TWO_PI * sample_rate)
    n = int(math.ceil(2.0 / fc)) | 1
    while n < (1 << 20):
        filt = FirLowPass(_blackman_sinc(n, fc), cutoff, omega0, sample_rate)
        if (filt.passband_ripple_db() <= PASSBAND_RIPPLE_DB
                and filt.stopband_attenuation_db() >= STOPBAND_DB):
            filt.taps.setflags(write=False)
            return filt
        n = int(n * 1.1) | 1
    raise ConfigError("no filter length meets the response targets")


def default_cutoff(omega0: float) -> float:
    return omega0 / 2.0


def low_pass(detected: SignalTrace, cutoff: float, omega0: float) -> SignalTrace:
    """Apply the designed FIR; ``half`` samples at each end are marked invalid."""
    filt = design_lowpass(float(cutoff), float(omega0), float(detected.sample_rate))
    if len(detected) < filt.taps.size:
        raise ContractError(
            f"trace of {len(detected)} samples is shorter than the {filt.taps.size}-tap filter"
        )
    x = detected.samples
    if x.size * filt.taps.size <= 5e7:
        y = np.convolve(x, filt.taps, mode="same")
    else:
        y = oaconvolve(x, filt.taps, mode="same")
    start = max(detected.valid_start, 0) + filt.half
    stop = min(detected.valid_stop, x.size) - filt.half
    return SignalTrace(y, detected.sample_rate, start, max(start, stop))


def threshold_sign(baseband: SignalTrace, at: int, gain: float = DETECTOR_GAIN) -> int:
    """Sign of ``baseband[at]`` after removing the pedestal ``gain``; a tie reads +1."""
    if not baseband.is_valid_index(at):
        raise TransientRegionError(
            f"index {at} is outside the valid region [{baseband.valid_start}, {baseband.valid_stop})"
        )
    return 1 if baseband.samples[at] - gain >= 0.0 else -1


def sawtooth_correlation(delta: float) -> float:
    """Closed form ``1 - 2|delta|/pi`` for ``delta`` wrapped into ``[-pi, pi]``."""
    d = abs((delta + math.pi) % TWO_PI - math.pi)
    return 1.0 - 2.0 * d / math.pi


# --- cells --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class HvChannel:
    alpha: float
    trace: SignalTrace
    outcome: int
    at: int
    stages: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "alpha", float(self.alpha) % TWO_PI)
        if self.outcome not in (-1, 1):
            raise ContractError("outcome must be -1 or +1")


def run_chain(
    cfg: CarrierConfig,
    phase: StochasticPhase,
    alpha: float,
    *,
    gain: float = DETECTOR_GAIN,
    cutoff: Optional[float] = None,
) -> dict[str, SignalTrace]:
    """All stage outputs of one cell, keyed by stage name."""
    cutoff = default_cutoff(cfg.omega0) if cutoff is None else cutoff
    x = modulate(cfg, phase)
    shifted = phase_shift(cfg, phase, alpha)
    mixed = homodyne_mix(shifted, cfg)
    detected = square_law_detect(mixed, gain)
    baseband = low_pass(detected, cutoff, cfg.omega0)
    return {"modulated": x, "shifted": shifted, "mixed": mixed, "detected": detected, "baseband": baseband}


def default_readout(trace: SignalTrace) -> int:
    return trace.valid_start + (trace.valid_stop - trace.valid_start) // 2


def build_cells(
    n_cells: int,
    alphas: Sequence[float],
    cfg: CarrierConfig,
    correlation_time: float,
    seed: SeedLike,
    *,
    frozen: bool = False,
    gain: float = DETECTOR_GAIN,
    cutoff: Optional[float] = None,
    at: Optional[int] = None,
    keep_stages: bool = False,
) -> list[HvChannel]:
    """Run ``n_cells`` full chains on one shared phase realization."""
    if len(alphas) == 0:
        raise ContractError("alphas must not be empty")
    if len(alphas) != n_cells:
        raise ContractError(f"expected {n_cells} phase shifts, got {len(alphas)}")
    phase = gen_phase(cfg, correlation_time, seed, frozen=frozen)
    cells = []
    for alpha in alphas:
        stages = run_chain(cfg, phase, alpha, gain=gain, cutoff=cutoff)
        base = stages["baseband"]
        idx = default_readout(base) if at is None else at
        cells.append(HvChannel(alpha, base, threshold_sign(base, idx, gain), idx,
                               stages if keep_stages else {}))
    return cells


# --- batched frozen-phase trials -----------------------------------------

@dataclass(frozen=True, eq=False)
class TrialGeometry:
    """Carrier grid and filter for one frozen-phase trial, read out at sample ``at``."""

    cfg: CarrierConfig
    filt: FirLowPass
    gain: float
    at: int
    carrier_cos: np.ndarray
    carrier_sin: np.ndarray

    @property
    def quadrature(self) -> np.ndarray:
        return np.vstack([self.carrier_cos, -self.carrier_sin])


@lru_cache(maxsize=16)
def trial_geometry(
    omega0: float = DEFAULT_OMEGA0,
    sample_rate: float = DEFAULT_SAMPLE_RATE,
    cutoff: Optional[float] = None,
    gain: float = DETECTOR_GAIN,
    periods_after: int = 3,
) -> TrialGeometry:
    """Shortest trace covering the filter support plus a few carrier periods."""
    cutoff = default_cutoff(omega0) if cutoff is None else cutoff
    filt = design_lowpass(float(cutoff), float(omega0), float(sample_rate))
    per_period = int(math.ceil(sample_rate * TWO_PI / omega0))
    n = filt.taps.size + periods_after * per_period
    cfg = CarrierConfig(omega0, sample_rate, n / sample_rate).with_samples(n)
    at = filt.half + (n - 2 * filt.half) // 2
    t = (at - filt.half + np.arange(filt.taps.size)) / sample_rate
    c, s = np.cos(omega0 * t), np.sin(omega0 * t)
    c.setflags(write=False)
    s.setflags(write=False)
    return TrialGeometry(cfg, filt, float(gain), at, c, s)


def frozen_baseband(
    theta: np.ndarray,
    geom: TrialGeometry,
    *,
    amplitude: float = 1.0,
    noise: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Filtered baseband at the read-out sample for each total phase ``theta = phi + alpha``.

    ``noise`` (shape ``(len(theta), n_taps)``) is added to the phase-shifted
    signal before mixing.
    """
    theta = np.asarray(theta, dtype=float)
    # cos(w0 t + theta) = cos(theta) cos(w0 t) - sin(theta) sin(w0 t), as one matrix product
    x = np.column_stack([amplitude * np.cos(theta), amplitude * np.sin(theta)]) @ geom.quadrature
    if noise is not None:
        x += noise
    x += geom.carrier_cos
    np.square(x, out=x)
    x *= geom.gain
    return x @ geom.filt.taps


def frozen_outcomes(theta: np.ndarray, geom: TrialGeometry) -> np.ndarray:
    base = frozen_baseband(theta, geom)
    return np.where(base - geom.gain >= 0.0, 1, -1)


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    trials: int

    def __float__(self) -> float:
        return self.value


def _map_chunks(fn, n_chunks: int, workers: int):
    if workers <= 1 or n_chunks <= 1:
        return [fn(i) for i in range(n_chunks)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(n_chunks)))


def hv_pair_agreements(
    alpha_a: float,
    alpha_b: float,
    trials: int,
    seed: int,
    *,
    geom: Optional[TrialGeometry] = None,
    shared: bool = True,
    workers: int = 1,
) -> int:
    """Number of frozen-phase trials in which two cells give the same sign."""
    if trials < 1:
        raise ContractError("trials must be >= 1")
    geom = trial_geometry() if geom is None else geom
    sizes = chunk_sizes(trials, CHUNK_TRIALS)

    def chunk(i: int) -> int:
        rng = np.random.default_rng(child_seed(seed, i))
        phi_a = rng.uniform(0.0, TWO_PI, sizes[i])
        phi_b = phi_a if shared else rng.uniform(0.0, TWO_PI, sizes[i])
        sa = frozen_outcomes(phi_a + alpha_a, geom)
        sb = frozen_outcomes(phi_b + alpha_b, geom)
        return int(np.count_nonzero(sa == sb))

    return sum(_map_chunks(chunk, len(sizes), workers))


def hv_pair_correlation(
    alpha_a: float,
    alpha_b: float,
    trials: int,
    cfg: Optional[CarrierConfig] = None,
    correlation_time: float = DEFAULT_CORRELATION_TIME,
    seed: int = 0,
    *,
    gain: float = DETECTOR_GAIN,
    cutoff: Optional[float] = None,
    shared: bool = True,
    workers: int = 1,
) -> Estimate:
    """Monte Carlo ``<s_a s_b>`` for cells with shifts ``alpha_a``, ``alpha_b``."""
    cfg = CarrierConfig() if cfg is None else cfg
    check_slowness(cfg.omega0, correlation_time)
    geom = trial_geometry(cfg.omega0, cfg.sample_rate, cutoff, gain)
    same = hv_pair_agreements(alpha_a, alpha_b, trials, seed, geom=geom, shared=shared, workers=workers)
    e, se = correlation_from_agreements(same, trials)
    return Estimate(e, se, trials)


def hv_correlation(
    delta: float,
    trials: int,
    cfg: Optional[CarrierConfig] = None,
    correlation_time: float = DEFAULT_CORRELATION_TIME,
    seed: int = 0,
    **kwargs,
) -> Estimate:
    """Sign correlation of two shared-phase cells whose shifts differ by ``delta`` in [0, pi]."""
    if not 0.0 <= delta <= math.pi:
        raise ContractError(f"delta must be in [0, pi], got {delta!r}")
    return hv_pair_correlation(0.0, delta, trials, cfg, correlation_time, seed, **kwargs)


# --- phase-offset recovery under noise ----------------------------------

def phase_offset_trials(
    alpha_star: float,
    amplitude: float,
    noise_std: float,
    trials: int,
    seed: int,
    *,
    geom: Optional[TrialGeometry] = None,
    shared: bool = True,
    workers: int = 1,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Frozen-phase trials of a weak signal cell next to two reference cells.

    The signal cell carries amplitude ``amplitude`` and offset ``alpha_star``;
    white noise of standard deviation ``noise_std`` is added to its trace
    before mixing. The reference cells (shifts 0 and pi/2, unit amplitude,
    noiseless) see the same phase when ``shared``, otherwise an independent one.

    Returns pedestal-free signal readings and the reference quadratures
    ``cos(phi)`` and ``-sin(phi)`` as estimated by the reference cells.
    """
    if trials < 1:
        raise ContractError("trials must be >= 1")
    geom = trial_geometry() if geom is None else geom
    g = geom.gain
    pedestal = g * (0.5 * amplitude ** 2 + 0.5 + noise_std ** 2)
    sizes = chunk_sizes(trials, CHUNK_TRIALS)
    n_taps = geom.filt.taps.size

    def chunk(i: int):
        rng = np.random.default_rng(child_seed(seed, i))
        phi = rng.uniform(0.0, TWO_PI, sizes[i])
        ref = phi if shared else rng.uniform(0.0, TWO_PI, sizes[i])
        noise = rng.normal(0.0, noise_std, (sizes[i], n_taps)) if noise_std > 0 else None
        s = frozen_baseband(phi + alpha_star, geom, amplitude=amplitude, noise=noise) - pedestal
        c = (frozen_baseband(ref, geom) - g) / g
        q = (frozen_baseband(ref + math.pi / 2.0, geom) - g) / g
        return s, c, q

    parts = _map_chunks(chunk, len(sizes), workers)
    return tuple(np.concatenate([p[k] for p in parts]) for k in range(3))


def estimate_phase_offset(s: np.ndarray, c: np.ndarray, q: np.ndarray) -> tuple[float, float]:
    """Least-squares fit ``s = a c + b q``; returns ``(atan2(b, a), hypot(a, b))``.

    Each trial contributes one equation in the two quadratures, so at least
    two trials are needed.
    """
    if s.size < 2:
        raise ContractError("phase-offset estimation needs at least two trials")
    design = np.column_stack([c, q])
    (a, b), *_ = np.linalg.lstsq(design, s, rcond=None)
    return math.atan2(b, a), math.hypot(a, b)


def wrap_angle(x):
    """Wrap into ``[-pi, pi)``."""
    return (np.asarray(x) + math.pi) % TWO_PI - math.pi
