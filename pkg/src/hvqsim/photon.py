"""Channel-by-channel simulation of the correlated-photon scheme.

Each row of the scheme is

    source -> P' -> |0> -> P'' -> U -> |psi> -> P''' -> (reflections) -> D

``P'`` is folded into :func:`initialize_channel`. Polarizers are Malus-law
projective filters: a photon in state ``|psi>`` passes a polarizer with axis
``a`` with probability ``|<a|psi>|^2`` where ``|a> = cos a |0> + sin a |1>``,
and leaves in ``|a>``. Reflection loss attenuates the amplitude by
``coefficient**count`` and so the detection probability by its square; it does
not bias the outcome. The detector reads the arriving photon in the
computational basis.

Channels are independent here; correlations between channels live in the
singlet oracle (:mod:`hvqsim.qubit`) or the shared phase (:mod:`hvqsim.hvsignal`).
"""
from __future__ import annotations

import math
from functools import cached_property
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ContractError
from .qubit import (
    IDENTITY,
    ZERO,
    QubitState,
    SingleQubitUnitary,
    apply_unitary,
)
from .rng import SeedLike, as_generator, child_seed


@dataclass(frozen=True)
class Polarizer:
    axis: float

    def __post_init__(self):
        if not math.isfinite(self.axis):
            raise ContractError("polarizer axis must be finite")
        object.__setattr__(self, "axis", float(self.axis) % math.pi)

    @cached_property
    def state(self) -> QubitState:
        return QubitState(math.cos(self.axis), math.sin(self.axis))


@dataclass(frozen=True)
class ReflectionLoss:
    coefficient: float = 1.0
    count: int = 0

    def __post_init__(self):
        if not 0.0 < self.coefficient <= 1.0:
            raise ContractError(f"reflection coefficient must be in (0, 1], got {self.coefficient!r}")
        if int(self.count) != self.count or self.count < 0:
            raise ContractError(f"reflection count must be a non-negative integer, got {self.count!r}")
        object.__setattr__(self, "count", int(self.count))

    @property
    def amplitude_factor(self) -> float:
        return self.coefficient ** self.count


NO_LOSS = ReflectionLoss()


@dataclass(frozen=True)
class ChannelConfig:
    rotation: SingleQubitUnitary = IDENTITY
    prep_polarizer: Polarizer = field(default_factory=lambda: Polarizer(0.0))
    analysis_polarizer: Polarizer = field(default_factory=lambda: Polarizer(0.0))
    loss: ReflectionLoss = NO_LOSS

    def __post_init__(self):
        if not self.rotation.is_unitary():
            raise ContractError("channel rotation is not unitary")


@dataclass(frozen=True)
class DetectorRecord:
    clicked: bool
    outcome: Optional[int]
    click_probability: float

    def __post_init__(self):
        if not self.clicked and self.outcome is not None:
            raise ContractError("an outcome is only defined when the detector clicked")


def initialize_channel(seed: SeedLike = None) -> QubitState:
    """Initialization polarizer: every photon leaves in ``|0>``.

    The stage is deterministic; ``seed`` is accepted for a uniform stage signature.
    """
    return ZERO


def pass_probability(state: QubitState, p: Polarizer) -> float:
    ax = p.state
    overlap = ax.a0 * state.a0 + ax.a1 * state.a1  # axis amplitudes are real
    return min(1.0, abs(overlap) ** 2)


def _polarize(state: QubitState, p: Polarizer, rng: np.random.Generator):
    prob = pass_probability(state, p)
    passed = bool(rng.random() < prob)
    return passed, (p.state if passed else None), prob


def apply_polarizer(state: QubitState, p: Polarizer, seed: SeedLike):
    """Malus-law filter. Returns ``(passed, state_after)``; ``state_after`` is None when blocked."""
    passed, after, _ = _polarize(state, p, as_generator(seed))
    return passed, after


def apply_loss(click_probability: float, loss: ReflectionLoss) -> float:
    if not 0.0 <= click_probability <= 1.0:
        raise ContractError(f"click probability must be in [0, 1], got {click_probability!r}")
    return click_probability * loss.amplitude_factor ** 2


def click_probability(cfg: ChannelConfig) -> float:
    """Product of the stage pass probabilities times the loss factor."""
    s = initialize_channel()
    p_prep = pass_probability(s, cfg.prep_polarizer)
    if p_prep == 0.0:
        return 0.0
    s = apply_unitary(cfg.prep_polarizer.state, cfg.rotation)
    p_an = pass_probability(s, cfg.analysis_polarizer)
    return apply_loss(p_prep * p_an, cfg.loss)


def detector_state(cfg: ChannelConfig) -> QubitState:
    """State of a photon that reaches the detector."""
    return cfg.analysis_polarizer.state


def _rotate(state: QubitState, u: SingleQubitUnitary) -> QubitState:
    # u was checked for unitarity when the ChannelConfig was built
    return QubitState(u.m00 * state.a0 + u.m01 * state.a1, u.m10 * state.a0 + u.m11 * state.a1)


def _run_channel(cfg: ChannelConfig, rng: np.random.Generator, prob: float) -> DetectorRecord:
    state = initialize_channel()
    passed, state, _ = _polarize(state, cfg.prep_polarizer, rng)
    if passed:
        state = _rotate(state, cfg.rotation)
        passed, state, _ = _polarize(state, cfg.analysis_polarizer, rng)
    if passed:
        passed = bool(rng.random() < cfg.loss.amplitude_factor ** 2)
    if not passed:
        return DetectorRecord(False, None, prob)
    outcome = int(rng.random() < state.p1)
    return DetectorRecord(True, outcome, prob)


def run_channel(cfg: ChannelConfig, seed: SeedLike) -> DetectorRecord:
    """Run one photon through the channel in scheme order."""
    return _run_channel(cfg, as_generator(seed), click_probability(cfg))


def run_register(cfgs: Sequence[ChannelConfig], shared_seed: int) -> list[DetectorRecord]:
    """One photon per channel; channel ``i`` uses child stream ``i`` of ``shared_seed``."""
    if len(cfgs) == 0:
        raise ContractError("run_register needs at least one channel")
    return [run_channel(cfg, child_seed(shared_seed, i)) for i, cfg in enumerate(cfgs)]


def channel_statistics(cfg: ChannelConfig, trials: int, seed: SeedLike) -> dict:
    """Repeated :func:`run_channel` with one generator: click count and outcome counts."""
    rng = as_generator(seed)
    prob = click_probability(cfg)
    clicks = 0
    ones = 0
    for _ in range(trials):
        rec = _run_channel(cfg, rng, prob)
        if rec.clicked:
            clicks += 1
            ones += rec.outcome
    return {
        "trials": trials,
        "clicks": clicks,
        "outcome_counts": (clicks - ones, ones),
        "click_probability": prob,
    }
