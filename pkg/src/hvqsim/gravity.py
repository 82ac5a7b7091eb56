"""Random weak gravity background as a source of hidden variables.

The relative separation ``ell`` of two nearby free particles obeys the
reduced deviation equation

    ell'' + c^2 R ell = 0,        omega = c sqrt(R),

with ``R`` the single Riemann component driving the oscillation. Proper time
is identified with coordinate time. Each background mode also carries a
wavevector and a field amplitude; the mode field ``ell0 exp(k.x + i omega t)``
is evaluated exactly as that expression reads (a real spatial exponent).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import ContractError, DegenerateStateError, StepSizeError, UnstableModeError
from .rng import SeedLike, as_generator

SPEED_OF_LIGHT = 299_792_458.0
HBAR = 1.054_571_817e-34
MIN_STEPS_PER_PERIOD = 100


@dataclass(frozen=True)
class GravityMode:
    riemann_component: float
    wavevector: tuple = (0.0, 0.0, 0.0)
    amplitude: float = 1.0

    def __post_init__(self):
        k = tuple(float(x) for x in self.wavevector)
        if len(k) != 3 or not all(math.isfinite(x) for x in k):
            raise ContractError("wavevector must be three finite reals")
        if not math.isfinite(self.riemann_component) or not math.isfinite(self.amplitude):
            raise ContractError("mode parameters must be finite")
        object.__setattr__(self, "wavevector", k)

    @property
    def oscillatory(self) -> bool:
        return self.riemann_component >= 0.0


@dataclass(frozen=True)
class DeviationState:
    ell: float
    ell_dot: float = 0.0
    time: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.ell, self.ell_dot, self.time)):
            raise ContractError("deviation state must be finite")


@dataclass(frozen=True)
class BackgroundEnsemble:
    modes: tuple
    seed: object = None
    dropped: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        object.__setattr__(self, "dropped", tuple(self.dropped))

    def __len__(self) -> int:
        return len(self.modes)

    def directions(self) -> np.ndarray:
        k = np.array([m.wavevector for m in self.modes], dtype=float).reshape(-1, 3)
        return k / np.linalg.norm(k, axis=1, keepdims=True)


@dataclass(frozen=True)
class HeisenbergFilter:
    """Threshold ``hbar`` plus the probe's own uncertainties ``delta_x``, ``delta_p``."""

    hbar: float = HBAR
    delta_x: float = 1.0
    delta_p: float = HBAR

    def __post_init__(self):
        if not (self.hbar > 0 and self.delta_x > 0 and self.delta_p > 0):
            raise ContractError("hbar, delta_x and delta_p must all be positive")


def mode_frequency(mode: GravityMode, c: float = SPEED_OF_LIGHT) -> float:
    if mode.riemann_component < 0:
        raise UnstableModeError(
            f"negative Riemann component {mode.riemann_component!r} gives exponential growth"
        )
    return c * math.sqrt(mode.riemann_component)


@dataclass(frozen=True, eq=False)
class Trajectory:
    time: np.ndarray
    ell: np.ndarray
    ell_dot: np.ndarray
    omega: float

    def __len__(self) -> int:
        return self.time.size

    def state(self, i: int) -> DeviationState:
        return DeviationState(float(self.ell[i]), float(self.ell_dot[i]), float(self.time[i]))

    def states(self):
        return (self.state(i) for i in range(len(self)))

    def energy(self) -> np.ndarray:
        """Per-unit-mass oscillator energy ``ell_dot^2/2 + omega^2 ell^2/2``."""
        return 0.5 * self.ell_dot ** 2 + 0.5 * self.omega ** 2 * self.ell ** 2

    def energy_drift(self) -> float:
        """Relative energy change between the first and last state."""
        e = self.energy()
        return float(abs(e[-1] - e[0]) / e[0])


def integrate_deviation(
    mode: GravityMode,
    init: DeviationState,
    c: float = SPEED_OF_LIGHT,
    t_end: float = 1.0,
    dt: float = 1e-3,
    *,
    probe_mass: float = 1.0,
) -> Trajectory:
    """Velocity-Verlet integration of the reduced deviation equation from ``init.time``.

    The tidal force on a probe of mass ``probe_mass`` is ``-m c^2 R ell``; the
    mass divides out of the acceleration.
    """
    omega = mode_frequency(mode, c)
    if not t_end > 0 or not dt > 0:
        raise ContractError("t_end and dt must be positive")
    if omega > 0 and dt > (2.0 * math.pi / omega) / MIN_STEPS_PER_PERIOD:
        raise StepSizeError(
            f"dt={dt!r} exceeds period/{MIN_STEPS_PER_PERIOD} = {2 * math.pi / omega / MIN_STEPS_PER_PERIOD!r}"
        )
    if not probe_mass > 0:
        raise ContractError("probe_mass must be positive")
    n = int(math.floor(t_end / dt + 1e-9))
    stiffness = probe_mass * c * c * mode.riemann_component
    ell = np.empty(n + 1)
    vel = np.empty(n + 1)
    ell[0], vel[0] = init.ell, init.ell_dot
    x, v = init.ell, init.ell_dot
    a = -stiffness * x / probe_mass
    half = 0.5 * dt
    for i in range(1, n + 1):
        v += half * a
        x += dt * v
        a = -stiffness * x / probe_mass
        v += half * a
        ell[i] = x
        vel[i] = v
    time = init.time + dt * np.arange(n + 1)
    return Trajectory(time, ell, vel, omega)


def harmonic_solution(omega: float, init: DeviationState, t: np.ndarray) -> np.ndarray:
    """``ell0 cos(w s) + (ell_dot0 / w) sin(w s)``, ``s = t - t0``; linear drift for ``w = 0``."""
    s = np.asarray(t, dtype=float) - init.time
    if omega == 0:
        return init.ell + init.ell_dot * s
    return init.ell * np.cos(omega * s) + (init.ell_dot / omega) * np.sin(omega * s)


def analytic_solution(mode: GravityMode, position, t: float, c: float = SPEED_OF_LIGHT) -> complex:
    """``ell0 exp(k.x + i omega t)``."""
    omega = mode_frequency(mode, c)
    kx = float(np.dot(mode.wavevector, np.asarray(position, dtype=float)))
    return mode.amplitude * math.exp(kx) * complex(math.cos(omega * t), math.sin(omega * t))


def sample_ensemble(
    n_modes: int,
    r_scale: float,
    seed: SeedLike,
    *,
    k_magnitude: float = 1.0,
    amplitude: float = 1.0,
) -> BackgroundEnsemble:
    """Isotropic ensemble: uniform directions on the sphere, half-normal Riemann components."""
    if n_modes < 1:
        raise ContractError("n_modes must be >= 1")
    if not r_scale >= 0:
        raise ContractError("r_scale must be non-negative")
    rng = as_generator(seed)
    g = rng.standard_normal((n_modes, 3))
    dirs = g / np.linalg.norm(g, axis=1, keepdims=True)
    r = np.abs(rng.standard_normal(n_modes)) * r_scale
    modes = [GravityMode(float(ri), tuple(k_magnitude * d), amplitude) for ri, d in zip(r, dirs)]
    return BackgroundEnsemble(modes, seed if isinstance(seed, (int, type(None))) else repr(seed))


def rayleigh_test(directions: np.ndarray) -> float:
    """p-value of the Rayleigh uniformity test on the 2-sphere (``3 n |mean|^2 ~ chi2(3)``)."""
    d = np.asarray(directions, dtype=float)
    stat = 3.0 * d.shape[0] * float(np.sum(d.mean(axis=0) ** 2))
    return float(stats.chi2.sf(stat, 3))


def mode_action(mode: GravityMode, probe_mass: float, c: float = SPEED_OF_LIGHT) -> float:
    """``m omega ell0^2``: the displacement-momentum product a mode imprints on the probe."""
    return probe_mass * mode_frequency(mode, c) * mode.amplitude ** 2


def filter_weak(
    ensemble: BackgroundEnsemble,
    filt: HeisenbergFilter,
    probe_mass: float,
    c: float = SPEED_OF_LIGHT,
) -> BackgroundEnsemble:
    """Keep modes with ``m omega ell0^2 <= hbar``; the rest go to ``dropped``."""
    kept, dropped = [], list(ensemble.dropped)
    for m in ensemble.modes:
        (kept if mode_action(m, probe_mass, c) <= filt.hbar else dropped).append(m)
    return BackgroundEnsemble(kept, ensemble.seed, dropped)


def field_at(ensemble: BackgroundEnsemble, grid, t: float, c: float = SPEED_OF_LIGHT) -> np.ndarray:
    """Coherent sum of the mode fields at each grid point."""
    x = np.asarray(grid, dtype=float).reshape(-1, 3)
    total = np.zeros(x.shape[0], dtype=complex)
    for m in ensemble.modes:
        omega = mode_frequency(m, c)
        total += m.amplitude * np.exp(x @ np.asarray(m.wavevector)) * np.exp(1j * omega * t)
    return total


def position_probability(ensemble: BackgroundEnsemble, grid, t: float, c: float = SPEED_OF_LIGHT) -> np.ndarray:
    """``|sum of mode fields|^2`` normalized over the grid."""
    x = np.asarray(grid, dtype=float).reshape(-1, 3)
    if x.shape[0] == 0:
        raise ContractError("grid must not be empty")
    w = np.abs(field_at(ensemble, x, t, c)) ** 2
    total = w.sum()
    if not total > 0:
        raise DegenerateStateError("mode field vanishes on the whole grid")
    p = w / total
    return p / p.sum()
