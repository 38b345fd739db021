"""Closed-form pulse schedules for drive and detuning controls.

Schedules are evaluated analytically at arbitrary time, never from sampled
lookup tables, so adiabaticity-sensitive derivatives carry no interpolation
error. A control channel is either a single schedule or a sequence of
schedules whose values add.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "PulseSchedule",
    "make_ramp",
    "make_rx_detuning",
    "make_rz_drive",
    "schedule_value",
    "schedule_max_abs",
]

_KINDS = ("constant", "ramp_cosine", "sine_squared", "sine_lobe")


@dataclass(frozen=True)
class PulseSchedule:
    """One scalar control segment.

    kind:
      constant      amplitude everywhere (duration ignored)
      ramp_cosine   amplitude/2 * (1 - cos(pi (t-t0)/T)) on [t0, t0+T],
                    clamped to amplitude for t > t0+T, zero before t0;
                    value and first derivative are continuous at both ends
      sine_squared  amplitude * sin^2(pi (t-t0)/T) on [t0, t0+T], zero outside
      sine_lobe     amplitude * sin(pi (t-t0)/T) on [t0, t0+T], zero outside

    Times are in units of 1/K, amplitudes in units of K.
    """

    kind: str
    amplitude: float
    duration: float = 0.0
    start_time: float = 0.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown pulse kind {self.kind!r}, expected one of {_KINDS}")
        if self.kind != "constant" and not self.duration > 0.0:
            raise ValueError(f"{self.kind} pulse needs duration > 0, got {self.duration}")

    @property
    def end_time(self) -> float:
        return self.start_time + self.duration

    def value(self, t: float) -> float:
        if self.kind == "constant":
            return self.amplitude
        s = t - self.start_time
        if self.kind == "ramp_cosine":
            if s <= 0.0:
                return 0.0
            if s >= self.duration:
                return self.amplitude
            return 0.5 * self.amplitude * (1.0 - np.cos(np.pi * s / self.duration))
        if s <= 0.0 or s >= self.duration:
            return 0.0
        if self.kind == "sine_squared":
            return self.amplitude * np.sin(np.pi * s / self.duration) ** 2
        return self.amplitude * np.sin(np.pi * s / self.duration)

    def values(self, ts) -> np.ndarray:
        return np.array([self.value(t) for t in np.asarray(ts, dtype=float).ravel()])


ScheduleLike = PulseSchedule | Sequence[PulseSchedule] | None


def _as_pulses(schedule: ScheduleLike) -> tuple[PulseSchedule, ...]:
    if schedule is None:
        return ()
    if isinstance(schedule, PulseSchedule):
        return (schedule,)
    return tuple(schedule)


def schedule_value(schedule: ScheduleLike, t: float) -> float:
    """Summed value of a control channel at time t."""
    return sum(p.value(t) for p in _as_pulses(schedule))


def schedule_max_abs(schedule: ScheduleLike) -> float:
    """Upper bound on |value| over all times; every kind is bounded by its
    amplitude, so overlapping segments just add their amplitudes."""
    return sum(abs(p.amplitude) for p in _as_pulses(schedule))


def make_ramp(omega0: float, t_ramp: float, start: float = 0.0) -> PulseSchedule:
    """Drive turn-on Omega(t) = omega0/2 [1 - cos(pi t / t_ramp)].

    Reaches omega0 at t_ramp and stays there; both the value and d/dt are
    continuous at the end points, suppressing nonadiabatic transitions.
    """
    if not t_ramp > 0.0:
        raise ValueError(f"t_ramp must be positive, got {t_ramp}")
    return PulseSchedule("ramp_cosine", omega0, t_ramp, start)


def make_rx_detuning(delta0: float, t_x: float, start: float = 0.0) -> PulseSchedule:
    """Detuning pulse Delta(t) = delta0 sin^2(pi t / T_x) on [start, start+T_x]."""
    if not t_x > 0.0:
        raise ValueError(f"t_x must be positive, got {t_x}")
    return PulseSchedule("sine_squared", delta0, t_x, start)


def make_rz_drive(theta: float, t_z: float, p: float, start: float = 0.0) -> PulseSchedule:
    """Drive lobe Omega(t) = pi theta / (8 T_z sqrt(p)) sin(pi (t-start)/T_z).

    Its time integral is theta / (4 sqrt(p)), which rotates the qubit phase by
    theta through the +-2 Omega alpha energy shift of the two wells.
    """
    if not t_z > 0.0:
        raise ValueError(f"t_z must be positive, got {t_z}")
    if not p > 0.0:
        raise ValueError(f"pump amplitude must be positive for a phase gate, got {p}")
    amp = np.pi * theta / (8.0 * t_z * np.sqrt(p))
    return PulseSchedule("sine_lobe", amp, t_z, start)
