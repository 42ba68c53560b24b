"""Piecewise-constant drive programs: spin torque b_J(t) and field H_ext(t)."""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Segment:
    start: float  # s
    b_J: float  # m/s
    H_ext: float  # Oe


@dataclass(frozen=True)
class DriveProgram:
    """Drive held constant between breakpoints, right-continuous.

    ``segments`` must start at t=0 and be strictly increasing in start
    time. Each breakpoint is a step boundary for the integrators, which
    sample the drive at step midpoints.
    """

    segments: tuple[Segment, ...]
    duration: float

    def __post_init__(self):
        if not self.segments:
            raise ValueError("drive needs at least one segment")
        if self.segments[0].start != 0.0:
            raise ValueError("first segment must start at t=0")
        starts = [s.start for s in self.segments]
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError("segment start times must increase strictly")
        if not (self.duration > 0 and math.isfinite(self.duration)):
            raise ValueError(f"duration must be positive, got {self.duration}")
        for s in self.segments:
            if not (math.isfinite(s.b_J) and math.isfinite(s.H_ext)):
                raise ValueError("drive values must be finite")
        object.__setattr__(self, "_starts", starts)

    @classmethod
    def constant(cls, duration: float, b_J: float = 0.0, H_ext: float = 0.0) -> DriveProgram:
        return cls((Segment(0.0, b_J, H_ext),), duration)

    @classmethod
    def pulse(cls, duration: float, t_off: float, b_J: float = 0.0, H_ext: float = 0.0) -> DriveProgram:
        """Rectangular pulse on [0, t_off), zero drive afterwards."""
        if not 0 < t_off < duration:
            raise ValueError("pulse must switch off inside the run")
        return cls((Segment(0.0, b_J, H_ext), Segment(t_off, 0.0, 0.0)), duration)

    def at(self, t: float) -> tuple[float, float]:
        """(b_J, H_ext) in force at time t."""
        i = bisect.bisect_right(self._starts, t) - 1
        s = self.segments[max(i, 0)]
        return s.b_J, s.H_ext

    @property
    def breakpoints(self) -> list[float]:
        return self._starts[1:]

    def is_constant_after(self, t: float) -> bool:
        return all(b <= t for b in self.breakpoints)

    def scaled(self, b_scale: float = 1.0, H_scale: float = 1.0) -> DriveProgram:
        segs = tuple(Segment(s.start, s.b_J * b_scale, s.H_ext * H_scale) for s in self.segments)
        return DriveProgram(segs, self.duration)


def step_grid(duration: float, dt: float, breakpoints=()) -> list[tuple[float, float]]:
    """Split [0, duration] into (t, h) steps of nominal size dt that land on breakpoints."""
    edges = sorted({0.0, duration, *[b for b in breakpoints if 0 < b < duration]})
    steps = []
    for a, b in zip(edges, edges[1:]):
        n = max(1, math.ceil((b - a) / dt - 1e-9))
        h = (b - a) / n
        steps.extend((a + k * h, h) for k in range(n))
    return steps
