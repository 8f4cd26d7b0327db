"""
Smooth transition profiles.

The step s(t) = sigma(t) / (sigma(t) + sigma(1 - t)), sigma(t) = exp(-1/t),
is 0 for t <= 0, 1 for t >= 1 and C-infinity in between. Cutoffs and bumps
are affine compositions of it, evaluated through truncated series so that
their derivatives come out exactly.
"""

from dataclasses import dataclass, field

import numpy as np

from uclab.errors import LabError
from uclab.utils.jets import JET_ORDER, RadialSeries

# beyond this exponent the profile equals 0 or 1 to double precision
_FLAT_EXPONENT = 700.0


def smooth_step_series(t: RadialSeries) -> RadialSeries:
    """Series of s(t) at every base point of t."""
    t0 = t.value.real
    with np.errstate(divide='ignore', invalid='ignore', over='ignore'):
        exponent = 1.0 / t0 - 1.0 / (1.0 - t0)
    interior = (t0 > 0) & (t0 < 1) & (np.abs(exponent) < _FLAT_EXPONENT)
    high = (t0 >= 1) | ((t0 > 0) & (t0 < 1) & (exponent <= -_FLAT_EXPONENT))

    shift = np.where(interior, 0.0, 0.5 - t0)
    safe = t + shift
    # logistic of -(1/t - 1/(1 - t)), never forming exp of the exponent
    inner = (1.0 / (1.0 - safe) - 1.0 / safe).expit()

    flat = np.zeros_like(inner.coeffs)
    flat[0] = np.where(high, 1.0, 0.0)
    coeffs = np.where(interior, inner.coeffs, flat)
    return RadialSeries(coeffs, t.base_point, t.order)


def smooth_step(t):
    """Values of s(t) only."""
    t = np.asarray(t, dtype=float)
    return smooth_step_series(RadialSeries.variable(t, 0)).value.real


@dataclass(frozen=True)
class Cutoff:
    """Radial cutoff: equal to 1 on one side of [start, end], 0 on the other."""

    start: float
    end: float
    rising: bool = False
    scale: float = 1.0

    def __post_init__(self):
        if not self.end > self.start:
            raise LabError(f'degenerate cutoff window [{self.start}, {self.end}]')

    @property
    def width(self):
        return self.end - self.start

    def series(self, r, order: int = JET_ORDER) -> RadialSeries:
        var = RadialSeries.variable(r, order)
        if self.rising:
            t = (var - self.start) / self.width
        else:
            t = (self.end - var) / self.width
        return smooth_step_series(t)

    def __call__(self, r):
        return self.series(r, 0).value.real

    def jet(self, base, order: int = JET_ORDER):
        return self.series(base[0], order).lift(base, 'r', order)

    def derivative_bounds(self, max_order: int = 4, samples: int = 4001):
        """max |psi^(j)| over the transition window, j = 0..max_order."""
        r = np.linspace(self.start, self.end, samples)
        s = self.series(r, max_order)
        return [float(np.max(np.abs(s.derivative_value(j)))) for j in range(max_order + 1)]

    def scaled_bounds(self, max_order: int = 4, samples: int = 4001):
        """max |psi^(j)| scale^(3j/7); stays O(1) across scales when the width grows like scale^(3/7)."""
        bounds = self.derivative_bounds(max_order, samples)
        return [b * self.scale ** (3 * j / 7) for j, b in enumerate(bounds)]

    def to_dict(self):
        return {'start': self.start, 'end': self.end, 'rising': self.rising, 'scale': self.scale}


def build_bump(flat_below: float, zero_above: float, scale: float = 1.0) -> Cutoff:
    """psi = 1 below flat_below, 0 above zero_above."""
    if not zero_above > flat_below:
        raise LabError(f'degenerate window: flat_below={flat_below} >= zero_above={zero_above}')
    return Cutoff(flat_below, zero_above, rising=False, scale=scale)


def build_ramp(zero_below: float, flat_above: float, scale: float = 1.0) -> Cutoff:
    """psi = 0 below zero_below, 1 above flat_above."""
    if not flat_above > zero_below:
        raise LabError(f'degenerate window: zero_below={zero_below} >= flat_above={flat_above}')
    return Cutoff(zero_below, flat_above, rising=True, scale=scale)


@dataclass(frozen=True)
class Bump:
    """Compactly supported bump on [r0, r1], flat in the middle."""

    r0: float
    r1: float
    ramp_fraction: float = 0.25
    ramps: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0 < self.r0 < self.r1:
            raise LabError(f'bump support must satisfy 0 < r0 < r1, got [{self.r0}, {self.r1}]')
        w = self.ramp_fraction * (self.r1 - self.r0)
        object.__setattr__(self, 'ramps', (build_ramp(self.r0, self.r0 + w),
                                           build_bump(self.r1 - w, self.r1)))

    def series(self, r, order: int) -> RadialSeries:
        up, down = self.ramps
        return up.series(r, order) * down.series(r, order)

    def __call__(self, r):
        return self.series(r, 0).value.real
