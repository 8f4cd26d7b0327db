"""
Decaying solution of (d1^2 + b d2^2) Delta u + V u = 0 on chained annuli.

Each annulus [rho, rho + 7 h], h = rho^(3/7), turns r^-n e^{-in phi} into
a r^-(n+k) e^{-i(n+k) phi} in four radial steps. Every piece is a closed
form exp(L) with L a jet of log u; pieces are summed after factoring out
the dominant amplitude, so no amplitude is ever held in linear scale.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from uclab.errors import ConstructionError, RangeError
from uclab.operators import laplacian
from uclab.utils.jets import JET_ORDER, Jet4, LogJet, RadialSeries, jet_variable
from uclab.utils.profiles import Cutoff, build_bump, build_ramp, smooth_step_series
from uclab.utils.sampling import stream

logger = logging.getLogger(__name__)

MIN_RHO = 200.0
WIDTH_EXPONENT = 3 / 7
DEGREE_EXPONENT = 8 / 7
ANNULUS_WIDTH = 7.0
K_TOLERANCE = 6.0
TWO_PI = 2 * np.pi

# step boundaries and cutoff windows, in units of h past rho
STEP_EDGES = (0.0, 2.0, 3.0, 4.0, 7.0)
U1_FLAT, U1_ZERO = 13 / 7, 1.9
U2_ZERO, U2_FLAT = 0.1, 1 / 7
PHASE_FLAT, PHASE_ZERO = 15 / 7, 20 / 7
G3_FLAT, G3_ZERO = 22 / 7, 27 / 7
U4_FLAT, U4_ZERO = 6 + 6 / 7, 6.9
TARGET_ZERO, TARGET_FLAT = 4.1, 4 + 1 / 7
MATCH_POINT = 5.5
# log-depth below the circle maximum at which |u| counts as zero
ZERO_DEPTH = 12.0

# plateau half-width and transition length, in units of the period T
PLATEAU = 1 / 5
TRANSITION = 3 / 5

_PLATEAU_STREAM = 21
_STEP_STREAM = 22

FLAGS = {
    'degree_rule': 'n_j read as floor(rho_j^(8/7))',
    'k_bound': '|k_j - 8 rho_j^(4/7)| <= 6',
    'phase_sign': 'single convention exp(+iF) for the rearranged piece',
    'step1_region': 'rho <= r <= rho + 2 rho^(3/7)',
    'amplitude': 'a is an output of the builder',
    'zero_set': 'u has isolated zeros where both blended pieces are harmonic; V = 0 around them',
}


def annulus_width(rho):
    return rho ** WIDTH_EXPONENT


def log_b_step1(rho, n, k):
    """log b with b = (rho + h)^(-2k)."""
    return -2 * k * np.log(rho + annulus_width(rho))


def log_b_step3(rho, n, k):
    """Amplitude after the radial-degree change of the third step."""
    return log_b_step1(rho, n, k) + 4 * k * np.log(rho + 3 * annulus_width(rho))


def relative_log_amplitude(rho, n, k):
    """log a, fixing |a r^-(n+k)| = |u4| at the matching radius."""
    r_star = rho + MATCH_POINT * annulus_width(rho)
    return log_b_step3(rho, n, k) - k * np.log(r_star)


@dataclass(frozen=True)
class PlanEntry:
    index: int
    rho: float
    n: int
    k: int
    log_a: float

    @property
    def r_out(self):
        return self.rho + ANNULUS_WIDTH * annulus_width(self.rho)

    def to_dict(self):
        return {'index': self.index, 'rho': self.rho, 'n': self.n, 'k': self.k, 'log_a': self.log_a}


@dataclass
class AnnulusPlan:
    rho1: float
    r_max: float
    entries: List[PlanEntry]

    def __repr__(self):
        return f'<AnnulusPlan {self.rho1:g} -> {self.outer_radius:.1f} ({len(self.entries)} annuli)>'

    @property
    def edges(self):
        return np.array([e.rho for e in self.entries] + [self.entries[-1].r_out])

    @property
    def outer_radius(self):
        return self.entries[-1].r_out

    def to_dict(self):
        return {'rho1': self.rho1, 'r_max': self.r_max, 'entries': [e.to_dict() for e in self.entries]}

    @classmethod
    def from_dict(cls, data):
        entries = [PlanEntry(int(e['index']), float(e['rho']), int(e['n']), int(e['k']), float(e['log_a']))
                   for e in data['entries']]
        return cls(float(data['rho1']), float(data['r_max']), entries)


def plan_annuli(rho1: float, r_max: float) -> AnnulusPlan:
    """Radii rho_{j+1} = rho_j + 7 rho_j^(3/7) up to r_max, degrees n_j = floor(rho_j^(8/7))."""
    if rho1 < MIN_RHO:
        raise ConstructionError(f'rho1 must be at least {MIN_RHO:g}, got {rho1}')
    if not r_max > rho1:
        raise ConstructionError(f'r_max={r_max} does not exceed rho1={rho1}')

    rhos = [float(rho1)]
    while rhos[-1] < r_max:
        rhos.append(rhos[-1] + ANNULUS_WIDTH * annulus_width(rhos[-1]))
    degrees = [int(np.floor(rho ** DEGREE_EXPONENT)) for rho in rhos]

    entries = []
    log_a = 0.0
    for j in range(len(rhos) - 1):
        rho, n = rhos[j], degrees[j]
        k = degrees[j + 1] - n
        if k < 1:
            raise ConstructionError(f'annulus {j} has k={k}', annulus=j, witness={'rho': rho, 'n': n})
        drift = k - 8 * rho ** (4 / 7)
        if abs(drift) > K_TOLERANCE:
            logger.error(f'Annulus {j}: k={k} drifts {drift:.3f} from 8 rho^(4/7)')
            raise ConstructionError(f'annulus {j} violates |k - 8 rho^(4/7)| <= {K_TOLERANCE:g}',
                                    annulus=j, witness={'rho': rho, 'k': k, 'drift': drift})
        entries.append(PlanEntry(j, rho, n, k, log_a))
        log_a = log_a + relative_log_amplitude(rho, n, k)

    logger.info(f'Planned {len(entries)} annuli from rho={rho1:g} to {rhos[-1]:.2f}')
    return AnnulusPlan(float(rho1), float(r_max), entries)


def plan_log_modulus(plan: AnnulusPlan):
    """log m(rho_j) = log a_j - n_j log rho_j straight from the plan."""
    return np.array([e.rho for e in plan.entries]), np.array([e.log_a - e.n * np.log(e.rho) for e in plan.entries])


@dataclass(frozen=True)
class PhaseFunction:
    """
    T-periodic phase correction with slope -4k on plateaus |phi - phi_m| <= T/5.

    On the rest of each period a smooth step of height 4kT brings it back,
    so the mean slope over a period is zero.
    """

    n: int
    k: int

    @property
    def period(self):
        return np.pi / (self.n + self.k)

    @property
    def plateau_count(self):
        return 2 * (self.n + self.k)

    def offset(self, phi):
        """phi - phi_m with phi_m the plateau start, in [-T/5, 4T/5)."""
        T = self.period
        phi = np.asarray(phi, dtype=float)
        return phi - T * np.floor((phi + PLATEAU * T) / T)

    def distance_to_center(self, phi):
        T = self.period
        phi = np.asarray(phi, dtype=float)
        return np.abs(phi - T * np.round(phi / T))

    def series(self, phi, order: int = JET_ORDER) -> RadialSeries:
        T = self.period
        delta = RadialSeries.variable(self.offset(phi), order)
        step = smooth_step_series((delta - PLATEAU * T) / (TRANSITION * T))
        return delta * (-4.0 * self.k) + step * (4.0 * self.k * T)

    def jet(self, base, order: int = JET_ORDER) -> Jet4:
        return self.series(base[1], order).lift(base, 'phi', order)

    def __call__(self, phi):
        return self.series(phi, 0).value.real

    def derivative(self, phi, j: int):
        return self.series(phi, j).derivative_value(j).real

    def plateau_centers(self):
        return self.period * np.arange(self.plateau_count)

    def plateau_constants(self):
        """b_m with Phi = -4k phi + b_m on plateau m."""
        return 4.0 * self.k * self.plateau_centers()

    def derivative_bounds(self, max_order: int = 4, samples: int = 4096):
        phi = np.linspace(0.0, self.period, samples, endpoint=False)
        s = self.series(phi, max_order)
        return [float(np.max(np.abs(s.derivative_value(j)))) for j in range(max_order + 1)]

    def bound_ratios(self, rho: float, max_order: int = 4):
        """max|Phi^(j)| / rho^((8/7) j - 4/7)."""
        bounds = self.derivative_bounds(max_order)
        return [b / rho ** (DEGREE_EXPONENT * j - 4 / 7) for j, b in enumerate(bounds)]

    def to_dict(self):
        T = self.period
        return {
            'n': self.n,
            'k': self.k,
            'period': T,
            'plateau_half_width': PLATEAU * T,
            'plateau_slope': -4 * self.k,
            'plateau_constants': {'count': self.plateau_count, 'first': 0.0, 'spacing': 4.0 * self.k * T},
        }


def build_phase(n: int, k: int, rho: float = None, bound_constant: float = None) -> PhaseFunction:
    if n < 1 or k < 1:
        raise ConstructionError(f'phase needs n, k >= 1, got n={n}, k={k}')
    if not n > k:
        raise ConstructionError(f'phase needs n > k for a monotone winding, got n={n}, k={k}')
    phase = PhaseFunction(int(n), int(k))
    if rho is not None and bound_constant is not None:
        for j, ratio in enumerate(phase.bound_ratios(rho)):
            if ratio > bound_constant:
                raise ConstructionError(f'|Phi^({j})| bound fails: measured constant {ratio:.4g} > {bound_constant:g}',
                                        witness={'order': j, 'constant': ratio, 'rho': rho})
    return phase


def _shifted_exp(log_jet: Jet4, ref):
    """exp(L - ref) with the phase of the value reduced mod 2 pi."""
    coeffs = log_jet.coeffs.copy()
    value = coeffs[0, 0]
    coeffs[0, 0] = (value.real - ref) + 1j * np.mod(value.imag, TWO_PI)
    return Jet4(coeffs, log_jet.base_point, log_jet.order).exp()


@dataclass
class SolutionSegment:
    """Closed-form solution on one annulus, with its step windows."""

    index: int
    rho: float
    n: int
    k: int
    log_a_in: float
    phase: PhaseFunction = field(init=False, repr=False)
    cutoffs: Dict[str, Cutoff] = field(init=False, repr=False)

    def __post_init__(self):
        self.phase = build_phase(self.n, self.k)
        h, rho = self.h, self.rho
        self.cutoffs = {
            'u1': build_bump(rho + U1_FLAT * h, rho + U1_ZERO * h, rho),
            'u2': build_ramp(rho + U2_ZERO * h, rho + U2_FLAT * h, rho),
            'phase': build_bump(rho + PHASE_FLAT * h, rho + PHASE_ZERO * h, rho),
            'g3': build_bump(rho + G3_FLAT * h, rho + G3_ZERO * h, rho),
            'u4': build_bump(rho + U4_FLAT * h, rho + U4_ZERO * h, rho),
            'target': build_ramp(rho + TARGET_ZERO * h, rho + TARGET_FLAT * h, rho),
        }

    def __repr__(self):
        return f'<SolutionSegment {self.index}: rho={self.rho:.2f} n={self.n} k={self.k}>'

    @property
    def h(self):
        return annulus_width(self.rho)

    @property
    def r_in(self):
        return self.rho

    @property
    def r_out(self):
        return self.rho + ANNULUS_WIDTH * self.h

    @property
    def log_b1(self):
        return log_b_step1(self.rho, self.n, self.k)

    @property
    def log_b3(self):
        return log_b_step3(self.rho, self.n, self.k)

    @property
    def log_a_rel(self):
        return relative_log_amplitude(self.rho, self.n, self.k)

    @property
    def log_a_out(self):
        return self.log_a_in + self.log_a_rel

    def s(self, r):
        return (np.asarray(r, dtype=float) - self.rho) / self.h

    def step_of(self, r):
        edges = self.rho + self.h * np.array(STEP_EDGES)
        return np.clip(np.searchsorted(edges, r, side='right'), 1, 4)

    def window_radii(self):
        h, rho = self.h, self.rho
        steps = {f'step{i + 1}': (rho + STEP_EDGES[i] * h, rho + STEP_EDGES[i + 1] * h) for i in range(4)}
        steps.update({name: (c.start, c.end) for name, c in self.cutoffs.items()})
        return steps

    def pieces(self, step: int, r, phi, order: int = JET_ORDER):
        """(name, multiplier jet or None, log jet) for every piece of one step."""
        base = (np.asarray(r, dtype=float), np.asarray(phi, dtype=float))
        log_r = jet_variable('r', base, order).log()
        angle = jet_variable('phi', base, order)
        n, k, c = self.n, self.k, self.log_a_in
        rearranged = c + self.log_b1 + 1j * np.pi

        if step == 1:
            inner = log_r * (-n) + angle * (-1j * n) + c
            turned = log_r * (2 * k - n) + (angle * (n + 2 * k) + self.phase.jet(base, order)) * 1j + rearranged
            return [('u1', self.cutoffs['u1'].jet(base, order), inner),
                    ('u2', self.cutoffs['u2'].jet(base, order), turned)]
        if step == 2:
            frozen = self.cutoffs['phase'].jet(base, order) * self.phase.jet(base, order)
            return [('u2', None, log_r * (2 * k - n) + (angle * (n + 2 * k) + frozen) * 1j + rearranged)]
        if step == 3:
            var = RadialSeries.variable(base[0], order)
            psi = self.cutoffs['g3'].series(base[0], order)
            g3 = ((var.log() * -1.0 + np.log(self.rho + 3 * self.h)) * (4.0 * k)).exp()
            factor = (psi + (1 - psi) * g3).log().lift(base, 'r', order)
            return [('u3', None, log_r * (2 * k - n) + angle * (1j * (n + 2 * k)) + factor + rearranged)]
        if step == 4:
            u4 = log_r * (-(n + 2 * k)) + angle * (1j * (n + 2 * k)) + (c + self.log_b3 + 1j * np.pi)
            target = log_r * (-(n + k)) + angle * (-1j * (n + k)) + self.log_a_out
            return [('u4', self.cutoffs['u4'].jet(base, order), u4),
                    ('target', self.cutoffs['target'].jet(base, order), target)]
        raise ValueError(f'no step {step}')

    def harmonic_zone(self, r, phi):
        """Points where every active piece is harmonic, so Pu vanishes identically."""
        s = self.s(r)
        plateau = self.phase.distance_to_center(phi) <= PLATEAU * self.phase.period
        return ((s <= U2_ZERO)
                | ((s >= U2_FLAT) & (s <= U1_FLAT) & plateau)
                | ((s >= TARGET_FLAT) & (s <= U4_FLAT))
                | (s >= U4_ZERO))

    def field_jet(self, r, phi, order: int = JET_ORDER):
        """(u / e^ref jet, ref) at 1-D arrays of points inside the annulus."""
        r = np.asarray(r, dtype=float)
        phi = np.asarray(phi, dtype=float)
        coeffs = np.zeros((order + 1, order + 1) + r.shape, dtype=complex)
        ref = np.zeros(r.shape)
        steps = self.step_of(r)
        for step in np.unique(steps):
            mask = steps == step
            pieces = self.pieces(int(step), r[mask], phi[mask], order)
            local_ref = np.full(int(mask.sum()), -np.inf)
            for _, mult, log_jet in pieces:
                active = np.ones(local_ref.shape, dtype=bool) if mult is None else mult.value.real > 0
                local_ref = np.where(active, np.maximum(local_ref, log_jet.value.real), local_ref)
            total = 0
            for _, mult, log_jet in pieces:
                term = _shifted_exp(log_jet, local_ref)
                total = total + (term if mult is None else mult * term)
            coeffs[..., mask] = total.coeffs
            ref[mask] = local_ref
        return Jet4(coeffs, (r, phi), order), ref

    def log_modulus(self, r, phi):
        u, ref = self.field_jet(r, phi, 0)
        with np.errstate(divide='ignore'):
            return ref + np.log(np.abs(u.value))

    def to_dict(self):
        return {
            'index': self.index,
            'rho': self.rho,
            'n': self.n,
            'k': self.k,
            'h': self.h,
            'r_in': self.r_in,
            'r_out': self.r_out,
            'log_a_in': self.log_a_in,
            'log_a_out': self.log_a_out,
            'log_b1': self.log_b1,
            'log_b3': self.log_b3,
            'windows': {name: list(w) for name, w in self.window_radii().items()},
            'phase': self.phase.to_dict(),
        }


def build_annulus_solution(rho: float, n: int, k: int, log_a_in: float, index: int = 0) -> SolutionSegment:
    segment = SolutionSegment(index, float(rho), int(n), int(k), float(log_a_in))
    logger.debug(f'Built {segment!r}')
    return segment


@dataclass
class GlobalSolution:
    plan: AnnulusPlan
    segments: List[SolutionSegment]

    def __repr__(self):
        return f'<GlobalSolution {len(self.segments)} annuli on [{self.r_min:.1f}, {self.r_max:.1f}]>'

    @property
    def r_min(self):
        return self.segments[0].r_in

    @property
    def r_max(self):
        return self.segments[-1].r_out

    def locate(self, r):
        r = np.asarray(r, dtype=float)
        if np.any((r < self.r_min) | (r > self.r_max)):
            raise RangeError(f'radius outside [{self.r_min}, {self.r_max}]')
        edges = self.plan.edges
        return np.clip(np.searchsorted(edges, r, side='right') - 1, 0, len(self.segments) - 1)

    def segment_at(self, r) -> SolutionSegment:
        return self.segments[int(self.locate(np.asarray([r]))[0])]

    def field_jet(self, r, phi, order: int = JET_ORDER):
        """(scaled jet, ref, harmonic mask) with u = e^ref times the scaled jet."""
        r, phi = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(phi, dtype=float))
        shape = r.shape
        r, phi = r.ravel(), phi.ravel()
        which = self.locate(r)
        coeffs = np.zeros((order + 1, order + 1, r.size), dtype=complex)
        ref = np.zeros(r.size)
        harmonic = np.zeros(r.size, dtype=bool)
        for j in np.unique(which):
            mask = which == j
            segment = self.segments[int(j)]
            jet, local_ref = segment.field_jet(r[mask], phi[mask], order)
            coeffs[..., mask] = jet.coeffs
            ref[mask] = local_ref
            harmonic[mask] = segment.harmonic_zone(r[mask], phi[mask])
        base = (r.reshape(shape), phi.reshape(shape))
        jet = Jet4(coeffs.reshape((order + 1, order + 1) + shape), base, order)
        return jet, ref.reshape(shape), harmonic.reshape(shape)

    def log_modulus(self, r, phi):
        jet, ref, _ = self.field_jet(r, phi, 0)
        with np.errstate(divide='ignore'):
            return ref + np.log(np.abs(jet.value))

    def argument(self, r, phi):
        jet, _, _ = self.field_jet(r, phi, 0)
        return np.angle(jet.value)

    def to_dict(self):
        return {
            'plan': self.plan.to_dict(),
            'segments': [s.to_dict() for s in self.segments],
            'flags': FLAGS,
        }

    @classmethod
    def from_dict(cls, data):
        return assemble_global(AnnulusPlan.from_dict(data['plan']), check=False)


def interface_jumps(g: GlobalSolution, n_angles: int = 64):
    """Relative log|u| jump at every interior interface."""
    phi = np.linspace(0.0, TWO_PI, n_angles, endpoint=False)
    jumps = []
    for left, right in zip(g.segments[:-1], g.segments[1:]):
        r = np.full(n_angles, right.r_in)
        outer = left.log_modulus(r, phi)
        inner = right.log_modulus(r, phi)
        jumps.append(float(np.max(np.abs(outer - inner) / np.maximum(1.0, np.abs(inner)))))
    return jumps


def assemble_global(plan: AnnulusPlan, check: bool = True, tolerance: float = 1e-12) -> GlobalSolution:
    segments = []
    for entry in plan.entries:
        try:
            segments.append(build_annulus_solution(entry.rho, entry.n, entry.k, entry.log_a, entry.index))
        except ConstructionError as exc:
            raise ConstructionError(str(exc), annulus=entry.index, witness=exc.witness) from None
    g = GlobalSolution(plan, segments)
    if check:
        for j, jump in enumerate(interface_jumps(g)):
            if jump > tolerance:
                logger.error(f'log|u| jumps by {jump:.3e} between annuli {j} and {j + 1}')
                raise ConstructionError(f'interface {j} log|u| jump {jump:.3e}', annulus=j,
                                        witness={'r': segments[j + 1].r_in, 'jump': jump})
    logger.info(f'Assembled {g!r}')
    return g


def eval_solution(g: GlobalSolution, r, phi, order: int = JET_ORDER) -> LogJet:
    jet, ref, _ = g.field_jet(r, phi, order)
    log_jet = jet.log() + ref
    return LogJet.from_log(log_jet)


def winding_number(g: GlobalSolution, r: float, n_angles: int) -> int:
    phi = np.linspace(0.0, TWO_PI, n_angles + 1)
    arg = g.argument(np.full(phi.shape, r), phi)
    return int(np.round(np.sum(np.angle(np.exp(1j * np.diff(arg)))) / TWO_PI))


# ---------------------------------------------------------------------------
# audits


def single_valuedness_error(segment: SolutionSegment, n_radial: int = 64):
    r = segment.rho + segment.h * ANNULUS_WIDTH * (np.arange(n_radial) + 0.5) / n_radial
    u0, ref0 = segment.field_jet(r, np.zeros_like(r), 0)
    u1, ref1 = segment.field_jet(r, np.full_like(r, TWO_PI), 0)
    a = u0.value
    b = u1.value * np.exp(ref1 - ref0)
    return float(np.max(np.abs(a - b) / np.abs(a)))


def plateau_residual(segment: SolutionSegment, n_points: int = 256, seed: int = 0):
    """max |Delta u2 / u2| r^2 / n^2 over the first step's harmonic plateaus."""
    rng = stream(seed, _PLATEAU_STREAM, segment.index)
    h, T = segment.h, segment.phase.period
    r = segment.rho + h * rng.uniform(U2_FLAT, U1_FLAT, n_points)
    m = rng.integers(0, segment.phase.plateau_count, n_points)
    phi = T * m + rng.uniform(-PLATEAU * T, PLATEAU * T, n_points)
    _, _, log_jet = segment.pieces(1, r, phi, 2)[1]
    ratio = laplacian().apply((log_jet - log_jet.value).exp())
    return float(np.max(np.abs(ratio) * r ** 2 / segment.n ** 2))


def check_ratio_bounds(segment: SolutionSegment, constant: float = 8.0, samples: int = 256):
    """
    Log ratios of the two pieces at the edges of each blend.

    |u2/u1| <= e^-C before u2 switches on and >= e^C once u1 has switched off;
    the same for target/u4 around the last blend.
    """
    rho, h, k = segment.rho, segment.h, segment.k
    first_in = rho + h * np.linspace(0.0, U2_FLAT, samples)
    first_out = rho + h * np.linspace(U1_FLAT, 2.0, samples)
    r_star = rho + MATCH_POINT * h
    last_in = rho + h * np.linspace(4.0, TARGET_FLAT, samples)
    last_out = rho + h * np.linspace(U4_FLAT, ANNULUS_WIDTH, samples)
    inner_ratio = 2 * k * np.log(first_in / (rho + h))
    outer_ratio = 2 * k * np.log(first_out / (rho + h))
    blend_in = k * np.log(last_in / r_star)
    blend_out = k * np.log(last_out / r_star)
    result = {
        'constant': constant,
        'step1_inner_max': float(inner_ratio.max()),
        'step1_outer_min': float(outer_ratio.min()),
        'step4_inner_max': float(blend_in.max()),
        'step4_outer_min': float(blend_out.min()),
    }
    result['holds'] = bool(result['step1_inner_max'] <= -constant and result['step1_outer_min'] >= constant
                           and result['step4_inner_max'] <= -constant and result['step4_outer_min'] >= constant)
    return result


def measure_step_constants(segment: SolutionSegment, samples: int = 512, seed: int = 0):
    """Empirical constants for the Laplacian ratios of the first three steps."""
    rng = stream(seed, _STEP_STREAM, segment.index)
    rho, h, n, k = segment.rho, segment.h, segment.n, segment.k
    phi = rng.uniform(0.0, TWO_PI, samples)
    lap = laplacian()

    def ratio(step, lo, hi, which=0):
        r = rho + h * rng.uniform(lo, hi, samples)
        _, _, log_jet = segment.pieces(step, r, phi, 2)[which]
        return r, np.abs(lap.apply((log_jet - log_jet.value).exp()))

    r1, d1 = ratio(1, 0.0, 2.0, which=1)
    r2, d2 = ratio(2, 2.0, 3.0)
    r3, d3 = ratio(3, 3.0, G3_FLAT)
    return {
        'step1_delta_over_nk': float(np.max(d1 * r1 ** 2 / (n * k))),
        'step2_g2_scaled': float(np.max(d2 * rho ** (2 / 7))),
        'step2_delta_over_nk': float(np.max(d2 * r2 ** 2 / (n * k))),
        'step3_delta_over_nk': float(np.max(d3 * r3 ** 2 / (n * k))),
    }


def audit_radii(segment: SolutionSegment, n_radial: int = 400):
    """Cell-centred radial nodes plus the step edges and both matching radii."""
    s = ANNULUS_WIDTH * (np.arange(n_radial) + 0.5) / n_radial
    edges = np.array([1.0, *STEP_EDGES[1:-1], MATCH_POINT])
    return segment.rho + segment.h * np.unique(np.concatenate([s, edges]))


def audit_segment(segment: SolutionSegment, n_radial: int = 400, n_angular: int = 512, ratio_constant: float = 8.0):
    """
    Grid modulus with its zero set, single-valuedness, plateau harmonicity and ratio bounds.

    A point counts as a zero when |u| is below e^-ZERO_DEPTH times the largest
    |u| on its circle. Zeros inside the harmonic zone are reported, since V is
    zero around them; a zero anywhere else is a construction failure.
    """
    phi = TWO_PI * np.arange(n_angular) / n_angular
    r, phi = np.meshgrid(audit_radii(segment, n_radial), phi, indexing='ij')
    log_u = segment.log_modulus(r.ravel(), phi.ravel()).reshape(r.shape)
    depth = log_u - log_u.max(axis=1, keepdims=True)
    vanishing = ~np.isfinite(log_u) | (depth < -ZERO_DEPTH)
    harmonic = segment.harmonic_zone(r, phi)
    stray = vanishing & ~harmonic
    if stray.any():
        bad = np.unravel_index(int(np.argmax(stray)), stray.shape)
        witness = {'r': float(r[bad]), 'phi': float(phi[bad])}
        logger.error(f'|u| vanishes outside the harmonic zone on annulus {segment.index} at {witness}')
        raise ConstructionError('|u| = 0 where Pu does not vanish', annulus=segment.index, witness=witness)
    if vanishing.any():
        logger.debug(f'Annulus {segment.index}: {int(vanishing.sum())} zeros of u inside the harmonic zone')
    return {
        'index': segment.index,
        'rho': segment.rho,
        'min_log_modulus': float(log_u[~harmonic].min()),
        'max_log_modulus': float(log_u[np.isfinite(log_u)].max()),
        'harmonic_zeros': int(vanishing.sum()),
        'single_valuedness': single_valuedness_error(segment),
        'plateau_residual': plateau_residual(segment),
        'ratio_bounds': check_ratio_bounds(segment, ratio_constant),
    }
