"""
Differential operators in polar coordinates.

Coefficients are trigonometric polynomials in (cos phi, sin phi, 1/r), so
products and derivatives of coefficients stay closed-form and operator
composition happens once, symbolically, when the table is built.
"""

import logging
from math import comb
from typing import Dict, Tuple

import numpy as np

from uclab.utils.jets import Jet4, LogJet, log_derivative_ratio

logger = logging.getLogger(__name__)

Monomial = Tuple[int, int, int]


class TrigPoly:
    """sum c * cos(phi)^a * sin(phi)^b * r^-q over keys (a, b, q)."""

    def __init__(self, terms: Dict[Monomial, float] = None):
        self.terms = {key: float(c) for key, c in (terms or {}).items() if c != 0}

    def __repr__(self):
        return f'<TrigPoly {self.terms}>'

    def __eq__(self, other):
        return isinstance(other, TrigPoly) and self.terms == other.terms

    @classmethod
    def constant(cls, c):
        return cls({(0, 0, 0): c})

    @classmethod
    def monomial(cls, a=0, b=0, q=0, c=1.0):
        return cls({(a, b, q): c})

    def is_zero(self):
        return not self.terms

    def __add__(self, other):
        out = dict(self.terms)
        for key, c in other.terms.items():
            out[key] = out.get(key, 0.0) + c
        return TrigPoly(out)

    def __mul__(self, other):
        if not isinstance(other, TrigPoly):
            return TrigPoly({key: c * other for key, c in self.terms.items()})
        out = {}
        for (a1, b1, q1), c1 in self.terms.items():
            for (a2, b2, q2), c2 in other.terms.items():
                key = (a1 + a2, b1 + b2, q1 + q2)
                out[key] = out.get(key, 0.0) + c1 * c2
        return TrigPoly(out)

    __rmul__ = __mul__

    def d_r(self):
        return TrigPoly({(a, b, q + 1): -q * c for (a, b, q), c in self.terms.items() if q})

    def d_phi(self):
        out = {}
        for (a, b, q), c in self.terms.items():
            if a:
                out[(a - 1, b + 1, q)] = out.get((a - 1, b + 1, q), 0.0) - a * c
            if b:
                out[(a + 1, b - 1, q)] = out.get((a + 1, b - 1, q), 0.0) + b * c
        return TrigPoly(out)

    def derivative(self, i: int, j: int):
        out = self
        for _ in range(i):
            out = out.d_r()
        for _ in range(j):
            out = out.d_phi()
        return out

    def __call__(self, r, phi):
        r = np.asarray(r, dtype=float)
        phi = np.asarray(phi, dtype=float)
        cos, sin, inv = np.cos(phi), np.sin(phi), 1.0 / r
        total = np.zeros(np.broadcast_shapes(r.shape, phi.shape))
        for (a, b, q), c in self.terms.items():
            total = total + c * cos ** a * sin ** b * inv ** q
        return total


class PolarOperator:
    """sum over (i, j) of coefficient(r, phi) * d_r^i d_phi^j."""

    def __init__(self, table: Dict[Tuple[int, int], TrigPoly], name: str = 'L'):
        self.table = {key: poly for key, poly in table.items() if not poly.is_zero()}
        self.name = name

    def __repr__(self):
        return f'<PolarOperator {self.name} order={self.order}>'

    @property
    def order(self) -> int:
        return max((i + j for i, j in self.table), default=0)

    def __add__(self, other):
        table = dict(self.table)
        for key, poly in other.table.items():
            table[key] = table[key] + poly if key in table else poly
        return PolarOperator(table, f'{self.name}+{other.name}')

    def __mul__(self, c):
        return PolarOperator({key: poly * c for key, poly in self.table.items()}, self.name)

    __rmul__ = __mul__

    def apply(self, u: Jet4):
        if self.order > u.order:
            raise ValueError(f'{self.name} needs a jet of order {self.order}, got {u.order}')
        r, phi = u.base_point
        total = 0
        for (i, j), poly in self.table.items():
            total = total + poly(r, phi) * u.derivative(i, j)
        return total

    def then(self, outer: 'PolarOperator') -> 'PolarOperator':
        """outer o self, with the product rule applied to the inner coefficients."""
        table = {}
        for (i, j), a in outer.table.items():
            for (k, l), b in self.table.items():
                for p in range(i + 1):
                    for q in range(j + 1):
                        coeff = a * b.derivative(p, q) * float(comb(i, p) * comb(j, q))
                        key = (i - p + k, j - q + l)
                        table[key] = table[key] + coeff if key in table else coeff
        return PolarOperator(table, f'{outer.name}{self.name}')

    def to_dict(self):
        return {f'{i},{j}': {f'{a},{b},{q}': c for (a, b, q), c in sorted(poly.terms.items())}
                for (i, j), poly in sorted(self.table.items())}


def apply(op: PolarOperator, u: Jet4):
    return op.apply(u)


def cartesian_derivative(axis: int) -> PolarOperator:
    """d/dx1 = cos d_r - (sin/r) d_phi, d/dx2 = sin d_r + (cos/r) d_phi."""
    if axis == 0:
        return PolarOperator({(1, 0): TrigPoly.monomial(a=1), (0, 1): TrigPoly.monomial(b=1, q=1, c=-1.0)}, 'd1')
    return PolarOperator({(1, 0): TrigPoly.monomial(b=1), (0, 1): TrigPoly.monomial(a=1, q=1)}, 'd2')


def laplacian() -> PolarOperator:
    return PolarOperator({
        (2, 0): TrigPoly.constant(1.0),
        (1, 0): TrigPoly.monomial(q=1),
        (0, 2): TrigPoly.monomial(q=2),
    }, 'Delta')


def anisotropic(b: float) -> PolarOperator:
    """d1^2 + b d2^2 in polar form."""
    d1, d2 = cartesian_derivative(0), cartesian_derivative(1)
    op = d1.then(d1) + d2.then(d2) * float(b)
    op.name = f'A({b:g})'
    return op


def compose_fourth_order(b: float) -> PolarOperator:
    """(d1^2 + b d2^2) Delta as a single order-4 table."""
    if not b > 0:
        raise ValueError(f'anisotropy must be positive, got b={b}')
    op = laplacian().then(anisotropic(b))
    op.name = f'P({b:g})'
    logger.debug(f'Composed {op.name} with {len(op.table)} derivative terms')
    return op


def extract_potential(g, r, phi, b: float = 2.0):
    """V = -Pu/u from the logarithmic jet of u; zero where the field is harmonic."""
    op = compose_fourth_order(b)
    u_scaled, ref, harmonic = g.field_jet(r, phi)
    potential = np.zeros(harmonic.shape, dtype=complex)
    active = ~harmonic
    if active.any():
        base = tuple(np.asarray(x)[active] for x in u_scaled.base_point)
        scaled = Jet4(u_scaled.coeffs[..., active], base, u_scaled.order)
        log_u = LogJet.from_log(scaled.log() + ref[active])
        potential[active] = -log_derivative_ratio(log_u, op)
    return potential
