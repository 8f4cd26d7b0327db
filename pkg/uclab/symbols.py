"""
Phase-space symbol algebra in two dimensions.

Symbols are polynomials in the frequency xi with coefficient functions of x
that carry their own gradients, so Poisson brackets are evaluated exactly
from the polynomial structure. Weights come from a closed-form catalogue.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import Callable, Dict, List, Tuple

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from uclab.errors import SymbolError
from uclab.utils.jets import RadialSeries

logger = logging.getLogger(__name__)

DIMENSION = 2

# phi1 integral table on [0, PHI1_R_MAX]
PHI1_R_MAX = 10.0
PHI1_TABLE_POINTS = 4001


def _as_points(x):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != DIMENSION:
        raise ValueError(f'points must have a trailing axis of length {DIMENSION}')
    return x


# ---------------------------------------------------------------------------
# weights


def _phi1_integrand(t):
    t = np.asarray(t, dtype=float)
    with np.errstate(invalid='ignore', divide='ignore'):
        out = np.expm1(-t) / t
    return np.where(t == 0, -1.0, out)


@lru_cache(maxsize=1)
def phi1_integral_table() -> CubicSpline:
    """Spline of I(r) = int_0^r (e^-t - 1)/t dt, built once by adaptive quadrature."""
    grid = np.linspace(0.0, PHI1_R_MAX, PHI1_TABLE_POINTS)
    pieces = [
        integrate.quad(lambda t: float(_phi1_integrand(t)), a, b, epsabs=1e-13, epsrel=1e-13)[0]
        for a, b in zip(grid[:-1], grid[1:])
    ]
    values = np.concatenate([[0.0], np.cumsum(pieces)])
    logger.debug(f'Built phi1 integral table with {len(grid)} nodes')
    return CubicSpline(grid, values)


def phi1_integral(r):
    r = np.asarray(r, dtype=float)
    if np.any((r < 0) | (r > PHI1_R_MAX)):
        raise SymbolError(f'phi1 integral tabulated only on [0, {PHI1_R_MAX}]')
    return phi1_integral_table()(r)


def _integrate_series(value, derivative: RadialSeries, order: int) -> RadialSeries:
    """Series of f from f(r0) and the series of f' (one order lower)."""
    d = derivative.truncate(order - 1)
    coeffs = np.zeros((order + 1,) + d.batch_shape, dtype=complex)
    coeffs[0] = value
    for k in range(1, order + 1):
        coeffs[k] = d.coeffs[k - 1] / k
    return RadialSeries(coeffs, d.base_point, order)


WEIGHT_KINDS = ('bk_phi1', 'log_sq_phi2', 'log_lambda_phi3', 'power_alpha')


@dataclass(frozen=True)
class WeightDerivatives:
    value: np.ndarray
    gradient: np.ndarray
    hessian: np.ndarray
    d3: np.ndarray
    d4: np.ndarray


@dataclass(frozen=True)
class WeightFn:
    """Radial weight phi(|x|) from the catalogue, with a closed-form derivative oracle."""

    kind: str
    param: float = 0.0

    def __post_init__(self):
        if self.kind not in WEIGHT_KINDS:
            raise SymbolError(f"Unknown weight kind '{self.kind}'")
        if self.kind == 'log_lambda_phi3' and not self.param > 0:
            raise SymbolError('phi3 needs lambda > 0')
        if self.kind == 'power_alpha' and not self.param > 0:
            raise SymbolError('power weight needs alpha > 0')

    @property
    def weight_id(self) -> str:
        if self.kind in ('log_lambda_phi3', 'power_alpha'):
            return f'{self.kind}({self.param:g})'
        return self.kind

    def radial_series(self, r, order: int = 4) -> RadialSeries:
        var = RadialSeries.variable(r, order)
        if self.kind == 'bk_phi1':
            value = -np.log(np.asarray(r, dtype=float)) - phi1_integral(r)
            slope = -(-var).exp() / var
            return _integrate_series(value, slope, order)
        if self.kind == 'log_sq_phi2':
            return var.log() ** 2
        if self.kind == 'log_lambda_phi3':
            return -(var + var * var * self.param).log()
        return var ** (-self.param)

    def value(self, x):
        r = np.linalg.norm(_as_points(x), axis=-1)
        return self.radial_series(r, 0).value.real

    def radial_derivatives(self, r, order: int = 4):
        s = self.radial_series(r, order)
        return [s.derivative_value(k).real for k in range(order + 1)]

    def oracle(self, x) -> WeightDerivatives:
        x = _as_points(x)
        r = np.linalg.norm(x, axis=-1)
        if np.any(r == 0):
            raise SymbolError('weights are singular at the origin')
        d0, d1, d2, d3, d4 = self.radial_derivatives(r, 4)
        unit = x / r[..., None]
        outer = unit[..., :, None] * unit[..., None, :]
        eye = np.eye(DIMENSION)
        hessian = d2[..., None, None] * outer + (d1 / r)[..., None, None] * (eye - outer)
        return WeightDerivatives(d0, d1[..., None] * unit, hessian, d3, d4)

    def gradient(self, x):
        return self.oracle(x).gradient

    def hessian(self, x):
        return self.oracle(x).hessian

    def gradient_norm(self, x):
        return np.linalg.norm(self.gradient(x), axis=-1)


def bk_phi1() -> WeightFn:
    return WeightFn('bk_phi1')


def log_sq_phi2() -> WeightFn:
    return WeightFn('log_sq_phi2')


def log_lambda_phi3(lam: float) -> WeightFn:
    return WeightFn('log_lambda_phi3', lam)


def power_alpha(alpha: float) -> WeightFn:
    return WeightFn('power_alpha', alpha)


def weight_from_id(weight_id: str) -> WeightFn:
    """Inverse of WeightFn.weight_id."""
    if '(' in weight_id:
        kind, param = weight_id.rstrip(')').split('(')
        return WeightFn(kind, float(param))
    return WeightFn(weight_id)


# ---------------------------------------------------------------------------
# coefficient functions


@dataclass(frozen=True)
class Coefficient:
    """Coefficient c(x) of a symbol together with its gradient."""

    value: Callable
    grad: Callable

    @classmethod
    def constant(cls, c):
        return cls(lambda x, c=c: np.full(np.shape(x)[:-1], c, dtype=complex),
                   lambda x: np.zeros(np.shape(x), dtype=complex))

    @classmethod
    def coordinate(cls, j: int):
        def grad(x, j=j):
            out = np.zeros(np.shape(x), dtype=complex)
            out[..., j] = 1.0
            return out
        return cls(lambda x, j=j: np.asarray(x, dtype=complex)[..., j], grad)

    @classmethod
    def weight_gradient(cls, weight: WeightFn, j: int):
        """d_j phi, whose gradient is the j-th Hessian column."""
        return cls(lambda x: weight.gradient(x)[..., j].astype(complex),
                   lambda x: weight.hessian(x)[..., :, j].astype(complex))

    def __add__(self, other):
        return Coefficient(lambda x: self.value(x) + other.value(x),
                           lambda x: self.grad(x) + other.grad(x))

    def __mul__(self, other):
        if not isinstance(other, Coefficient):
            return Coefficient(lambda x: self.value(x) * other, lambda x: self.grad(x) * other)
        return Coefficient(
            lambda x: self.value(x) * other.value(x),
            lambda x: self.grad(x) * other.value(x)[..., None] + self.value(x)[..., None] * other.grad(x),
        )

    __rmul__ = __mul__

    @property
    def real(self):
        return Coefficient(lambda x: self.value(x).real.astype(complex),
                           lambda x: self.grad(x).real.astype(complex))

    @property
    def imag(self):
        return Coefficient(lambda x: self.value(x).imag.astype(complex),
                           lambda x: self.grad(x).imag.astype(complex))


# ---------------------------------------------------------------------------
# symbols

MultiIndex = Tuple[int, int]


def _monomial(xi, alpha: MultiIndex):
    return xi[..., 0] ** alpha[0] * xi[..., 1] ** alpha[1]


def _monomial_grad(xi, alpha: MultiIndex):
    a1, a2 = alpha
    d1 = a1 * xi[..., 0] ** max(a1 - 1, 0) * xi[..., 1] ** a2 if a1 else np.zeros(xi.shape[:-1])
    d2 = a2 * xi[..., 0] ** a1 * xi[..., 1] ** max(a2 - 1, 0) if a2 else np.zeros(xi.shape[:-1])
    return np.stack([d1, d2], axis=-1)


class SymbolExpr:
    """p(x, xi) = sum_alpha c_alpha(x) xi^alpha in two dimensions."""

    def __init__(self, terms: List[Tuple[MultiIndex, Coefficient]], name: str = 'p'):
        self.terms = list(terms)
        self.name = name

    def __repr__(self):
        return f'<SymbolExpr {self.name} degree={self.degree}>'

    @classmethod
    def from_constant_coefficients(cls, table: Dict[MultiIndex, float], name: str = 'p'):
        return cls([(alpha, Coefficient.constant(c)) for alpha, c in table.items() if c != 0], name)

    @property
    def degree(self) -> int:
        return max((sum(alpha) for alpha, _ in self.terms), default=0)

    def evaluate(self, x, xi):
        x, xi = _as_points(x), np.asarray(xi)
        total = 0
        for alpha, c in self.terms:
            total = total + c.value(x) * _monomial(xi, alpha)
        return np.broadcast_to(np.asarray(total, dtype=complex), np.broadcast_shapes(x.shape[:-1], xi.shape[:-1]))

    def grad_xi(self, x, xi):
        x, xi = _as_points(x), np.asarray(xi)
        total = 0
        for alpha, c in self.terms:
            total = total + c.value(x)[..., None] * _monomial_grad(xi, alpha)
        return total

    def grad_x(self, x, xi):
        x, xi = _as_points(x), np.asarray(xi)
        total = 0
        for alpha, c in self.terms:
            total = total + c.grad(x) * _monomial(xi, alpha)[..., None]
        return total

    def __add__(self, other):
        return SymbolExpr(self.terms + other.terms, f'({self.name}+{other.name})')

    def __mul__(self, other):
        if not isinstance(other, SymbolExpr):
            return SymbolExpr([(a, c * other) for a, c in self.terms], self.name)
        terms = [((a[0] + b[0], a[1] + b[1]), ca * cb) for a, ca in self.terms for b, cb in other.terms]
        return SymbolExpr(terms, f'{self.name}*{other.name}')

    __rmul__ = __mul__

    def times_coefficient(self, coefficient: Coefficient, name: str = None):
        return SymbolExpr([(a, c * coefficient) for a, c in self.terms], name or self.name)

    @property
    def real(self):
        return SymbolExpr([(a, c.real) for a, c in self.terms], f'Re {self.name}')

    @property
    def imag(self):
        return SymbolExpr([(a, c.imag) for a, c in self.terms], f'Im {self.name}')


def laplacian_symbol() -> SymbolExpr:
    """Principal symbol |xi|^2 of -Delta."""
    return SymbolExpr.from_constant_coefficients({(2, 0): 1.0, (0, 2): 1.0}, 'p1')


def polyharmonic_symbol(m: int) -> SymbolExpr:
    """|xi|^{2m}, the symbol of (-Delta)^m."""
    table = {(2 * j, 2 * (m - j)): float(comb(m, j)) for j in range(m + 1)}
    return SymbolExpr.from_constant_coefficients(table, f'p_{m}')


def anisotropic_symbol(b: float) -> SymbolExpr:
    """xi_1^2 + b xi_2^2."""
    return SymbolExpr.from_constant_coefficients({(2, 0): 1.0, (0, 2): float(b)}, 'p2')


def product_symbol(b: float) -> SymbolExpr:
    return laplacian_symbol() * anisotropic_symbol(b)


@dataclass(frozen=True)
class PhasePoint:
    """Sample (x, xi, tau); arrays broadcast over leading axes."""

    x: np.ndarray
    xi: np.ndarray
    tau: np.ndarray

    def __post_init__(self):
        if np.any(np.linalg.norm(_as_points(self.x), axis=-1) == 0):
            raise SymbolError('phase points must avoid the origin')

    @property
    def r(self):
        return np.linalg.norm(self.x, axis=-1)

    def take(self, index):
        tau = np.broadcast_to(self.tau, np.shape(self.x)[:-1])
        return PhasePoint(np.asarray(self.x)[index], np.asarray(self.xi)[index], np.asarray(tau)[index])

    def to_dict(self):
        return {
            'x': np.asarray(self.x, dtype=float).tolist(),
            'xi': np.asarray(self.xi, dtype=float).tolist(),
            'tau': np.asarray(self.tau, dtype=float).tolist(),
        }


def poisson_bracket(p: SymbolExpr, q: SymbolExpr, pt: PhasePoint):
    """sum_j (dp/dxi_j dq/dx_j - dq/dxi_j dp/dx_j) at pt."""
    x, xi = pt.x, pt.xi
    return np.sum(p.grad_xi(x, xi) * q.grad_x(x, xi) - q.grad_xi(x, xi) * p.grad_x(x, xi), axis=-1)


class ShiftedSymbol:
    """q(x, xi) = p(x, xi + i tau grad phi(x)); tau may vary per sample."""

    def __init__(self, p: SymbolExpr, weight: WeightFn, tau):
        self.p = p
        self.weight = weight
        self.tau = np.asarray(tau, dtype=float)
        self._expanded = None

    @property
    def expanded(self) -> SymbolExpr:
        """Re/Im split as explicit polynomials in xi; needs a scalar tau."""
        if self.tau.ndim:
            raise SymbolError('the polynomial expansion needs a scalar tau')
        if self._expanded is None:
            self._expanded = self._expand(float(self.tau))
        return self._expanded

    def _expand(self, tau: float) -> SymbolExpr:
        shift = [Coefficient.weight_gradient(self.weight, j) * (1j * tau) for j in range(DIMENSION)]
        terms = []
        for (a1, a2), c in self.p.terms:
            for k1 in range(a1 + 1):
                for k2 in range(a2 + 1):
                    coeff = c * float(comb(a1, k1) * comb(a2, k2))
                    for _ in range(a1 - k1):
                        coeff = coeff * shift[0]
                    for _ in range(a2 - k2):
                        coeff = coeff * shift[1]
                    terms.append(((k1, k2), coeff))
        return SymbolExpr(terms, f'{self.p.name}_tau')

    @property
    def real(self) -> SymbolExpr:
        return self.expanded.real

    @property
    def imag(self) -> SymbolExpr:
        return self.expanded.imag

    def _zeta(self, x, xi):
        return np.asarray(xi) + 1j * self.tau[..., None] * self.weight.gradient(x)

    def evaluate(self, x, xi):
        """Direct complex substitution."""
        return self.p.evaluate(x, self._zeta(x, xi))

    def bracket(self, x, xi):
        """{Re q, Im q} via the holomorphic chain rule in zeta."""
        zeta = self._zeta(x, xi)
        dzeta = self.p.grad_xi(x, zeta)
        chain = np.einsum('...jk,...j->...k', self.weight.hessian(x), dzeta)
        dx = self.p.grad_x(x, zeta) + 1j * self.tau[..., None] * chain
        return np.sum(dzeta.real * dx.imag - dzeta.imag * dx.real, axis=-1)


def shift_symbol(p: SymbolExpr, weight: WeightFn, tau) -> ShiftedSymbol:
    if np.any(np.asarray(tau) < 0):
        raise SymbolError('tau must be non-negative')
    return ShiftedSymbol(p, weight, tau)


def _nonzero_gradient(weight: WeightFn, x):
    g = weight.gradient(x)
    norm = np.linalg.norm(g, axis=-1)
    if np.any(norm == 0):
        bad = np.asarray(x)[norm == 0] if np.ndim(norm) else np.asarray(x)
        raise SymbolError('characteristic set undefined where grad phi vanishes', witness=bad.tolist())
    return g


def char_points_minus_laplacian(weight: WeightFn, x, tau) -> List[np.ndarray]:
    """The two xi with |xi| = tau |grad phi| and xi . grad phi = 0."""
    g = _nonzero_gradient(weight, _as_points(x))
    rotated = np.stack([-g[..., 1], g[..., 0]], axis=-1) * np.asarray(tau)[..., None]
    return [rotated, -rotated]


def char_points_factor2(weight: WeightFn, b: float, x, tau=1.0) -> List[np.ndarray]:
    """Solutions of xi_1^2 + b xi_2^2 = tau^2 |grad phi|_b^2, xi_1 g_1 + b xi_2 g_2 = 0."""
    if not b > 0 or b == 1:
        raise SymbolError('factor-2 system needs b > 0, b != 1')
    g = _nonzero_gradient(weight, _as_points(x))
    direction = np.stack([-b * g[..., 1], g[..., 0]], axis=-1)
    xi = direction * (np.asarray(tau)[..., None] / np.sqrt(b))
    return [xi, -xi]


def ellipticity_margin(p: SymbolExpr, x, n_directions: int = 64):
    """min over |xi| = 1 of |p(x, xi)| at each x, with the minimizing xi."""
    x = _as_points(x)
    theta = np.linspace(0.0, 2 * np.pi, n_directions, endpoint=False)
    xi = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    values = np.abs(p.evaluate(x[..., None, :], xi))
    idx = np.argmin(values, axis=-1)
    return np.take_along_axis(values, idx[..., None], axis=-1)[..., 0], xi[idx]
