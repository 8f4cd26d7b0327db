"""
Truncated Taylor arithmetic in the polar variables.

Jet4 carries the scaled derivatives d_r^i d_phi^j f / (i! j!) for i + j <= 4
at a base point (r, phi). Every array operation broadcasts over trailing
axes, so one Jet4 can hold the expansions at a whole grid of base points.

RadialSeries is the univariate analogue in r with a free truncation order;
it feeds cutoff profiles into Jet4 and supplies the order-2m radial
expansions that iterated Laplacians of single angular modes need.
"""

from dataclasses import dataclass
from math import factorial
from typing import Callable, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.special import expit

from uclab.errors import JetDomainError

JET_ORDER = 4

ELEMENTARY = ('exp', 'log', 'pow', 'sin', 'cos', 'expit')

# sigma' = sigma (1 - sigma)
_LOGISTIC_STEP = np.array([0.0, 1.0, -1.0])


def _as_array(value):
    return np.asarray(value, dtype=complex)


def _elementary_derivatives(name: str, value, order: int, a=None) -> list:
    """Derivatives f^(k)(value) for k = 0..order."""
    if name == 'exp':
        e = np.exp(value)
        return [e] * (order + 1)
    if name == 'log':
        if np.any(value == 0):
            raise JetDomainError('log of a jet whose value vanishes')
        out = [np.log(value)]
        for k in range(1, order + 1):
            out.append((-1) ** (k - 1) * factorial(k - 1) * value ** (-k))
        return out
    if name == 'pow':
        if a is None:
            raise ValueError("pow needs an exponent")
        integral = float(a).is_integer()
        if not integral and np.any((value.real <= 0) & (value.imag == 0)):
            raise JetDomainError(f'non-integer power {a} of a non-positive value')
        if integral and a < 0 and np.any(value == 0):
            raise JetDomainError(f'negative power {a} of a vanishing value')
        out = []
        falling = 1.0
        for k in range(order + 1):
            if falling == 0.0:
                out.append(np.zeros_like(value))
            else:
                out.append(falling * value ** (a - k))
            falling *= a - k
        return out
    if name == 'expit':
        # every derivative is a polynomial in sigma, bounded for any real argument
        sigma = expit(np.real(value))
        out = []
        poly = np.array([0.0, 1.0])
        for _ in range(order + 1):
            out.append(P.polyval(sigma, poly))
            poly = P.polymul(P.polyder(poly), _LOGISTIC_STEP)
        return out
    if name in ('sin', 'cos'):
        cycle = [np.sin(value), np.cos(value), -np.sin(value), -np.cos(value)]
        shift = 0 if name == 'sin' else 1
        return [cycle[(k + shift) % 4] for k in range(order + 1)]
    raise ValueError(f"Unknown elementary function '{name}'")


def _compose(x, derivs):
    """Taylor composition f(x) from the derivatives of f at x's value."""
    delta = x - x.value
    result = x.constant_like(derivs[0])
    power = None
    for k in range(1, len(derivs)):
        power = delta if power is None else power * delta
        result = result + power * (derivs[k] / factorial(k))
    return result


class Jet4:
    """Bivariate truncated Taylor expansion in (r, phi)."""

    __array_ufunc__ = None

    def __init__(self, coeffs, base_point: Tuple, order: int = JET_ORDER):
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.shape[:2] != (order + 1, order + 1):
            raise ValueError(f"coefficient array must start with shape {(order + 1, order + 1)}")
        self.coeffs = coeffs
        self.base_point = base_point
        self.order = order

    def __repr__(self):
        return f'<Jet4 order={self.order} value={self.value!r}>'

    @property
    def batch_shape(self):
        return self.coeffs.shape[2:]

    @property
    def value(self):
        return self.coeffs[0, 0]

    def indices(self):
        for i in range(self.order + 1):
            for j in range(self.order + 1 - i):
                yield i, j

    def derivative(self, i: int, j: int):
        """Unscaled partial derivative d_r^i d_phi^j at the base point."""
        if i + j > self.order:
            raise ValueError(f'derivative ({i}, {j}) exceeds jet order {self.order}')
        return self.coeffs[i, j] * factorial(i) * factorial(j)

    def constant_like(self, value):
        value = _as_array(value)
        shape = np.broadcast_shapes(self.batch_shape, value.shape)
        coeffs = np.zeros((self.order + 1, self.order + 1) + shape, dtype=complex)
        coeffs[0, 0] = value
        return Jet4(coeffs, self.base_point, self.order)

    def _coerce(self, other):
        if isinstance(other, Jet4):
            if other.order != self.order:
                raise ValueError('jets of different truncation order')
            return other
        return self.constant_like(other)

    def __add__(self, other):
        other = self._coerce(other)
        return Jet4(self.coeffs + other.coeffs, self.base_point, self.order)

    __radd__ = __add__

    def __neg__(self):
        return Jet4(-self.coeffs, self.base_point, self.order)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Jet4):
            return Jet4(self.coeffs * _as_array(other), self.base_point, self.order)
        other = self._coerce(other)
        a, b = self.coeffs, other.coeffs
        shape = np.broadcast_shapes(a.shape[2:], b.shape[2:])
        out = np.zeros((self.order + 1, self.order + 1) + shape, dtype=complex)
        for i, j in self.indices():
            acc = 0
            for p in range(i + 1):
                for q in range(j + 1):
                    acc = acc + a[p, q] * b[i - p, j - q]
            out[i, j] = acc
        return Jet4(out, self.base_point, self.order)

    __rmul__ = __mul__

    def reciprocal(self):
        return jet_elementary('pow', self, a=-1)

    def __truediv__(self, other):
        if not isinstance(other, Jet4):
            return Jet4(self.coeffs / _as_array(other), self.base_point, self.order)
        if np.any(np.abs(other.value) == 0):
            raise JetDomainError('division by a jet with vanishing value', self.base_point)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, a):
        return jet_elementary('pow', self, a=a)

    @property
    def real(self):
        return Jet4(self.coeffs.real.astype(complex), self.base_point, self.order)

    @property
    def imag(self):
        return Jet4(self.coeffs.imag.astype(complex), self.base_point, self.order)

    def exp(self):
        return jet_elementary('exp', self)

    def log(self):
        return jet_elementary('log', self)


def _check_base(base):
    r = np.asarray(base[0], dtype=float)
    if np.any(r <= 0):
        raise JetDomainError('polar jets need r > 0', base)
    return r, np.asarray(base[1], dtype=float)


def jet_constant(value, base, order: int = JET_ORDER) -> Jet4:
    r, phi = _check_base(base)
    shape = np.broadcast_shapes(r.shape, phi.shape, np.shape(value))
    coeffs = np.zeros((order + 1, order + 1) + shape, dtype=complex)
    coeffs[0, 0] = value
    return Jet4(coeffs, (r, phi), order)


def jet_variable(which: str, base, order: int = JET_ORDER) -> Jet4:
    """Jet of the coordinate function r or phi."""
    r, phi = _check_base(base)
    shape = np.broadcast_shapes(r.shape, phi.shape)
    coeffs = np.zeros((order + 1, order + 1) + shape, dtype=complex)
    if which == 'r':
        coeffs[0, 0] = r
        if order >= 1:
            coeffs[1, 0] = 1.0
    elif which in ('phi', 'φ'):
        coeffs[0, 0] = phi
        if order >= 1:
            coeffs[0, 1] = 1.0
    else:
        raise ValueError(f"Unknown coordinate '{which}'")
    return Jet4(coeffs, (r, phi), order)


def jet_elementary(f: str, x, a=None):
    """Apply exp, log, pow(a), sin, cos or the logistic expit to a Jet4 or RadialSeries."""
    try:
        derivs = _elementary_derivatives(f, x.value, x.order, a)
    except JetDomainError as exc:
        raise JetDomainError(str(exc), x.base_point) from None
    return _compose(x, derivs)


class RadialSeries:
    """Univariate truncated Taylor series in r, arbitrary order."""

    __array_ufunc__ = None

    def __init__(self, coeffs, base_point, order: int):
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.shape[0] != order + 1:
            raise ValueError(f'series of order {order} needs {order + 1} coefficients')
        self.coeffs = coeffs
        self.base_point = base_point
        self.order = order

    @classmethod
    def variable(cls, r0, order: int):
        r0 = np.asarray(r0, dtype=float)
        coeffs = np.zeros((order + 1,) + r0.shape, dtype=complex)
        coeffs[0] = r0
        if order >= 1:
            coeffs[1] = 1.0
        return cls(coeffs, r0, order)

    @classmethod
    def polynomial(cls, poly_coeffs: Sequence, r0, order: int, center=0.0, scale=1.0):
        """Series of sum_k c_k ((r - center) / scale)^k by Horner's rule."""
        t = (cls.variable(r0, order) - center) / scale
        result = t.constant_like(0.0)
        for c in reversed(list(poly_coeffs)):
            result = result * t + c
        return result

    @property
    def value(self):
        return self.coeffs[0]

    @property
    def batch_shape(self):
        return self.coeffs.shape[1:]

    def derivative_value(self, k: int):
        return self.coeffs[k] * factorial(k)

    def constant_like(self, value):
        value = _as_array(value)
        shape = np.broadcast_shapes(self.batch_shape, value.shape)
        coeffs = np.zeros((self.order + 1,) + shape, dtype=complex)
        coeffs[0] = value
        return RadialSeries(coeffs, self.base_point, self.order)

    def truncate(self, order: int):
        return RadialSeries(self.coeffs[:order + 1], self.base_point, order)

    def _coerce(self, other):
        if isinstance(other, RadialSeries):
            order = min(self.order, other.order)
            return self.truncate(order), other.truncate(order)
        return self, self.constant_like(other)

    def __add__(self, other):
        a, b = self._coerce(other)
        return RadialSeries(a.coeffs + b.coeffs, a.base_point, a.order)

    __radd__ = __add__

    def __neg__(self):
        return RadialSeries(-self.coeffs, self.base_point, self.order)

    def __sub__(self, other):
        a, b = self._coerce(other)
        return RadialSeries(a.coeffs - b.coeffs, a.base_point, a.order)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, RadialSeries):
            return RadialSeries(self.coeffs * _as_array(other), self.base_point, self.order)
        a, b = self._coerce(other)
        shape = np.broadcast_shapes(a.coeffs.shape[1:], b.coeffs.shape[1:])
        out = np.zeros((a.order + 1,) + shape, dtype=complex)
        for k in range(a.order + 1):
            acc = 0
            for p in range(k + 1):
                acc = acc + a.coeffs[p] * b.coeffs[k - p]
            out[k] = acc
        return RadialSeries(out, a.base_point, a.order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, RadialSeries):
            return RadialSeries(self.coeffs / _as_array(other), self.base_point, self.order)
        return self * jet_elementary('pow', other, a=-1)

    def __rtruediv__(self, other):
        return jet_elementary('pow', self, a=-1) * other

    def __pow__(self, a):
        return jet_elementary('pow', self, a=a)

    def exp(self):
        return jet_elementary('exp', self)

    def log(self):
        return jet_elementary('log', self)

    def expit(self):
        return jet_elementary('expit', self)

    def derivative(self):
        """Series of the r-derivative, one order lower."""
        k = np.arange(1, self.order + 1).reshape((-1,) + (1,) * len(self.batch_shape))
        return RadialSeries(self.coeffs[1:] * k, self.base_point, self.order - 1)

    def laplacian_mode(self, ell: int):
        """Radial part of Delta(g(r) e^{i ell phi}): g'' + g'/r - ell^2 g / r^2."""
        d1 = self.derivative()
        d2 = d1.derivative()
        inv_r = 1.0 / RadialSeries.variable(np.real(self.base_point), self.order)
        return d2 + d1 * inv_r - self * inv_r * inv_r * ell ** 2

    def lift(self, base, variable: str = 'r', order: int = JET_ORDER) -> Jet4:
        """Embed as a Jet4 in r (or in phi when the series was built in phi)."""
        r, phi = _check_base(base)
        shape = np.broadcast_shapes(r.shape, phi.shape, self.batch_shape)
        coeffs = np.zeros((order + 1, order + 1) + shape, dtype=complex)
        for k in range(min(order, self.order) + 1):
            if variable == 'r':
                coeffs[k, 0] = self.coeffs[k]
            else:
                coeffs[0, k] = self.coeffs[k]
        return Jet4(coeffs, (r, phi), order)


@dataclass(frozen=True)
class LogJet:
    """Jet of log u split into log-amplitude and phase."""

    logamp: Jet4
    phase: Jet4

    @classmethod
    def from_log(cls, log_jet: Jet4) -> 'LogJet':
        return cls(log_jet.real, log_jet.imag)

    @property
    def log(self) -> Jet4:
        return self.logamp + self.phase * 1j

    @property
    def base_point(self):
        return self.logamp.base_point

    def log_modulus(self):
        return self.logamp.value.real

    def argument(self):
        return self.phase.value.real

    def normalized(self) -> Jet4:
        """Jet of u / u(base): value one, derivatives finite for any |u|."""
        log = self.log
        return (log - log.value).exp()

    def value(self):
        """u itself; only safe when the log-amplitude is moderate."""
        return np.exp(self.log.value)


def log_derivative_ratio(u: LogJet, operator) -> complex:
    """(L u) / u evaluated from logarithmic derivatives only."""
    return operator.apply(u.normalized())


def compose_radial(fn: Callable[[RadialSeries], RadialSeries], base, order: int = JET_ORDER) -> Jet4:
    """Jet of a radial function given as a RadialSeries builder."""
    r, _ = _check_base(base)
    return fn(RadialSeries.variable(r, order)).lift(base, 'r', order)
