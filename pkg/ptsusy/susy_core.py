"""
Superpotentials U = a + ib under the reality constraint a = b'/(2b) and the
partner pair V1,2 = U^2 +- U' they generate.

V1 = (a^2 - b^2 + a') + 2ib'   (complex, PT symmetric when b is even)
V2 =  a^2 - b^2 - a'           (real)

The Scarf II member a = -(mu/2) tanh(mu x), b = lambda sech(mu x) is provided
in closed form.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ptsusy.errors import ConstraintError, ParameterError

log = logging.getLogger(__name__)

CHECK_POINTS = 512
CHECK_INTERVAL = (-10.0, 10.0)
VALUE_FLOOR = 1e-300
CONSTRAINT_TOL = 1e-12
DERIVATIVE_TOL = 1e-6
DERIVATIVE_STEP = 1e-4


def sech(y):
    """
    Overflow-free sech.
    """
    t = np.exp(-np.abs(y))
    return 2.0 * t / (1.0 + t * t)


def _evaluate(fn, x):
    # constant callables may return a scalar for an array argument
    x = np.asarray(x, dtype=float)
    return np.asarray(fn(x), dtype=float) + np.zeros_like(x)


@dataclass(frozen=True)
class SmoothFunction:
    """
    A real function together with its analytic first and second derivatives.
    All three callables must accept numpy arrays.
    """

    value: Callable
    d1: Callable
    d2: Callable

    @staticmethod
    def constant(c):
        return SmoothFunction(value=lambda x: c + 0.0 * np.asarray(x),
                              d1=lambda x: 0.0 * np.asarray(x),
                              d2=lambda x: 0.0 * np.asarray(x))

    def derivative_mismatch(self, x, step=DERIVATIVE_STEP):
        """
        Largest deviation of d1 and d2 from central differences of value and
        d1, relative to the largest sampled magnitude. O(step^2) for
        consistent derivatives.
        """
        x = np.asarray(x, dtype=float)
        f = _evaluate(self.value, x)
        f1 = _evaluate(self.d1, x)
        f2 = _evaluate(self.d2, x)
        fd1 = (_evaluate(self.value, x + step) - _evaluate(self.value, x - step)) / (2 * step)
        fd2 = (_evaluate(self.d1, x + step) - _evaluate(self.d1, x - step)) / (2 * step)
        scale = max(1.0, float(np.max(np.abs(f))), float(np.max(np.abs(f1))),
                    float(np.max(np.abs(f2))))
        return (float(np.max(np.abs(fd1 - f1))) / scale,
                float(np.max(np.abs(fd2 - f2))) / scale)


@dataclass(frozen=True)
class Superpotential:
    """
    U(x) = a(x) + i b(x). 'sign' records whether b was supplied
    negative-definite (-1) or positive-definite (+1).
    """

    a: Callable
    a_prime: Callable
    b: Callable
    b_prime: Callable
    sign: int = 1
    interval: tuple = CHECK_INTERVAL

    def u(self, x):
        return _evaluate(self.a, x) + 1j * _evaluate(self.b, x)

    def u_prime(self, x):
        return _evaluate(self.a_prime, x) + 1j * _evaluate(self.b_prime, x)

    def constraint_residual(self, x):
        """
        max |a - b'/(2b)| / (1 + |a|) over the sampled points.
        """
        a = _evaluate(self.a, x)
        ratio = _evaluate(self.b_prime, x) / (2.0 * _evaluate(self.b, x))
        return float(np.max(np.abs(a - ratio) / (1.0 + np.abs(a))))


@dataclass(frozen=True)
class PotentialPair:
    """
    Partner potentials: complex v1, real v2, and u_prime with
    v1 - v2 = 2 u_prime.
    """

    v1: Callable
    v2: Callable
    u_prime: Callable
    superpotential: Superpotential
    description: str = ""
    params: Optional["ScarfParams"] = None


@dataclass(frozen=True)
class ScarfParams:
    """
    Parameters of b = lambda sech(mu x). 'lam' is lambda.

    mu == lam is refused unless allow_mu_eq_lambda is set.
    """

    mu: float
    lam: float
    allow_mu_eq_lambda: bool = field(default=False, compare=False)

    def __post_init__(self):
        for name, value in (("mu", self.mu), ("lambda", self.lam)):
            if not math.isfinite(value) or value == 0:
                raise ParameterError("{} must be a non-zero finite number, got {!r}".format(name, value))
        if self.mu == self.lam and not self.allow_mu_eq_lambda:
            raise ParameterError("mu == lambda ({}) is excluded; pass allow_mu_eq_lambda to bypass"
                                 .format(self.mu))

    @property
    def ratio(self):
        return self.lam / self.mu

    @property
    def continuum_edge(self):
        return self.mu ** 2 / 4.0

    @property
    def coupling(self):
        """lambda_bar (lambda_bar - 1) = lambda^2/mu^2 - 1/4."""
        return self.ratio ** 2 - 0.25

    @property
    def exceptional(self):
        """
        True when lambda/mu is an integer: the zero mode is then
        self-orthogonal under the bilinear product and E = 0 is an
        exceptional point of H1.
        """
        return abs(self.ratio - round(self.ratio)) < 1e-12


def make_superpotential(f, interval=CHECK_INTERVAL, n_checks=CHECK_POINTS,
                        floor=VALUE_FLOOR, derivative_tol=DERIVATIVE_TOL):
    """
    Build U from b = f under a = b'/(2b).

    f must not change sign on the check grid; a negative-definite f is
    accepted and recorded through Superpotential.sign.
    """
    lo, hi = interval
    if not hi > lo:
        raise ParameterError("empty check interval {}".format(interval))
    xs = np.linspace(lo, hi, n_checks)

    values = _evaluate(f.value, xs)
    if not np.all(np.isfinite(values)):
        raise ConstraintError("b(x) is not finite on the check grid")
    sign = -1 if values[0] < 0 else 1
    if np.any(sign * values <= floor):
        worst = int(np.argmin(sign * values))
        raise ConstraintError("b(x) vanishes or changes sign near x = {:.6g} (b = {:.3g}); "
                              "a = b'/(2b) is singular there".format(xs[worst], values[worst]))

    d1_error, d2_error = f.derivative_mismatch(xs)
    if d1_error > derivative_tol or d2_error > derivative_tol:
        raise ConstraintError("derivatives inconsistent with b(x): d1 error {:.3g}, d2 error {:.3g}"
                              .format(d1_error, d2_error))

    def a(x):
        return _evaluate(f.d1, x) / (2.0 * _evaluate(f.value, x))

    def a_prime(x):
        v = _evaluate(f.value, x)
        g = _evaluate(f.d1, x)
        return (_evaluate(f.d2, x) * v - g * g) / (2.0 * v * v)

    U = Superpotential(a=a, a_prime=a_prime, b=f.value, b_prime=f.d1,
                       sign=sign, interval=(lo, hi))
    residual = U.constraint_residual(xs)
    if not residual <= CONSTRAINT_TOL:
        raise ConstraintError("reality constraint violated: residual {:.3g}".format(residual))
    log.debug("[*] superpotential built, sign {:+d}, constraint residual {:.2e}".format(sign, residual))
    return U


def partner_potentials(U, description="", params=None):
    """
    V1 = (a^2 - b^2 + a') + 2ib' and V2 = a^2 - b^2 - a'.
    """

    def v1(x):
        a = _evaluate(U.a, x)
        b = _evaluate(U.b, x)
        return (a * a - b * b + _evaluate(U.a_prime, x)) + 2j * _evaluate(U.b_prime, x)

    def v2(x):
        a = _evaluate(U.a, x)
        b = _evaluate(U.b, x)
        return a * a - b * b - _evaluate(U.a_prime, x)

    return PotentialPair(v1=v1, v2=v2, u_prime=U.u_prime, superpotential=U,
                         description=description, params=params)


def lambda_bar(p):
    """
    Larger root 1/2 + |lambda/mu| of lambda_bar (lambda_bar - 1) = lambda^2/mu^2 - 1/4.
    """
    return 0.5 + abs(p.ratio)


def scarf2_superpotential(p):
    mu, lam = p.mu, p.lam

    def a(x):
        return -0.5 * mu * np.tanh(mu * np.asarray(x, dtype=float))

    def a_prime(x):
        return -0.5 * mu * mu * sech(mu * np.asarray(x, dtype=float)) ** 2

    def b(x):
        return lam * sech(mu * np.asarray(x, dtype=float))

    def b_prime(x):
        y = mu * np.asarray(x, dtype=float)
        return -lam * mu * sech(y) * np.tanh(y)

    return Superpotential(a=a, a_prime=a_prime, b=b, b_prime=b_prime,
                          sign=1 if lam > 0 else -1,
                          interval=(-10.0 / abs(mu), 10.0 / abs(mu)))


def scarf2_potentials(p):
    """
    Closed forms

    V1 = mu^2/4 - mu^2 [lb(lb-1) + 1] sech^2 - 2i lambda mu sech tanh
    V2 = mu^2/4 - mu^2 lb(lb-1) sech^2
    """
    mu, lam = p.mu, p.lam
    depth1 = mu * mu * (p.coupling + 1.0)
    depth2 = mu * mu * p.coupling
    edge = p.continuum_edge

    def v1(x):
        y = mu * np.asarray(x, dtype=float)
        s = sech(y)
        return (edge - depth1 * s * s) - 2j * lam * mu * s * np.tanh(y)

    def v2(x):
        s = sech(mu * np.asarray(x, dtype=float))
        return edge - depth2 * s * s

    U = scarf2_superpotential(p)
    return PotentialPair(v1=v1, v2=v2, u_prime=U.u_prime, superpotential=U,
                         description="scarf2 mu={!r} lambda={!r}".format(mu, lam),
                         params=p)
