"""Special functions and moment families used by the local expansions.

All expansion coefficients are built from ``exp(-c**2/4)``, ``erfc(c/2)`` and,
for some time integrals, ``E1``.  This module wraps the error function and the
exponential integral with explicit domain checks and provides the Hermite,
Gaussian-moment and incomplete-gamma moment families.
"""
import math

import numpy as np
from scipy import special

SQRT_PI = math.sqrt(math.pi)
EULER_GAMMA = 0.57721566490153286061

HERMITE_MAX = 16
Q_MIN, Q_MAX = -12, 12


class DomainError(ValueError):
    """Argument outside the domain of a special function."""


class UnsupportedOrderError(ValueError):
    """Requested order exceeds what is implemented."""


def _check_finite(x):
    if not np.all(np.isfinite(x)):
        raise DomainError("non-finite argument")


def erfc(x):
    """Complementary error function.

    Backed by the Cephes implementation in scipy (relative error below 1e-15
    on |x| <= 30; values under the double underflow threshold return 0).
    """
    _check_finite(x)
    return special.erfc(x)


def erf(x):
    _check_finite(x)
    return special.erf(x)


def exp_integral_e1(x):
    """Exponential integral E1(x) = int_x^inf exp(-t)/t dt for x > 0."""
    _check_finite(x)
    if np.any(np.asarray(x) <= 0):
        raise DomainError("E1 requires x > 0")
    return special.exp1(x)


def hermite_phys(n, x):
    """Physicists' Hermite polynomial H_n(x) by the three-term recurrence."""
    if n < 0 or n > HERMITE_MAX:
        raise UnsupportedOrderError("Hermite degree %d outside [0, %d]" % (n, HERMITE_MAX))
    x = np.asarray(x, dtype=float)
    h0 = np.ones_like(x)
    if n == 0:
        return h0 if h0.ndim else float(h0)
    h1 = 2.0 * x
    for k in range(1, n):
        h0, h1 = h1, 2.0 * x * h1 - 2.0 * k * h0
    return h1 if h1.ndim else float(h1)


def gaussian_moment_w(n):
    """w_n = 2*pi*n!/(n/2)! for even n and 0 for odd n.

    This is the value of  int int u^n exp(-eta^2) exp(-i eta u) du d eta  with
    the inner integral read as a Gaussian-regularised distribution.
    """
    if n < 0:
        raise DomainError("moment order must be non-negative")
    if n > 2 * HERMITE_MAX:
        raise UnsupportedOrderError("moment order too large")
    if n % 2:
        return 0.0
    return 2.0 * math.pi * math.factorial(n) / math.factorial(n // 2)


def fourier_gaussian_moment(n, c):
    """I_n(c) = int eta^n exp(-eta^2) exp(i eta c) d eta.

    Closed form sqrt(pi) (i/2)^n H_n(c/2) exp(-c^2/4).
    """
    if n < 0 or n > HERMITE_MAX:
        raise UnsupportedOrderError("I_n order %d outside [0, %d]" % (n, HERMITE_MAX))
    _check_finite(c)
    return SQRT_PI * (0.5j) ** n * hermite_phys(n, 0.5 * c) * np.exp(-0.25 * c * c)


def _upper_gamma_cf(a, x, tol=1e-16, maxiter=500):
    # modified Lentz evaluation of Gamma(a, x) for x > 2; valid for any real a
    tiny = 1e-300
    b = x + 1.0 - a
    cc = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, maxiter):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        cc = b + an / cc
        if abs(cc) < tiny:
            cc = tiny
        d = 1.0 / d
        delta = d * cc
        h *= delta
        if abs(delta - 1.0) < tol:
            return math.exp(-x + a * math.log(x)) * h
    raise ArithmeticError("incomplete gamma continued fraction did not converge")


def q_moment(p, c):
    """Q_p(c) = int_c^inf exp(-x^2) x^(-p) dx for integer p in [-12, 12].

    For c <= 2 the value comes from the base pair Q_0 = (sqrt(pi)/2) erfc(c),
    Q_1 = E1(c^2)/2 and the two-term recursion

        Q_{p-2} = (1-p)/2 Q_p + c^(1-p)/2 exp(-c^2).

    Running it downward (to p = -1, -2) is exact algebra; running it upward is
    the growing direction, harmless while c^(1-p) exp(-c^2) dominates Q_{p-2}.
    For c > 2 that dominance fails by cancellation, so Q_p = Gamma((1-p)/2, c^2)/2
    is evaluated directly by its continued fraction instead.
    """
    p = int(p)
    if p < Q_MIN or p > Q_MAX:
        raise UnsupportedOrderError("Q_p order %d outside [%d, %d]" % (p, Q_MIN, Q_MAX))
    _check_finite(c)
    if c <= 0:
        raise DomainError("Q_p requires c > 0")
    c = float(c)
    e = math.exp(-c * c)
    if p == 0:
        return 0.5 * SQRT_PI * float(erfc(c))
    if p == -1:
        return 0.5 * e
    if p < 0:
        k = p % 2
        q = 0.5 * e if k else 0.5 * SQRT_PI * float(erfc(c))
        k = -1 if k else 0
        while k > p:
            q = 0.5 * (1 - k) * q + 0.5 * c ** (1 - k) * e
            k -= 2
        return q
    if c > 2.0:
        return 0.5 * _upper_gamma_cf(0.5 * (1 - p), c * c)
    q = {0: 0.5 * SQRT_PI * float(erfc(c)), 1: 0.5 * float(exp_integral_e1(c * c))}
    for k in range(2, p + 1):
        q[k] = 2.0 / (k - 1) * (0.5 * c ** (1 - k) * e - q[k - 2])
    return q[p]


def q_recursion_residual(p, c):
    """Relative residual of the Q recursion at (p, c)."""
    lhs = q_moment(p - 2, c)
    rhs = 0.5 * (1 - p) * q_moment(p, c) + 0.5 * c ** (1 - p) * math.exp(-c * c)
    return abs(lhs - rhs) / max(abs(lhs), 1e-300)


def time_moment_gauss(a, c):
    """J(a) = int_0^1 tau^a exp(-c^2/(4 tau)) d tau for a in Z/2, c > 0 (or a > -1).

    Used by the closed-form residual kernels.  Half-integer a starts from
    J(-1/2) = 2 exp(-c^2/4) - sqrt(pi) c erfc(c/2); integer a from J(-1) = E1(c^2/4).
    Upward: J(a+1) = (exp(-c^2/4) - c^2/4 J(a)) / (a+2).
    """
    two_a = int(round(2 * a))
    if abs(2 * a - two_a) > 1e-12:
        raise DomainError("a must be a multiple of 1/2")
    g = math.exp(-0.25 * c * c)
    if two_a % 2:
        cur, val = -1, 2.0 * g - SQRT_PI * c * float(erfc(0.5 * c))
    else:
        if c == 0.0:
            if two_a <= -2:
                raise DomainError("J(a) diverges at c = 0 for a <= -1")
            return 1.0 / (a + 1)
        cur, val = -2, float(exp_integral_e1(0.25 * c * c))
    while cur < two_a:
        val = (g - 0.25 * c * c * val) / (cur / 2 + 2)
        cur += 2
    while cur > two_a:
        val = 4.0 / (c * c) * (g - (cur / 2 + 1) * val)
        cur -= 2
    return val
