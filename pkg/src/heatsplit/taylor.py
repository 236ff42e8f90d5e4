"""Truncated multivariate power series, vectorised over a batch of points.

A ``TPS`` holds Taylor coefficients c_alpha for all multi-indices with total
degree <= order, so that f(x0 + h) = sum_alpha c_alpha h^alpha + O(|h|^(order+1)).
Coefficient arrays have shape (ncoef,) + batch_shape.  One mechanism serves
graph jets (composition, reversion), density jets and forward-mode derivatives
of closed-form fields.
"""
from functools import lru_cache
from itertools import product
import math

import numpy as np


@lru_cache(None)
def multi_indices(nvar, order):
    """Multi-indices of total degree <= order, graded then reverse-lexicographic."""
    out = []
    for deg in range(order + 1):
        out.extend(sorted((a for a in product(range(deg + 1), repeat=nvar) if sum(a) == deg), reverse=True))
    return tuple(out)


@lru_cache(None)
def _index(nvar, order):
    return {a: i for i, a in enumerate(multi_indices(nvar, order))}


@lru_cache(None)
def _mul_table(nvar, order):
    idx = multi_indices(nvar, order)
    pos = _index(nvar, order)
    I, J, K = [], [], []
    for i, a in enumerate(idx):
        for j, b in enumerate(idx):
            s = tuple(x + y for x, y in zip(a, b))
            if sum(s) <= order:
                I.append(i)
                J.append(j)
                K.append(pos[s])
    return np.array(I), np.array(J), np.array(K)


@lru_cache(None)
def _degrees(nvar, order):
    return np.array([sum(a) for a in multi_indices(nvar, order)])


class TPS:
    __array_priority__ = 100

    def __init__(self, coef, nvar, order):
        self.coef = np.asarray(coef)
        self.nvar = nvar
        self.order = order

    # construction -----------------------------------------------------------
    @classmethod
    def constant(cls, value, nvar, order):
        value = np.asarray(value)
        coef = np.zeros((len(multi_indices(nvar, order)),) + value.shape, dtype=np.result_type(value, float))
        coef[0] = value
        return cls(coef, nvar, order)

    @classmethod
    def variable(cls, k, value, nvar, order):
        t = cls.constant(value, nvar, order)
        if order >= 1:
            unit = tuple(1 if i == k else 0 for i in range(nvar))
            t.coef[_index(nvar, order)[unit]] = 1.0
        return t

    @classmethod
    def variables(cls, values, order):
        n = len(values)
        return [cls.variable(k, v, n, order) for k, v in enumerate(values)]

    def _like(self, coef):
        return TPS(coef, self.nvar, self.order)

    @property
    def batch_shape(self):
        return self.coef.shape[1:]

    @property
    def value(self):
        return self.coef[0]

    def __getitem__(self, alpha):
        """Taylor coefficient for multi-index alpha (not the derivative)."""
        return self.coef[_index(self.nvar, self.order)[tuple(alpha)]]

    def derivative(self, alpha):
        """Partial derivative d^alpha f at the expansion point."""
        return self[alpha] * math.prod(math.factorial(a) for a in alpha)

    def partial(self, k):
        """d/dh_k as a series of one order less."""
        if self.order < 1:
            raise ValueError("cannot differentiate an order-0 series")
        pos = _index(self.nvar, self.order)
        rows, fac = [], []
        for a in multi_indices(self.nvar, self.order - 1):
            b = list(a)
            b[k] += 1
            rows.append(pos[tuple(b)])
            fac.append(b[k])
        fac = np.array(fac, dtype=float).reshape((-1,) + (1,) * len(self.batch_shape))
        return TPS(self.coef[rows] * fac, self.nvar, self.order - 1)

    def truncate(self, order):
        idx = multi_indices(self.nvar, self.order)
        keep = [i for i, a in enumerate(idx) if sum(a) <= order]
        return TPS(self.coef[keep], self.nvar, order)

    def copy(self):
        return self._like(self.coef.copy())

    # arithmetic -------------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, TPS):
            return other
        return TPS.constant(np.broadcast_to(other, self.batch_shape) if np.ndim(other) else other, self.nvar, self.order)

    def __add__(self, other):
        if isinstance(other, TPS):
            return self._like(self.coef + other.coef)
        coef = self.coef.astype(np.result_type(self.coef, other), copy=True)
        coef[0] = coef[0] + other
        return self._like(coef)

    __radd__ = __add__

    def __neg__(self):
        return self._like(-self.coef)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, TPS):
            return self._like(self.coef * np.asarray(other))
        I, J, K = _mul_table(self.nvar, self.order)
        prod_ = self.coef[I] * other.coef[J]
        out = np.zeros((self.coef.shape[0],) + prod_.shape[1:], dtype=prod_.dtype)
        np.add.at(out, K, prod_)
        return self._like(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, TPS):
            return self._like(self.coef / np.asarray(other))
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, (int, np.integer)) and p >= 0:
            out = TPS.constant(np.ones(self.batch_shape), self.nvar, self.order)
            base = self
            while p:
                if p & 1:
                    out = out * base
                p >>= 1
                if p:
                    base = base * base
            return out
        a0 = self.value
        derivs = [a0 ** p]
        coef = 1.0
        for k in range(1, self.order + 1):
            coef *= (p - k + 1)
            derivs.append(coef * a0 ** (p - k))
        return self._apply(derivs)

    # univariate functions -----------------------------------------------------
    def _apply(self, derivs):
        """f(self) given [f(a0), f'(a0), ...] up to the series order."""
        h = self._like(self.coef.copy())
        h.coef[0] = 0
        out = TPS.constant(np.asarray(derivs[0]) * np.ones(self.batch_shape), self.nvar, self.order)
        out = out._like(out.coef.astype(np.result_type(out.coef, h.coef)))
        hk = None
        for k in range(1, self.order + 1):
            hk = h if hk is None else hk * h
            out = out + hk * (np.asarray(derivs[k]) / math.factorial(k))
        return out

    def reciprocal(self):
        a0 = self.value
        return self._apply([(-1) ** k * math.factorial(k) / a0 ** (k + 1) for k in range(self.order + 1)])

    def exp(self):
        e = np.exp(self.value)
        return self._apply([e] * (self.order + 1))

    def sin(self):
        s, c = np.sin(self.value), np.cos(self.value)
        return self._apply([(s, c, -s, -c)[k % 4] for k in range(self.order + 1)])

    def cos(self):
        s, c = np.sin(self.value), np.cos(self.value)
        return self._apply([(c, -s, -c, s)[k % 4] for k in range(self.order + 1)])

    def sqrt(self):
        return self ** 0.5

    def log(self):
        a0 = self.value
        d = [np.log(a0)] + [(-1) ** (k - 1) * math.factorial(k - 1) / a0 ** k for k in range(1, self.order + 1)]
        return self._apply(d)

    def arctan(self):
        # derivatives of atan from the series of 1/(1+x^2)
        a0 = self.value
        x = TPS.variable(0, a0, 1, max(self.order - 1, 0))
        inv = (1 + x * x).reciprocal()
        d = [np.arctan(a0)] + [inv.derivative((k - 1,)) for k in range(1, self.order + 1)]
        return self._apply(d)

    # composition ----------------------------------------------------------------
    def compose(self, inner):
        """self(inner - inner(0)) for a list of nvar series in a common set of variables.

        ``self`` is read as a polynomial in shifts h_k = inner_k - inner_k(0).
        """
        ref = inner[0]
        hs = []
        for g in inner:
            h = g.copy()
            h.coef[0] = 0
            hs.append(h)
        out = TPS.constant(np.zeros(ref.batch_shape), ref.nvar, ref.order)
        powers = [[TPS.constant(np.ones(ref.batch_shape), ref.nvar, ref.order)] for _ in hs]
        for k, h in enumerate(hs):
            for _ in range(self.order):
                powers[k].append(powers[k][-1] * h)
        for i, a in enumerate(multi_indices(self.nvar, self.order)):
            if not np.any(self.coef[i]):
                continue
            term = powers[0][a[0]]
            for k in range(1, self.nvar):
                term = term * powers[k][a[k]]
            out = out + term * self.coef[i]
        return out


def revert(maps):
    """Invert a near-identity-free map X = F(h) with F(0) = 0 (scalar batch only).

    ``maps`` is a list of n series in n variables.  Returns series h_k(X).
    """
    n = len(maps)
    order = maps[0].order
    A = np.array([[m[tuple(1 if j == k else 0 for j in range(n))] for k in range(n)] for m in maps], dtype=float)
    Ainv = np.linalg.inv(A)
    X = TPS.variables([0.0] * n, order)
    nonlin = []
    for m in maps:
        q = m.copy()
        q.coef[0] = 0
        q.coef[_degrees(n, order) == 1] = 0
        nonlin.append(q)
    h = [sum((X[j] * Ainv[k, j] for j in range(n)), TPS.constant(0.0, n, order)) for k in range(n)]
    for _ in range(order):
        Nh = [q.compose(h) for q in nonlin]
        h = [sum(((X[j] - Nh[j]) * Ainv[k, j] for j in range(n)), TPS.constant(0.0, n, order)) for k in range(n)]
    return h


def _dispatch(name, npfunc):
    def f(x):
        if isinstance(x, TPS):
            return getattr(x, name)()
        return npfunc(x)
    f.__name__ = name
    return f


exp = _dispatch("exp", np.exp)
sin = _dispatch("sin", np.sin)
cos = _dispatch("cos", np.cos)
sqrt = _dispatch("sqrt", np.sqrt)
log = _dispatch("log", np.log)
arctan = _dispatch("arctan", np.arctan)
