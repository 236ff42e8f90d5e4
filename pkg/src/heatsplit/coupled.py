"""Coupled 2x2 system  -lap u1 + A u2 = f1,  -lap u2 + B u1 = f2  in the plane.

A = alpha . grad + alpha3 and B = beta . grad + beta3.  The Fourier symbol
(convention d/dx -> i xi) is

    M(xi) = [[|xi|^2, i alpha.xi + alpha3], [i beta.xi + beta3, |xi|^2]],

and the local part of the solution is u_L = int_0^eps e^{-M t} F dt.

Local expansions use the same frame as the scalar 2D module (x1 tangent,
x2 inward normal, kappa > 0 for a convex domain); the coupling vectors enter
through their frame components a1 = alpha . tangent, a2 = alpha . inward
normal (likewise b1, b2).  The coefficients were derived from the
physical-space series e^{-M t} = e^{t lap} sum_k (-t)^k N^k / k! with
N = [[0, A], [B, 0]]; they are real, so no imaginary residual can arise.
"""
from dataclasses import dataclass, field
from functools import lru_cache
import math

import numpy as np

from .specfun import SQRT_PI, UnsupportedOrderError
from .expansions2d import _ge, _series, UnsupportedConfigurationError


class InadmissibleCoefficientsError(ValueError):
    def __init__(self, report):
        super().__init__(report.message)
        self.report = report


class IntegrityError(ArithmeticError):
    pass


@dataclass(frozen=True)
class CouplingCoefficients:
    alpha: tuple = (0.0, 0.0)
    beta: tuple = (0.0, 0.0)
    alpha3: float = 0.0
    beta3: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(float(v) for v in self.alpha))
        object.__setattr__(self, "beta", tuple(float(v) for v in self.beta))
        object.__setattr__(self, "alpha3", float(self.alpha3))
        object.__setattr__(self, "beta3", float(self.beta3))
        if len(self.alpha) != 2 or len(self.beta) != 2:
            raise ValueError("alpha and beta must be 2-vectors")

    def swapped(self):
        return CouplingCoefficients(self.beta, self.alpha, self.beta3, self.alpha3)

    def local(self, tangent, normal):
        """Frame components (a1, a2, a3, b1, b2, b3) for tangent / inward normal."""
        al, be = np.array(self.alpha), np.array(self.beta)
        return (float(al @ tangent), float(al @ normal), self.alpha3,
                float(be @ tangent), float(be @ normal), self.beta3)


# ----------------------------------------------------------------------------
# symbol
# ----------------------------------------------------------------------------
def symbol_matrix(coef, xi):
    """M(xi); ``xi`` has shape (..., 2), result (..., 2, 2) complex."""
    xi = np.asarray(xi, dtype=float)
    out = np.zeros(xi.shape[:-1] + (2, 2), dtype=complex)
    q = np.sum(xi * xi, axis=-1)
    out[..., 0, 0] = q
    out[..., 1, 1] = q
    out[..., 0, 1] = 1j * (xi @ np.array(coef.alpha)) + coef.alpha3
    out[..., 1, 0] = 1j * (xi @ np.array(coef.beta)) + coef.beta3
    return out


def symbol_eigenvalues(coef, xi):
    """(lambda_+, lambda_-) = |xi|^2 +- sqrt((i alpha.xi + alpha3)(i beta.xi + beta3))."""
    xi = np.asarray(xi, dtype=float)
    q = np.sum(xi * xi, axis=-1)
    prod = (1j * (xi @ np.array(coef.alpha)) + coef.alpha3) * (1j * (xi @ np.array(coef.beta)) + coef.beta3)
    root = np.sqrt(prod + 0j)
    return q + root, q - root


@dataclass
class AdmissibilityReport:
    passed: bool
    method: str
    min_re_lambda: float = float("nan")
    min_abs_det: float = float("nan")
    offending_xi: tuple = None
    message: str = ""

    def __bool__(self):
        return self.passed


def _analytic_condition(coef):
    al, be = np.array(coef.alpha), np.array(coef.beta)
    if not coef.alpha3 * coef.beta3 < 0:
        return None
    if np.allclose(al, 0.0) and np.allclose(be, 0.0):
        return 0.0
    if np.allclose(be, 0.0) or np.allclose(al, 0.0):
        return None
    C = float(al @ be) / float(be @ be)
    if C > 0 and np.allclose(al, C * be, rtol=1e-12, atol=1e-14):
        return C
    return None


def ellipticity_check(coef, n_angles=64, n_radii=64, rmin=1e-3, rmax=1e3, require_invertible=True):
    """Admissibility of the coefficients.

    PASS analytically when alpha = C beta (C > 0, including alpha = beta = 0)
    and alpha3 beta3 < 0; the eigenvalues are then |xi|^2 plus or minus a purely
    imaginary number and det M never vanishes.  Otherwise Re lambda and |det M|
    are sampled on a log-radial grid plus xi = 0 ("sampled, not proven").
    ``require_invertible=False`` drops the det M(0) != 0 requirement, which only
    the history part needs.
    """
    C = _analytic_condition(coef)
    if C is not None:
        return AdmissibilityReport(True, "analytic", message="alpha = %.6g beta, alpha3*beta3 < 0" % C)
    th = 2 * math.pi * np.arange(n_angles) / n_angles
    rad = np.geomspace(rmin, rmax, n_radii)
    R, TH = np.meshgrid(rad, th, indexing="ij")
    xi = np.stack([R * np.cos(TH), R * np.sin(TH)], axis=-1).reshape(-1, 2)
    lp, lm = symbol_eigenvalues(coef, xi)
    re = np.minimum(lp.real, lm.real)
    det = np.abs(np.linalg.det(symbol_matrix(coef, xi)))
    det0 = abs(coef.alpha3 * coef.beta3)
    i = int(np.argmin(re))
    j = int(np.argmin(det))
    rep = AdmissibilityReport(True, "sampled, not proven", float(re[i]), float(min(det[j], det0)))
    if re[i] <= 0:
        rep.passed, rep.offending_xi = False, tuple(xi[i])
        rep.message = "Re lambda <= 0 at xi = (%.4g, %.4g)" % tuple(xi[i])
    elif require_invertible and det0 == 0.0:
        rep.passed, rep.offending_xi = False, (0.0, 0.0)
        rep.message = "M(0) is singular (alpha3*beta3 = 0)"
    elif require_invertible and det[j] <= 0:
        rep.passed, rep.offending_xi = False, tuple(xi[j])
        rep.message = "det M vanishes at xi = (%.4g, %.4g)" % tuple(xi[j])
    else:
        rep.message = "min Re lambda = %.3g on the sampled grid" % re[i]
    return rep


@lru_cache(maxsize=256)
def _gate(coef, require_invertible):
    return ellipticity_check(coef, require_invertible=require_invertible)


def require_admissible(coef, require_invertible=True):
    rep = _gate(coef, require_invertible)
    if not rep.passed:
        raise InadmissibleCoefficientsError(rep)
    return rep


# ----------------------------------------------------------------------------
# matrix exponential
# ----------------------------------------------------------------------------
_PADE6 = [1.0, 1 / 2, 5 / 44, 1 / 66, 1 / 792, 1 / 15840, 1 / 665280]


def expm_pade(A):
    """Scaling-and-squaring with the diagonal [6/6] Pade approximant (batched, square)."""
    A = np.asarray(A)
    n = A.shape[-1]
    norm = np.max(np.sum(np.abs(A), axis=-2), axis=-1)
    s = np.maximum(0, np.ceil(np.log2(np.maximum(norm, 1e-300) / 0.5))).astype(int)
    s = np.where(norm > 0, s, 0)
    X = A / (2.0 ** s)[..., None, None]
    I = np.broadcast_to(np.eye(n, dtype=X.dtype), X.shape)
    U = np.zeros_like(X)
    V = np.zeros_like(X)
    P = I.copy()
    for k, ck in enumerate(_PADE6):
        if k > 0:
            P = P @ X
        if k % 2:
            U = U + ck * P
        else:
            V = V + ck * P
    E = np.linalg.solve(V - U, V + U)
    smax = int(np.max(s)) if np.size(s) else 0
    for i in range(smax):
        sq = E @ E
        E = np.where((s > i)[..., None, None], sq, E)
    return E


def expm2(A, sep=1e-3):
    """2x2 matrix exponential.

    Closed form e^A = e^m (cosh(d) I + sinh(d)/d (A - m I)), m = tr A / 2,
    d^2 = m^2 - det A, where the eigenvalues are well separated (|d| > sep,
    relative to the scale of A); Pade scaling-and-squaring otherwise.
    """
    A = np.asarray(A, dtype=complex)
    m = 0.5 * (A[..., 0, 0] + A[..., 1, 1])
    det = A[..., 0, 0] * A[..., 1, 1] - A[..., 0, 1] * A[..., 1, 0]
    d = np.sqrt(m * m - det)
    scale = np.maximum(np.max(np.abs(A), axis=(-1, -2)), 1e-300)
    ok = np.abs(d) > sep * np.maximum(scale, 1.0)
    out = np.empty_like(A)
    if np.any(ok):
        Ao, mo, do = A[ok], m[ok], d[ok]
        I = np.eye(2)
        em = np.exp(mo)
        out[ok] = em[:, None, None] * (np.cosh(do)[:, None, None] * I
                                        + (np.sinh(do) / do)[:, None, None] * (Ao - mo[:, None, None] * I))
    if np.any(~ok):
        out[~ok] = expm_pade(A[~ok])
    return out


def factorization_remainder(coef, eta, z):
    """R(eta, z) with exp(-M(eta/z) z^2) = exp(-|eta|^2) expm(-R): the off-diagonal part."""
    eta = np.asarray(eta, dtype=float)
    R = np.zeros(eta.shape[:-1] + (2, 2), dtype=complex)
    R[..., 0, 1] = 1j * z * (eta @ np.array(coef.alpha)) + z * z * coef.alpha3
    R[..., 1, 0] = 1j * z * (eta @ np.array(coef.beta)) + z * z * coef.beta3
    return R


def local_symbol_integral(coef, xi, eps):
    """int_0^eps e^{-M(xi) t} dt, the top-right block of an augmented exponential."""
    M = symbol_matrix(coef, xi)
    aug = np.zeros(M.shape[:-2] + (4, 4), dtype=complex)
    aug[..., :2, :2] = -M * eps
    aug[..., :2, 2:] = eps * np.eye(2)
    return expm_pade(aug)[..., :2, 2:]


def history_symbol(coef, xi, eps):
    """M(xi)^{-1} e^{-M(xi) eps}."""
    M = symbol_matrix(coef, xi)
    return np.linalg.solve(M, expm2(-M * eps))


# ----------------------------------------------------------------------------
# local expansions; component 1 written out, component 2 by the swap symmetry
# ----------------------------------------------------------------------------
@dataclass
class CoupledJets:
    """Per-component density data plus the shared boundary jet.

    ``f1``/``f2`` map (m, n) to frame partials at the target; ``sigma1``/``sigma2``
    and ``mu1``/``mu2`` are graph-coordinate derivative sequences at b.
    """
    geom: object
    f1: dict = field(default_factory=dict)
    f2: dict = field(default_factory=dict)
    sigma1: tuple = ()
    sigma2: tuple = ()
    mu1: tuple = ()
    mu2: tuple = ()


def _seq(s, n=3):
    out = [0.0] * n
    for i, v in enumerate(list(s)[:n]):
        out[i] = v
    return out


def _vol_component(fs, fo, lc, geom, c):
    a1, a2, a3, b1, b2, b3 = lc
    k = geom.kappa
    c, G, E = _ge(c)
    g = lambda d, key: d.get(key, 0.0)
    fs00, fs01, fs20, fs02 = g(fs, (0, 0)), g(fs, (0, 1)), g(fs, (2, 0)), g(fs, (0, 2))
    fo00, fo10, fo01 = g(fo, (0, 0)), g(fo, (1, 0)), g(fo, (0, 1))
    sp_ = SQRT_PI
    q = (c ** 2 - 2 * c + 2) * (c ** 2 + 2 * c + 2)
    A2 = fs00 * (G * (c / (2 * sp_)) - E * ((c ** 2 + 2) / 4) + 1.0)
    A3 = (fs00 * (G * (k * (c ** 2 - 2) / (6 * sp_)) - E * (c ** 3 * k / 12))
          + fs01 * (G * (-(c ** 2 - 2) / (3 * sp_)) + E * (c ** 3 / 6))
          + fo00 * (G * (a2 * (c ** 2 - 2) / (6 * sp_)) - E * (a2 * c ** 3 / 12)))
    A4 = (fs00 * (G * (c * (c ** 2 - 2) * (a2 * b2 + 3 * k ** 2) / (24 * sp_)) - E * (c ** 4 * (a2 * b2 + 3 * k ** 2) / 48))
          + fs01 * (G * (-c * k * (c ** 2 - 2) / (6 * sp_)) + E * (c ** 4 * k / 12))
          + fs20 * (G * (-c * (c ** 2 - 2) / (24 * sp_)) + E * ((c ** 4 - 12) / 48) + 0.5)
          + fs02 * (G * (c * (c ** 2 - 2) / (8 * sp_)) - E * (q / 16) + 0.5)
          + fo00 * (G * (c * (c ** 2 - 2) * (2 * a2 * k + a3) / (24 * sp_))
                    - E * ((2 * a2 * c ** 4 * k + a3 * c ** 4 - 12 * a3) / 48) - 0.5 * a3)
          + fo10 * (G * (a1 * c * (c ** 2 - 2) / (24 * sp_)) - E * (a1 * (c ** 4 - 12) / 48) - 0.5 * a1)
          + fo01 * (G * (-a2 * c * (c ** 2 - 2) / (8 * sp_)) + E * (a2 * q / 16) - 0.5 * a2))
    return [A2, A3, A4]


def _slp_component(ss, so, lc, geom, c):
    a1, a2, a3, b1, b2, b3 = lc
    k, g3, g4 = geom.kappa, geom.g3, geom.g4
    ss0, ss1, ss2 = _seq(ss)
    so0, so1, so2 = _seq(so)
    c, G, E = _ge(c)
    sp_ = SQRT_PI
    A1 = ss0 * (G / sp_ - E * (c / 2))
    A2 = (ss0 * (G * (c * k / (2 * sp_)) - E * (c ** 2 * k / 4))
          + so0 * (G * (a2 * c / (2 * sp_)) - E * (a2 * c ** 2 / 4)))
    A3 = (ss0 * (G * ((2 * a2 * b2 * c ** 2 - a2 * b2 + 4 * c ** 2 * k ** 2 + k ** 2) / (12 * sp_))
                 - E * (c ** 3 * (a2 * b2 + 2 * k ** 2) / 12))
          + ss2 * (G * (-(c ** 2 - 2) / (6 * sp_)) + E * (c ** 3 / 12))
          + so0 * (G * ((2 * a2 * c ** 2 * k - a2 * k + a3 * c ** 2 - 2 * a3) / (6 * sp_))
                   - E * (c ** 3 * (2 * a2 * k + a3) / 12))
          + so1 * (G * (a1 * (c ** 2 - 2) / (6 * sp_)) - E * (a1 * c ** 3 / 12)))
    A4 = (ss0 * (G * (-c * (a1 * b1 * c ** 2 * k - 2 * a1 * b1 * k - 3 * a2 * b2 * c ** 2 * k + 3 * a2 * b2 * k
                            - a2 * b3 * c ** 2 + 2 * a2 * b3 - a3 * b2 * c ** 2 + 2 * a3 * b2 + c ** 2 * g4
                            - 9 * c ** 2 * k ** 3 - 2 * g4 + 3 * k ** 3) / (24 * sp_))
                 + E * (c ** 4 * (a1 * b1 * k - 3 * a2 * b2 * k - a2 * b3 - a3 * b2 + g4 - 9 * k ** 3) / 48))
          + ss1 * (G * (c * (c ** 2 - 2) * (a1 * b2 + a2 * b1 - 4 * g3) / (24 * sp_))
                   - E * (c ** 4 * (a1 * b2 + a2 * b1 - 4 * g3) / 48))
          + ss2 * (G * (-c * k * (c ** 2 - 2) / (4 * sp_)) + E * (c ** 4 * k / 8))
          + so0 * (G * (c * (2 * a1 * c ** 2 * g3 - 4 * a1 * g3 + a2 ** 2 * b2 * c ** 2 - a2 ** 2 * b2
                             + 7 * a2 * c ** 2 * k ** 2 - 5 * a2 * k ** 2 + 2 * a3 * c ** 2 * k - 4 * a3 * k) / (24 * sp_))
                   - E * (c ** 4 * (2 * a1 * g3 + a2 ** 2 * b2 + 7 * a2 * k ** 2 + 2 * a3 * k) / 48))
          + so1 * (G * (a1 * c * k * (c ** 2 - 2) / (4 * sp_)) - E * (a1 * c ** 4 * k / 8))
          + so2 * (G * (-a2 * c * (c ** 2 - 2) / (12 * sp_)) + E * (a2 * c ** 4 / 24)))
    return [A1, A2, A3, A4]


def _dlp_component(ss, so, lc, geom, c):
    """Coefficients of u_L[div(nu mu delta)], i.e. minus the canonical double layer."""
    a1, a2, a3, b1, b2, b3 = lc
    k, g3, g4 = geom.kappa, geom.g3, geom.g4
    ss0, ss1, ss2 = _seq(ss)
    so0, so1, so2 = _seq(so)
    c, G, E = _ge(c)
    sp_ = SQRT_PI
    A0 = 0.5 * ss0 * E
    A1 = (ss0 * (G * (k / (2 * sp_)))
          + so0 * (G * (-a2 / (2 * sp_)) + E * (a2 * c / 2)))
    A2 = (ss0 * (G * (-3 * c * (a2 * b2 - k ** 2) / (8 * sp_)) + E * (a2 * b2 * c ** 2 / 4))
          + ss2 * (G * (c / (2 * sp_)) - E * (c ** 2 / 4))
          + so0 * (G * (-c * (a2 * k + 2 * a3) / (4 * sp_)) + E * (c ** 2 * (a2 * k + a3) / 4))
          + so1 * (G * (-a1 * c / (2 * sp_)) + E * (a1 * c ** 2 / 4)))
    A3 = (ss0 * (G * ((8 * a1 * b1 * c ** 2 * k - 4 * a1 * b1 * k - 13 * a2 * b2 * c ** 2 * k + 2 * a2 * b2 * k
                       - 8 * a2 * b3 * c ** 2 + 4 * a2 * b3 - 8 * a3 * b2 * c ** 2 + 4 * a3 * b2
                       + 15 * c ** 2 * k ** 3 + 12 * g4 - 30 * k ** 3) / (48 * sp_))
                 - E * (c ** 3 * (a1 * b1 * k - 2 * a2 * b2 * k - a2 * b3 - a3 * b2) / 12))
          + ss1 * (G * (-(2 * a1 * b2 * c ** 2 - a1 * b2 + 2 * a2 * b1 * c ** 2 - a2 * b1
                          - 2 * c ** 2 * g3 - 8 * g3) / (12 * sp_))
                   + E * (c ** 3 * (a1 * b2 + a2 * b1 - g3) / 12))
          + ss2 * (G * (k * (c ** 2 + 1) / (2 * sp_)) - E * (c ** 3 * k / 4))
          + so0 * (G * (-(8 * a1 * c ** 2 * g3 + 8 * a1 * g3 + 7 * a2 ** 2 * b2 * c ** 2 - 2 * a2 ** 2 * b2
                          + 15 * a2 * c ** 2 * k ** 2 + 6 * a2 * k ** 2 + 8 * a3 * c ** 2 * k + 8 * a3 * k) / (48 * sp_))
                   + E * (c ** 3 * (a1 * g3 + a2 ** 2 * b2 + 3 * a2 * k ** 2 + a3 * k) / 12))
          + so1 * (G * (-a1 * k * (4 * c ** 2 + 1) / (6 * sp_)) + E * (a1 * c ** 3 * k / 3))
          + so2 * (G * (a2 * (2 * c ** 2 - 1) / (6 * sp_)) - E * (a2 * c ** 3 / 6)))
    return [A0, A1, A2, A3]


def _swap_local(lc):
    a1, a2, a3, b1, b2, b3 = lc
    return (b1, b2, b3, a1, a2, a3)


def _frame_coef(coef, geom):
    t = getattr(geom, "tangent", np.array([1.0, 0.0]))
    n = getattr(geom, "normal", np.array([0.0, 1.0]))
    return coef.local(np.asarray(t), np.asarray(n))


def coupled_vol_coefficients(jets, coef, c):
    lc = _frame_coef(coef, jets.geom)
    return (_vol_component(jets.f1, jets.f2, lc, jets.geom, c),
            _vol_component(jets.f2, jets.f1, _swap_local(lc), jets.geom, c))


def coupled_slp_coefficients(jets, coef, c):
    lc = _frame_coef(coef, jets.geom)
    return (_slp_component(jets.sigma1, jets.sigma2, lc, jets.geom, c),
            _slp_component(jets.sigma2, jets.sigma1, _swap_local(lc), jets.geom, c))


def coupled_dlp_coefficients(jets, coef, c):
    lc = _frame_coef(coef, jets.geom)
    return (_dlp_component(jets.mu1, jets.mu2, lc, jets.geom, c),
            _dlp_component(jets.mu2, jets.mu1, _swap_local(lc), jets.geom, c))


def _check_local(coef, sp, pmax, name):
    if sp.P > pmax:
        raise UnsupportedOrderError("coupled %s is available through P = %d" % (name, pmax))
    require_admissible(coef, require_invertible=False)


def coupled_vol_local(jets, coef, sp, side=-1):
    """[V_L^(1), V_L^(2)] for an interior target, P in {2, 3, 4}."""
    _check_local(coef, sp, 4, "volume potential")
    if side is not None and side > 0:
        raise UnsupportedConfigurationError("volume expansion needs an interior target")
    A, B = coupled_vol_coefficients(jets, coef, sp.c)
    return np.array([_series(A, sp, 2), _series(B, sp, 2)])


def coupled_slp_local(jets, coef, sp):
    """Coupled single layer, P in {1, .., 4} (sign of the positive kernel)."""
    _check_local(coef, sp, 4, "single layer")
    A, B = coupled_slp_coefficients(jets, coef, sp.c)
    return np.array([_series(A, sp, 1), _series(B, sp, 1)])


def coupled_dlp_local(jets, coef, sp, convention="table", report=False, rtol=1e-8):
    """Coupled double layer, P in {0, .., 3}.

    ``convention="table"`` returns u_L[div(nu mu delta)] (A_0 = +erfc(c/2) mu / 2),
    ``"canonical"`` its negative.  The sum is accumulated in complex arithmetic
    and the imaginary residual is checked against ``rtol``; with ``report`` the
    residual is returned alongside the value.
    """
    _check_local(coef, sp, 3, "double layer")
    sign = {"table": 1.0, "canonical": -1.0}[convention]
    A, B = coupled_dlp_coefficients(jets, coef, sp.c)
    val = np.array([_series([complex(a) if np.ndim(a) == 0 else np.asarray(a, dtype=complex) for a in A], sp, 0),
                    _series([complex(b) if np.ndim(b) == 0 else np.asarray(b, dtype=complex) for b in B], sp, 0)])
    resid = float(np.max(np.abs(val.imag)))
    mag = float(np.max(np.abs(val.real)))
    if resid > rtol * max(mag, 1e-300):
        raise IntegrityError("imaginary residual %.3e exceeds tolerance" % resid)
    out = sign * val.real
    return (out, resid) if report else out
