"""Kernel construction: angular window, Poisson kernel, colatitude profiles.

The directional kernels are separable products of a colatitude profile and
a difference-of-Gaussians angular window,

    Omega(theta, phi) = omega_rho(theta) * angular_window(tau, phi)
    Upsilon(theta, phi) = upsilon_rho(theta) * angular_window(tau, phi)

where omega_rho comes from the first and upsilon_rho from the second
radial derivative of the Poisson kernel, damped by sin^5(theta). Both
profiles have an equivalent Legendre series and rational closed form, and
an expansion in first-order associated Legendre functions whose
coefficients (beta_l for omega, gamma_l for upsilon) are rational in l and
polynomial in r = exp(-rho).
"""

from dataclasses import dataclass
from fractions import Fraction
from math import fsum

import numpy as np

from .sphfn import legendre_P_all

# smallest supported scale: the rational forms lose accuracy below this
RHO_MIN = 1e-4

FAMILIES = ("omega", "upsilon")
# nominal vanishing order per family (degrees l <= order are treated as
# invisible by the analysis); the measured degree-1 content of upsilon is
# in fact nonzero, see upsilon_expansion_coefficient(1, r)
FAMILY_ORDER = {"omega": 0, "upsilon": 1}


@dataclass
class WaveletSpec:
    """One kernel: family tag, scale rho > 0, angular selectivity tau >= 1."""
    family: str
    rho: float
    tau: float

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError("family must be one of %s" % (FAMILIES,))
        if not self.rho > 0:
            raise ValueError("scale must be positive")
        if not self.tau >= 1:
            raise ValueError("selectivity must be at least 1")

    @property
    def r(self):
        return np.exp(-self.rho)

    @property
    def order(self):
        return FAMILY_ORDER[self.family]


# ---------------------------------------------------------------------------
# angular window

def dog_window(tau, phi):
    """Difference of opposed Gaussians: exp(-t^2 p^2/2) - exp(-t^2 (p-pi)^2/2)."""
    phi = np.asarray(phi, dtype=float)
    v = (np.exp(-0.5 * tau * tau * phi ** 2)
         - np.exp(-0.5 * tau * tau * (phi - np.pi) ** 2))
    return v if v.ndim else float(v)


def _periodization_count(tau):
    # tail of the dropped Gaussians below 1e-16: tau^2 (2 pi J - pi)^2 / 2 > 38
    return max(2, int(np.ceil((np.sqrt(76.0) / tau + np.pi) / (2.0 * np.pi))))


def angular_window(tau, phi):
    """2 pi periodization of the difference-of-Gaussians window."""
    if tau < 1:
        raise ValueError("selectivity must be at least 1")
    phi = np.mod(np.asarray(phi, dtype=float), 2.0 * np.pi)
    J = _periodization_count(tau)
    v = np.zeros_like(phi)
    for j in range(-J, J + 1):
        v += dog_window(tau, phi + 2.0 * np.pi * j)
    return v if v.ndim else float(v)


def angular_window_dphi(tau, phi):
    """Derivative of the periodized window with respect to phi."""
    phi = np.mod(np.asarray(phi, dtype=float), 2.0 * np.pi)
    J = _periodization_count(tau)
    v = np.zeros_like(phi)
    t2 = tau * tau
    for j in range(-J, J + 1):
        p = phi + 2.0 * np.pi * j
        v += -t2 * (p * np.exp(-0.5 * t2 * p ** 2)
                    - (p - np.pi) * np.exp(-0.5 * t2 * (p - np.pi) ** 2))
    return v if v.ndim else float(v)


def angular_coefficient(tau, k):
    """Fourier coefficient of the angular window: int_0^{2pi} f e^{-ik phi}.

    Zero for even k; 2 sqrt(2 pi)/tau * exp(-k^2/(2 tau^2)) for odd k.
    """
    if k % 2 == 0:
        return 0.0
    return 2.0 * np.sqrt(2.0 * np.pi) / tau * np.exp(-k * k / (2.0 * tau * tau))


@dataclass
class AngularWindow:
    """Truncated coefficient series of the angular window (odd k only)."""
    tau: float
    odd_k: np.ndarray          # positive odd orders 1, 3, ..., k_max
    coefficients: np.ndarray   # matching coefficient values

    @classmethod
    def build(cls, tau, tail_eps=1e-16):
        ks, vals = [], []
        k = 1
        top = angular_coefficient(tau, 1)
        while True:
            c = angular_coefficient(tau, k)
            if c < tail_eps * top and k > tau:
                break
            ks.append(k)
            vals.append(c)
            k += 2
        return cls(tau=tau, odd_k=np.array(ks), coefficients=np.array(vals))

    def coefficient(self, k):
        return angular_coefficient(self.tau, k)

    def window_norm_sq(self):
        """int_0^{2pi} f^2 dphi = sum_k |c_k|^2 / (2 pi), both signs of k."""
        return float(np.sum(self.coefficients ** 2) / np.pi)

    def evaluate(self, phi):
        """Pointwise series sum (dual formula to the periodization)."""
        phi = np.asarray(phi, dtype=float)
        acc = np.zeros_like(phi)
        for k, c in zip(self.odd_k, self.coefficients):
            acc += c * np.cos(k * phi)
        v = acc / np.pi
        return v if v.ndim else float(v)

    def evaluate_dphi(self, phi):
        """Derivative of the series sum with respect to the angle."""
        phi = np.asarray(phi, dtype=float)
        acc = np.zeros_like(phi)
        for k, c in zip(self.odd_k, self.coefficients):
            acc -= c * k * np.sin(k * phi)
        v = acc / np.pi
        return v if v.ndim else float(v)


# ---------------------------------------------------------------------------
# Poisson kernel and colatitude profiles

def _check_rho(rho):
    if not rho > 0:
        raise ValueError("scale must be positive")
    if rho < RHO_MIN:
        raise ValueError("scale below supported range %g" % RHO_MIN)


def poisson_kernel(rho, theta):
    """(1/4pi) (1 - r^2) / (1 - 2 r cos(theta) + r^2)^{3/2}, r = exp(-rho)."""
    _check_rho(rho)
    r = np.exp(-rho)
    c = np.cos(np.asarray(theta, dtype=float))
    d = 1.0 - 2.0 * r * c + r * r
    v = (1.0 - r * r) / (4.0 * np.pi * d ** 1.5)
    return v if v.ndim else float(v)


def _series_degree(r, tail=1e-14):
    # smallest L with (2L+1) L^2 r^L below the tail threshold
    l, term = 1, 3 * r
    while term > tail and l < 200000:
        l += 1
        term = (2 * l + 1) * l * l * r ** l
    return l


def _series_weights(kind, r, tail=1e-17):
    """Terms weight(l) r^l for l = 0..L, truncated relative to the peak.

    kind 0: weight 2l+1 (kernel); 1: (2l+1) l^2; 2: (2l+1) l (l-1).
    """
    out, peak, l, r_pow = [], 0.0, 0, 1.0
    while True:
        if kind == 0:
            w = 2 * l + 1
        elif kind == 1:
            w = (2 * l + 1) * l * l
        else:
            w = (2 * l + 1) * l * (l - 1)
        term = w * r_pow
        out.append(term)
        peak = max(peak, term)
        if l >= 6 and term < tail * (1.0 + peak):
            return np.array(out)
        if l > 100000:
            raise ValueError("series too long for this scale")
        l += 1
        r_pow *= r


def _sum_series(c, t):
    """sum_l c_l P_l(t); compensated summation for scalar arguments."""
    P = legendre_P_all(len(c) - 1, np.asarray(t, dtype=float))
    if P.ndim == 1:
        return fsum(c * P)
    return np.tensordot(c, P, axes=(0, 0))


def poisson_kernel_series(rho, theta, tail=1e-17):
    """Legendre series sum (1/4pi) sum (2l+1) r^l P_l; dual-formula oracle."""
    _check_rho(rho)
    c = _series_weights(0, np.exp(-rho), tail)
    theta = np.asarray(theta, dtype=float)
    v = _sum_series(c, np.cos(theta)) / (4.0 * np.pi)
    return v if np.ndim(v) else float(v)


def omega_profile(rho, theta):
    """First radial-derivative profile, rational closed form.

    omega_rho = rho sin^5(theta) r d_r (r d_r p_rho).
    """
    _check_rho(rho)
    r = np.exp(-rho)
    theta = np.asarray(theta, dtype=float)
    c, s = np.cos(theta), np.sin(theta)
    d = 1.0 - 2.0 * r * c + r * r
    num = (r * (10.0 - 19.0 * r * r + r ** 4)
           - (3.0 - 14.0 * r * r - 5.0 * r ** 4) * c
           - r * (9.0 - r * r) * c * c)
    v = -rho * r * num * s ** 5 / (4.0 * np.pi * d ** 3.5)
    return v if v.ndim else float(v)


def upsilon_profile(rho, theta):
    """Second radial-derivative profile, rational closed form.

    upsilon_rho = rho sin^5(theta) r^2 d_r^2 p_rho.
    """
    _check_rho(rho)
    r = np.exp(-rho)
    theta = np.asarray(theta, dtype=float)
    c, s = np.cos(theta), np.sin(theta)
    d = 1.0 - 2.0 * r * c + r * r
    num = (5.0 - 23.0 * r * r + 2.0 * r ** 4
           + 4.0 * r * (7.0 + r * r) * c
           - (15.0 + r * r) * c * c)
    v = -rho * r * r * num * s ** 5 / (4.0 * np.pi * d ** 3.5)
    return v if v.ndim else float(v)


def omega_profile_series(rho, theta, tail=1e-17):
    """Series form rho sin^5 / 4pi * sum (2l+1) l^2 r^l P_l."""
    _check_rho(rho)
    c = _series_weights(1, np.exp(-rho), tail)
    theta = np.asarray(theta, dtype=float)
    core = _sum_series(c, np.cos(theta))
    v = rho * np.sin(theta) ** 5 * core / (4.0 * np.pi)
    return v if np.ndim(v) else float(v)


def upsilon_profile_series(rho, theta, tail=1e-17):
    """Series form rho sin^5 / 4pi * sum (2l+1) l (l-1) r^l P_l."""
    _check_rho(rho)
    c = _series_weights(2, np.exp(-rho), tail)
    theta = np.asarray(theta, dtype=float)
    core = _sum_series(c, np.cos(theta))
    v = rho * np.sin(theta) ** 5 * core / (4.0 * np.pi)
    return v if np.ndim(v) else float(v)


def profile_fn(family):
    return omega_profile if family == "omega" else upsilon_profile


def omega_profile_dtheta(rho, theta):
    """Analytic theta-derivative of the rational omega profile."""
    _check_rho(rho)
    r = np.exp(-rho)
    theta = np.asarray(theta, dtype=float)
    c, s = np.cos(theta), np.sin(theta)
    d = 1.0 - 2.0 * r * c + r * r
    num = (r * (10.0 - 19.0 * r * r + r ** 4)
           - (3.0 - 14.0 * r * r - 5.0 * r ** 4) * c
           - r * (9.0 - r * r) * c * c)
    dnum_dc = -(3.0 - 14.0 * r * r - 5.0 * r ** 4) - 2.0 * r * (9.0 - r * r) * c
    # d/dtheta of num s^5 d^{-7/2}: s^4 (5 c num - s^2 num' - 7 r s^2 num / d)
    v = (-rho * r / (4.0 * np.pi) * s ** 4
         * (5.0 * c * num - s * s * dnum_dc - 7.0 * r * s * s * num / d)
         / d ** 3.5)
    return v if v.ndim else float(v)


def upsilon_profile_dtheta(rho, theta):
    """Analytic theta-derivative of the rational upsilon profile."""
    _check_rho(rho)
    r = np.exp(-rho)
    theta = np.asarray(theta, dtype=float)
    c, s = np.cos(theta), np.sin(theta)
    d = 1.0 - 2.0 * r * c + r * r
    num = (5.0 - 23.0 * r * r + 2.0 * r ** 4
           + 4.0 * r * (7.0 + r * r) * c
           - (15.0 + r * r) * c * c)
    dnum_dc = 4.0 * r * (7.0 + r * r) - 2.0 * (15.0 + r * r) * c
    v = (-rho * r * r / (4.0 * np.pi) * s ** 4
         * (5.0 * c * num - s * s * dnum_dc - 7.0 * r * s * s * num / d)
         / d ** 3.5)
    return v if v.ndim else float(v)


def profile_dtheta_fn(family):
    return omega_profile_dtheta if family == "omega" else upsilon_profile_dtheta


# ---------------------------------------------------------------------------
# sin^5 expansion and the P_l^1 coefficients beta_l / gamma_l

def sin5_legendre_expansion(l):
    """Coefficients of (2l+1) sin^5(theta) P_l in the first-order basis.

    Returns {offset: coefficient} for the terms P_{l+offset}^1,
    offset in (-5, -3, -1, +1, +3, +5). Valid for l >= 4; terms whose
    target degree drops below 1 multiply identically vanishing functions.
    """
    if l < 4:
        raise ValueError("expansion requires degree at least 4")
    lf = float(l)
    return {
        -5: (lf * (lf - 1) * (lf - 2) * (lf - 3)
             / ((2 * lf - 7) * (2 * lf - 5) * (2 * lf - 3) * (2 * lf - 1))),
        -3: (-lf * (lf - 1) * (5 * lf * lf - 9 * lf - 26)
             / ((2 * lf - 7) * (2 * lf - 3) * (2 * lf - 1) * (2 * lf + 3))),
        -1: (2 * (5 * lf ** 4 + 2 * lf ** 3 - 41 * lf * lf - 14 * lf + 60)
             / ((2 * lf - 5) * (2 * lf - 3) * (2 * lf + 3) * (2 * lf + 5))),
        1: (-2 * (5 * lf ** 4 + 18 * lf ** 3 - 17 * lf * lf - 54 * lf + 36)
            / ((2 * lf - 3) * (2 * lf - 1) * (2 * lf + 5) * (2 * lf + 7))),
        3: ((lf + 1) * (lf + 2) * (5 * lf * lf + 19 * lf - 12)
            / ((2 * lf - 1) * (2 * lf + 3) * (2 * lf + 5) * (2 * lf + 9))),
        5: (-(lf + 1) * (lf + 2) * (lf + 3) * (lf + 4)
            / ((2 * lf + 3) * (2 * lf + 5) * (2 * lf + 7) * (2 * lf + 9))),
    }


# Exact expansions of sin^5(theta) P_n (no 2n+1 factor) for the lowest
# degrees, where the generic offsets would reach nonexistent targets.
# Derived once symbolically from the degree ladder; keys are target degrees.
_LOW_DEGREE_P1 = {
    1: {2: Fraction(-8, 63), 4: Fraction(24, 385), 6: Fraction(-8, 693)},
    2: {1: Fraction(8, 35), 3: Fraction(-56, 495), 5: Fraction(184, 4095),
        7: Fraction(-8, 1001)},
    3: {2: Fraction(8, 77), 4: Fraction(-408, 5005), 6: Fraction(8, 231),
        8: Fraction(-8, 1287)},
}


def _p1_expansion(n):
    """{target degree m: coefficient of P_m^1 in sin^5(theta) P_n}."""
    if n <= 0:
        raise ValueError("source degree must be positive")
    if n in _LOW_DEGREE_P1:
        return {m: float(c) for m, c in _LOW_DEGREE_P1[n].items()}
    coeffs = sin5_legendre_expansion(n)
    return {n + off: c / (2 * n + 1) for off, c in coeffs.items() if n + off >= 1}


def _expansion_coefficient(l, r, source_weight):
    """sum over source degrees n of w(n) (2n+1) r^n [coeff of P_l^1]."""
    if l < 1:
        raise ValueError("target degree must be at least 1")
    r = np.asarray(r, dtype=float)
    acc = np.zeros_like(r)
    for n in range(max(1, l - 5), l + 6):
        w = source_weight(n)
        if w == 0.0:
            continue
        c = _p1_expansion(n).get(l)
        if c is not None:
            acc = acc + w * (2 * n + 1) * c * r ** n
    return acc if acc.ndim else float(acc)


def omega_expansion_coefficient(l, r):
    """beta_l(r): coefficient of P_l^1 in (4 pi / rho) omega_rho.

    Closed form, polynomial in r with six terms r^{l-5}..r^{l+5}; valid for
    every l >= 1 (low degrees use the exact low-degree expansion tables).
    """
    return _expansion_coefficient(l, r, lambda n: float(n * n))


def upsilon_expansion_coefficient(l, r):
    """gamma_l(r): coefficient of P_l^1 in (4 pi / rho) upsilon_rho.

    Note gamma_1 is a genuinely nonzero polynomial,
    (16/7) r^2 - (2592/385) r^4 + (240/77) r^6, with one isolated zero
    near r ~ 0.6495; the second family therefore has order 0, not 1.
    """
    return _expansion_coefficient(l, r, lambda n: float(n * (n - 1)))


def expansion_coefficient_fn(family):
    return (omega_expansion_coefficient if family == "omega"
            else upsilon_expansion_coefficient)


def profile_from_expansion(family, rho, theta, l_max=None):
    """Rebuild a profile pointwise from its P_l^1 expansion (oracle use)."""
    _check_rho(rho)
    r = np.exp(-rho)
    theta = np.asarray(theta, dtype=float)
    if l_max is None:
        l_max = _series_degree(r, 1e-15) + 6
    coef_fn = expansion_coefficient_fn(family)
    c, s = np.cos(theta), np.sin(theta)
    # P_l^1 by upward recurrence, accumulated on the fly
    acc = np.zeros_like(theta)
    p_prev = -s                      # P_1^1
    p = -3.0 * c * s                 # P_2^1
    acc += coef_fn(1, r) * p_prev
    if l_max >= 2:
        acc += coef_fn(2, r) * p
    for l in range(2, l_max):
        p_prev, p = p, ((2 * l + 1) * c * p - (l + 1) * p_prev) / l
        acc += coef_fn(l + 1, r) * p
    v = rho * acc / (4.0 * np.pi)
    return v if v.ndim else float(v)


# ---------------------------------------------------------------------------
# assembled kernels

def evaluate_wavelet(spec, theta, phi):
    """Separable kernel value: profile(rho, theta) * window(tau, phi)."""
    prof = profile_fn(spec.family)(spec.rho, theta)
    return prof * angular_window(spec.tau, phi)


def profile_norm_sq(family, rho, n_nodes=None):
    """int_0^pi profile(theta)^2 sin(theta) dtheta by Gauss quadrature."""
    _check_rho(rho)
    if n_nodes is None:
        n_nodes = int(max(256, min(4000, 40.0 / max(rho, 0.02))))
    u, w = np.polynomial.legendre.leggauss(n_nodes)
    v = profile_fn(family)(rho, np.arccos(u))
    return float(np.sum(w * v * v))


def wavelet_norm_sq(spec, n_nodes=None):
    """Squared L2 norm over the sphere; separable and untruncated.

    ||Psi||^2 = int profile^2 sin dtheta * int window^2 dphi.
    """
    win = AngularWindow.build(spec.tau)
    return profile_norm_sq(spec.family, spec.rho, n_nodes) * win.window_norm_sq()
