"""Wavelet Fourier coefficients and frame-condition verification.

For a separable kernel Psi = profile(theta) * window(phi) the Fourier
coefficients factor as

    Psi_l^k = (-1)^|k| c_k(tau) * int Q_l^|k|(theta) profile(theta) sin dtheta

with c_k the window coefficient (zero for even k). The profile is a series
sum_n w_n r^n sin^5(theta) P_n(cos theta), so the theta integral is a
polynomial in r = exp(-rho) with coefficients w_n H[n, l, k], where

    H[n, l, k] = int_{-1}^{1} (1 - t^2)^{5/2} P_n(t) Q_l^k(t) dt.

H vanishes for n > l + 5 and for n + l even; for k <= 5 it is additionally
banded (zero unless |n - l| <= 5). The integrands are polynomials for odd
k, so Gauss-Legendre evaluates them exactly. The scale integrals
G(l) = sum_k int |Psi_l^k|^2 drho/rho then reduce to integrals of rho times
squared polynomials in r, handled by RhoQuadrature.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .sphfn import CoefficientTable, legendre_P_all, normalized_assoc_column
from .profiles import FAMILIES, FAMILY_ORDER, angular_coefficient, \
    expansion_coefficient_fn

# low-degree energy above this is reported as a violated vanishing condition
VANISH_TOL = 1e-10
# allowed overshoot of the analytic upper frame constant
BOUND_SLACK = 1e-6


# ---------------------------------------------------------------------------
# quadrature for integrals over the scale axis

@dataclass
class RhoQuadrature:
    """Nodes and weights for int_0^infty F(rho) drho.

    Built by the substitution r = exp(-rho) followed by composite
    Gauss-Legendre on (0,1) with panels refined geometrically toward both
    endpoints: the r -> 0 end carries the rho -> infinity tail and the
    r -> 1 end the rho -> 0 boundary layer (including r^{2l} factors with
    large l, whose mass sits at 1 - r ~ 1/(2l)).
    """
    nodes: np.ndarray      # rho values, all > 0
    weights: np.ndarray    # weights for plain d rho integration
    r_nodes: np.ndarray    # exp(-rho), kept exact from the construction
    depth: int
    nodes_per_panel: int

    @classmethod
    def build(cls, depth=48, nodes_per_panel=32):
        # edges 1 - 2^-j collapse onto 1.0 in double precision past j = 52;
        # the skipped sliver carries rho < 1e-15 and is negligible
        right = min(depth, 50)
        edges = ([0.0] + [2.0 ** -j for j in range(depth, 0, -1)]
                 + [1.0 - 2.0 ** -j for j in range(2, right + 1)] + [1.0])
        x, w = np.polynomial.legendre.leggauss(nodes_per_panel)
        rs, rhos, ws = [], [], []
        for a, b in zip(edges[:-1], edges[1:]):
            half = 0.5 * (b - a)
            if a >= 0.5:
                # work with r - 1 so rho = -log1p(d) stays positive and
                # accurate when r is within a few ulp of 1
                d = (a - 1.0) + half * (x + 1.0)
                rs.append(1.0 + d)
                rhos.append(-np.log1p(d))
            else:
                rp = a + half * (x + 1.0)
                rs.append(rp)
                rhos.append(-np.log(rp))
            ws.append(half * w)
        r = np.concatenate(rs)
        rho = np.concatenate(rhos)
        wr = np.concatenate(ws)
        if not np.all(rho > 0.0):
            raise AssertionError("quadrature produced a nonpositive scale node")
        return cls(nodes=rho, weights=wr / r, r_nodes=r,
                   depth=depth, nodes_per_panel=nodes_per_panel)

    def integrate(self, fn):
        """int_0^infty fn(rho) drho."""
        return float(np.sum(self.weights * fn(self.nodes)))

    def integrate_scale_invariant(self, fn):
        """int_0^infty fn(rho) drho / rho."""
        return float(np.sum(self.weights * fn(self.nodes) / self.nodes))

    def refine(self):
        """A strictly denser rule, for convergence checks."""
        return RhoQuadrature.build(self.depth + 8, self.nodes_per_panel + 8)


@lru_cache(maxsize=4)
def _cached_quadrature(depth, nodes_per_panel):
    return RhoQuadrature.build(depth, nodes_per_panel)


def default_quadrature():
    return _cached_quadrature(48, 32)


# ---------------------------------------------------------------------------
# banded profile moments and the coefficient polynomial in r

@lru_cache(maxsize=None)
def _moment_matrix(k, cap):
    """H[n, l-k] = int (1-t^2)^{5/2} P_n(t) Q_l^k(t) dt for n <= cap+5, l <= cap.

    Polynomial integrands for odd k, so one Gauss-Legendre rule sized for
    the largest degree is exact for every entry. For k <= 5 the entries
    with |n - l| > 5 vanish identically (the weight splits off a polynomial
    factor orthogonal to the higher degree); for k >= 7 all source degrees
    n <= l + 5 of parity opposite to l contribute.
    """
    n_nodes = cap + 13
    t, w = np.polynomial.legendre.leggauss(n_nodes)
    wt = w * (1.0 - t * t) ** 2.5
    P = legendre_P_all(cap + 5, t)
    Q = normalized_assoc_column(k, t, cap)
    H = (P * wt) @ Q.T
    if k <= 5:
        n_idx = np.arange(cap + 6)[:, None]
        l_idx = np.arange(k, cap + 1)[None, :]
        H[np.abs(n_idx - l_idx) > 5] = 0.0
    return H


def _source_weight(family, n):
    # series weights of the profile: (2n+1) n^2 resp. (2n+1) n (n-1)
    if family == "omega":
        return (2 * n + 1) * n * n
    return (2 * n + 1) * n * (n - 1)


@lru_cache(maxsize=None)
def _coefficient_polynomial(family, l, k):
    """Degrees and coefficients of sum_n w_n H[n,l,k] r^n over sources of l."""
    cap = 64 * ((max(l, k) + 63) // 64)
    H = _moment_matrix(k, cap)
    degs, coefs = [], []
    start = 1 if l % 2 == 0 else 2
    for n in range(start, l + 6, 2):
        w = _source_weight(family, n)
        if w == 0:
            continue
        degs.append(n)
        coefs.append(w * H[n, l - k])
    return tuple(degs), tuple(coefs)


# ---------------------------------------------------------------------------
# coefficients and their printed bound

def wavelet_coefficient(spec, l, k):
    """Fourier coefficient of the kernel at degree l, order k.

    Real for this kernel class; identically zero for even k. The |k| = 1
    value uses the closed form through the P_l^1 expansion coefficient,
    all other odd orders the banded-moment polynomial in r.
    """
    if abs(k) > l:
        raise IndexError("order exceeds degree")
    if k % 2 == 0:
        return 0.0j
    ka = abs(k)
    tau, rho, r = spec.tau, spec.rho, spec.r
    if ka == 1:
        coef = expansion_coefficient_fn(spec.family)(l, r)
        val = (-rho / (tau * np.pi)
               * np.sqrt(l * (l + 1) / (2.0 * (2 * l + 1)))
               * coef * np.exp(-1.0 / (2.0 * tau * tau)))
    else:
        degs, coefs = _coefficient_polynomial(spec.family, l, ka)
        acc = 0.0
        for n, c in zip(degs, coefs):
            acc += c * r ** n
        val = ((-1.0) ** ka * angular_coefficient(tau, ka)
               * rho / (4.0 * np.pi) * acc)
    return complex(val)


def coefficient_upper_bound(spec, l, k):
    """Decay bound on |coefficient| at odd order k, |k| <= l."""
    if abs(k) > l:
        raise IndexError("order exceeds degree")
    if k % 2 == 0:
        raise ValueError("bound applies to odd orders only")
    ka = abs(k)
    r = spec.r
    root = np.sqrt((2 * l + 1) / (2.0 * ka * (1.0 - r * r)))
    gauss = np.exp(-ka * ka / (2.0 * spec.tau ** 2))
    if spec.family == "omega":
        return 3.0 * spec.rho * r / spec.tau * root * gauss
    return 6.0 * spec.rho * r * r / spec.tau * root * gauss


def wavelet_coefficient_table(spec, l_band, k_cut=None):
    """CoefficientTable of the kernel's coefficients up to l_band."""
    if k_cut is None:
        k_cut = default_k_cut(spec.tau)
    values = np.zeros((l_band + 1) ** 2, dtype=complex)
    table = CoefficientTable(l_band, values)
    for l in range(1, l_band + 1):
        for k in range(1, min(l, k_cut) + 1, 2):
            v = wavelet_coefficient(spec, l, k)
            table.set(l, k, v)
            table.set(l, -k, v)
    return table


# ---------------------------------------------------------------------------
# admissibility integrals

def default_k_cut(tau):
    """Smallest odd K with exp(-K^2/tau^2)/K below 1e-14 (Gaussian tail)."""
    k = 1
    while np.exp(-k * k / (tau * tau)) / k >= 1e-14:
        k += 2
    return k


@lru_cache(maxsize=None)
def _scale_integral(family, l, k):
    """R[l,k] = int_0^infty rho (sum_n c_n r^n)^2 drho, convergence-checked.

    Independent of tau: the window coefficient is factored out by the
    caller. Cached, so each (family, l, k) pair is integrated once.
    """
    degs, coefs = _coefficient_polynomial(family, l, k)
    if not degs:
        return 0.0
    base = _poly_scale_integral(degs, coefs, default_quadrature())
    fine = _poly_scale_integral(degs, coefs, _cached_quadrature(56, 40))
    # the polynomial cancels ~l/2 leading digits pointwise near r = 1, so
    # agreement much below 1e-6 relative cannot be expected at high degree
    if abs(fine - base) > 1e-6 * max(abs(fine), 1e-300):
        raise ArithmeticError(
            "scale quadrature did not converge for degree %d order %d" % (l, k))
    return fine


def _poly_scale_integral(degs, coefs, quad):
    r = quad.r_nodes
    acc = np.zeros_like(r)
    for n, c in zip(degs, coefs):
        acc += c * r ** n
    return float(np.sum(quad.weights * quad.nodes * acc * acc))


def scale_integral_closed_form(family, l, k):
    """Exact value of R[l,k] from int rho e^{-a rho} drho = 1/a^2."""
    degs, coefs = _coefficient_polynomial(family, l, k)
    total = 0.0
    for ni, ci in zip(degs, coefs):
        for nj, cj in zip(degs, coefs):
            total += ci * cj / float(ni + nj) ** 2
    return total


def admissibility_integral(family, tau, l, k_cut=None):
    """G(l) = sum over odd |k| <= min(l, K) of int |Psi_l^k|^2 drho/rho."""
    if family not in FAMILIES:
        raise ValueError("family must be one of %s" % (FAMILIES,))
    if l < 0:
        raise ValueError("degree must be nonnegative")
    if k_cut is None:
        k_cut = default_k_cut(tau)
    total = 0.0
    for k in range(1, min(l, k_cut) + 1, 2):
        ck = angular_coefficient(tau, k)
        # both signs of k contribute equally
        total += 2.0 * ck * ck / (16.0 * np.pi ** 2) * _scale_integral(family, l, k)
    return total


def analytic_upper_bound(family, tau):
    """Closed-form upper frame constant for the family at selectivity tau."""
    if tau < 1:
        raise ValueError("selectivity must be at least 1")
    base = (np.log(tau) + 0.5 * np.sqrt(np.pi)) / (tau * tau)
    return 2.0 * base if family == "omega" else 3.0 * base


def k1_ratio_limit(tau):
    """Large-l limit of the single-order k=1 part of G(l)/(2l+1), family omega."""
    return np.exp(-1.0 / (tau * tau)) / (2048.0 * np.pi ** 2 * tau * tau)


def k1_ratio(family, tau, l):
    """The k=+1 contribution to G(l)/(2l+1) alone (asymptote diagnostics)."""
    ck = angular_coefficient(tau, 1)
    return ck * ck / (16.0 * np.pi ** 2) * _scale_integral(family, l, 1) / (2 * l + 1)


def expansion_scale_integral(family, l, quad=None):
    """int_0^infty rho * coef_l(e^{-rho})^2 drho for the P_l^1 coefficient."""
    if quad is None:
        quad = default_quadrature()
    c = expansion_coefficient_fn(family)(l, quad.r_nodes)
    return float(np.sum(quad.weights * quad.nodes * c * c))


# ---------------------------------------------------------------------------
# report

@dataclass
class AdmissibilityReport:
    family: str
    tau: float
    order: int
    g_values: np.ndarray            # G(l) for l = 0..L_max
    ratios: np.ndarray              # G(l) / (2l+1)
    lower_bound: float              # min ratio over l > order
    upper_bound: float              # max ratio over all l
    analytic_bound: float
    vanishing_residuals: np.ndarray  # G(l) for l <= order
    failures: tuple                  # human-readable violation notes

    @property
    def ok(self):
        return not self.failures

    @property
    def l_max(self):
        return len(self.g_values) - 1


def admissibility_report(family, tau, l_max, k_cut=None):
    """Verify the two-sided frame bounds and low-degree vanishing.

    Returns a report rather than raising: violations are listed in
    .failures and flip .ok, so callers can render partial results.
    """
    if l_max < 10:
        raise ValueError("report requires l_max of at least 10")
    order = FAMILY_ORDER[family]
    ls = np.arange(l_max + 1)
    g = np.array([admissibility_integral(family, tau, l, k_cut) for l in ls])
    ratios = g / (2.0 * ls + 1.0)
    lower = float(np.min(ratios[order + 1:]))
    upper = float(np.max(ratios))
    analytic = analytic_upper_bound(family, tau)
    residuals = g[:order + 1].copy()

    failures = []
    for l in range(order + 1, l_max + 1):
        if ratios[l] <= 0.0:
            failures.append("nonpositive frame ratio %.3e at degree %d"
                            % (ratios[l], l))
    if upper > analytic * (1.0 + BOUND_SLACK):
        failures.append("max ratio %.6e exceeds analytic bound %.6e"
                        % (upper, analytic))
    for l, res in enumerate(residuals):
        if res >= VANISH_TOL:
            failures.append(
                "degree-%d energy %.3e violates the vanishing condition "
                "(nominal order %d not attained)" % (l, res, order))
    return AdmissibilityReport(
        family=family, tau=tau, order=order, g_values=g, ratios=ratios,
        lower_bound=lower, upper_bound=upper, analytic_bound=analytic,
        vanishing_residuals=residuals, failures=tuple(failures))
