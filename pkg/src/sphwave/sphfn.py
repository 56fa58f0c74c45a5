"""Legendre machinery, spherical harmonics and quadrature grids on the sphere.

Conventions used throughout the package:

* associated Legendre functions carry the Condon-Shortley factor (-1)^k,
* harmonics are orthonormal with respect to the unnormalized surface
  measure (integral of 1 over the sphere equals 4 pi),
* Y(l, -k) is the complex conjugate of Y(l, k),
* colatitude quadrature is Gauss-Legendre in u = cos(theta), longitude
  quadrature is the uniform trapezoid rule (exact for trigonometric
  polynomials below the node count).
"""

from collections import namedtuple
from dataclasses import dataclass, field

import numpy as np

HarmonicIndex = namedtuple("HarmonicIndex", ["l", "k"])


def coef_index(l, k):
    """Flat index of the harmonic (l, k) in a dense table: l*l + l + k."""
    return l * l + l + k


def legendre_P(l, t):
    """Legendre polynomial P_l(t) via the stable three-term recurrence."""
    if l < 0:
        raise ValueError("degree must be non-negative")
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1.0):
        raise ValueError("argument outside [-1, 1]")
    p_prev = np.ones_like(t)
    if l == 0:
        return p_prev if p_prev.ndim else float(p_prev)
    p = t.copy()
    for n in range(1, l):
        p_prev, p = p, ((2 * n + 1) * t * p - n * p_prev) / (n + 1)
    return p if p.ndim else float(p)


def legendre_P_all(l_max, t):
    """All P_l(t) for l = 0..l_max, stacked along the first axis."""
    t = np.asarray(t, dtype=float)
    P = np.empty((l_max + 1,) + t.shape)
    P[0] = 1.0
    if l_max >= 1:
        P[1] = t
    for n in range(1, l_max):
        P[n + 1] = ((2 * n + 1) * t * P[n] - n * P[n - 1]) / (n + 1)
    return P


def assoc_legendre_P(l, k, t):
    """Associated Legendre P_l^k(t), Condon-Shortley sign included.

    Seeded from P_k^k = (-1)^k (2k-1)!! (1-t^2)^{k/2} and raised in degree.
    Plain (unnormalized) values; degrees above ~120 should use the
    normalized variant to avoid overflow in the double factorial.
    """
    if not 0 <= k <= l:
        raise ValueError("order must satisfy 0 <= k <= l")
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1.0):
        raise ValueError("argument outside [-1, 1]")
    s = np.sqrt(np.maximum(0.0, 1.0 - t * t))
    pkk = np.ones_like(t)
    for j in range(1, k + 1):
        pkk = -pkk * (2 * j - 1) * s
    if l == k:
        return pkk if pkk.ndim else float(pkk)
    p_prev, p = pkk, t * (2 * k + 1) * pkk
    for n in range(k + 2, l + 1):
        p_prev, p = p, ((2 * n - 1) * t * p - (n + k - 1) * p_prev) / (n - k)
    return p if p.ndim else float(p)


def normalized_assoc_column(k, t, l_max):
    """Q_l^k(t) for l = k..l_max where Q_l^k = sqrt((2l+1)(l-k)!/(4 pi (l+k)!)) P_l^k.

    Fully normalized recurrence; stable for degrees in the thousands.
    Returns an array of shape (l_max - k + 1,) + t.shape.
    """
    t = np.asarray(t, dtype=float)
    s = np.sqrt(np.maximum(0.0, 1.0 - t * t))
    out = np.empty((l_max - k + 1,) + t.shape)
    qkk = np.full_like(t, np.sqrt(1.0 / (4.0 * np.pi)))
    for j in range(1, k + 1):
        qkk = -qkk * np.sqrt((2 * j + 1) / (2.0 * j)) * s
    out[0] = qkk
    if l_max == k:
        return out
    out[1] = np.sqrt(2 * k + 3.0) * t * qkk
    for l in range(k + 2, l_max + 1):
        a = np.sqrt((4.0 * l * l - 1.0) / (l * l - k * k))
        b = np.sqrt((2 * l + 1.0) * (l - 1 + k) * (l - 1 - k)
                    / ((2 * l - 3.0) * (l * l - k * k)))
        out[l - k] = a * t * out[l - k - 1] - b * out[l - k - 2]
    return out


def normalized_assoc_triangle(t, l_max):
    """Dense table q[tri(l, k)] of Q_l^k(t) for 0 <= k <= l <= l_max.

    tri(l, k) = l (l + 1) / 2 + k. Shape ((l_max+1)(l_max+2)/2,) + t.shape.
    """
    t = np.asarray(t, dtype=float)
    n_tri = (l_max + 1) * (l_max + 2) // 2
    q = np.empty((n_tri,) + t.shape)
    for k in range(l_max + 1):
        col = normalized_assoc_column(k, t, l_max)
        for l in range(k, l_max + 1):
            q[l * (l + 1) // 2 + k] = col[l - k]
    return q


def spherical_harmonic(l, k, theta, phi):
    """Y_l^k(theta, phi) = (-1)^|k| Q_l^|k|(cos theta) exp(i k phi).

    Orthonormal under the unnormalized measure; Y(l, -k) = conj(Y(l, k)).
    """
    if abs(k) > l:
        raise IndexError("order exceeds degree")
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    ka = abs(k)
    q = normalized_assoc_column(ka, np.cos(theta), l)[l - ka]
    val = (-1.0) ** ka * q * np.exp(1j * k * phi)
    return val if np.ndim(val) else complex(val)


@dataclass
class ColatGrid:
    """Gauss-Legendre colatitude rule: nodes increasing in (0, pi), weights sum to 2."""
    nodes: np.ndarray
    weights: np.ndarray
    kind: str = "gauss-legendre-cos"

    @property
    def cos_nodes(self):
        return np.cos(self.nodes)


def make_colat_grid(n):
    """Gauss-Legendre nodes/weights in u = cos(theta), mapped to colatitudes."""
    if n < 1:
        raise ValueError("need at least one node")
    u, w = np.polynomial.legendre.leggauss(n)
    # u ascending means theta descending; flip so nodes increase
    return ColatGrid(nodes=np.arccos(u)[::-1].copy(), weights=w[::-1].copy())


@dataclass
class SphericalGridSpec:
    """Band limit plus node counts of the analysis grid."""
    l_band: int
    n_theta: int
    n_phi: int

    def __post_init__(self):
        if self.n_theta < self.l_band + 1:
            raise ValueError("n_theta must be at least l_band + 1")
        if self.n_phi < 2 * self.l_band + 1:
            raise ValueError("n_phi must be at least 2 l_band + 1")


def default_grid_spec(l_band):
    return SphericalGridSpec(l_band, l_band + 1, 2 * l_band + 1)


def grid_phis(spec):
    """Uniform longitudes of the analysis grid."""
    return 2.0 * np.pi * np.arange(spec.n_phi) / spec.n_phi


@dataclass
class SphericalSignal:
    """Samples on a colatitude x longitude grid, theta-major."""
    values: np.ndarray
    spec: SphericalGridSpec
    colat: ColatGrid = None

    def __post_init__(self):
        if self.colat is None:
            self.colat = make_colat_grid(self.spec.n_theta)
        if self.values.shape != (self.spec.n_theta, self.spec.n_phi):
            raise ValueError("sample array does not match the grid spec")

    @property
    def thetas(self):
        return self.colat.nodes

    @property
    def phis(self):
        return grid_phis(self.spec)

    def norm_sq(self):
        """Quadrature of |f|^2 over the sphere (unnormalized measure)."""
        w_phi = 2.0 * np.pi / self.spec.n_phi
        return float(np.sum(self.colat.weights
                            * np.sum(np.abs(self.values) ** 2, axis=1)) * w_phi)


@dataclass
class CoefficientTable:
    """Dense complex Fourier coefficients, flat layout l*l + l + k."""
    l_band: int
    values: np.ndarray = None

    def __post_init__(self):
        n = (self.l_band + 1) ** 2
        if self.values is None:
            self.values = np.zeros(n, dtype=complex)
        elif self.values.shape != (n,):
            raise ValueError("coefficient array has the wrong length")

    def get(self, l, k):
        if abs(k) > l or l > self.l_band:
            raise IndexError("harmonic index out of range")
        return self.values[coef_index(l, k)]

    def set(self, l, k, value):
        if abs(k) > l or l > self.l_band:
            raise IndexError("harmonic index out of range")
        self.values[coef_index(l, k)] = value

    def degree_block(self, l):
        """View of the coefficients of degree l, order k = -l..l."""
        return self.values[l * l:(l + 1) * (l + 1)]

    def norm_sq(self):
        return float(np.sum(np.abs(self.values) ** 2))

    def copy(self):
        return CoefficientTable(self.l_band, self.values.copy())


def analyze_signal(f, l_band=None):
    """Project a gridded signal onto the harmonics up to l_band.

    Separable quadrature: FFT in longitude, weighted Gauss sum in
    colatitude. Exact for signals band-limited within the grid spec.
    """
    if l_band is None:
        l_band = f.spec.l_band
    if f.spec.n_theta < l_band + 1 or f.spec.n_phi < 2 * l_band + 1:
        raise ValueError("grid under-resolves the requested band limit")
    n_phi = f.spec.n_phi
    g = np.fft.fft(f.values, axis=1) * (2.0 * np.pi / n_phi)
    q = normalized_assoc_triangle(f.colat.cos_nodes, l_band)
    w = f.colat.weights
    table = CoefficientTable(l_band)
    for m in range(-l_band, l_band + 1):
        gm = w * g[:, m % n_phi]
        sign = (-1.0) ** abs(m)
        for l in range(abs(m), l_band + 1):
            table.values[coef_index(l, m)] = sign * np.dot(
                q[l * (l + 1) // 2 + abs(m)], gm)
    return table


def synthesize_signal(table, spec, colat=None):
    """Evaluate the harmonic series of a coefficient table on a grid."""
    if spec.l_band < table.l_band:
        raise ValueError("grid spec band limit below the table band limit")
    if colat is None:
        colat = make_colat_grid(spec.n_theta)
    l_band = table.l_band
    q = normalized_assoc_triangle(colat.cos_nodes, l_band)
    # s[i, m] = sum_l coef(l, m) (-1)^|m| Q_l^|m|(theta_i)
    s = np.zeros((spec.n_theta, spec.n_phi), dtype=complex)
    for m in range(-l_band, l_band + 1):
        acc = np.zeros(spec.n_theta, dtype=complex)
        for l in range(abs(m), l_band + 1):
            acc += table.values[coef_index(l, m)] * q[l * (l + 1) // 2 + abs(m)]
        s[:, m % spec.n_phi] += (-1.0) ** abs(m) * acc
    values = np.fft.ifft(s, axis=1) * spec.n_phi
    return SphericalSignal(values=values, spec=spec, colat=colat)


def harmonic_matrix(l_band, theta, phi):
    """All Y_l^k at scattered points: shape ((l_band+1)^2, n_points).

    Used for evaluating rotated harmonics; theta and phi are flat arrays.
    """
    theta = np.asarray(theta, dtype=float).ravel()
    phi = np.asarray(phi, dtype=float).ravel()
    q = normalized_assoc_triangle(np.cos(theta), l_band)
    out = np.empty(((l_band + 1) ** 2, theta.size), dtype=complex)
    for k in range(-l_band, l_band + 1):
        e = np.exp(1j * k * phi)
        sign = (-1.0) ** abs(k)
        for l in range(abs(k), l_band + 1):
            out[coef_index(l, k)] = sign * q[l * (l + 1) // 2 + abs(k)] * e
    return out
