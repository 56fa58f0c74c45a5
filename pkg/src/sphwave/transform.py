"""Wavelet analysis over a rotation grid and frame-based reconstruction.

A coefficient W(rho_j, g) is the normalized inner product of the rotated
kernel with the signal, 1/(4 pi) <U_g Psi, f>.  Everything runs in
harmonic space: rotating a kernel multiplies its coefficient table by
per-degree unitary blocks, so one tilt block per latitude band (cached)
plus diagonal phase factors cover the whole grid.  Reconstruction
inverts the discrete frame operator S = sum of weighted rank-one terms
with a diagonally preconditioned relaxed iteration.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .sphfn import (CoefficientTable, SphericalSignal, analyze_signal,
                    coef_index, default_grid_spec, grid_phis,
                    make_colat_grid, normalized_assoc_column,
                    synthesize_signal)
from .profiles import FAMILY_ORDER, WaveletSpec
from .admissibility import default_k_cut, wavelet_coefficient_table
from .so3 import sphere_points, tilt_rotation


@dataclass
class FrameOperatorConfig:
    """Iteration controls for inverting the frame operator."""

    max_iterations: int = 200
    tolerance: float = 1e-10
    relaxation: float = None
    strict: bool = True

    def __post_init__(self):
        if self.tolerance <= 0.0:
            raise ValueError("residual tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("need at least one iteration")


class FrameConvergenceError(RuntimeError):
    """Raised when the frame iteration stalls; carries the last residual."""

    def __init__(self, residual, iterations):
        super().__init__("frame iteration did not reach tolerance after "
                         "%d iterations (residual %.3e)" % (iterations, residual))
        self.residual = residual
        self.iterations = iterations


@dataclass
class TransformCoefficients:
    """Wavelet coefficients of one signal over (scale, rotation) samples."""

    family: str
    l_band: int
    values: tuple            # per scale: complex (n_carriers, n_axial)
    taus: tuple              # per scale: float, or ndarray per carrier
    grid: object
    scales: object
    under_resolved: bool

    @property
    def n_coefficients(self):
        return sum(v.size for v in self.values)

    def weights(self, j):
        """Quadrature weight of every (carrier, axial) sample at scale j."""
        arc = 2.0 * np.pi / len(self.grid.axial_angles)
        w = self.grid.measures * arc * self.scales.log_step
        return np.broadcast_to(w[:, None], self.values[j].shape)

    def total_energy(self):
        return float(sum(np.sum(self.weights(j) * np.abs(v) ** 2)
                         for j, v in enumerate(self.values)))


# ---------------------------------------------------------------------------
# rotation machinery

def _band_partition(grid):
    """Group cell indices by latitude band: (theta, indices, phis, measure)."""
    bands = []
    for idx, cell in enumerate(grid.cells):
        if not bands or cell.theta_lo != bands[-1][0]:
            bands.append((cell.theta_lo, cell.theta, [], [], cell.measure))
        bands[-1][2].append(idx)
        bands[-1][3].append(cell.phi)
    return [(theta, np.array(idx), np.array(phis), measure)
            for (_, theta, idx, phis, measure) in bands]


@lru_cache(maxsize=512)
def _tilt_blocks(theta_key, l_band):
    """Per-degree unitary blocks T^l[m, k] = <Y_l^m, Y_l^k o tilt^{-1}>.

    Computed by analyzing each tilted harmonic on an exact quadrature
    grid; a tilt preserves the degree, so the projection is exact.
    """
    theta = float(theta_key)
    spec = default_grid_spec(l_band)
    colat = make_colat_grid(spec.n_theta)
    tt, pp = np.meshgrid(colat.nodes, grid_phis(spec), indexing="ij")
    xyz = np.tensordot(tilt_rotation(theta).T, sphere_points(tt, pp), axes=1)
    ct = np.clip(xyz[0], -1.0, 1.0)
    ph = np.arctan2(xyz[2], xyz[1])
    blocks = [np.zeros((2 * l + 1, 2 * l + 1), dtype=complex)
              for l in range(l_band + 1)]
    for k in range(-l_band, l_band + 1):
        ka = abs(k)
        col = normalized_assoc_column(ka, ct, l_band)
        phase = (-1.0) ** ka * np.exp(1j * k * ph)
        for l in range(ka, l_band + 1):
            sig = SphericalSignal(col[l - ka] * phase, spec, colat)
            blocks[l][:, k + l] = analyze_signal(sig, l).degree_block(l)
    for b in blocks:
        b.flags.writeable = False
    return tuple(blocks)


@lru_cache(maxsize=256)
def _kernel_matrix(family, rho, tau, l_band):
    """Kernel coefficients as a dense (l, k) matrix, index [l, k + l_band]."""
    table = wavelet_coefficient_table(WaveletSpec(family, rho, tau), l_band)
    mat = np.zeros((l_band + 1, 2 * l_band + 1), dtype=complex)
    for l in range(l_band + 1):
        mat[l, l_band - l:l_band + l + 1] = table.degree_block(l)
    mat.flags.writeable = False
    return mat


def _odd_orders(l_band):
    return np.array([k for k in range(-l_band, l_band + 1) if k % 2 != 0])


def uniform_specs(family, tau, scales):
    """One kernel spec per scale, same selectivity everywhere."""
    return tuple(WaveletSpec(family, rho, tau) for rho in scales)


def _normalize_specs(specs, grid, scales):
    """Flatten the per-(scale, position) spec argument to (family, taus)."""
    if isinstance(specs, WaveletSpec):
        specs = (specs,)
    specs = list(specs)
    if len(specs) != len(scales):
        raise ValueError("need one kernel spec entry per scale")
    family = None
    taus = []
    for entry, rho in zip(specs, scales):
        group = [entry] if isinstance(entry, WaveletSpec) else list(entry)
        if len(group) not in (1, grid.n_carriers):
            raise ValueError("per-position specs must cover every carrier")
        for s in group:
            if family is None:
                family = s.family
            if s.family != family:
                raise ValueError("all kernel specs must share one family")
            if abs(s.rho - rho) > 1e-12 * rho:
                raise ValueError("kernel scale %.6g does not match the "
                                 "scale sequence entry %.6g" % (s.rho, rho))
        if len(group) == 1:
            taus.append(float(group[0].tau))
        else:
            taus.append(np.array([s.tau for s in group]))
    return family, taus


def _max_tau(taus):
    return max(float(np.max(t)) if np.ndim(t) else float(t) for t in taus)


def forward_transform(f, specs, grid, scales):
    """Wavelet coefficients of a band-limited signal over the grid.

    specs gives the kernel per scale (one WaveletSpec) or per (scale,
    position) (a sequence of WaveletSpec per scale, carrier-ordered).
    The under_resolved flag marks grids too coarse to separate the
    axial orders or the positional degrees of freedom of the band.
    """
    family, taus = _normalize_specs(specs, grid, scales)
    table = analyze_signal(f)
    l_band = table.l_band
    fhat = [table.degree_block(l) for l in range(l_band + 1)]
    ks = _odd_orders(l_band)
    col_of = {int(k): i for i, k in enumerate(ks)}
    n_axial = len(grid.axial_angles)
    axial_phase = np.exp(1j * np.outer(ks, grid.axial_angles))
    values = [np.zeros((grid.n_carriers, n_axial), dtype=complex)
              for _ in scales]
    for theta_b, idx, phis, _ in _band_partition(grid):
        blocks = _tilt_blocks(round(theta_b, 12), l_band)
        parts = []
        for l in range(1, l_band + 1):
            m = np.arange(-l, l + 1)
            carried = np.exp(1j * np.outer(phis, m)) * fhat[l][None, :]
            kcols = [l + k for k in range(-l, l + 1) if k % 2 != 0]
            gcols = [col_of[c - l] for c in kcols]
            parts.append((l, gcols, carried @ np.conj(blocks[l][:, kcols])))
        for j, rho in enumerate(scales):
            tau_j = taus[j]
            band_taus = (np.full(len(idx), tau_j) if np.ndim(tau_j) == 0
                         else np.asarray(tau_j)[idx])
            c = np.zeros((len(idx), len(ks)), dtype=complex)
            for tau in np.unique(band_taus):
                rows = band_taus == tau
                kern = _kernel_matrix(family, float(rho), float(tau), l_band)
                for l, gcols, t in parts:
                    c[np.ix_(rows, gcols)] += (
                        t[rows] * np.conj(kern[l, ks[gcols] + l_band]))
            values[j][idx] = c @ axial_phase / (4.0 * np.pi)
    k_need = min(l_band, default_k_cut(_max_tau(taus)))
    if k_need % 2 == 0:
        k_need -= 1
    under = (n_axial < 2 * k_need + 1
             or grid.n_carriers < (l_band + 1) ** 2)
    return TransformCoefficients(family, l_band, tuple(values), tuple(taus),
                                 grid, scales, under)


def adjoint_transform(coeffs):
    """Weighted synthesis sum: the frame image S f when coeffs came from f."""
    l_band = coeffs.l_band
    grid = coeffs.grid
    ks = _odd_orders(l_band)
    col_of = {int(k): i for i, k in enumerate(ks)}
    n_axial = len(grid.axial_angles)
    arc = 2.0 * np.pi / n_axial
    axial_phase = np.exp(1j * np.outer(ks, grid.axial_angles))
    out = CoefficientTable(l_band)
    for theta_b, idx, phis, measure in _band_partition(grid):
        blocks = _tilt_blocks(round(theta_b, 12), l_band)
        for j, rho in enumerate(coeffs.scales):
            tau_j = coeffs.taus[j]
            band_taus = (np.full(len(idx), tau_j) if np.ndim(tau_j) == 0
                         else np.asarray(tau_j)[idx])
            w = measure * arc * coeffs.scales.log_step / (4.0 * np.pi)
            d = coeffs.values[j][idx] @ np.conj(axial_phase).T * w
            for tau in np.unique(band_taus):
                rows = np.where(band_taus == tau)[0]
                kern = _kernel_matrix(coeffs.family, float(rho), float(tau),
                                      l_band)
                for l in range(1, l_band + 1):
                    m = np.arange(-l, l + 1)
                    kcols = [l + k for k in range(-l, l + 1) if k % 2 != 0]
                    gcols = [col_of[c - l] for c in kcols]
                    x = d[np.ix_(rows, gcols)] * kern[l, ks[gcols] + l_band]
                    y = x @ blocks[l][:, kcols].T
                    phase = np.exp(-1j * np.outer(phis[rows], m))
                    out.degree_block(l)[:] += np.sum(phase * y, axis=0)
    return out


def frame_apply(f, specs, grid, scales):
    """Apply the discrete frame operator S to a signal."""
    coeffs = forward_transform(f, specs, grid, scales)
    table = adjoint_transform(coeffs)
    return synthesize_signal(table, f.spec)


def rotate_coefficients(table, rotation):
    """Coefficient table of the rotated signal x -> f(g^{-1} x)."""
    l_band = table.l_band
    blocks = _tilt_blocks(round(rotation.theta2, 12), l_band)
    out = CoefficientTable(l_band)
    for l in range(l_band + 1):
        m = np.arange(-l, l + 1)
        spun = np.exp(-1j * m * rotation.phi1) * table.degree_block(l)
        out.degree_block(l)[:] = (np.exp(-1j * m * rotation.phi2)
                                  * (blocks[l] @ spun))
    return out


# ---------------------------------------------------------------------------
# frame operator assembly and inversion

def _degree_orders(l_band):
    l_of = np.concatenate([np.full(2 * l + 1, l) for l in range(l_band + 1)])
    m_of = np.concatenate([np.arange(-l, l + 1) for l in range(l_band + 1)])
    return l_of, m_of


def frame_matrix(family, taus, grid, scales, l_band):
    """Dense frame operator on coefficient tables, uniform tau per scale.

    The axial and longitudinal sums are geometric series, so each
    latitude band contributes a closed-form Hadamard factor; only the
    band colatitudes are genuine quadrature.
    """
    n = (l_band + 1) ** 2
    l_of, m_of = _degree_orders(l_band)
    ks = _odd_orders(l_band)
    n_axial = len(grid.axial_angles)
    axial_gram = 2.0 * np.pi * ((ks[:, None] - ks[None, :]) % n_axial == 0)
    dm = m_of[None, :] - m_of[:, None]
    s = np.zeros((n, n), dtype=complex)
    for theta_b, idx, _, measure in _band_partition(grid):
        blocks = _tilt_blocks(round(theta_b, 12), l_band)
        n_cells = len(idx)
        tilt_part = np.zeros((len(ks), n), dtype=complex)
        for l in range(1, l_band + 1):
            kcols = [l + k for k in range(-l, l + 1) if k % 2 != 0]
            rows = [int(np.where(ks == c - l)[0][0]) for c in kcols]
            tilt_part[rows, coef_index(l, -l):coef_index(l, l) + 1] = (
                np.conj(blocks[l][:, kcols]).T)
        hadamard = (measure * n_cells
                    * np.exp(1j * dm * np.pi / n_cells) * (dm % n_cells == 0))
        for j, rho in enumerate(scales):
            kern = _kernel_matrix(family, float(rho), float(taus[j]), l_band)
            beta = tilt_part * np.conj(kern[l_of[None, :],
                                            ks[:, None] + l_band])
            core = beta.conj().T @ axial_gram @ beta
            s += (scales.log_step / (16.0 * np.pi ** 2)) * core * hadamard
    return s


def adaptive_frame_matrix(coeffs):
    """Dense frame operator honoring per-carrier selectivities.

    Cells sharing one selectivity within a latitude band contribute a
    common kernel factor; their explicit longitudinal phase sum replaces
    the geometric-series closed form of the uniform case.
    """
    l_band = coeffs.l_band
    grid = coeffs.grid
    n = (l_band + 1) ** 2
    l_of, m_of = _degree_orders(l_band)
    ks = _odd_orders(l_band)
    n_axial = len(grid.axial_angles)
    axial_gram = 2.0 * np.pi * ((ks[:, None] - ks[None, :]) % n_axial == 0)
    s = np.zeros((n, n), dtype=complex)
    for theta_b, idx, phis, measure in _band_partition(grid):
        blocks = _tilt_blocks(round(theta_b, 12), l_band)
        tilt_part = np.zeros((len(ks), n), dtype=complex)
        for l in range(1, l_band + 1):
            kcols = [l + k for k in range(-l, l + 1) if k % 2 != 0]
            rows = [int(np.where(ks == c - l)[0][0]) for c in kcols]
            tilt_part[rows, coef_index(l, -l):coef_index(l, l) + 1] = (
                np.conj(blocks[l][:, kcols]).T)
        for j, rho in enumerate(coeffs.scales):
            tau_j = coeffs.taus[j]
            band_taus = (np.full(len(idx), tau_j) if np.ndim(tau_j) == 0
                         else np.asarray(tau_j)[idx])
            for tau in np.unique(band_taus):
                sub = phis[band_taus == tau]
                kern = _kernel_matrix(coeffs.family, float(rho), float(tau),
                                      l_band)
                beta = tilt_part * np.conj(kern[l_of[None, :],
                                                ks[:, None] + l_band])
                core = beta.conj().T @ axial_gram @ beta
                carried = np.exp(1j * np.outer(m_of, sub))
                hadamard = measure * (np.conj(carried) @ carried.T)
                s += (coeffs.scales.log_step / (16.0 * np.pi ** 2)
                      ) * core * hadamard
    return s


def _frame_matrix_for(coeffs):
    """Pick the closed-form path when every scale has one selectivity."""
    taus = []
    for t in coeffs.taus:
        if np.ndim(t) != 0 and np.ptp(t) != 0.0:
            return adaptive_frame_matrix(coeffs)
        taus.append(float(t) if np.ndim(t) == 0 else float(np.ravel(t)[0]))
    return frame_matrix(coeffs.family, taus, coeffs.grid, coeffs.scales,
                        coeffs.l_band)


def reconstruct(coeffs, cfg=None, grid_spec=None):
    """Invert the frame operator by preconditioned relaxed iteration.

    Degrees at or below the family order carry no kernel energy and are
    excluded; the result is band-limited to the coefficients' band.
    """
    if cfg is None:
        cfg = FrameOperatorConfig()
    l_band = coeffs.l_band
    l_of, _ = _degree_orders(l_band)
    s = _frame_matrix_for(coeffs)
    rhs = adjoint_transform(coeffs).values
    active = np.where(l_of > FAMILY_ORDER[coeffs.family])[0]
    sa = s[np.ix_(active, active)]
    b = rhs[active]
    table = CoefficientTable(l_band)
    if grid_spec is None:
        grid_spec = default_grid_spec(l_band)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return synthesize_signal(table, grid_spec)
    diag = sa.diagonal().real
    if np.any(diag <= 0.0):
        raise ArithmeticError("frame operator diagonal is not positive; "
                              "the grid is too coarse for this band")
    lam = cfg.relaxation
    if lam is None:
        root = 1.0 / np.sqrt(diag)
        eig = np.linalg.eigvalsh(sa * np.outer(root, root))
        lam = 2.0 / (eig[0] + eig[-1])
    x = np.zeros_like(b)
    residual = 1.0
    for _ in range(cfg.max_iterations):
        r = b - sa @ x
        residual = np.linalg.norm(r) / bnorm
        if residual <= cfg.tolerance:
            break
        x = x + lam * (r / diag)
    else:
        if cfg.strict:
            raise FrameConvergenceError(residual, cfg.max_iterations)
    table.values[active] = x
    return synthesize_signal(table, grid_spec)
