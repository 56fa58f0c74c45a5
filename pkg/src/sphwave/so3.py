"""Rotations of the sphere, scale sequences, and rotation grids.

A rotation is parametrized by three angles: phi2 and theta2 place the
kernel center (the image of the pole) at longitude phi2 and colatitude
theta2, while phi1 spins the kernel about its own axis first.  Grids
pair an area partition of the sphere (cells of geodesic diameter at
most delta2) with a uniform set of axial angles (arc spacing at most
delta1), and carry the cell measures needed for discrete integration
over all rotations.
"""

from dataclasses import dataclass

import numpy as np

# configured constraints for scale sequences: any positive coarsest
# scale is accepted, and consecutive scales may shrink at most 4x
RHO0_FLOOR = 0.0
RATIO_SPAN = 4.0


def sphere_points(theta, phi):
    """Unit vectors for colatitude theta, longitude phi, shape (3,) + shape."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    st = np.sin(theta)
    return np.stack((np.cos(theta) * np.ones_like(phi),
                     st * np.cos(phi),
                     st * np.sin(phi)))


def point_angles(xyz):
    """Inverse of sphere_points; longitude of a pole image is 0."""
    x1, x2, x3 = xyz[0], xyz[1], xyz[2]
    theta = np.arccos(np.clip(x1, -1.0, 1.0))
    phi = np.where(np.hypot(x2, x3) > 0.0, np.arctan2(x3, x2), 0.0)
    return theta, np.mod(phi, 2.0 * np.pi)


def axis_rotation(beta):
    """Rotation by beta about the pole axis (the (xi2, xi3) plane)."""
    c, s = np.cos(beta), np.sin(beta)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def tilt_rotation(beta):
    """Rotation by beta in the (xi1, xi2) plane; tips the pole over."""
    c, s = np.cos(beta), np.sin(beta)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


@dataclass(frozen=True)
class Rotation:
    """One rotation with its cached orthogonal matrix."""

    phi1: float
    theta2: float
    phi2: float
    matrix: np.ndarray

    def apply(self, xyz):
        return np.tensordot(self.matrix, xyz, axes=1)

    def apply_inverse(self, xyz):
        return np.tensordot(self.matrix.T, xyz, axes=1)

    @property
    def carrier(self):
        """Image of the pole: (colatitude, longitude) of the kernel center."""
        return self.theta2, self.phi2


def make_rotation(phi1, theta2, phi2):
    """Compose the axial spin, the tilt, and the carrier longitude turn.

    The matrix is axis(phi2) @ tilt(theta2) @ axis(phi1); applied to the
    pole it yields the carrier point at (theta2, phi2), and phi1 only
    spins the kernel about its own axis.
    """
    theta2 = float(theta2)
    if not 0.0 <= theta2 <= np.pi:
        raise ValueError("carrier colatitude must lie in [0, pi]")
    phi1 = float(np.mod(phi1, 2.0 * np.pi))
    phi2 = float(np.mod(phi2, 2.0 * np.pi))
    matrix = axis_rotation(phi2) @ tilt_rotation(theta2) @ axis_rotation(phi1)
    matrix.flags.writeable = False
    return Rotation(phi1, theta2, phi2, matrix)


def rotate_signal_pullback(rotation, kernel):
    """Return x -> kernel(g^{-1} x) as a callable of (theta, phi)."""

    def rotated(theta, phi):
        xyz = rotation.apply_inverse(sphere_points(theta, phi))
        return kernel(*point_angles(xyz))

    return rotated


# ---------------------------------------------------------------------------
# scale sequences

@dataclass(frozen=True)
class ScaleSequence:
    """Geometric scales rho0 * q^j for j = 0..j_max."""

    rho0: float
    q: float
    scales: tuple

    @property
    def log_step(self):
        """Scale-measure weight of each step: log(rho_j / rho_{j+1})."""
        return float(np.log(1.0 / self.q))

    def __len__(self):
        return len(self.scales)

    def __iter__(self):
        return iter(self.scales)

    def __getitem__(self, j):
        return self.scales[j]


def make_scale_sequence(rho0, q=0.5, j_max=0):
    """Geometric sequence of scales; q must lie in (1/4, 1)."""
    rho0 = float(rho0)
    q = float(q)
    if rho0 <= RHO0_FLOOR:
        raise ValueError("coarsest scale must be positive")
    if not 1.0 / RATIO_SPAN < q < 1.0:
        raise ValueError("scale ratio must lie in (%.3g, 1)" % (1.0 / RATIO_SPAN,))
    if j_max < 0:
        raise ValueError("j_max must be nonnegative")
    scales = tuple(rho0 * q ** j for j in range(j_max + 1))
    return ScaleSequence(rho0, q, scales)


# ---------------------------------------------------------------------------
# rotation grids

@dataclass(frozen=True)
class GridCell:
    """One cell of the area partition with its carrier at the center."""

    theta: float
    phi: float
    theta_lo: float
    theta_hi: float
    phi_width: float
    measure: float


@dataclass(frozen=True)
class SO3Grid:
    """Area partition x axial angles; every rotation of the discrete set."""

    delta2: float
    delta1: float
    cells: tuple
    axial_angles: np.ndarray

    @property
    def n_carriers(self):
        return len(self.cells)

    @property
    def n_rotations(self):
        return len(self.cells) * len(self.axial_angles)

    @property
    def carrier_thetas(self):
        return np.array([c.theta for c in self.cells])

    @property
    def carrier_phis(self):
        return np.array([c.phi for c in self.cells])

    @property
    def measures(self):
        return np.array([c.measure for c in self.cells])

    def all_rotations(self):
        """Flattened list of rotations, carrier-major then axial angle."""
        return [make_rotation(a, c.theta, c.phi)
                for c in self.cells for a in self.axial_angles]

    def rows(self):
        """(theta2, phi2, phi1, measure) rows for serialization."""
        for c in self.cells:
            for a in self.axial_angles:
                yield c.theta, c.phi, float(a), c.measure


def make_so3_grid(delta2, delta1):
    """Latitude-band partition with diameter bound delta2, axial bound delta1.

    Bands have height at most delta2/sqrt(2); the longitudinal split of
    each band is chosen from the exact chord identity
        sin^2(d/2) = sin^2(dtheta/2) + sin(t) sin(t') sin^2(dphi/2)
    so that every cell has geodesic diameter at most delta2.  Cell
    measures are analytic and sum to the full sphere area.
    """
    delta2 = float(delta2)
    delta1 = float(delta1)
    if not 0.0 < delta2 <= np.pi:
        raise ValueError("cell diameter bound must lie in (0, pi]")
    if not 0.0 < delta1 <= 2.0 * np.pi:
        raise ValueError("axial arc bound must lie in (0, 2 pi]")

    n_bands = int(np.ceil(np.pi / (delta2 / np.sqrt(2.0))))
    edges = np.linspace(0.0, np.pi, n_bands + 1)
    cos_edges = np.cos(edges)
    band_height = np.pi / n_bands
    # height < delta2 keeps the width budget below strictly positive
    cap = np.sin(0.5 * delta2) ** 2 - np.sin(0.5 * band_height) ** 2

    cells = []
    for b in range(n_bands):
        lo, hi = edges[b], edges[b + 1]
        if lo < 0.5 * np.pi < hi:
            sin_w = 1.0
        else:
            sin_w = max(np.sin(lo), np.sin(hi))
        half_width = np.sqrt(cap) / sin_w
        dphi_max = 2.0 * np.arcsin(min(1.0, half_width))
        n_cells = int(np.ceil(2.0 * np.pi / dphi_max))
        width = 2.0 * np.pi / n_cells
        measure = (cos_edges[b] - cos_edges[b + 1]) * width
        center = 0.5 * (lo + hi)
        for i in range(n_cells):
            cells.append(GridCell(center, (i + 0.5) * width,
                                  lo, hi, width, measure))

    n_axial = int(np.ceil(2.0 * np.pi / delta1))
    axial = np.arange(n_axial) * (2.0 * np.pi / n_axial)
    axial.flags.writeable = False
    return SO3Grid(delta2, delta1, tuple(cells), axial)
