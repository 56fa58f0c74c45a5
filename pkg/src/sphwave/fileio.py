"""File formats: sampled signals, coefficient sets, maps, run configs.

Binary files carry a one-line ASCII header (magic word plus key=value
fields) followed by a raw little-endian payload, so metadata stays
human-inspectable while the numbers round-trip bit-exactly.  Grids are
never stored: they rebuild deterministically from the header fields.
"""

import json

import numpy as np

from .sphfn import SphericalGridSpec, SphericalSignal
from .so3 import make_scale_sequence, make_so3_grid
from .transform import TransformCoefficients

SIGNAL_MAGIC = "SPHSIG1"
COEFF_MAGIC = "SPHWCF1"

CONFIG_KEYS = frozenset((
    "family", "taus", "tau_cap", "rho0", "q", "j_max", "target",
    "l_band", "delta2", "delta1", "tolerance", "max_iterations",
    "n_theta", "n_phi", "seed",
))


class FileFormatError(ValueError):
    """Malformed file; the message names the offending field."""


def _parse_header(line, magic, path):
    parts = line.decode("ascii", errors="replace").split()
    if not parts or parts[0] != magic:
        raise FileFormatError("%s: bad magic word (expected %s)"
                              % (path, magic))
    fields = {}
    for item in parts[1:]:
        if "=" not in item:
            raise FileFormatError("%s: malformed header item %r"
                                  % (path, item))
        key, _, val = item.partition("=")
        fields[key] = val
    return fields


def _field(fields, key, convert, path):
    if key not in fields:
        raise FileFormatError("%s: missing header field %r" % (path, key))
    try:
        return convert(fields[key])
    except ValueError:
        raise FileFormatError("%s: bad value for header field %r"
                              % (path, key))


# ---------------------------------------------------------------------------
# sampled spherical signals

def write_signal(path, signal):
    """One header line, then theta-major samples as little-endian binary."""
    values = np.ascontiguousarray(signal.values)
    kind = "complex" if np.iscomplexobj(values) else "real"
    dtype = "<c16" if kind == "complex" else "<f8"
    header = "%s grid=gauss n_theta=%d n_phi=%d l_band=%d kind=%s\n" % (
        SIGNAL_MAGIC, signal.spec.n_theta, signal.spec.n_phi,
        signal.spec.l_band, kind)
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(values.astype(dtype).tobytes())


def read_signal(path):
    with open(path, "rb") as fh:
        fields = _parse_header(fh.readline(), SIGNAL_MAGIC, path)
        payload = fh.read()
    grid = _field(fields, "grid", str, path)
    if grid != "gauss":
        raise FileFormatError("%s: unsupported grid kind %r" % (path, grid))
    n_theta = _field(fields, "n_theta", int, path)
    n_phi = _field(fields, "n_phi", int, path)
    l_band = _field(fields, "l_band", int, path)
    kind = _field(fields, "kind", str, path)
    if kind not in ("real", "complex"):
        raise FileFormatError("%s: bad value for header field 'kind'" % path)
    dtype = "<c16" if kind == "complex" else "<f8"
    want = n_theta * n_phi * np.dtype(dtype).itemsize
    if len(payload) != want:
        raise FileFormatError("%s: payload holds %d bytes, header implies %d"
                              % (path, len(payload), want))
    values = np.frombuffer(payload, dtype=dtype).reshape(n_theta, n_phi)
    return SphericalSignal(values.copy(),
                           SphericalGridSpec(l_band, n_theta, n_phi))


# ---------------------------------------------------------------------------
# wavelet coefficient sets

def write_coefficients(path, coeffs):
    """Header with the rebuild parameters, then taus and values blocks."""
    grid = coeffs.grid
    scales = coeffs.scales
    n_axial = len(grid.axial_angles)
    header = ("%s family=%s l_band=%d n_scales=%d rho0=%r q=%r "
              "delta2=%r delta1=%r n_carriers=%d n_axial=%d "
              "under_resolved=%d\n"
              % (COEFF_MAGIC, coeffs.family, coeffs.l_band, len(scales),
                 float(scales.rho0), float(scales.q), float(grid.delta2),
                 float(grid.delta1), grid.n_carriers, n_axial,
                 int(coeffs.under_resolved)))
    taus = np.empty((len(scales), grid.n_carriers))
    for j, t in enumerate(coeffs.taus):
        taus[j] = t
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(taus.astype("<f8").tobytes())
        for v in coeffs.values:
            fh.write(np.ascontiguousarray(v).astype("<c16").tobytes())


def read_coefficients(path):
    with open(path, "rb") as fh:
        fields = _parse_header(fh.readline(), COEFF_MAGIC, path)
        payload = fh.read()
    family = _field(fields, "family", str, path)
    l_band = _field(fields, "l_band", int, path)
    n_scales = _field(fields, "n_scales", int, path)
    rho0 = _field(fields, "rho0", float, path)
    q = _field(fields, "q", float, path)
    delta2 = _field(fields, "delta2", float, path)
    delta1 = _field(fields, "delta1", float, path)
    n_carriers = _field(fields, "n_carriers", int, path)
    n_axial = _field(fields, "n_axial", int, path)
    under = bool(_field(fields, "under_resolved", int, path))
    scales = make_scale_sequence(rho0, q, n_scales - 1)
    grid = make_so3_grid(delta2, delta1)
    if grid.n_carriers != n_carriers or len(grid.axial_angles) != n_axial:
        raise FileFormatError("%s: header field 'n_carriers'/'n_axial' does "
                              "not match the rebuilt grid" % path)
    tau_bytes = n_scales * n_carriers * 8
    val_bytes = n_scales * n_carriers * n_axial * 16
    if len(payload) != tau_bytes + val_bytes:
        raise FileFormatError("%s: payload holds %d bytes, header implies %d"
                              % (path, len(payload), tau_bytes + val_bytes))
    taus_flat = np.frombuffer(payload, dtype="<f8", count=n_scales
                              * n_carriers).reshape(n_scales, n_carriers)
    values = np.frombuffer(payload, dtype="<c16", offset=tau_bytes)
    values = values.reshape(n_scales, n_carriers, n_axial)
    taus = tuple(float(row[0]) if np.ptp(row) == 0.0 else row.copy()
                 for row in taus_flat)
    return TransformCoefficients(family, l_band,
                                 tuple(v.copy() for v in values),
                                 taus, grid, scales, under)


# ---------------------------------------------------------------------------
# selectivity maps (text)

def write_selectivity_csv(path, smap):
    with open(path, "w") as fh:
        fh.write("j,alpha2,theta2,phi2,tau_star,phi1_star,value\n")
        for j, a, t2, p2, tau, p1, val in smap.rows():
            fh.write("%d,%d,%r,%r,%r,%r,%r\n"
                     % (j, a, float(t2), float(p2), float(tau), float(p1),
                        float(val)))


def read_selectivity_rows(path):
    """Rows of a selectivity CSV, numbers round-tripped exactly."""
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "j,alpha2,theta2,phi2,tau_star,phi1_star,value":
            raise FileFormatError("%s: bad column header" % path)
        rows = []
        for line in fh:
            parts = line.strip().split(",")
            if len(parts) != 7:
                raise FileFormatError("%s: row with %d columns"
                                      % (path, len(parts)))
            rows.append((int(parts[0]), int(parts[1]))
                        + tuple(float(x) for x in parts[2:]))
    return rows


# ---------------------------------------------------------------------------
# run configuration

def load_config(path):
    """JSON config; keys validated so typos fail loudly, values checked
    by the parser and the owning modules."""
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FileFormatError("%s: not valid JSON (%s)" % (path, exc))
    if not isinstance(data, dict):
        raise FileFormatError("%s: top level must be an object" % path)
    for key in data:
        if key not in CONFIG_KEYS:
            raise FileFormatError("%s: unknown config field %r" % (path, key))
    if "taus" in data:
        data["taus"] = [float(t) for t in data["taus"]]
    return data
