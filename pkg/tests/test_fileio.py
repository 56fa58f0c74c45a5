"""Binary signal and coefficient files, selectivity CSV, run configs."""

import json

import numpy as np
import pytest

from sphwave.fileio import (FileFormatError, load_config, read_coefficients,
                            read_selectivity_rows, read_signal, write_signal,
                            write_coefficients, write_selectivity_csv)
from sphwave.multiselect import SelectivitySet, selectivity_scan
from sphwave.sphfn import CoefficientTable, default_grid_spec, \
    synthesize_signal
from sphwave.so3 import make_scale_sequence, make_so3_grid
from sphwave.transform import forward_transform, uniform_specs

SCALES = make_scale_sequence(1.0, 0.5, 1)


def _noise_signal(l_band, seed):
    rng = np.random.default_rng(seed)
    n = (l_band + 1) ** 2
    vec = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    vec[0] = 0.0
    return synthesize_signal(CoefficientTable(l_band, vec),
                             default_grid_spec(l_band))


def test_signal_round_trip(tmp_path):
    path = tmp_path / "sig.bin"
    f = _noise_signal(8, 5)
    write_signal(path, f)
    with open(path, "rb") as fh:
        assert fh.readline().startswith(b"SPHSIG1 ")
    g = read_signal(path)
    assert np.array_equal(g.values, f.values)
    assert g.values.dtype == np.complex128
    assert (g.spec.l_band, g.spec.n_theta, g.spec.n_phi) \
        == (f.spec.l_band, f.spec.n_theta, f.spec.n_phi)

    real = synthesize_signal(CoefficientTable(4), default_grid_spec(4))
    real.values = np.random.default_rng(0).standard_normal(real.values.shape)
    write_signal(path, real)
    h = read_signal(path)
    assert h.values.dtype == np.float64
    assert np.array_equal(h.values, real.values)


def test_signal_header_errors(tmp_path):
    path = tmp_path / "sig.bin"
    write_signal(path, _noise_signal(4, 5))
    raw = path.read_bytes()
    head, _, payload = raw.partition(b"\n")

    def rewrite(new_head, new_payload=payload):
        path.write_bytes(new_head + b"\n" + new_payload)

    rewrite(head.replace(b"SPHSIG1", b"SPHXXX1"))
    with pytest.raises(FileFormatError, match="magic"):
        read_signal(path)
    rewrite(head.replace(b" l_band=4", b""))
    with pytest.raises(FileFormatError, match="l_band"):
        read_signal(path)
    rewrite(head.replace(b"n_theta=5", b"n_theta=five"))
    with pytest.raises(FileFormatError, match="n_theta"):
        read_signal(path)
    rewrite(head.replace(b"grid=gauss", b"grid=latlon"))
    with pytest.raises(FileFormatError, match="grid"):
        read_signal(path)
    rewrite(head.replace(b"kind=complex", b"kind=quaternion"))
    with pytest.raises(FileFormatError, match="kind"):
        read_signal(path)
    rewrite(head, payload[:-8])
    with pytest.raises(FileFormatError, match="payload"):
        read_signal(path)
    rewrite(head + b" orphan")
    with pytest.raises(FileFormatError, match="malformed"):
        read_signal(path)


def test_coefficients_round_trip(tmp_path):
    path = tmp_path / "coef.bin"
    f = _noise_signal(8, 7)
    grid = make_so3_grid(0.8, 1.2)
    coeffs = forward_transform(f, uniform_specs("omega", 2.0, SCALES),
                               grid, SCALES)
    assert coeffs.under_resolved
    write_coefficients(path, coeffs)
    back = read_coefficients(path)
    assert back.family == "omega"
    assert back.l_band == 8
    assert back.under_resolved
    assert back.taus == (2.0, 2.0)
    assert back.grid.n_carriers == grid.n_carriers
    assert (back.scales.rho0, back.scales.q) == (1.0, 0.5)
    for j in range(2):
        assert np.array_equal(back.values[j], coeffs.values[j])

    # per-carrier selectivities survive as arrays
    taus = np.where(grid.carrier_thetas < 0.5 * np.pi, 1.0, 4.0)
    from sphwave.profiles import WaveletSpec
    specs = tuple(tuple(WaveletSpec("omega", rho, float(t)) for t in taus)
                  for rho in SCALES)
    coeffs = forward_transform(f, specs, grid, SCALES)
    write_coefficients(path, coeffs)
    back = read_coefficients(path)
    for j in range(2):
        assert np.array_equal(np.asarray(back.taus[j]), taus)
        assert np.array_equal(back.values[j], coeffs.values[j])


def test_coefficients_header_errors(tmp_path):
    path = tmp_path / "coef.bin"
    f = _noise_signal(6, 7)
    grid = make_so3_grid(0.8, 1.2)
    coeffs = forward_transform(f, uniform_specs("omega", 2.0, SCALES),
                               grid, SCALES)
    write_coefficients(path, coeffs)
    raw = path.read_bytes()
    head, _, payload = raw.partition(b"\n")

    path.write_bytes(head.replace(b"SPHWCF1", b"NOPE") + b"\n" + payload)
    with pytest.raises(FileFormatError, match="magic"):
        read_coefficients(path)
    path.write_bytes(head.replace(b"n_carriers=54", b"n_carriers=53")
                     + b"\n" + payload)
    with pytest.raises(FileFormatError, match="n_carriers"):
        read_coefficients(path)
    path.write_bytes(head + b"\n" + payload[:-16])
    with pytest.raises(FileFormatError, match="payload"):
        read_coefficients(path)


def test_selectivity_csv_round_trip(tmp_path):
    path = tmp_path / "map.csv"
    f = _noise_signal(8, 31)
    grid = make_so3_grid(0.8, 1.2)
    tsel = SelectivitySet((1.0, 2.0, 4.0))
    smap = selectivity_scan(f, SCALES, grid, tsel)
    write_selectivity_csv(path, smap)
    rows = read_selectivity_rows(path)
    assert len(rows) == 2 * grid.n_carriers
    for row, want in zip(rows, smap.rows()):
        assert row[:2] == want[:2]
        # repr-based formatting keeps every float bit-exact
        assert row[2:] == tuple(float(x) for x in want[2:]), row[:2]

    path.write_text("j,alpha2,theta2\n")
    with pytest.raises(FileFormatError, match="header"):
        read_selectivity_rows(path)
    path.write_text("j,alpha2,theta2,phi2,tau_star,phi1_star,value\n0,1\n")
    with pytest.raises(FileFormatError, match="columns"):
        read_selectivity_rows(path)


def test_load_config(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"family": "omega", "taus": [1, 2, 4],
                                "l_band": 16, "q": 0.5}))
    cfg = load_config(path)
    assert cfg["taus"] == [1.0, 2.0, 4.0]
    assert cfg["l_band"] == 16

    path.write_text(json.dumps({"l_bandd": 16}))
    with pytest.raises(FileFormatError, match="l_bandd"):
        load_config(path)
    path.write_text("[1, 2]")
    with pytest.raises(FileFormatError, match="top level"):
        load_config(path)
    path.write_text("{not json")
    with pytest.raises(FileFormatError, match="not valid JSON"):
        load_config(path)
