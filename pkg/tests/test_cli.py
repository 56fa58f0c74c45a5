"""Command-line surface: outputs, presets, config merging, exit codes."""

import json

import numpy as np
import pytest

from sphwave.cli import main
from sphwave.fileio import read_selectivity_rows, read_signal
from sphwave.sphfn import analyze_signal, harmonic_matrix
from sphwave.so3 import (axis_rotation, point_angles, sphere_points,
                         tilt_rotation)


def _read_csv(path):
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = np.array([[float(x) for x in line.split(",")]
                         for line in fh])
    return header, rows


def _lobe_stats(values):
    """(sign changes, half-max width in samples) of one longitude row."""
    center = values.size // 2
    w = np.sign(values[center]) * values
    # products of adjacent near-crossing samples can underflow to zero,
    # so count alternations of the sign sequence instead
    s = np.sign(w)
    s = s[s != 0.0]
    changes = int(np.sum(s[:-1] != s[1:]))
    above = w >= 0.5 * w[center]
    lo = hi = center
    while lo > 0 and above[lo - 1]:
        lo -= 1
    while hi + 1 < w.size and above[hi + 1]:
        hi += 1
    return changes, hi - lo + 1


def test_profile_csv(tmp_path):
    out = tmp_path / "win.csv"
    assert main(["profile", "--out", str(out)]) == 0
    header, rows = _read_csv(out)
    assert header == ["phi", "f_1", "f_2", "f_4", "f_8", "f_16"]
    assert rows.shape == (513, 6)
    phi = rows[:, 0]
    assert phi[0] == -0.5 * np.pi and phi[-1] == 1.5 * np.pi
    at = {v: np.argmin(np.abs(phi - v)) for v in (0.0, 0.5 * np.pi, np.pi)}
    widths = []
    for c in range(1, 6):
        col = rows[:, c]
        assert col[at[0.0]] > 0.0, c          # positive lobe at 0
        assert col[at[np.pi]] < 0.0, c        # negative lobe at pi
        assert abs(col[at[0.5 * np.pi]]) < 1e-14, c
        above = col >= 0.5 * col[at[0.0]]
        widths.append(int(np.sum(above)))
    assert widths == sorted(widths, reverse=True)  # sharper as tau grows

    assert main(["profile", "--out", str(out), "--samples", "1"]) == 0
    assert len(out.read_text().splitlines()) == 2
    assert main(["profile", "--out", str(out), "--taus", "0.5,2"]) == 2


def test_kernel_csv_lobes(tmp_path):
    stats = {}
    for tau in (1.0, 16.0):
        out = tmp_path / ("k%g.csv" % tau)
        code = main(["kernel", "--out", str(out), "--rho", "0.5",
                     "--tau", "%g" % tau, "--n-theta", "61",
                     "--n-phi", "181"])
        assert code == 0
        _, rows = _read_csv(out)
        values = rows[:, 2].reshape(61, 181)
        # sin(pi) only reaches the rounding floor, so the far pole row
        # is tiny rather than exactly zero
        assert np.all(values[0] == 0.0)
        assert np.max(np.abs(values[-1])) < 1e-30
        row = values[np.argmax(np.max(np.abs(values), axis=1))]
        stats[tau] = _lobe_stats(row)
    assert stats[1.0][0] == 2 and stats[16.0][0] == 2
    assert stats[16.0][1] < stats[1.0][1]


def test_kernel_bin_round_trip(tmp_path):
    out = tmp_path / "k.bin"
    args = ["kernel", "--format", "bin", "--out", str(out),
            "--rho", "0.5", "--tau", "4", "--l-band", "8"]
    assert main(args) == 0
    first = out.read_bytes()
    sig = read_signal(out)
    assert sig.spec.l_band == 8
    assert sig.values.dtype == np.float64
    assert main(args) == 0
    assert out.read_bytes() == first
    assert main(["kernel", "--format", "bin"]) == 2  # --out required


def test_verify_exit_codes(capsys):
    assert main(["verify", "--family", "omega", "--tau", "1",
                 "--l-max", "12"]) == 0
    text = capsys.readouterr().out
    assert "verdict: PASS" in text
    assert "analytic upper bound" in text

    assert main(["verify", "--family", "upsilon", "--tau", "1",
                 "--l-max", "12"]) == 1
    text = capsys.readouterr().out
    assert "verdict: FAIL" in text
    assert "vanishing condition" in text

    assert main(["verify", "--l-max", "8"]) == 2
    assert "at least 10" in capsys.readouterr().err


def test_synthesize_zonal_and_determinism(tmp_path):
    out1 = tmp_path / "a.bin"
    out2 = tmp_path / "b.bin"
    args = ["synthesize", "--preset", "zonal-bump", "--l-band", "8",
            "--seed", "3"]
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    sig = read_signal(out1)
    spread = np.max(np.abs(sig.values - sig.values.mean(axis=1)[:, None]))
    assert spread < 1e-12

    noise = ["synthesize", "--preset", "noise", "--l-band", "8",
             "--seed", "9"]
    assert main(noise + ["--out", str(out1)]) == 0
    assert main(noise + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    table = analyze_signal(read_signal(out1))
    assert np.max(np.abs(table.values[:4])) < 1e-13
    with pytest.raises(SystemExit):
        main(["synthesize", "--preset", "wiggle", "--out", str(out1)])


def test_synthesize_ridge_rotation(tmp_path):
    theta, phi = np.pi / 3, 1.0
    paths = []
    for orientation in (0.0, 0.5 * np.pi):
        out = tmp_path / ("r%g.bin" % orientation)
        assert main(["synthesize", "--preset", "ridge", "--l-band", "8",
                     "--rho", "0.5", "--tau", "2", "--theta", "%r" % theta,
                     "--phi", "%r" % phi, "--orientation",
                     "%r" % orientation, "--out", str(out)]) == 0
        paths.append(out)
    f0, f90 = read_signal(paths[0]), read_signal(paths[1])
    # the two ridges differ by a rotation about the carrier axis
    g0 = axis_rotation(phi) @ tilt_rotation(theta)
    rel = g0 @ axis_rotation(0.5 * np.pi) @ g0.T
    table0 = analyze_signal(f0)
    tt, pp = np.meshgrid(f0.thetas, f0.phis, indexing="ij")
    xyz = np.tensordot(rel.T, sphere_points(tt, pp), axes=1)
    bt, bp = point_angles(xyz)
    expected = (table0.values
                @ harmonic_matrix(8, bt, bp)).reshape(f90.values.shape)
    scale = np.max(np.abs(f0.values))
    assert np.max(np.abs(f90.values - expected)) < 1e-7 * scale


def test_analyze_reconstruct_round_trip(tmp_path, capsys):
    sig = tmp_path / "sig.bin"
    coef = tmp_path / "coef.bin"
    rec = tmp_path / "rec.bin"
    assert main(["synthesize", "--preset", "noise", "--l-band", "8",
                 "--seed", "3", "--out", str(sig)]) == 0
    assert main(["analyze", "--in", str(sig), "--tau", "2",
                 "--j-max", "1", "--out", str(coef)]) == 0
    assert capsys.readouterr().err == ""
    assert main(["reconstruct", "--in", str(coef), "--out", str(rec)]) == 0
    f = read_signal(sig)
    g = read_signal(rec)
    scale = np.max(np.abs(f.values))
    assert np.max(np.abs(g.values - f.values)) < 1e-6 * scale

    # a too-coarse grid is flagged but still written
    assert main(["analyze", "--in", str(sig), "--tau", "2", "--j-max", "1",
                 "--delta2", "0.8", "--delta1", "1.2",
                 "--out", str(coef)]) == 0
    assert "under-resolves" in capsys.readouterr().err


def test_select_two_ridges(tmp_path):
    sig = tmp_path / "sig.bin"
    out = tmp_path / "map.csv"
    assert main(["synthesize", "--preset", "two-ridges", "--l-band", "16",
                 "--rho", "1.0", "--tau-broad", "1", "--tau-sharp", "8",
                 "--theta", "%r" % (np.pi / 3), "--phi", "1.0",
                 "--out", str(sig)]) == 0
    assert main(["select", "--in", str(sig), "--j-max", "0",
                 "--delta2", "0.4", "--out", str(out)]) == 0
    rows = read_selectivity_rows(out)
    taus = {row[4] for row in rows}
    assert len(taus) >= 2


def test_config_merge_flags_win(tmp_path):
    cfg = tmp_path / "run.json"
    out1 = tmp_path / "a.bin"
    out2 = tmp_path / "b.bin"
    cfg.write_text(json.dumps({"l_band": 6, "seed": 9}))
    assert main(["synthesize", "--preset", "noise", "--config", str(cfg),
                 "--out", str(out1)]) == 0
    assert main(["synthesize", "--preset", "noise", "--l-band", "6",
                 "--seed", "9", "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()

    # an explicit flag overrides the config default
    assert main(["synthesize", "--preset", "noise", "--config", str(cfg),
                 "--seed", "4", "--out", str(out1)]) == 0
    assert main(["synthesize", "--preset", "noise", "--l-band", "6",
                 "--seed", "4", "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()

    cfg.write_text(json.dumps({"vibes": 11}))
    assert main(["synthesize", "--preset", "noise", "--config", str(cfg),
                 "--out", str(out1)]) == 2
    with pytest.raises(SystemExit):
        main(["synthesize", "--preset", "noise", "--config"])


def test_bad_input_exit_codes(tmp_path, capsys):
    missing = tmp_path / "missing.bin"
    out = tmp_path / "out.bin"
    assert main(["analyze", "--in", str(missing), "--out", str(out)]) == 2

    corrupt = tmp_path / "corrupt.bin"
    corrupt.write_bytes(b"SPHSIG1 grid=gauss n_theta=4 n_phi=4\n" + b"x" * 8)
    assert main(["analyze", "--in", str(corrupt), "--out", str(out)]) == 2
    assert "l_band" in capsys.readouterr().err
    assert main(["reconstruct", "--in", str(corrupt),
                 "--out", str(out)]) == 2
