"""Rotation-grid analysis, adjoint, frame operator, and reconstruction."""

import numpy as np
import pytest

from sphwave.profiles import WaveletSpec, evaluate_wavelet
from sphwave.sphfn import (CoefficientTable, SphericalSignal, analyze_signal,
                           coef_index, default_grid_spec, grid_phis,
                           make_colat_grid, spherical_harmonic,
                           synthesize_signal)
from sphwave.so3 import (make_rotation, make_scale_sequence, make_so3_grid,
                         rotate_signal_pullback)
from sphwave.transform import (FrameConvergenceError, FrameOperatorConfig,
                               adaptive_frame_matrix, adjoint_transform,
                               forward_transform, frame_matrix, reconstruct,
                               rotate_coefficients, uniform_specs)
from sphwave.transform import _tilt_blocks

SCALES = make_scale_sequence(1.0, 0.5, 1)


def _random_table(l_band, seed, kill_below=0):
    rng = np.random.default_rng(seed)
    n = (l_band + 1) ** 2
    vec = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    if kill_below >= 0:
        vec[:coef_index(kill_below, kill_below) + 1] = 0.0
    return CoefficientTable(l_band, vec)


def _signal(table):
    return synthesize_signal(table, default_grid_spec(table.l_band))


def _evaluate_table(table, theta, phi):
    out = np.zeros(np.broadcast(theta, phi).shape, dtype=complex)
    for l in range(table.l_band + 1):
        for k in range(-l, l + 1):
            c = table.get(l, k)
            if c != 0.0:
                out += c * spherical_harmonic(l, k, theta, phi)
    return out


def test_tilt_blocks_unitary():
    for theta in (0.35, 1.2):
        blocks = _tilt_blocks(theta, 8)
        for l, b in enumerate(blocks):
            gram = b.conj().T @ b
            assert np.max(np.abs(gram - np.eye(2 * l + 1))) < 1e-12, (theta, l)
    for l, b in enumerate(_tilt_blocks(0.0, 5)):
        assert np.max(np.abs(b - np.eye(2 * l + 1))) < 1e-12, l


def test_forward_matches_spatial_quadrature():
    # independent check: rotate the kernel pointwise and integrate the
    # product with the signal on a quadrature grid resolving the kernel
    l_band = 8
    table = _random_table(l_band, 31, kill_below=-1)
    f = _signal(table)
    grid = make_so3_grid(0.8, 1.2)
    coeffs = forward_transform(f, uniform_specs("omega", 2.0, SCALES),
                               grid, SCALES)
    nt, nph = 128, 256
    colat = make_colat_grid(nt)
    th = colat.nodes[:, None]
    ph = (2.0 * np.pi * np.arange(nph) / nph)[None, :]
    fv = _evaluate_table(table, th, ph)
    wq = colat.weights[:, None] * (2.0 * np.pi / nph)
    scale = max(np.abs(v).max() for v in coeffs.values)
    for j, ci, ai in ((0, 3, 0), (0, 17, 2), (1, 11, 4), (1, 30, 1)):
        cell = grid.cells[ci]
        g = make_rotation(grid.axial_angles[ai], cell.theta, cell.phi)
        spec_w = WaveletSpec("omega", SCALES[j], 2.0)
        kern = lambda t, p: evaluate_wavelet(spec_w, t, p)
        psi_g = rotate_signal_pullback(g, kern)(
            np.broadcast_to(th, fv.shape), np.broadcast_to(ph, fv.shape))
        ref = np.sum(wq * psi_g * fv) / (4.0 * np.pi)
        got = coeffs.values[j][ci, ai]
        assert abs(got - ref) < 1e-10 * scale, (j, ci, ai)


def test_forward_linearity():
    l_band = 6
    ta = _random_table(l_band, 41, kill_below=-1)
    tb = _random_table(l_band, 42, kill_below=-1)
    alpha = 0.7 - 0.3j
    tc = CoefficientTable(l_band, alpha * ta.values + tb.values)
    grid = make_so3_grid(0.5, 0.5)
    specs = uniform_specs("omega", 2.0, SCALES)
    wa = forward_transform(_signal(ta), specs, grid, SCALES)
    wb = forward_transform(_signal(tb), specs, grid, SCALES)
    wc = forward_transform(_signal(tc), specs, grid, SCALES)
    for j in range(len(SCALES)):
        ref = alpha * wa.values[j] + wb.values[j]
        scale = np.max(np.abs(ref))
        assert np.max(np.abs(wc.values[j] - ref)) < 1e-12 * scale


def test_low_degree_visibility():
    l_band = 6
    grid = make_so3_grid(0.5, 0.5)
    const = CoefficientTable(l_band)
    const.set(0, 0, 2.0 + 1.0j)
    w0 = forward_transform(_signal(const), uniform_specs("omega", 2.0, SCALES),
                           grid, SCALES)
    assert max(np.abs(v).max() for v in w0.values) < 1e-14
    lone = CoefficientTable(l_band)
    lone.set(1, 1, 1.0)
    f1 = _signal(lone)
    for family in ("omega", "upsilon"):
        w1 = forward_transform(f1, uniform_specs(family, 2.0, SCALES),
                               grid, SCALES)
        # degree 1 is genuinely visible to both families (the second one
        # only nominally suppresses it)
        assert max(np.abs(v).max() for v in w1.values) > 1e-4, family


def test_energy_identity():
    l_band = 6
    table = _random_table(l_band, 33, kill_below=-1)
    f = _signal(table)
    grid = make_so3_grid(0.5, 0.5)
    coeffs = forward_transform(f, uniform_specs("omega", 2.0, SCALES),
                               grid, SCALES)
    st = adjoint_transform(coeffs)
    energy = coeffs.total_energy()
    assert abs(energy - np.vdot(table.values, st.values).real) < 1e-12 * energy
    w = coeffs.weights(0)
    assert w.shape == coeffs.values[0].shape
    assert np.all(w > 0)
    assert coeffs.n_coefficients == sum(v.size for v in coeffs.values)


def test_frame_matrix_matches_composition():
    l_band = 6
    table = _random_table(l_band, 33, kill_below=-1)
    grid = make_so3_grid(0.5, 0.5)
    coeffs = forward_transform(_signal(table),
                               uniform_specs("omega", 2.0, SCALES),
                               grid, SCALES)
    st = adjoint_transform(coeffs)
    s = frame_matrix("omega", [2.0, 2.0], grid, SCALES, l_band)
    assert np.max(np.abs(s - s.conj().T)) < 1e-14 * np.max(np.abs(s))
    sv = s @ table.values
    assert np.max(np.abs(sv - st.values)) < 1e-12 * np.max(np.abs(st.values))


def test_adaptive_matrix_matches_uniform():
    l_band = 6
    grid = make_so3_grid(0.5, 0.5)
    table = _random_table(l_band, 36, kill_below=0)
    specs = [tuple(WaveletSpec("omega", rho, 2.0)
                   for _ in range(grid.n_carriers)) for rho in SCALES]
    coeffs = forward_transform(_signal(table), specs, grid, SCALES)
    s_uniform = frame_matrix("omega", [2.0, 2.0], grid, SCALES, l_band)
    s_adaptive = adaptive_frame_matrix(coeffs)
    scale = np.max(np.abs(s_uniform))
    assert np.max(np.abs(s_adaptive - s_uniform)) < 1e-13 * scale


def test_rotate_coefficients_matches_pullback():
    l_band = 5
    table = _random_table(l_band, 44, kill_below=-1)
    g = make_rotation(0.9, 0.7, 2.0)
    rotated = rotate_signal_pullback(
        g, lambda t, p: _evaluate_table(table, t, p))
    gspec = default_grid_spec(l_band)
    colat = make_colat_grid(gspec.n_theta)
    tt, pp = np.meshgrid(colat.nodes, grid_phis(gspec), indexing="ij")
    ref = analyze_signal(SphericalSignal(rotated(tt, pp), gspec, colat))
    got = rotate_coefficients(table, g)
    scale = np.sqrt(table.norm_sq())
    assert np.max(np.abs(got.values - ref.values)) < 1e-10 * scale


def test_reconstruct_uniform():
    table = _random_table(8, 35, kill_below=0)
    f = _signal(table)
    grid = make_so3_grid(0.2, 0.2)
    coeffs = forward_transform(f, uniform_specs("omega", 2.0, SCALES),
                               grid, SCALES)
    assert not coeffs.under_resolved
    rec = reconstruct(coeffs)
    scale = np.max(np.abs(f.values))
    assert np.max(np.abs(rec.values - f.values)) < 1e-7 * scale


def test_reconstruct_mixed_selectivity():
    table = _random_table(8, 35, kill_below=0)
    f = _signal(table)
    grid = make_so3_grid(0.2, 0.2)
    tau_a = np.where(grid.carrier_thetas < 0.5 * np.pi, 1.0, 2.0)
    tau_b = np.where(grid.carrier_phis < np.pi, 2.0, 4.0)
    specs = []
    for j, rho in enumerate(SCALES):
        arr = tau_a if j == 0 else tau_b
        specs.append(tuple(WaveletSpec("omega", rho, float(t)) for t in arr))
    coeffs = forward_transform(f, specs, grid, SCALES)
    assert all(np.ndim(t) == 1 for t in coeffs.taus)
    rec = reconstruct(coeffs)
    scale = np.max(np.abs(f.values))
    assert np.max(np.abs(rec.values - f.values)) < 1e-6 * scale


def test_reconstruct_upsilon_low_degree_handling():
    grid = make_so3_grid(0.2, 0.2)
    clean = _random_table(8, 35, kill_below=1)
    f = _signal(clean)
    coeffs = forward_transform(f, uniform_specs("upsilon", 2.0, SCALES),
                               grid, SCALES)
    rec = reconstruct(coeffs)
    scale = np.max(np.abs(f.values))
    assert np.max(np.abs(rec.values - f.values)) < 1e-7 * scale
    # with degree-1 content present the inversion is measurably biased:
    # the kernels see degree 1, the reconstruction excludes it
    dirty = _random_table(8, 35, kill_below=0)
    truncated = dirty.values.copy()
    truncated[coef_index(1, -1):coef_index(1, 1) + 1] = 0.0
    fd = _signal(dirty)
    ft = synthesize_signal(CoefficientTable(8, truncated), default_grid_spec(8))
    coeffs = forward_transform(fd, uniform_specs("upsilon", 2.0, SCALES),
                               grid, SCALES)
    rec = reconstruct(coeffs)
    err = np.max(np.abs(rec.values - ft.values)) / np.max(np.abs(ft.values))
    assert err > 1e-4


def test_reconstruct_controls():
    table = _random_table(6, 37, kill_below=0)
    f = _signal(table)
    grid = make_so3_grid(0.5, 0.5)
    coeffs = forward_transform(f, uniform_specs("omega", 2.0, SCALES),
                               grid, SCALES)
    cfg = FrameOperatorConfig(max_iterations=1, tolerance=1e-15, strict=True)
    with pytest.raises(FrameConvergenceError) as info:
        reconstruct(coeffs, cfg)
    assert info.value.iterations == 1
    assert info.value.residual > 0
    loose = FrameOperatorConfig(max_iterations=1, tolerance=1e-15, strict=False)
    rec = reconstruct(coeffs, loose)
    assert rec.values.shape == f.values.shape
    zero = forward_transform(_signal(CoefficientTable(6)),
                             uniform_specs("omega", 2.0, SCALES), grid, SCALES)
    assert np.all(reconstruct(zero).values == 0.0)


def test_under_resolved_flag():
    f = _signal(_random_table(8, 38, kill_below=0))
    coarse = forward_transform(f, uniform_specs("omega", 2.0, SCALES),
                               make_so3_grid(0.8, 1.2), SCALES)
    assert coarse.under_resolved
    fine = forward_transform(f, uniform_specs("omega", 2.0, SCALES),
                             make_so3_grid(0.2, 0.2), SCALES)
    assert not fine.under_resolved


def test_spec_validation():
    f = _signal(_random_table(4, 39, kill_below=0))
    grid = make_so3_grid(0.7, 0.9)
    with pytest.raises(ValueError):
        forward_transform(f, WaveletSpec("omega", 1.0, 2.0), grid, SCALES)
    mixed = (WaveletSpec("omega", 1.0, 2.0), WaveletSpec("upsilon", 0.5, 2.0))
    with pytest.raises(ValueError):
        forward_transform(f, mixed, grid, SCALES)
    wrong_rho = (WaveletSpec("omega", 1.0, 2.0), WaveletSpec("omega", 0.7, 2.0))
    with pytest.raises(ValueError):
        forward_transform(f, wrong_rho, grid, SCALES)
    short = [(WaveletSpec("omega", rho, 2.0),) * 2 for rho in SCALES]
    with pytest.raises(ValueError):
        forward_transform(f, short, grid, SCALES)


def test_config_validation():
    with pytest.raises(ValueError):
        FrameOperatorConfig(tolerance=0.0)
    with pytest.raises(ValueError):
        FrameOperatorConfig(max_iterations=0)
