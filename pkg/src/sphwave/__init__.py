"""Directional spherical wavelets with steerable angular selectivity."""

from .sphfn import (CoefficientTable, ColatGrid, SphericalGridSpec,
                    SphericalSignal, analyze_signal, coef_index,
                    default_grid_spec, grid_phis, make_colat_grid,
                    spherical_harmonic, synthesize_signal)
from .profiles import (FAMILIES, FAMILY_ORDER, AngularWindow, WaveletSpec,
                       angular_coefficient, angular_window, dog_window,
                       evaluate_wavelet, omega_profile, poisson_kernel,
                       upsilon_profile, wavelet_norm_sq)
from .admissibility import (AdmissibilityReport, admissibility_integral,
                            admissibility_report, analytic_upper_bound,
                            coefficient_upper_bound, default_k_cut,
                            wavelet_coefficient, wavelet_coefficient_table)
from .so3 import (GridCell, Rotation, ScaleSequence, SO3Grid, make_rotation,
                  make_scale_sequence, make_so3_grid, rotate_signal_pullback)
from .transform import (FrameConvergenceError, FrameOperatorConfig,
                        TransformCoefficients, adaptive_frame_matrix,
                        adjoint_transform, forward_transform, frame_apply,
                        frame_matrix, reconstruct, rotate_coefficients,
                        uniform_specs)
from .multiselect import (DiscretizationBudget, SelectivityMap,
                          SelectivitySet, adaptive_analysis,
                          budget_discretization, calibrate_budget,
                          estimate_sup_norms, refine_tau, select_tau,
                          selectivity_scan)
from .fileio import (FileFormatError, load_config, read_coefficients,
                     read_selectivity_rows, read_signal, write_coefficients,
                     write_selectivity_csv, write_signal)

__version__ = "0.1.0"

__all__ = [
    "CoefficientTable", "ColatGrid", "SphericalGridSpec", "SphericalSignal",
    "analyze_signal", "coef_index", "default_grid_spec", "grid_phis",
    "make_colat_grid", "spherical_harmonic", "synthesize_signal",
    "FAMILIES", "FAMILY_ORDER", "AngularWindow", "WaveletSpec",
    "angular_coefficient", "angular_window", "dog_window",
    "evaluate_wavelet", "omega_profile", "poisson_kernel", "upsilon_profile",
    "wavelet_norm_sq",
    "AdmissibilityReport", "admissibility_integral", "admissibility_report",
    "analytic_upper_bound", "coefficient_upper_bound", "default_k_cut",
    "wavelet_coefficient", "wavelet_coefficient_table",
    "GridCell", "Rotation", "ScaleSequence", "SO3Grid", "make_rotation",
    "make_scale_sequence", "make_so3_grid", "rotate_signal_pullback",
    "FrameConvergenceError", "FrameOperatorConfig", "TransformCoefficients",
    "adaptive_frame_matrix", "adjoint_transform", "forward_transform",
    "frame_apply", "frame_matrix", "reconstruct", "rotate_coefficients",
    "uniform_specs",
    "DiscretizationBudget", "SelectivityMap", "SelectivitySet",
    "adaptive_analysis", "budget_discretization", "calibrate_budget",
    "estimate_sup_norms", "refine_tau", "select_tau", "selectivity_scan",
    "FileFormatError", "load_config", "read_coefficients",
    "read_selectivity_rows", "read_signal", "write_coefficients",
    "write_selectivity_csv", "write_signal",
]
