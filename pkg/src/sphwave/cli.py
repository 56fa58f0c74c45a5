"""Command-line front end: kernel inspection, verification, analysis.

Commands write plot-ready CSV or the package's binary formats.  A JSON
config file (--config) supplies defaults; explicit flags win.  Exit
codes: 0 success, 1 numerical failure, 2 usage or format error.
"""

import argparse
import sys

import numpy as np

from .sphfn import (CoefficientTable, SphericalSignal, default_grid_spec,
                    grid_phis, make_colat_grid, synthesize_signal)
from .profiles import (AngularWindow, FAMILIES, WaveletSpec,
                       evaluate_wavelet)
from .admissibility import admissibility_report, wavelet_coefficient_table
from .so3 import make_rotation, make_scale_sequence, make_so3_grid
from .transform import (FrameConvergenceError, FrameOperatorConfig,
                        forward_transform, reconstruct,
                        rotate_coefficients, uniform_specs)
from .multiselect import SelectivitySet, selectivity_scan
from .fileio import (FileFormatError, load_config, read_coefficients,
                     read_signal, write_coefficients, write_selectivity_csv,
                     write_signal)


def _parse_taus(value):
    if isinstance(value, str):
        value = [part for part in value.split(",") if part]
    return [float(t) for t in value]


def _open_out(path):
    return sys.stdout if path is None else open(path, "w")


def _close_out(fh):
    if fh is not sys.stdout:
        fh.close()


def _require_out(args):
    if args.out is None:
        raise ValueError("this command writes a file and requires --out")


def cmd_profile(args):
    taus = _parse_taus(args.taus)
    if any(t < 1.0 for t in taus) or not taus:
        raise ValueError("profile selectivities must be >= 1")
    if args.samples < 1:
        raise ValueError("need at least one sample")
    phi = np.linspace(-0.5 * np.pi, 1.5 * np.pi, args.samples)
    windows = [AngularWindow.build(t) for t in taus]
    fh = _open_out(args.out)
    try:
        fh.write("phi," + ",".join("f_%g" % t for t in taus) + "\n")
        cols = [w.evaluate(phi) for w in windows]
        for i, p in enumerate(phi):
            fh.write("%r" % float(p))
            for c in cols:
                fh.write(",%r" % float(np.atleast_1d(c)[i]))
            fh.write("\n")
    finally:
        _close_out(fh)
    return 0


def cmd_kernel(args):
    spec = WaveletSpec(args.family, args.rho, args.tau)
    if args.format == "bin":
        _require_out(args)
        gspec = default_grid_spec(args.l_band)
        colat = make_colat_grid(gspec.n_theta)
        tt, pp = np.meshgrid(colat.nodes, grid_phis(gspec), indexing="ij")
        values = evaluate_wavelet(spec, tt, pp)
        write_signal(args.out, SphericalSignal(values, gspec, colat))
    else:
        theta = np.linspace(0.0, np.pi, args.n_theta)
        phi = np.linspace(-np.pi, np.pi, args.n_phi)
        tt, pp = np.meshgrid(theta, phi, indexing="ij")
        values = evaluate_wavelet(spec, tt, pp)
        fh = _open_out(args.out)
        try:
            fh.write("theta,phi,value\n")
            for i in range(args.n_theta):
                for j in range(args.n_phi):
                    fh.write("%r,%r,%r\n" % (float(theta[i]), float(phi[j]),
                                             float(values[i, j])))
        finally:
            _close_out(fh)
    return 0


def cmd_verify(args):
    if args.l_max < 10:
        raise ValueError("verification needs l_max of at least 10")
    report = admissibility_report(args.family, args.tau, args.l_max)
    print("family %s  tau %g  nominal order %d  degrees 0..%d"
          % (report.family, report.tau, report.order, report.l_max))
    print("analytic upper bound   %.9e" % report.analytic_bound)
    print("max ratio G(l)/(2l+1)  %.9e" % report.upper_bound)
    print("min ratio above order  %.9e" % report.lower_bound)
    for l, res in enumerate(report.vanishing_residuals):
        print("vanishing residual G(%d) = %.3e" % (l, res))
    for note in report.failures:
        print("FAIL: " + note)
    print("verdict: " + ("PASS" if report.ok else "FAIL"))
    return 0 if report.ok else 1


def _preset_table(args, rng):
    l_band = args.l_band
    table = CoefficientTable(l_band)
    if args.preset == "zonal-bump":
        for l in range(l_band + 1):
            table.set(l, 0, np.exp(-args.width * l * (l + 1)))
    elif args.preset == "ridge":
        base = wavelet_coefficient_table(
            WaveletSpec(args.family, args.rho, args.tau), l_band)
        g = make_rotation(args.orientation, args.theta, args.phi)
        table = rotate_coefficients(base, g)
    elif args.preset == "two-ridges":
        broad = rotate_coefficients(
            wavelet_coefficient_table(
                WaveletSpec(args.family, args.rho, args.tau_broad), l_band),
            make_rotation(args.orientation, args.theta, args.phi))
        sharp = rotate_coefficients(
            wavelet_coefficient_table(
                WaveletSpec(args.family, args.rho, args.tau_sharp), l_band),
            make_rotation(args.orientation, np.pi - args.theta,
                          args.phi + np.pi))
        table = CoefficientTable(l_band, broad.values + sharp.values)
    elif args.preset == "noise":
        n = table.values.size
        table.values[:] = (rng.standard_normal(n)
                           + 1j * rng.standard_normal(n))
        for l in range(min(1, l_band) + 1):
            table.degree_block(l)[:] = 0.0
    else:
        raise ValueError("unknown preset %r" % args.preset)
    return table


def cmd_synthesize(args):
    _require_out(args)
    rng = np.random.default_rng(args.seed)
    table = _preset_table(args, rng)
    signal = synthesize_signal(table, default_grid_spec(args.l_band))
    write_signal(args.out, signal)
    return 0


def _scales_and_grid(args):
    scales = make_scale_sequence(args.rho0, args.q, args.j_max)
    grid = make_so3_grid(args.delta2, args.delta1)
    return scales, grid


def cmd_analyze(args):
    _require_out(args)
    signal = read_signal(args.infile)
    scales, grid = _scales_and_grid(args)
    coeffs = forward_transform(
        signal, uniform_specs(args.family, args.tau, scales), grid, scales)
    if coeffs.under_resolved:
        print("warning: grid under-resolves the signal band; "
              "reconstruction from these coefficients will be degraded",
              file=sys.stderr)
    write_coefficients(args.out, coeffs)
    return 0


def cmd_select(args):
    _require_out(args)
    signal = read_signal(args.infile)
    scales, grid = _scales_and_grid(args)
    tsel = SelectivitySet(tuple(_parse_taus(args.taus)), args.tau_cap)
    smap = selectivity_scan(signal, scales, grid, tsel, args.family)
    write_selectivity_csv(args.out, smap)
    return 0


def cmd_reconstruct(args):
    _require_out(args)
    coeffs = read_coefficients(args.infile)
    cfg = FrameOperatorConfig(max_iterations=args.max_iterations,
                              tolerance=args.tolerance)
    signal = reconstruct(coeffs, cfg)
    write_signal(args.out, signal)
    return 0


def _add_common(sub):
    sub.add_argument("--config", default=None,
                     help="JSON config supplying flag defaults")
    sub.add_argument("--out", default=None, help="output path")


def _add_grid_flags(sub):
    sub.add_argument("--family", choices=sorted(FAMILIES), default="omega")
    sub.add_argument("--rho0", type=float, default=1.0,
                     help="coarsest scale")
    sub.add_argument("--q", type=float, default=0.5,
                     help="dyadic scale ratio in (1/4, 1)")
    sub.add_argument("--j-max", type=int, default=2,
                     help="finest scale index")
    sub.add_argument("--delta2", type=float, default=0.2,
                     help="carrier cell diameter bound")
    sub.add_argument("--delta1", type=float, default=0.2,
                     help="axial angle step bound")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sphwave",
        description="directional spherical wavelets with steerable "
                    "angular selectivity")
    subs = parser.add_subparsers(dest="command", required=True)
    registry = {}

    sub = subs.add_parser("profile", help="angular window curves as CSV")
    _add_common(sub)
    sub.add_argument("--taus", default="1,2,4,8,16",
                     help="comma-separated selectivities")
    sub.add_argument("--samples", type=int, default=513)
    sub.set_defaults(func=cmd_profile)
    registry["profile"] = sub

    sub = subs.add_parser("kernel", help="sample one kernel on a grid")
    _add_common(sub)
    sub.add_argument("--family", choices=sorted(FAMILIES), default="omega")
    sub.add_argument("--rho", type=float, default=0.5)
    sub.add_argument("--tau", type=float, default=1.0)
    sub.add_argument("--l-band", type=int, default=16,
                     help="band limit of the binary sampling grid")
    sub.add_argument("--n-theta", type=int, default=181)
    sub.add_argument("--n-phi", type=int, default=181)
    sub.add_argument("--format", choices=("csv", "bin"), default="csv")
    sub.set_defaults(func=cmd_kernel)
    registry["kernel"] = sub

    sub = subs.add_parser("verify", help="check the admissibility bounds")
    _add_common(sub)
    sub.add_argument("--family", choices=sorted(FAMILIES), default="omega")
    sub.add_argument("--tau", type=float, default=1.0)
    sub.add_argument("--l-max", type=int, default=64)
    sub.set_defaults(func=cmd_verify)
    registry["verify"] = sub

    sub = subs.add_parser("synthesize", help="write a test signal")
    _add_common(sub)
    sub.add_argument("--preset", required=True,
                     choices=("zonal-bump", "ridge", "two-ridges", "noise"))
    sub.add_argument("--l-band", type=int, default=16)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--width", type=float, default=0.05,
                     help="zonal bump falloff per l(l+1)")
    sub.add_argument("--family", choices=sorted(FAMILIES), default="omega")
    sub.add_argument("--rho", type=float, default=0.5,
                     help="ridge kernel scale")
    sub.add_argument("--tau", type=float, default=8.0,
                     help="ridge kernel selectivity")
    sub.add_argument("--theta", type=float, default=np.pi / 3,
                     help="ridge carrier colatitude")
    sub.add_argument("--phi", type=float, default=1.0,
                     help="ridge carrier longitude")
    sub.add_argument("--orientation", type=float, default=0.0,
                     help="ridge axial rotation")
    sub.add_argument("--tau-broad", type=float, default=1.0)
    sub.add_argument("--tau-sharp", type=float, default=8.0)
    sub.set_defaults(func=cmd_synthesize)
    registry["synthesize"] = sub

    sub = subs.add_parser("analyze", help="wavelet-analyze a signal file")
    _add_common(sub)
    sub.add_argument("--in", dest="infile", required=True)
    sub.add_argument("--tau", type=float, default=4.0,
                     help="uniform selectivity")
    _add_grid_flags(sub)
    sub.set_defaults(func=cmd_analyze)
    registry["analyze"] = sub

    sub = subs.add_parser("select", help="per-position selectivity map")
    _add_common(sub)
    sub.add_argument("--in", dest="infile", required=True)
    sub.add_argument("--taus", default="1,2,4,8,16")
    sub.add_argument("--tau-cap", type=float, default=16.0)
    _add_grid_flags(sub)
    sub.set_defaults(func=cmd_select)
    registry["select"] = sub

    sub = subs.add_parser("reconstruct", help="invert coefficients")
    _add_common(sub)
    sub.add_argument("--in", dest="infile", required=True)
    sub.add_argument("--tolerance", type=float, default=1e-10)
    sub.add_argument("--max-iterations", type=int, default=300)
    sub.set_defaults(func=cmd_reconstruct)
    registry["reconstruct"] = sub

    return parser, registry


def main(argv=None):
    if argv is None:
        argv = sys.argv[1:]
    parser, registry = build_parser()
    # config is applied as per-command parser defaults so flags win
    if "--config" in argv:
        try:
            cfg = load_config(argv[argv.index("--config") + 1])
        except IndexError:
            parser.error("--config requires a path")
        except (OSError, FileFormatError) as exc:
            print("error: %s" % exc, file=sys.stderr)
            return 2
        for sub in registry.values():
            known = {a.dest for a in sub._actions}
            sub.set_defaults(**{k: v for k, v in cfg.items() if k in known})
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileFormatError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except (FrameConvergenceError, ArithmeticError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    except ValueError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except OSError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
