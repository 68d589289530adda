"""
Command-line front end.

    spectrum  bound energies of one or both partners next to the closed form
    verify    the full verification report
    sample    potentials and normalized wavefunctions on the grid, for plotting

Results go to standard output (or --out), diagnostics to stderr. Exit status:
0 success, 1 failed check, 2 usage or configuration error, 3 numerical
failure.
"""

import argparse
import csv
import io
import json
import logging
import math
import sys

import coloredlogs
import numpy as np

from ptsusy import analytic_ref, numerics, verify
from ptsusy.config import OUTPUT_FORMATS, build_config
from ptsusy.errors import (ConfigError, ConstraintError, HypergeometricError, IntertwiningError,
                           NormalizationError, ParameterError, PtsusyError, SolverError)
from ptsusy.susy_core import lambda_bar, scarf2_potentials

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

ZERO_MODE_TOL = 1e-6
SPECTRUM_COLUMNS = ["index", "energy_re", "energy_im", "residual", "analytic", "bound",
                    "continuum_edge", "zero_mode"]
SAMPLE_COLUMNS = ["x", "re", "im"]
CHECK_COLUMNS = ["name", "metric", "tolerance", "passed", "detail"]
OBJECTS = ("v1", "v2", "zero-mode", "psi1-n", "psi2-n")
WHICH = ("partner1", "partner2", "both")


class _Parser(argparse.ArgumentParser):
    # usage errors become exit 2 through the common error path
    def error(self, message):
        raise ConfigError(message)


def _number(value):
    """
    Plain float for output; repr is the shortest string that round-trips.
    Non-finite values are written as strings.
    """
    if value is None:
        return None
    value = float(value)
    if math.isfinite(value):
        return value
    return repr(value)


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


class Output(object):
    """
    One command's results: a config block, result rows and check rows.
    CSV carries the rows of the main table only.
    """

    def __init__(self, cfg, columns, table="results"):
        self.cfg = cfg
        self.columns = columns
        self.table = table
        self.results = []
        self.checks = []

    def add_result(self, row):
        self.results.append(row)

    def add_check(self, check):
        self.checks.append({
            "name": check.name,
            "metric": _number(check.metric),
            "tolerance": _number(check.tolerance),
            "passed": check.passed,
            "detail": check.detail,
        })

    def render(self):
        if self.cfg.output_format == "csv":
            buf = io.StringIO()
            writer = csv.writer(buf, lineterminator="\n")
            rows = self.results if self.table == "results" else self.checks
            writer.writerow(self.columns)
            for row in rows:
                writer.writerow([_cell(row.get(c)) for c in self.columns])
            return buf.getvalue()
        config = [{"key": k, "value": _number(v) if isinstance(v, float) else v}
                  for k, v in self.cfg.as_dict().items()]
        document = {"config": config, "results": self.results, "checks": self.checks}
        return json.dumps(document, indent=2, allow_nan=False) + "\n"

    def write(self):
        text = self.render()
        if self.cfg.output_path is None:
            sys.stdout.write(text)
            sys.stdout.flush()
        else:
            with open(self.cfg.output_path, "w", newline="") as f:
                f.write(text)
            log.info("[+] wrote {}".format(self.cfg.output_path))


def _spectrum_rows(spectrum, expected, partner, with_partner):
    rows = []
    for index, entry in enumerate(spectrum.bound):
        e = complex(entry.energy)
        analytic = min(expected, key=lambda c: abs(e - c)) if expected else None
        row = {
            "index": index,
            "energy_re": _number(e.real),
            "energy_im": _number(e.imag),
            "residual": _number(entry.residual),
            "analytic": _number(analytic),
            "bound": entry.bound,
            "continuum_edge": _number(spectrum.continuum_edge),
            "zero_mode": partner == "partner1" and abs(e) <= ZERO_MODE_TOL,
        }
        if with_partner:
            row["partner"] = partner
        rows.append(row)
    return rows


def cmd_spectrum(cfg, which):
    if which not in WHICH:
        raise ConfigError("--which must be one of {}".format(", ".join(WHICH)))
    p = cfg.params()
    grid = cfg.grid()
    pair = scarf2_potentials(p)
    levels = [level.energy for level in analytic_ref.bound_energies(p.mu, lambda_bar(p))]
    partners = ("partner1", "partner2") if which == "both" else (which,)
    columns = SPECTRUM_COLUMNS + (["partner"] if which == "both" else [])
    out = Output(cfg, columns)

    for partner in partners:
        potential = pair.v1 if partner == "partner1" else pair.v2
        log.info("[*] solving {} on {} points, L = {:g}{}".format(
            partner, grid.n_points, grid.half_width, " with h/2 refinement" if cfg.refine else ""))
        spectrum = numerics.solve_refined(potential, grid, p.continuum_edge,
                                              hermitian=partner == "partner2", refine_pass=cfg.refine)
        expected = levels + [0.0] if partner == "partner1" else levels
        rows = _spectrum_rows(spectrum, expected, partner, which == "both")
        log.info("[+] {}: {} bound states below {:g}".format(partner, len(rows), p.continuum_edge))
        for row in rows:
            out.add_result(row)
    out.write()
    return EXIT_OK


def cmd_verify(cfg):
    p = cfg.params()
    grid = cfg.grid()
    if math.isclose(p.ratio, analytic_ref.TABLE1_RATIO, rel_tol=1e-12):
        log.info("[*] lambda/mu = -5/2: running the table report")
        report = verify.table1_report(p, grid, cfg.refine)
    else:
        report = verify.spectral_report(p, grid, cfg.refine)

    out = Output(cfg, CHECK_COLUMNS, table="checks")
    for check in report.checks:
        out.add_check(check)
        if check.passed:
            log.debug("[+] {}: {:.3g} <= {:.3g}".format(check.name, check.metric, check.tolerance))
        else:
            log.error("[-] {}: {:.3g} > {:.3g} {}".format(check.name, check.metric, check.tolerance, check.detail))
    out.write()

    failed = report.failed
    if failed:
        log.error("[-] {} of {} checks failed".format(len(failed), len(report.checks)))
        return EXIT_CHECK_FAILED
    log.info("[+] all {} checks passed".format(len(report.checks)))
    return EXIT_OK


def _partner2_state(p, n):
    if math.isclose(p.ratio, analytic_ref.TABLE1_RATIO, rel_tol=1e-12):
        return analytic_ref.table1_wavefunction("partner2", n, p)
    return analytic_ref.legendre_eigenfunction(n, p)


def _partner1_state(p, n):
    if math.isclose(p.ratio, analytic_ref.TABLE1_RATIO, rel_tol=1e-12):
        return analytic_ref.table1_wavefunction("partner1", n, p)
    return verify.intertwined(scarf2_potentials(p).superpotential, analytic_ref.legendre_eigenfunction(n, p))


def cmd_sample(cfg, obj, n=0):
    if obj not in OBJECTS:
        raise ConfigError("--object must be one of {}".format(", ".join(OBJECTS)))
    p = cfg.params()
    grid = cfg.grid()
    pair = scarf2_potentials(p)

    if obj == "v1":
        func = pair.v1
    elif obj == "v2":
        func = pair.v2
    else:
        if obj == "zero-mode":
            w = analytic_ref.zero_mode(p)
        elif obj == "psi2-n":
            w = _partner2_state(p, n)
        else:
            w = _partner1_state(p, n)
        w = analytic_ref.normalized(w, p.mu)
        log.info("[*] {} normalized with N = {:.12g}".format(w.label, w.normalization))
        func = w.evaluate

    values = np.asarray(func(grid.nodes), dtype=complex)
    out = Output(cfg, SAMPLE_COLUMNS)
    for x, v in zip(grid.nodes, values):
        out.add_result({"x": _number(x), "re": _number(v.real), "im": _number(v.imag)})
    out.write()
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mu", dest="mu", type=float, default=None, help="scale mu of the potential")
    common.add_argument("--lambda", dest="lam", type=float, default=None, help="strength lambda")
    common.add_argument("--half-width", dest="half_width", type=float, default=None,
                        help="grid half width L (default 16/|mu|)")
    common.add_argument("--n-points", dest="n_points", type=int, default=None,
                        help="odd number of grid nodes (default 4001)")
    common.add_argument("--no-refine", dest="refine", action="store_const", const=False, default=None,
                        help="skip the h/2 Richardson pass")
    common.add_argument("--format", dest="output_format", choices=OUTPUT_FORMATS, default=None,
                        help="output format (default json)")
    common.add_argument("--out", dest="output_path", default=None, help="output file (default stdout)")
    common.add_argument("--config", dest="config_path", default=None, help="key=value config file")
    common.add_argument("--allow-mu-eq-lambda", dest="allow_mu_eq_lambda", action="store_const",
                        const=True, default=None, help="accept mu == lambda")
    common.add_argument("-v", "--verbose", dest="verbose", action="store_true", default=False)
    common.add_argument("-q", "--quiet", dest="quiet", action="store_true", default=False)

    parser = _Parser(prog="ptsusy",
                     description="PT-symmetric complex partner of the Scarf II potential: spectra, "
                                 "verification and plot data")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    spectrum = sub.add_parser("spectrum", parents=[common], help="bound energies")
    spectrum.add_argument("--which", dest="which", choices=WHICH, default="both")

    sub.add_parser("verify", parents=[common], help="run the verification report")

    sample = sub.add_parser("sample", parents=[common], help="export samples on the grid")
    sample.add_argument("--object", dest="object", choices=OBJECTS, required=True)
    sample.add_argument("--n", dest="n", type=int, default=0, help="quantum number for psi1-n / psi2-n")
    return parser


def _install_logging(args):
    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    coloredlogs.install(level=level, stream=sys.stderr)


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as err:
        coloredlogs.install(level=logging.INFO, stream=sys.stderr)
        log.error("[-] {}".format(err))
        return EXIT_USAGE
    _install_logging(args)

    try:
        cfg = build_config(args.config_path, mu=args.mu, lam=args.lam, half_width=args.half_width,
                           n_points=args.n_points, refine=args.refine, output_format=args.output_format,
                           output_path=args.output_path, allow_mu_eq_lambda=args.allow_mu_eq_lambda)
        cfg.validate()
        p = cfg.params()
        if p.exceptional:
            log.warning("[-] lambda/mu = {:g} is an integer: the zero mode is self-orthogonal and "
                        "E = 0 is an exceptional point of H1".format(p.ratio))
        if args.command == "spectrum":
            return cmd_spectrum(cfg, args.which)
        if args.command == "verify":
            return cmd_verify(cfg)
        return cmd_sample(cfg, args.object, args.n)
    except (ConfigError, ParameterError, ConstraintError) as err:
        log.error("[-] {}".format(err))
        return EXIT_USAGE
    except (SolverError, HypergeometricError, NormalizationError, IntertwiningError) as err:
        log.error("[-] numerical failure: {}".format(err))
        return EXIT_NUMERICAL
    except PtsusyError as err:
        log.error("[-] {}".format(err))
        return EXIT_NUMERICAL
    except (MemoryError, np.linalg.LinAlgError, FloatingPointError) as err:
        log.error("[-] numerical failure ({}): {}".format(type(err).__name__, err))
        return EXIT_NUMERICAL
