#!/usr/bin/env python3

# SPDX-FileCopyrightText: 2024 noise-fingerprint developers
#
# SPDX-License-Identifier: GPL-3.0-or-later


from argparse import RawTextHelpFormatter
import argparse
import logging
import sys

from noise_fingerprint.checksum import hash_from_file
from noise_fingerprint.config import DEFAULT_BINS
from noise_fingerprint.config import DEFAULT_PLOT_HEIGHT
from noise_fingerprint.config import DEFAULT_PLOT_WIDTH
from noise_fingerprint.config import DEFAULT_TAIL_FRACTION
from noise_fingerprint.config import DEFAULT_THRESHOLD
from noise_fingerprint.config import DEFAULT_TILE
from noise_fingerprint.config import MIN_MASK_COVERAGE
from noise_fingerprint.config import STORE_ENV_VAR
from noise_fingerprint.config import noise_fingerprint_version
from noise_fingerprint.exception import DomainError
from noise_fingerprint.exception import ModalityError
from noise_fingerprint.extraction import EYE_MODALITIES
from noise_fingerprint.extraction import MODALITIES
from noise_fingerprint.extraction import MODALITY_EYE_X
from noise_fingerprint.extraction import MODALITY_EYE_Y
from noise_fingerprint.extraction import MODALITY_FACE
from noise_fingerprint.extraction import MODALITY_FINGERPRINT
from noise_fingerprint.extraction import axis_variances
from noise_fingerprint.extraction import read_series
from noise_fingerprint.format.factory import FormatFactory
from noise_fingerprint.format.factory import supported_formats
from noise_fingerprint.matching import build_template
from noise_fingerprint.matching import fuse
from noise_fingerprint.matching import match_score
from noise_fingerprint.pipeline import CAPTURE_EYE
from noise_fingerprint.pipeline import CAPTURE_IMAGE
from noise_fingerprint.pipeline import eye_series
from noise_fingerprint.pipeline import image_series
from noise_fingerprint.pipeline import read_capture
from noise_fingerprint.pipeline import series_from_file
from noise_fingerprint.plot import PLOT_HISTOGRAM
from noise_fingerprint.plot import PLOT_KINDS
from noise_fingerprint.plot import PLOT_SCATTER
from noise_fingerprint.plot import PlotSpec
from noise_fingerprint.plot import emit_svg
from noise_fingerprint.simharness import load_config
from noise_fingerprint.simharness import run_simulation
from noise_fingerprint.simharness import write_results
from noise_fingerprint.stats import analyze
from noise_fingerprint.stats import histogram
from noise_fingerprint.stats import qq_normal
from noise_fingerprint.store import TemplateStore


PROGRAM_NAME = "noise-fingerprint"
PROGRAM_DESCRIPTION = "noise-fingerprint enrolls and verifies users by the noise statistics of\n" \
    "  fingerprint images, face images and eye-tracker traces"
PROGRAM_VERSION = noise_fingerprint_version
PROGRAM_LICENSE = "GPL-3.0-or-later"
PROGRAM_EXIT_CODES = "0  authenticated / success\n  1  rejected\n  2  error"
PROGRAM_ENVIRONMENT = STORE_ENV_VAR + "  default template store directory"

EYE_ALIAS = "eye"

EXIT_OK = 0
EXIT_REJECTED = 1
EXIT_ERROR = 2


def _modality(name):
    if name == EYE_ALIAS:
        return MODALITY_EYE_Y
    if name not in MODALITIES:
        raise argparse.ArgumentTypeError("unknown modality " + repr(name) + ", choose from "
                                         + str(MODALITIES + [ EYE_ALIAS ]))
    return name


def _common_options():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('-v', '--verbose',
                        action='store_true',
                        help='output verbose information to stderr',
                        default=False)
    common.add_argument('--store',
                        help='template store directory (default: $' + STORE_ENV_VAR + ' or ./templates)',
                        type=str,
                        default=None)
    common.add_argument('--modality',
                        help='modality: ' + ", ".join(MODALITIES) + " (" + EYE_ALIAS + " = " + MODALITY_EYE_Y + ")",
                        type=_modality,
                        default=None)
    common.add_argument('--tile',
                        help='frame side in pixels',
                        type=int,
                        default=DEFAULT_TILE)
    common.add_argument('--tail-fraction',
                        dest='tail_fraction',
                        help='fraction of values per tail used for tail deviation',
                        type=float,
                        default=DEFAULT_TAIL_FRACTION)
    common.add_argument('--stimulus-onset',
                        dest='stimulus_onset',
                        help='stimulus onset in seconds (overrides the trace comment line)',
                        type=float,
                        default=None)
    common.add_argument('--min-coverage',
                        dest='min_coverage',
                        help='minimum fraction of the image the mask must cover',
                        type=float,
                        default=MIN_MASK_COVERAGE)
    common.add_argument('--threshold',
                        help='acceptance threshold for match scores',
                        type=float,
                        default=DEFAULT_THRESHOLD)
    common.add_argument('--seed',
                        help='simulation seed (overrides the config)',
                        type=int,
                        default=None)
    common.add_argument('--output', '-o',
                        help='output file (default: stdout)',
                        type=str,
                        default=None)
    return common


def parse(argv=None):

    description = "NAME\n  " + PROGRAM_NAME + "\n\n"
    description = description + "DESCRIPTION\n  " + PROGRAM_DESCRIPTION + "\n\n"

    epilog = ""
    epilog = epilog + "EXIT STATUS\n  " + PROGRAM_EXIT_CODES + "\n\n"
    epilog = epilog + "ENVIRONMENT\n  " + PROGRAM_ENVIRONMENT + "\n\n"
    epilog = epilog + "VERSION\n  " + PROGRAM_VERSION + "\n\n"
    epilog = epilog + "LICENSE\n  " + PROGRAM_LICENSE + "\n\n"

    parser = argparse.ArgumentParser(
        prog=PROGRAM_NAME,
        description=description,
        epilog=epilog,
        formatter_class=RawTextHelpFormatter,
    )
    subparsers = parser.add_subparsers(dest='command', required=True)
    common = _common_options()

    enroll_parser = subparsers.add_parser('enroll', parents=[common],
                                          help='build and store a template from captures')
    enroll_parser.add_argument('user_id', help='user to enroll')
    enroll_parser.add_argument('inputs', nargs='+', help='captures (PPM image, eye trace CSV or series CSV)')
    enroll_parser.set_defaults(func=enroll)

    verify_parser = subparsers.add_parser('verify', parents=[common],
                                          help='match probes for all three modalities and fuse')
    verify_parser.add_argument('user_id', help='user to verify')
    verify_parser.add_argument('--fingerprint', required=True, help='fingerprint probe capture')
    verify_parser.add_argument('--face', required=True, help='face probe capture')
    verify_parser.add_argument('--eye', required=True, help='eye probe capture')
    verify_parser.set_defaults(func=verify)

    analyze_parser = subparsers.add_parser('analyze', parents=[common],
                                           help='histogram, QQ and tail report of one capture')
    analyze_parser.add_argument('input', help='capture to analyze')
    analyze_parser.add_argument('--bins', type=int, default=DEFAULT_BINS, help='histogram bins')
    analyze_parser.add_argument('--format', '-f',
                                help='report format. Supported formats: ' + str(supported_formats()),
                                type=str,
                                default="csv")
    analyze_parser.set_defaults(func=analyze_command)

    plot_parser = subparsers.add_parser('plot', parents=[common], help='render an SVG plot of one capture')
    plot_parser.add_argument('input', help='capture to plot')
    plot_parser.add_argument('--kind', choices=PLOT_KINDS, default=PLOT_SCATTER, help='plot type')
    plot_parser.add_argument('--bins', type=int, default=DEFAULT_BINS, help='histogram bins')
    plot_parser.add_argument('--width', type=int, default=DEFAULT_PLOT_WIDTH, help='width in pixels')
    plot_parser.add_argument('--height', type=int, default=DEFAULT_PLOT_HEIGHT, help='height in pixels')
    plot_parser.add_argument('--title', type=str, default="", help='plot title')
    plot_parser.set_defaults(func=plot)

    simulate_parser = subparsers.add_parser('simulate', parents=[common],
                                            help='FAR/FRR sweep and attack comparison on synthetic users')
    simulate_parser.add_argument('config', nargs='?', default=None,
                                 help='simulation config (YAML); bundled default when omitted')
    simulate_parser.add_argument('--workers', type=int, default=None, help='trial worker threads')
    simulate_parser.set_defaults(func=simulate)

    args = parser.parse_args(argv)

    return args


def _write(text, output):
    if output is None:
        sys.stdout.write(text)
    else:
        with open(output, 'w', encoding='utf-8') as f:
            f.write(text)


def _series(path, modality, args):
    return series_from_file(path, modality, tile=args.tile, stimulus_onset=args.stimulus_onset,
                            min_coverage=args.min_coverage)


def enroll(args):
    if args.modality is None:
        raise ModalityError("enroll needs --modality")
    series = [ _series(path, args.modality, args) for path in args.inputs ]
    template = build_template(args.user_id, args.modality, series, args.tail_fraction)
    path = TemplateStore(args.store).save(template)
    print("Enrolled " + template.user_id + " (" + template.modality + ")")
    print("  values:       " + str(template.moments.n) + " from " + str(template.enroll_count) + " capture(s)")
    print("  mean / sd:    " + "%.6g / %.6g" % (template.moments.mean, template.moments.sd))
    print("  combined_dev: " + "%.6g" % template.tail.combined_dev)
    print("  A2:           " + "%.6g" % template.tail.normality_stat
          + (" (normal)" if template.tail.normality_pass else " (non-normal)"))
    print("  template:     " + path)
    return EXIT_OK


def verify(args):
    eye_modality = args.modality if args.modality is not None else MODALITY_EYE_Y
    if eye_modality not in EYE_MODALITIES:
        raise ModalityError("--modality for verify selects the eye axis: " + str(EYE_MODALITIES))
    store = TemplateStore(args.store)
    probes = [ (MODALITY_FINGERPRINT, args.fingerprint), (MODALITY_FACE, args.face), (eye_modality, args.eye) ]
    templates = { modality: store.load(args.user_id, modality) for modality, _ in probes }

    reports = []
    for modality, path in probes:
        report = match_score(templates[modality], _series(path, modality, args), args.threshold)
        reports.append(report)
        print("%-12s score=%.4f ks=%.4f tail_gap=%.4f threshold=%.4f %s"
              % (modality, report.score, report.ks_distance, report.tail_gap, report.threshold,
                 "accepted" if report.accepted else "rejected"))
    decision = fuse(*reports, eye_modality=eye_modality)
    if decision.authenticated:
        print(args.user_id + ": authenticated")
        return EXIT_OK
    print(args.user_id + ": rejected")
    return EXIT_REJECTED


def _analysis_series(args):
    """Series to analyze, plus eye-trace extras and x/y pairs for scatter plots."""
    kind, content = read_capture(args.input)
    if kind == CAPTURE_IMAGE:
        modality = args.modality if args.modality is not None else MODALITY_FINGERPRINT
        return image_series(content, modality, args.tile, args.min_coverage), {}, None
    if kind == CAPTURE_EYE:
        modality = args.modality if args.modality is not None else MODALITY_EYE_Y
        if modality not in EYE_MODALITIES:
            raise ModalityError("An eye trace holds " + str(EYE_MODALITIES) + " data, not " + modality)
        eye_x, eye_y = eye_series(content, args.stimulus_onset)
        extra = axis_variances(eye_x, eye_y)
        extra["displacements"] = len(eye_y)
        series = eye_x if modality == MODALITY_EYE_X else eye_y
        return series, extra, list(zip(eye_x.values.tolist(), eye_y.values.tolist()))
    return read_series(content, args.modality), {}, None


def analyze_command(args):
    formatter = FormatFactory.formatter(args.format)
    series, extra, _ = _analysis_series(args)
    report = analyze(series, args.bins, args.tail_fraction, extra)
    _write(formatter.format_report(report), args.output)
    return EXIT_OK


def plot(args):
    if args.output is None:
        raise DomainError("plot needs --output")
    spec = PlotSpec(args.kind, args.width, args.height, args.title)
    series, _, eye_points = _analysis_series(args)
    if args.kind == PLOT_SCATTER:
        data = eye_points if eye_points is not None else series
    elif args.kind == PLOT_HISTOGRAM:
        data = histogram(series, args.bins)
    else:
        data = qq_normal(series)
    return emit_svg(data, spec, args.output)


def simulate(args):
    config = load_config(args.config)
    if args.seed is not None:
        config["seed"] = args.seed
    result = run_simulation(config, args.workers)
    extra = {}
    if args.config is not None:
        extra["config_sha256"] = hash_from_file(args.config)
    if args.output is None:
        write_results(result, sys.stdout, extra)
    else:
        with open(args.output, 'w', encoding='utf-8') as f:
            write_results(result, f, extra)
    return EXIT_OK


def _target(args):
    for name in ('user_id', 'input', 'config'):
        value = getattr(args, name, None)
        if value is not None:
            return str(value)
    return "bundled default config"


def main(argv=None):

    args = parse(argv)

    debug_level = logging.INFO
    if args.verbose:
        debug_level = logging.DEBUG
    logging.basicConfig(format='%(asctime)s:   %(message)s', datefmt='%Y-%m-%d %H:%M:%S', level=debug_level)

    try:
        return args.func(args)
    except Exception as e:
        print("Failed " + args.command + ": " + _target(args), file=sys.stderr)
        print(type(e).__name__ + ": " + str(e), file=sys.stderr)
        if args.verbose:
            import traceback
            traceback.print_exc()
        return EXIT_ERROR


if __name__ == '__main__':
    sys.exit(main())
