import argparse
import os
import sys

import pandas as pd
from tqdm import tqdm

from killingfoliator.kf_classify import classify_r3
from killingfoliator.kf_config import config
from killingfoliator.kf_core import KFEngine, FoliationError, ScenarioFileError, UnknownScenarioError, \
    format_msg
from killingfoliator.kf_fields import killing_check
from killingfoliator.kf_flow import trajectory
from killingfoliator.kf_helpers.scenario_file import ScenarioFile
from killingfoliator.kf_orbit import dimension_stratification, sample_orbit
from killingfoliator.kf_verify import SCENARIOS, scenario_run

"""
Command line interface.

    killingfoliator check <file>
    killingfoliator closure <file> [--tol T]
    killingfoliator classify <file> [--tol T] [--seed S]
    killingfoliator orbit <file> --start x,y,z[,w] --steps N [--seed S] [--t-scale T] --out cloud.csv|cloud.ply
    killingfoliator flow <file> --field K --start x,y,z[,w] --t0 A --t1 B --samples M [--step H] --out traj.csv
    killingfoliator stratify <file> --box a,b --res R [--progress]
    killingfoliator verify [name|all] [--json] [--progress]

Exit status: 0 on success, 1 when a check, verification or classification fails, 2 on usage errors or invalid
input files, 3 on I/O errors.
"""

__license__ = 'MIT'

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_IO = 3


class UsageError(Exception):
    pass


def _point(text, sf):
    """A comma separated coordinate list or the name of a point declared in the scenario file"""
    if text in sf.points:
        return sf.points[text]
    try:
        p = [float(c) for c in text.split(',')]
    except ValueError:
        raise UsageError('Cannot read point {!r}: expected x,y,... or one of {}'.format(text, sorted(sf.points)))
    if len(p) != sf.dim:
        raise UsageError('Point {!r} has {} coordinates, the scenario lives on R^{}'.format(text, len(p), sf.dim))
    return p


def _cmd_check(args, out):
    sf = ScenarioFile.load(args.file)
    rows = []
    for name, f in zip(sf.names, sf.fields):
        report = killing_check(f)
        rows.append({'field': name, 'verdict': report.verdict, 'mode': report.mode,
                     'max_residual': report.max_residual,
                     'witnesses': ' '.join('({},{})'.format(w.i, w.j) for w in report.witnesses)})
    frame = pd.DataFrame(rows, columns=['field', 'verdict', 'mode', 'max_residual', 'witnesses'])
    print(frame.to_string(index=False), file=out)
    return EXIT_OK if all(r['verdict'] == 'pass' for r in rows) else EXIT_FAILURE


def _cmd_closure(args, out):
    g = ScenarioFile.load(args.file).family().closure(args.tol)
    print('dimension {} (generated in {} rounds)'.format(g.size, g.generation_depth), file=out)
    print(g.to_frame().to_string(), file=out)
    return EXIT_OK


def _cmd_classify(args, out):
    result = classify_r3(ScenarioFile.load(args.file).family(), tol=args.tol, seed=args.seed)
    print(result.to_json(), file=out)
    return EXIT_OK


def _cmd_orbit(args, out):
    sf = ScenarioFile.load(args.file)
    extension = os.path.splitext(args.out)[1].lower()
    if extension not in ('.csv', '.ply'):
        raise UsageError('Orbit output must end in .csv or .ply, got {}'.format(args.out))
    cloud = sample_orbit(sf.family(), _point(args.start, sf), args.steps, t_scale=args.t_scale, seed=args.seed,
                         invariants=sf.invariants)
    if extension == '.ply':
        cloud.to_ply(args.out)
    else:
        cloud.to_csv(args.out)
    print('wrote {} points to {}'.format(len(cloud), args.out), file=out)
    return EXIT_OK


def _cmd_flow(args, out):
    sf = ScenarioFile.load(args.file)
    if not 1 <= args.field <= len(sf.fields):
        raise UsageError('--field must be between 1 and {}'.format(len(sf.fields)))
    traj = trajectory(sf.fields[args.field - 1], _point(args.start, sf), args.t0, args.t1, args.samples,
                      step=args.step)
    traj.to_csv(args.out)
    print('wrote {} samples ({}) to {}'.format(len(traj), traj.integrator, args.out), file=out)
    return EXIT_OK


def _cmd_stratify(args, out):
    try:
        a, b = (float(v) for v in args.box.split(','))
    except ValueError:
        raise UsageError('--box takes two numbers a,b, got {!r}'.format(args.box))
    summary = dimension_stratification(ScenarioFile.load(args.file).family(), (a, b), args.res,
                                       progress=args.progress)
    print(summary.to_frame().to_string(index=False), file=out)
    return EXIT_OK


def _cmd_verify(args, out):
    names = list(SCENARIOS) if args.scenario == 'all' else [args.scenario]
    reports = []
    for name in tqdm(names, disable=not args.progress, desc='verify'):
        reports.append(scenario_run(name))
        if not args.json:
            print(reports[-1], file=out)
            print(file=out)
    if args.json:
        print('[' + ',\n'.join(r.to_json() for r in reports) + ']', file=out)
    else:
        print('{} of {} scenarios passed'.format(sum(r.passed for r in reports), len(reports)), file=out)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAILURE


def build_parser():
    parser = argparse.ArgumentParser(prog='killingfoliator',
                                     description='Killing fields, their orbits and the foliations they generate')
    parser.add_argument('--log-dir', help='directory of the run log, default {}'.format(config['LOG_DIR']))
    sub = parser.add_subparsers(dest='command', metavar='command')
    sub.required = True

    p = sub.add_parser('check', help='Killing check of every field of a scenario file')
    p.add_argument('file')
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser('closure', help='bracket closure basis and dimension')
    p.add_argument('file')
    p.add_argument('--tol', type=float, default=None, help='relative rank tolerance')
    p.set_defaults(func=_cmd_closure)

    p = sub.add_parser('classify', help='foliation type of a family on R^3, as JSON')
    p.add_argument('file')
    p.add_argument('--tol', type=float, default=None, help='fixed set residual tolerance')
    p.add_argument('--seed', type=int, default=None, help='seed of the generic rank sampling')
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser('orbit', help='random walk sample of one orbit, written as CSV or PLY')
    p.add_argument('file')
    p.add_argument('--start', required=True, help='x,y,... or a point name from the file')
    p.add_argument('--steps', type=int, required=True)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--t-scale', type=float, default=None)
    p.add_argument('--out', required=True)
    p.set_defaults(func=_cmd_orbit)

    p = sub.add_parser('flow', help='sampled trajectory of one field, written as CSV')
    p.add_argument('file')
    p.add_argument('--field', type=int, default=1, help='1-based index of the field in the file')
    p.add_argument('--start', required=True)
    p.add_argument('--t0', type=float, default=0.0)
    p.add_argument('--t1', type=float, required=True)
    p.add_argument('--samples', type=int, default=101)
    p.add_argument('--step', type=float, default=None, help='Runge-Kutta step for non-affine fields')
    p.add_argument('--out', required=True)
    p.set_defaults(func=_cmd_flow)

    p = sub.add_parser('stratify', help='orbit dimension counts on a grid over [a,b]^n')
    p.add_argument('file')
    p.add_argument('--box', required=True, help='a,b')
    p.add_argument('--res', type=int, required=True, help='grid points per axis')
    p.add_argument('--progress', action='store_true')
    p.set_defaults(func=_cmd_stratify)

    p = sub.add_parser('verify', help='run a registered scenario, or all of them')
    p.add_argument('scenario', nargs='?', default='all')
    p.add_argument('--json', action='store_true', help='print the reports as JSON')
    p.add_argument('--progress', action='store_true')
    p.set_defaults(func=_cmd_verify)
    return parser


def run_command(argv, out=None, err=None):
    """
    Run one command line.
    :param argv: arguments without the program name
    :param out: stream for results, default sys.stdout
    :param err: stream for error messages, default sys.stderr
    :return: exit status
    """
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code

    if args.log_dir:
        config['LOG_DIR'] = args.log_dir
        KFEngine.logger = None

    try:
        return args.func(args, out)
    except (UsageError, ScenarioFileError, UnknownScenarioError) as e:
        print('error: {}'.format(e), file=err)
        return EXIT_USAGE
    except OSError as e:
        print('error: {}'.format(e), file=err)
        return EXIT_IO
    except (FoliationError, ValueError) as e:
        KFEngine.log('ERROR', format_msg(args.command, getattr(args, 'file', ''), str(e), type(e).__name__))
        print('error: {}'.format(e), file=err)
        return EXIT_FAILURE


def main():
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
