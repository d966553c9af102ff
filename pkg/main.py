"""
Hybrid Bell - Command Line Interface
Runs the experiment drivers and writes one CSV table per figure-equivalent
"""
import argparse
import csv
import logging
import os
import sys
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

# Add paths for imports
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from config_manager import ConfigManager, get_config_manager, reset_config_manager
from nonlocality.experiments import frontier, nonviolation_scan, psi2_scan, tmss_scan
from nonlocality.sampling import mc_sample
from photonics.channels import closed_form_rho
from photonics.errors import DomainError, NumericalError
from photonics.measurement import QuadratureBinning, ThresholdDetector
from version_info import get_current_version

PROG = 'hybrid-bell'

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

# parameters that shape the output, in the order they are echoed in the header line
COMMAND_PARAMS = {
    'psi2-scan': ['z_min', 'z_max', 'z_steps', 't', 'eta', 'cutoff'],
    'frontier': ['t_min', 't_max', 't_steps', 'cutoff', 'no_cross_check'],
    'tmss-scan': ['lambda_min', 'lambda_max', 'lambda_steps', 'z_min', 'z_max', 'z_steps',
                  'cutoff', 'eta', 'z_b'],
    'states-scan': ['state', 'alpha', 'alpha_min', 'alpha_max', 'alpha_steps', 'z_min', 'z_max', 'z_steps', 'cutoff', 'x_only'],
    'mc': ['z', 't', 'eta', 'shots', 'seed', 'cutoff'],
}
FLAG_PARAMS = {'no_cross_check', 'x_only'}
COMMON_PARAMS = {'out', 'settings', 'workers', 'verbose', 'debug'}


@dataclass
class RunConfig:
    """Validated command plus the parameters echoed in the output header"""
    command: str
    params: Dict[str, object]
    out: Optional[str] = None
    seed: Optional[int] = None

    def canonical_flags(self) -> str:
        parts = []
        for name in COMMAND_PARAMS[self.command]:
            value = self.params.get(name)
            if value is None or value is False:
                continue
            flag = '--' + name.replace('_', '-')
            parts.append(flag if value is True else f"{flag}={format_value(value)}")
        return ' '.join(parts)


@dataclass
class CsvTable:
    header: List[str]
    rows: List[List[object]] = field(default_factory=list)
    exit_code: int = EXIT_OK


def format_value(value) -> str:
    """Twelve significant digits, '.' decimal point, independent of locale"""
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12g}"
    if isinstance(value, (list, tuple)):
        return ','.join(format_value(v) for v in value)
    return '' if value is None else str(value)


def float_list(text: str) -> List[float]:
    """Comma-separated list of floats"""
    try:
        return [float(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PROG,
        description='Hybrid photon-counting / homodyne Bell test simulator',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog='''
Examples:
  # CHSH value along z for the ideal two-photon state
  hybrid-bell psi2-scan --z-min 0.1 --z-max 2.0 --z-steps 100 --t 1 --eta 1

  # Efficiency vs transmission frontier
  hybrid-bell frontier --t-min 0.84 --t-max 1.0 --t-steps 33 --out frontier.csv

  # Reproducible Monte Carlo estimate
  hybrid-bell mc --z 0.83 --shots 1000000 --seed 7
        '''
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {get_current_version()}')

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--out', type=str, default=None, help='Output CSV path (default: standard output)')
    common.add_argument('--config', type=str, default=None,
                        help='key=value run file whose keys mirror flag names; flags take precedence')
    common.add_argument('--settings', type=str, default=None, help='JSON settings file (numerical defaults)')
    common.add_argument('--workers', type=int, default=None, help='Worker threads for grid evaluation')
    common.add_argument('--verbose', action='store_true', help='Log progress to the error stream')
    common.add_argument('--debug', action='store_true', help='Log optimizer and quadrature details')

    sub = parser.add_subparsers(dest='command', required=True, metavar='command')

    p = sub.add_parser('psi2-scan', parents=[common], help='CHSH value vs binning half-width z for the lossy state')
    p.add_argument('--z-min', type=float, default=0.01)
    p.add_argument('--z-max', type=float, default=4.0)
    p.add_argument('--z-steps', type=int, default=400)
    p.add_argument('--t', type=float, default=1.0, help='Transmission of each optical path')
    p.add_argument('--eta', type=float, default=1.0, help='Threshold detector efficiency')
    p.add_argument('--cutoff', type=int, default=None)

    p = sub.add_parser('frontier', parents=[common], help='Minimal detector efficiency vs transmission')
    p.add_argument('--t-min', type=float, default=0.84)
    p.add_argument('--t-max', type=float, default=1.0)
    p.add_argument('--t-steps', type=int, default=33)
    p.add_argument('--cutoff', type=int, default=None)
    p.add_argument('--no-cross-check', action='store_true', help='Skip the root-finding cross-check')

    p = sub.add_parser('tmss-scan', parents=[common], help='CHSH value of the two-mode squeezed state')
    p.add_argument('--lambda-min', type=float, default=0.80)
    p.add_argument('--lambda-max', type=float, default=0.86)
    p.add_argument('--lambda-steps', type=int, default=20)
    p.add_argument('--z-min', type=float, default=0.82)
    p.add_argument('--z-max', type=float, default=0.90)
    p.add_argument('--z-steps', type=int, default=20)
    p.add_argument('--cutoff', type=int, default=None)
    p.add_argument('--eta', type=float, default=1.0, help='Threshold detector efficiency (ideal by default)')
    p.add_argument('--z-b', type=float, default=None, help="Bob's half-width if different from Alice's")

    p = sub.add_parser('states-scan', parents=[common], help='Search for violations with other states')
    p.add_argument('--state', choices=['single-photon-path', 'cat'], required=True)
    p.add_argument('--alpha', type=float_list, default=[0.5, 1.0, 2.0], help='Cat amplitudes, comma separated')
    p.add_argument('--alpha-min', type=float, default=None)
    p.add_argument('--alpha-max', type=float, default=None)
    p.add_argument('--alpha-steps', type=int, default=None, help='Evenly spaced cat amplitudes, replacing --alpha')
    p.add_argument('--z-min', type=float, default=0.01)
    p.add_argument('--z-max', type=float, default=4.0)
    p.add_argument('--z-steps', type=int, default=400)
    p.add_argument('--cutoff', type=int, default=None)
    p.add_argument('--x-only', action='store_true', help='Only try X binnings on both sides')

    p = sub.add_parser('mc', parents=[common], help='Finite-shot estimate of the CHSH value')
    p.add_argument('--z', type=float, default=0.83)
    p.add_argument('--t', type=float, default=1.0)
    p.add_argument('--eta', type=float, default=1.0)
    p.add_argument('--shots', type=int, default=1_000_000)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--cutoff', type=int, default=None)

    return parser


def _find_option(argv: Sequence[str], option: str) -> Optional[str]:
    for i, token in enumerate(argv):
        if token == option and i + 1 < len(argv):
            return argv[i + 1]
        if token.startswith(option + '='):
            return token.split('=', 1)[1]
    return None


def apply_run_file(parser: argparse.ArgumentParser, argv: Sequence[str]):
    """Install key=value run-file entries as defaults of the selected command"""
    path = _find_option(argv, '--config')
    if not path:
        return
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    command = next((token for token in argv if token in subparsers.choices), None)
    if command is None:
        return
    defaults = {}
    for key, value in ConfigManager.load_run_file(path).items():
        dest = key.replace('-', '_')
        if dest not in COMMAND_PARAMS[command] and dest not in COMMON_PARAMS:
            raise DomainError(f"run file {path}: unknown key {key!r} for {command}")
        if dest in FLAG_PARAMS or dest in ('verbose', 'debug'):
            defaults[dest] = value.lower() in ('1', 'true', 'yes', 'on')
        else:
            defaults[dest] = value
    subparsers.choices[command].set_defaults(**defaults)


def _grid(lo: float, hi: float, steps: int, name: str) -> np.ndarray:
    if steps < 1:
        raise DomainError(f"--{name}-steps must be at least 1, got {steps}")
    if hi < lo:
        raise DomainError(f"--{name}-max ({hi}) is below --{name}-min ({lo})")
    return np.linspace(lo, hi, steps)


def _require(condition: bool, message: str):
    if not condition:
        raise DomainError(message)


def validate(args: argparse.Namespace) -> RunConfig:
    """Check every numeric parameter against its domain"""
    params = {name: getattr(args, name) for name in COMMAND_PARAMS[args.command]}
    for name in ('z_min', 'z', 'z_b'):
        if params.get(name) is not None:
            _require(params[name] > 0.0, f"--{name.replace('_', '-')} must be positive, got {params[name]}")
    for name in ('t', 'eta'):
        if name in params:
            _require(0.0 <= params[name] <= 1.0, f"--{name} must lie in [0, 1], got {params[name]}")
    if args.command == 'frontier':
        _require(0.0 < params['t_min'] and params['t_max'] <= 1.0,
                 f"frontier transmissions must lie in (0, 1], got [{params['t_min']}, {params['t_max']}]")
    if args.command == 'tmss-scan':
        _require(0.0 <= params['lambda_min'] and params['lambda_max'] < 1.0,
                 f"lambda must lie in [0, 1), got [{params['lambda_min']}, {params['lambda_max']}]")
    if args.command == 'states-scan':
        if params['alpha_steps'] is not None:
            _require(params['alpha_min'] is not None and params['alpha_max'] is not None,
                     "--alpha-steps needs --alpha-min and --alpha-max")
            params['alpha'] = [float(a) for a in _grid(params['alpha_min'], params['alpha_max'],
                                                       params['alpha_steps'], 'alpha')]
        _require(all(a > 0.0 for a in params['alpha']) and len(params['alpha']) > 0,
                 f"--alpha values must be positive, got {params['alpha']}")
    if args.command == 'mc':
        _require(params['shots'] >= 4, f"--shots must be at least 4, got {params['shots']}")
        _require(0 <= params['seed'] < 2 ** 64, f"--seed must be a 64-bit unsigned integer, got {params['seed']}")
    if params.get('cutoff') is not None:
        _require(params['cutoff'] >= 0, f"--cutoff must be non-negative, got {params['cutoff']}")
    return RunConfig(args.command, params, args.out, params.get('seed'))


def run_psi2_scan(cfg: RunConfig) -> CsvTable:
    p = cfg.params
    points = psi2_scan(_grid(p['z_min'], p['z_max'], p['z_steps'], 'z'), p['t'], p['eta'], p['cutoff'])
    return CsvTable(['z', 'S', 'minus_position'], [[pt.params['z'], pt.S, pt.arrangement] for pt in points])


def run_frontier(cfg: RunConfig) -> CsvTable:
    p = cfg.params
    points = frontier(_grid(p['t_min'], p['t_max'], p['t_steps'], 't'), cross_check=not p['no_cross_check'],
                      cutoff=p['cutoff'])
    return CsvTable(['t', 'eta_min', 'z_opt'], [[pt.t, pt.eta_min, pt.z_opt] for pt in points])


def run_tmss_scan(cfg: RunConfig) -> CsvTable:
    p = cfg.params
    points = tmss_scan(_grid(p['lambda_min'], p['lambda_max'], p['lambda_steps'], 'lambda'),
                       _grid(p['z_min'], p['z_max'], p['z_steps'], 'z'), p['cutoff'], p['eta'], p['z_b'])
    return CsvTable(['lambda', 'z', 'S', 'minus_position'],
                    [[pt.params['lambda'], pt.params['z'], pt.S, pt.arrangement] for pt in points])


def run_states_scan(cfg: RunConfig) -> CsvTable:
    p = cfg.params
    kind = p['state'].replace('-', '_')
    best = nonviolation_scan(kind, p['alpha'] if kind == 'cat' else None,
                             _grid(p['z_min'], p['z_max'], p['z_steps'], 'z'), p['cutoff'],
                             include_p=not p['x_only'])
    return CsvTable(['state', 'param', 'z', 'S_max'],
                    [[p['state'], best.params.get('alpha'), best.params['z'], best.S]])


def run_mc(cfg: RunConfig) -> CsvTable:
    p = cfg.params
    cutoff = p['cutoff'] if p['cutoff'] is not None else get_config_manager().get('cutoffs.psi2', 4)
    x_bin = QuadratureBinning.x(p['z'])
    detector = ThresholdDetector(p['eta'])
    est = mc_sample(closed_form_rho(p['t'], cutoff), x_bin, detector, x_bin, detector, p['shots'], p['seed'])
    table = CsvTable(['shots', 'seed', 'S_hat', 'std_err'], [[est.shots, est.seed, est.S_hat, est.std_err]])
    if not est.valid:
        table.exit_code = EXIT_NUMERICAL
    return table


HANDLERS = {
    'psi2-scan': run_psi2_scan,
    'frontier': run_frontier,
    'tmss-scan': run_tmss_scan,
    'states-scan': run_states_scan,
    'mc': run_mc,
}


def write_csv(cfg: RunConfig, table: CsvTable, stream=None):
    """Header comment, column names, then rows, all '\\n' terminated"""
    def emit(handle):
        handle.write(f"# {PROG} {get_current_version()} {cfg.command} {cfg.canonical_flags()}\n")
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(table.header)
        for row in table.rows:
            writer.writerow([format_value(v) for v in row])

    if cfg.out:
        with open(cfg.out, 'w', encoding='utf-8', newline='') as f:
            emit(f)
        logging.info(f"Wrote {len(table.rows)} row(s) to {cfg.out}")
    else:
        emit(stream or sys.stdout)


def configure_logging(args: argparse.Namespace):
    level = get_config_manager().get_log_level()
    if getattr(args, 'verbose', False):
        level = logging.INFO
    if getattr(args, 'debug', False):
        level = logging.DEBUG
    logging.basicConfig(level=level, format='%(asctime)s - %(levelname)s - %(message)s',
                        stream=sys.stderr, force=True)


def run(argv: Optional[Sequence[str]] = None, stream=None) -> int:
    """Parse flags, dispatch to the experiment drivers and write CSV; returns the exit code"""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        apply_run_file(parser, argv)
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    except DomainError as e:
        parser.print_usage(sys.stderr)
        print(f"{PROG}: error: {e}", file=sys.stderr)
        return EXIT_USAGE

    if args.settings:
        config = reset_config_manager()
        if not config.import_config(args.settings):
            print(f"{PROG}: error: cannot read settings file {args.settings}", file=sys.stderr)
            return EXIT_USAGE
    configure_logging(args)
    if args.workers is not None:
        get_config_manager().set('parallel.workers', args.workers)

    try:
        cfg = validate(args)
        logging.info(f"Running {cfg.command} {cfg.canonical_flags()}")
        table = HANDLERS[cfg.command](cfg)
        write_csv(cfg, table, stream)
        return table.exit_code
    except DomainError as e:
        logging.error(f"Invalid parameters: {e}")
        print(f"{PROG}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as e:
        logging.error(f"Numerical failure: {e}")
        print(f"{PROG}: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except Exception as e:
        logging.error(f"Unexpected error: {e}", exc_info=True)
        return EXIT_FAILURE


def main():
    """Main entry point"""
    return run()


if __name__ == '__main__':
    sys.exit(main())
