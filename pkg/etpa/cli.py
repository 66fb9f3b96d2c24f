"""
Command-line frontend. Every subcommand runs one scan and writes it as CSV
to stdout or --output.

    etpa --preset fig3d
    etpa resonance --bandwidth-m 10 --gamma-fg 0.1 --mean-n 100 -o fig3d.csv

Settings are layered: built-in defaults, then --preset, then --config,
then the flags given on the command line.
"""

import argparse
import logging
import multiprocessing
import sys
from datetime import datetime, timezone

from . import __version__, config, pairlimit, signal_spatial, signal_spectral
from .errors import ConvergenceError, DomainError, ScanError
from .molecule import MoleculeParams, SampleParams
from .pdc import PdcParams, gain_for_photon_number, schmidt_spectrum
from .scan import parse_grid, write_csv
from .specfun import QuadratureSpec

logger = logging.getLogger(__name__)

DEFAULTS = {
    "omega_p": 100.0,
    "bandwidth_p": 1.0,
    "bandwidth_m": 1.0,
    "momentum_p": 1.0,
    "momentum_m": 1.0,
    "omega_fg": None,
    "gamma_fg": 1.0,
    "coupling": 1.0,
    "f_rep": 1.0,
    "m_0": 1.0,
    "delta_z": 1.0,
    "gain": None,
    "mean_n": None,
    "mean_n_grid": None,
    "epsilon": None,
    "abs_tol": QuadratureSpec.abs_tol,
    "rel_tol": QuadratureSpec.rel_tol,
    "max_subdivisions": QuadratureSpec.max_subdivisions,
    "jobs": None,
    "output": None,
    "verbose": 0,
    "quiet": False,
    "timestamp": False,
    "exact": False,
    "narrow": False,
    "integrated": False,
    "alternating": True,
    "y": 0.0,
    "coordinate_unit": "mode",
}

COMMAND_DEFAULTS = {
    "pair-limit": {"gamma_grid": "0.01:100:50:log"},
    "resonance": {"detuning_grid": "-5:5:101"},
    "crossover": {"mean_n_grid": "0.001:10000:71:log"},
    "broadening": {"gamma_grid": "0.01:1000:31:log", "bandwidth_m_grid": None, "mean_n": 0.1},
    "bandwidth": {"bandwidth_m_grid": "1.5:50:40:log", "mean_n": 10.0},
    "spatial": {"x_grid": "-3:3:121", "momentum_m_grid": None},
}

_FLOATS = {
    "omega_p", "bandwidth_p", "bandwidth_m", "momentum_p", "momentum_m", "omega_fg", "gamma_fg",
    "coupling", "f_rep", "m_0", "delta_z", "gain", "mean_n", "epsilon", "abs_tol", "rel_tol", "y",
}
_INTS = {"max_subdivisions", "jobs", "verbose"}
_BOOLS = {"quiet", "timestamp", "exact", "narrow", "integrated", "alternating"}

_KNOWN_KEYS = set(DEFAULTS).union(*COMMAND_DEFAULTS.values())

# settings that never change the numbers and stay out of the provenance
_RUNTIME_ONLY = {"jobs", "output", "verbose", "quiet", "timestamp", "config"}


def _to_bool(name, value):
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise DomainError(f"{name}: expected a boolean, got {value!r}")


def _convert(name, value):
    if value is None:
        return None
    try:
        if name in _FLOATS:
            return float(value)
        if name in _INTS:
            return int(value)
    except ValueError as e:
        raise DomainError(f"{name}: cannot parse {value!r}") from e
    if name in _BOOLS:
        return _to_bool(name, value)
    return value


# ------------------------------------------------------------------
# Parser
# ------------------------------------------------------------------
def _common_options():
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--preset", choices=sorted(config.PRESETS), help="named parameter set of one figure panel")
    common.add_argument("--config", help="key=value file, overrides the preset")
    common.add_argument("-o", "--output", help="CSV file to write (default: stdout)")
    common.add_argument("-j", "--jobs", type=int, help="worker processes (default: ETPA_JOBS or all cores)")
    common.add_argument("-v", "--verbose", action="count", help="log INFO, twice for DEBUG")
    common.add_argument("--quiet", action="store_true", help="no progress bar")
    common.add_argument("--timestamp", action="store_true", help="record the creation time in the provenance")
    common.add_argument("--epsilon", type=float, help="Schmidt truncation epsilon")
    common.add_argument("--abs-tol", type=float, help="absolute quadrature tolerance")
    common.add_argument("--rel-tol", type=float, help="relative quadrature tolerance")
    common.add_argument("--max-subdivisions", type=int, help="quadrature subdivision budget")
    return common


def _physics_options():
    physics = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    group = physics.add_argument_group("source and molecule (units of the pump bandwidth / momentum)")
    group.add_argument("--omega-p", type=float, help="pump centre frequency")
    group.add_argument("--bandwidth-p", type=float, help="pump bandwidth Omega_p")
    group.add_argument("--bandwidth-m", type=float, help="phase-matching bandwidth Omega_m")
    group.add_argument("--momentum-p", type=float, help="pump momentum width Q_p")
    group.add_argument("--momentum-m", type=float, help="phase-matching momentum width Q_m")
    group.add_argument("--omega-fg", type=float, help="two-photon transition frequency (default: omega_p)")
    group.add_argument("--gamma-fg", type=float, help="broadening of the final state")
    group.add_argument("--coupling", type=float, help="aggregated dipole coupling")
    group.add_argument("--f-rep", type=float, help="repetition rate")
    group.add_argument("--m0", dest="m_0", type=float, help="molecule density")
    group.add_argument("--delta-z", type=float, help="sample thickness")
    intensity = physics.add_mutually_exclusive_group()
    intensity.add_argument("--gain", type=float, help="gain parameter")
    intensity.add_argument("--mean-n", type=float, help="mean photon number per pulse")
    return physics


def build_parser():
    common = _common_options()
    physics = _physics_options()
    parser = argparse.ArgumentParser(
        prog="etpa",
        description="Entangled two-photon absorption signals from low to high PDC gain.",
        parents=[common],
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("pair-limit", parents=[common, physics], argument_default=argparse.SUPPRESS,
                       help="ETPA cross section against the broadening")
    p.add_argument("--gamma-grid", help="gamma_fg values, start:stop:num[:log] or a list")

    p = sub.add_parser("resonance", parents=[common, physics], argument_default=argparse.SUPPRESS,
                       help="signal against the detuning")
    p.add_argument("--detuning-grid", help="omega_fg - omega_p values")
    p.add_argument("--mean-n-grid", help="one detuning scan per mean photon number")
    p.add_argument("--narrow", action="store_true", help="delta-function resonance")

    p = sub.add_parser("crossover", parents=[common, physics], argument_default=argparse.SUPPRESS,
                       help="signal and r_rel against the photon number")
    p.add_argument("--mean-n-grid", help="mean photon numbers")
    p.add_argument("--exact", action="store_true", help="full Lorentzian instead of the narrow limit")

    p = sub.add_parser("broadening", parents=[common, physics], argument_default=argparse.SUPPRESS,
                       help="signal against gamma_fg at fixed photon number")
    p.add_argument("--gamma-grid", help="gamma_fg values")
    p.add_argument("--bandwidth-m-grid", help="one scan per phase-matching bandwidth")
    p.add_argument("--narrow", action="store_true", help="delta-function resonance")

    p = sub.add_parser("bandwidth", parents=[common, physics], argument_default=argparse.SUPPRESS,
                       help="r_rel against the phase-matching bandwidth")
    p.add_argument("--bandwidth-m-grid", help="Omega_m values")
    p.add_argument("--mean-n-grid", help="one scan per mean photon number")
    p.add_argument("--exact", action="store_true", help="full Lorentzian instead of the narrow limit")

    p = sub.add_parser("spatial", parents=[common, physics], argument_default=argparse.SUPPRESS,
                       help="single spectral mode: profiles or integrated rates")
    p.add_argument("--x-grid", help="transverse positions")
    p.add_argument("--y", type=float, help="fixed y of the profile")
    p.add_argument("--coordinate-unit", choices=("mode", "pump"), help="x, y in 1/sqrt(Q_m Q_p) or in 1/Q_p")
    p.add_argument("--mean-n-grid", help="one profile (or integrated row) per mean photon number")
    p.add_argument("--momentum-m-grid", help="integrated rates for several Q_m")
    p.add_argument("--integrated", action="store_true", help="spatially integrated rates")
    p.add_argument("--no-alternating", dest="alternating", action="store_false",
                   help="drop the parity factor of the uncorrelated mode sum")
    return parser


def resolve_settings(args, parser):
    '''
        merges defaults < preset < config file < explicit flags into one dict
    '''
    explicit = dict(vars(args))
    command = explicit.pop("command", None)
    preset_name = explicit.get("preset")
    preset = dict(config.PRESETS[preset_name]) if preset_name else {}
    preset_command = preset.pop("command", None)
    if command is None:
        command = preset_command
    if command is None:
        parser.error("a command or a --preset is required")
    if preset_command and preset_command != command:
        parser.error(f"preset {preset_name} belongs to '{preset_command}', not '{command}'")

    from_file = {}
    if explicit.get("config"):
        try:
            from_file = config.load_config_file(explicit["config"])
        except OSError as e:
            parser.error(f"cannot read config file: {e}")
        from_file.pop("command", None)
        unknown = sorted(set(from_file) - _KNOWN_KEYS)
        if unknown:
            raise DomainError(f"{explicit['config']}: unknown settings {', '.join(unknown)}")

    settings = dict(DEFAULTS)
    settings.update(COMMAND_DEFAULTS[command])
    for layer in (preset, from_file, explicit):
        layer = {k: _convert(k, v) for k, v in layer.items()}
        # gain and mean_n replace each other across layers
        if "gain" in layer and layer["gain"] is not None:
            settings["mean_n"] = None
        if "mean_n" in layer and layer["mean_n"] is not None:
            settings["gain"] = None
        settings.update(layer)
    settings["command"] = command
    if settings["omega_fg"] is None:
        settings["omega_fg"] = settings["omega_p"]
    if settings["jobs"] is None:
        settings["jobs"] = config.DEFAULT_JOBS
    if settings["epsilon"] is None:
        settings["epsilon"] = config.DEFAULT_EPSILON
    return settings


# ------------------------------------------------------------------
# Model objects from settings
# ------------------------------------------------------------------
def _pdc(s, **changes):
    values = {
        "omega_p": s["omega_p"],
        "bandwidth_p": s["bandwidth_p"],
        "bandwidth_m": s["bandwidth_m"],
        "momentum_p": s["momentum_p"],
        "momentum_m": s["momentum_m"],
        "f_rep": s["f_rep"],
    }
    values.update(changes)
    return PdcParams(**values)


def _mol(s, **changes):
    values = {"omega_fg": s["omega_fg"], "gamma_fg": s["gamma_fg"], "coupling": s["coupling"]}
    values.update(changes)
    return MoleculeParams(**values)


def _sample(s):
    return SampleParams(m_0=s["m_0"], delta_z=s["delta_z"])


def _quadrature(s):
    return QuadratureSpec(s["abs_tol"], s["rel_tol"], s["max_subdivisions"])


def _grid(s, key, name):
    return parse_grid(name, s[key]) if s.get(key) is not None else None


def _scan_options(s, provenance, queue=None):
    return {"parallelism": s["jobs"], "progress": not s["quiet"], "provenance": provenance, "queue": queue}


def _spectral_config(s):
    params = _pdc(s)
    return signal_spectral.SpectralSignalConfig(
        params, _mol(s), schmidt_spectrum(params, s["epsilon"]), _quadrature(s)
    )


def _gain(s, truncation):
    if s["gain"] is not None:
        return s["gain"]
    if s["mean_n"] is not None:
        return gain_for_photon_number(truncation, s["mean_n"])
    return None


# ------------------------------------------------------------------
# Commands
# ------------------------------------------------------------------
def cmd_pair_limit(s, options):
    '''sigma_e against gamma_fg on resonance'''
    params = _pdc(s)
    mol = _mol(s, omega_fg=s["omega_p"])
    grid = _grid(s, "gamma_grid", "gamma_fg")
    return pairlimit.sigma_e_vs_gamma(params, mol, grid, **options)


def cmd_resonance(s, options):
    cfg = _spectral_config(s)
    n_grid = _grid(s, "mean_n_grid", "mean_n")
    gain = _gain(s, cfg.truncation)
    if n_grid is None and gain is None:
        raise DomainError("resonance needs --gain, --mean-n or --mean-n-grid")
    return signal_spectral.resonance_scan(
        cfg, gain, _grid(s, "detuning_grid", "detuning"), n_grid, narrow=s["narrow"], **options
    )


def cmd_crossover(s, options):
    cfg = _spectral_config(s)
    return signal_spectral.intensity_scan(
        cfg, _grid(s, "mean_n_grid", "mean_n"), narrow=not s["exact"], **options
    )


def cmd_broadening(s, options):
    if s["mean_n"] is None:
        raise DomainError("broadening runs at a fixed --mean-n")
    cfg = _spectral_config(s)
    return signal_spectral.broadening_scan(
        cfg,
        s["mean_n"],
        _grid(s, "gamma_grid", "gamma_fg"),
        _grid(s, "bandwidth_m_grid", "bandwidth_m"),
        narrow=s["narrow"],
        **options,
    )


def cmd_bandwidth(s, options):
    n_grid = _grid(s, "mean_n_grid", "mean_n")
    if n_grid is None and s["mean_n"] is None:
        raise DomainError("bandwidth runs at a fixed --mean-n or over --mean-n-grid")
    cfg = _spectral_config(s)
    return signal_spectral.bandwidth_scan(
        cfg,
        s["mean_n"],
        _grid(s, "bandwidth_m_grid", "bandwidth_m"),
        n_grid,
        narrow=not s["exact"],
        **options,
    )


def cmd_spatial(s, options):
    params = _pdc(s)
    cfg = signal_spatial.SpatialSignalConfig(
        params, _mol(s), schmidt_spectrum(params, s["epsilon"]), s["coordinate_unit"], _quadrature(s)
    )
    n_grid = _grid(s, "mean_n_grid", "mean_n")
    if s["integrated"]:
        if n_grid is None:
            raise DomainError("integrated rates need --mean-n-grid")
        return signal_spatial.integrated_scan(
            cfg, _sample(s), n_grid, _grid(s, "momentum_m_grid", "momentum_m"), s["alternating"], **options
        )
    x_grid = _grid(s, "x_grid", "x")
    if n_grid is not None:
        return signal_spatial.spatial_profile_scan(cfg, n_grid, x_grid, s["y"], s["alternating"], **options)
    gain = _gain(s, cfg.truncation)
    if gain is None:
        raise DomainError("spatial needs --gain, --mean-n or --mean-n-grid")
    return signal_spatial.spatial_profile(cfg, gain, x_grid, s["y"], s["alternating"], **options)


_HANDLERS = {
    "pair-limit": cmd_pair_limit,
    "resonance": cmd_resonance,
    "crossover": cmd_crossover,
    "broadening": cmd_broadening,
    "bandwidth": cmd_bandwidth,
    "spatial": cmd_spatial,
}


def provenance_for(settings):
    '''settings that determine the numbers, plus the version'''
    provenance = {"etpa_version": __version__}
    for key in sorted(settings):
        if key not in _RUNTIME_ONLY and settings[key] is not None:
            provenance[key] = settings[key]
    if settings.get("timestamp"):
        provenance["created"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return provenance


def run(settings, queue=None):
    '''
        runs the configured command and returns its ScanResult; progress goes
        to queue as well when one is given
    '''
    options = _scan_options(settings, provenance_for(settings), queue)
    return _HANDLERS[settings["command"]](settings, options)


def _configure_logging(verbose):
    level = logging.WARNING if not verbose else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = resolve_settings(args, parser)
    except DomainError as e:
        parser.error(str(e))
    _configure_logging(settings["verbose"])

    try:
        result = run(settings)
        if settings["output"]:
            write_csv(result, settings["output"])
            logger.info("wrote %d rows to %s", len(result.frame), settings["output"])
        else:
            write_csv(result, sys.stdout)
    except DomainError as e:
        parser.error(str(e))
    except (ConvergenceError, ScanError) as e:
        print(f"etpa: numerical failure: {e}", file=sys.stderr)
        return 3
    except OSError as e:
        parser.error(str(e))
    return 0


if __name__ == "__main__":
    multiprocessing.freeze_support()
    sys.exit(main())
