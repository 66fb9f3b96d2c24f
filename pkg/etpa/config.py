"""
Process-wide settings and the named figure presets
"""

import logging
import os

from .errors import DomainError

logger = logging.getLogger(__name__)

#output directory for batch preset runs
OUTPUT_DIR = os.environ.get("OUTPUT_DIR", os.path.join(os.getcwd(), "results"))

#worker processes used by scans when no --jobs flag is given
DEFAULT_JOBS = int(os.environ.get("ETPA_JOBS", os.cpu_count() or 1))

#neglected Schmidt weight allowed by the truncation
DEFAULT_EPSILON = float(os.environ.get("ETPA_EPSILON", "1e-9"))

#hard cap on retained modes per Schmidt index
MODE_CAP = int(os.environ.get("ETPA_MODE_CAP", "4096"))

_PHOTON_NUMBERS = "0.1,1,10,100"

PRESETS = {
    "fig2": {
        "command": "pair-limit",
        "bandwidth_m": 10.0,
        "gamma_grid": "0.01:100:50:log",
    },
    "fig3a": {"command": "resonance", "gamma_fg": 0.1, "bandwidth_m": 1.5,
              "mean_n_grid": _PHOTON_NUMBERS, "detuning_grid": "-5:5:101"},
    "fig3b": {"command": "resonance", "gamma_fg": 1.0, "bandwidth_m": 1.5,
              "mean_n_grid": _PHOTON_NUMBERS, "detuning_grid": "-8:8:101"},
    "fig3c": {"command": "resonance", "gamma_fg": 10.0, "bandwidth_m": 1.5,
              "mean_n_grid": _PHOTON_NUMBERS, "detuning_grid": "-40:40:101"},
    "fig3d": {"command": "resonance", "gamma_fg": 0.1, "bandwidth_m": 10.0,
              "mean_n_grid": _PHOTON_NUMBERS, "detuning_grid": "-5:5:101"},
    "fig3e": {"command": "resonance", "gamma_fg": 1.0, "bandwidth_m": 10.0,
              "mean_n_grid": _PHOTON_NUMBERS, "detuning_grid": "-8:8:101"},
    "fig3f": {"command": "resonance", "gamma_fg": 10.0, "bandwidth_m": 10.0,
              "mean_n_grid": _PHOTON_NUMBERS, "detuning_grid": "-40:40:101"},
    "fig4-weak": {"command": "crossover", "bandwidth_m": 1.5, "mean_n_grid": "0.001:10000:71:log"},
    "fig4-medium": {"command": "crossover", "bandwidth_m": 10.0, "mean_n_grid": "0.001:10000:71:log"},
    "fig4-strong": {"command": "crossover", "bandwidth_m": 50.0, "mean_n_grid": "0.001:10000:71:log"},
    "fig4c": {"command": "bandwidth", "mean_n_grid": _PHOTON_NUMBERS, "bandwidth_m_grid": "1.5:50:40:log"},
    "fig5a": {"command": "broadening", "mean_n": 0.1, "bandwidth_m_grid": "1.5,10,50",
              "gamma_grid": "0.01:1000:31:log"},
    "fig5b": {"command": "broadening", "mean_n": 1.0, "bandwidth_m_grid": "1.5,10,50",
              "gamma_grid": "0.01:1000:31:log"},
    "fig5c": {"command": "broadening", "mean_n": 10.0, "bandwidth_m_grid": "1.5,10,50",
              "gamma_grid": "0.01:1000:31:log"},
    "fig5d": {"command": "broadening", "mean_n": 100.0, "bandwidth_m_grid": "1.5,10,50",
              "gamma_grid": "0.01:1000:31:log"},
    "fig6a": {"command": "spatial", "momentum_m": 1.5, "mean_n_grid": _PHOTON_NUMBERS,
              "x_grid": "-3:3:121", "coordinate_unit": "pump"},
    "fig6b": {"command": "spatial", "momentum_m": 10.0, "mean_n_grid": _PHOTON_NUMBERS,
              "x_grid": "-3:3:121", "coordinate_unit": "pump"},
    "fig7": {"command": "spatial", "integrated": True, "momentum_m_grid": "1.5,50",
             "mean_n_grid": "0.1:1000:41:log"},
}


def load_config_file(path):
    '''
        reads key=value lines into a dict of strings. '#' starts a comment,
        blank lines are skipped and '-' in keys is read as '_'
    '''
    values = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DomainError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if not key:
                raise DomainError(f"{path}:{lineno}: empty key")
            values[key.lstrip("-").replace("-", "_")] = value
    logger.debug("read %d settings from %s", len(values), path)
    return values
