"""
Entangled two-photon absorption of pulsed PDC light from the isolated-pair
regime to bright squeezed vacuum.
"""

__version__ = "0.3.0"

from .errors import ConvergenceError, DomainError, EtpaError, ScanError
from .molecule import MoleculeParams, SampleParams
from .pdc import PdcParams, SchmidtSpectrum, gain_for_photon_number, mean_photon_number, schmidt_spectrum
from .scan import Axis, ScanResult, parse_grid, read_csv, run_scan, write_csv
from .signal_spatial import SpatialSignalConfig
from .signal_spectral import SignalPoint, SpectralSignalConfig
from .specfun import QuadratureSpec

__all__ = [
    "__version__",
    "Axis",
    "ConvergenceError",
    "DomainError",
    "EtpaError",
    "MoleculeParams",
    "PdcParams",
    "QuadratureSpec",
    "SampleParams",
    "ScanError",
    "ScanResult",
    "SchmidtSpectrum",
    "SignalPoint",
    "SpatialSignalConfig",
    "SpectralSignalConfig",
    "gain_for_photon_number",
    "mean_photon_number",
    "parse_grid",
    "read_csv",
    "run_scan",
    "schmidt_spectrum",
    "write_csv",
]
