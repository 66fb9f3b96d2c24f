"""
Three-level molecular response and sample geometry
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .specfun import lorentzian


@dataclass(frozen=True)
class MoleculeParams:
    '''
        omega_fg and gamma_fg are in units of the pump bandwidth. coupling
        aggregates the dipole/detuning double sum over intermediate states
        and all field prefactors into one positive number.
    '''

    omega_fg: float = 100.0
    gamma_fg: float = 1.0
    coupling: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.omega_fg) and self.omega_fg > 0):
            raise DomainError(f"omega_fg must be positive, got {self.omega_fg}")
        if not (np.isfinite(self.gamma_fg) and self.gamma_fg > 0):
            raise DomainError(f"gamma_fg must be positive, got {self.gamma_fg}")
        if not (np.isfinite(self.coupling) and self.coupling > 0):
            raise DomainError(f"coupling must be positive, got {self.coupling}")


@dataclass(frozen=True)
class SampleParams:
    m_0: float = 1.0
    delta_z: float = 1.0

    def __post_init__(self):
        if not (self.m_0 > 0 and self.delta_z > 0):
            raise DomainError("sample density and thickness must be positive")


def molecule_count(sample, pdc):
    '''N_mol = m_0 delta_z A_p, the molecules inside the illuminated slab'''
    return sample.m_0 * sample.delta_z * pdc.pump_area


def classical_tpa_cross_section(mol):
    '''sigma^(2) = coupling / (2 gamma_fg)'''
    return mol.coupling / (2.0 * mol.gamma_fg)


def signal_prefactor(mol):
    '''2 gamma_fg sigma^(2), shared by the correlated and uncorrelated terms'''
    return 2.0 * mol.gamma_fg * classical_tpa_cross_section(mol)


def detuning(mol, pdc):
    return mol.omega_fg - pdc.omega_p


def lineshape(mol, omega_sum):
    '''normalized Lorentzian resonance of the final state at two-photon frequency omega_sum'''
    return lorentzian(mol.omega_fg - np.asarray(omega_sum), mol.gamma_fg)
