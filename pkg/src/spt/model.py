"""Parameter objects and material response models shared by all modules.

Internal unit system: hbar = c = 1 and frequencies are measured in units of
the atomic transition frequency, except where explicit SI inputs are supplied
(see :func:`coupling_from_physical`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PoleEvaluationError

# CODATA 2018 values, used only when converting from SI inputs.
HBAR_SI = 1.054571817e-34      # J s
EPSILON0_SI = 8.8541878128e-12  # F / m
C_SI = 2.99792458e8             # m / s


@dataclass(frozen=True)
class ModeParams:
    """One per-mode light-matter subsystem.

    Attributes
    ----------
    omega_a : atomic transition frequency (> 0)
    omega_c : photon frequency c|k| in the same units (> 0)
    lam : dimensionless coupling strength (>= 0)
    """

    omega_a: float
    omega_c: float
    lam: float

    def __post_init__(self):
        if not (self.omega_a > 0):
            raise DomainError(f"omega_a must be > 0, got {self.omega_a}")
        if not (self.omega_c > 0):
            raise DomainError(f"omega_c must be > 0, got {self.omega_c}")
        if not (self.lam >= 0):
            raise DomainError(f"lam must be >= 0, got {self.lam}")


@dataclass(frozen=True)
class PhysicalInputs:
    """SI inputs fixing the dimensionless coupling of one mode.

    ``dipole_sq`` is the squared transition dipole moment |d|^2 in (C m)^2,
    ``volume`` the quantization volume in m^3 and ``wavenumber`` |k| in 1/m.
    """

    n_atoms: int
    dipole_sq: float
    volume: float
    wavenumber: float

    def __post_init__(self):
        if self.n_atoms < 1:
            raise DomainError(f"n_atoms must be >= 1, got {self.n_atoms}")
        if not (self.dipole_sq >= 0):
            raise DomainError(f"dipole_sq must be >= 0, got {self.dipole_sq}")
        if not (self.volume > 0):
            raise DomainError(f"volume must be > 0, got {self.volume}")
        if not (self.wavenumber > 0):
            raise DomainError(f"wavenumber must be > 0, got {self.wavenumber}")


def coupling_from_physical(inputs: PhysicalInputs) -> float:
    """Dimensionless coupling sqrt(N |d|^2 / (2 hbar eps0 c|k| V)).

    Scales as sqrt(N) and linearly in |d|.
    """
    return math.sqrt(
        inputs.n_atoms * inputs.dipole_sq
        / (2.0 * HBAR_SI * EPSILON0_SI * C_SI * inputs.wavenumber * inputs.volume)
    )


@dataclass(frozen=True)
class LorentzModel:
    """Lorentz oscillator susceptibility chi(w) = S / (w0^2 - w^2 - i gamma w).

    ``strength`` S carries squared-frequency units and may take either sign;
    a negative S with |S| > w0^2 encodes an overcritical medium.  The
    dielectric function is eps(w) = 1 + chi(w).
    """

    strength: float
    omega0: float
    gamma: float = 0.0

    def __post_init__(self):
        if not (self.omega0 > 0):
            raise DomainError(f"omega0 must be > 0, got {self.omega0}")
        if not (self.gamma >= 0):
            raise DomainError(f"gamma must be >= 0, got {self.gamma}")


def lorentz_chi(model: LorentzModel, omega):
    """Evaluate chi at a complex frequency (scalar or array).

    Raises PoleEvaluationError when the denominator vanishes exactly, which
    with gamma = 0 happens at omega = +-omega0 on the real axis.
    """
    om = np.asarray(omega, dtype=complex)
    den = model.omega0 ** 2 - om * om - 1j * model.gamma * om
    if np.any(den == 0):
        raise PoleEvaluationError(
            f"chi evaluated at a pole (omega0={model.omega0}, gamma={model.gamma})"
        )
    chi = model.strength / den
    if np.isscalar(omega) or np.ndim(omega) == 0:
        return complex(chi)
    return chi


def lorentz_chi_derivative(model: LorentzModel, omega):
    """d(chi)/d(omega); analytic wherever chi is."""
    om = np.asarray(omega, dtype=complex)
    den = model.omega0 ** 2 - om * om - 1j * model.gamma * om
    if np.any(den == 0):
        raise PoleEvaluationError("chi' evaluated at a pole")
    out = model.strength * (2.0 * om + 1j * model.gamma) / (den * den)
    if np.isscalar(omega) or np.ndim(omega) == 0:
        return complex(out)
    return out


def lorentz_epsilon(model: LorentzModel, omega):
    """Dielectric function eps(w) = 1 + chi(w)."""
    return 1.0 + lorentz_chi(model, omega)
