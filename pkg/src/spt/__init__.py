"""Stability checks for quadratic light-matter models.

Subpackages by task: ``model`` (parameters, Lorentz response), ``quadratic``
(per-mode bosonic forms and symplectic spectra), ``dicke`` (finite-N exact
diagonalization), ``fields`` (Helmholtz projection identities), ``green``
(layered-stack dispersion zeros and causality checks), ``cli`` (batch runs).
"""

from .model import (HBAR_SI, EPSILON0_SI, C_SI, LorentzModel, ModeParams,
                    PhysicalInputs, coupling_from_physical, lorentz_chi,
                    lorentz_epsilon)
from .quadratic import (GaugeChoice, QuadraticForm, Stability, StabilityReport,
                        TermFlags, assemble_mode_blocks, bogoliubov_transform,
                        build_quadratic, classify_stability, critical_coupling,
                        symplectic_spectrum)
from .dicke import (CouplingForm, DickeConfig, QuadTerm, SpectrumResult,
                    SweepPoint, build_dicke, commutator_deviation,
                    default_fock_cutoff, ground_observables, parity_diagonal,
                    sweep_order_parameter)
from .fields import (DipoleLattice, DipoleSite, VectorField3D, energy_integrals,
                     helmholtz_decompose, load_field, overlap_matrix,
                     profile_self_energy, rasterize, save_field)
from .green import (Boundary, ConstantEps, DispersionFunction, Layer,
                    LayerStack, LorentzMedium, PoleCensus, Rectangle, Vacuum,
                    dispersion, kk_residual, locate_poles, real_axis_modes,
                    transfer_matrix, winding_count)

__version__ = "0.1.0"
