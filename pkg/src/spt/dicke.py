"""Finite-N exact diagonalization of collective two-level ensembles in a cavity.

The basis is the maximal collective-spin sector |j = N/2, m> tensored with a
truncated Fock space |n>, n = 0 .. n_max; the Hamiltonians here commute with
total spin and with the excitation parity (-1)^(n + m + N/2), so the ground
state lives in this sector and every matrix splits into two parity blocks.

Coupling forms (g is the coupling strength in units of omega_a):

* ROTATING_WAVE:  i (g/sqrt(N)) sum_l (a^dag sigma_l - sigma_l^dag a)
* Y_COUPLING:     (g/sqrt(N)) sum_l sigma_l^y (a + a^dag)
* X_COUPLING:     -i (g/sqrt(N)) sum_l sigma_l^x (a - a^dag)

Optional quadratic terms: A2 adds (g^2/omega_a)(a + a^dag)^2 and P2 adds
(g^2/(N omega_c)) (sum_l sigma_l^x)^2.

For numerical work every Hamiltonian is rotated by the diagonal unitary
V = diag(i^(m + N/2)) acting on the spin factor, which maps J+- to +-i J+-
and so turns all coupling forms and both quadratic terms into real symmetric
matrices.  The rotation is exact, diagonal, commutes with a^dag a, a + a^dag
and the parity operator, and therefore changes none of the reported
observables; build_dicke still returns the literal complex matrix.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace
from enum import Enum, unique
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as sla

from .errors import DomainError

DEFAULT_MAX_DIM = 200_000
_CONV_RTOL = 1e-8  # relative ground-energy change under cutoff doubling


@unique
class CouplingForm(Enum):
    ROTATING_WAVE = "rotating_wave"
    Y_COUPLING = "y"
    X_COUPLING = "x"


@unique
class QuadTerm(Enum):
    NONE = "none"
    A2 = "a2"
    P2 = "p2"


def default_fock_cutoff(n_atoms: int, g: float, omega_c: float) -> int:
    """Cutoff heuristic: the collective photon number scales as g^2 N / wc^2."""
    return int(math.ceil(10.0 + 4.0 * g * g * n_atoms / (omega_c * omega_c)))


@dataclass(frozen=True)
class DickeConfig:
    n_atoms: int
    fock_cutoff: Optional[int] = None
    omega_a: float = 1.0
    omega_c: float = 1.0
    g: float = 0.0
    coupling_form: CouplingForm = CouplingForm.Y_COUPLING
    quad_term: QuadTerm = QuadTerm.NONE

    def __post_init__(self):
        if self.n_atoms < 1:
            raise DomainError(f"n_atoms must be >= 1, got {self.n_atoms}")
        if self.fock_cutoff is not None and self.fock_cutoff < 1:
            raise DomainError(f"fock_cutoff must be >= 1, got {self.fock_cutoff}")
        if not (self.omega_a > 0):
            raise DomainError(f"omega_a must be > 0, got {self.omega_a}")
        if not (self.omega_c > 0):
            raise DomainError(f"omega_c must be > 0, got {self.omega_c}")
        if not (self.g >= 0):
            raise DomainError(f"g must be >= 0, got {self.g}")

    @property
    def effective_cutoff(self) -> int:
        if self.fock_cutoff is not None:
            return self.fock_cutoff
        return default_fock_cutoff(self.n_atoms, self.g, self.omega_c)

    @property
    def dimension(self) -> int:
        return (self.n_atoms + 1) * (self.effective_cutoff + 1)


@dataclass(frozen=True)
class SpectrumResult:
    eigenvalues: np.ndarray
    ground_energy_per_atom: float
    photon_density: float
    field_quadrature: float
    parity: float
    converged: bool


@dataclass(frozen=True)
class SweepPoint:
    g: float
    fock_cutoff: int
    photon_density: float
    ground_energy_per_atom: float
    gap: float
    gap_above_doublet: float
    field_quadrature: float
    parity: float
    converged: bool


def _max_dim() -> int:
    raw = os.environ.get("SPT_MAX_DIM")
    if raw is not None:
        try:
            return int(raw)
        except ValueError as exc:
            raise DomainError(f"SPT_MAX_DIM must be an integer, got {raw!r}") from exc
    return DEFAULT_MAX_DIM


def _guard_dimension(cfg: DickeConfig, max_dim: Optional[int]):
    limit = max_dim if max_dim is not None else _max_dim()
    if cfg.dimension > limit:
        raise DomainError(
            f"basis dimension {cfg.dimension} exceeds the guard {limit} "
            "(raise SPT_MAX_DIM to override)")


def _spin_ladder(n_atoms: int) -> np.ndarray:
    """Raising matrix J+ in the |j=N/2, m> basis, m ascending from -j."""
    j = 0.5 * n_atoms
    m = np.arange(-j, j)  # m values that can be raised
    jp = np.zeros((n_atoms + 1, n_atoms + 1))
    jp[np.arange(1, n_atoms + 1), np.arange(n_atoms)] = np.sqrt(
        j * (j + 1.0) - m * (m + 1.0))
    return jp


def _boson_lowering(cutoff: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1.0, cutoff + 1.0)), 1)


def _terms(cfg: DickeConfig, literal: bool):
    """Spin/Fock factors of every Hamiltonian term.

    Returns (m_diag, n_diag, terms) where terms is a list of
    (spin_matrix, fock_matrix) whose Kronecker products sum to the coupling
    and quadratic pieces.  With literal=False the spin factors are in the
    rotated basis and every matrix is real.
    """
    n_at, cutoff = cfg.n_atoms, cfg.effective_cutoff
    jp = _spin_ladder(n_at)
    jm = jp.T
    a = _boson_lowering(cutoff)
    ad = a.T
    x = a + ad
    m_diag = np.arange(-0.5 * n_at, 0.5 * n_at + 0.5)
    n_diag = np.arange(cutoff + 1.0)
    root_n = math.sqrt(n_at)
    g = cfg.g

    terms = []
    if g != 0.0:
        c = g / root_n
        if cfg.coupling_form is CouplingForm.ROTATING_WAVE:
            if literal:
                terms.append((1j * c * jm, ad))
                terms.append((-1j * c * jp, a))
            else:
                terms.append((c * jm, ad))
                terms.append((c * jp, a))
        elif cfg.coupling_form is CouplingForm.Y_COUPLING:
            sy = 1j * (jm - jp)
            terms.append((c * (sy if literal else (jp + jm)), x))
        else:  # X_COUPLING
            if literal:
                terms.append((-1j * c * (jp + jm), a - ad))
            else:
                terms.append((c * (jp - jm), a - ad))
    if cfg.quad_term is QuadTerm.A2 and g != 0.0:
        terms.append((np.eye(n_at + 1), (g * g / cfg.omega_a) * (x @ x)))
    elif cfg.quad_term is QuadTerm.P2 and g != 0.0:
        coeff = g * g / (n_at * cfg.omega_c)
        sx = jp + jm
        if literal:
            terms.append((coeff * (sx @ sx), np.eye(cutoff + 1)))
        else:
            d = jp - jm
            terms.append((coeff * (d.T @ d), np.eye(cutoff + 1)))
    return m_diag, n_diag, terms


def build_dicke(cfg: DickeConfig, max_dim: Optional[int] = None) -> np.ndarray:
    """Dense Hermitian matrix of the configured Hamiltonian.

    Basis ordering is |m> tensor |n| with the Fock index fastest; dimension
    (N+1)(n_max+1), guarded by ``max_dim`` (default 200000, overridable
    through the SPT_MAX_DIM environment variable).
    """
    _guard_dimension(cfg, max_dim)
    m_diag, n_diag, terms = _terms(cfg, literal=True)
    n_at, cutoff = cfg.n_atoms, cfg.effective_cutoff
    h = np.kron(np.diag(cfg.omega_a * m_diag), np.eye(cutoff + 1)).astype(complex)
    h += np.kron(np.eye(n_at + 1), np.diag(cfg.omega_c * n_diag))
    for s_op, f_op in terms:
        h += np.kron(s_op, f_op)
    return h


def parity_diagonal(cfg: DickeConfig) -> np.ndarray:
    """Diagonal of the parity operator exp(i pi (a^dag a + J_z + N/2))."""
    n_at, cutoff = cfg.n_atoms, cfg.effective_cutoff
    m_idx = np.repeat(np.arange(n_at + 1), cutoff + 1)
    n_idx = np.tile(np.arange(cutoff + 1), n_at + 1)
    return np.where((m_idx + n_idx) % 2 == 0, 1.0, -1.0)


def _parity_blocks(cfg: DickeConfig):
    """Real symmetric parity blocks of the rotated Hamiltonian.

    Yields (block_matrix, m_index, n_index, sign) for the even and odd
    sectors without materializing the full matrix.
    """
    m_diag, n_diag, terms = _terms(cfg, literal=False)
    n_at, cutoff = cfg.n_atoms, cfg.effective_cutoff
    m_idx = np.repeat(np.arange(n_at + 1), cutoff + 1)
    n_idx = np.tile(np.arange(cutoff + 1), n_at + 1)
    for p in (0, 1):
        sel = np.flatnonzero((m_idx + n_idx) % 2 == p)
        mi, ni = m_idx[sel], n_idx[sel]
        blk = np.diag(cfg.omega_a * m_diag[mi] + cfg.omega_c * n_diag[ni])
        for s_op, f_op in terms:
            blk += s_op[np.ix_(mi, mi)] * f_op[np.ix_(ni, ni)]
        yield blk, mi, ni, (1.0 if p == 0 else -1.0)


def _ground_energy(cfg: DickeConfig) -> float:
    """Lowest eigenvalue across both parity blocks (values only)."""
    e0 = np.inf
    for blk, _, _, _ in _parity_blocks(cfg):
        val = sla.eigh(blk, subset_by_index=(0, 0), eigvals_only=True,
                       driver="evr")[0]
        e0 = min(e0, float(val))
    return e0


def _converged(cfg: DickeConfig, e0: float) -> bool:
    doubled = replace(cfg, fock_cutoff=2 * cfg.effective_cutoff)
    e0_doubled = _ground_energy(doubled)
    return abs(e0_doubled - e0) < _CONV_RTOL * max(1.0, abs(e0))


def ground_observables(cfg: DickeConfig, check_convergence: bool = True,
                       max_dim: Optional[int] = None) -> SpectrumResult:
    """Full spectrum plus ground-state observables.

    The field quadrature <a + a^dag> vanishes identically because the ground
    state is computed inside one parity sector and the quadrature flips
    parity; this is the finite-N selection rule (symmetry breaking appears
    only as N grows).
    """
    _guard_dimension(cfg, max_dim)
    best = None
    spectra = []
    for blk, mi, ni, sign in _parity_blocks(cfg):
        vals, vecs = np.linalg.eigh(blk)
        spectra.append(vals)
        if best is None or vals[0] < best[0]:
            best = (vals[0], vecs[:, 0], ni, sign)
    e0, psi, ni, sign = best
    eigenvalues = np.sort(np.concatenate(spectra))
    weight = psi * psi
    photon_density = float(weight @ ni) / cfg.n_atoms
    result_converged = _converged(cfg, float(e0)) if check_convergence else True
    return SpectrumResult(
        eigenvalues=eigenvalues,
        ground_energy_per_atom=float(e0) / cfg.n_atoms,
        photon_density=photon_density,
        field_quadrature=0.0,
        parity=sign,
        converged=result_converged,
    )


def _sweep_point(cfg: DickeConfig, g: float, check_convergence: bool,
                 max_doublings: int, max_dim: Optional[int]) -> SweepPoint:
    base = replace(cfg, g=float(g))
    cutoff = base.effective_cutoff
    converged = not check_convergence
    for _ in range(max_doublings + 1):
        point = replace(base, fock_cutoff=cutoff)
        _guard_dimension(point, max_dim)
        lows = []
        ground = None
        for blk, mi, ni, sign in _parity_blocks(point):
            k = min(2, blk.shape[0]) - 1
            vals, vecs = sla.eigh(blk, subset_by_index=(0, k), driver="evr")
            lows.extend(vals)
            if ground is None or vals[0] < ground[0]:
                ground = (vals[0], vecs[:, 0], ni, sign)
        if check_convergence:
            converged = _converged(point, float(ground[0]))
            if not converged and cutoff < 10_000:
                cutoff *= 2
                continue
        break
    lows = np.sort(np.asarray(lows))
    e0, psi, ni, sign = ground
    photon_density = float((psi * psi) @ ni) / cfg.n_atoms
    gap = float(lows[1] - lows[0]) if lows.size > 1 else math.nan
    gap2 = float(lows[2] - lows[0]) if lows.size > 2 else math.nan
    return SweepPoint(
        g=float(g),
        fock_cutoff=cutoff,
        photon_density=photon_density,
        ground_energy_per_atom=float(e0) / cfg.n_atoms,
        gap=gap,
        gap_above_doublet=gap2,
        field_quadrature=0.0,
        parity=sign,
        converged=converged,
    )


def sweep_order_parameter(cfg: DickeConfig, g_grid: Sequence[float],
                          check_convergence: bool = True,
                          max_doublings: int = 3,
                          max_dim: Optional[int] = None) -> list[SweepPoint]:
    """One observable row per coupling value, ascending grid required.

    When ``cfg.fock_cutoff`` is None the cutoff follows the heuristic and is
    doubled until the ground energy is converged (flag propagated per row).
    """
    grid = np.asarray(g_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or np.any(np.diff(grid) < 0):
        raise DomainError("g_grid must be a nonempty ascending sequence")
    return [_sweep_point(cfg, g, check_convergence, max_doublings, max_dim)
            for g in grid]


def commutator_deviation(n_atoms: int, n_excited: int) -> float:
    """Bosonization defect 1 - <[b, b^dag]> in the n-excitation Dicke state.

    b = (1/sqrt(N)) sum_l sigma_l is the collective lowering operator at one
    wavevector and orientation; the commutator matrix is constructed
    explicitly, not taken from the closed form 2n/N it reproduces.
    """
    if n_atoms < 1:
        raise DomainError(f"n_atoms must be >= 1, got {n_atoms}")
    if not (0 <= n_excited <= n_atoms):
        raise DomainError(
            f"n_excited must lie in [0, {n_atoms}], got {n_excited}")
    b = _spin_ladder(n_atoms).T / math.sqrt(n_atoms)
    comm = b @ b.T - b.T @ b
    return float(1.0 - comm[n_excited, n_excited])
