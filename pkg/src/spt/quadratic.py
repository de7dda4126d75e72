"""Per-mode quadratic bosonic Hamiltonians and their symplectic diagonalization.

A quadratic form is stored as the Hermitian coefficient matrix H of
``H_op = 1/2 v^dag H v`` with ``v = (a_1 .. a_M, a_1^dag .. a_M^dag)``, plus a
real scalar collecting the constant terms dropped from the operator.  In this
layout H has the block structure ``[[A, B], [B*, A*]]`` with A Hermitian and B
symmetric; normal-mode frequencies are eigenvalues of ``eta H`` with
``eta = diag(+1_M, -1_M)``.

Three builders are provided for one (k, orientation) block:

* Coulomb-gauge transverse block:
  ``wc a^dag a + wa b^dag b + i g_C (a+a^dag)(b-b^dag) + D_C (a+a^dag)^2``
  with ``g_C = wa lam`` and ``D_C = wa lam^2`` (the quadratic term is the
  vector-potential-squared piece);
* dipole-gauge transverse block:
  ``wc a^dag a + wa b^dag b - i g_D (a-a^dag)(b+b^dag) + D_D (b+b^dag)^2``
  with ``g_D = wc lam`` and ``D_D = wc lam^2`` (quadratic term from the
  transverse polarization squared);
* longitudinal block: ``wa b^dag b + wc lam^2 (b+b^dag)^2`` (single mode, the
  quadratic term is the whole coupling and cannot be switched off).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum, unique
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as sla

from .errors import ConfigurationError, ContractViolationError
from .model import ModeParams

_EPS = float(np.finfo(float).eps)

# Zero modes at a stability boundary are defective (Jordan) eigenvalues of
# eta H, so eig() resolves them only to O(sqrt(eps)).  The marginal band is
# widened accordingly; see classify_stability.
_ZERO_NOISE_FACTOR = 16.0 * np.sqrt(_EPS)


@unique
class GaugeChoice(Enum):
    COULOMB = "coulomb"
    DIPOLE = "dipole"
    LONGITUDINAL = "longitudinal"


@dataclass(frozen=True)
class TermFlags:
    """Whether the gauge's quadratic term is kept.

    For the longitudinal block the quadratic term is the entire coupling, so
    switching it off is rejected.
    """

    include_quadratic_term: bool = True


@unique
class Stability(Enum):
    STABLE = "stable"
    MARGINAL = "marginal"
    UNSTABLE = "unstable"


@dataclass(frozen=True)
class QuadraticForm:
    """Hermitian coefficient matrix of 1/2 v^dag H v plus the dropped offset."""

    matrix: np.ndarray
    offset: float = 0.0

    @property
    def dim(self) -> int:
        """Number of bosonic modes M."""
        return self.matrix.shape[0] // 2


@dataclass(frozen=True)
class StabilityReport:
    status: Stability
    frequencies: np.ndarray
    max_growth_rate: float


def _check_form(form: QuadraticForm) -> np.ndarray:
    h = np.asarray(form.matrix, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1] or h.shape[0] % 2:
        raise ContractViolationError(f"matrix must be 2M x 2M, got {h.shape}")
    scale = max(1.0, float(np.abs(h).max()))
    if np.abs(h - h.conj().T).max() > 1e-12 * scale:
        raise ContractViolationError("coefficient matrix is not Hermitian")
    m = h.shape[0] // 2
    swapped = np.block([[h[m:, m:], h[m:, :m]], [h[:m, m:], h[:m, :m]]])
    if np.abs(h - swapped.T).max() > 1e-12 * scale:
        raise ContractViolationError("matrix lacks bosonic block symmetry H = X H^T X")
    return h


def build_quadratic(params: ModeParams, gauge: GaugeChoice,
                    flags: TermFlags = TermFlags()) -> QuadraticForm:
    """Assemble the coefficient matrix for one per-mode block."""
    wa, wc, lam = params.omega_a, params.omega_c, params.lam
    quad = flags.include_quadratic_term

    if gauge is GaugeChoice.LONGITUDINAL:
        if not quad:
            raise ConfigurationError(
                "the longitudinal quadratic term is the entire coupling and "
                "cannot be switched off")
        d = wc * lam * lam
        a_blk = np.array([[wa + 2.0 * d]], dtype=complex)
        b_blk = np.array([[2.0 * d]], dtype=complex)
        offset = d - 0.5 * wa
    elif gauge is GaugeChoice.COULOMB:
        g = wa * lam
        d = wa * lam * lam if quad else 0.0
        a_blk = np.array([[wc + 2.0 * d, 1j * g], [-1j * g, wa]])
        b_blk = np.array([[2.0 * d, -1j * g], [-1j * g, 0.0]])
        offset = d - 0.5 * (wa + wc)
    elif gauge is GaugeChoice.DIPOLE:
        g = wc * lam
        d = wc * lam * lam if quad else 0.0
        a_blk = np.array([[wc, 1j * g], [-1j * g, wa + 2.0 * d]])
        b_blk = np.array([[0.0, 1j * g], [1j * g, 2.0 * d]])
        offset = d - 0.5 * (wa + wc)
    else:  # pragma: no cover
        raise ConfigurationError(f"unknown gauge {gauge!r}")

    h = np.block([[a_blk, b_blk], [b_blk.conj(), a_blk.conj()]])
    return QuadraticForm(matrix=h, offset=offset)


def assemble_mode_blocks(forms: Sequence[QuadraticForm]) -> QuadraticForm:
    """Direct sum of independent per-mode forms in the (modes + conjugates) layout.

    The off-block entries of the result are exactly zero, which is the
    assertable statement of transverse/longitudinal decoupling.
    """
    if not forms:
        raise ConfigurationError("need at least one form")
    dims = [f.dim for f in forms]
    m_tot = sum(dims)
    out = np.zeros((2 * m_tot, 2 * m_tot), dtype=complex)
    pos = 0
    for f, m in zip(forms, dims):
        h = np.asarray(f.matrix)
        sl = slice(pos, pos + m)
        sr = slice(m_tot + pos, m_tot + pos + m)
        out[sl, sl] = h[:m, :m]
        out[sl, sr] = h[:m, m:]
        out[sr, sl] = h[m:, :m]
        out[sr, sr] = h[m:, m:]
        pos += m
    return QuadraticForm(matrix=out, offset=sum(f.offset for f in forms))


def _symplectic_metric(m: int) -> np.ndarray:
    return np.diag(np.concatenate([np.ones(m), -np.ones(m)]))


def _positive_branch(eigvals: np.ndarray, m: int) -> np.ndarray:
    """Pick one representative from each (lam, -lam) eigenvalue pair.

    The representative has positive real part, or positive imaginary part
    when the real part vanishes within pairing noise.
    """
    scale = max(1.0, float(np.abs(eigvals).max()))
    re_tol = 1e3 * _EPS * scale
    vals = list(eigvals)
    out = []
    for _ in range(m):
        k = int(np.argmax(np.abs(vals)))
        lam = vals.pop(k)
        j = int(np.argmin(np.abs(np.asarray(vals) + lam)))
        vals.pop(j)
        if lam.real > re_tol:
            rep = lam
        elif lam.real < -re_tol:
            rep = -lam
        else:
            rep = lam if lam.imag >= 0 else -lam
        out.append(rep)
    out = np.asarray(out)
    order = np.lexsort((out.imag, out.real))
    return out[order]


def symplectic_spectrum(form: QuadraticForm) -> np.ndarray:
    """Normal-mode frequencies: positive-branch eigenvalues of eta H.

    Returns M complex frequencies sorted ascending by real part.  Real
    frequencies mean oscillatory normal modes; a nonzero imaginary part is a
    dynamical growth rate.
    """
    h = _check_form(form)
    m = h.shape[0] // 2
    w = np.linalg.eigvals(_symplectic_metric(m) @ h)
    return _positive_branch(w, m)


def bogoliubov_transform(form: QuadraticForm):
    """Diagonalize a positive-definite form canonically (Colpa's method).

    Returns ``(frequencies, T)`` where T is paraunitary, ``T eta T^dag = eta``,
    and ``T^dag H T = diag(w_1..w_M, w_1..w_M)``.  Requires H > 0, which holds
    exactly for the stable forms this package builds; otherwise a
    ContractViolationError is raised.
    """
    h = _check_form(form)
    m = h.shape[0] // 2
    try:
        chol = np.linalg.cholesky(h)  # h = chol chol^dag
    except np.linalg.LinAlgError as exc:
        raise ContractViolationError(
            "Bogoliubov transform needs a positive-definite form") from exc
    k = chol.conj().T
    eta = _symplectic_metric(m)
    w, u = np.linalg.eigh(k @ eta @ k.conj().T)
    pos = np.argsort(w)[m:]          # w_1 .. w_M ascending
    pos = pos[np.argsort(w[pos])]
    neg = np.argsort(w)[:m][::-1]    # -w_1 .. -w_M, matching order
    order = np.concatenate([pos, neg])
    u = u[:, order]
    lam = w[order]
    e_half = np.sqrt(eta @ np.diag(lam))  # diag(w.., w..) ** 0.5
    t = sla.solve_triangular(k, u @ e_half, lower=False)
    freqs = lam[:m]
    return freqs, t


def classify_stability(form: QuadraticForm, tol: float = 1e-8) -> StabilityReport:
    """Classify the normal-mode spectrum of a quadratic form.

    Unstable: some frequency carries an imaginary part beyond the zero band;
    Marginal: some frequency sits inside the band (soft mode); otherwise
    Stable.  The band is ``max(tol, 16 sqrt(eps) scale)`` because defective
    zero modes at a stability boundary are only resolved to O(sqrt(eps)) by
    the eigensolver; ties break toward instability, never toward Stable.
    """
    if not (tol > 0):
        raise ContractViolationError(f"tol must be > 0, got {tol}")
    freqs = symplectic_spectrum(form)
    scale = max(1.0, float(np.abs(freqs).max()) if freqs.size else 1.0)
    band = max(tol, _ZERO_NOISE_FACTOR * scale)
    growth = float(np.abs(freqs.imag).max()) if freqs.size else 0.0
    if growth > band:
        status = Stability.UNSTABLE
    elif freqs.size and float(np.abs(freqs).min()) <= band:
        status = Stability.MARGINAL
        growth = 0.0
    else:
        status = Stability.STABLE
        growth = 0.0
    return StabilityReport(status=status, frequencies=freqs, max_growth_rate=growth)


def critical_coupling(omega_a: float, omega_c: float, gauge: GaugeChoice,
                      flags: TermFlags = TermFlags(include_quadratic_term=False),
                      lambda_max: float = 10.0,
                      lambda_tol: float = 1e-6) -> Optional[float]:
    """Locate the coupling where the normal state first goes non-stable.

    Bisection on classify_stability over [0, lambda_max] to absolute
    tolerance ``lambda_tol``; returns None when the form is stable on the
    whole range.  A form unstable already at lambda = 0 violates the
    normal-state contract.
    """

    def status(lam: float) -> Stability:
        params = ModeParams(omega_a=omega_a, omega_c=omega_c, lam=lam)
        return classify_stability(build_quadratic(params, gauge, flags)).status

    if status(0.0) is not Stability.STABLE:
        raise ContractViolationError("normal state must be stable at zero coupling")
    if status(lambda_max) is Stability.STABLE:
        return None
    lo, hi = 0.0, lambda_max
    while hi - lo > lambda_tol:
        mid = 0.5 * (lo + hi)
        if status(mid) is Stability.STABLE:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
