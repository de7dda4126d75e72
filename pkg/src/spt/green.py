"""Stability analysis of 1D layered dielectric stacks via dispersion-function zeros.

The scalar normal-incidence wave equation for a stack with position-dependent
eps(x, w) is solved by 2x2 transfer matrices acting on (E, E').  Every layer
matrix is an even function of the layer wavenumber q = (w/c) sqrt(eps), so no
square-root branch ever enters:

    M = [[cos(q d), sin(q d)/q], [-q sin(q d), cos(q d)]],  det M = 1.

Zeros of a dispersion function D(w) are the electromagnetic modes; a zero in
the upper half plane is a growing solution, i.e. an instability of the normal
state.  Zeros are counted by the argument principle along rectangular
contours with adaptive phase-resolved sampling, then refined by Newton steps.

Internal units: hbar = c = 1, frequencies in units of the atomic transition.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum, unique
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import brentq

from .errors import (ConfigurationError, ContourError, ContractViolationError,
                     DomainError, PoleEvaluationError)
from .model import LorentzModel, lorentz_chi, lorentz_chi_derivative

C_LIGHT = 1.0
UHP_FLOOR = 1e-6  # contours must keep Im(w) at or above this floor


@dataclass(frozen=True)
class Vacuum:
    pass


@dataclass(frozen=True)
class ConstantEps:
    epsilon: float

    def __post_init__(self):
        if not (self.epsilon > 0):
            raise DomainError(f"epsilon must be > 0, got {self.epsilon}")


@dataclass(frozen=True)
class LorentzMedium:
    model: LorentzModel


Material = Union[Vacuum, ConstantEps, LorentzMedium]


def permittivity(material: Material, omega):
    if isinstance(material, Vacuum):
        return np.ones_like(np.asarray(omega, dtype=complex))
    if isinstance(material, ConstantEps):
        return np.full_like(np.asarray(omega, dtype=complex), material.epsilon)
    if isinstance(material, LorentzMedium):
        return np.asarray(1.0 + lorentz_chi(material.model, omega))
    raise ConfigurationError(f"unknown material {material!r}")


@unique
class Boundary(Enum):
    OPEN = "open"
    PERFECT_MIRRORS = "mirrors"


@dataclass(frozen=True)
class Layer:
    thickness: float
    material: Material

    def __post_init__(self):
        if not (self.thickness > 0 and math.isfinite(self.thickness)):
            raise DomainError(f"thickness must be finite and > 0, got {self.thickness}")


@dataclass(frozen=True)
class LayerStack:
    layers: Tuple[Layer, ...]
    boundary: Boundary = Boundary.PERFECT_MIRRORS

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if not self.layers:
            raise ConfigurationError("a stack needs at least one layer")


def transfer_matrix(stack: LayerStack, omega):
    """Product of layer matrices, scalar omega -> (2, 2), array -> (..., 2, 2)."""
    om = np.asarray(omega, dtype=complex)
    m11 = np.ones_like(om)
    m12 = np.zeros_like(om)
    m21 = np.zeros_like(om)
    m22 = np.ones_like(om)
    for layer in stack.layers:
        eps = permittivity(layer.material, om)
        q2 = (om / C_LIGHT) ** 2 * eps
        q = np.sqrt(q2)  # branch irrelevant: all entries are even in q
        qd = q * layer.thickness
        cos = np.cos(qd)
        sin_over_q = layer.thickness * np.sinc(qd / np.pi)
        l21 = -q2 * sin_over_q
        m11, m12, m21, m22 = (
            cos * m11 + sin_over_q * m21,
            cos * m12 + sin_over_q * m22,
            l21 * m11 + cos * m21,
            l21 * m12 + cos * m22,
        )
    out = np.stack([np.stack([m11, m12], axis=-1),
                    np.stack([m21, m22], axis=-1)], axis=-2)
    return out


def dispersion(stack: LayerStack, omega):
    """Mode condition whose zeros in omega are the stack's electromagnetic modes.

    Perfect mirrors impose field nodes at both walls, selecting the (1, 2)
    transfer-matrix element.  Open boundaries select the denominator of the
    reflection coefficient for a stack embedded in vacuum with outgoing waves
    on both sides.
    """
    m = transfer_matrix(stack, omega)
    if stack.boundary is Boundary.PERFECT_MIRRORS:
        d = m[..., 0, 1]
    else:
        om = np.asarray(omega, dtype=complex)
        q0 = om / C_LIGHT
        d = 1j * q0 * (m[..., 0, 0] + m[..., 1, 1]) + q0 ** 2 * m[..., 0, 1] - m[..., 1, 0]
    if np.ndim(omega) == 0:
        return complex(d)
    return d


@dataclass(frozen=True)
class DispersionFunction:
    """Complex frequency -> complex mode condition, with optional provenance."""

    func: Callable[[np.ndarray], np.ndarray]
    stack: Optional[LayerStack] = None
    label: str = ""

    def __call__(self, omega):
        return self.func(omega)

    @classmethod
    def from_stack(cls, stack: LayerStack) -> "DispersionFunction":
        return cls(func=lambda om: dispersion(stack, om), stack=stack,
                   label=f"stack[{len(stack.layers)} layers, {stack.boundary.value}]")

    @classmethod
    def bulk_medium(cls, model: LorentzModel, wavenumber: float) -> "DispersionFunction":
        """Bulk transverse dispersion eps(w) w^2 - c^2 k^2 at fixed wavenumber."""
        if not (wavenumber > 0):
            raise DomainError(f"wavenumber must be > 0, got {wavenumber}")
        ck2 = (C_LIGHT * wavenumber) ** 2

        def func(om):
            om = np.asarray(om, dtype=complex)
            return (1.0 + lorentz_chi(model, om)) * om ** 2 - ck2

        return cls(func=func, label=f"bulk[k={wavenumber}]")


@dataclass(frozen=True)
class Rectangle:
    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise DomainError(f"degenerate rectangle {self}")

    @property
    def center(self) -> complex:
        return complex(0.5 * (self.re_min + self.re_max),
                       0.5 * (self.im_min + self.im_max))

    def contains(self, z: complex) -> bool:
        return (self.re_min <= z.real <= self.re_max
                and self.im_min <= z.imag <= self.im_max)


@dataclass(frozen=True)
class PoleCensus:
    region: Rectangle
    winding: int
    poles: np.ndarray
    unrefined: Tuple[Rectangle, ...] = ()


class _ContourPinch(Exception):
    """A zero (or overflow) sits on or too close to the contour."""


def _contour_points(region: Rectangle, per_edge: int) -> np.ndarray:
    corners = [complex(region.re_min, region.im_min),
               complex(region.re_max, region.im_min),
               complex(region.re_max, region.im_max),
               complex(region.re_min, region.im_max)]
    pts = []
    for a, b in zip(corners, corners[1:] + corners[:1]):
        t = np.linspace(0.0, 1.0, per_edge, endpoint=False)
        pts.append(a + (b - a) * t)
    pts = np.concatenate(pts)
    return np.append(pts, pts[0])


def _insert_midpoints(d_func, z, f, where, zero_tol, max_points):
    if z.size + where.size > max_points:
        raise _ContourPinch("contour refinement exceeded the point budget")
    mid = 0.5 * (z[where] + z[where + 1])
    fm = np.asarray(d_func(mid))
    if not np.all(np.isfinite(fm)):
        raise _ContourPinch("non-finite dispersion value on the contour")
    if np.any(np.abs(fm) < zero_tol):
        raise _ContourPinch("zero of D detected on the contour")
    return np.insert(z, where + 1, mid), np.insert(f, where + 1, fm)


def _flagged(f) -> np.ndarray:
    # Wrapped phase steps alias for jumps beyond pi; since phase and
    # log-magnitude are conjugate harmonics, a magnitude jump flags the same
    # segments a hidden phase sweep would.
    dphi = np.angle(f[1:] / f[:-1])
    dlog = np.abs(np.log(np.abs(f[1:]) / np.abs(f[:-1])))
    return np.flatnonzero((np.abs(dphi) >= 0.5 * np.pi) | (dlog >= 1.0))


def _winding_once(d_func, region: Rectangle, zero_tol: float,
                  max_points: int, per_edge: int) -> int:
    z = _contour_points(region, per_edge)
    f = np.asarray(d_func(z))
    if not np.all(np.isfinite(f)):
        raise _ContourPinch("non-finite dispersion value on the contour")
    if np.any(np.abs(f) < zero_tol):
        raise _ContourPinch("zero of D detected on the contour")

    def resolve(z, f):
        while True:
            bad = _flagged(f)
            if bad.size == 0:
                return z, f
            z, f = _insert_midpoints(d_func, z, f, bad, zero_tol, max_points)

    # Endpoint criteria alone cannot see a rotation by a full multiple of
    # 2 pi between samples (D may return to the same value, e.g. across a
    # sharp resonance spike just below the contour).  After flag-driven
    # refinement, verify by halving every segment and re-resolving until the
    # unwrapped total is reproduced; hidden structure surfaces as new flags.
    z, f = resolve(z, f)
    total = float(np.angle(f[1:] / f[:-1]).sum())
    for _ in range(32):
        z, f = _insert_midpoints(d_func, z, f, np.arange(z.size - 1),
                                 zero_tol, max_points)
        z, f = resolve(z, f)
        new_total = float(np.angle(f[1:] / f[:-1]).sum())
        if abs(new_total - total) < 1e-3:
            total = new_total
            break
        total = new_total
    else:
        raise _ContourPinch("winding total failed to stabilize under refinement")
    turns = total / (2.0 * np.pi)
    winding = int(round(turns))
    if abs(turns - winding) > 0.25:
        raise _ContourPinch(f"winding sum {turns} is not close to an integer")
    return winding


def _perturbed(region: Rectangle, attempt: int, floor: float) -> Rectangle:
    # Alternate shrinking and expanding about the center; the lower edge
    # stays at or above the UHP floor.
    factor = 1.0 + (0.004 * attempt) * (1 if attempt % 2 else -1)
    cx = 0.5 * (region.re_min + region.re_max)
    cy = 0.5 * (region.im_min + region.im_max)
    hw = 0.5 * (region.re_max - region.re_min) * factor
    hh = 0.5 * (region.im_max - region.im_min) * factor
    return Rectangle(re_min=cx - hw, re_max=cx + hw,
                     im_min=max(floor, cy - hh), im_max=cy + hh)


def winding_count(d_func, region: Rectangle, *, zero_tol: float = 1e-12,
                  retries: int = 5, per_edge: int = 64,
                  max_points: int = 400_000) -> int:
    """Argument-principle count of zeros of D inside an UHP rectangle.

    Sampling along the contour is refined until every step's phase change is
    below pi/2.  A sample with |D| < zero_tol, or a refinement blow-up, makes
    the rectangle shrink/expand slightly and retry; after ``retries`` failed
    attempts a ContourError is raised.  Nonnegative for D analytic inside.
    """
    if region.im_min < UHP_FLOOR:
        raise DomainError(
            f"region must satisfy Im(omega) >= {UHP_FLOOR}, got {region.im_min}")
    last = None
    for attempt in range(retries + 1):
        reg = region if attempt == 0 else _perturbed(region, attempt, UHP_FLOOR)
        try:
            return _winding_once(d_func, reg, zero_tol, max_points, per_edge)
        except _ContourPinch as exc:
            last = exc
    raise ContourError(f"contour kept failing after {retries} retries: {last}")


def _newton_refine(d_func, z0: complex, iters: int = 100,
                   step_tol: float = 1e-13) -> Optional[complex]:
    z = complex(z0)
    for _ in range(iters):
        scale = max(1.0, abs(z))
        h = 1e-7 * scale
        f = complex(d_func(z))
        df = (complex(d_func(z + h)) - complex(d_func(z - h))) / (2.0 * h)
        if df == 0 or not (cmath.isfinite(f) and cmath.isfinite(df)):
            return None
        dz = f / df
        z -= dz
        if abs(dz) < step_tol * scale:
            return z
    return None


def _split(region: Rectangle, fraction: float) -> Tuple[Rectangle, Rectangle]:
    if region.re_max - region.re_min >= region.im_max - region.im_min:
        cut = region.re_min + fraction * (region.re_max - region.re_min)
        return (Rectangle(region.re_min, cut, region.im_min, region.im_max),
                Rectangle(cut, region.re_max, region.im_min, region.im_max))
    cut = region.im_min + fraction * (region.im_max - region.im_min)
    return (Rectangle(region.re_min, region.re_max, region.im_min, cut),
            Rectangle(region.re_min, region.re_max, cut, region.im_max))


def locate_poles(d_func, region: Rectangle, *, residual_tol: float = 1e-9,
                 max_depth: int = 40, **winding_kwargs) -> PoleCensus:
    """Refine the zeros counted by winding_count into a pole census.

    Rectangles are subdivided until each holds at most one zero, then a
    Newton iteration (numerical derivative) polishes the root from the cell
    center.  Cells whose root cannot be refined below ``residual_tol`` are
    reported unrefined; the winding stays authoritative.
    """
    total = winding_count(d_func, region, **winding_kwargs)
    poles: List[complex] = []
    unrefined: List[Rectangle] = []
    work: List[Tuple[Rectangle, int, int]] = [(region, total, 0)]
    while work:
        reg, w, depth = work.pop()
        if w == 0:
            continue
        if w == 1 or depth >= max_depth:
            root = _newton_refine(d_func, reg.center)
            ok = (root is not None and region.contains(root)
                  and abs(complex(d_func(root))) < residual_tol)
            if ok and any(abs(root - p) < 1e-8 * max(1.0, abs(root)) for p in poles):
                ok = False  # Newton escaped into an already-counted root
            if ok:
                poles.extend([root] * w)
            else:
                unrefined.append(reg)
            continue
        done = False
        for fraction in (0.5, 0.47, 0.53, 0.44, 0.56):
            try:
                r1, r2 = _split(reg, fraction)
                w1 = winding_count(d_func, r1, **winding_kwargs)
                w2 = winding_count(d_func, r2, **winding_kwargs)
            except ContourError:
                continue
            if w1 + w2 == w:
                work.append((r1, w1, depth + 1))
                work.append((r2, w2, depth + 1))
                done = True
                break
        if not done:
            unrefined.append(reg)
    poles_arr = np.asarray(sorted(poles, key=lambda z: (z.imag, z.real)),
                           dtype=complex)
    return PoleCensus(region=region, winding=total, poles=poles_arr,
                      unrefined=tuple(unrefined))


def real_axis_modes(stack: LayerStack, omega_min: float, omega_max: float,
                    samples: int = 4096) -> np.ndarray:
    """Real-axis zeros of a lossless stack's dispersion, by sign-change bisection.

    Only meaningful when D is real on the real axis (no damping); a complex
    dispersion is rejected.
    """
    if not (0 < omega_min < omega_max):
        raise DomainError("need 0 < omega_min < omega_max")
    grid = np.linspace(omega_min, omega_max, samples)
    try:
        vals = dispersion(stack, grid)
    except PoleEvaluationError:
        # dodge exact pole hits by a half-step shift
        grid = grid + 0.5 * (grid[1] - grid[0])
        vals = dispersion(stack, grid)
    scale = float(np.abs(vals).max())
    if float(np.abs(vals.imag).max()) > 1e-9 * scale:
        raise DomainError("dispersion is not real on the real axis (lossy stack?)")
    re = vals.real
    roots = []
    for i in np.flatnonzero(np.sign(re[:-1]) * np.sign(re[1:]) < 0):
        f = lambda x: dispersion(stack, complex(x)).real
        try:
            roots.append(brentq(f, grid[i], grid[i + 1], xtol=1e-12))
        except (ValueError, PoleEvaluationError):
            continue
    return np.asarray(roots)


def kk_residual(model: LorentzModel, omega_grid: Sequence[float]) -> float:
    """Causality check: residual of the Kramers-Kronig relation for chi.

    Compares Re chi against (2/pi) PV int w' Im chi(w') / (w'^2 - w^2) dw' on
    a uniform grid over [0, W].  The principal value is evaluated by the
    trapezoid rule with the singular point excluded; the pole term is
    regularized by subtracting its value at the singularity, whose PV integral
    over [0, W] is known in closed form.  Returns the maximum residual over
    interior grid points, normalized by max |chi| (the two endpoints sit on
    the integration boundary where no principal value exists).
    """
    if not (model.gamma > 0):
        raise DomainError("Kramers-Kronig check needs gamma > 0 (Im chi is "
                          "distributional at gamma = 0)")
    w = np.asarray(omega_grid, dtype=float)
    if w.ndim != 1 or w.size < 16:
        raise DomainError("omega_grid must be a 1D grid with at least 16 points")
    h = w[1] - w[0]
    if w[0] != 0.0 or h <= 0 or np.abs(np.diff(w) - h).max() > 1e-9 * h:
        raise DomainError("omega_grid must be uniform and start at 0")
    if w[-1] < 20.0 * model.omega0:
        raise DomainError("omega_grid must extend to at least 20 omega0")
    wmax = float(w[-1])
    chi = np.asarray(lorentz_chi(model, w + 0j))
    if model.strength == 0.0:
        return 0.0
    im = chi.imag
    re = chi.real
    dchi = np.asarray(lorentz_chi_derivative(model, w + 0j))
    weights = np.full(w.size, h)
    weights[0] *= 0.5
    weights[-1] *= 0.5

    n = w.size
    idx = np.arange(1, n - 1)
    residual = np.zeros(idx.size)
    block = 256
    for start in range(0, idx.size, block):
        ii = idx[start:start + block]
        wi = w[ii][:, None]
        # kernel F(w')/(w'-wi) with F(w') = w' Im chi(w') / (w' + wi)
        f_all = w[None, :] * im[None, :] / (w[None, :] + wi)
        f_sing = (0.5 * im[ii])[:, None]
        diff = w[None, :] - wi
        reg = np.where(diff == 0.0, 0.0, (f_all - f_sing) / np.where(diff == 0.0, 1.0, diff))
        pv = (reg * weights[None, :]).sum(axis=1)
        # regularized integrand limit at w' = wi contributes its own cell
        f_prime = (im[ii] + 2.0 * w[ii] * dchi[ii].imag) / (4.0 * w[ii])
        pv += f_prime * h
        pv += 0.5 * im[ii] * np.log((wmax - w[ii]) / w[ii])
        residual[start:start + block] = np.abs(re[ii] - (2.0 / np.pi) * pv)
    return float(residual.max() / np.abs(chi).max())
