"""The period map in two realizations, and its finite-difference differential.

``poincare_numeric`` integrates the full system over one pumping period and
projects to gauge-reduced coordinates.  ``poincare_analytic`` evaluates the
second-order closed form built from the damped-kernel period constants: the
field image is

    a(2pi) = a0(2pi) + sum_n alpha_n Im{z_n0 A1}
             + sum_n alpha_n beta_n I_n Re{conj(nu) A2}
             + (1/2) sum_n alpha_n gamma_n I_n A3        (same with B for b)

with I_n = -sqrt(1-4|z_n0|^2) the population inversion, and the molecular
image z_n = z_n0 + 2 pi i (beta_n conj(nu) + gamma_n/2) I_n.  The frequency
content nu of the first-order field response is

    nu = nu11 + i nu12 + nu2,
    nu11 = -kappa a0/4 + (1 - kappa pi) b0 / 2,
    nu12 = (1 - kappa pi) a0 / 2 + kappa b0 / 4,
    nu2  = Re(J2) * sum_n alpha_n gamma_n I_n,

each coefficient pinned against quadrature of its defining integral in the
test suite.  The analytic map is valid to second order near the all-lower
ground state; the finite-difference Jacobian of the numeric map is the
authoritative differential everywhere.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .dynamics import OdeSettings, integrate_full
from .ensemble import Ensemble
from .errors import ValidationError
from .kernels import constants_AB, fundamental_solution, fundamental_solution_deriv
from .model import FullState, ReducedState, hopf_project, inversion_from_z, \
    lift_state

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class NuValue:
    """First-harmonic content of the first-order field response."""

    nu: complex
    nu11: float
    nu12: float
    nu2: float


@dataclass(frozen=True)
class MapOutput:
    """Image of one period-map application, in reduced coordinates."""

    a: float
    b: float
    z: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.z, dtype=complex)
        z.setflags(write=False)
        object.__setattr__(self, "z", z)

    def distance(self, other: "MapOutput") -> float:
        return max(abs(self.a - other.a), abs(self.b - other.b),
                   float(np.max(np.abs(self.z - other.z))) if self.z.size else 0.0)


def compute_nu(a0: float, b0: float, e: Ensemble, kappa: float,
               init_z) -> NuValue:
    """nu = (1/2pi) int_0^2pi adot^(1) e^{-i tau} d tau in closed form."""
    z0 = np.asarray(init_z, dtype=complex)
    inv = inversion_from_z(z0)
    j2 = constants_AB(kappa).J2
    nu11 = -kappa * a0 / 4.0 + (1.0 - kappa * np.pi) * b0 / 2.0
    nu12 = (1.0 - kappa * np.pi) * a0 / 2.0 + kappa * b0 / 4.0
    nu2 = float(j2.real * np.sum(e.alpha * e.gamma * inv))
    return NuValue(nu=complex(nu11 + nu2, nu12), nu11=nu11, nu12=nu12, nu2=nu2)


def poincare_numeric(state0: FullState, e: Ensemble, kappa: float,
                     settings: OdeSettings = OdeSettings()) -> MapOutput:
    """One-period image of the full dynamics, projected to the gauge quotient."""
    final = integrate_full(state0, 0.0, TWO_PI, e, kappa, settings)
    return MapOutput(a=final.a, b=final.b, z=hopf_project(final.c))


def poincare_analytic(a0: float, b0: float, z0, e: Ensemble,
                      kappa: float) -> MapOutput:
    """Second-order closed-form image near the ground state (branch |c1|>|c2|)."""
    z0 = np.asarray(z0, dtype=complex)
    if np.any(np.abs(z0) >= 0.5 - 1e-6):
        raise ValidationError("analytic map requires |z0| < 1/2 - delta")
    kc = constants_AB(kappa)
    nu = compute_nu(a0, b0, e, kappa, z0).nu
    inv = inversion_from_z(z0)

    e2p = float(fundamental_solution(TWO_PI, kappa))
    ed2p = float(fundamental_solution_deriv(TWO_PI, kappa, order=1))
    edd2p = float(fundamental_solution_deriv(TWO_PI, kappa, order=2))
    a_free = a0 * ed2p + (b0 + 2.0 * kappa * a0) * e2p
    b_free = a0 * edd2p + (b0 + 2.0 * kappa * a0) * ed2p

    ab_g = e.alpha * e.beta * inv
    ag_g = e.alpha * e.gamma * inv
    nu_bar = np.conj(nu)
    a_img = (a_free
             + float(np.sum(e.alpha * np.imag(z0 * kc.A1)))
             + float(np.sum(ab_g)) * (nu_bar * kc.A2).real
             + 0.5 * float(np.sum(ag_g)) * kc.A3)
    b_img = (b_free
             + float(np.sum(e.alpha * np.imag(z0 * kc.B1)))
             + float(np.sum(ab_g)) * (nu_bar * kc.B2).real
             + 0.5 * float(np.sum(ag_g)) * kc.B3)

    z_img = z0 + TWO_PI * 1j * (e.beta * nu_bar + e.gamma / 2.0) * inv
    return MapOutput(a=float(a_img), b=float(b_img), z=z_img)


# ---------------------------------------------------------------------------
# reduced-coordinate packing and the finite-difference differential
# ---------------------------------------------------------------------------

def reduced_to_vector(state: ReducedState) -> np.ndarray:
    """(a, b, Re z_1, Im z_1, ...) layout shared with the spectrum module."""
    x = np.empty(2 + 2 * state.n_molecules)
    x[0], x[1] = state.a, state.b
    x[2::2] = state.z.real
    x[3::2] = state.z.imag
    return x


def vector_to_reduced(x: np.ndarray) -> ReducedState:
    return ReducedState(a=float(x[0]), b=float(x[1]), z=x[2::2] + 1j * x[3::2])


def map_output_to_vector(out: MapOutput) -> np.ndarray:
    return reduced_to_vector(ReducedState(a=out.a, b=out.b, z=out.z))


def make_numeric_map(e: Ensemble, kappa: float,
                     settings: OdeSettings = OdeSettings()) -> Callable:
    """The numeric period map as a flat function on reduced coordinates."""

    def period_map(x: np.ndarray) -> np.ndarray:
        state = lift_state(vector_to_reduced(x))
        out = poincare_numeric(state, e, kappa, settings)
        return map_output_to_vector(out)

    return period_map


def jacobian_fd(period_map: Callable, base_point: np.ndarray, h: float = 1e-5,
                richardson: bool = False) -> np.ndarray:
    """Central-difference Jacobian of a flat map; optional Richardson step.

    Columns are independent map evaluations, so the integrator tolerance sets
    the noise floor at ~tol/h per entry; use tight tolerances in the map when
    comparing against analytic blocks.
    """
    if not 1e-7 <= h <= 1e-3:
        raise ValidationError("finite-difference step h must lie in [1e-7, 1e-3]")
    base_point = np.asarray(base_point, dtype=float)
    dim = base_point.size

    def one(step):
        jac = np.empty((dim, dim))
        for k in range(dim):
            dx = np.zeros(dim)
            dx[k] = step
            fp = period_map(base_point + dx)
            fm = period_map(base_point - dx)
            if not (np.all(np.isfinite(fp)) and np.all(np.isfinite(fm))):
                raise ValidationError("period map returned non-finite values")
            jac[:, k] = (fp - fm) / (2.0 * step)
        return jac

    jac = one(h)
    if richardson:
        jac_half = one(h / 2.0)
        jac = (4.0 * jac_half - jac) / 3.0
    return jac
