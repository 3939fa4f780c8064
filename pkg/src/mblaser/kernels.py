"""Damped-oscillator kernel: fundamental solution and the period integrals.

The scaled field equation  a'' + 2*kappa*a' + a = j  has the retarded
fundamental solution

    E(tau) = theta(tau) * (exp(lam_p tau) - exp(lam_m tau)) / (lam_p - lam_m),
    lam_pm = -kappa +- i*sqrt(1 - kappa^2),

equal to theta(tau) e^{-kappa tau} sin(tau) up to O(kappa^2).  Every period-map
formula reduces to convolutions of E (and E') against e^{-i tau} and
tau-weighted harmonics; this module evaluates those integrals two independent
ways:

* exact closed forms -- antiderivatives of exponential polynomials, stable for
  kappa down to 0;
* an adaptive-quadrature oracle (`quadrature`, Gauss-Kronrod) that arbitrates
  every closed form in the test suite and in `verify-integrals`.

The classic leading-order expressions (I1/I2 and the A/B component tables) are
kept alongside as the ``leading`` variants; their truncation residual is
O(20-50 kappa^2), measured, so the exact forms are the default everywhere.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal, Tuple

import numpy as np
from scipy.integrate import quad

from .errors import NumericsError, ValidationError

PI = np.pi
KAPPA_MAX = 0.1  # oscillatory-regime guard for the closed forms

FormName = Literal["exact", "leading"]


def _check_kappa(kappa: float) -> None:
    if not 0.0 <= kappa < KAPPA_MAX:
        raise ValidationError(f"kappa must lie in [0, {KAPPA_MAX}), got {kappa}")


def lam_roots(kappa: float) -> Tuple[complex, complex]:
    """Characteristic roots lam^2 + 2 kappa lam + 1 = 0 in the oscillatory regime."""
    w = np.sqrt(1.0 - kappa * kappa)
    return complex(-kappa, w), complex(-kappa, -w)


# ---------------------------------------------------------------------------
# fundamental solution and its analytic derivatives
# ---------------------------------------------------------------------------

def fundamental_solution(tau, kappa: float, form: FormName = "exact"):
    """Retarded fundamental solution E(tau); zero for tau < 0.

    ``exact``  : e^{-k tau} sin(w tau)/w with w = sqrt(1-k^2)
    ``leading``: e^{-k tau} sin(tau)     (error <= ~4 kappa^2 on [0, 2 pi])
    """
    _check_kappa(kappa)
    tau = np.asarray(tau, dtype=float)
    if form == "exact":
        w = np.sqrt(1.0 - kappa * kappa)
        val = np.exp(-kappa * tau) * np.sin(w * tau) / w
    elif form == "leading":
        val = np.exp(-kappa * tau) * np.sin(tau)
    else:
        raise ValidationError(f"unknown form {form!r}")
    return np.where(tau > 0.0, val, 0.0)


def fundamental_solution_deriv(tau, kappa: float, order: int = 1):
    """Analytic E'(tau) or E''(tau) of the exact form, for tau > 0."""
    _check_kappa(kappa)
    tau = np.asarray(tau, dtype=float)
    w = np.sqrt(1.0 - kappa * kappa)
    damp = np.exp(-kappa * tau)
    if order == 1:
        val = damp * (np.cos(w * tau) - kappa * np.sin(w * tau) / w)
    elif order == 2:
        val = damp * ((kappa * kappa / w - w) * np.sin(w * tau) - 2.0 * kappa * np.cos(w * tau))
    else:
        raise ValidationError("order must be 1 or 2")
    return np.where(tau > 0.0, val, 0.0)


def residual_of_ode(tau: float, kappa: float) -> float:
    """E'' + 2 kappa E' + E at tau > 0, from the analytic derivatives.

    Vanishes identically for the exact form; the returned value is pure
    floating-point noise and is pinned to <= 1e-12 in the tests.
    """
    if tau <= 0:
        raise ValidationError("residual_of_ode requires tau > 0")
    return float(
        fundamental_solution_deriv(tau, kappa, order=2)
        + 2.0 * kappa * fundamental_solution_deriv(tau, kappa, order=1)
        + fundamental_solution(tau, kappa, form="exact")
    )


# ---------------------------------------------------------------------------
# adaptive quadrature oracle
# ---------------------------------------------------------------------------

def quadrature(f: Callable[[float], complex], a: float, b: float,
               tol: float = 1e-12) -> complex:
    """Adaptive Gauss-Kronrod integral of a complex-valued integrand.

    Absolute-error target ``tol``; raises NumericsError if the reported error
    estimate exceeds 100x the target (non-convergence).
    """
    if tol <= 0:
        raise ValidationError("tol must be positive")

    def run(part):
        val, err = quad(part, a, b, epsabs=tol, epsrel=max(tol, 1e-13),
                        limit=500)
        if err > 100.0 * max(tol, 1e-14 * (1.0 + abs(val))):
            raise NumericsError(
                f"quadrature did not converge: error estimate {err:.2e}")
        return val

    re = run(lambda t: np.real(f(t)))
    im = run(lambda t: np.imag(f(t)))
    return complex(re, im)


# ---------------------------------------------------------------------------
# exponential moments: the closed-form engine
# ---------------------------------------------------------------------------

def _exp_moment(c: complex, n: int, upper: float) -> complex:
    """int_0^upper tau^n e^{c tau} d tau, stable for |c|*upper -> 0."""
    x = c * upper
    if abs(x) < 0.5:
        # series sum_k c^k upper^{n+k+1} / (k! (n+k+1)); ~20 terms suffice
        total = 0.0 + 0.0j
        term = upper ** (n + 1)
        k = 0
        while True:
            contrib = term / (n + k + 1)
            total += contrib
            if abs(contrib) < 1e-18 * (1.0 + abs(total)) and k > 3:
                return total
            k += 1
            term *= c * upper / k
            if k > 60:  # |x| < 0.5 converges long before this
                return total
    if n == 0:
        return (np.exp(x) - 1.0) / c
    return (upper ** n) * np.exp(x) / c - (n / c) * _exp_moment(c, n - 1, upper)


def _kernel_sum(tau: float, kappa: float, weights, moment_args) -> complex:
    """sum over the two characteristic roots of w_pm * M_n(c_pm, tau)."""
    lam_p, lam_m = lam_roots(kappa)
    dl = lam_p - lam_m
    total = 0.0 + 0.0j
    for sign, lam in ((1.0, lam_p), (-1.0, lam_m)):
        w = weights(lam) * sign / dl
        total += w * moment_args(lam)
    return total


# ---------------------------------------------------------------------------
# running integrals I1, I2
# ---------------------------------------------------------------------------

def integral_I(tau: float, kappa: float, which: int,
               form: FormName = "exact") -> complex:
    """I1(tau) = int_0^tau e^{-i s} E(tau-s) ds  and
    I2(tau) = int_0^tau (s/2) cos(s) E(tau-s) ds.

    ``exact`` evaluates the antiderivatives with the exact characteristic
    roots; ``leading`` returns the leading-order expansions.  The leading
    I1 is O(25 kappa^2) accurate; the leading I2 carries an O(kappa) residual
    (max coefficient ~5.2 mid-period) that vanishes at tau = 2 pi.
    """
    _check_kappa(kappa)
    if not 0.0 <= tau <= 2.0 * PI + 1e-12:
        raise ValidationError("tau must lie in [0, 2 pi]")
    if which not in (1, 2):
        raise ValidationError("which must be 1 or 2")
    if tau == 0.0:
        return 0.0 + 0.0j

    if form == "leading":
        if which == 1:
            return (
                -0.5j * np.sin(tau)
                + 0.5j * tau * np.exp(-1j * tau)
                + kappa * ((-np.sin(tau) + tau * np.exp(1j * tau)) / 4.0
                           - 0.25j * tau * tau * np.exp(-1j * tau))
            )
        return complex((tau * tau * np.sin(tau) + tau * np.cos(tau) - np.sin(tau)) / 8.0)
    if form != "exact":
        raise ValidationError(f"unknown form {form!r}")

    if which == 1:
        return _kernel_sum(
            tau, kappa,
            weights=lambda lam: np.exp(lam * tau),
            moment_args=lambda lam: _exp_moment(-(1j + lam), 0, tau),
        )
    return _kernel_sum(
        tau, kappa,
        weights=lambda lam: np.exp(lam * tau),
        moment_args=lambda lam: 0.25 * (_exp_moment(1j - lam, 1, tau)
                                        + _exp_moment(-1j - lam, 1, tau)),
    )


def integral_I_oracle(tau: float, kappa: float, which: int,
                      tol: float = 1e-12) -> complex:
    """Quadrature evaluation of the defining integral (exact E)."""
    if tau == 0.0:
        return 0.0 + 0.0j
    if which == 1:
        f = lambda s: np.exp(-1j * s) * fundamental_solution(tau - s, kappa)
    else:
        f = lambda s: 0.5 * s * np.cos(s) * fundamental_solution(tau - s, kappa)
    return quadrature(f, 0.0, tau, tol=tol)


# ---------------------------------------------------------------------------
# period constants J1, J2 and A/B
# ---------------------------------------------------------------------------

def constants_J(kappa: float) -> Tuple[complex, complex]:
    """J1 = (1/2pi) int_0^2pi I1'(t) e^{-it} dt and the same with I2'.

    Closed forms to O(kappa^2):
        J1 = kappa/4
        J2 = pi^2/12 + kappa*[(pi/32 - pi^3/24) + i (pi^2/24 - 1/64)]
    (both verified against the nested-quadrature oracle at ~1.6 kappa^2).
    """
    _check_kappa(kappa)
    j1 = complex(kappa / 4.0)
    j2 = PI ** 2 / 12.0 + kappa * complex(PI / 32.0 - PI ** 3 / 24.0,
                                          PI ** 2 / 24.0 - 1.0 / 64.0)
    return j1, j2


def constants_J_oracle(kappa: float, tol: float = 1e-11) -> Tuple[complex, complex]:
    """Nested-quadrature oracle for J1, J2 with the exact kernel.

    I_k'(tau) = int_0^tau (weight)(s) E'(tau-s) ds since E(0) = 0.
    """
    def i1p(t):
        if t <= 0:
            return 0.0 + 0.0j
        return quadrature(lambda s: np.exp(-1j * s)
                          * fundamental_solution_deriv(t - s, kappa), 0.0, t, tol=3e-13)

    def i2p(t):
        if t <= 0:
            return 0.0
        return quadrature(lambda s: 0.5 * s * np.cos(s)
                          * fundamental_solution_deriv(t - s, kappa), 0.0, t, tol=3e-13).real

    j1 = quadrature(lambda t: i1p(t) * np.exp(-1j * t), 0.0, 2 * PI, tol=tol) / (2 * PI)
    j2 = quadrature(lambda t: i2p(t) * np.exp(-1j * t), 0.0, 2 * PI, tol=tol) / (2 * PI)
    return j1, j2


@dataclass(frozen=True)
class KernelConstants:
    """Exact period constants plus their leading component decompositions.

    A1..B3 are exact (quadrature-grade); the real pairs A11..B22 are the
    classical O(kappa) components (A1 ~ A11 + i A12 etc., truncation residual
    O(20-50 kappa^2)) that the block formulas are usually quoted with.
    """

    kappa: float
    J1: complex
    J2: complex
    A1: complex
    A2: complex
    A3: float
    B1: complex
    B2: complex
    B3: float
    A11: float
    A12: float
    A21: float
    A22: float
    B11: float
    B12: float
    B21: float
    B22: float


def constants_AB(kappa: float) -> KernelConstants:
    """Exact closed forms of the six period constants.

        A_m = int_0^2pi tau^{m-1} e^{-i tau} E(2pi - tau) d tau,   m = 1, 2
        B_m = same with E' in place of E
        A3  = Re A2,  B3 = Re B2  (real integrands tau cos(tau) * kernel)

    Exact identities: B2 = A1 - i A2;  B1 = -i A1 + E(2pi) with
    E(2pi) = O(kappa^2) (identically zero for the leading-form kernel).
    """
    _check_kappa(kappa)
    two_pi = 2.0 * PI

    def a_like(n):
        return _kernel_sum(
            two_pi, kappa,
            weights=lambda lam: np.exp(lam * two_pi),
            moment_args=lambda lam: _exp_moment(-(1j + lam), n, two_pi),
        )

    def b_like(n):
        return _kernel_sum(
            two_pi, kappa,
            weights=lambda lam: lam * np.exp(lam * two_pi),
            moment_args=lambda lam: _exp_moment(-(1j + lam), n, two_pi),
        )

    a1 = a_like(0)
    a2 = a_like(1)
    b1 = b_like(0)
    b2 = b_like(1)
    j1, j2 = constants_J(kappa)

    sigma1 = 2.0 * kappa
    a11 = kappa * PI / 2.0
    a12 = PI - kappa * PI ** 2
    a21 = PI / 2.0
    a22 = PI ** 2 - sigma1 * (PI ** 3 / 3.0 + PI / 4.0)
    return KernelConstants(
        kappa=kappa, J1=j1, J2=j2,
        A1=a1, A2=a2, A3=float(a2.real),
        B1=b1, B2=b2, B3=float(b2.real),
        A11=a11, A12=a12, A21=a21, A22=a22,
        B11=a12, B12=-a11, B21=a11 + a22, B22=a12 - a21,
    )


def constants_AB_oracle(kappa: float, tol: float = 1e-12) -> dict:
    """Quadrature oracle for the six defining integrals (exact E)."""
    two_pi = 2.0 * PI
    E = lambda s: fundamental_solution(s, kappa)
    Ed = lambda s: fundamental_solution_deriv(s, kappa)
    out = {
        "A1": quadrature(lambda t: np.exp(-1j * t) * E(two_pi - t), 0, two_pi, tol),
        "A2": quadrature(lambda t: t * np.exp(-1j * t) * E(two_pi - t), 0, two_pi, tol),
        "B1": quadrature(lambda t: np.exp(-1j * t) * Ed(two_pi - t), 0, two_pi, tol),
        "B2": quadrature(lambda t: t * np.exp(-1j * t) * Ed(two_pi - t), 0, two_pi, tol),
    }
    out["A3"] = quadrature(lambda t: t * np.cos(t) * E(two_pi - t), 0, two_pi, tol).real
    out["B3"] = quadrature(lambda t: t * np.cos(t) * Ed(two_pi - t), 0, two_pi, tol).real
    return out


# ---------------------------------------------------------------------------
# collective one-period response kernel
# ---------------------------------------------------------------------------

#: Complex coefficient of the second-order collective feedback over one period:
#: a molecular coordinate z drives the field, whose response drives z (and the
#: field itself) back.  xi = -(1/2) * int_0^2pi e^{it} int_0^t e^{-is} E'(t-s) ds dt
#: evaluated at kappa = 0; kappa-corrections enter only at the dropped
#: O(kappa * S) order.
RESPONSE_XI: complex = complex(-PI ** 2 / 2.0, -PI / 4.0)


def response_kernel() -> np.ndarray:
    """Real 2x2 representation of RESPONSE_XI acting on (Re, Im) pairs."""
    return np.array([[RESPONSE_XI.real, -RESPONSE_XI.imag],
                     [RESPONSE_XI.imag, RESPONSE_XI.real]])


def response_kernel_oracle(tol: float = 1e-10) -> complex:
    """Double-quadrature oracle for RESPONSE_XI (kappa = 0)."""
    def inner(t):
        if t <= 0:
            return 0.0 + 0.0j
        return quadrature(lambda s: np.exp(-1j * s)
                          * fundamental_solution_deriv(t - s, 0.0), 0.0, t, tol=1e-12)

    g = quadrature(lambda t: np.exp(1j * t) * inner(t), 0.0, 2 * PI, tol=tol)
    return -0.5 * g


#: One-period dressing of the molecular response to the field by the
#: collective current it excites on the way (per unit synchronization sum S).
#: For a unit perturbation along a0 (free field mode -E) or b0 (mode E'),
#: the chain  field -> molecules -> current -> field  adds
#:     delta(dz_n/d a0) = beta_n S * W_DRESS_A,   same with B for b0,
#: where (at kappa = 0, exactly)
#:     W_DRESS_A = pi^3/6 + pi/8 + i pi^2/4
#:     W_DRESS_B = -pi^2/4 + i (pi^3/6 - pi/8).
W_DRESS_A: complex = complex(PI ** 3 / 6.0 + PI / 8.0, PI ** 2 / 4.0)
W_DRESS_B: complex = complex(-PI ** 2 / 4.0, PI ** 3 / 6.0 - PI / 8.0)


def border_dressing() -> np.ndarray:
    """Real 2x2 kernel [[Re wa, Re wb], [Im wa, Im wb]] of the W dressing."""
    return np.array([[W_DRESS_A.real, W_DRESS_B.real],
                     [W_DRESS_A.imag, W_DRESS_B.imag]])


def border_dressing_oracle(column: str = "a", n_grid: int = 8192) -> complex:
    """Grid-quadrature oracle for the W dressing constants (kappa = 0).

    Chains the three response integrals on a uniform grid with trapezoid
    cumulative sums; accuracy ~ (2 pi / n_grid)^2.
    """
    from scipy.integrate import cumulative_trapezoid

    tau = np.linspace(0.0, 2.0 * PI, n_grid + 1)
    if column == "a":
        b0 = -np.sin(tau)          # free response mode for a0 at kappa = 0
    elif column == "b":
        b0 = np.cos(tau)           # mode for b0
    else:
        raise ValidationError("column must be 'a' or 'b'")
    F = cumulative_trapezoid(b0 * np.exp(1j * tau), tau, initial=0.0)
    j = -np.real(np.exp(-1j * tau) * F)
    # db1(t) = int_0^t j(s) E'(t-s) ds via one cumulative pass per output point
    db1 = np.empty_like(tau)
    ed = np.cos(tau)               # E'(s) at kappa = 0
    h = tau[1] - tau[0]
    for i, t in enumerate(tau):
        if i == 0:
            db1[0] = 0.0
            continue
        integrand = j[:i + 1] * ed[i::-1]
        db1[i] = np.trapezoid(integrand, dx=h)
    w = -1j * np.trapezoid(db1 * np.exp(1j * tau), tau)
    return complex(w)
