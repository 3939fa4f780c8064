"""Random molecular ensembles, cavity eigenmodes, and the collective sums.

Hypotheses on the medium:

* H1 (polycrystalline): dipole orientations uniform on the sphere and
  independent of the uniform positions.
* H2 (crystalline): one fixed dipole direction for all molecules.
* Pumping: direction uniform on the sphere per molecule, fixed magnitude.

The two collective statistics driving the multiplier spectrum are the
synchronization sum S = sum_n alpha_n beta_n (nonnegative term by term, since
alpha_n and beta_n share the projection P_n . X(x_n)) and the fourth-moment
sum used by the reduced eigenproblem, Sigma = E (P.X)^2 (P.a_p)^2.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Literal, Optional, Tuple, Union

import numpy as np

from .errors import ValidationError
from .model import DimensionlessParams, Molecule, PhysicalParams

Hypothesis = Literal["H1", "H2"]

#: geometry used when only dimensionless parameters are supplied
DEFAULT_CAVITY = (12.0, 2.0, 2.0)
DEFAULT_ACTIVE_VOLUME = 3.4


def cuboid_mode(x, k: Tuple[int, int, int], dims: Tuple[float, float, float],
                amp) -> np.ndarray:
    """Transverse eigenmode of the rectangular cuboid at points x.

    Component i carries a cosine along axis i and sines along the other two,
    normalized so that the mode has unit L2 norm over the cavity
    (C = sqrt(8/(l1 l2 l3))).  The amplitude vector must be unit length and
    orthogonal to the wave vector (k1 pi/l1, k2 pi/l2, k3 pi/l3).
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    amp = np.asarray(amp, dtype=float)
    dims = tuple(float(d) for d in dims)
    if any(int(kj) != kj or kj < 1 for kj in k):
        raise ValidationError("mode indices must be integers >= 1")
    wave = np.array([k[j] * np.pi / dims[j] for j in range(3)])
    if abs(np.linalg.norm(amp) - 1.0) > 1e-10:
        raise ValidationError("mode amplitude must be a unit vector")
    if abs(float(amp @ wave)) > 1e-10:
        raise ValidationError("mode amplitude must be orthogonal to the wave vector")

    c1 = np.cos(wave[0] * x[:, 0]); s1 = np.sin(wave[0] * x[:, 0])
    c2 = np.cos(wave[1] * x[:, 1]); s2 = np.sin(wave[1] * x[:, 1])
    c3 = np.cos(wave[2] * x[:, 2]); s3 = np.sin(wave[2] * x[:, 2])
    norm = np.sqrt(8.0 / (dims[0] * dims[1] * dims[2]))
    out = norm * np.stack([amp[0] * c1 * s2 * s3,
                           amp[1] * s1 * c2 * s3,
                           amp[2] * s1 * s2 * c3], axis=1)
    return out[0] if single else out


def default_mode_amplitude(k: Tuple[int, int, int],
                           dims: Tuple[float, float, float]) -> np.ndarray:
    """A deterministic unit amplitude orthogonal to the wave vector."""
    wave = np.array([k[j] * np.pi / dims[j] for j in range(3)])
    khat = wave / np.linalg.norm(wave)
    for trial in (np.array([0.0, 1.0, 0.0]), np.array([0.0, 0.0, 1.0]),
                  np.array([1.0, 0.0, 0.0])):
        a = trial - (trial @ khat) * khat
        n = np.linalg.norm(a)
        if n > 1e-6:
            return a / n
    raise ValidationError("could not build a transverse amplitude")  # pragma: no cover


@dataclass(frozen=True)
class Ensemble:
    """Sampled active medium plus everything the dynamics needs.

    Vector data is stored column-wise for the whole ensemble; `molecules()`
    iterates per-molecule views.  alpha*beta >= 0 holds exactly for every
    molecule.
    """

    hypothesis: Hypothesis
    seed: int
    kappa: float
    alpha: np.ndarray          # (N,)
    beta: np.ndarray           # (N,)
    gamma: np.ndarray          # (N,)
    positions: np.ndarray      # (N, 3) cm
    dipoles: np.ndarray        # (N, 3) esu*cm (unit magnitude if dimensionless)
    mode_values: np.ndarray    # (N, 3) cm^{-3/2}
    pump_values: np.ndarray    # (N, 3) esu/cm (unit magnitude if dimensionless)
    mode_amplitude: np.ndarray  # (3,) unit vector
    mode_index: Tuple[int, int, int]
    cavity_dims: Tuple[float, float, float]
    active_volume: float
    dipole_magnitude: float    # |P| (1.0 for dimensionless ensembles)
    pump_amplitude: float      # a_p (1.0 for dimensionless ensembles)
    sum_weight: float          # 2/(Omega_p hbar): S = sum_weight * sum (P.X)^2
    crystal_dipole: Optional[np.ndarray] = None  # unit axis, H2 only
    alpha_rescale: float = 1.0  # applied desk-scale factor on alpha

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "positions", "dipoles",
                     "mode_values", "pump_values", "mode_amplitude"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.alpha.shape[0]

    @property
    def cavity_volume(self) -> float:
        l1, l2, l3 = self.cavity_dims
        return l1 * l2 * l3

    @property
    def sum_alpha_beta(self) -> float:
        """Synchronization sum S (deterministic pairwise reduction)."""
        return float(np.sum(self.alpha * self.beta))

    @property
    def sum_alpha_beta_gamma2(self) -> float:
        """The detuning-weighted sum entering the reduced eigenproblem."""
        return float(np.sum(self.alpha * self.beta * self.gamma ** 2))

    def molecules(self) -> Iterator[Molecule]:
        for i in range(self.n):
            yield Molecule(
                dipole=self.dipoles[i], position=self.positions[i],
                mode_value=self.mode_values[i], pump_value=self.pump_values[i],
                alpha=float(self.alpha[i]), beta=float(self.beta[i]),
                gamma=float(self.gamma[i]),
            )

    def with_pump_amplitude(self, pump_amplitude: float) -> "Ensemble":
        """Same medium, rescaled pumping: gamma_n scales linearly with a_p."""
        if pump_amplitude < 0:
            raise ValidationError("pump amplitude must be >= 0")
        if self.pump_amplitude == 0:
            raise ValidationError("reference ensemble has zero pumping")
        factor = pump_amplitude / self.pump_amplitude
        return Ensemble(
            hypothesis=self.hypothesis, seed=self.seed, kappa=self.kappa,
            alpha=self.alpha, beta=self.beta, gamma=self.gamma * factor,
            positions=self.positions, dipoles=self.dipoles,
            mode_values=self.mode_values, pump_values=self.pump_values * factor,
            mode_amplitude=self.mode_amplitude, mode_index=self.mode_index,
            cavity_dims=self.cavity_dims, active_volume=self.active_volume,
            dipole_magnitude=self.dipole_magnitude, pump_amplitude=pump_amplitude,
            sum_weight=self.sum_weight, crystal_dipole=self.crystal_dipole,
            alpha_rescale=self.alpha_rescale,
        )


def _active_region_radius(active_volume: float,
                          dims: Tuple[float, float, float]) -> float:
    r = np.sqrt(active_volume / (np.pi * dims[0]))
    if 2.0 * r > min(dims[1], dims[2]) + 1e-12:
        raise ValidationError("active region does not fit in the cavity cross-section")
    return r


def _sample_positions(rng, n: int, dims, active_volume: float) -> np.ndarray:
    """Uniform points in the active region.

    The active region is the centered axial cylinder of volume |V_a|; when
    |V_a| equals the full cavity volume the whole box is used (exact mode
    statistics, no ergodic averaging involved).
    """
    vol = dims[0] * dims[1] * dims[2]
    if abs(active_volume - vol) <= 1e-9 * vol:
        return rng.uniform([0.0, 0.0, 0.0], list(dims), size=(n, 3))
    r = _active_region_radius(active_volume, dims)
    x1 = rng.uniform(0.0, dims[0], size=n)
    rho = r * np.sqrt(rng.uniform(0.0, 1.0, size=n))
    phi = rng.uniform(0.0, 2.0 * np.pi, size=n)
    x2 = dims[1] / 2.0 + rho * np.cos(phi)
    x3 = dims[2] / 2.0 + rho * np.sin(phi)
    return np.stack([x1, x2, x3], axis=1)


def _unit_vectors(rng, n: int) -> np.ndarray:
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def sample_ensemble(params: Union[PhysicalParams, DimensionlessParams],
                    hypothesis: Hypothesis = "H1",
                    seed: int = 0,
                    *,
                    n: Optional[int] = None,
                    mode_index: Optional[Tuple[int, int, int]] = None,
                    mode_amplitude: Optional[np.ndarray] = None,
                    crystal_axis: Optional[np.ndarray] = None,
                    rescale_alpha_to_s: Optional[float] = None,
                    active_volume: Optional[float] = None) -> Ensemble:
    """Draw a reproducible molecular ensemble.

    Counter-based Philox stream keyed by ``seed``; for a fixed seed and N the
    result is bit-identical regardless of thread count.  ``rescale_alpha_to_s``
    applies the desk-scale convention: alpha is scaled by a common factor so
    that sum alpha_n beta_n equals the requested value.
    """
    if hypothesis not in ("H1", "H2"):
        raise ValidationError(f"unknown hypothesis {hypothesis!r}")

    if isinstance(params, PhysicalParams):
        dims = params.cavity_dims
        v_active = params.active_volume if active_volume is None else active_volume
        k_idx = params.mode_index if mode_index is None else tuple(mode_index)
        dipole_mag = params.dipole_magnitude
        pump_amp = params.pump_amplitude
        kappa = params.kappa
        alpha_coef = 2.0 * params.light_speed * dipole_mag / params.pump_frequency
        beta_coef = dipole_mag / (params.planck * params.light_speed)
        gamma_coef = dipole_mag * pump_amp / (params.planck * params.light_speed)
        sum_weight = 2.0 / (params.pump_frequency * params.planck)
        n_eff = int(params.molecule_count) if n is None else int(n)
    elif isinstance(params, DimensionlessParams):
        dims = DEFAULT_CAVITY
        v_active = DEFAULT_ACTIVE_VOLUME if active_volume is None else active_volume
        k_idx = (4, 1, 1) if mode_index is None else tuple(mode_index)
        dipole_mag = 1.0
        pump_amp = 1.0
        kappa = params.kappa
        x_rms = 1.0 / np.sqrt(dims[0] * dims[1] * dims[2])
        alpha_coef = params.alpha_scale / x_rms
        beta_coef = params.beta_scale / x_rms
        gamma_coef = params.gamma_scale
        sum_weight = alpha_coef * beta_coef
        n_eff = params.N if n is None else int(n)
    else:
        raise ValidationError("params must be PhysicalParams or DimensionlessParams")

    if n_eff < 1:
        raise ValidationError("ensemble size must be >= 1")

    amp = (default_mode_amplitude(k_idx, dims) if mode_amplitude is None
           else np.asarray(mode_amplitude, dtype=float))

    rng = np.random.Generator(np.random.Philox(key=seed))
    positions = _sample_positions(rng, n_eff, dims, v_active)
    if hypothesis == "H1":
        dip_dirs = _unit_vectors(rng, n_eff)
    else:
        if crystal_axis is None:
            raise ValidationError("H2 requires a crystal axis")
        axis = np.asarray(crystal_axis, dtype=float)
        nrm = np.linalg.norm(axis)
        if nrm == 0:
            raise ValidationError("crystal axis must be nonzero")
        dip_dirs = np.tile(axis / nrm, (n_eff, 1))
        rng.normal(size=(n_eff, 3))  # keep the draw layout fixed across hypotheses
    pump_dirs = _unit_vectors(rng, n_eff)

    mode_vals = cuboid_mode(positions, k_idx, dims, amp)
    proj_mode = np.einsum("ij,ij->i", dip_dirs, mode_vals)
    proj_pump = np.einsum("ij,ij->i", dip_dirs, pump_dirs)

    alpha = alpha_coef * proj_mode
    beta = beta_coef * proj_mode
    gamma = gamma_coef * proj_pump

    rescale = 1.0
    if rescale_alpha_to_s is not None:
        s_now = float(np.sum(alpha * beta))
        if s_now <= 0:
            raise ValidationError("cannot rescale a degenerate ensemble (S = 0)")
        rescale = rescale_alpha_to_s / s_now
        alpha = alpha * rescale

    return Ensemble(
        hypothesis=hypothesis, seed=seed, kappa=kappa,
        alpha=alpha, beta=beta, gamma=gamma,
        positions=positions, dipoles=dipole_mag * dip_dirs,
        mode_values=mode_vals, pump_values=pump_amp * pump_dirs,
        mode_amplitude=amp, mode_index=tuple(k_idx), cavity_dims=tuple(dims),
        active_volume=v_active, dipole_magnitude=dipole_mag,
        pump_amplitude=pump_amp, sum_weight=sum_weight * rescale,
        crystal_dipole=None if hypothesis == "H1" else dip_dirs[0].copy(),
        alpha_rescale=rescale,
    )


@dataclass(frozen=True)
class SumReport:
    """Empirical vs law-of-large-numbers values of one collective sum."""

    name: str
    empirical: float
    analytic: float
    std_error: float
    n: int

    @property
    def ratio(self) -> float:
        return self.empirical / self.analytic if self.analytic != 0 else np.nan

    @property
    def deviation_in_se(self) -> float:
        if self.std_error == 0:
            return 0.0 if self.empirical == self.analytic else np.inf
        return abs(self.empirical - self.analytic) / self.std_error


def sum_S(e: Ensemble) -> SumReport:
    """Synchronization sum S = sum_n alpha_n beta_n vs its LLN prediction.

    H1: S ~ N * sum_weight * |P|^2/3 * E X^2, with E X^2 -> 1/|V| in the
    ergodic (large mode index) regime.  H2 replaces the 1/3 sphere average by
    the component projection sum_i (Phat_i a_i)^2.
    """
    if e.n < 1:
        raise ValidationError("empty ensemble")
    terms = e.alpha * e.beta
    emp = float(np.sum(terms))
    se = float(np.std(terms, ddof=1) * np.sqrt(e.n)) if e.n > 1 else 0.0

    p2 = e.dipole_magnitude ** 2
    if e.hypothesis == "H1":
        mode_ms = 1.0 / e.cavity_volume
        analytic = e.sum_weight * e.n * (p2 / 3.0) * mode_ms
    else:
        phat = e.crystal_dipole
        comp = float(np.sum((phat * e.mode_amplitude) ** 2))
        analytic = e.sum_weight * e.n * p2 * comp / e.cavity_volume
    return SumReport(name="S", empirical=emp, analytic=float(analytic),
                     std_error=se, n=e.n)


def sum_Sigma(e: Ensemble) -> SumReport:
    """Fourth-moment sum Sigma = E (P.X)^2 (P.a_p)^2 vs its prediction.

    H1: Sigma = a_p^2 |P|^4 / (9 |V|); H2: a_p^2 |P|^2 sum_i (P_i a_i)^2/(3|V|)
    (independent position / dipole / pumping draws, E[X_i X_j] = d_ij a_i^2/|V|).
    """
    if e.n < 1:
        raise ValidationError("empty ensemble")
    px = np.einsum("ij,ij->i", e.dipoles, e.mode_values)
    pa = np.einsum("ij,ij->i", e.dipoles, e.pump_values)
    terms = px ** 2 * pa ** 2
    emp = float(np.mean(terms))
    se = float(np.std(terms, ddof=1) / np.sqrt(e.n)) if e.n > 1 else 0.0

    ap2 = e.pump_amplitude ** 2
    p2 = e.dipole_magnitude ** 2
    vol = e.cavity_volume
    if e.hypothesis == "H1":
        analytic = ap2 * p2 * p2 / (9.0 * vol)
    else:
        comp = float(np.sum((e.crystal_dipole * e.mode_amplitude) ** 2)) * p2
        analytic = ap2 * p2 * comp / (3.0 * vol)
    return SumReport(name="Sigma", empirical=emp, analytic=float(analytic),
                     std_error=se, n=e.n)


def analytic_s_for_count(p: PhysicalParams) -> float:
    """LLN prediction of S at full molecule count (no sampling)."""
    return (2.0 * p.dipole_magnitude ** 2 * p.molecule_count
            / (3.0 * p.pump_frequency * p.planck * p.cavity_volume))
