"""Fringe fitting, static potentials and the area-law probe."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .engine import DEFAULT_SEED, EvolveParams, ground_state
from .errors import AmbiguousFrequency, FitDiverged, InsufficientPoints
from .gauge import DEFAULT_MAX_DIM, GaugeGroup, LatticeSpec
from .hamiltonian import Couplings, assemble
from .protocol import SECTOR_GROUND, meson_sector, prepare, run_fringe

AREA_LAW = "area-law"
NON_AREA_LAW = "non-area-law"
INSUFFICIENT = "insufficient data"


@dataclass
class FringeSeries:
    times: np.ndarray
    p_r: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.p_r = np.asarray(self.p_r, dtype=float)
        if self.times.shape != self.p_r.shape or self.times.ndim != 1:
            raise ValueError("times and probabilities must be 1D arrays of equal length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        if np.any(self.p_r < -1e-9) or np.any(self.p_r > 1 + 1e-9):
            raise ValueError("probabilities must lie in [0, 1]")

    def __len__(self):
        return len(self.times)

    @classmethod
    def from_results(cls, results, **metadata) -> "FringeSeries":
        leak = np.array([r.leakage for r in results])
        metadata.setdefault("leakage_max", float(np.max(np.abs(leak))) if len(leak) else 0.0)
        metadata.setdefault("leakage_mean", float(np.mean(leak)) if len(leak) else 0.0)
        return cls(np.array([r.T for r in results]), np.array([r.P_R for r in results]),
                   metadata)


@dataclass
class FitResult:
    """Fit of ``P(T) = a sin^2(omega T / 2) + c``."""

    omega: float
    a: float
    c: float
    rms_residual: float
    covariance: np.ndarray
    iterations: int = 0
    converged: bool = True
    degenerate: bool = False
    coarse_omega: float = math.nan

    @property
    def omega_sigma(self) -> float:
        return float(math.sqrt(max(self.covariance[0, 0], 0.0)))

    def model(self, times) -> np.ndarray:
        return fringe_model(np.asarray(times, dtype=float), self.omega, self.a, self.c)

    def to_dict(self) -> dict:
        return {"omega": self.omega, "omega_sigma": self.omega_sigma, "a": self.a, "c": self.c,
                "rms_residual": self.rms_residual, "iterations": self.iterations,
                "converged": self.converged, "degenerate": self.degenerate,
                "coarse_omega": self.coarse_omega}


def fringe_model(t, omega, a, c):
    return a * np.sin(0.5 * omega * t) ** 2 + c


def _jacobian(t, omega, a):
    return np.column_stack([0.5 * a * t * np.sin(omega * t),
                            np.sin(0.5 * omega * t) ** 2,
                            np.ones_like(t)])


def spectrum(times, values, oversample: int = 16):
    """Power of ``values - mean`` on a uniform angular-frequency grid up to Nyquist."""
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    y = y - y.mean()
    span = t[-1] - t[0]
    dt = np.median(np.diff(t))
    nyquist = math.pi / dt
    n_grid = int(math.ceil(nyquist * span * oversample / (2 * math.pi))) + 1
    omegas = np.linspace(0.0, nyquist, n_grid)
    power = np.abs(np.exp(-1j * np.outer(omegas, t)) @ y) ** 2
    return omegas, power


def coarse_frequency(times, values, ambiguity: float = 0.9) -> float:
    """Location of the strongest spectral peak.

    Raises AmbiguousFrequency when another local maximum carries at least
    ``ambiguity`` of the peak power.
    """
    omegas, power = spectrum(times, values)
    padded = np.concatenate([[-np.inf], power, [-np.inf]])
    is_peak = (padded[1:-1] >= padded[:-2]) & (padded[1:-1] > padded[2:])
    peaks = np.flatnonzero(is_peak)
    best = peaks[np.argmax(power[peaks])]
    others = power[peaks[peaks != best]]
    if others.size and others.max() >= ambiguity * power[best]:
        second = peaks[peaks != best][np.argmax(others)]
        raise AmbiguousFrequency(
            f"spectral peaks at omega={omegas[best]:.6g} and {omegas[second]:.6g} "
            f"have comparable power")
    return float(omegas[best])


def _linear_amplitudes(t, y, omega):
    basis = np.column_stack([np.sin(0.5 * omega * t) ** 2, np.ones_like(t)])
    (a, c), *_ = np.linalg.lstsq(basis, y, rcond=None)
    return a, c


def fit_fringe(series: FringeSeries, *, max_iter: int = 100, step_tol: float = 1e-12,
               ambiguity: float = 0.9) -> FitResult:
    """Fit frequency, amplitude and offset of a fringe.

    The spectral peak seeds a damped Gauss-Newton (Levenberg-Marquardt)
    refinement of all three parameters.
    """
    t, y = series.times, series.p_r
    n = len(t)
    if n < 8:
        raise InsufficientPoints(f"fringe fit needs at least 8 samples, got {n}")
    if np.ptp(y) < 1e-12:
        return FitResult(0.0, 0.0, float(y.mean()), float(np.std(y)), np.zeros((3, 3)),
                         degenerate=True, coarse_omega=0.0)

    omega0 = coarse_frequency(t, y, ambiguity)
    theta = np.array([omega0, *_linear_amplitudes(t, y, omega0)])

    def residual(p):
        return fringe_model(t, *p) - y

    r = residual(theta)
    cost0 = cost = float(r @ r)
    mu = 1e-3
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        J = _jacobian(t, theta[0], theta[1])
        JTJ = J.T @ J
        g = J.T @ r
        while True:
            A = JTJ + mu * np.diag(np.diag(JTJ) + 1e-300)
            try:
                step = np.linalg.solve(A, -g)
            except np.linalg.LinAlgError:
                step = np.linalg.lstsq(A, -g, rcond=None)[0]
            trial = theta + step
            r_trial = residual(trial)
            cost_trial = float(r_trial @ r_trial)
            if cost_trial <= cost:
                break
            mu *= 10.0
            if mu > 1e20:
                step = np.zeros(3)
                trial, r_trial, cost_trial = theta, r, cost
                break
        theta, r, cost = trial, r_trial, cost_trial
        mu = max(mu / 10.0, 1e-12)
        if np.linalg.norm(step) < step_tol * (1.0 + np.linalg.norm(theta)) or cost == 0.0:
            converged = True
            break

    if not np.all(np.isfinite(theta)) or cost > cost0:
        raise FitDiverged(f"fringe fit failed to reduce the residual (from {cost0:.3e})")

    J = _jacobian(t, theta[0], theta[1])
    dof = max(n - 3, 1)
    cov = (cost / dof) * np.linalg.pinv(J.T @ J)
    return FitResult(float(abs(theta[0])), float(theta[1]), float(theta[2]),
                     float(math.sqrt(cost / n)), cov, it, converged, coarse_omega=omega0)


class Tension(NamedTuple):
    gamma: float
    sigma: float


def extract_tension(fit: FitResult, L: float) -> Tension:
    if not L > 0:
        raise ValueError("L must be positive")
    return Tension(fit.omega / L, fit.omega_sigma / L)


def strong_coupling_omega(group: GaugeGroup, couplings: Couplings, L: int) -> float:
    """Fringe frequency expected when flux strings are exact eigenstates."""
    return couplings.lambda_e * group.electric_energy(1) * L


def default_times(omega_estimate: float, count: int = 64, periods: float = 4.0) -> np.ndarray:
    """Uniform grid from 0 covering ``periods`` fringe periods."""
    return np.linspace(0.0, periods * 2.0 * math.pi / omega_estimate, count)


def below_nyquist(times, omega: float) -> bool:
    dt = float(np.max(np.diff(times)))
    return omega < math.pi / dt


@dataclass
class LinearFit:
    gamma: float
    intercept: float
    residual: float
    r_used: tuple

    def to_dict(self) -> dict:
        return {"gamma": self.gamma, "intercept": self.intercept, "residual": self.residual,
                "R_used": list(self.r_used)}


@dataclass
class PotentialTable:
    R: np.ndarray
    E0: np.ndarray
    diagnostics: list = field(default_factory=list)

    def __post_init__(self):
        self.R = np.asarray(self.R, dtype=int)
        self.E0 = np.asarray(self.E0, dtype=float)
        if len(set(self.R.tolist())) != len(self.R):
            raise ValueError("R values must be distinct")
        order = np.argsort(self.R, kind="stable")
        self.R, self.E0 = self.R[order], self.E0[order]
        if self.diagnostics:
            self.diagnostics = [self.diagnostics[i] for i in order]

    @property
    def V(self) -> np.ndarray:
        return self.E0 - self.E0[0]

    def fit(self) -> LinearFit:
        """Least-squares line through the largest-R half of the table."""
        n = len(self.R)
        if n < 2:
            raise InsufficientPoints(f"linear potential fit needs >= 2 separations, got {n}")
        k = max(2, math.ceil(n / 2))
        r, v = self.R[-k:].astype(float), self.V[-k:]
        slope, intercept = np.polyfit(r, v, 1)
        res = v - (slope * r + intercept)
        return LinearFit(float(slope), float(intercept), float(math.sqrt(np.mean(res ** 2))),
                         tuple(int(x) for x in self.R[-k:]))


def static_potential(spec: LatticeSpec, group: GaugeGroup, couplings: Couplings,
                     R_list: Sequence[int], *, anchor=None, axis: int = 0,
                     seed: int = DEFAULT_SEED, tol: float = 1e-10, dense_threshold: int = 4096,
                     max_dim: int = DEFAULT_MAX_DIM) -> PotentialTable:
    """Ground-state energy of the meson sector at each separation."""
    energies, diag = [], []
    for R in R_list:
        sector = meson_sector(spec, group, int(R), anchor, axis, max_dim)
        res = ground_state(assemble(sector, couplings), seed, tol=tol,
                           dense_threshold=dense_threshold)
        energies.append(res.energy)
        diag.append({"R": int(R), "dim": sector.dim, **res.diagnostics()})
    return PotentialTable(np.array(list(R_list), dtype=int), np.array(energies), diag)


@dataclass
class ProbeReport:
    R_list: tuple
    L_list: tuple
    omega: np.ndarray  # shape (len(R_list), len(L_list))
    verdict: str
    max_deviation: float
    median_ratio: float
    threshold: float
    profile: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "threshold": self.threshold,
                "max_deviation": self.max_deviation, "median_omega_over_L": self.median_ratio,
                "R": list(self.R_list), "L": list(self.L_list),
                "omega": self.omega.tolist(), "profile": self.profile}


def area_law_verdict(R_list, L_list, omega, threshold: float = 0.02) -> ProbeReport:
    """Area law holds when omega(R, L) / L is the same constant for every pair.

    The spread is measured against the median of omega/L over all pairs.
    """
    R_list, L_list = tuple(int(r) for r in R_list), tuple(int(l) for l in L_list)
    omega = np.asarray(omega, dtype=float).reshape(len(R_list), len(L_list))
    ratio = omega / np.array(L_list, dtype=float)[None, :]
    finite = ratio[np.isfinite(ratio)]
    profile = {str(L): ratio[:, j].tolist() for j, L in enumerate(L_list)}
    if finite.size < 2:
        return ProbeReport(R_list, L_list, omega, INSUFFICIENT, math.nan, math.nan,
                           threshold, profile)
    med = float(np.median(finite))
    if med <= 0:
        dev = math.inf
    else:
        dev = float(np.max(np.abs(finite - med)) / med)
    verdict = AREA_LAW if dev < threshold else NON_AREA_LAW
    return ProbeReport(R_list, L_list, omega, verdict, dev, med, threshold, profile)


def toy_potential_protocol(gamma: float, beta: float, R: float, L: float, times) -> FringeSeries:
    """Two-level interferometer with branch energies gamma * alpha**beta.

    The sequence is carried out on explicit amplitudes (rotate, phase,
    rotate) rather than through the closed-form fringe.
    """
    if not gamma > 0 or not beta > 0:
        raise ValueError("gamma and beta must be positive")
    times = np.asarray(times, dtype=float)
    e_short, e_long = gamma * R ** beta, gamma * (R + L) ** beta
    s = 1.0 / math.sqrt(2.0)
    rot = np.array([[s, -s], [s, s]])  # (down, up) amplitudes
    start = rot @ np.array([1.0, 0.0])
    phases = np.exp(-1j * np.outer(times, [e_short, e_long]))
    final = (phases * start) @ rot.T
    p_r = np.abs(final[:, 0]) ** 2
    return FringeSeries(times, p_r, {"gamma": gamma, "beta": beta, "R": R, "L": L,
                                     "delta_e": e_long - e_short})


def toy_area_law_probe(gamma: float, beta: float, R_list, L_list, *, count: int = 64,
                       periods: float = 4.0, threshold: float = 0.02) -> ProbeReport:
    omega = np.zeros((len(R_list), len(L_list)))
    for i, R in enumerate(R_list):
        for j, L in enumerate(L_list):
            expected = gamma * ((R + L) ** beta - R ** beta)
            series = toy_potential_protocol(gamma, beta, R, L, default_times(expected, count, periods))
            omega[i, j] = fit_fringe(series).omega
    return area_law_verdict(R_list, L_list, omega, threshold)


def interferometric_fit(spec: LatticeSpec, group: GaugeGroup, couplings: Couplings, R: int,
                        L: int, mode: str = SECTOR_GROUND, *, times=None,
                        params: EvolveParams = EvolveParams(), threads: int = 1,
                        **prep) -> tuple:
    """Prepare, run the fringe and fit it.  Returns (register, results, series, fit)."""
    register = prepare(spec, group, couplings, R, L, mode, **prep)
    if times is None:
        times = default_times(strong_coupling_omega(group, couplings, L))
    results = run_fringe(register, times, params, threads)
    series = FringeSeries.from_results(results, R=R, L=L, g2=couplings.g2, mode=mode)
    return register, results, series, fit_fringe(series)


def area_law_probe(spec: LatticeSpec, group: GaugeGroup, couplings: Couplings, R_list, L_list,
                   mode: str = SECTOR_GROUND, *, times=None, threshold: float = 0.02,
                   params: EvolveParams = EvolveParams(), threads: int = 1,
                   **prep) -> ProbeReport:
    omega = np.zeros((len(R_list), len(L_list)))
    for i, R in enumerate(R_list):
        for j, L in enumerate(L_list):
            *_, fit = interferometric_fit(spec, group, couplings, int(R), int(L), mode,
                                          times=times, params=params, threads=threads, **prep)
            omega[i, j] = fit.omega
    return area_law_verdict(R_list, L_list, omega, threshold)
