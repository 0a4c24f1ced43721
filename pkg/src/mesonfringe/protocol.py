"""Two-branch meson interferometer.

A static quark sits at ``anchor``; its antiquark sits either ``R`` or ``R + L``
links away along ``axis``.  The two charge placements are separate Gauss-law
sectors, so the full state is a pair of vectors, one per sector.  The
reference states ``chi_down`` (separation R) and ``chi_up`` (separation R+L)
span the effective two-level system the rotation acts on.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import DimensionExceeded, InfeasibleCharges
from .engine import DEFAULT_SEED, EvolveParams, evolve, expectation, ground_state
from .gauge import (DEFAULT_MAX_DIM, ChargeConfig, GaugeGroup, GaugeSector, LatticeSpec,
                    enumerate_sector, straight_path, string_state)
from .hamiltonian import Couplings, SparseHamiltonian, assemble

BARE_STRING = "bare-string"
SECTOR_GROUND = "sector-ground"
MODES = (BARE_STRING, SECTOR_GROUND)

SQRT_HALF = 1.0 / math.sqrt(2.0)


def fix_phase(v: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the largest-magnitude amplitude is real positive."""
    v = np.asarray(v, dtype=complex)
    k = int(np.argmax(np.abs(v)))
    if v[k] == 0:
        return v.copy()
    return v * (abs(v[k]) / v[k])


@dataclass(frozen=True)
class BranchRegister:
    R: int
    L: int
    mode: str
    sectors: tuple
    hamiltonians: tuple
    chi_down: np.ndarray
    chi_up: np.ndarray
    psi_down: np.ndarray
    psi_up: np.ndarray
    energies: tuple  # <chi|H|chi> per branch
    diagnostics: dict

    @property
    def delta_e(self) -> float:
        return self.energies[1] - self.energies[0]

    def coefficients(self) -> tuple:
        return np.vdot(self.chi_down, self.psi_down), np.vdot(self.chi_up, self.psi_up)

    def norms(self) -> tuple:
        return float(np.linalg.norm(self.psi_down)), float(np.linalg.norm(self.psi_up))

    def norm(self) -> float:
        return math.hypot(*self.norms())

    def with_state(self, psi_down, psi_up) -> "BranchRegister":
        return replace(self, psi_down=psi_down, psi_up=psi_up)

    def branch(self, alpha):
        """0 for the short branch (alpha == R), 1 for the long one (R + L)."""
        if alpha in ("R", self.R):
            return 0
        if alpha in ("R+L", self.R + self.L):
            return 1
        raise ValueError(f"alpha must be R={self.R} or R+L={self.R + self.L}, got {alpha!r}")


@dataclass(frozen=True)
class ProtocolResult:
    T: float
    P_R: float
    P_RL: float
    leakage: float
    amp_R: complex
    amp_RL: complex
    norm_down: float
    norm_up: float

    def as_record(self) -> dict:
        return {"T": self.T, "P_R": self.P_R, "P_RL": self.P_RL, "leakage": self.leakage,
                "amp_R_re": self.amp_R.real, "amp_R_im": self.amp_R.imag,
                "amp_RL_re": self.amp_RL.real, "amp_RL_im": self.amp_RL.imag}


@dataclass(frozen=True)
class MeasuredAmplitude:
    """``pre``: sqrt(2) <chi_alpha|psi(T)> before the second rotation.
    ``post``: <chi_alpha|U psi(T)> after it."""

    pre: complex
    post: complex


def meson_sites(spec: LatticeSpec, separation: int, anchor=None, axis: int = 0):
    anchor = spec.normalize_site(anchor if anchor is not None else (0,) * spec.ndim)
    if not 0 <= axis < spec.ndim:
        raise ValueError(f"axis {axis} out of range")
    other = list(anchor)
    other[axis] += separation
    if separation < 1 or other[axis] >= spec.dims[axis]:
        raise ValueError(
            f"separation {separation} from {anchor} does not fit on axis {axis} "
            f"of extent {spec.dims[axis]}")
    return anchor, tuple(other)


def meson_sector(spec, group, separation, anchor=None, axis=0,
                 max_dim=DEFAULT_MAX_DIM) -> GaugeSector:
    plus, minus = meson_sites(spec, separation, anchor, axis)
    try:
        return enumerate_sector(spec, group, ChargeConfig.meson(spec, plus, minus),
                                max_dim=max_dim, require_nonempty=True)
    except InfeasibleCharges as exc:
        raise InfeasibleCharges(f"sector R={separation}: {exc}") from None
    except DimensionExceeded as exc:
        raise DimensionExceeded(exc.count, exc.max_dim, f"sector R={separation}") from None


def reference_state(sector: GaugeSector, H: SparseHamiltonian, mode: str, *,
                    seed=DEFAULT_SEED, tol=1e-10, dense_threshold=4096):
    """Return (unit vector, diagnostics) for one branch."""
    if mode == BARE_STRING:
        plus = next(s for s, q in sector.charges.charges if q == 1)
        minus = next(s for s, q in sector.charges.charges if q == -1)
        return string_state(sector, straight_path(sector.spec, plus, minus)), {}
    if mode == SECTOR_GROUND:
        res = ground_state(H, seed, tol=tol, dense_threshold=dense_threshold)
        return fix_phase(res.vector), res.diagnostics()
    raise ValueError(f"unknown preparation mode {mode!r}")


def prepare(spec: LatticeSpec, group: GaugeGroup, couplings: Couplings, R: int, L: int,
            mode: str = SECTOR_GROUND, *, anchor=None, axis: int = 0, seed: int = DEFAULT_SEED,
            tol: float = 1e-10, dense_threshold: int = 4096,
            max_dim: int = DEFAULT_MAX_DIM) -> BranchRegister:
    """Build both branch sectors and start the register in the short-string state."""
    if L < 1:
        raise ValueError("L must be >= 1")
    sectors, hams, chis, energies, diag = [], [], [], [], {}
    for name, sep in (("R", R), ("R+L", R + L)):
        sector = meson_sector(spec, group, sep, anchor, axis, max_dim)
        H = assemble(sector, couplings)
        chi, info = reference_state(sector, H, mode, seed=seed, tol=tol,
                                    dense_threshold=dense_threshold)
        sectors.append(sector)
        hams.append(H)
        chis.append(chi)
        energies.append(expectation(H, chi))
        diag[name] = {"separation": sep, "dim": sector.dim, "nnz": H.nnz, **info}
    return BranchRegister(
        R=R, L=L, mode=mode, sectors=tuple(sectors), hamiltonians=tuple(hams),
        chi_down=chis[0], chi_up=chis[1],
        psi_down=chis[0].copy(), psi_up=np.zeros(sectors[1].dim, dtype=complex),
        energies=tuple(energies), diagnostics=diag)


def rotate(register: BranchRegister) -> BranchRegister:
    """Apply exp(i pi/4 sigma_y) inside span{chi_down, chi_up}; identity elsewhere."""
    c_down, c_up = register.coefficients()
    new_down = (c_down - c_up) * SQRT_HALF
    new_up = (c_down + c_up) * SQRT_HALF
    psi_down = register.psi_down + (new_down - c_down) * register.chi_down
    psi_up = register.psi_up + (new_up - c_up) * register.chi_up
    return register.with_state(psi_down, psi_up)


def _evolve_branch(H, psi, T, params):
    nrm = np.linalg.norm(psi)
    if nrm == 0:
        return psi.copy()
    return nrm * evolve(H, psi / nrm, T, params)


def evolve_register(register: BranchRegister, T: float,
                    params: EvolveParams = EvolveParams()) -> BranchRegister:
    """Free evolution of each sector component; sectors never exchange norm."""
    H_down, H_up = register.hamiltonians
    return register.with_state(_evolve_branch(H_down, register.psi_down, T, params),
                               _evolve_branch(H_up, register.psi_up, T, params))


def _check_fresh(register: BranchRegister):
    c_down, _ = register.coefficients()
    if abs(c_down - 1) > 1e-10 or np.linalg.norm(register.psi_up) > 1e-10:
        raise ValueError("the sequence starts from a register in the short-string state")


def run_sequence(register: BranchRegister, T: float,
                 params: EvolveParams = EvolveParams()) -> ProtocolResult:
    """rotate -> evolve(T) -> rotate -> project on the reference states."""
    _check_fresh(register)
    final = rotate(evolve_register(rotate(register), T, params))
    amp_R, amp_RL = final.coefficients()
    P_R, P_RL = abs(amp_R) ** 2, abs(amp_RL) ** 2
    n_down, n_up = final.norms()
    return ProtocolResult(float(T), float(P_R), float(P_RL), float(1.0 - P_R - P_RL),
                          complex(amp_R), complex(amp_RL), n_down, n_up)


def run_fringe(register: BranchRegister, times, params: EvolveParams = EvolveParams(),
               threads: int = 1) -> list:
    """Run the sequence at every T; results keep the input order."""
    times = [float(t) for t in times]
    if threads <= 1:
        return [run_sequence(register, t, params) for t in times]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda t: run_sequence(register, t, params), times))


def return_amplitude(chi, H, T: float, params: EvolveParams = EvolveParams()) -> complex:
    """<chi| exp(-iHT) |chi>."""
    chi = np.asarray(chi, dtype=complex)
    return complex(np.vdot(chi, evolve(H, chi, T, params)))


def measured_amplitude(register: BranchRegister, alpha, T: float,
                       params: EvolveParams = EvolveParams()) -> MeasuredAmplitude:
    _check_fresh(register)
    k = register.branch(alpha)
    evolved = evolve_register(rotate(register), T, params)
    final = rotate(evolved)
    pre = evolved.coefficients()[k]
    post = final.coefficients()[k]
    return MeasuredAmplitude(complex(math.sqrt(2.0) * pre), complex(post))
