"""Ground states and real-time evolution for sector Hamiltonians.

Both solvers accept a :class:`~mesonfringe.hamiltonian.SparseHamiltonian`, a
scipy sparse matrix or a dense Hermitian array.  Small problems go through a
full eigendecomposition; larger ones through Lanczos with full
reorthogonalization.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh_tridiagonal

from .errors import NoConvergence
from .hamiltonian import SparseHamiltonian

DEFAULT_SEED = 0xC0FFEE


@dataclass
class EigResult:
    energy: float
    vector: np.ndarray
    residual: float
    iterations: int
    gap: float = math.nan  # distance to the next Ritz value / eigenvalue
    method: str = "dense"

    def diagnostics(self) -> dict:
        return {"energy": self.energy, "residual": self.residual,
                "iterations": self.iterations, "gap": self.gap, "method": self.method}


@dataclass(frozen=True)
class EvolveParams:
    method: str = "auto"  # auto | exact | krylov
    dt_max: float = 1.0
    krylov_dim: int = 30
    tol: float = 1e-10
    dense_threshold: int = 4096
    max_substeps: int = 100_000

    def __post_init__(self):
        if self.method not in ("auto", "exact", "krylov"):
            raise ValueError(f"unknown evolution method {self.method!r}")
        if self.krylov_dim < 2:
            raise ValueError("krylov_dim must be >= 2")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not self.dt_max > 0:
            raise ValueError("dt_max must be positive")


class _Operator:
    """Uniform view over the accepted Hamiltonian representations."""

    def __init__(self, H):
        self.source = H
        if isinstance(H, SparseHamiltonian):
            self.dim = H.dim
            self._matvec = H.matrix.__matmul__
            self.real = True
        elif sp.issparse(H):
            H = sp.csr_array(H)
            self.dim = H.shape[0]
            self._matvec = H.__matmul__
            self.real = not np.iscomplexobj(H.data)
        else:
            H = np.asarray(H)
            if H.ndim != 2 or H.shape[0] != H.shape[1]:
                raise ValueError("Hamiltonian must be square")
            self.dim = H.shape[0]
            self._matvec = H.__matmul__
            self.real = not np.iscomplexobj(H)
        self._H = H

    def matvec(self, x):
        return self._matvec(x)

    def eigh(self):
        if isinstance(self.source, SparseHamiltonian):
            return self.source.eigh
        dense = self._H.toarray() if sp.issparse(self._H) else self._H
        return np.linalg.eigh(dense)


def _residual(op, v, e):
    return float(np.linalg.norm(op.matvec(v) - e * v))


def ground_state(H, seed: int = DEFAULT_SEED, *, tol: float = 1e-10,
                 dense_threshold: int = 4096, krylov_max: int = 300,
                 max_restarts: int = 50) -> EigResult:
    """Lowest eigenpair of H.

    Dense eigendecomposition when ``dim <= dense_threshold``; otherwise
    restarted Lanczos with full reorthogonalization from a start vector drawn
    from ``numpy.random.default_rng(seed)``.
    """
    op = _Operator(H)
    if op.dim < 1:
        raise ValueError("empty Hamiltonian")
    if op.dim <= dense_threshold:
        w, V = op.eigh()
        v = V[:, 0].astype(complex)
        gap = float(w[1] - w[0]) if op.dim > 1 else math.inf
        return EigResult(float(w[0]), v, _residual(op, v, w[0]), 0, gap, "dense")

    rng = np.random.default_rng(seed)
    v = rng.standard_normal(op.dim)
    if not op.real:
        v = v + 1j * rng.standard_normal(op.dim)
    v = v.astype(complex)
    total = 0
    for _ in range(max_restarts):
        v, theta, gap, steps = _lanczos_ground(op, v, tol, krylov_max)
        total += steps
        hv = op.matvec(v)
        e = float(np.vdot(v, hv).real)
        res = float(np.linalg.norm(hv - e * v))
        if res <= tol:
            return EigResult(e, v, res, total, gap, "lanczos")
    raise NoConvergence(total, res, "Lanczos ground state")


def _lanczos_ground(op, v0, tol, krylov_max):
    m = min(op.dim, krylov_max)
    V = np.zeros((m, op.dim), dtype=complex)
    V[0] = v0 / np.linalg.norm(v0)
    alpha = np.zeros(m)
    beta = np.zeros(m)
    for j in range(m):
        w = op.matvec(V[j])
        alpha[j] = np.vdot(V[j], w).real
        # two passes of classical Gram-Schmidt against the whole basis
        for _ in range(2):
            w -= V[:j + 1].T @ (V[:j + 1].conj() @ w)
        beta[j] = np.linalg.norm(w)
        theta, y = eigh_tridiagonal(alpha[:j + 1], beta[:j]) if j else (alpha[:1], np.ones((1, 1)))
        estimate = beta[j] * abs(y[-1, 0])
        scale = max(1.0, abs(theta[0]))
        if estimate < 0.1 * tol or beta[j] < 1e-14 * scale or j == m - 1:
            break
        V[j + 1] = w / beta[j]
    k = j + 1
    vec = V[:k].T @ y[:, 0]
    vec /= np.linalg.norm(vec)
    gap = float(theta[1] - theta[0]) if k > 1 else math.nan
    return vec, float(theta[0]), gap, k


def _is_unit(psi, atol=1e-8):
    return abs(np.linalg.norm(psi) - 1.0) <= atol


def evolve(H, psi0, T: float, params: EvolveParams = EvolveParams()) -> np.ndarray:
    """Return ``exp(-i H T) psi0``."""
    op = _Operator(H)
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (op.dim,):
        raise ValueError(f"state of shape {psi0.shape} does not match dim {op.dim}")
    if not _is_unit(psi0):
        raise ValueError("initial state must be normalized")
    if T == 0:
        return psi0.copy()
    use_exact = params.method == "exact" or (
        params.method == "auto" and op.dim <= params.dense_threshold)
    if use_exact:
        w, V = op.eigh()
        return V @ (np.exp(-1j * w * T) * (V.conj().T @ psi0))
    return _krylov_evolve(op, psi0, float(T), params)


def _krylov_basis(op, psi, m):
    m = min(m, op.dim)
    V = np.zeros((m, op.dim), dtype=complex)
    alpha = np.zeros(m)
    beta = np.zeros(m)
    V[0] = psi / np.linalg.norm(psi)
    for j in range(m):
        w = op.matvec(V[j])
        alpha[j] = np.vdot(V[j], w).real
        for _ in range(2):
            w -= V[:j + 1].T @ (V[:j + 1].conj() @ w)
        beta[j] = np.linalg.norm(w)
        if beta[j] < 1e-13 * max(1.0, np.abs(alpha[:j + 1]).max()):
            beta[j] = 0.0
            break
        if j + 1 < m:
            V[j + 1] = w / beta[j]
    k = j + 1
    return V[:k], alpha[:k], beta[:k]


def _krylov_evolve(op, psi, T, params):
    sign = 1.0 if T > 0 else -1.0
    remaining = abs(T)
    substeps = 0
    psi = psi.copy()
    while remaining > 0:
        V, alpha, beta = _krylov_basis(op, psi, params.krylov_dim)
        nrm = np.linalg.norm(psi)
        if len(alpha) > 1:
            theta, S = eigh_tridiagonal(alpha, beta[:-1])
        else:
            theta, S = alpha, np.ones((1, 1))
        tau = min(params.dt_max, remaining)
        while True:
            substeps += 1
            coeff = S @ (np.exp(-1j * sign * tau * theta) * S[0].conj())
            err = beta[-1] * abs(coeff[-1]) * nrm
            if err <= params.tol * tau / abs(T):
                break
            if substeps >= params.max_substeps or tau < 1e-12 * abs(T):
                raise NoConvergence(substeps, err, "Krylov propagation")
            tau *= 0.5
        psi = nrm * (V.T @ coeff)
        remaining -= tau
        if remaining < abs(T) * 1e-15:
            break
    return psi


def expectation(H, psi) -> float:
    """Real energy <psi|H|psi>; a non-negligible imaginary part is an error."""
    op = _Operator(H)
    psi = np.asarray(psi, dtype=complex)
    val = np.vdot(psi, op.matvec(psi))
    if abs(val.imag) > 1e-12 * max(1.0, abs(val)):
        raise ValueError(f"expectation value has imaginary part {val.imag:.3e}")
    return float(val.real)
