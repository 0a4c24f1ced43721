"""Kogut-Susskind Hamiltonian restricted to a Gauss-law sector.

    H = (g2/2) sum_links h_E(e) - 1/(2 g2) sum_plaq (P + P^dagger)

P raises the bottom and right links of a plaquette and lowers the top and
left ones (counter-clockwise circulation).  For Z2 links P is its own
adjoint and enters once.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .gauge import GaugeSector


@dataclass(frozen=True)
class Couplings:
    g2: float
    magnetic: bool = True

    def __post_init__(self):
        if not self.g2 > 0:
            raise ValueError(f"g2 must be positive, got {self.g2}")

    @property
    def lambda_e(self) -> float:
        return self.g2 / 2.0

    @property
    def lambda_b(self) -> float:
        return 1.0 / (2.0 * self.g2)

    def to_dict(self) -> dict:
        return {"g2": self.g2, "magnetic": self.magnetic}


class SparseHamiltonian:
    """Real symmetric sector Hamiltonian in compressed-row storage."""

    def __init__(self, sector: GaugeSector, couplings: Couplings,
                 diagonal: np.ndarray, rows: np.ndarray, cols: np.ndarray, vals: np.ndarray):
        self.sector = sector
        self.couplings = couplings
        self.dim = len(diagonal)
        self.diagonal = diagonal
        self.offdiag = (rows, cols, vals)
        off = sp.coo_array((vals, (rows, cols)), shape=(self.dim, self.dim))
        self.matrix = (off + sp.diags_array(diagonal)).tocsr()
        self.matrix.sum_duplicates()
        self.matrix.eliminate_zeros()
        self.matrix.sort_indices()

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    @property
    def is_diagonal(self) -> bool:
        return len(self.offdiag[2]) == 0

    def matvec(self, x) -> np.ndarray:
        x = np.asarray(x)
        if x.shape != (self.dim,):
            raise ValueError(f"vector of length {x.shape} does not match dim {self.dim}")
        return self.matrix @ x

    def __matmul__(self, x):
        return self.matvec(x)

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    @cached_property
    def eigh(self):
        """Full eigendecomposition, computed once and reused for evolution."""
        if self.is_diagonal:
            order = np.argsort(self.diagonal, kind="stable")
            vecs = np.eye(self.dim)[:, order]
            return self.diagonal[order].astype(float), vecs
        return np.linalg.eigh(self.dense())

    def triplets(self):
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        return coo.row[order], coo.col[order], coo.data[order]

    def dump(self, path) -> None:
        """Write ``dim nnz`` then one ``row col value`` line per stored entry."""
        r, c, v = self.triplets()
        with open(path, "w") as fh:
            fh.write(f"{self.dim} {len(v)}\n")
            for i, j, x in zip(r, c, v):
                fh.write(f"{i} {j} {x:.17g}\n")


def _encoder(sector: GaugeSector):
    """Map configurations (rows of ints) to basis positions; -1 if absent."""
    values = sector.group.values
    base, vmin = len(values), values[0]
    n = sector.spec.n_links
    if n == 0 or base ** n >= 2 ** 62:
        index = sector.index

        def lookup(configs):
            return np.array([index.get(tuple(int(e) for e in c), -1) for c in configs],
                            dtype=np.int64)
        return lookup

    weights = base ** np.arange(n - 1, -1, -1, dtype=np.int64)
    # lexicographic basis order makes the encoded keys ascending
    keys = (sector.states() - vmin) @ weights

    def lookup(configs):
        k = (np.asarray(configs, dtype=np.int64) - vmin) @ weights
        pos = np.searchsorted(keys, k)
        pos = np.minimum(pos, len(keys) - 1)
        return np.where(keys[pos] == k, pos, -1)
    return lookup


def _shift(group, e: np.ndarray, delta: int):
    """Vectorized link shift; returns (new values, validity mask)."""
    if group.modulus is None:
        new = e + delta
        return new, np.abs(new) <= group.cutoff
    return (e + delta) % group.modulus, np.ones(len(e), dtype=bool)


def plaquette_moves(sector: GaugeSector, sign: int = 1):
    """Yield ``(plaquette, src, dst)`` index arrays for P (sign=+1) or P^dagger.

    Raises if a move lands on a Gauss-law-valid configuration that the sector
    basis does not contain.
    """
    group = sector.group
    states = sector.states()
    lookup = _encoder(sector)
    src_all = np.arange(sector.dim)
    for p, (b, r, t, l) in enumerate(sector.spec.plaquettes):
        new = states.copy()
        ok = np.ones(sector.dim, dtype=bool)
        for link, delta in ((b, sign), (r, sign), (t, -sign), (l, -sign)):
            new[:, link], valid = _shift(group, states[:, link], delta)
            ok &= valid
        src = src_all[ok]
        dst = lookup(new[ok])
        if np.any(dst < 0):
            raise RuntimeError("plaquette move left the Gauss-law sector")
        yield p, src, dst


def electric_diagonal(sector: GaugeSector, couplings: Couplings) -> np.ndarray:
    group = sector.group
    table = {e: group.electric_energy(e) for e in group.values}
    h = np.vectorize(table.__getitem__, otypes=[float])
    states = sector.states()
    if states.size == 0:
        return np.zeros(sector.dim)
    return couplings.lambda_e * h(states).sum(axis=1)


def assemble(sector: GaugeSector, couplings: Couplings) -> SparseHamiltonian:
    if sector.dim == 0:
        raise ValueError("cannot assemble a Hamiltonian on an empty sector")
    diagonal = electric_diagonal(sector, couplings)
    rows, cols = [], []
    magnetic = couplings.magnetic and sector.spec.ndim == 2
    if magnetic:
        signs = (1,) if sector.group.modulus == 2 else (1, -1)
        for sign in signs:
            for _, src, dst in plaquette_moves(sector, sign):
                rows.append(dst)
                cols.append(src)
    if rows:
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
    else:
        rows = cols = np.zeros(0, dtype=np.int64)
    vals = np.full(len(rows), -couplings.lambda_b)
    return SparseHamiltonian(sector, couplings, diagonal, rows, cols, vals)
