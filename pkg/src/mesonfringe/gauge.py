"""Lattices, abelian gauge groups, static charges and Gauss-law sectors.

Links are oriented along the positive lattice directions.  The electric
eigenvalue ``e`` on a link counts flux flowing from its tail site to its head
site, so Gauss's law at a site reads ``sum(out) - sum(in) = q``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import InfeasibleCharges, DimensionExceeded, PathInvalid, NotInBasis

Site = tuple

OPEN = "open"
PERIODIC = "periodic"

DEFAULT_MAX_DIM = 200_000


@dataclass(frozen=True)
class LatticeSpec:
    """Chain or rectangular grid with per-axis boundary conditions.

    ``links`` holds ``(site, direction)`` pairs ordered lexicographically by
    site and then direction.  Each plaquette is a tuple of four link indices
    ``(bottom, right, top, left)``; traversed counter-clockwise the first two
    links run forward and the last two backward.
    """

    dims: tuple
    boundary: tuple
    sites: tuple = field(init=False, repr=False, compare=False)
    links: tuple = field(init=False, repr=False, compare=False)
    link_index: dict = field(init=False, repr=False, compare=False)
    plaquettes: tuple = field(init=False, repr=False, compare=False)
    _incidence: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        boundary = tuple(self.boundary)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "boundary", boundary)

        sites = tuple(np.ndindex(*dims))
        links = []
        for site in sites:
            for d in range(len(dims)):
                if self.neighbor(site, d) is not None:
                    links.append((site, d))
        link_index = {link: i for i, link in enumerate(links)}

        plaquettes = []
        if len(dims) == 2:
            for site in sites:
                right = self.neighbor(site, 0)
                up = self.neighbor(site, 1)
                if right is None or up is None:
                    continue
                plaquettes.append((
                    link_index[(site, 0)],
                    link_index[(right, 1)],
                    link_index[(up, 0)],
                    link_index[(site, 1)],
                ))

        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "links", tuple(links))
        object.__setattr__(self, "link_index", link_index)
        object.__setattr__(self, "plaquettes", tuple(plaquettes))

        inc = {s: [] for s in sites}
        for i, (site, d) in enumerate(links):
            inc[site].append((i, 1))
            inc[self.neighbor(site, d)].append((i, -1))
        object.__setattr__(self, "_incidence", inc)

    @property
    def ndim(self) -> int:
        return len(self.dims)

    @property
    def n_links(self) -> int:
        return len(self.links)

    def neighbor(self, site: Site, direction: int):
        """Site one step along +direction, or None past an open edge."""
        x = list(site)
        x[direction] += 1
        if x[direction] >= self.dims[direction]:
            if self.boundary[direction] == PERIODIC:
                x[direction] = 0
            else:
                return None
        return tuple(x)

    def head(self, link: int) -> Site:
        site, d = self.links[link]
        return self.neighbor(site, d)

    def incidence(self) -> dict:
        """Map site -> list of (link index, +1 outgoing / -1 incoming)."""
        return self._incidence

    def normalize_site(self, site) -> Site:
        if isinstance(site, (int, np.integer)):
            site = (int(site),)
        site = tuple(int(s) for s in site)
        if len(site) != self.ndim or any(not 0 <= s < n for s, n in zip(site, self.dims)):
            raise ValueError(f"site {site} is not on lattice with dims {self.dims}")
        return site

    def to_dict(self) -> dict:
        return {"dims": list(self.dims), "boundary": list(self.boundary)}


def build_lattice(dims: Sequence[int], boundary="open") -> LatticeSpec:
    """Build a 1D chain or 2D grid.

    ``boundary`` is either a single string applied to every axis or one
    string per axis.
    """
    dims = [dims] if isinstance(dims, (int, np.integer)) else list(dims)
    if not 1 <= len(dims) <= 2:
        raise ValueError(f"lattice must have 1 or 2 axes, got {len(dims)}")
    if any(int(d) < 2 for d in dims):
        raise ValueError(f"every extent must be >= 2, got {dims}")
    if isinstance(boundary, str):
        boundary = [boundary] * len(dims)
    boundary = list(boundary)
    if len(boundary) != len(dims):
        raise ValueError("need one boundary condition per axis")
    for b in boundary:
        if b not in (OPEN, PERIODIC):
            raise ValueError(f"unknown boundary condition {b!r}")
    return LatticeSpec(tuple(dims), tuple(boundary))


@dataclass(frozen=True)
class GaugeGroup:
    """Abelian link group: ``Z2``, clock ``ZN`` or truncated ``U1``."""

    kind: str
    n: int = 2
    cutoff: int = 1

    def __post_init__(self):
        if self.kind == "Z2":
            object.__setattr__(self, "n", 2)
        elif self.kind == "ZN":
            if self.n < 2:
                raise ValueError("ZN needs N >= 2")
        elif self.kind == "U1":
            if self.cutoff < 1:
                raise ValueError("U1 truncation needs cutoff >= 1")
        else:
            raise ValueError(f"unknown gauge group {self.kind!r}")

    @classmethod
    def z2(cls) -> "GaugeGroup":
        return cls("Z2")

    @classmethod
    def zn(cls, n: int) -> "GaugeGroup":
        return cls("ZN", n=int(n))

    @classmethod
    def u1(cls, cutoff: int) -> "GaugeGroup":
        return cls("U1", cutoff=int(cutoff))

    @property
    def modulus(self):
        return None if self.kind == "U1" else self.n

    @property
    def values(self) -> tuple:
        if self.kind == "U1":
            return tuple(range(-self.cutoff, self.cutoff + 1))
        return tuple(range(self.n))

    def electric_energy(self, e: int) -> float:
        if self.kind == "Z2":
            return float(e)
        if self.kind == "ZN":
            return 1.0 - math.cos(2.0 * math.pi * e / self.n)
        return float(e * e)

    def shift(self, e: int, delta: int):
        """Apply ``delta`` units of raising; None when truncation annihilates."""
        if self.kind == "U1":
            e = e + delta
            return e if -self.cutoff <= e <= self.cutoff else None
        return (e + delta) % self.n

    def reduce(self, q: int) -> int:
        return q if self.kind == "U1" else q % self.n

    def label(self) -> str:
        if self.kind == "Z2":
            return "Z2"
        if self.kind == "ZN":
            return f"Z{self.n}"
        return f"U1(cutoff={self.cutoff})"

    def to_dict(self) -> dict:
        if self.kind == "ZN":
            return {"kind": "ZN", "N": self.n}
        if self.kind == "U1":
            return {"kind": "U1", "cutoff": self.cutoff}
        return {"kind": "Z2"}


@dataclass(frozen=True)
class ChargeConfig:
    """Static charges as a sorted tuple of ``(site, q)`` with q != 0."""

    charges: tuple = ()

    @classmethod
    def from_mapping(cls, spec: LatticeSpec, charges: Mapping | Iterable = ()) -> "ChargeConfig":
        items = charges.items() if isinstance(charges, Mapping) else charges
        acc = {}
        for site, q in items:
            site = spec.normalize_site(site)
            acc[site] = acc.get(site, 0) + int(q)
        return cls(tuple(sorted((s, q) for s, q in acc.items() if q != 0)))

    @classmethod
    def meson(cls, spec: LatticeSpec, plus, minus) -> "ChargeConfig":
        plus, minus = spec.normalize_site(plus), spec.normalize_site(minus)
        if plus == minus:
            raise ValueError("meson needs two distinct sites")
        return cls.from_mapping(spec, {plus: 1, minus: -1})

    def as_dict(self) -> dict:
        return dict(self.charges)

    def charge_at(self, site: Site) -> int:
        return self.as_dict().get(site, 0)

    @property
    def total(self) -> int:
        return sum(q for _, q in self.charges)

    def is_meson(self) -> bool:
        return sorted(q for _, q in self.charges) == [-1, 1]


def validate_charges(spec: LatticeSpec, group: GaugeGroup, charges: ChargeConfig):
    total = group.reduce(charges.total)
    if total != 0:
        raise InfeasibleCharges(
            f"total charge {charges.total} does not vanish"
            + ("" if group.modulus is None else f" mod {group.modulus}"))
    if group.kind == "U1":
        inc = spec.incidence()
        for site, q in charges.charges:
            bound = len(inc[site]) * group.cutoff
            if abs(q) > bound:
                raise InfeasibleCharges(
                    f"charge {q} at site {site} needs flux beyond cutoff "
                    f"{group.cutoff} on its {len(inc[site])} link(s)")


@dataclass(frozen=True)
class GaugeSector:
    """Gauss-law-satisfying electric configurations for one charge placement."""

    spec: LatticeSpec
    group: GaugeGroup
    charges: ChargeConfig
    basis: tuple
    index: dict = field(repr=False, compare=False)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def __len__(self) -> int:
        return len(self.basis)

    def states(self) -> np.ndarray:
        return np.array(self.basis, dtype=np.int64).reshape(self.dim, self.spec.n_links)

    def gauss_residuals(self, config: Sequence[int]) -> dict:
        """Per-site residual of Gauss's law (reduced mod N for ZN groups)."""
        q = self.charges.as_dict()
        out = {}
        for site, incident in self.spec.incidence().items():
            div = sum(sign * config[i] for i, sign in incident)
            out[site] = self.group.reduce(div - q.get(site, 0))
        return out

    def basis_vector(self, config: Sequence[int]) -> np.ndarray:
        config = tuple(int(e) for e in config)
        try:
            i = self.index[config]
        except KeyError:
            raise NotInBasis(f"configuration {config} is not in the sector basis") from None
        v = np.zeros(self.dim, dtype=complex)
        v[i] = 1.0
        return v

    def to_json(self, first: int = 10) -> str:
        """Debug dump: sector description, dimension and leading basis states."""
        return json.dumps({
            "lattice": self.spec.to_dict(),
            "group": self.group.to_dict(),
            "charges": [[list(s), q] for s, q in self.charges.charges],
            "links": [[list(s), d] for s, d in self.spec.links],
            "dimension": self.dim,
            "basis": [list(b) for b in self.basis[:first]],
        }, indent=2)


def enumerate_sector(spec: LatticeSpec, group: GaugeGroup, charges: ChargeConfig,
                     max_dim: int = DEFAULT_MAX_DIM, require_nonempty: bool = False) -> GaugeSector:
    """Enumerate the Gauss-law basis by depth-first assignment in link order.

    A site is checked as soon as its last incident link is assigned.  The
    basis comes out lexicographically ordered in link order, with link values
    taken in ``group.values`` order.
    """
    if max_dim <= 0:
        raise ValueError("max_dim must be positive")
    validate_charges(spec, group, charges)

    n = spec.n_links
    inc = spec.incidence()
    q = charges.as_dict()
    closes_at = [[] for _ in range(n)]
    isolated = []
    for site, incident in inc.items():
        if incident:
            closes_at[max(i for i, _ in incident)].append((incident, q.get(site, 0)))
        else:
            isolated.append(site)
    if any(q.get(s, 0) for s in isolated):
        raise InfeasibleCharges("charge on a site without links")

    values = group.values
    reduce = group.reduce
    config = [0] * n
    basis = []

    def assign(k):
        if k == n:
            if len(basis) >= max_dim:
                raise DimensionExceeded(len(basis) + 1, max_dim)
            basis.append(tuple(config))
            return
        for e in values:
            config[k] = e
            ok = True
            for incident, qv in closes_at[k]:
                if reduce(sum(sign * config[i] for i, sign in incident) - qv) != 0:
                    ok = False
                    break
            if ok:
                assign(k + 1)
        config[k] = 0

    assign(0)
    if not basis and require_nonempty:
        raise InfeasibleCharges(
            f"no {group.label()} configuration satisfies Gauss's law for charges "
            f"{charges.as_dict()}")
    basis = tuple(basis)
    return GaugeSector(spec, group, charges, basis, {b: i for i, b in enumerate(basis)})


def link_between(spec: LatticeSpec, a: Site, b: Site):
    """Return ``(link index, +1/-1)`` for the step a -> b, or None."""
    for d in range(spec.ndim):
        if spec.neighbor(a, d) == b:
            return spec.link_index[(a, d)], 1
    for d in range(spec.ndim):
        if spec.neighbor(b, d) == a:
            return spec.link_index[(b, d)], -1
    return None


def straight_path(spec: LatticeSpec, start, end) -> list:
    """Lattice path from start to end moving along axis 0 first, then axis 1.

    Steps go in the direction of increasing/decreasing coordinate without
    wrapping around periodic boundaries.
    """
    start, end = spec.normalize_site(start), spec.normalize_site(end)
    path = [start]
    cur = list(start)
    for axis in range(spec.ndim):
        step = 1 if end[axis] > cur[axis] else -1
        while cur[axis] != end[axis]:
            cur[axis] += step
            path.append(tuple(cur))
    return path


def string_config(sector: GaugeSector, path: Sequence) -> tuple:
    """Flux-free background with one unit of flux raised along ``path``."""
    spec, group = sector.spec, sector.group
    path = [spec.normalize_site(s) for s in path]
    if len(path) < 2:
        raise PathInvalid("path needs at least two sites")
    q = sector.charges.as_dict()
    if q.get(path[0], 0) != 1 or q.get(path[-1], 0) != -1:
        raise PathInvalid(
            f"path must run from a +1 charge to a -1 charge; endpoints carry "
            f"{q.get(path[0], 0)} and {q.get(path[-1], 0)}")
    config = [0] * spec.n_links
    for a, b in zip(path, path[1:]):
        step = link_between(spec, a, b)
        if step is None:
            raise PathInvalid(f"sites {a} and {b} are not joined by a link")
        i, sign = step
        e = group.shift(config[i], sign)
        if e is None:
            raise NotInBasis(f"path raises link {i} beyond the truncation")
        config[i] = e
    return tuple(config)


def string_state(sector: GaugeSector, path: Sequence) -> np.ndarray:
    """Unit vector on the bare flux-string configuration along ``path``."""
    return sector.basis_vector(string_config(sector, path))
