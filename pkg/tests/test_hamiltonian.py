import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mesonfringe.gauge import ChargeConfig, GaugeGroup, build_lattice, enumerate_sector
from mesonfringe.hamiltonian import Couplings, assemble, plaquette_moves

from oracles import projected_hamiltonian


def chain_meson(n_sites=7, R=2, cutoff=1):
    spec = build_lattice([n_sites])
    return enumerate_sector(spec, GaugeGroup.u1(cutoff), ChargeConfig.meson(spec, 0, R))


def test_couplings_derived():
    c = Couplings(2.0)
    assert c.lambda_e == 1.0
    assert c.lambda_b == 0.25
    with pytest.raises(ValueError):
        Couplings(0.0)


def test_chain_meson_is_one_by_one():
    H = assemble(chain_meson(), Couplings(2.0))
    np.testing.assert_array_equal(H.dense(), [[2.0]])


def test_z2_single_plaquette():
    spec = build_lattice([2, 2])
    sector = enumerate_sector(spec, GaugeGroup.z2(), ChargeConfig())
    H = assemble(sector, Couplings(2.0))
    np.testing.assert_allclose(H.dense(), [[0.0, -0.25], [-0.25, 4.0]], rtol=0, atol=1e-15)


def test_electric_only_limit_is_diagonal():
    spec = build_lattice([3, 2])
    sector = enumerate_sector(spec, GaugeGroup.zn(3), ChargeConfig.meson(spec, (0, 0), (2, 1)))
    H = assemble(sector, Couplings(1.3, magnetic=False))
    assert H.is_diagonal
    g = GaugeGroup.zn(3)
    expected = [0.65 * sum(g.electric_energy(e) for e in c) for c in sector.basis]
    np.testing.assert_allclose(np.linalg.eigvalsh(H.dense()), np.sort(expected), atol=1e-13)


def test_matvec_examples():
    H1 = assemble(chain_meson(), Couplings(2.0))
    np.testing.assert_array_equal(H1.matvec(np.array([1.0])), [2.0])
    spec = build_lattice([2, 2])
    H2 = assemble(enumerate_sector(spec, GaugeGroup.z2(), ChargeConfig()), Couplings(2.0))
    np.testing.assert_allclose(H2.matvec(np.array([1.0, 0.0])), [0.0, -0.25])
    np.testing.assert_array_equal(H2.matvec(np.zeros(2, dtype=complex)), [0, 0])
    with pytest.raises(ValueError):
        H2.matvec(np.ones(3))


PROBLEMS = [
    ([2, 2], "open", "Z2", 2, 1, {}),
    ([3, 2], "open", "Z2", 2, 1, {(0, 0): 1, (2, 0): -1}),
    ([4, 2], "open", "Z2", 2, 1, {(0, 0): 1, (3, 0): -1}),
    ([2, 2], "periodic", "Z2", 2, 1, {}),
    ([3, 2], "open", "ZN", 3, 1, {(0, 0): 1, (1, 1): -1}),
    ([2, 3], "open", "ZN", 4, 1, {}),
    ([3, 2], "open", "U1", 2, 1, {(0, 0): 1, (2, 0): -1}),
    ([3, 2], "open", "U1", 2, 1, {}),
    ([2, 2], "open", "U1", 2, 2, {(0, 0): 1, (1, 1): -1}),
    ([3, 2], ["periodic", "open"], "U1", 2, 1, {}),
]


@pytest.mark.parametrize("dims, boundary, kind, n, cutoff, charges", PROBLEMS)
@pytest.mark.parametrize("g2", [0.7, 2.0])
def test_matches_full_space_oracle(dims, boundary, kind, n, cutoff, charges, g2):
    spec = build_lattice(dims, boundary)
    group = {"Z2": GaugeGroup.z2(), "ZN": GaugeGroup.zn(n), "U1": GaugeGroup.u1(cutoff)}[kind]
    sector = enumerate_sector(spec, group, ChargeConfig.from_mapping(spec, charges))
    assert 0 < sector.dim <= 512
    H = assemble(sector, Couplings(g2))
    block, leak = projected_hamiltonian(dims, boundary, kind, g2, sector.basis, n, cutoff)
    assert leak == 0.0  # the full-space H never leaves the Gauss-law sector
    np.testing.assert_allclose(H.dense(), block, rtol=0, atol=1e-14)


@pytest.mark.parametrize("dims, boundary, kind, n, cutoff, charges", PROBLEMS)
def test_plaquette_moves_stay_in_sector(dims, boundary, kind, n, cutoff, charges):
    spec = build_lattice(dims, boundary)
    group = {"Z2": GaugeGroup.z2(), "ZN": GaugeGroup.zn(n), "U1": GaugeGroup.u1(cutoff)}[kind]
    sector = enumerate_sector(spec, group, ChargeConfig.from_mapping(spec, charges))
    for sign in (1, -1):
        for _, src, dst in plaquette_moves(sector, sign):
            assert np.all((dst >= 0) & (dst < sector.dim))
            for i, j in zip(src, dst):
                assert set(sector.gauss_residuals(sector.basis[j]).values()) == {0}


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(PROBLEMS), st.floats(0.2, 5.0), st.integers(0, 2**32 - 1))
def test_hermiticity(problem, g2, seed):
    dims, boundary, kind, n, cutoff, charges = problem
    spec = build_lattice(dims, boundary)
    group = {"Z2": GaugeGroup.z2(), "ZN": GaugeGroup.zn(n), "U1": GaugeGroup.u1(cutoff)}[kind]
    H = assemble(enumerate_sector(spec, group, ChargeConfig.from_mapping(spec, charges)),
                 Couplings(g2))
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(H.dim) + 1j * rng.standard_normal(H.dim)
    y = rng.standard_normal(H.dim) + 1j * rng.standard_normal(H.dim)
    lhs = np.vdot(x, H.matvec(y))
    rhs = np.conj(np.vdot(y, H.matvec(x)))
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))
    a, b = rng.standard_normal(2)
    np.testing.assert_allclose(H.matvec(a * x + b * y), a * H.matvec(x) + b * H.matvec(y),
                               atol=1e-12)


def test_dump(tmp_path):
    spec = build_lattice([2, 2])
    H = assemble(enumerate_sector(spec, GaugeGroup.z2(), ChargeConfig()), Couplings(2.0))
    H.dump(tmp_path / "h.txt")
    lines = (tmp_path / "h.txt").read_text().splitlines()
    assert lines[0] == "2 3"
    assert lines[1:] == ["0 1 -0.25", "1 0 -0.25", "1 1 4"]
