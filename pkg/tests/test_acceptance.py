"""Acceptance suite: one test per criterion, each reporting PASS/FAIL.

The summary lines are collected in conftest.py and printed at the end of
the pytest run.
"""
import cmath
import json
import math
import time

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from mesonfringe.analysis import (AREA_LAW, NON_AREA_LAW, FringeSeries, extract_tension,
                                  fit_fringe, toy_area_law_probe)
from mesonfringe.cli import main
from mesonfringe.engine import EvolveParams, evolve, ground_state
from mesonfringe.gauge import ChargeConfig, GaugeGroup, build_lattice, enumerate_sector
from mesonfringe.hamiltonian import Couplings
from mesonfringe.protocol import (BARE_STRING, SECTOR_GROUND, evolve_register, prepare,
                                  return_amplitude, rotate, run_fringe, run_sequence)

from oracles import brute_sector, config_index, full_space_hamiltonian


def report(record, number, title, passed, detail):
    record(number, title, passed, detail)
    print(f"[{'PASS' if passed else 'FAIL'}] {number}. {title}: {detail}")
    assert passed, detail


def test_criterion_1_strong_coupling_fringe(record):
    start = time.perf_counter()
    spec = build_lattice([7], "open")
    reg = prepare(spec, GaugeGroup.u1(1), Couplings(2.0, magnetic=False), 2, 2, BARE_STRING)
    times = np.linspace(0, 2 * math.pi, 64)
    results = run_fringe(reg, times)
    p_r = np.array([r.P_R for r in results])
    dev = float(np.max(np.abs(p_r - np.sin(times) ** 2)))
    fit = fit_fringe(FringeSeries.from_results(results))
    gamma = extract_tension(fit, 2).gamma
    elapsed = time.perf_counter() - start
    passed = (dev <= 1e-10 and abs(fit.omega - 2) <= 1e-8 and abs(gamma - 1) <= 1e-8
              and elapsed < 1.0)
    report(record, 1, "strong-coupling fringe P_R = sin^2(T)", passed,
           f"max dev {dev:.2e}, omega {fit.omega:.12f}, gamma {gamma:.12f}, {elapsed:.2f}s")


LADDER_CFG = {
    "lattice": {"dims": [4, 2], "boundary": "open"},
    "group": {"kind": "Z2"},
    "couplings": {"g2": [1.5, 2.0, 3.0]},
    "engine": {"seed": 12648430},
}


def _ladder_run(workdir, monkeypatch):
    """Potential and interferometer runs on the Z2 ladder through the CLI."""
    monkeypatch.chdir(workdir)
    pot = {**LADDER_CFG, "protocol": {"R": [1, 2, 3]}}
    inter = {**LADDER_CFG, "protocol": {"R": 1, "L": 2, "mode": "sector-ground"}}
    (workdir / "potential.json").write_text(json.dumps(pot))
    (workdir / "interfere.json").write_text(json.dumps(inter))
    codes = [main(["potential", "--config", "potential.json", "--out", "out"]),
             main(["interfere", "--config", "interfere.json", "--out", "out", "--svg"])]
    return codes, workdir / "out"


def test_criterion_2_cross_method_tension(tmp_path, monkeypatch, record):
    start = time.perf_counter()
    codes, out = _ladder_run(tmp_path, monkeypatch)
    elapsed = time.perf_counter() - start
    assert codes == [0, 0]
    slopes = {p["g2"]: p["gamma"] for p in json.loads((out / "potential.json").read_text())
              ["potentials"]}
    fringes = json.loads((out / "interfere.json").read_text())["fringes"]
    rel = {f["g2"]: abs(f["gamma"] - slopes[f["g2"]]) / slopes[f["g2"]] for f in fringes}
    leak = max(f["leakage_max"] for f in fringes)
    passed = len(rel) == 3 and max(rel.values()) <= 0.01 and leak <= 1e-10 and elapsed < 120
    detail = ", ".join(f"g2={g:g}: rel {r:.1e}" for g, r in sorted(rel.items()))
    report(record, 2, "interferometric vs static-potential tension", passed,
           f"{detail}; leakage {leak:.1e}; {elapsed:.1f}s")


def test_criterion_3_area_phase(record):
    rng = np.random.default_rng(2024)
    chain = build_lattice([9])
    worst_mod, worst_arg = 0.0, 0.0
    for _ in range(20):
        R = int(rng.integers(1, 8))
        T = float(rng.uniform(0, 20))
        g2 = float(rng.uniform(0.5, 3.0))
        group = GaugeGroup.u1(int(rng.integers(1, 3)))
        reg = prepare(chain, group, Couplings(g2), R, 1, BARE_STRING)
        H, chi = reg.hamiltonians[0], reg.chi_down
        B = return_amplitude(chi, H, T)
        worst_mod = max(worst_mod, abs(abs(B) - 1))
        worst_arg = max(worst_arg, abs(cmath.phase(B * cmath.exp(1j * g2 / 2 * R * T))))
    passed = worst_mod <= 1e-12 and worst_arg <= 1e-10
    report(record, 3, "bare-string return amplitude area law", passed,
           f"max ||B|-1| {worst_mod:.1e}, max phase error {worst_arg:.1e} over 20 (R, T)")


def test_criterion_4_two_level_algebra(record):
    reg = prepare(build_lattice([7]), GaugeGroup.u1(1), Couplings(2.0, magnetic=False), 2, 2,
                  BARE_STRING)
    twice = rotate(rotate(reg))
    err_flip = float(np.max(np.abs(np.array(twice.coefficients()) - [0, 1])))
    rng = np.random.default_rng(5)
    err_norm = 0.0
    for _ in range(50):
        a, b = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        n = math.hypot(abs(a), abs(b))
        state = reg.with_state(reg.chi_down * a / n, reg.chi_up * b / n)
        err_norm = max(err_norm, abs(rotate(state).norm() - 1))
    zero = run_sequence(reg, 0.0)
    err_zero = max(abs(zero.P_R), abs(zero.P_RL - 1))
    passed = err_flip <= 1e-12 and err_norm <= 1e-12 and err_zero <= 1e-12
    report(record, 4, "two-level rotation algebra", passed,
           f"flip {err_flip:.1e}, norm {err_norm:.1e}, T=0 {err_zero:.1e}")


def test_criterion_5_engine_oracles(record):
    start = time.perf_counter()
    rng = np.random.default_rng(99)
    worst_evolve, worst_residual = 0.0, 0.0
    for k in range(25):
        dim = int(rng.integers(16, 513))
        A = sp.random(dim, dim, density=min(1.0, 8 / dim), random_state=rng, format="csr")
        B = sp.random(dim, dim, density=min(1.0, 8 / dim), random_state=rng, format="csr")
        M = A + 1j * B
        H = sp.csr_array(M + M.conj().T + sp.diags(rng.standard_normal(dim)))
        psi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        psi /= np.linalg.norm(psi)
        T = float(rng.uniform(0.1, 10))
        w, V = np.linalg.eigh(H.toarray())
        exact = V @ (np.exp(-1j * w * T) * (V.conj().T @ psi))
        krylov = evolve(H, psi, T, EvolveParams(method="krylov"))
        worst_evolve = max(worst_evolve, float(np.linalg.norm(krylov - exact)))
        gs = ground_state(H, dense_threshold=0)
        worst_residual = max(worst_residual, gs.residual)
        assert abs(gs.energy - w[0]) <= 1e-8
    elapsed = time.perf_counter() - start
    passed = worst_evolve <= 1e-8 and worst_residual <= 1e-10 and elapsed < 60
    report(record, 5, "Krylov and Lanczos against dense oracles", passed,
           f"max evolve err {worst_evolve:.1e}, max residual {worst_residual:.1e}, {elapsed:.1f}s")


def _small_lattices(max_links=12):
    out = []
    for n in range(2, max_links + 2):
        for b in ("open", "periodic"):
            spec = build_lattice([n], b)
            if spec.n_links <= max_links:
                out.append(([n], b))
    for a in range(2, 7):
        for c in range(2, 7):
            for b in (["open", "open"], ["periodic", "open"], ["open", "periodic"],
                      ["periodic", "periodic"]):
                if build_lattice([a, c], b).n_links <= max_links:
                    out.append(([a, c], b))
    return out


def _embedded_leak(reg, dims, g2, T):
    """Evolve the rotated register in the unconstrained link space.

    Returns the norm that changes charge sector and the deviation from the
    in-sector evolution.
    """
    H, values = full_space_hamiltonian(dims, "open", "Z2", g2)
    rows = [np.array([config_index(c, values) for c in s.basis]) for s in reg.sectors]
    start = rotate(reg)
    full = np.zeros(H.shape[0], dtype=complex)
    full[rows[0]] = start.psi_down
    full[rows[1]] = start.psi_up
    final = expm_multiply(-1j * T * H, full)
    ref = evolve_register(start, T)
    mask = np.ones(H.shape[0], dtype=bool)
    mask[np.concatenate(rows)] = False
    transfer = max(abs(np.linalg.norm(final[rows[0]]) - np.linalg.norm(start.psi_down)),
                   abs(np.linalg.norm(final[rows[1]]) - np.linalg.norm(start.psi_up)),
                   float(np.linalg.norm(final[mask])))
    dev = max(float(np.linalg.norm(final[rows[0]] - ref.psi_down)),
              float(np.linalg.norm(final[rows[1]] - ref.psi_up)))
    return transfer, dev


def test_criterion_6_gauss_law_and_sectors(record):
    groups = [("Z2", GaugeGroup.z2(), 2, 1), ("ZN", GaugeGroup.zn(3), 3, 1),
              ("U1", GaugeGroup.u1(1), 2, 1)]
    checked, mismatches, bad_residual = 0, 0, 0
    for dims, boundary in _small_lattices():
        spec = build_lattice(dims, boundary)
        sites = spec.sites
        for kind, group, n, cutoff in groups:
            for charges in ({}, {sites[0]: 1, sites[-1]: -1}):
                expected = brute_sector(dims, boundary, kind, charges, n, cutoff)
                sector = enumerate_sector(spec, group, ChargeConfig.from_mapping(spec, charges))
                checked += 1
                mismatches += list(sector.basis) != expected
                bad_residual += sum(any(sector.gauss_residuals(c).values())
                                    for c in sector.basis)

    worst_transfer, worst_dev = 0.0, 0.0
    for mode in (BARE_STRING, SECTOR_GROUND):
        for g2 in (1.0, 2.0):
            reg = prepare(build_lattice([4, 2]), GaugeGroup.z2(), Couplings(g2), 1, 2, mode)
            for T in (0.7, 3.1):
                transfer, dev = _embedded_leak(reg, [4, 2], g2, T)
                worst_transfer = max(worst_transfer, transfer)
                worst_dev = max(worst_dev, dev)
                res = run_sequence(reg, T)
                worst_transfer = max(worst_transfer,
                                     abs(math.hypot(res.norm_down, res.norm_up) - 1))
                if mode == SECTOR_GROUND:
                    worst_transfer = max(worst_transfer, abs(res.leakage))
    passed = (mismatches == 0 and bad_residual == 0 and worst_transfer <= 1e-10
              and worst_dev <= 1e-8)
    report(record, 6, "Gauss law, sector leakage and brute-force enumeration", passed,
           f"{checked} sectors vs brute force, {mismatches} mismatches, {bad_residual} bad "
           f"residuals; max sector leakage {worst_transfer:.1e}, in-sector dev {worst_dev:.1e}")


def test_criterion_7_phase_probe(record):
    start = time.perf_counter()
    verdicts = {beta: toy_area_law_probe(1.0, beta, [1, 2, 3, 4], [1, 2]).verdict
                for beta in (0.5, 1.0, 2.0)}
    elapsed = time.perf_counter() - start
    passed = (verdicts == {0.5: NON_AREA_LAW, 1.0: AREA_LAW, 2.0: NON_AREA_LAW}
              and elapsed < 1.0)
    report(record, 7, "toy-potential phase probe", passed,
           ", ".join(f"beta={b:g}: {v}" for b, v in verdicts.items()) + f"; {elapsed:.2f}s")


def test_criterion_8_determinism(tmp_path, monkeypatch, record):
    first, second = tmp_path / "a", tmp_path / "b"
    first.mkdir()
    second.mkdir()
    codes_a, out_a = _ladder_run(first, monkeypatch)
    codes_b, out_b = _ladder_run(second, monkeypatch)
    assert codes_a == codes_b == [0, 0]
    names = sorted(p.name for p in out_a.iterdir())
    same = names == sorted(p.name for p in out_b.iterdir()) and all(
        (out_a / n).read_bytes() == (out_b / n).read_bytes() for n in names)
    report(record, 8, "byte-identical reruns", same, f"compared {', '.join(names)}")
