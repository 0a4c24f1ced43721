"""Meson-superposition interferometry on abelian lattice gauge theories."""

from .analysis import (FitResult, FringeSeries, PotentialTable, ProbeReport, area_law_probe,
                       area_law_verdict, extract_tension, fit_fringe, static_potential,
                       toy_area_law_probe, toy_potential_protocol)
from .engine import EigResult, EvolveParams, evolve, expectation, ground_state
from .gauge import (ChargeConfig, GaugeGroup, GaugeSector, LatticeSpec, build_lattice,
                    enumerate_sector, straight_path, string_state)
from .hamiltonian import Couplings, SparseHamiltonian, assemble
from .protocol import (BARE_STRING, SECTOR_GROUND, BranchRegister, ProtocolResult, prepare,
                       measured_amplitude, return_amplitude, rotate, run_fringe, run_sequence)

__version__ = "0.1.0"
