"""Measurement-only stabilizer-circuit laboratory on gauge-Higgs lattices."""

from .analysis import (CollapseResult, PowerLawFit, SampleStats, aggregate,
                       crossing_point, data_collapse, fit_power_law,
                       rise_midpoint, steepest_rise)
from .circuits import (Chain, CircuitConfig, Grid, RngStream, run_fs_moc,
                       run_ptfi, run_pure_gauge, run_trajectory,
                       run_zx_randomized)
from .diagnostics import DiagnosticValues, bmi, mi_vs_distance, tee, wilson_abs
from .gf2 import gf2_rank
from .lattice import (Lattice, OperatorSupport, Region, bmi_regions,
                      bmi_regions_at, build_lieb_lattice, tee_regions,
                      wilson_line)
from .mbqc import RbhLattice, TorusLattice, build_rbh_tableau, measure_rbh_layers
from .percolation import (BondLattice, ThresholdEstimate, estimate_threshold,
                          spanning_probability, surface_threshold_from_duality)
from .stabilizer import (GroupSolver, PauliString, Tableau, entanglement_entropy,
                         group_contains, measure_pauli)

__version__ = "0.1.0"
