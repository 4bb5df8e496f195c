"""
An iron-57 layer in a thin-film cavity
======================================

Build the Delta m = 0 doublet of 57Fe from a hyperfine field, turn cavity
parameters into a collective coupling, and compare three cavity settings.
"""

import numpy as np

from inhomsus import CavityParams, EnsembleSpec, FrequencyGrid, ScenarioConfig, sweep
from inhomsus.analysis import doublet_modes, doublet_poles, peak_metrics
from inhomsus.presets import HyperfineScheme, build_fe57_scheme, cavity_coupling, field_for_splitting

B = field_for_splitting(17.0)
scheme = HyperfineScheme(B)
ens = build_fe57_scheme(scheme)
print(f"B = {B:.2f} T gives half-splitting {scheme.phi_neV():.1f} neV")
print("line detunings:", ens.arrays()[1])

six = build_fe57_scheme(HyperfineScheme(33.0, selection="all_six"))
print("all six lines at 33 T:", np.round(np.sort(six.arrays()[1]), 2))

grid = FrequencyGrid(-60, 60, 2401)
for dc in (-4.0, 0.0, 4.0):
    G = cavity_coupling(CavityParams(dc, kappa=2.0, amplitude=10.0))
    spec = sweep(ScenarioConfig(G, ens, grid))
    m = peak_metrics(spec)
    poles = doublet_poles(G.j, G.gamma_big, 17.0)
    print(f"Delta_C = {dc:+.0f}: J = {G.j:+.2f}, Gamma = {G.gamma_big:.2f}, "
          f"peak {m.peak:.3f} at {m.argmax:+.2f}, "
          f"poles {poles.omega_plus:.2f} and {poles.omega_minus:.2f}")

# strong coupling: the superradiant mode takes almost all of the weight
modes = doublet_modes(50.0, 5.0, 1.0)
sym = np.array([1.0, 1.0]) / np.sqrt(2)
print("overlap of the subradiant mode with (1, 1):", f"{abs(np.vdot(sym, modes.e_minus)) ** 2:.2e}")
