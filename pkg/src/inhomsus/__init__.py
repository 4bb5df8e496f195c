"""Collective susceptibility of inhomogeneously broadened ensembles in a 1D waveguide."""

__version__ = "0.1.0"

from .core import (CavityParams, CollectiveCoupling, ConfigError, DistributionSpec, EnsembleSpec,
                   FrequencyGrid, ScenarioConfig, SubEnsemble, Transition, Variant,
                   convert_units, dump_config, parse_config)
from .specfun import gaussian_lorentzian_average, wofz
from .response import (PoleOnGridError, Spectrum, collective_chi, layer_response, naive_lamb_chi,
                       sweep, sweep_variants)
from .distributions import (discretize_distribution, distribution_response,
                            gaussian_isomer_response, gaussian_magnetic_response,
                            quadrature_response_oracle)
from .analysis import doublet_modes, doublet_poles, peak_metrics
from .dynamics import DriveEnvelope, ModeTrajectory, impulse_response_spectrum, integrate_eom
from .presets import HyperfineScheme, build_fe57_scheme, cavity_coupling, paper_preset
