"""Electro-optic modulator simulator based on electrically switched cavity EIT."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .params import (  # noqa: F401
    DeviceParams, MediumParams, CavityParams, MechParams, SystemState,
    coulomb_eta, validate, load_config, params_from_mapping, fig2_params, fig3_params,
)
from .steady import (  # noqa: F401
    cmo_displacement, cavity_detuning, cavity_amplitude, photon_number, effective_decay,
    chi_steady, im_chi_resonant, absorption_band,
)
from .synthesis import (  # noqa: F401
    DriveWaveform, TargetWaveform, gen_waveform, voltage_for_absorption, compile_target,
)
from .dynamics import SolverConfig, Trajectory, simulate, simulate_many  # noqa: F401
from .analysis import (  # noqa: F401
    ModulationMetrics, SpectrumTable, extinction_ratio, eit_width, polariton, spectrum_sweep,
    modulation_metrics,
)
