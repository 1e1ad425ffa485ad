"""Joint multi-carrier waveform and BD-RIS scattering-matrix design for RF wireless power transfer."""

from ._validation import ContractError, NumericalError, SignalError
from .beamforming import BDRISOptimizer, BeamformerConfig, OptimizerReport, alternating_optimize, with_direct_link
from .channel import CarrierPlan, ChannelRealization, Geometry, generate_channel_set
from .config import PRESETS, SystemConfig, dbm_to_watts, load_config, preset, watts_to_dbm
from .rectenna import RectifierParams, idc, idc_time_oracle, papr, waveform_gradient
from .ris import Topology, feasibility_map, scattering_from_impedance, total_channel
from .waveform import WaveformOptConfig, WaveformOptimizer, it_wf, smf_init

__version__ = "0.1.0"

__all__ = [
    "BDRISOptimizer",
    "BeamformerConfig",
    "CarrierPlan",
    "ChannelRealization",
    "ContractError",
    "Geometry",
    "NumericalError",
    "OptimizerReport",
    "PRESETS",
    "RectifierParams",
    "SignalError",
    "SystemConfig",
    "Topology",
    "WaveformOptConfig",
    "WaveformOptimizer",
    "alternating_optimize",
    "dbm_to_watts",
    "feasibility_map",
    "generate_channel_set",
    "idc",
    "idc_time_oracle",
    "it_wf",
    "load_config",
    "papr",
    "preset",
    "scattering_from_impedance",
    "smf_init",
    "total_channel",
    "waveform_gradient",
    "watts_to_dbm",
]
