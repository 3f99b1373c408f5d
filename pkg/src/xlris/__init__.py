"""Secrecy-rate optimization for extremely large RIS-aided near-field links."""
from .ao import AoSettings, AoTrace, complexity_report, solve_no_jamming_baseline, solve_p1
from .config import ConfigError, Mode, ScenarioConfig, build_config, load_config
from .geometry import (ArrayConfig, ChannelSet, FadingParams, SceneGeometry, draw_channels,
                       rayleigh_distance)
from .precoder import InfeasibleError, P2Settings, solve_p2
from .ris import P3Settings, PhaseAlphabet, solve_p3
from .secrecy import NoiseAndLimits, Precoders, RisVector, rates_and_secrecy

__version__ = "0.1.0"
