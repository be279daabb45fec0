"""K-user cyclic Z-interference channel with feedback: LD schemes, capacity formulas, Gaussian gaps."""

from .ld_channel import ChannelUse, ConfigError, LdConfig, LevelWord, channel_step, feedback_view, partition
from .ld_schemes import (
    MessageBank,
    SchemeResult,
    WrongRegimeError,
    run_global_fb,
    run_very_strong,
    run_very_weak,
    run_weak,
    verify_decode,
)

__version__ = "0.1.0"
