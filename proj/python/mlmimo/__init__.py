"""Detection of multilevel symbols over real MIMO channels."""

from ._core import (
    SNR_DEFINITION,
    ChannelModel,
    Constellation,
    DetectorNetwork,
    Error,
    EvalReport,
    EvalRow,
    RngStream,
    calibrate_snr,
    channel_id,
    count_parameters,
    detect,
    diagnostics,
    evaluate,
    exhaustive_search,
    generate_channel,
    load_checkpoint,
    mmse_detect,
    run_experiment,
    sigma_c,
    snr_to_sigma,
    sphere_decode,
    transmit,
    wilson_interval,
    zf_detect,
)

__all__ = [
    "SNR_DEFINITION",
    "ChannelModel",
    "Constellation",
    "DetectorNetwork",
    "Error",
    "EvalReport",
    "EvalRow",
    "RngStream",
    "calibrate_snr",
    "channel_id",
    "count_parameters",
    "detect",
    "diagnostics",
    "evaluate",
    "exhaustive_search",
    "generate_channel",
    "load_checkpoint",
    "mmse_detect",
    "run_experiment",
    "sigma_c",
    "snr_to_sigma",
    "sphere_decode",
    "transmit",
    "wilson_interval",
    "zf_detect",
]
