"""Photoacoustic tomography simulation and reconstruction toolkit.

Core pipeline: synthetic vasculature phantoms -> spectral wave forward
simulation -> reconstruction by time reversal or TV-regularized FISTA,
plus pixel-wise time-of-flight interpolation of sensor data into image
space and a dataset exporter feeding the companion CNN trainer.
"""

from .geometry import Grid, Medium, SensorArray, make_sensor_array, time_of_flight
from .metrics import QualityReport, psnr, ssim
from .phantoms import AugmentConfig, SyntheticPhantomSource, augment, normalize, synth_vasculature
from .pixelwise import PixelInterpTensor, pixel_interpolate, resize_sensor_data
from .recon import FistaResult, TvConfig, fista_tv, lipschitz_estimate, tv_prox
from .wavesim import (
    ImageField,
    SensorData,
    SimConfig,
    adjoint,
    forward,
    make_sim_config,
    propagate_step,
    time_reversal,
)

__version__ = "0.1.0"

__all__ = [
    "Grid",
    "Medium",
    "SensorArray",
    "make_sensor_array",
    "time_of_flight",
    "ImageField",
    "SensorData",
    "SimConfig",
    "make_sim_config",
    "propagate_step",
    "forward",
    "adjoint",
    "time_reversal",
    "PixelInterpTensor",
    "pixel_interpolate",
    "resize_sensor_data",
    "TvConfig",
    "FistaResult",
    "tv_prox",
    "lipschitz_estimate",
    "fista_tv",
    "AugmentConfig",
    "synth_vasculature",
    "augment",
    "normalize",
    "SyntheticPhantomSource",
    "QualityReport",
    "psnr",
    "ssim",
    "__version__",
]
