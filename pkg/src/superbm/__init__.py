"""Branching-particle simulation and verification toolkit for super-Brownian motion.

The package pairs an event-driven branching Brownian particle system (mass
1/N, binary branching at rate 2*alpha*N) with closed-form moment and Fourier
martingale oracles, and a statistical harness that checks the almost-sure
scaling behaviour of the normalized measure at desk scale.
"""
from .params import FourierMode, ModelParams
from .particles import ParticleCloud, SimConfig, advance, init_cloud, integrate
from .testfunctions import (
    ConstantOne,
    CosineMode,
    GaussianBump,
    IndicatorBox,
    make_test_function,
)

__version__ = "0.1.0"

__all__ = [
    "FourierMode",
    "ModelParams",
    "ParticleCloud",
    "SimConfig",
    "advance",
    "init_cloud",
    "integrate",
    "ConstantOne",
    "CosineMode",
    "GaussianBump",
    "IndicatorBox",
    "make_test_function",
    "__version__",
]
