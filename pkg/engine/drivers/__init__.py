"""Spatially modulated rough drivers and the driver metric."""

from engine.drivers.distance import driver_distance, driver_norm
from engine.drivers.drivers import (
    RoughDriver,
    ScalarDriver,
    SphericalDriver,
    antisymmetric,
    axial_vector,
    crossed_maps,
    crossed_step_operators,
    dilate_driver,
    driver_chen_defect,
    load_driver,
    make_llg_driver,
    make_scalar_driver,
    perturbed_driver,
    save_driver,
)
from engine.drivers.space import SpaceGrid, sample_profile

__all__ = [
    "RoughDriver",
    "ScalarDriver",
    "SpaceGrid",
    "SphericalDriver",
    "antisymmetric",
    "axial_vector",
    "crossed_maps",
    "crossed_step_operators",
    "dilate_driver",
    "driver_chen_defect",
    "driver_distance",
    "driver_norm",
    "load_driver",
    "make_llg_driver",
    "make_scalar_driver",
    "perturbed_driver",
    "sample_profile",
    "save_driver",
]
