from __future__ import annotations

import numpy as np
import pytest

from scenesynth.environment import Camera, DomainConfig

CLASSES = ("cube", "sphere", "cylinder")
SHAPES = ("box", "sphere", "cylinder")


def make_domain(
    domain: str = "source",
    count_range: tuple[int, int] = (2, 4),
    colors: tuple[int, ...] = (1, 2, 3),
    materials: tuple[int, ...] = (0, 1),
    region: tuple[float, float, float, float] = (-2.4, 2.4, -1.8, 2.8),
    separation_margin: float = 0.4,
    scales: tuple[float, ...] = (0.5, 0.65, 0.8),
    texture_noise: float = 0.0,
    ground_colors: tuple[int, ...] = (0,),
    sky_colors: tuple[int, ...] = (13,),
    light_range: tuple[float, float] = (0.8, 1.2),
    camera: Camera | None = None,
) -> DomainConfig:
    return DomainConfig(
        domain=domain,
        classes=CLASSES,
        class_shapes=SHAPES,
        colors=colors,
        materials=materials,
        count_range=count_range,
        region=region,
        separation_margin=separation_margin,
        scales=scales,
        texture_noise=texture_noise,
        ground_colors=ground_colors,
        sky_colors=sky_colors,
        light_range=light_range,
        camera=camera or Camera(),
    )


@pytest.fixture
def camera() -> Camera:
    return Camera()


@pytest.fixture
def domain_cfg() -> DomainConfig:
    return make_domain()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
