"""Figure rendering for collision-model CSV outputs."""

from .render import render_distance, render_generator, render_trajectory
from .tables import (
    DISTANCE_HEADER,
    GENERATOR_HEADER,
    TRAJECTORY_HEADER,
    DistanceTable,
    GeneratorTable,
    SchemaError,
    TrajectoryTable,
    load_distance,
    load_generator,
    load_trajectory,
)

__all__ = [
    "DISTANCE_HEADER",
    "GENERATOR_HEADER",
    "TRAJECTORY_HEADER",
    "DistanceTable",
    "GeneratorTable",
    "SchemaError",
    "TrajectoryTable",
    "load_distance",
    "load_generator",
    "load_trajectory",
    "render_distance",
    "render_generator",
    "render_trajectory",
]
