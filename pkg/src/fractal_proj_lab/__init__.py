"""fractal-proj-lab: a numerical laboratory for orthogonal projections,
intersections of projections, plane sections and visibility of fractal sets.
"""

__version__ = "0.1.0"

from .measures import DyadicCover, PointMeasure, cantor_digit_set, natural_measure, product_cover
from .scaling import ScalingFit, box_dimension, intersect_covers, interior_run, measure_estimate

__all__ = [
    "DyadicCover",
    "PointMeasure",
    "ScalingFit",
    "box_dimension",
    "cantor_digit_set",
    "intersect_covers",
    "interior_run",
    "measure_estimate",
    "natural_measure",
    "product_cover",
    "__version__",
]
