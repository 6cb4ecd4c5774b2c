"""Level-set fire-front forecasting with a hierarchical Bayesian speed model."""
__version__ = "0.1.0"

from .errors import ConfigError, DataError, FirefrontError, NumericalError
from .grid import BoundarySet, GridSpec, ScalarField, circle_ring, polygon_area
from .series import ObservationSeries
from .geometry import (count_regions, extract_zero_contour, gradient_norm, point_in_region,
                       points_inside, signed_distance_field)
from .raster import bilinear_resample, slope_aspect, standardize
from .levelset import (EvolutionConfig, add_observation_noise, evolve_normal, generate_merging_circles,
                       generate_vshape, north_bias_speed, redistance)
from .basis import (BasisMatrix, CovariateMatrix, exponential_basis, exponential_correlation,
                    leading_eigenbasis, speed_field)
from .evaluation import (ScoreReport, boundary_coverage, credible_band, mean_threat_score,
                         threat_score)
