"""Center-outward quantiles by optimal transport, and the risk measures built on them."""

__version__ = "0.1.0"

from .data_io import FitArchive, TimeSeriesTable, load_csv, log_returns, rolling_windows
from .errors import (AccuracyNotReached, CotriskError, DegenerateConfiguration, InsufficientData,
                     InsufficientTailPoints, InvalidArgument, InvalidData, ParseError)
from .extreme_tails import (EviEstimates, YSeries, ecdf_distance, evi_curves, hill_estimate,
                            pareto_qq_data, ridge_estimate, y_values)
from .grids import Grid, make_factorized_grid, make_polar_grid_2d, make_radial_rank_grid
from .pipeline import fit_sample
from .risk_measures import RiskReport, rho_hat, rho_tail, rho_trimmed, risk_report, risk_surface
from .simulate import (EllipticalSpec, sample_gaussian, sample_hyperbolic, sample_student_t,
                       true_elliptical_quantile)
from .smooth_quantile import (CenterOutwardFit, fit_from_pairs, jacobian_det, psi_max,
                              smoothed_potential, smoothed_quantile, solve_lambda)
from .transport import Coupling, Sample, average_couplings, solve_assignment
from .volumes import elliptical_volume, empirical_volume, volume_curve
