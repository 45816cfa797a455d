"""Brown-Resnick max-stable models fitted in latent spaces built by multidimensional scaling."""

from .brown_resnick import bivariate_log_density, cov_from_theta, extremal_coefficient, pairwise_loglik
from .covariance import CovFunction, cov_inverse, cov_value
from .data import FrechetMatrix, MaximaMatrix, StationSet
from .errors import BrmdsError, NumericalError, ValidationError
from .fit_pipeline import FittedModel, GridSpec, fit_classical, fit_mds_model, holdout_experiment, select_dimension
from .gev_margins import GevParams, fit_gev_ml, fit_margins, to_frechet
from .ideal_covariance import ideal_cov_method1, ideal_cov_method2, ideal_distances
from .latent_warp import fit_warp, warp
from .madogram import extremal_matrix, f_madogram_theta, theta_mse
from .mds import classical_scaling, sammon_mds
from .simulator import SimSpec, nonstationary_scenario, simulate_field, true_theta_matrix

__version__ = "0.1.0"
