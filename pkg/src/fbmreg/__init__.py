"""fbmreg: subpixel fragment registration under an fBm texture model.

Estimate rotation-scaling-translation parameters between two noisy image
fragments by maximum likelihood, bound the estimation error with the exact
Cramér-Rao lower bound, simulate correlated fragment pairs with exact joint
statistics, and benchmark estimators in reproducible Monte-Carlo campaigns.
"""

__version__ = "0.1.0"

from .crlb import (CrlbResult, OutlierVerdict, chi2_cdf_4df,
                   chi2_quantile_4df, crlb, fisher_information, outlier_test)
from .estimators import (MlEstimate, MlFbmEstimator, NccEstimator,
                         SimilarityEstimate, SsdEstimator, estimate_baseline,
                         estimate_ml)
from .exceptions import (AllStartsFailed, DegenerateFit, DegenerateModel,
                         DegenerateScore, FbmregError, InsufficientOverlap,
                         NotPositiveDefinite, SingularCovariance, SingularFim,
                         SingularSystem, UnknownTestPoint)
from .likelihood import (CentralValues, LikelihoodEval, LikelihoodWorkspace,
                         estimate_central_values, initial_texture_guess,
                         log_likelihood)
from .model import (CorrelationEngine, JointCorrelation, auto_covariance,
                    cross_covariance, d_joint_correlation, joint_correlation)
from .params import (Fragment, FullParams, PARAM_NAMES, RstParams,
                     TextureParams, fragment_coords)
from .screening import (ScreeningReport, classify, isotropy_test,
                        normality_test)
from .simulate import (NoiseModel, TestPoint, noise_variance_for_fragment,
                       simulate_pair, test_point)
from .transform import rst_forward, rst_inverse

__all__ = [
    "AllStartsFailed", "CentralValues", "CorrelationEngine", "CrlbResult",
    "DegenerateFit", "DegenerateModel", "DegenerateScore", "FbmregError",
    "Fragment", "FullParams", "InsufficientOverlap", "JointCorrelation",
    "LikelihoodEval", "LikelihoodWorkspace", "MlEstimate", "MlFbmEstimator",
    "NccEstimator", "NoiseModel", "NotPositiveDefinite", "OutlierVerdict",
    "PARAM_NAMES", "RstParams", "ScreeningReport", "SimilarityEstimate",
    "SingularCovariance", "SingularFim", "SingularSystem", "SsdEstimator",
    "TestPoint", "TextureParams", "UnknownTestPoint", "auto_covariance",
    "chi2_cdf_4df", "chi2_quantile_4df", "classify", "crlb",
    "cross_covariance", "d_joint_correlation", "estimate_baseline",
    "estimate_central_values", "estimate_ml", "fisher_information",
    "fragment_coords", "initial_texture_guess", "isotropy_test",
    "joint_correlation", "log_likelihood", "noise_variance_for_fragment",
    "normality_test", "outlier_test", "rst_forward", "rst_inverse",
    "simulate_pair", "test_point",
]
