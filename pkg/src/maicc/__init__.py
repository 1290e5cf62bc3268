"""Loss estimation of the Kullback-Leibler discrepancy in multivariate regression.

AIC, AICc and their modified versions (MAIC, MAICc) viewed as estimators of
the realized discrepancy of the plug-in predictive distribution, with the
normal-mean loss estimators they build on and a seeded Monte Carlo harness.
"""

from .criteria import (
    CriterionName,
    CriterionValue,
    ModelDims,
    aic,
    aic_known_sigma,
    aicc,
    cbar,
    johnstone,
    maic,
    maicc,
    matsuda,
    sure_mat_regression,
    sure_vec,
    thm1_estimator,
)
from .matstat import RngStream, sample_matrix_normal, sample_wishart, trace_inv_gram, trace_inv_gram_sq
from .regression import (
    FitResult,
    RegressionTruth,
    fit_mle,
    generate_response,
    kl_discrepancy,
    kl_discrepancy_known_sigma,
)

__version__ = "0.1.0"
