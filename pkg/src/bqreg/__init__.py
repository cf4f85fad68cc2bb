"""Quantile regression econometrics: OLS, check-loss QR, Bayesian QR, 2SLS
and cross-quantile slope tests, with a batch pipeline for daily series."""

from .bayes import BqrPrior, McmcConfig, asl_log_density, bqr_fit, chain_diagnostics, mixture_constants, summarize_chain
from .classical import OlsResult, QrResult, check_loss, ols_fit, qr_fit
from .endogeneity import (
    STOCK_YOGO_CRITICAL, TslsResult, bqr_2sls, build_instruments, build_iv_design, sargan_test, tsls_fit, weak_id_F,
)
from .inference import BootstrapConfig, joint_slope_test, slope_equality_test
from .model import (
    CoefficientRow, CoefficientTable, Dataset, InstrumentBlock, ModelSpec, PosteriorChain, TestResult, build_design,
)

__version__ = "0.1.0"
