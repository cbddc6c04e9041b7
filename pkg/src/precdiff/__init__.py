"""Two-sample testing of high-dimensional precision matrices with
node-wise Lasso, (s0, p)-norm statistics and multiplier bootstrap
calibration."""

__version__ = "0.1.0"

from .bootstrap import (BootstrapEnsemble, adaptive_p_value, adaptive_statistic,  # noqa: E402
                        critical_value, decide, doubly_adaptive, p_value, recycled_pvalues,
                        run_ensemble)
from .models import (DataMatrix, ModelId, PrecisionModel, build_alternative_pair,  # noqa: E402
                     build_base_precision, precision_to_covariance, sample_gaussian)
from .nodewise import NodewiseFit, fit_nodewise  # noqa: E402
from .pipeline import run_test, run_test_detailed  # noqa: E402
from .report import TestConfig, TestReport  # noqa: E402
from .stats import GroupStats, WMatrix, group_stats, s0p_norm, trivec, w_matrix  # noqa: E402

__all__ = [
    "BootstrapEnsemble", "DataMatrix", "GroupStats", "ModelId", "NodewiseFit",
    "PrecisionModel", "TestConfig", "TestReport", "WMatrix", "adaptive_p_value",
    "adaptive_statistic", "build_alternative_pair", "build_base_precision",
    "critical_value", "decide", "doubly_adaptive", "fit_nodewise", "group_stats",
    "p_value", "precision_to_covariance", "recycled_pvalues", "run_ensemble",
    "run_test", "run_test_detailed", "s0p_norm", "sample_gaussian", "trivec", "w_matrix",
]
