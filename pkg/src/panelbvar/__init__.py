"""Bayesian panel VAR with dummy-observation priors and max-share
identification of anticipated shocks."""

__version__ = "0.1.0"

from .analysis import (
    FevdResult,
    IrfResult,
    fevd_curve,
    fevd_share,
    impulse_responses,
    summarize,
)
from .identification import (
    MaCoefficients,
    StructuralShock,
    identify_news_shock,
    identify_orthogonal_pair,
    ma_coefficients,
)
from .paneldata import (
    PanelDataset,
    PanelError,
    RegressionData,
    VariableTransform,
    apply_transforms,
    build_regression_matrices,
    load_panel,
    write_panel_csv,
)
from .pipeline import EstimationResult, estimate_panel
from .posterior import (
    PosteriorDraw,
    PosteriorMoments,
    PosteriorSampler,
    augment,
    compute_posterior_moments,
    sample_posterior,
)
from .prior import (
    Ar1Stats,
    DummyObservations,
    ar1_stats_from_panel,
    build_minnesota_dummies,
    build_soc_dummies,
    fit_ar1,
)
from .simulator import (
    NewsDgp,
    PanelTruth,
    RecoveryReport,
    default_news_dgp,
    recovery_metrics,
    simulate_panel,
)

__all__ = [
    "__version__",
    "Ar1Stats",
    "DummyObservations",
    "EstimationResult",
    "FevdResult",
    "IrfResult",
    "MaCoefficients",
    "NewsDgp",
    "PanelDataset",
    "PanelError",
    "PanelTruth",
    "PosteriorDraw",
    "PosteriorMoments",
    "PosteriorSampler",
    "RecoveryReport",
    "RegressionData",
    "StructuralShock",
    "VariableTransform",
    "apply_transforms",
    "ar1_stats_from_panel",
    "augment",
    "build_minnesota_dummies",
    "build_regression_matrices",
    "build_soc_dummies",
    "compute_posterior_moments",
    "default_news_dgp",
    "estimate_panel",
    "fevd_curve",
    "fevd_share",
    "fit_ar1",
    "identify_news_shock",
    "identify_orthogonal_pair",
    "impulse_responses",
    "load_panel",
    "ma_coefficients",
    "recovery_metrics",
    "sample_posterior",
    "simulate_panel",
    "summarize",
    "write_panel_csv",
]
