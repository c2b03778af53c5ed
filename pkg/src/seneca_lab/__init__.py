"""Small-sample discrete entropy estimation via self-consistent missing mass.

The package bundles seven entropy estimators for count data (plug-in,
Grassberger, James-Stein, Bonachela, Chao-Shen, Chao-Wang-Jost, and the
self-consistent coverage estimator), the missing-mass fixed-point solver
behind the last one, support-size estimation, and a deterministic
benchmark engine with a CLI front end.
"""
from .bench import (
    Ballot,
    FamilySpec,
    GridConfig,
    GridResult,
    PivotInterval,
    ResidualRecord,
    SettingFailure,
    SettingSummary,
    SubsampleSummary,
    TrialRecord,
    bootstrap_bca,
    bootstrap_pivot,
    borda,
    borda_pivot,
    error_stats,
    oracle_residual_scenario,
    regime_average,
    regime_pivot,
    residual_modes,
    rmse_of_errors,
    run_grid,
    subsample_bench,
)
from .distributions import (
    FAMILIES,
    TrueDistribution,
    expected_missing_mass,
    make_distribution,
    realized_missing_mass,
    true_entropy,
)
from .entropy import (
    ESTIMATORS,
    EntropyEstimate,
    entropy_bonachela,
    entropy_chao_shen,
    entropy_chao_wang_jost,
    entropy_grassberger,
    entropy_james_stein,
    entropy_plugin,
    entropy_seneca,
)
from .missing_mass import (
    SelfConsistentSolve,
    missing_mass_from_support,
    missing_mass_good_turing,
    mu,
    solve_self_consistent,
    solve_with_estimated_support,
)
from .sample import Fingerprint, SampleCounts, counts_from_labels, fingerprint, observed_support
from .seeding import derive_rng
from .support import (
    SupportEstimate,
    support_chao1,
    support_chao1_bc,
    support_from_missing_mass,
    support_risky_threshold,
)

__version__ = "0.1.0"

__all__ = [
    "Ballot",
    "ESTIMATORS",
    "EntropyEstimate",
    "FAMILIES",
    "FamilySpec",
    "Fingerprint",
    "GridConfig",
    "GridResult",
    "PivotInterval",
    "ResidualRecord",
    "SampleCounts",
    "SelfConsistentSolve",
    "SettingFailure",
    "SettingSummary",
    "SubsampleSummary",
    "SupportEstimate",
    "TrialRecord",
    "TrueDistribution",
    "bootstrap_bca",
    "bootstrap_pivot",
    "borda",
    "borda_pivot",
    "counts_from_labels",
    "derive_rng",
    "entropy_bonachela",
    "entropy_chao_shen",
    "entropy_chao_wang_jost",
    "entropy_grassberger",
    "entropy_james_stein",
    "entropy_plugin",
    "entropy_seneca",
    "error_stats",
    "expected_missing_mass",
    "fingerprint",
    "make_distribution",
    "missing_mass_from_support",
    "missing_mass_good_turing",
    "mu",
    "observed_support",
    "oracle_residual_scenario",
    "realized_missing_mass",
    "regime_average",
    "regime_pivot",
    "residual_modes",
    "rmse_of_errors",
    "run_grid",
    "solve_self_consistent",
    "solve_with_estimated_support",
    "subsample_bench",
    "support_chao1",
    "support_chao1_bc",
    "support_from_missing_mass",
    "support_risky_threshold",
    "true_entropy",
    "__version__",
]
