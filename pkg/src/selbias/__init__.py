"""Cross-validated error rates for SVM-RFE gene-selection rules, with and without selection bias."""

__version__ = "0.1.0"

from selbias.classifiers import SvmConfig, SvmModel, centroid_corr_rule, predict, train_svm
from selbias.cv import (
    DoubleCvResult,
    ErrorTable,
    apparent_error,
    double_cv,
    external_cv,
    internal_cv,
    internal_cv_table,
    leaky_holdout,
    repeated_cv,
    screened_external_cv,
    screened_internal_cv,
    select_best_size,
)
from selbias.data import (
    FoldPlan,
    LabeledDataset,
    SyntheticSpec,
    derive_seed,
    load_dataset,
    make_folds,
    save_dataset,
    synth_gaussian,
    synth_null,
)
from selbias.oracle import (
    RateMatrix,
    bayes_classify,
    bayes_rule,
    conditional_rates,
    optimal_error,
    overall_error,
    posterior,
    svm_trainer,
    unconditional_rates,
)
from selbias.selection import GeneSubset, RfePath, RfeSchedule, rank_by_weight, rfe_path, rfe_schedule, t_screen
