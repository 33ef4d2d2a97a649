"""Stability-based selection of the number of factors in linear factor models.

The workflow: split the rows of a data matrix, compare the leading
eigenvector subspaces of the two halves through the sine of their largest
principal angle, average over splits to get an instability curve, and pick
the number of factors by minimizing a criterion that trades a decreasing
penalty against that curve.
"""

from .criteria import (
    CRITERION_NAMES,
    CriterionCurve,
    WeightSequence,
    evaluate_criteria,
    ic_baseline,
    sc1,
    sc2,
    sc3,
    weighted_select,
)
from .dataio import (
    DataMatrix,
    RealDataReport,
    load_csv,
    pairwise_instability,
    real_data_report,
    standardize,
    subsample_rows,
)
from .errors import (
    DegenerateColumn,
    DegenerateInput,
    FactorStabError,
    InvalidInput,
    NumericalFailure,
    ParseError,
    RankDeficient,
)
from .experiment import (
    ExperimentPlan,
    ExperimentResult,
    desk_plan,
    emit_reports,
    paper_plan,
    run_experiment,
    run_replication,
)
from .linalg import (
    EigenSystem,
    cov_eigs,
    cov_eigs_gram,
    singular_values,
    sum_sq_eigenvalues,
    sym_eig_desc,
)
from .simulate import (
    SimulatedDataset,
    SimulationConfig,
    gen_factors,
    gen_loadings,
    gen_noise,
    regime_mu,
    simulate_dataset,
)
from .stability import (
    InstabilityCurve,
    SplitPair,
    directed_sin_angle,
    ins_curve,
    leading_subspace,
    split_rows,
    symmetric_sin_angle,
)

__version__ = "0.1.0"
