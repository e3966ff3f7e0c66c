"""Granular-ball least-squares twin SVMs (GBLSTSVM, LS-GBLSTSVM) and the LSTSVM baseline."""

from .dataset import (
    DataError,
    Dataset,
    NormParams,
    gen_crossplane,
    gen_ndc,
    inject_label_noise,
    load_csv,
    minmax_normalize,
    train_test_split,
    write_csv,
)
from .eval import (
    AccuracyTable,
    Grid,
    accuracy,
    average_ranks,
    friedman,
    kfold_grid_search,
    full_grid,
    quick_grid,
    wilcoxon_signed_rank,
    win_tie_loss,
)
from .granular import BallSet, GranularBall, ball_from_members, generate_balls, purity, split_two_means
from .kernel import KernelSpec, gram, kernel_value
from .models import (
    HyperParams,
    KernelPlanePair,
    PlanePair,
    TrainedModel,
    classify,
    fit_gblstsvm_kernel,
    fit_gblstsvm_linear,
    fit_lsgblstsvm_kernel,
    fit_lsgblstsvm_linear,
    fit_lstsvm,
    train_pipeline,
)
from .solver import SolverConfig, SolverError, qp_coordinate_ascent, solve_spd

__version__ = "0.1.0"
