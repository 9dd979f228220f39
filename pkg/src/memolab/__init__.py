"""memolab: a seeded simulation lab for universal online learning with
unbounded losses, random measurable partitions, and their adversaries."""

from .losses import (
    LossModel,
    absolute_loss,
    default_value,
    power_loss,
    squared_loss,
    witness_pair,
    zero_one_loss,
)
from .processes import (
    AlternatingAdversarial,
    DeterministicList,
    FiniteSupportIID,
    GeometricDecay,
    MixedSupport,
    PrefixStats,
    UniformIID,
    prefix_stats,
    rollout,
    rollout_info,
)
from .spaces import (
    Cover,
    CoverCell,
    MetricSpace,
    box,
    cover_for_process,
    finite_space,
    greedy_cover,
    real_line,
    unit_interval,
)
from .frechet import FiniteLaw, FrechetProblem, check_convergence, empirical_risk, frechet_mean
from .learners import (
    ConstantDefaultRule,
    FrechetMemorizerRule,
    FunctionTarget,
    GaussianLabelTarget,
    LossTrajectory,
    MemorizationRule,
    NearestNeighborRule,
    TableTarget,
    excess_loss,
    make_rule,
    run_inductive,
    run_online,
    run_self_adaptive,
)
from .partitions import (
    TAIL_UNDETERMINED,
    PartitionSchedule,
    RandomPartition,
    ScheduleLevel,
    build_general,
    build_unit_interval,
    cell_index,
    estimate_schedule,
    make_schedule,
    mc_check_fmv,
    mc_check_lemma1,
    mc_check_tail,
    partition_from_centers,
    visited_cells,
)
from .adversary import (
    AdversarialTarget,
    DyadicCellFamily,
    FoolingTranscript,
    IntervalCellFamily,
    estimate_first_visit_thresholds,
    evaluate_defeat,
    fool_hypothesis_test,
    half_window_novelty_test,
    sample_adversarial_target,
)
from .config import ExperimentConfig, default_config, load_config
from .harness import ExperimentReport, run_experiment
from .stats import Summary, aggregate, binomial_lower, binomial_upper

__version__ = "0.1.0"
