"""Graph divergence measures estimated directly from samples.

The divergence between an observed joint distribution and its projection
onto a DAG factorization generalizes mutual information, conditional MI,
total correlation, multivariate MI and directed information. The coupled
k-NN estimator here works in general probability spaces: discrete columns,
continuous columns, discrete-continuous mixtures and manifold-supported
joints.
"""
from .core import (
    Dataset,
    DagSpec,
    EstimateResult,
    EstimatorConfig,
    NodeSpec,
    ParseError,
    ValidationError,
    cmi_dag,
    compensated_mean,
    dag_from_json,
    dag_to_json,
    dataset_from_array,
    load_dataset,
    mi_dag,
    save_dataset,
    tc_dag,
    validate_dag,
)
from .knn import SubspaceIndex, build_index, count_within, knn_distance
from .gdm import (
    CountBundle,
    digamma,
    estimate_gdm,
    gather_counts,
    plug_in_gdm_discrete,
    resolve_k,
)
from .baselines import (
    BinningRule,
    NoiseRule,
    binning_gdm,
    kl_entropy,
    ksg_gdm,
    sigma_h_gdm,
)
from .measures import (
    Partition,
    TimeSeries,
    cmi,
    crdi,
    di_pooled,
    directed_information,
    mi,
    mmi,
    rdi,
    rdi_pooled,
    restricted_growth_strings,
    total_correlation,
)
from .experiments import (
    ConvergenceReport,
    Rng,
    auroc,
    awgn_bsc_theory_cmi,
    binary_entropy,
    cmim_select,
    evaluate_estimators,
    gen_awgn_bsc,
    gen_dynamics_network,
    gen_feature_selection,
    gen_indep_mixture_tc,
    gen_markov_clip,
    gen_zero_inflated,
    grn_infer,
    random_dag_adjacency,
    run_convergence,
    selection_rank_scores,
)

__version__ = "0.1.0"
