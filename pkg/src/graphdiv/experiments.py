"""Synthetic generators, closed-form targets and the evaluation harness.

Six benchmark settings exercise the estimators on mixture distributions:
a clipped Markov chain (CMI target 0), an AWGN/BSC channel switch with the
conditioning variable on a cubic manifold, independent atom-or-uniform
mixtures (TC target 0), correlated zero-inflation (TC target 2*h(0.6)),
causal network recovery on an erased tanh dynamical system, and feature
selection for a cosine target over clipped Gaussians.

Every generator is deterministic given its Rng; distinct trials use the
documented child rule (seed sequence spawn keys), so streams never overlap.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    Dataset,
    EstimatorConfig,
    ValidationError,
    cmi_dag,
    compensated_mean,
    dataset_from_array,
    mi_dag,
    tc_dag,
)
from .gdm import (
    digamma,
    gather_counts,
    plug_in_gdm_discrete,
    resolve_k,
    zeta_from_counts,
)
from .baselines import BinningRule, NoiseRule, binning_gdm, sigma_h_gdm
from .measures import TimeSeries, rdi_pooled

__all__ = [
    "Rng",
    "ESTIMATOR_IDS",
    "evaluate_estimators",
    "gen_markov_clip",
    "gen_awgn_bsc",
    "awgn_bsc_theory_cmi",
    "gen_indep_mixture_tc",
    "gen_zero_inflated",
    "gen_dynamics_network",
    "random_dag_adjacency",
    "gen_feature_selection",
    "binary_entropy",
    "auroc",
    "cmim_select",
    "selection_rank_scores",
    "grn_infer",
    "ReportRow",
    "ConvergenceReport",
    "run_convergence",
]

ESTIMATOR_IDS = ("gdm", "ksg", "bin", "sigma_h", "oracle")


@dataclass(frozen=True)
class Rng:
    """Seeded stream with a documented split rule.

    child(i) appends i to the spawn key of the underlying seed sequence, so
    children of one seed never share a stream. Identical (seed, path) gives
    an identical stream within this implementation; no cross-implementation
    reproducibility is promised.
    """

    seed: int
    path: tuple[int, ...] = ()

    def child(self, index: int) -> "Rng":
        return Rng(self.seed, self.path + (int(index),))

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=self.path))


def evaluate_estimators(
    dataset: Dataset,
    dag,
    estimator_ids,
    config: EstimatorConfig = EstimatorConfig(),
    bin_m: int = 20,
    noise_seed: int = 0,
) -> dict[str, float]:
    """Value of each named estimator on one dataset/DAG pair.

    gdm and ksg share a single neighbor-count pass when both are requested.
    """
    ids = list(estimator_ids)
    for est in ids:
        if est not in ESTIMATOR_IDS:
            raise ValidationError(f"unknown estimator id {est!r}")
    out: dict[str, float] = {}
    knn_ids = [e for e in ids if e in ("gdm", "ksg")]
    if knn_ids:
        k = resolve_k(config, dataset.n_rows)
        bundle = gather_counts(dataset, dag, k)
        parentless = dag.n_parentless()
        n = dataset.n_rows
        if "gdm" in knn_ids:
            zeta = zeta_from_counts(bundle, dag, use_digamma=False)
            out["gdm"] = compensated_mean(zeta) + (parentless - 1) * math.log(n)
        if "ksg" in knn_ids:
            zeta = zeta_from_counts(bundle, dag, use_digamma=True)
            out["ksg"] = compensated_mean(zeta) + (parentless - 1) * digamma(float(n))
    if "bin" in ids:
        out["bin"] = binning_gdm(dataset, dag, BinningRule(bin_m))
    if "sigma_h" in ids:
        out["sigma_h"] = sigma_h_gdm(dataset, dag, config, NoiseRule(seed=noise_seed))
    if "oracle" in ids:
        out["oracle"] = plug_in_gdm_discrete(dataset, dag)
    return {e: out[e] for e in ids}


# ---------------------------------------------------------------------------
# generators


def gen_markov_clip(n: int, alpha1: float, alpha2: float, alpha3: float, rng: Rng) -> Dataset:
    """X-Z-Y Markov chain of clipped uniforms; columns x, z, y.

    X = min(alpha1, U(0,1)), Z = min(X, alpha2), Y = min(Z, alpha3). Clipped
    entries repeat the threshold float bit for bit. I(X;Y|Z) = 0.
    """
    if not 0.0 < alpha3 < alpha2 < alpha1 < 1.0:
        raise ValidationError("need 0 < alpha3 < alpha2 < alpha1 < 1")
    g = rng.generator()
    x = np.minimum(alpha1, g.random(n))
    z = np.minimum(x, alpha2)
    y = np.minimum(z, alpha3)
    return dataset_from_array(np.column_stack([x, z, y]), ("x", "z", "y"))


def gen_awgn_bsc(
    n: int,
    alpha: float,
    beta: float,
    p: float,
    sigma_x: float,
    sigma_n: float,
    rng: Rng,
    powers: bool = False,
) -> Dataset:
    """Channel switch: AWGN when Z < beta, else a BSC with error rate Z.

    Z = min(alpha, U(0,1)). AWGN rows: X ~ N(0, sigma_x^2), Y = X + noise.
    BSC rows: X ~ Bern(p) in {0.0, 1.0}, Y = X xor Bern(Z). With powers,
    exact Z^2 and Z^3 columns put the conditioning variable on a
    one-dimensional manifold inside three coordinates.
    """
    if not 0.0 < beta < alpha < 1.0:
        raise ValidationError("need 0 < beta < alpha < 1")
    if not 0.0 < p < 1.0:
        raise ValidationError("need 0 < p < 1")
    if sigma_x <= 0 or sigma_n <= 0:
        raise ValidationError("deviations must be positive")
    g = rng.generator()
    z = np.minimum(alpha, g.random(n))
    awgn = z < beta
    x_gauss = g.normal(0.0, sigma_x, n)
    noise = g.normal(0.0, sigma_n, n)
    x_bit = (g.random(n) < p).astype(np.float64)
    err = (g.random(n) < z).astype(np.float64)
    x = np.where(awgn, x_gauss, x_bit)
    y = np.where(awgn, x_gauss + noise, np.abs(x_bit - err))
    cols = [x, y, z]
    names = ["x", "y", "z"]
    if powers:
        cols += [z * z, z * z * z]
        names += ["z2", "z3"]
    return dataset_from_array(np.column_stack(cols), tuple(names))


def binary_entropy(x: float) -> float:
    """h(x) = -x ln x - (1-x) ln(1-x), with 0 ln 0 = 0."""
    if not 0.0 <= x <= 1.0:
        raise ValidationError(f"binary entropy argument out of [0,1]: {x}")
    total = 0.0
    if x > 0.0:
        total -= x * math.log(x)
    if x < 1.0:
        total -= (1.0 - x) * math.log(1.0 - x)
    return total


def _adaptive_simpson(f, a, b, tol, fa, fm, fb, whole, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    if depth <= 0 or abs(left + right - whole) <= 15.0 * tol:
        return left + right + (left + right - whole) / 15.0
    return _adaptive_simpson(f, a, m, tol / 2.0, fa, flm, fm, left, depth - 1) + \
        _adaptive_simpson(f, m, b, tol / 2.0, fm, frm, fb, right, depth - 1)


def adaptive_simpson(f, a: float, b: float, tol: float = 1e-8) -> float:
    """Adaptive Simpson quadrature to absolute tolerance tol."""
    if b < a:
        raise ValidationError("integration bounds reversed")
    if a == b:
        return 0.0
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _adaptive_simpson(f, a, b, tol, fa, fm, fb, whole, 50)


def awgn_bsc_theory_cmi(
    alpha: float, beta: float, p: float, sigma_x: float, sigma_n: float
) -> float:
    """Closed-form I(X;Y|Z) of the channel switch, in nats.

    (beta/2) ln(1 + sigma_x^2/sigma_n^2)
      + integral_beta^alpha [ h(z(1-p) + p(1-z)) - h(z) ] dz
      + (1-alpha) [ h(alpha(1-p) + p(1-alpha)) - h(alpha) ]
    """
    if not 0.0 < beta <= alpha < 1.0:
        raise ValidationError("need 0 < beta <= alpha < 1")
    if not 0.0 < p < 1.0:
        raise ValidationError("need 0 < p < 1")
    if sigma_x <= 0 or sigma_n <= 0:
        raise ValidationError("deviations must be positive")
    awgn_term = 0.5 * beta * math.log(1.0 + (sigma_x / sigma_n) ** 2)

    def integrand(z: float) -> float:
        return binary_entropy(z * (1.0 - p) + p * (1.0 - z)) - binary_entropy(z)

    bsc_integral = adaptive_simpson(integrand, beta, alpha, 1e-8)
    atom_term = (1.0 - alpha) * integrand(alpha)
    return awgn_term + bsc_integral + atom_term


def gen_indep_mixture_tc(n: int, alphas, rng: Rng) -> Dataset:
    """Independent columns, each a fair coin between a fixed atom and U(0,1)."""
    alphas = [float(a) for a in alphas]
    if any(not 0.0 <= a <= 1.0 for a in alphas):
        raise ValidationError("atom values must lie in [0, 1]")
    g = rng.generator()
    cols = []
    for a in alphas:
        heads = g.random(n) < 0.5
        uniform = g.random(n)
        cols.append(np.where(heads, a, uniform))
    return dataset_from_array(
        np.column_stack(cols), tuple(f"x{i}" for i in range(len(alphas)))
    )


def gen_zero_inflated(n: int, p1: float, p2: float, rng: Rng) -> Dataset:
    """Two pairs of U(0.5, 1.5) columns, each pair erased by one shared mask.

    Rows erased in a pair are exactly 0.0 in both its columns, so the pairs
    are dependent while the pairs stay independent of each other. The total
    correlation is h(p1) + h(p2).
    """
    if not (0.0 < p1 < 1.0 and 0.0 < p2 < 1.0):
        raise ValidationError("keep probabilities must lie in (0, 1)")
    g = rng.generator()
    base = g.uniform(0.5, 1.5, (n, 4))
    keep1 = g.random(n) < p1
    keep2 = g.random(n) < p2
    x1 = np.where(keep1, base[:, 0], 0.0)
    x2 = np.where(keep1, base[:, 1], 0.0)
    x3 = np.where(keep2, base[:, 2], 0.0)
    x4 = np.where(keep2, base[:, 3], 0.0)
    return dataset_from_array(
        np.column_stack([x1, x2, x3, x4]), ("x1", "x2", "x3", "x4")
    )


def random_dag_adjacency(n_vars: int, density: float, rng: Rng) -> np.ndarray:
    """Random DAG adjacency (entry [i, j] = 1 means i -> j).

    Samples a random topological order, then includes each forward edge
    independently with the given probability.
    """
    g = rng.generator()
    order = g.permutation(n_vars)
    adj = np.zeros((n_vars, n_vars), dtype=np.int64)
    for a in range(n_vars):
        for b in range(a + 1, n_vars):
            if g.random() < density:
                adj[order[a], order[b]] = 1
    return adj


def gen_dynamics_network(
    t_steps: int,
    adjacency,
    sigma_noise: float,
    erase_p: float,
    rng: Rng,
) -> tuple[TimeSeries, np.ndarray]:
    """Saturating linear dynamics with additive noise and observation erasure.

    X_l(t) = tanh( sum_{j in Pa(l)} w_jl X_j(t-1) ) + N(0, sigma_noise^2),
    with weights drawn once from U(0.5, 1.5) under a random sign. After the
    whole series is generated, each entry is independently replaced by 0.0
    with probability erase_p. Returns the series and the true adjacency.
    """
    adj = np.asarray(adjacency)
    if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
        raise ValidationError("adjacency must be square")
    if sigma_noise <= 0:
        raise ValidationError("noise deviation must be positive")
    if not 0.0 <= erase_p < 1.0:
        raise ValidationError("erasure probability must lie in [0, 1)")
    n_vars = adj.shape[0]
    g = rng.generator()
    signs = np.where(g.random((n_vars, n_vars)) < 0.5, -1.0, 1.0)
    weights = g.uniform(0.5, 1.5, (n_vars, n_vars)) * signs * (adj != 0)
    x = np.empty((t_steps, n_vars))
    x[0] = g.normal(0.0, sigma_noise, n_vars)
    for t in range(1, t_steps):
        x[t] = np.tanh(x[t - 1] @ weights) + g.normal(0.0, sigma_noise, n_vars)
    erased = g.random((t_steps, n_vars)) < erase_p
    x = np.where(erased, 0.0, x)
    return TimeSeries(x), adj.astype(np.int64)


def gen_feature_selection(n: int, rng: Rng) -> tuple[Dataset, np.ndarray]:
    """15 clipped Gaussians; the target is cos of the sum of the first five.

    Clip thresholds are drawn once per dataset from U(0.25, 0.3), so every
    feature carries an atom with roughly 0.38..0.40 mass. Only features
    0..4 are relevant.
    """
    if n < 1:
        raise ValidationError("need at least one sample")
    g = rng.generator()
    alphas = g.uniform(0.25, 0.3, 15)
    x = np.minimum(g.normal(0.0, 1.0, (n, 15)), alphas)
    y = np.cos(x[:, :5].sum(axis=1))
    features = dataset_from_array(x, tuple(f"x{i + 1}" for i in range(15)))
    return features, y


# ---------------------------------------------------------------------------
# evaluation machinery


def auroc(scores, labels) -> float:
    """Probability a random positive outscores a random negative (ties 1/2).

    Midrank formula; raises on degenerate labels (all positive or all
    negative).
    """
    s = np.asarray(scores, dtype=np.float64).ravel()
    lab = np.asarray(labels).ravel()
    if s.shape != lab.shape:
        raise ValidationError("scores and labels must have equal length")
    if not np.all((lab == 0) | (lab == 1)):
        raise ValidationError("labels must be 0 or 1")
    n_pos = int(np.sum(lab == 1))
    n_neg = int(np.sum(lab == 0))
    if n_pos == 0 or n_neg == 0:
        raise ValidationError("need at least one positive and one negative label")
    order = np.argsort(s, kind="mergesort")
    ranks = np.empty(len(s), dtype=np.float64)
    sorted_scores = s[order]
    i = 0
    while i < len(s):
        j = i
        while j + 1 < len(s) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    u = float(np.sum(ranks[lab == 1])) - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


def cmim_select(
    dataset: Dataset,
    target_col: int,
    budget: int,
    cmi_backend: str = "gdm",
    variant: str = "cmim2",
    config: EstimatorConfig = EstimatorConfig(),
    bin_m: int = 20,
    noise_seed: int = 0,
) -> list[tuple[int, float]]:
    """Greedy feature selection by conditional mutual information.

    The first pick maximizes I(X_i; Y). Later picks maximize
    f(X_i, S) = min_{j in S} I(X_i; Y | X_j)   (cmim)
    f(X_i, S) = sum_{j in S} I(X_i; Y | X_j)   (cmim2)
    with ties broken toward the lowest column index. Returns (column, score)
    in pick order.
    """
    if variant not in ("cmim", "cmim2"):
        raise ValidationError(f"unknown variant {variant!r}")
    if cmi_backend not in ESTIMATOR_IDS:
        raise ValidationError(f"unknown estimator id {cmi_backend!r}")
    features = [c for c in range(dataset.n_cols) if c != target_col]
    if not 1 <= budget <= len(features):
        raise ValidationError(f"budget must lie in [1, {len(features)}]")

    def value(dag) -> float:
        return evaluate_estimators(
            dataset, dag, [cmi_backend], config, bin_m, noise_seed
        )[cmi_backend]

    pair_cache: dict[tuple[int, int], float] = {}

    def pair_cmi(i: int, j: int) -> float:
        if (i, j) not in pair_cache:
            pair_cache[(i, j)] = value(cmi_dag([i], [target_col], [j]))
        return pair_cache[(i, j)]

    mi_scores = {i: value(mi_dag([i], [target_col])) for i in features}
    selected: list[tuple[int, float]] = []
    remaining = list(features)
    first = max(remaining, key=lambda i: (mi_scores[i], -i))
    selected.append((first, mi_scores[first]))
    remaining.remove(first)
    while len(selected) < budget:
        chosen_cols = [c for c, _ in selected]
        reducer = min if variant == "cmim" else sum
        scores = {
            i: reducer(pair_cmi(i, j) for j in chosen_cols) for i in remaining
        }
        pick = max(remaining, key=lambda i: (scores[i], -i))
        selected.append((pick, scores[pick]))
        remaining.remove(pick)
    return selected


def selection_rank_scores(selection, feature_cols) -> np.ndarray:
    """Turn a pick order into AUROC scores: earlier pick is higher, the
    unselected features share the bottom rank."""
    cols = list(feature_cols)
    scores = np.zeros(len(cols))
    n_sel = len(selection)
    for pos, (col, _) in enumerate(selection):
        scores[cols.index(col)] = n_sel - pos
    return scores


def _grn_scores_multi(
    ts: TimeSeries,
    backends,
    mode: str,
    config: EstimatorConfig,
    bin_m: int,
    noise_seed: int,
) -> dict[str, np.ndarray]:
    n_vars = ts.n_vars
    rdi_scores = {b: np.full((n_vars, n_vars), np.nan) for b in backends}
    for i in range(n_vars):
        for j in range(n_vars):
            if i == j:
                continue
            data, dag = rdi_pooled(ts, i, j)
            vals = evaluate_estimators(data, dag, backends, config, bin_m, noise_seed)
            for b in backends:
                rdi_scores[b][i, j] = vals[b]
    if mode == "rdi":
        return rdi_scores

    # conditioning choice can differ per backend; evaluate each distinct
    # (i, j, cond) request once for all backends that need it
    requests: dict[tuple[int, int, int], list[str]] = {}
    for b in backends:
        for i in range(n_vars):
            for j in range(n_vars):
                if i == j:
                    continue
                candidates = [kk for kk in range(n_vars) if kk not in (i, j)]
                cond = max(candidates, key=lambda kk: (rdi_scores[b][kk, j], -kk))
                requests.setdefault((i, j, cond), []).append(b)
    crdi_scores = {b: np.full((n_vars, n_vars), np.nan) for b in backends}
    for (i, j, cond), needed in requests.items():
        data, dag = rdi_pooled(ts, i, j, cond)
        vals = evaluate_estimators(data, dag, needed, config, bin_m, noise_seed)
        for b in needed:
            crdi_scores[b][i, j] = vals[b]
    return crdi_scores


def grn_infer(
    ts: TimeSeries,
    backend: str = "gdm",
    mode: str = "crdi",
    config: EstimatorConfig = EstimatorConfig(),
    bin_m: int = 20,
    noise_seed: int = 0,
) -> np.ndarray:
    """Score every ordered pair by (conditional) restricted directed information.

    crdi mode rescores each (i, j) conditioning on the node k not in {i, j}
    with the highest rdi(k -> j). The diagonal is NaN. Needs at least three
    processes in crdi mode.
    """
    if mode not in ("rdi", "crdi"):
        raise ValidationError(f"unknown mode {mode!r}")
    if mode == "crdi" and ts.n_vars < 3:
        raise ValidationError("crdi mode needs at least 3 processes")
    return _grn_scores_multi(ts, [backend], mode, config, bin_m, noise_seed)[backend]


# ---------------------------------------------------------------------------
# convergence harness

EXPERIMENT_IDS = (1, 2, 3, 4, 5, 6)


@dataclass(frozen=True)
class ReportRow:
    experiment: int
    estimator: str
    n: int
    trials: int
    mean: float
    std: float
    theory: float | None


@dataclass(frozen=True)
class ConvergenceReport:
    kind: str  # "value" or "auroc"
    rows: tuple[ReportRow, ...]

    def header(self) -> str:
        if self.kind == "auroc":
            return "experiment,estimator,n,trials,auroc_mean,auroc_std"
        return "experiment,estimator,n,trials,mean,std,theory"

    def to_csv(self) -> str:
        lines = [self.header()]
        for r in self.rows:
            base = f"{r.experiment},{r.estimator},{r.n},{r.trials},{r.mean!r},{r.std!r}"
            if self.kind == "auroc":
                lines.append(base)
            else:
                lines.append(f"{base},{r.theory!r}")
        return "\n".join(lines) + "\n"


def theory_value(experiment: int) -> float | None:
    if experiment in (1, 3):
        return 0.0
    if experiment == 2:
        return awgn_bsc_theory_cmi(0.3, 0.2, 0.5, 1.0, 0.1)
    if experiment == 4:
        return binary_entropy(0.6) + binary_entropy(0.6)
    return None


def _experiment_values(
    experiment: int,
    n: int,
    cell: Rng,
    estimators,
    config: EstimatorConfig,
    bin_m: int,
    exp5: dict,
    exp6: dict,
) -> dict[str, float]:
    data_rng = cell.child(0)
    aux_rng = cell.child(1)
    noise_seed = int(cell.child(2).generator().integers(2**62))
    if experiment == 1:
        ds = gen_markov_clip(n, 0.9, 0.8, 0.7, data_rng)
        dag = cmi_dag([0], [2], [1])
        return evaluate_estimators(ds, dag, estimators, config, bin_m, noise_seed)
    if experiment == 2:
        ds = gen_awgn_bsc(n, 0.3, 0.2, 0.5, 1.0, 0.1, data_rng, powers=True)
        dag = cmi_dag([0], [1], [2, 3, 4])
        return evaluate_estimators(ds, dag, estimators, config, bin_m, noise_seed)
    if experiment == 3:
        ds = gen_indep_mixture_tc(n, (1.0, 0.5, 0.25), data_rng)
        dag = tc_dag([[0], [1], [2]])
        return evaluate_estimators(ds, dag, estimators, config, bin_m, noise_seed)
    if experiment == 4:
        ds = gen_zero_inflated(n, 0.6, 0.6, data_rng)
        dag = tc_dag([[0], [1], [2], [3]])
        return evaluate_estimators(ds, dag, estimators, config, bin_m, noise_seed)
    if experiment == 5:
        adj = random_dag_adjacency(exp5["nodes"], exp5["density"], aux_rng)
        sigma = math.sqrt(exp5["noise"]) if exp5["noise_is_variance"] else exp5["noise"]
        ts, adj = gen_dynamics_network(n, adj, sigma, exp5["erase_p"], data_rng)
        scores = _grn_scores_multi(ts, list(estimators), "crdi", config, bin_m, noise_seed)
        off = ~np.eye(exp5["nodes"], dtype=bool)
        return {b: auroc(scores[b][off], adj[off]) for b in estimators}
    if experiment == 6:
        features, y = gen_feature_selection(n, data_rng)
        ds = dataset_from_array(
            np.column_stack([features.values, y]), features.col_names + ("y",)
        )
        labels = np.array([1] * 5 + [0] * 10)
        out = {}
        for b in estimators:
            picks = cmim_select(
                ds, 15, exp6["budget"], b, exp6["variant"], config, bin_m, noise_seed
            )
            out[b] = auroc(selection_rank_scores(picks, range(15)), labels)
        return out
    raise ValidationError(f"unknown experiment id {experiment}")


def run_convergence(
    experiment: int,
    n_list,
    trials: int,
    estimators,
    base_seed: int,
    config: EstimatorConfig = EstimatorConfig(),
    bin_m: int = 20,
    exp5_nodes: int = 12,
    exp5_density: float = 0.2,
    exp5_erase_p: float = 0.5,
    exp5_noise: float = 0.03,
    exp5_noise_is_variance: bool = True,
    exp6_budget: int = 5,
    exp6_variant: str = "cmim2",
) -> ConvergenceReport:
    """Mean and spread of every estimator over fresh trials at each N.

    Deterministic given base_seed: cell (n_index, trial) always uses
    Rng(base_seed).child(n_index).child(trial).
    """
    if experiment not in EXPERIMENT_IDS:
        raise ValidationError(f"unknown experiment id {experiment}")
    n_list = [int(n) for n in n_list]
    if sorted(n_list) != n_list:
        raise ValidationError("n_list must be ascending")
    if trials < 1:
        raise ValidationError("need at least one trial")
    estimators = list(estimators)
    for est in estimators:
        if est not in ESTIMATOR_IDS:
            raise ValidationError(f"unknown estimator id {est!r}")
    exp5 = {
        "nodes": exp5_nodes,
        "density": exp5_density,
        "erase_p": exp5_erase_p,
        "noise": exp5_noise,
        "noise_is_variance": exp5_noise_is_variance,
    }
    exp6 = {"budget": exp6_budget, "variant": exp6_variant}
    kind = "auroc" if experiment in (5, 6) else "value"
    theory = theory_value(experiment)
    root = Rng(base_seed)
    rows = []
    for n_idx, n in enumerate(n_list):
        samples = {est: [] for est in estimators}
        for trial in range(trials):
            cell = root.child(n_idx).child(trial)
            vals = _experiment_values(
                experiment, n, cell, estimators, config, bin_m, exp5, exp6
            )
            for est in estimators:
                samples[est].append(vals[est])
        for est in estimators:
            arr = np.array(samples[est])
            std = float(arr.std(ddof=1)) if trials > 1 else 0.0
            rows.append(
                ReportRow(
                    experiment=experiment,
                    estimator=est,
                    n=n,
                    trials=trials,
                    mean=float(arr.mean()),
                    std=std,
                    theory=theory,
                )
            )
    return ConvergenceReport(kind=kind, rows=tuple(rows))
