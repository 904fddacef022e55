import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graphdiv.core import ValidationError, dataset_from_array
from graphdiv.experiments import (
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
    theory_value,
)
from graphdiv.measures import TimeSeries, rdi


def binomial_3sigma(n, p):
    return 3 * math.sqrt(n * p * (1 - p)) / n


class TestRng:
    def test_same_seed_same_stream(self):
        a = Rng(7).generator().random(5)
        b = Rng(7).generator().random(5)
        assert np.array_equal(a, b)

    def test_children_distinct(self):
        a = Rng(7).child(0).generator().random(5)
        b = Rng(7).child(1).generator().random(5)
        assert not np.array_equal(a, b)


class TestMarkovClip:
    def test_atoms_and_ranges(self):
        ds = gen_markov_clip(10000, 0.9, 0.8, 0.7, Rng(1))
        x, z, y = ds.values.T
        assert ds.col_names == ("x", "z", "y")
        # clipped values repeat the threshold bit for bit
        frac_y_clip = np.mean(y == 0.7)
        assert abs(frac_y_clip - 0.3) <= binomial_3sigma(10000, 0.3)
        assert np.all(x <= 0.9) and np.all(z <= 0.8) and np.all(y <= 0.7)
        assert np.all(x > 0)
        assert np.all(z == np.minimum(x, 0.8))
        assert np.all(y == np.minimum(z, 0.7))

    def test_threshold_order_enforced(self):
        with pytest.raises(ValidationError):
            gen_markov_clip(10, 0.7, 0.8, 0.9, Rng(0))


class TestAwgnBsc:
    def test_channel_shares_and_atom(self):
        ds = gen_awgn_bsc(10000, 0.3, 0.2, 0.5, 1.0, 0.1, Rng(2), powers=True)
        x, y, z, z2, z3 = ds.values.T
        discrete = z >= 0.2
        assert abs(np.mean(discrete) - 0.8) <= binomial_3sigma(10000, 0.8)
        assert abs(np.mean(z == 0.3) - 0.7) <= binomial_3sigma(10000, 0.7)
        # BSC rows are exact bits; powers are exact deterministic functions
        assert set(np.unique(x[discrete])) == {0.0, 1.0}
        assert set(np.unique(y[discrete])) == {0.0, 1.0}
        assert np.array_equal(z2, z * z)
        assert np.array_equal(z3, z * z * z)

    def test_param_validation(self):
        with pytest.raises(ValidationError):
            gen_awgn_bsc(10, 0.2, 0.3, 0.5, 1.0, 0.1, Rng(0))
        with pytest.raises(ValidationError):
            gen_awgn_bsc(10, 0.3, 0.2, 1.5, 1.0, 0.1, Rng(0))


class TestTheoryValue:
    def test_paper_value(self):
        assert awgn_bsc_theory_cmi(0.3, 0.2, 0.5, 1.0, 0.1) == pytest.approx(
            0.53241, abs=1e-4
        )

    def test_error_free_limit_is_binary_entropy(self):
        # beta -> 0, alpha -> 0+: the BSC becomes error-free, value -> h(p)
        v = awgn_bsc_theory_cmi(1e-6, 1e-6, 0.3, 1.0, 0.1)
        assert v == pytest.approx(binary_entropy(0.3), abs=1e-3)

    def test_alpha_equals_beta_closed_form(self):
        # empty integral leaves the AWGN and atom terms only
        a, p, sx, sn = 0.25, 0.5, 1.0, 0.1
        v = awgn_bsc_theory_cmi(a, a, p, sx, sn)
        expected = 0.5 * a * math.log(1 + (sx / sn) ** 2) + (1 - a) * (
            math.log(2) - binary_entropy(a)
        )
        assert v == pytest.approx(expected, abs=1e-12)

    def test_monotone_in_snr(self):
        vals = [awgn_bsc_theory_cmi(0.3, 0.2, 0.5, s, 0.1) for s in (0.5, 1.0, 2.0)]
        assert vals[0] < vals[1] < vals[2]

    def test_experiment_mapping(self):
        assert theory_value(1) == 0.0
        assert theory_value(3) == 0.0
        assert theory_value(4) == pytest.approx(1.3460233, abs=1e-6)
        assert theory_value(5) is None


class TestIndepMixture:
    def test_atom_frequency(self):
        ds = gen_indep_mixture_tc(10000, (1.0, 0.5, 0.25), Rng(3))
        for c, atom in enumerate((1.0, 0.5, 0.25)):
            frac = np.mean(ds.values[:, c] == atom)
            assert abs(frac - 0.5) <= binomial_3sigma(10000, 0.5)

    def test_pairwise_independence_via_binned_plugin(self):
        from graphdiv.baselines import binning_gdm, BinningRule
        from graphdiv.core import mi_dag

        ds = gen_indep_mixture_tc(10000, (1.0, 0.5, 0.25), Rng(4))
        for a, b in itertools.combinations(range(3), 2):
            v = binning_gdm(ds, mi_dag([a], [b]), BinningRule(100))
            assert v <= 0.02


class TestZeroInflated:
    def test_shared_mask(self):
        ds = gen_zero_inflated(5000, 0.6, 0.6, Rng(5))
        x1, x2, x3, x4 = ds.values.T
        assert np.array_equal(x1 == 0.0, x2 == 0.0)
        assert np.array_equal(x3 == 0.0, x4 == 0.0)
        assert abs(np.mean(x1 == 0.0) - 0.4) <= binomial_3sigma(5000, 0.4)
        nz = x1[x1 != 0.0]
        assert np.all((nz >= 0.5) & (nz <= 1.5))


class TestDynamicsNetwork:
    def test_erasure_share(self):
        adj = random_dag_adjacency(5, 0.3, Rng(6))
        ts, _ = gen_dynamics_network(4000, adj, 0.2, 0.5, Rng(7))
        share = np.mean(ts.values == 0.0)
        assert abs(share - 0.5) <= 0.02

    def test_empty_network_iid(self):
        ts, _ = gen_dynamics_network(10000, np.zeros((3, 3)), 0.2, 0.0, Rng(8))
        for i, j in [(0, 1), (1, 2), (2, 0)]:
            assert abs(rdi(ts, i, j)) <= 0.05

    def test_chain_direction(self):
        adj = np.zeros((2, 2))
        adj[0, 1] = 1
        ts, _ = gen_dynamics_network(10000, adj, 0.03**0.5, 0.0, Rng(9))
        assert rdi(ts, 0, 1) > rdi(ts, 1, 0)

    def test_validation(self):
        with pytest.raises(ValidationError):
            gen_dynamics_network(10, np.zeros((2, 3)), 0.1, 0.0, Rng(0))
        with pytest.raises(ValidationError):
            gen_dynamics_network(10, np.zeros((2, 2)), 0.1, 1.0, Rng(0))

    def test_random_dag_is_acyclic(self):
        adj = random_dag_adjacency(8, 0.4, Rng(10))
        # forward-edge construction: some topological order must exist
        remaining = set(range(8))
        a = adj.copy()
        while remaining:
            sinkless = [i for i in remaining if not any(a[j, i] for j in remaining)]
            assert sinkless
            remaining -= set(sinkless)


class TestFeatureSelection:
    def test_shapes_and_atoms(self):
        features, y = gen_feature_selection(4000, Rng(11))
        assert features.n_cols == 15
        assert np.all((y >= -1.0) & (y <= 1.0))
        for c in range(15):
            col = features.values[:, c]
            atom = col.max()
            assert 0.25 <= atom <= 0.3
            frac = np.mean(col == atom)
            assert 0.35 <= frac <= 0.43  # gaussian upper tail at 0.25..0.30


class TestAuroc:
    def brute(self, scores, labels):
        pos = [s for s, l in zip(scores, labels) if l == 1]
        neg = [s for s, l in zip(scores, labels) if l == 0]
        total = 0.0
        for p in pos:
            for q in neg:
                total += 1.0 if p > q else (0.5 if p == q else 0.0)
        return total / (len(pos) * len(neg))

    def test_example(self):
        assert auroc([0.9, 0.8, 0.7, 0.1], [1, 0, 1, 0]) == 0.75

    def test_perfect_and_tied(self):
        assert auroc([5.0, 4.0, 1.0, 0.0], [1, 1, 0, 0]) == 1.0
        assert auroc([1.0, 1.0, 1.0, 1.0], [1, 0, 1, 0]) == 0.5

    def test_degenerate_labels(self):
        with pytest.raises(ValidationError):
            auroc([1.0, 2.0], [1, 1])

    @given(
        st.lists(st.floats(-5, 5), min_size=4, max_size=20),
        st.integers(0, 2**31),
    )
    @settings(max_examples=60, deadline=None)
    def test_matches_pair_enumeration(self, scores, seed):
        rng = np.random.default_rng(seed)
        labels = rng.integers(0, 2, size=len(scores))
        if labels.sum() in (0, len(labels)):
            labels[0] = 1 - labels[0]
        mine = auroc(scores, labels)
        assert mine == pytest.approx(self.brute(scores, labels), abs=1e-12)
        assert auroc([-s for s in scores], labels) == pytest.approx(1.0 - mine, abs=1e-12)


class TestCmimSelect:
    def make_dataset(self, n=1500, seed=12):
        rng = np.random.default_rng(seed)
        x = rng.standard_normal((n, 4))
        y = x[:, 0] + 0.5 * x[:, 1] + 0.1 * rng.standard_normal(n)
        return dataset_from_array(np.column_stack([x, y]))

    def test_budget_one_is_argmax_mi(self):
        from graphdiv.core import mi_dag

        ds = self.make_dataset()
        picks = cmim_select(ds, 4, 1, "gdm", "cmim")
        mis = [
            evaluate_estimators(ds, mi_dag([i], [4]), ["gdm"])["gdm"] for i in range(4)
        ]
        assert picks[0][0] == int(np.argmax(mis))
        assert picks[0][1] == pytest.approx(max(mis), abs=1e-12)

    def test_duplicate_feature_not_picked_second(self):
        rng = np.random.default_rng(13)
        x0 = rng.standard_normal(1500)
        x2 = rng.standard_normal(1500)
        y = x0 + 0.2 * rng.standard_normal(1500)
        ds = dataset_from_array(np.column_stack([x0, x0.copy(), x2, y]))
        picks = cmim_select(ds, 3, 2, "gdm", "cmim")
        assert picks[0][0] == 0  # ties at equal score go to the lowest index
        assert picks[1][0] != 1  # the exact copy scores ~0 given its twin
        assert picks[1][1] > 0.0

    def test_full_budget_is_permutation(self):
        ds = self.make_dataset(600)
        picks = cmim_select(ds, 4, 4, "gdm", "cmim2")
        assert sorted(c for c, _ in picks) == [0, 1, 2, 3]

    def test_rank_scores(self):
        scores = selection_rank_scores([(3, 0.5), (0, 0.4)], range(5))
        assert list(scores) == [1.0, 0.0, 0.0, 2.0, 0.0]

    def test_validation(self):
        ds = self.make_dataset(100)
        with pytest.raises(ValidationError):
            cmim_select(ds, 4, 1, "nope")
        with pytest.raises(ValidationError):
            cmim_select(ds, 4, 9, "gdm")
        with pytest.raises(ValidationError):
            cmim_select(ds, 4, 1, "gdm", "cmim3")


class TestGrnInfer:
    def test_two_var_chain_rdi_mode(self):
        adj = np.zeros((2, 2))
        adj[0, 1] = 1
        ts, _ = gen_dynamics_network(8000, adj, 0.03**0.5, 0.0, Rng(14))
        scores = grn_infer(ts, "gdm", "rdi")
        assert np.isnan(scores[0, 0]) and np.isnan(scores[1, 1])
        assert scores[0, 1] > scores[1, 0]

    def test_crdi_needs_three_processes(self):
        ts = TimeSeries(np.random.default_rng(15).standard_normal((100, 2)))
        with pytest.raises(ValidationError):
            grn_infer(ts, "gdm", "crdi")

    def test_empty_network_degenerate_labels(self):
        ts, adj = gen_dynamics_network(500, np.zeros((3, 3)), 0.2, 0.0, Rng(16))
        scores = grn_infer(ts, "gdm", "rdi")
        off = ~np.eye(3, dtype=bool)
        with pytest.raises(ValidationError):
            auroc(scores[off], adj[off])


class TestRunConvergence:
    def test_shape_and_determinism(self):
        rep1 = run_convergence(1, [200, 400, 800], 3, ["gdm", "ksg", "bin"], 99)
        assert len(rep1.rows) == 9
        rep2 = run_convergence(1, [200, 400, 800], 3, ["gdm", "ksg", "bin"], 99)
        assert rep1.to_csv() == rep2.to_csv()
        assert rep1.header().endswith("theory")
        assert all(r.theory == 0.0 for r in rep1.rows)

    def test_auroc_kind_for_experiment_six(self):
        rep = run_convergence(6, [300], 1, ["gdm"], 7)
        assert rep.kind == "auroc"
        assert "auroc_mean" in rep.header()
        assert 0.0 <= rep.rows[0].mean <= 1.0

    def test_validation(self):
        with pytest.raises(ValidationError):
            run_convergence(9, [100], 1, ["gdm"], 0)
        with pytest.raises(ValidationError):
            run_convergence(1, [400, 200], 1, ["gdm"], 0)
        with pytest.raises(ValidationError):
            run_convergence(1, [200], 1, ["nope"], 0)

    def test_oracle_estimator_on_discrete_experiment(self):
        # binned experiment-1 data is discrete; oracle runs end to end
        rep = run_convergence(1, [300], 2, ["oracle", "bin"], 5)
        assert all(np.isfinite(r.mean) for r in rep.rows)

    def test_gdm_error_shrinks_with_n(self):
        rep = run_convergence(1, [500, 2000, 8000], 3, ["gdm"], 21)
        errs = [abs(r.mean - r.theory) for r in rep.rows]
        # monotone up to one inversion: the largest N must beat the smallest
        assert errs[-1] < errs[0]
        assert errs[-1] <= sorted(errs)[1]


class TestEvaluateEstimators:
    def test_fused_matches_separate(self):
        from graphdiv.core import cmi_dag
        from graphdiv.gdm import estimate_gdm
        from graphdiv.baselines import ksg_gdm

        ds = gen_markov_clip(800, 0.9, 0.8, 0.7, Rng(17))
        dag = cmi_dag([0], [2], [1])
        both = evaluate_estimators(ds, dag, ["gdm", "ksg"])
        assert both["gdm"] == estimate_gdm(ds, dag).value
        assert both["ksg"] == ksg_gdm(ds, dag).value

    def test_unknown_id(self):
        ds = gen_markov_clip(100, 0.9, 0.8, 0.7, Rng(18))
        from graphdiv.core import cmi_dag

        with pytest.raises(ValidationError):
            evaluate_estimators(ds, cmi_dag([0], [2], [1]), ["zap"])
