import numpy as np
import pytest

from src.tools.confounding_detector import adaptive_threshold, detect_confounding, index_interventions
from src.types import CausalDiscoveryError, Dataset, InterventionSet
from src.utils.graph_ops import DagOps
from src.utils.settings import DEFAULT_GAMMAS, DiscoveryConfig
from tests.conftest import simulate, unit_weight_spec


def latent_only_pairs(kind: str):
    """Ordered pairs with no directed path either way (in a V-structure, linked only by Z)."""
    graph = DagOps.canonical_topology(kind)
    return [
        (i, j)
        for i in range(graph.d)
        for j in range(graph.d)
        if i != j
        and j not in DagOps.descendants(graph, i)
        and i not in DagOps.descendants(graph, j)
    ]


class TestAdaptiveThreshold:

    def test_median_plus_std(self):
        deltas = np.array([[0.0, 1.0, 2.0], [3.0, 0.0, 4.0], [5.0, 6.0, 0.0]])
        off_diagonal = np.array([1.0, 2.0, 3.0, 4.0, 5.0, 6.0])

        assert adaptive_threshold(deltas) == pytest.approx(
            np.median(off_diagonal) + np.std(off_diagonal)
        )

    def test_equal_gaps_flag_nothing(self):
        deltas = np.array([[0.0, 0.3], [0.3, 0.0]])
        tau_c = adaptive_threshold(deltas)

        assert tau_c == pytest.approx(0.3)
        assert not (deltas[~np.eye(2, dtype=bool)] > tau_c).any()


class TestDetectConfounding:

    def test_missing_intervention_set(self, chain_run):
        data, interventions = chain_run

        with pytest.raises(CausalDiscoveryError, match=r"\[3\]"):
            index_interventions([s for s in interventions if s.target != 3], data.d)

    def test_duplicate_intervention_set(self, chain_run):
        data, interventions = chain_run

        with pytest.raises(CausalDiscoveryError, match="duplicate InterventionSet for X2"):
            index_interventions(list(interventions) + [interventions[2]], data.d)

    def test_matrix_shape_and_flag_rule(self, chain_run):
        data, interventions = chain_run

        mmd = detect_confounding(data, interventions)

        assert mmd.deltas.shape == (5, 5)
        assert (mmd.deltas >= 0).all()
        assert not mmd.deltas.diagonal().any()
        assert mmd.confounded_pairs == {
            (i, j) for i in range(5) for j in range(5) if i != j and mmd.deltas[i, j] > mmd.tau_c
        }
        # strictly above median + std can never exceed half of the pairs
        assert len(mmd.confounded_pairs) <= 10

    def test_max_aggregation_dominates_mean(self, chain_run):
        data, interventions = chain_run

        mean = detect_confounding(data, interventions, DiscoveryConfig(mmd_agg="mean"))
        peak = detect_confounding(data, interventions, DiscoveryConfig(mmd_agg="max"))

        assert (peak.deltas >= mean.deltas - 1e-12).all()

    def test_flow_conditional_requires_models(self, chain_run):
        data, interventions = chain_run

        with pytest.raises(CausalDiscoveryError, match="flow"):
            detect_confounding(data, interventions, DiscoveryConfig(obs_conditional="flow"))

    def test_single_variable(self, rng):
        data = Dataset(values=rng.normal(size=(50, 1)))
        intervention = InterventionSet(
            target=0, do_values=[0.0, 1.0], values=np.repeat([[0.0], [1.0]], 5, axis=0),
            per_value_counts=[5, 5],
        )

        mmd = detect_confounding(data, [intervention])

        assert mmd.confounded_pairs == set()
        assert mmd.tau_c == 0.0

    def test_json_payload(self, chain_run):
        payload = detect_confounding(*chain_run).to_dict()

        assert set(payload) == {"deltas", "tauC", "confoundedPairs"}
        assert len(payload["deltas"]) == 5

    @pytest.mark.slow
    def test_unconfounded_true_edge_is_not_flagged(self):
        below = 0
        for seed in range(5):
            data, interventions = simulate(unit_weight_spec("chain", seed=seed))
            mmd = detect_confounding(data, interventions)
            below += mmd.deltas[0, 1] < mmd.tau_c

        assert below >= 4

    @pytest.mark.slow
    def test_fork_children_gap_grows_with_confounding(self):
        for seed in range(3):
            plain = detect_confounding(*simulate(unit_weight_spec("fork", 0.0, seed)))
            confounded = detect_confounding(*simulate(unit_weight_spec("fork", 0.8, seed)))
            assert confounded.deltas[1, 2] > plain.deltas[1, 2]

    @pytest.mark.slow
    def test_gap_is_monotone_in_gamma(self):
        pairs = latent_only_pairs("vstr")
        means = []
        for gamma in DEFAULT_GAMMAS:
            gaps = []
            # Same seeds at every gamma, so only the confounder strength changes.
            for seed in range(8):
                data, interventions = simulate(
                    unit_weight_spec("vstr", gamma, seed), n_obs=2000, m_per_value=500
                )
                deltas = detect_confounding(data, interventions).deltas
                gaps.extend(deltas[i, j] for i, j in pairs)
            means.append(float(np.mean(gaps)))

        assert all(low <= high for low, high in zip(means, means[1:])), means
