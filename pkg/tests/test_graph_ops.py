import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.types import Dag, GraphError, GraphKind
from src.utils.graph_ops import DagOps

EDGE_COUNTS = {"fork": 4, "chain": 4, "vstr": 3, "diamond": 4, "collider": 4}


class TestCanonicalTopology:

    @pytest.mark.parametrize("kind, count", sorted(EDGE_COUNTS.items()))
    def test_edge_count_and_acyclic(self, kind: str, count: int):
        dag = DagOps.canonical_topology(kind)

        assert dag.edge_count == count
        assert DagOps.is_acyclic(dag.adjacency)

    def test_chain_edges(self):
        assert DagOps.canonical_topology(GraphKind.CHAIN).edges == [(0, 1), (1, 2), (2, 3), (3, 4)]

    def test_fork_edges(self):
        assert DagOps.canonical_topology("fork").edges == [(0, 1), (0, 2), (0, 3), (0, 4)]

    def test_collider_edges(self):
        assert DagOps.canonical_topology("collider").edges == [(0, 4), (1, 4), (2, 4), (3, 4)]

    def test_unknown_kind(self):
        with pytest.raises(GraphError, match="Unknown topology"):
            DagOps.canonical_topology("star")

    def test_rejects_other_sizes(self):
        with pytest.raises(GraphError, match="d=5"):
            DagOps.canonical_topology("chain", d=4)


class TestDag:

    def test_cycle_rejected(self):
        with pytest.raises(GraphError, match="cycle"):
            DagOps.from_edges(3, [(0, 1), (1, 2), (2, 0)])

    def test_self_loop_rejected(self):
        with pytest.raises(GraphError, match="self-loop"):
            Dag(d=2, adjacency=np.array([[1, 0], [0, 0]]))

    def test_out_of_range_edge(self):
        with pytest.raises(GraphError, match="out of range"):
            DagOps.from_edges(2, [(0, 2)])

    def test_json_round_trip(self):
        dag = DagOps.canonical_topology("diamond")
        payload = dag.to_dict()

        assert payload == {"d": 5, "edges": [[0, 1], [0, 2], [1, 3], [2, 3]]}
        assert DagOps.from_dict(payload).edges == dag.edges

    def test_from_dict_requires_keys(self):
        with pytest.raises(GraphError):
            DagOps.from_dict({"edges": []})


class TestIsAcyclic:

    def test_two_cycle(self):
        assert not DagOps.is_acyclic(np.array([[0, 1], [1, 0]]))

    def test_empty(self):
        assert DagOps.is_acyclic(np.zeros((4, 4)))

    def test_self_loop(self):
        assert not DagOps.is_acyclic(np.eye(3))

    def test_non_square(self):
        with pytest.raises(GraphError, match="square"):
            DagOps.is_acyclic(np.zeros((2, 3)))

    def test_find_cycle_returns_cycle_edges(self):
        adjacency = np.zeros((4, 4), dtype=bool)
        for i, j in [(0, 1), (1, 2), (2, 0), (2, 3)]:
            adjacency[i, j] = True

        cycle = DagOps.find_cycle(adjacency)

        assert sorted(cycle) == [(0, 1), (1, 2), (2, 0)]

    def test_find_cycle_none_when_acyclic(self):
        assert DagOps.find_cycle(DagOps.canonical_topology("diamond").adjacency) is None


class TestEdgeMetrics:

    @pytest.fixture(scope="class")
    def chain(self) -> Dag:
        return DagOps.canonical_topology("chain")

    def test_perfect(self, chain: Dag):
        metrics = DagOps.edge_metrics(chain, chain)

        assert metrics.f1 == 1.0
        assert metrics.shd == 0

    def test_empty_estimate(self, chain: Dag):
        metrics = DagOps.edge_metrics(chain, np.zeros((5, 5), dtype=bool))

        assert metrics.f1 == 0.0
        assert metrics.recall == 0.0
        assert metrics.shd == 4

    def test_both_empty(self):
        empty = DagOps.from_edges(3, [])

        assert DagOps.edge_metrics(empty, empty).f1 == 1.0

    def test_partial_overlap(self, chain: Dag):
        estimate = DagOps.from_edges(5, [(0, 1), (1, 2), (2, 3), (0, 2)])

        metrics = DagOps.edge_metrics(chain, estimate)

        assert metrics.precision == pytest.approx(0.75)
        assert metrics.recall == pytest.approx(0.75)
        assert metrics.f1 == pytest.approx(0.75)
        assert metrics.shd == 2

    def test_reversed_edge_counts_twice(self):
        truth = DagOps.from_edges(2, [(0, 1)])
        estimate = DagOps.from_edges(2, [(1, 0)])

        assert DagOps.edge_metrics(truth, estimate).shd == 2

    def test_dimension_mismatch(self, chain: Dag):
        with pytest.raises(GraphError, match="dimension mismatch"):
            DagOps.edge_metrics(chain, np.zeros((4, 4)))

    @settings(max_examples=50, deadline=None)
    @given(
        truth_edges=st.sets(st.tuples(st.integers(0, 4), st.integers(0, 4)), max_size=10),
        estimate_edges=st.sets(st.tuples(st.integers(0, 4), st.integers(0, 4)), max_size=10),
        permutation=st.permutations(list(range(5))),
    )
    def test_relabelling_invariance(self, truth_edges, estimate_edges, permutation):
        # forward-only edges keep both graphs acyclic
        truth = DagOps.from_edges(5, [(i, j) for i, j in truth_edges if i < j])
        estimate = np.zeros((5, 5), dtype=bool)
        for i, j in estimate_edges:
            if i != j:
                estimate[i, j] = True

        order = np.asarray(permutation)
        relabelled_truth = Dag(d=5, adjacency=truth.adjacency[np.ix_(order, order)])
        relabelled_estimate = estimate[np.ix_(order, order)]

        assert DagOps.edge_metrics(truth, estimate) == DagOps.edge_metrics(
            relabelled_truth, relabelled_estimate
        )
