"""DAG construction, canonical benchmark topologies and structural metrics."""

from typing import Dict, Iterable, List, Optional, Sequence, Union

import networkx as nx
import numpy as np

from ..types import Dag, Edge, EdgeMetrics, GraphError, GraphKind

CANONICAL_D = 5

# Fixed edge lists at d=5. X4 is isolated in the diamond.
CANONICAL_EDGES: Dict[GraphKind, List[Edge]] = {
    GraphKind.FORK: [(0, 1), (0, 2), (0, 3), (0, 4)],
    GraphKind.CHAIN: [(0, 1), (1, 2), (2, 3), (3, 4)],
    GraphKind.VSTRUCTURE: [(0, 2), (1, 2), (3, 4)],
    GraphKind.DIAMOND: [(0, 1), (0, 2), (1, 3), (2, 3)],
    GraphKind.COLLIDER: [(0, 4), (1, 4), (2, 4), (3, 4)],
}


class DagOps:
    """Build, check and score directed acyclic graphs."""

    @staticmethod
    def from_edges(d: int, edges: Iterable[Sequence[int]]) -> Dag:
        """
        Build a Dag from an edge list.

        Args:
            d: Number of variables
            edges: Pairs (i, j) meaning X_i -> X_j

        Returns:
            Validated Dag (raises GraphError on cycles or bad indices)
        """
        adjacency = np.zeros((d, d), dtype=bool)
        for edge in edges:
            i, j = int(edge[0]), int(edge[1])
            if not (0 <= i < d and 0 <= j < d):
                raise GraphError(f"edge ({i}, {j}) out of range for d={d}")
            adjacency[i, j] = True
        return Dag(d=d, adjacency=adjacency)

    @staticmethod
    def canonical_topology(kind: Union[GraphKind, str], d: int = CANONICAL_D) -> Dag:
        """Return one of the five fixed benchmark topologies (defined only for d=5)."""
        try:
            kind = GraphKind(kind)
        except ValueError:
            raise GraphError(f"Unknown topology kind: {kind}") from None

        if d != CANONICAL_D:
            raise GraphError(f"Canonical topologies are defined for d={CANONICAL_D}, got d={d}")

        return DagOps.from_edges(d, CANONICAL_EDGES[kind])

    @staticmethod
    def to_networkx(adjacency: np.ndarray) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(range(adjacency.shape[0]))
        rows, cols = np.nonzero(adjacency)
        graph.add_edges_from((int(i), int(j)) for i, j in zip(rows, cols))
        return graph

    @staticmethod
    def is_acyclic(adjacency: np.ndarray) -> bool:
        """True iff the (square) candidate adjacency has no directed cycle."""
        matrix = np.asarray(adjacency, dtype=bool)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise GraphError(f"adjacency must be square, got shape {matrix.shape}")
        if matrix.diagonal().any():
            return False
        return nx.is_directed_acyclic_graph(DagOps.to_networkx(matrix))

    @staticmethod
    def find_cycle(adjacency: np.ndarray) -> Optional[List[Edge]]:
        """Return the edges of one directed cycle, or None when the graph is acyclic."""
        try:
            cycle = nx.find_cycle(DagOps.to_networkx(adjacency), orientation="original")
        except nx.NetworkXNoCycle:
            return None
        return [(int(u), int(v)) for u, v, _ in cycle]

    @staticmethod
    def topological_order(dag: Dag) -> List[int]:
        # lexicographical order keeps sampling reproducible across networkx versions
        return list(nx.lexicographical_topological_sort(DagOps.to_networkx(dag.adjacency)))

    @staticmethod
    def descendants(dag: Dag, node: int) -> set:
        return set(nx.descendants(DagOps.to_networkx(dag.adjacency), node))

    @staticmethod
    def edge_metrics(truth: Dag, estimate: Union[Dag, np.ndarray]) -> EdgeMetrics:
        """
        Score an estimated adjacency against the ground truth.

        Args:
            truth: Ground-truth Dag
            estimate: Estimated Dag or boolean adjacency of the same size

        Returns:
            EdgeMetrics over directed edges; SHD counts differing off-diagonal entries
        """
        predicted = np.asarray(
            estimate.adjacency if isinstance(estimate, Dag) else estimate, dtype=bool
        )
        if predicted.shape != truth.adjacency.shape:
            raise GraphError(
                f"dimension mismatch: truth {truth.adjacency.shape}, estimate {predicted.shape}"
            )

        off_diagonal = ~np.eye(truth.d, dtype=bool)
        actual = truth.adjacency & off_diagonal
        predicted = predicted & off_diagonal

        true_positive = int((actual & predicted).sum())
        n_predicted = int(predicted.sum())
        n_actual = int(actual.sum())
        shd = int((actual != predicted).sum())

        if n_predicted == 0 and n_actual == 0:
            return EdgeMetrics(precision=1.0, recall=1.0, f1=1.0, shd=0)

        precision = true_positive / n_predicted if n_predicted else 0.0
        recall = true_positive / n_actual if n_actual else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0

        return EdgeMetrics(precision=precision, recall=recall, f1=f1, shd=shd)

    @staticmethod
    def from_dict(payload: Dict) -> Dag:
        """Inverse of ``Dag.to_dict`` ({"d": 5, "edges": [[0, 1], ...]})."""
        if "d" not in payload or "edges" not in payload:
            raise GraphError("graph JSON needs 'd' and 'edges'")
        return DagOps.from_edges(int(payload["d"]), payload["edges"])
