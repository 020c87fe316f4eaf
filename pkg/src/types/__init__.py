"""Type definitions and data models."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Set, Tuple

import networkx as nx
import numpy as np

Edge = Tuple[int, int]


class CausalDiscoveryError(ValueError):
    """Base class for every error raised by this package."""


class GraphError(CausalDiscoveryError):
    """Invalid topology, dimension mismatch or a cycle where a DAG is required."""


class SimulationError(CausalDiscoveryError):
    """Invalid request to the structural causal model simulator."""


class TrainingError(CausalDiscoveryError):
    """Flow training or sampling produced non-finite values or had too little data."""


class DegenerateConditioningError(CausalDiscoveryError):
    """Every kernel weight underflowed: the condition lies outside the data support."""


class DataFormatError(CausalDiscoveryError):
    """Malformed or inconsistent input files."""


class RegressionError(CausalDiscoveryError):
    """Least-squares problem is under-determined."""


class GraphKind(str, Enum):
    """The five canonical benchmark topologies."""

    FORK = "fork"
    CHAIN = "chain"
    VSTRUCTURE = "vstr"
    DIAMOND = "diamond"
    COLLIDER = "collider"


class Mechanism(str, Enum):
    """Structural mechanism family applied to every parent of a variable."""

    LINEAR = "linear"
    QUADRATIC = "nl1"
    SINUSOIDAL = "nl2"
    SATURATING = "nl3"
    ABSOLUTE = "nl4"


@dataclass(frozen=True)
class Dag:
    """Directed acyclic graph over ``d`` variables; ``adjacency[i, j]`` means i -> j."""

    d: int
    adjacency: np.ndarray

    def __post_init__(self) -> None:
        adjacency = np.asarray(self.adjacency, dtype=bool)
        if self.d < 1 or adjacency.shape != (self.d, self.d):
            raise GraphError(f"adjacency must be {self.d}x{self.d}, got {adjacency.shape}")
        if adjacency.diagonal().any():
            raise GraphError("self-loops are not allowed")
        if not nx.is_directed_acyclic_graph(nx.from_numpy_array(adjacency, create_using=nx.DiGraph)):
            raise GraphError("adjacency contains a directed cycle")
        object.__setattr__(self, "adjacency", adjacency)

    @property
    def edges(self) -> List[Edge]:
        rows, cols = np.nonzero(self.adjacency)
        return sorted((int(i), int(j)) for i, j in zip(rows, cols))

    @property
    def edge_count(self) -> int:
        return int(self.adjacency.sum())

    def parents(self, j: int) -> List[int]:
        return [int(i) for i in np.flatnonzero(self.adjacency[:, j])]

    def to_dict(self) -> Dict[str, Any]:
        return {"d": self.d, "edges": [list(e) for e in self.edges]}


@dataclass(frozen=True)
class EdgeMetrics:
    """Directed-edge precision/recall/F1 and structural Hamming distance."""

    precision: float
    recall: float
    f1: float
    shd: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "precision": round(self.precision, 6),
            "recall": round(self.recall, 6),
            "f1": round(self.f1, 6),
            "shd": self.shd,
        }


@dataclass(frozen=True)
class ScmSpec:
    """Full generative specification of a confounded structural causal model."""

    graph: Dag
    weights: np.ndarray
    mechanism: Mechanism = Mechanism.LINEAR
    gamma: float = 0.0
    noise_std: float = 1.0
    seed: int = 0

    @property
    def d(self) -> int:
        return self.graph.d


@dataclass
class Dataset:
    """Observational sample matrix (n rows, d columns)."""

    values: np.ndarray

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    @property
    def d(self) -> int:
        return int(self.values.shape[1])

    def column(self, j: int) -> np.ndarray:
        return self.values[:, j]


@dataclass
class InterventionSet:
    """Samples under do(X_target = x) for each of K distinct do-values."""

    target: int
    do_values: List[float]
    values: np.ndarray
    per_value_counts: List[int]

    @property
    def applied(self) -> np.ndarray:
        """Do-value applied to each row (the target column)."""
        return self.values[:, self.target]

    def rows_for(self, k: int) -> np.ndarray:
        start = sum(self.per_value_counts[:k])
        return self.values[start : start + self.per_value_counts[k]]

    @property
    def d(self) -> int:
        return int(self.values.shape[1])


@dataclass
class FlowModel:
    """Trained conditional flow-matching velocity field for the ordered pair (i, j)."""

    pair: Edge
    network: Any
    hidden: int
    ode_steps: int
    # Standardisation applied to the condition and the target before training.
    cond_loc: float = 0.0
    cond_scale: float = 1.0
    target_loc: float = 0.0
    target_scale: float = 1.0
    train_loss_trace: List[float] = field(default_factory=list)


@dataclass
class MmdMatrix:
    """Observational-vs-interventional kernel gaps and the confounded pairs they flag."""

    deltas: np.ndarray
    tau_c: float
    confounded_pairs: Set[Edge]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "deltas": np.round(self.deltas, 8).tolist(),
            "tauC": self.tau_c,
            "confoundedPairs": [list(p) for p in sorted(self.confounded_pairs)],
        }


@dataclass
class AteMatrix:
    """Total causal effects ``e[i, j]`` of intervening on X_i, measured on X_j."""

    e: np.ndarray
    per_value: Optional[np.ndarray] = None
    dose_response: Optional[np.ndarray] = None
    correlation: Optional[np.ndarray] = None
    statistic: str = "pooled"
    # Sampling errors of the pooled and dose-response effects, and the residual
    # std of X_j after the dose-response regression.
    pooled_se: Optional[np.ndarray] = None
    dose_se: Optional[np.ndarray] = None
    residual_sd: Optional[np.ndarray] = None
    # Pooled effects within noise_floor standard errors of zero do not count
    # toward the dose-response strength.
    noise_floor: float = 0.0

    @classmethod
    def from_effects(cls, e: Any) -> "AteMatrix":
        matrix = np.array(e, dtype=float)
        np.fill_diagonal(matrix, 0.0)
        return cls(e=matrix)

    @property
    def d(self) -> int:
        return int(self.e.shape[0])

    def strength(self) -> np.ndarray:
        """Nonnegative decision statistic used for thresholds, ranking and cycle repair."""
        magnitude = np.abs(self.e)
        if self.statistic == "per_value_max" and self.per_value is not None:
            magnitude = np.maximum(magnitude, np.abs(self.per_value).max(axis=2))
        elif self.statistic == "dose_response" and self.dose_response is not None:
            if self.noise_floor > 0 and self.pooled_se is not None:
                magnitude = np.where(magnitude > self.noise_floor * self.pooled_se, magnitude, 0.0)
            magnitude = np.maximum(magnitude, np.abs(self.dose_response))
        np.fill_diagonal(magnitude, 0.0)
        return magnitude

    def to_dict(self) -> Dict[str, Any]:
        result: Dict[str, Any] = {
            "statistic": self.statistic,
            "pooled": np.round(self.e, 8).tolist(),
            "strength": np.round(self.strength(), 8).tolist(),
        }
        if self.per_value is not None:
            result["perValue"] = np.round(self.per_value, 8).tolist()
        if self.dose_response is not None:
            result["doseResponse"] = np.round(self.dose_response, 8).tolist()
        if self.dose_se is not None:
            result["doseStdErr"] = np.round(self.dose_se, 8).tolist()
        if self.correlation is not None:
            result["correlation"] = np.round(self.correlation, 8).tolist()
        return result


@dataclass
class DiscoveryResult:
    """Estimated graph with the statistics that produced it."""

    graph: Dag
    ate: AteMatrix
    mmd: MmdMatrix
    removed_indirect: List[Edge]
    removed_cycles: List[Edge]
    config: Dict[str, Any]
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "graph": self.graph.to_dict(),
            "ate": self.ate.to_dict(),
            "mmd": self.mmd.to_dict(),
            "removedIndirect": [list(e) for e in self.removed_indirect],
            "removedCycles": [list(e) for e in self.removed_cycles],
            "config": self.config,
            "diagnostics": self.diagnostics,
        }


@dataclass
class ResultRow:
    """One cell of the benchmark grid."""

    graph: str
    mechanism: str
    gamma: float
    seed: int
    f1: float
    precision: float
    recall: float
    shd: float
    runtime_ms: float
    error: str = ""

    FIELDS = (
        "graph",
        "mechanism",
        "gamma",
        "seed",
        "f1",
        "precision",
        "recall",
        "shd",
        "runtime_ms",
        "error",
    )

    def to_dict(self) -> Dict[str, Any]:
        return {name: getattr(self, name) for name in self.FIELDS}
