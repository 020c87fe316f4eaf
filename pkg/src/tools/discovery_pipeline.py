"""Structure discovery from observational data plus round-robin hard interventions.

Steps, in order: optional conditional flow training, confounding detection,
total-effect estimation, edge orientation with confounding-aware thresholds,
indirect-edge filtering and cycle repair.
"""

import logging
from typing import Any, Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union

import networkx as nx
import numpy as np

from ..types import (
    AteMatrix,
    CausalDiscoveryError,
    Dag,
    Dataset,
    DiscoveryResult,
    Edge,
    FlowModel,
    InterventionSet,
    MmdMatrix,
    ScmSpec,
    SimulationError,
)
from ..utils.flow_matching import FlowMatching
from ..utils.graph_ops import DagOps
from ..utils.scm_simulator import ScmSimulator
from ..utils.settings import DiscoveryConfig
from .confounding_detector import detect_confounding, index_interventions

logger = logging.getLogger(__name__)

Threshold = Union[float, np.ndarray]


def percentile_do_values(column: np.ndarray, k: int) -> List[float]:
    """Equally spaced interior percentiles 100 * q / (k + 1), q = 1..k."""
    levels = [100.0 * q / (k + 1) for q in range(1, k + 1)]
    return [float(v) for v in np.percentile(column, levels)]


def acquire_interventions(
    simulator: Union[ScmSpec, ScmSimulator],
    data: Dataset,
    k: int = 4,
    m_per_value: int = 50,
    seed: Optional[int] = None,
) -> List[InterventionSet]:
    """
    One intervention set per variable, in round-robin order 0..d-1.

    Args:
        simulator: ScmSpec or any object with ``intervene(target, do_values, m_per_value)``
        data: Observational dataset the do-values are drawn from
        k: Number of distinct do-values per variable (>= 2)
        m_per_value: Rows per do-value
        seed: Optional seed override passed to the simulator

    Returns:
        Exactly d InterventionSets
    """
    if k < 2:
        raise SimulationError("k must be at least 2: one do-value cannot reveal causal influence")
    if isinstance(simulator, ScmSpec):
        simulator = ScmSimulator(simulator)

    interventions = []
    for target in range(data.d):
        do_values = percentile_do_values(data.column(target), k)
        if len(set(do_values)) < k:
            raise SimulationError(f"X{target} has too few distinct values for {k} percentiles")
        if seed is None:
            result = simulator.intervene(target, do_values, m_per_value)
        else:
            result = simulator.intervene(target, do_values, m_per_value, seed=seed)
        interventions.append(result)

    logger.info("acquired %d intervention sets (k=%d, m=%d)", len(interventions), k, m_per_value)
    return interventions


# Covariates whose correlation with an applied do-value stays below this many
# standard errors count as unaffected by that intervention.
_UNAFFECTED_Z = 2.0


def _slope_with_covariates(
    centred: np.ndarray, response: np.ndarray, covariates: np.ndarray
) -> Tuple[float, float, float]:
    """
    OLS slope of ``response`` on ``centred`` adjusted for ``covariates``.

    Returns (slope, standard error of the slope, residual std).
    """
    design = np.column_stack([centred, covariates - covariates.mean(axis=0)])
    dof = design.shape[0] - design.shape[1] - 1
    if dof < 1:
        design, dof = design[:, :1], design.shape[0] - 2
    if dof < 1:
        return float(np.dot(centred, response) / np.dot(centred, centred)), 0.0, 0.0
    coef, *_ = np.linalg.lstsq(design, response, rcond=None)
    residual = response - design @ coef
    residual_sd = float(np.sqrt(np.dot(residual, residual) / dof))
    gram_inverse = np.linalg.pinv(design.T @ design)
    return float(coef[0]), residual_sd * float(np.sqrt(gram_inverse[0, 0])), residual_sd


def compute_ate(
    data: Dataset,
    interventions: Sequence[InterventionSet],
    statistic: str = "pooled",
    adjust_covariates: bool = False,
    noise_floor: float = 0.0,
) -> AteMatrix:
    """
    Total effects e[i, j] = mean of X_j under do(X_i) pooled over all do-values
    minus the observational mean of X_j.

    Alongside the pooled effect the matrix carries the per-do-value effects, the
    dose-response effect (slope of X_j on the applied value times the spread of
    the applied values), its standard error and the correlation between applied
    value and X_j.

    With ``adjust_covariates`` the dose-response slope for (i, j) is estimated
    jointly with every other column that neither do(X_i) nor do(X_j) moves.
    Such columns are independent of the applied value, so the slope still
    measures the total effect, with the residual spread of their contribution
    removed.
    """
    d = data.d
    by_target = index_interventions(interventions, d)
    obs_mean = data.values.mean(axis=0)
    obs_var = data.values.var(axis=0, ddof=1) if data.n > 1 else np.zeros(d)
    k_max = max(len(s.do_values) for s in by_target.values())

    pooled = np.zeros((d, d))
    pooled_se = np.zeros((d, d))
    per_value = np.zeros((d, d, k_max))
    dose = np.zeros((d, d))
    dose_se = np.zeros((d, d))
    residual_sd = np.zeros((d, d))
    correlation = np.zeros((d, d))
    spreads = np.zeros(d)

    for i in range(d):
        intervention = by_target[i]
        rows = intervention.values.shape[0]
        pooled[i] = intervention.values.mean(axis=0) - obs_mean
        int_var = intervention.values.var(axis=0, ddof=1) if rows > 1 else np.zeros(d)
        pooled_se[i] = np.sqrt(int_var / rows + obs_var / max(data.n, 1))
        for k in range(len(intervention.do_values)):
            per_value[i, :, k] = intervention.rows_for(k).mean(axis=0) - obs_mean

        centred = intervention.applied - intervention.applied.mean()
        spreads[i] = float(np.sqrt(np.mean(centred**2)))
        if spreads[i] == 0:
            continue
        for j in range(d):
            response = intervention.values[:, j] - intervention.values[:, j].mean()
            response_spread = float(np.sqrt(np.mean(response**2)))
            if j != i and response_spread > 0:
                correlation[i, j] = float(
                    np.mean(centred * response) / (spreads[i] * response_spread)
                )

    rows_per_target = np.array([by_target[i].values.shape[0] for i in range(d)])
    affected = np.abs(correlation) >= _UNAFFECTED_Z / np.sqrt(rows_per_target)[:, None]

    for i in range(d):
        if spreads[i] == 0:
            continue
        intervention = by_target[i]
        centred = intervention.applied - intervention.applied.mean()
        for j in range(d):
            if j == i:
                continue
            response = intervention.values[:, j] - intervention.values[:, j].mean()
            keep = [
                c
                for c in range(d)
                if adjust_covariates
                and c not in (i, j)
                and not (affected[i, c] or affected[j, c])
            ]
            slope, slope_se, residual_sd[i, j] = _slope_with_covariates(
                centred, response, intervention.values[:, keep]
            )
            dose[i, j] = slope * spreads[i]
            dose_se[i, j] = slope_se * spreads[i]

    for matrix in (pooled, pooled_se, dose, dose_se, residual_sd, correlation):
        np.fill_diagonal(matrix, 0.0)
    per_value[np.arange(d), np.arange(d), :] = 0.0

    return AteMatrix(
        e=pooled,
        per_value=per_value,
        dose_response=dose,
        correlation=correlation,
        statistic=statistic,
        pooled_se=pooled_se,
        dose_se=dose_se,
        residual_sd=residual_sd,
        noise_floor=noise_floor,
    )


def _as_matrix(value: Threshold, d: int) -> np.ndarray:
    matrix = np.asarray(value, dtype=float)
    if matrix.ndim == 0:
        return np.full((d, d), float(matrix))
    if matrix.shape != (d, d):
        raise CausalDiscoveryError(f"threshold matrix must be {d}x{d}, got {matrix.shape}")
    return matrix


def effect_thresholds(
    data: Dataset, config: DiscoveryConfig, ate: Optional[AteMatrix] = None
) -> np.ndarray:
    """
    tau_e[i, j] for every ordered pair.

    An absolute ``tau_e`` wins. Otherwise the relevance scale is tau_scale times
    the spread of X_j: the residual std of the dose-response regression when the
    matrix carries one, else std_obs(X_j). When the matrix carries standard
    errors the threshold never drops below ``noise_floor`` of them.
    """
    d = data.d
    if config.tau_e is not None:
        return np.full((d, d), config.tau_e)
    std_obs = data.values.std(axis=0, ddof=1) if data.n > 1 else np.ones(d)
    tau = np.tile(config.tau_scale * std_obs, (d, 1))
    if ate is not None and ate.statistic == "dose_response" and ate.dose_se is not None:
        if ate.residual_sd is not None:
            tau = config.tau_scale * ate.residual_sd
        tau = np.maximum(tau, config.noise_floor * ate.dose_se)
    elif ate is not None and ate.pooled_se is not None:
        tau = np.maximum(tau, config.noise_floor * ate.pooled_se)
    return np.maximum(tau, 1e-12)


def direction_phase(
    ate: AteMatrix,
    confounded: Iterable[Edge],
    tau_e: Threshold,
    tau_e_plus: Threshold,
) -> Set[Edge]:
    """
    Orient each unordered pair toward the larger total effect when it clears its gate.

    The stricter threshold ``tau_e_plus`` applies when the oriented pair
    (source, sink) is flagged as confounded. A flag on the reverse pair alone
    does not gate the edge: X_i given X_j always differs from X_i under
    do(X_j) once X_i causes X_j. Ties go to the lower source index.
    """
    d = ate.d
    tau = _as_matrix(tau_e, d)
    tau_plus = _as_matrix(tau_e_plus, d)
    off_diagonal = ~np.eye(d, dtype=bool)
    if np.any(tau[off_diagonal] <= 0) or np.any(tau_plus[off_diagonal] <= tau[off_diagonal]):
        raise CausalDiscoveryError("thresholds must satisfy tau_e_plus > tau_e > 0")

    flagged = set(confounded)
    strength = ate.strength()
    edges: Set[Edge] = set()

    for i in range(d):
        for j in range(i + 1, d):
            source, sink = (i, j) if strength[i, j] >= strength[j, i] else (j, i)
            gate = tau_plus if (source, sink) in flagged else tau
            if strength[source, sink] > gate[source, sink]:
                edges.add((source, sink))

    return edges


def icp_filter(
    candidates: Iterable[Edge], ate: AteMatrix, tau: Threshold
) -> Tuple[Set[Edge], List[Edge]]:
    """
    Drop candidate edges that are mediated by an already confirmed child.

    For each source with two or more candidates, the strongest child is kept as
    direct. The remaining candidates are visited in decreasing effect order and
    removed when some kept child reaches them through hops whose effect exceeds
    ``tau``; otherwise they are kept and can mediate later candidates.

    Returns:
        (kept edges, removed edges in removal order)
    """
    d = ate.d
    strength = ate.strength()
    gate = _as_matrix(tau, d)
    if np.any(gate[~np.eye(d, dtype=bool)] <= 0):
        raise CausalDiscoveryError("tau must be positive")

    candidates = set(candidates)
    hops = nx.DiGraph()
    hops.add_nodes_from(range(d))
    hops.add_edges_from(
        (u, v) for u in range(d) for v in range(d) if u != v and strength[u, v] > gate[u, v]
    )

    kept_edges: Set[Edge] = set()
    removed: List[Edge] = []
    for source in range(d):
        children = sorted(
            (j for i, j in candidates if i == source), key=lambda j: (-strength[source, j], j)
        )
        if len(children) < 2:
            kept_edges.update((source, j) for j in children)
            continue

        reach = hops.subgraph(n for n in range(d) if n != source)
        confirmed = [children[0]]
        for child in children[1:]:
            if any(nx.has_path(reach, k, child) for k in confirmed):
                removed.append((source, child))
            else:
                confirmed.append(child)
        kept_edges.update((source, j) for j in confirmed)

    return kept_edges, removed


def enforce_dag(candidates: Iterable[Edge], ate: AteMatrix) -> Tuple[Dag, List[Edge]]:
    """Break cycles by repeatedly deleting the weakest edge of some cycle (ties: smallest (i, j))."""
    d = ate.d
    strength = ate.strength()
    adjacency = np.zeros((d, d), dtype=bool)
    for i, j in candidates:
        if i != j:
            adjacency[i, j] = True

    removed: List[Edge] = []
    while True:
        cycle = DagOps.find_cycle(adjacency)
        if cycle is None:
            break
        weakest = min(cycle, key=lambda edge: (strength[edge], edge))
        adjacency[weakest] = False
        removed.append(weakest)

    return Dag(d=d, adjacency=adjacency), removed


def train_pair_flows(data: Dataset, config: DiscoveryConfig) -> Dict[Edge, FlowModel]:
    """Conditional flow model for every ordered pair (i, j), i != j."""
    flows = {}
    for i in range(data.d):
        for j in range(data.d):
            if i != j:
                flows[(i, j)] = FlowMatching.train_flow(data, i, j, config.flow)
    logger.info("trained %d conditional flow models", len(flows))
    return flows


def discover(
    data: Dataset,
    interventions: Sequence[InterventionSet],
    config: Optional[DiscoveryConfig] = None,
) -> DiscoveryResult:
    """
    Run the full pipeline on observational data and one InterventionSet per variable.

    Args:
        data: Observational dataset (n x d)
        interventions: d InterventionSets, one per target variable
        config: Thresholds and switches

    Returns:
        DiscoveryResult with an acyclic graph and every intermediate statistic
    """
    config = config or DiscoveryConfig()
    d = data.d
    for intervention in interventions:
        if intervention.d != d:
            raise CausalDiscoveryError(
                f"inconsistent d: observational {d}, intervention on X{intervention.target} "
                f"has {intervention.d}"
            )

    snapshot: Dict[str, Any] = config.model_dump(mode="json")
    if d == 1:
        empty = MmdMatrix(deltas=np.zeros((1, 1)), tau_c=0.0, confounded_pairs=set())
        return DiscoveryResult(
            graph=Dag(d=1, adjacency=np.zeros((1, 1), dtype=bool)),
            ate=AteMatrix.from_effects(np.zeros((1, 1))),
            mmd=empty,
            removed_indirect=[],
            removed_cycles=[],
            config=snapshot,
        )

    diagnostics: Dict[str, Any] = {}
    flows = None
    if config.train_flows or config.obs_conditional == "flow":
        flows = train_pair_flows(data, config)
        diagnostics["flowFinalLoss"] = {
            f"{i},{j}": round(model.train_loss_trace[-1], 6) for (i, j), model in flows.items()
        }

    mmd = detect_confounding(data, interventions, config, flows)
    if config.skip_confounding:
        mmd = MmdMatrix(deltas=mmd.deltas, tau_c=mmd.tau_c, confounded_pairs=set())

    ate = compute_ate(
        data,
        interventions,
        statistic=config.effect_statistic,
        adjust_covariates=config.adjust_covariates,
        noise_floor=config.noise_floor,
    )
    tau = effect_thresholds(data, config, ate)
    tau_plus = tau * config.tau_plus_ratio
    tau_indirect = np.full((d, d), config.tau_4b) if config.tau_4b is not None else tau

    candidates = direction_phase(ate, mmd.confounded_pairs, tau, tau_plus)
    if config.skip_indirect_filter:
        direct, removed_indirect = set(candidates), []
    else:
        direct, removed_indirect = icp_filter(candidates, ate, tau_indirect)
    graph, removed_cycles = enforce_dag(direct, ate)

    logger.info(
        "discovery: %d candidates, %d indirect removed, %d cycle edges removed, %d edges final",
        len(candidates),
        len(removed_indirect),
        len(removed_cycles),
        graph.edge_count,
    )

    snapshot["thresholds"] = {
        "tauE": np.round(tau, 8).tolist(),
        "tauEPlus": np.round(tau_plus, 8).tolist(),
        "tau4b": np.round(tau_indirect, 8).tolist(),
    }
    diagnostics.update(
        {
            "candidateEdges": [list(e) for e in sorted(candidates)],
            "confoundedCount": len(mmd.confounded_pairs),
            "interventionSets": len(interventions),
        }
    )
    return DiscoveryResult(
        graph=graph,
        ate=ate,
        mmd=mmd,
        removed_indirect=removed_indirect,
        removed_cycles=removed_cycles,
        config=snapshot,
        diagnostics=diagnostics,
    )
