"""Latent-confounding detection from observational vs interventional conditionals."""

import logging
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..types import CausalDiscoveryError, Dataset, Edge, FlowModel, InterventionSet, MmdMatrix
from ..utils.flow_matching import FlowMatching
from ..utils.kernel_stats import KernelStats
from ..utils.settings import DiscoveryConfig

logger = logging.getLogger(__name__)


def index_interventions(
    interventions: Sequence[InterventionSet], d: int
) -> Dict[int, InterventionSet]:
    """Map target -> InterventionSet, requiring exactly one set per variable."""
    by_target: Dict[int, InterventionSet] = {}
    for intervention in interventions:
        if intervention.target in by_target:
            raise CausalDiscoveryError(
                f"duplicate InterventionSet for X{intervention.target}: expected one per variable"
            )
        by_target[intervention.target] = intervention
    missing = [i for i in range(d) if i not in by_target]
    if missing:
        raise CausalDiscoveryError(f"missing InterventionSet for variables {missing}")
    for target, intervention in by_target.items():
        if intervention.d != d:
            raise CausalDiscoveryError(
                f"InterventionSet for X{target} has {intervention.d} columns, expected {d}"
            )
    return by_target


def adaptive_threshold(deltas: np.ndarray) -> float:
    """tau_c = median + std over the off-diagonal gaps."""
    off_diagonal = deltas[~np.eye(deltas.shape[0], dtype=bool)]
    if off_diagonal.size == 0:
        return 0.0
    return float(np.median(off_diagonal) + np.std(off_diagonal))


def detect_confounding(
    data: Dataset,
    interventions: Sequence[InterventionSet],
    config: Optional[DiscoveryConfig] = None,
    flows: Optional[Dict[Edge, FlowModel]] = None,
) -> MmdMatrix:
    """
    Kernel gap between P(X_j | X_i = x) and P(X_j | do(X_i = x)) for every ordered pair.

    For each do-value x of variable i, the observational conditional is a
    kernel-weighted (or flow-sampled) sample of X_j, resampled to equal weights,
    and compared by RBF MMD^2 against the interventional rows at that value.
    Gaps are aggregated over the do-values and thresholded adaptively.

    Args:
        data: Observational dataset
        interventions: One InterventionSet per variable
        config: Pipeline settings (aggregation, resample size, conditional source)
        flows: Trained pair models, required when ``obs_conditional == "flow"``

    Returns:
        MmdMatrix with the gaps, tau_c and the flagged ordered pairs
    """
    config = config or DiscoveryConfig()
    d = data.d
    by_target = index_interventions(interventions, d)
    deltas = np.zeros((d, d))

    if config.obs_conditional == "flow" and flows is None:
        raise CausalDiscoveryError("obs_conditional='flow' requires trained flow models")

    if d < 2:
        return MmdMatrix(deltas=deltas, tau_c=0.0, confounded_pairs=set())

    for i in range(d):
        intervention = by_target[i]
        bandwidth_h = KernelStats.silverman_bandwidth(data.column(i))
        for j in range(d):
            if i == j:
                continue
            gaps: List[float] = []
            for k, x in enumerate(intervention.do_values):
                interventional = intervention.rows_for(k)[:, j]
                if config.obs_conditional == "flow":
                    observational = FlowMatching.sample_conditional(
                        flows[(i, j)], x, config.resample_size, seed=config.seed + k
                    )
                else:
                    observational = KernelStats.weighted_conditional_samples(
                        data, i, j, x, bandwidth_h
                    ).resample(config.resample_size)
                sigma = KernelStats.median_bandwidth(observational, interventional)
                gaps.append(KernelStats.mmd2_unbiased(observational, interventional, sigma))
            deltas[i, j] = max(gaps) if config.mmd_agg == "max" else float(np.mean(gaps))
            logger.debug("gap (%d, %d) = %.5f", i, j, deltas[i, j])

    tau_c = adaptive_threshold(deltas)
    confounded = {
        (i, j) for i in range(d) for j in range(d) if i != j and deltas[i, j] > tau_c
    }
    logger.info("confounding: tau_c=%.5f, %d flagged pairs", tau_c, len(confounded))
    return MmdMatrix(deltas=deltas, tau_c=tau_c, confounded_pairs=confounded)
