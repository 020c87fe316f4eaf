"""Diagnostics report: kernel gaps, effect matrices and flow multimodality."""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Union

import numpy as np
from mcp.types import TextContent

from ..types import Dataset, Edge, FlowModel
from ..utils.data_io import DataIO
from ..utils.flow_matching import FlowMatching
from ..utils.kernel_stats import KernelStats
from ..utils.settings import DiscoveryConfig
from .confounding_detector import detect_confounding
from .discovery_pipeline import compute_ate, train_pair_flows
from .file_discovery import load_inputs, resolve_config

logger = logging.getLogger(__name__)

MULTIMODALITY_SAMPLES = 2000


def flow_multimodality(
    data: Dataset, flows: Dict[Edge, FlowModel], n_samples: int = MULTIMODALITY_SAMPLES
) -> Dict[str, Any]:
    """
    Per ordered pair: modes of the flow's conditional at the median condition.

    The single-Gaussian fit of the same samples is reported alongside, so a
    pair with ``modes > 1`` marks a conditional a Gaussian cannot represent.
    """
    report: Dict[str, Any] = {}
    for (i, j), model in sorted(flows.items()):
        condition = float(np.median(data.column(i)))
        samples = FlowMatching.sample_conditional(model, condition, n_samples, seed=i * data.d + j)
        losses = FlowMatching.evaluation_loss(model, data)
        report[f"{i},{j}"] = {
            "condition": condition,
            "modes": KernelStats.count_modes(samples),
            "gaussianFit": {"mean": float(samples.mean()), "std": float(samples.std())},
            "loss": losses["loss"],
            "zeroFieldLoss": losses["baseline"],
        }
    multimodal = [pair for pair, entry in report.items() if entry["modes"] > 1]
    logger.info("flow check: %d of %d conditionals multimodal", len(multimodal), len(report))
    return {"pairs": report, "multimodalPairs": multimodal}


def diagnose(
    obs_csv: Union[str, Path],
    int_dir: Union[str, Path],
    config: Union[None, str, Path, Dict[str, Any], DiscoveryConfig] = None,
    report: Optional[Union[str, Path]] = None,
    with_flow: bool = True,
) -> Dict[str, Any]:
    """
    Build the diagnostics report for CSV inputs.

    Args:
        obs_csv: Observational CSV
        int_dir: Directory with int_target{i}.csv files
        config: Discovery settings (flow settings included)
        report: Optional path for the report JSON
        with_flow: Train pair flows and run the multimodality check

    Returns:
        Report with ``mmd``, ``ate`` and, when flows are trained, ``flow``
    """
    settings = resolve_config(config)
    data, interventions = load_inputs(obs_csv, int_dir)

    flows = train_pair_flows(data, settings) if with_flow and data.d > 1 else None
    if settings.obs_conditional == "flow" and flows is None:
        flows = train_pair_flows(data, settings)

    result: Dict[str, Any] = {
        "n": data.n,
        "d": data.d,
        "mmd": detect_confounding(data, interventions, settings, flows).to_dict(),
        "ate": compute_ate(
            data,
            interventions,
            settings.effect_statistic,
            adjust_covariates=settings.adjust_covariates,
            noise_floor=settings.noise_floor,
        ).to_dict(),
    }
    if flows:
        result["flow"] = flow_multimodality(data, flows)

    if report is not None:
        DataIO.write_json(result, report)
    return result


async def run_diagnose(args: Dict[str, Any]) -> Sequence[TextContent]:
    """
    Report the statistics behind a discovery run.

    Features:
    - Kernel gap matrix with its threshold and flagged pairs
    - Pooled, per-value, dose-response and correlation effects
    - Flow multimodality check per ordered pair
    """
    result = diagnose(
        args["obs_csv"],
        args["int_dir"],
        args.get("config"),
        args.get("report"),
        args.get("with_flow", True),
    )
    return [TextContent(type="text", text=json.dumps(result, indent=2))]
