"""Discovery on externally supplied CSV data."""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from mcp.types import TextContent

from ..types import Dataset, DiscoveryResult, InterventionSet
from ..utils.data_io import DataIO
from ..utils.settings import DiscoveryConfig, load_json_config
from .discovery_pipeline import discover

logger = logging.getLogger(__name__)


def load_inputs(
    obs_csv: Union[str, Path], int_dir: Union[str, Path]
) -> Tuple[Dataset, List[InterventionSet]]:
    """Observational CSV plus int_target{i}.csv for every column i of it."""
    data = DataIO.read_dataset(obs_csv)
    interventions = DataIO.read_intervention_dir(int_dir, data.d)
    logger.info("loaded n=%d, d=%d and %d intervention files", data.n, data.d, len(interventions))
    return data, interventions


def resolve_config(config: Union[None, str, Path, Dict[str, Any], DiscoveryConfig]) -> DiscoveryConfig:
    if config is None:
        return DiscoveryConfig()
    if isinstance(config, DiscoveryConfig):
        return config
    if isinstance(config, dict):
        return DiscoveryConfig.model_validate(config)
    return load_json_config(config, DiscoveryConfig)


def discover_from_files(
    obs_csv: Union[str, Path],
    int_dir: Union[str, Path],
    config: Union[None, str, Path, Dict[str, Any], DiscoveryConfig] = None,
    out: Optional[Union[str, Path]] = None,
) -> DiscoveryResult:
    """
    Run the discovery pipeline on CSV inputs.

    Args:
        obs_csv: n x d observational CSV with header x0..x{d-1}
        int_dir: Directory holding int_target{i}.csv for i = 0..d-1
        config: DiscoveryConfig, its dict form or a JSON file path
        out: Optional path for the result JSON

    Raises:
        DataFormatError: Malformed CSV, missing intervention file or inconsistent d
    """
    data, interventions = load_inputs(obs_csv, int_dir)
    result = discover(data, interventions, resolve_config(config))
    if out is not None:
        DataIO.write_json(result.to_dict(), out)
    return result


async def run_discover(args: Dict[str, Any]) -> Sequence[TextContent]:
    """
    Discover a causal graph from CSV files.

    Features:
    - Observational CSV plus one intervention file per variable
    - JSON or inline discovery settings
    - Optional result JSON on disk
    """
    result = discover_from_files(
        args["obs_csv"],
        args["int_dir"],
        args.get("config"),
        args.get("out"),
    )
    return [TextContent(type="text", text=json.dumps(result.to_dict(), indent=2))]
