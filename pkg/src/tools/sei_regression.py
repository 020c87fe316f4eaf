"""Electrolyte-additive capacity regression on DFT descriptors."""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Union

import numpy as np
import pandas as pd
from mcp.types import TextContent

from ..types import DataFormatError, RegressionError

logger = logging.getLogger(__name__)

BUNDLED_TABLE = Path(__file__).resolve().parent.parent / "data" / "sei_dft.csv"

REQUIRED_COLUMNS = ("additive", "lumo_ev", "f_count", "capacity_pct", "type")


def load_table(table_csv: Optional[Union[str, Path]] = None) -> pd.DataFrame:
    path = Path(table_csv) if table_csv else BUNDLED_TABLE
    if not path.is_file():
        raise DataFormatError(f"file not found: {path}")
    table = pd.read_csv(path)
    missing = [name for name in REQUIRED_COLUMNS if name not in table.columns]
    if missing:
        raise DataFormatError(f"{path.name}: missing columns {missing}")
    unknown = sorted(set(table["type"]) - {"Obs", "Pred"})
    if unknown:
        raise DataFormatError(f"{path.name}: type must be Obs or Pred, got {unknown}")
    return table


def sei_regression(table_csv: Optional[Union[str, Path]] = None) -> Dict[str, Any]:
    """
    Fit capacity ~ theta0 + theta_lumo * LUMO + theta_f * F-count on observed rows.

    Rows typed ``Pred`` are excluded from the fit and receive predictions.

    Args:
        table_csv: Descriptor table; the bundled one when omitted

    Returns:
        Coefficients, R^2, predictions, LUMO ordering and observed residuals

    Raises:
        RegressionError: Fewer than 3 observed rows or a rank-deficient design
    """
    table = load_table(table_csv)
    observed = table[table["type"] == "Obs"]
    if observed["capacity_pct"].isna().any():
        raise DataFormatError("observed rows must carry a capacity_pct value")
    if len(observed) < 3:
        raise RegressionError(f"need at least 3 observed rows, got {len(observed)}")

    design = np.column_stack(
        [np.ones(len(observed)), observed["lumo_ev"], observed["f_count"]]
    ).astype(float)
    target = observed["capacity_pct"].to_numpy(dtype=float)
    theta, _, rank, _ = np.linalg.lstsq(design, target, rcond=None)
    if rank < design.shape[1]:
        raise RegressionError(f"design matrix is rank-deficient (rank {rank} < 3)")

    fitted = design @ theta
    residual = target - fitted
    total = float(((target - target.mean()) ** 2).sum())
    r2 = 1.0 - float((residual**2).sum()) / total if total > 0 else 1.0

    predicted = table[table["type"] == "Pred"]
    predictions = {
        row.additive: float(theta[0] + theta[1] * row.lumo_ev + theta[2] * row.f_count)
        for row in predicted.itertuples()
    }
    logger.info(
        "sei fit: theta_lumo=%.3f theta_f=%.3f r2=%.3f", theta[1], theta[2], r2
    )
    return {
        "theta0": float(theta[0]),
        "theta_lumo": float(theta[1]),
        "theta_f": float(theta[2]),
        "r2": r2,
        "predictions": predictions,
        # Most negative LUMO first: reduced earliest at the anode.
        "lumoOrdering": list(table.sort_values("lumo_ev", kind="stable")["additive"]),
        "residuals": dict(zip(observed["additive"], residual.astype(float).tolist())),
        "observedRows": int(len(observed)),
    }


async def run_sei(args: Dict[str, Any]) -> Sequence[TextContent]:
    """
    Reproduce the additive capacity regression.

    Features:
    - OLS on observed additives only
    - Predictions for the unmeasured additives
    - LUMO ordering and residuals
    """
    result = sei_regression(args.get("table_csv"))
    return [TextContent(type="text", text=json.dumps(result, indent=2))]
