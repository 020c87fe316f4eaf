"""CSV and JSON persistence for datasets, intervention sets and results."""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from ..types import DataFormatError, Dataset, InterventionSet

logger = logging.getLogger(__name__)

DO_VALUE_COLUMN = "do_value"
INTERVENTION_PATTERN = "int_target{index}.csv"


class DataIO:
    """Read and write the on-disk formats used by the CLI and the tools."""

    @staticmethod
    def column_names(d: int) -> List[str]:
        return [f"x{j}" for j in range(d)]

    @staticmethod
    def intervention_path(directory: Union[str, Path], target: int) -> Path:
        return Path(directory) / INTERVENTION_PATTERN.format(index=target)

    @staticmethod
    def write_dataset(dataset: Dataset, path: Union[str, Path]) -> Path:
        """Plain n x d CSV with header x0..x{d-1}."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        frame = pd.DataFrame(dataset.values, columns=DataIO.column_names(dataset.d))
        frame.to_csv(path, index=False)
        return path

    @staticmethod
    def write_intervention(intervention: InterventionSet, directory: Union[str, Path]) -> Path:
        """int_target{i}.csv: the d variable columns plus the applied do_value."""
        path = DataIO.intervention_path(directory, intervention.target)
        path.parent.mkdir(parents=True, exist_ok=True)
        frame = pd.DataFrame(intervention.values, columns=DataIO.column_names(intervention.d))
        frame[DO_VALUE_COLUMN] = intervention.applied
        frame.to_csv(path, index=False)
        return path

    @staticmethod
    def _numeric_frame(path: Path, expected: Optional[Sequence[str]] = None) -> pd.DataFrame:
        """Parse a CSV into floats, reporting the first bad cell by row and column."""
        if not path.is_file():
            raise DataFormatError(f"file not found: {path}")
        try:
            raw = pd.read_csv(path, dtype=str, keep_default_na=False)
        except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
            raise DataFormatError(f"{path.name}: cannot parse CSV ({e})") from e

        if expected is not None:
            missing = [name for name in expected if name not in raw.columns]
            if missing:
                raise DataFormatError(f"{path.name}: missing columns {missing}")
            raw = raw[list(expected)]
        if raw.empty:
            raise DataFormatError(f"{path.name}: no data rows")

        numeric = raw.apply(lambda column: pd.to_numeric(column.str.strip(), errors="coerce"))
        bad = numeric.isna() | ~np.isfinite(numeric.to_numpy(dtype=float))
        if bad.to_numpy().any():
            rows, cols = np.nonzero(bad.to_numpy())
            row, col = int(rows[0]), int(cols[0])
            raise DataFormatError(
                f"{path.name}: non-numeric value {raw.iat[row, col]!r} at row {row + 1} "
                f"(line {row + 2}), column '{raw.columns[col]}'"
            )
        return numeric.astype(float)

    @staticmethod
    def read_dataset(path: Union[str, Path]) -> Dataset:
        frame = DataIO._numeric_frame(Path(path))
        return Dataset(values=frame.to_numpy())

    @staticmethod
    def read_intervention(path: Union[str, Path], target: int, d: int) -> InterventionSet:
        """Rebuild an InterventionSet, grouping rows by do-value in order of first appearance."""
        path = Path(path)
        frame = DataIO._numeric_frame(path, DataIO.column_names(d) + [DO_VALUE_COLUMN])
        values = frame[DataIO.column_names(d)].to_numpy()
        applied = frame[DO_VALUE_COLUMN].to_numpy()

        if not np.array_equal(values[:, target], applied):
            raise DataFormatError(
                f"{path.name}: column x{target} must equal {DO_VALUE_COLUMN} on every row"
            )

        do_values = list(pd.unique(applied))
        if len(do_values) < 2:
            raise DataFormatError(f"{path.name}: need at least 2 distinct do-values")

        order = np.argsort(pd.Categorical(applied, categories=do_values).codes, kind="stable")
        counts = [int((applied == x).sum()) for x in do_values]
        return InterventionSet(
            target=target,
            do_values=[float(x) for x in do_values],
            values=values[order],
            per_value_counts=counts,
        )

    @staticmethod
    def read_intervention_dir(directory: Union[str, Path], d: int) -> List[InterventionSet]:
        """One int_target{i}.csv per variable i = 0..d-1."""
        directory = Path(directory)
        interventions = []
        for target in range(d):
            path = DataIO.intervention_path(directory, target)
            if not path.is_file():
                raise DataFormatError(
                    f"missing intervention file for variable {target}: {path.name}"
                )
            interventions.append(DataIO.read_intervention(path, target, d))
        return interventions

    @staticmethod
    def write_json(payload: Dict[str, Any], path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(payload, indent=2), encoding="utf-8")
        logger.info("wrote %s", path)
        return path
