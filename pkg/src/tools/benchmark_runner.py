"""Benchmark grid over topologies, mechanisms, confounder strengths and seeds."""

import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from itertools import product
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import pandas as pd
from mcp.types import TextContent

from ..types import GraphKind, Mechanism, ResultRow
from ..utils.graph_ops import DagOps
from ..utils.scm_simulator import ScmSimulator
from ..utils.settings import BenchConfig
from .discovery_pipeline import acquire_interventions, discover

logger = logging.getLogger(__name__)

BASELINES_PATH = Path(__file__).resolve().parent.parent / "data" / "published_baselines.json"

Cell = Tuple[GraphKind, Mechanism, float, int]


def grid_cells(config: BenchConfig) -> List[Cell]:
    """Every (graph, mechanism, gamma, replicate) combination in a fixed order."""
    return [
        (graph, mechanism, float(gamma), replicate)
        for mechanism, graph, gamma, replicate in product(
            config.mechanisms, config.graphs, config.gammas, range(config.seeds)
        )
    ]


def cell_seed(config: BenchConfig, cell: Cell) -> int:
    graph, mechanism, gamma, replicate = cell
    return ScmSimulator.derive_seed(
        config.base_seed, graph.value, mechanism.value, f"{gamma:.6f}", replicate
    )


def run_cell(config: BenchConfig, cell: Cell) -> ResultRow:
    """Simulate, intervene, discover and score one grid cell; failures become error rows."""
    graph, mechanism, gamma, replicate = cell
    started = time.perf_counter()
    try:
        seed = cell_seed(config, cell)
        spec = ScmSimulator.build_spec(graph, mechanism, gamma, seed)
        simulator = ScmSimulator(spec)
        data = simulator.sample(config.n_obs)
        interventions = acquire_interventions(
            simulator, data, k=config.k, m_per_value=config.n_int // config.k
        )
        result = discover(data, interventions, config.discovery)
        metrics = DagOps.edge_metrics(spec.graph, result.graph)
        return ResultRow(
            graph=graph.value,
            mechanism=mechanism.value,
            gamma=gamma,
            seed=replicate,
            f1=metrics.f1,
            precision=metrics.precision,
            recall=metrics.recall,
            shd=metrics.shd,
            runtime_ms=round((time.perf_counter() - started) * 1000, 3),
        )
    except Exception as e:
        logger.error("grid cell %s failed: %s", cell, e, exc_info=True)
        return ResultRow(
            graph=graph.value,
            mechanism=mechanism.value,
            gamma=gamma,
            seed=replicate,
            f1=float("nan"),
            precision=float("nan"),
            recall=float("nan"),
            shd=float("nan"),
            runtime_ms=round((time.perf_counter() - started) * 1000, 3),
            error=f"{type(e).__name__}: {e}",
        )


class RowAppender:
    """Single writer that appends result rows to a CSV as they arrive."""

    def __init__(self, path: Optional[Union[str, Path]]):
        self.path = Path(path) if path else None
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            pd.DataFrame(columns=list(ResultRow.FIELDS)).to_csv(self.path, index=False)

    def append(self, row: ResultRow) -> None:
        if self.path is None:
            return
        pd.DataFrame([row.to_dict()], columns=list(ResultRow.FIELDS)).to_csv(
            self.path, mode="a", header=False, index=False
        )


def run_grid(config: BenchConfig) -> List[ResultRow]:
    """
    Run every grid cell and return the rows in grid order.

    Rows are appended to ``config.out`` as each cell finishes; with
    ``workers > 1`` cells run in a process pool.
    """
    cells = grid_cells(config)
    appender = RowAppender(config.out)
    rows: Dict[int, ResultRow] = {}
    logger.info("running %d grid cells with %d worker(s)", len(cells), config.workers)

    if config.workers == 1:
        for index, cell in enumerate(cells):
            rows[index] = run_cell(config, cell)
            appender.append(rows[index])
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            futures = {pool.submit(run_cell, config, cell): index for index, cell in enumerate(cells)}
            for future in as_completed(futures):
                index = futures[future]
                rows[index] = future.result()
                appender.append(rows[index])
                logger.debug("cell %d/%d done", len(rows), len(cells))

    failed = sum(1 for row in rows.values() if row.error)
    if failed:
        logger.warning("%d of %d grid cells failed", failed, len(cells))
    return [rows[index] for index in range(len(cells))]


def load_published_baselines() -> Dict[str, Any]:
    return json.loads(BASELINES_PATH.read_text(encoding="utf-8"))


def aggregate(rows: Sequence[ResultRow]) -> Dict[str, Any]:
    """
    Mean F1 per graph, per (graph, gamma), per mechanism and overall.

    Error rows are excluded from the means and counted separately.
    """
    if not rows:
        raise ValueError("cannot aggregate an empty result set")

    frame = pd.DataFrame([row.to_dict() for row in rows])
    valid = frame[frame["error"] == ""]
    if valid.empty:
        raise ValueError("every grid row failed; nothing to aggregate")

    per_graph = valid.groupby("graph", sort=True)["f1"].mean()
    per_graph_gamma = valid.groupby(["graph", "gamma"], sort=True)["f1"].mean()
    per_mechanism = valid.groupby("mechanism", sort=True)["f1"].mean()

    return {
        "overall": float(valid["f1"].mean()),
        "perGraph": {graph: float(value) for graph, value in per_graph.items()},
        "perGraphGamma": {
            f"{graph}@{gamma:.1f}": float(value) for (graph, gamma), value in per_graph_gamma.items()
        },
        "perMechanism": {mechanism: float(value) for mechanism, value in per_mechanism.items()},
        "rows": int(len(frame)),
        "failedRows": int(len(frame) - len(valid)),
    }


def _baseline_columns(summary: Dict[str, Any]) -> Tuple[List[str], Dict[str, Dict[str, float]]]:
    published = load_published_baselines()
    columns = list(published["methods"]) + ["reference"]
    table: Dict[str, Dict[str, float]] = {}
    if set(summary["perMechanism"]) == {Mechanism.LINEAR.value}:
        table.update(published["linear"]["perGraph"])
        table["overall"] = published["linear"]["overall"]
    else:
        table.update(published["nonlinear"]["perMechanism"])
        table["overall"] = published["nonlinear"]["overall"]
    return columns, table


def render_table(summary: Dict[str, Any], published_baselines: bool = False) -> str:
    """Aligned plain-text table of the summary, optionally next to published F1 numbers."""
    if len(summary["perMechanism"]) > 1 or Mechanism.LINEAR.value not in summary["perMechanism"]:
        entries = dict(summary["perMechanism"])
        label = "mechanism"
    else:
        entries = dict(summary["perGraph"])
        label = "graph"
    entries["overall"] = summary["overall"]

    columns: List[str] = []
    published: Dict[str, Dict[str, float]] = {}
    if published_baselines:
        columns, published = _baseline_columns(summary)

    header = f"{label:<10} {'measured':>9}" + "".join(f" {name:>9}" for name in columns)
    lines = [header, "-" * len(header)]
    for name, value in entries.items():
        line = f"{name:<10} {value:>9.3f}"
        for column in columns:
            number = published.get(name, {}).get(column)
            line += f" {number:>9.3f}" if number is not None else f" {'-':>9}"
        lines.append(line)
    if published_baselines:
        lines.append("(columns after 'measured' are published numbers, not re-run here)")
    return "\n".join(lines)


def write_summary_csv(summary: Dict[str, Any], path: Union[str, Path]) -> Path:
    """Long-format CSV: scope, key, f1."""
    records = [{"scope": "overall", "key": "all", "f1": summary["overall"]}]
    for scope in ("perGraph", "perGraphGamma", "perMechanism"):
        records.extend({"scope": scope, "key": key, "f1": value} for key, value in summary[scope].items())
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(records).to_csv(path, index=False)
    return path


async def run_benchmark(args: Dict[str, Any]) -> Sequence[TextContent]:
    """
    Run the benchmark grid and report aggregated F1.

    Features:
    - Linear or nonlinear mechanisms over the five canonical graphs
    - Seeded, reproducible cells
    - Incremental CSV output
    - Optional published baseline columns
    """
    config = BenchConfig.model_validate(args)
    rows = run_grid(config)
    summary = aggregate(rows)
    result = {
        "config": config.model_dump(mode="json"),
        "summary": summary,
        "table": render_table(summary, config.published_baselines),
    }
    if config.out:
        result["summaryCsv"] = str(
            write_summary_csv(summary, Path(config.out).with_suffix(".summary.csv"))
        )
    return [TextContent(type="text", text=json.dumps(result, indent=2))]
