#!/usr/bin/env python3
"""
Causal Discovery Simulator MCP Server

Exposes the benchmark grid, CSV discovery, the additive regression and the
diagnostics report as MCP tools.
"""

import asyncio
import json
import logging
from typing import Any, Sequence

from mcp.server import Server
from mcp.server.stdio import stdio_server
from mcp.types import TextContent, Tool

from . import __version__
from .tools.benchmark_runner import run_benchmark
from .tools.diagnostics_report import run_diagnose
from .tools.file_discovery import run_discover
from .tools.sei_regression import run_sei
from .utils.settings import Settings

logger = logging.getLogger(__name__)

_GRAPH_ENUM = ["fork", "chain", "vstr", "diamond", "collider"]
_MECHANISM_ENUM = ["linear", "nl1", "nl2", "nl3", "nl4"]

_DISCOVERY_PROPERTIES = {
    "tauE": {"type": "number", "description": "Absolute effect threshold"},
    "tauScale": {"type": "number", "description": "Threshold as a fraction of std(X_j)"},
    "tauPlus": {"type": "number", "description": "Stricter-threshold ratio (> 1)"},
    "tauInd": {"type": "number", "description": "Indirect-edge hop threshold"},
    "mmdAgg": {"type": "string", "enum": ["mean", "max"], "description": "Gap aggregation over do-values"},
    "obsCond": {"type": "string", "enum": ["kde", "flow"], "description": "Observational conditional source"},
    "stat": {
        "type": "string",
        "enum": ["pooled", "per_value_max", "dose_response"],
        "description": "Effect decision statistic",
    },
    "noConf": {"type": "boolean", "description": "Skip confounding detection"},
    "noInd": {"type": "boolean", "description": "Skip the indirect-edge filter"},
}

# Tool definitions
TOOLS: list[Tool] = [
    Tool(
        name="bench",
        description="Run the synthetic benchmark grid and report mean F1",
        inputSchema={
            "type": "object",
            "properties": {
                "mech": {"type": "array", "items": {"type": "string", "enum": _MECHANISM_ENUM}, "description": "Mechanisms"},
                "graphs": {"type": "array", "items": {"type": "string", "enum": _GRAPH_ENUM}, "description": "Topologies"},
                "gammas": {"type": "array", "items": {"type": "number"}, "description": "Confounder strengths"},
                "seeds": {"type": "number", "description": "Replicates per cell"},
                "nObs": {"type": "number", "description": "Observational rows"},
                "nInt": {"type": "number", "description": "Interventional rows per variable"},
                "k": {"type": "number", "description": "Do-values per variable"},
                "out": {"type": "string", "description": "Results CSV"},
                "workers": {"type": "number", "description": "Worker processes"},
                "flow": {"type": "boolean", "description": "Train pair flows"},
                "baselines": {"type": "boolean", "description": "Show published baseline F1"},
                **_DISCOVERY_PROPERTIES,
            },
        },
    ),
    Tool(
        name="discover",
        description="Discover a causal graph from observational and interventional CSV files",
        inputSchema={
            "type": "object",
            "properties": {
                "obs": {"type": "string", "description": "Observational CSV"},
                "ints": {"type": "string", "description": "Directory of int_target{i}.csv"},
                "config": {"type": "string", "description": "DiscoveryConfig JSON"},
                "out": {"type": "string", "description": "Result JSON path"},
                **_DISCOVERY_PROPERTIES,
            },
            "required": ["obs", "ints"],
        },
    ),
    Tool(
        name="sei",
        description="Capacity regression on LUMO and fluorine count; predicts unmeasured additives",
        inputSchema={
            "type": "object",
            "properties": {
                "table": {"type": "string", "description": "Descriptor CSV (bundled table by default)"},
            },
        },
    ),
    Tool(
        name="diagnose",
        description="Kernel gaps, effect matrices and flow multimodality for CSV inputs",
        inputSchema={
            "type": "object",
            "properties": {
                "obs": {"type": "string", "description": "Observational CSV"},
                "ints": {"type": "string", "description": "Directory of int_target{i}.csv"},
                "config": {"type": "string", "description": "DiscoveryConfig JSON"},
                "report": {"type": "string", "description": "Report JSON path"},
                "flow": {"type": "boolean", "description": "Run the flow multimodality check"},
            },
            "required": ["obs", "ints"],
        },
    ),
]


def _discovery_overrides(args: dict[str, Any]) -> dict[str, Any]:
    overrides: dict[str, Any] = {}
    if "tauE" in args:
        overrides["tau_e"] = args["tauE"]
    if "tauScale" in args:
        overrides["tau_scale"] = args["tauScale"]
    if "tauPlus" in args:
        overrides["tau_plus_ratio"] = args["tauPlus"]
    if "tauInd" in args:
        overrides["tau_4b"] = args["tauInd"]
    if "mmdAgg" in args:
        overrides["mmd_agg"] = args["mmdAgg"]
    if "obsCond" in args:
        overrides["obs_conditional"] = args["obsCond"]
    if "stat" in args:
        overrides["effect_statistic"] = args["stat"]
    if "noConf" in args:
        overrides["skip_confounding"] = args["noConf"]
    if "noInd" in args:
        overrides["skip_indirect_filter"] = args["noInd"]
    return overrides


def map_params(tool: str, args: dict[str, Any]) -> dict[str, Any]:
    """Map short parameter names to long names for internal use."""
    if not args:
        return {}

    mapped: dict[str, Any] = {}

    # Common mappings
    if "obs" in args:
        mapped["obs_csv"] = args["obs"]
    if "ints" in args:
        mapped["int_dir"] = args["ints"]

    # Tool-specific mappings
    if tool == "bench":
        if "mech" in args:
            mapped["mechanisms"] = args["mech"]
        for key, name in (("graphs", "graphs"), ("gammas", "gammas"), ("seeds", "seeds"),
                          ("nObs", "n_obs"), ("nInt", "n_int"), ("k", "k"), ("out", "out"),
                          ("workers", "workers")):
            if key in args:
                mapped[name] = args[key]
        if "baselines" in args:
            mapped["published_baselines"] = args["baselines"]
        discovery = _discovery_overrides(args)
        if args.get("flow"):
            discovery["train_flows"] = True
        if discovery:
            mapped["discovery"] = discovery

    elif tool == "discover":
        if "out" in args:
            mapped["out"] = args["out"]
        discovery = _discovery_overrides(args)
        if discovery and "config" in args:
            raise ValueError("pass either a config file or inline threshold overrides, not both")
        if discovery:
            mapped["config"] = discovery
        elif "config" in args:
            mapped["config"] = args["config"]

    elif tool == "sei":
        if "table" in args:
            mapped["table_csv"] = args["table"]

    elif tool == "diagnose":
        if "config" in args:
            mapped["config"] = args["config"]
        if "report" in args:
            mapped["report"] = args["report"]
        if "flow" in args:
            mapped["with_flow"] = args["flow"]

    return mapped


async def call_tool(name: str, arguments: dict[str, Any]) -> Sequence[TextContent]:
    """Call the appropriate tool based on name."""
    try:
        mapped_args = map_params(name, arguments)

        if name == "bench":
            result = await run_benchmark(mapped_args)
        elif name == "discover":
            result = await run_discover(mapped_args)
        elif name == "sei":
            result = await run_sei(mapped_args)
        elif name == "diagnose":
            result = await run_diagnose(mapped_args)
        else:
            raise ValueError(f"Unknown tool: {name}")

        return result

    except Exception as e:
        logger.error(f"Error executing {name}: {str(e)}", exc_info=True)
        return [TextContent(
            type="text",
            text=json.dumps({"error": f"{type(e).__name__}: {e}", "tool": name}, indent=2),
        )]


async def main() -> None:
    """Main entry point for the MCP server."""
    Settings.from_env().configure_logging()
    logger.info("Starting Causal Discovery Simulator MCP Server v%s", __version__)

    # Create server instance
    server = Server("causal-sim-discovery-mcp")

    # Register tool list handler
    @server.list_tools()
    async def list_tools() -> list[Tool]:
        return TOOLS

    # Register tool call handler
    @server.call_tool()
    async def handle_call_tool(name: str, arguments: dict[str, Any]) -> Sequence[TextContent]:
        return await call_tool(name, arguments)

    # Run the server
    async with stdio_server() as (read_stream, write_stream):
        await server.run(
            read_stream,
            write_stream,
            server.create_initialization_options()
        )


def run() -> None:
    """Console-script entry point."""
    asyncio.run(main())


if __name__ == "__main__":
    run()
