"""MCP tool implementations: benchmark grid, CSV discovery, additive regression, diagnostics."""
