"""
Causal discovery under latent confounding with a simulator do-operator

Provides:
- Confounded structural causal model simulation with hard interventions
- Kernel-based detection of confounded variable pairs
- Total-effect orientation, indirect-edge filtering and cycle repair
- Conditional flow-matching models for observational conditionals
- A seeded benchmark grid over five canonical topologies
- CSV ingestion, diagnostics reports and an additive capacity regression

Available as a library, a command line (``causal-sim-discovery``) and an MCP
server (``causal-sim-discovery-mcp``).
"""

__version__ = "0.1.0"
