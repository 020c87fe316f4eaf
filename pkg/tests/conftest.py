"""Shared fixtures."""

from typing import List, Tuple

import numpy as np
import pytest

from src.tools.discovery_pipeline import acquire_interventions
from src.types import Dataset, InterventionSet, Mechanism, ScmSpec
from src.utils.data_io import DataIO
from src.utils.graph_ops import DagOps
from src.utils.scm_simulator import ScmSimulator


def unit_weight_spec(kind: str, gamma: float = 0.0, seed: int = 0, mechanism: str = "linear") -> ScmSpec:
    """Canonical topology with every edge weight equal to 1."""
    graph = DagOps.canonical_topology(kind)
    return ScmSpec(
        graph=graph,
        weights=graph.adjacency.astype(float),
        mechanism=Mechanism(mechanism),
        gamma=gamma,
        seed=seed,
    )


def simulate(
    spec: ScmSpec, n_obs: int = 500, k: int = 4, m_per_value: int = 50
) -> Tuple[Dataset, List[InterventionSet]]:
    simulator = ScmSimulator(spec)
    data = simulator.sample(n_obs)
    return data, acquire_interventions(simulator, data, k=k, m_per_value=m_per_value)


@pytest.fixture
def chain_spec() -> ScmSpec:
    return unit_weight_spec("chain")


@pytest.fixture
def chain_run(chain_spec: ScmSpec) -> Tuple[Dataset, List[InterventionSet]]:
    return simulate(chain_spec)


@pytest.fixture
def csv_inputs(tmp_path, chain_run):
    """Observational CSV and intervention directory for a chain run."""
    data, interventions = chain_run
    obs = DataIO.write_dataset(data, tmp_path / "obs.csv")
    int_dir = tmp_path / "ints"
    for intervention in interventions:
        DataIO.write_intervention(intervention, int_dir)
    return obs, int_dir


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
