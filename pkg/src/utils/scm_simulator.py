"""Synthetic structural causal model with a shared latent confounder.

The simulator plays the role of the physical do-operator: ``intervene`` clamps a
variable, severs every input to it (the latent confounder included) and evaluates
the descendants with their unchanged mechanisms.
"""

import hashlib
import logging
from typing import Any, Optional, Sequence, Tuple, Union

import numpy as np

from ..types import Dag, Dataset, GraphKind, InterventionSet, Mechanism, ScmSpec, SimulationError
from .graph_ops import DagOps

logger = logging.getLogger(__name__)

WEIGHT_LOW = 0.5
WEIGHT_HIGH = 1.5

# Random streams used under one spec seed.
_OBSERVATIONAL_STREAM = 0
_INTERVENTIONAL_STREAM = 1
_PERTURBATION_STREAM = 2


class ScmSimulator:
    """Sampler and hard-intervention oracle for one ScmSpec."""

    def __init__(self, spec: ScmSpec):
        if spec.weights.shape != (spec.d, spec.d):
            raise SimulationError(f"weights must be {spec.d}x{spec.d}")
        if np.any((spec.weights != 0) != spec.graph.adjacency):
            raise SimulationError("weight support must equal the graph adjacency")
        if spec.gamma < 0:
            raise SimulationError("gamma must be nonnegative")
        if spec.noise_std <= 0:
            raise SimulationError("noise_std must be positive")

        self.spec = spec
        self._order = DagOps.topological_order(spec.graph)
        self._parents = [spec.graph.parents(j) for j in range(spec.d)]

    @property
    def d(self) -> int:
        return self.spec.d

    @staticmethod
    def random_weights(graph: Dag, seed: int) -> np.ndarray:
        """Edge weights with |A_ij| ~ U[0.5, 1.5] and a random sign; zero off the edges."""
        rng = np.random.default_rng(seed)
        weights = np.zeros((graph.d, graph.d))
        for i, j in graph.edges:
            magnitude = rng.uniform(WEIGHT_LOW, WEIGHT_HIGH)
            sign = 1.0 if rng.random() < 0.5 else -1.0
            weights[i, j] = sign * magnitude
        return weights

    @staticmethod
    def derive_seed(*parts: Any) -> int:
        """Stable 64-bit seed from arbitrary parts (independent of PYTHONHASHSEED)."""
        key = "|".join(str(part) for part in parts).encode("utf-8")
        return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")

    @staticmethod
    def build_spec(
        kind: Union[GraphKind, str],
        mechanism: Union[Mechanism, str] = Mechanism.LINEAR,
        gamma: float = 0.0,
        seed: int = 0,
        noise_std: float = 1.0,
    ) -> ScmSpec:
        """Canonical topology with seed-derived random weights."""
        graph = DagOps.canonical_topology(kind)
        return ScmSpec(
            graph=graph,
            weights=ScmSimulator.random_weights(graph, seed),
            mechanism=Mechanism(mechanism),
            gamma=gamma,
            noise_std=noise_std,
            seed=seed,
        )

    def _rng(self, stream: int, key: int, seed: Optional[int]) -> np.random.Generator:
        base = self.spec.seed if seed is None else seed
        return np.random.default_rng(np.random.SeedSequence([base, stream, key]))

    def _mechanism(self, x: np.ndarray, weight: float) -> np.ndarray:
        mechanism = self.spec.mechanism
        if mechanism == Mechanism.LINEAR:
            return weight * x
        if mechanism == Mechanism.QUADRATIC:
            return weight * x + 0.5 * x**2
        if mechanism == Mechanism.SINUSOIDAL:
            return weight * x + 0.5 * np.sin(np.pi * x)
        if mechanism == Mechanism.SATURATING:
            return np.tanh(weight * x)
        if mechanism == Mechanism.ABSOLUTE:
            return weight * x + 0.5 * np.abs(x)
        raise SimulationError(f"Unknown mechanism: {mechanism}")

    def _propagate(
        self,
        rng: np.random.Generator,
        n: int,
        clamped: Optional[Tuple[int, np.ndarray]] = None,
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Evaluate all variables in topological order; returns (values, latent Z)."""
        d = self.spec.d
        z = rng.standard_normal(n)
        noise = rng.normal(0.0, self.spec.noise_std, size=(n, d))
        values = np.zeros((n, d))

        for j in self._order:
            if clamped is not None and j == clamped[0]:
                values[:, j] = clamped[1]
                continue
            column = self.spec.gamma * z + noise[:, j]
            for i in self._parents[j]:
                column = column + self._mechanism(values[:, i], self.spec.weights[i, j])
            values[:, j] = column

        return values, z

    def sample(self, n: int, seed: Optional[int] = None) -> Dataset:
        """Draw ``n`` i.i.d. observational rows."""
        if n < 1:
            raise SimulationError("n must be at least 1")
        values, _ = self._propagate(self._rng(_OBSERVATIONAL_STREAM, 0, seed), n)
        return Dataset(values=values)

    def intervene(
        self,
        target: int,
        do_values: Sequence[float],
        m_per_value: int,
        seed: Optional[int] = None,
        return_latent: bool = False,
    ) -> Union[InterventionSet, Tuple[InterventionSet, np.ndarray]]:
        """
        Hard intervention do(X_target = x) for every x in ``do_values``.

        Args:
            target: Index of the clamped variable
            do_values: K >= 2 distinct values
            m_per_value: Rows drawn per do-value
            seed: Overrides the spec seed for this call
            return_latent: Also return the confounder draws (testing only)

        Returns:
            InterventionSet whose rows are grouped by do-value in the given order
        """
        do_values = [float(x) for x in do_values]
        if len(do_values) < 2:
            raise SimulationError(
                "single fixed-value intervention cannot reveal causal influence; need K >= 2"
            )
        if len(set(do_values)) != len(do_values):
            raise SimulationError("do-values must be distinct")
        if not 0 <= target < self.spec.d:
            raise SimulationError(f"target {target} out of range for d={self.spec.d}")
        if m_per_value < 1:
            raise SimulationError("m_per_value must be at least 1")

        applied = np.repeat(np.asarray(do_values), m_per_value)
        rng = self._rng(_INTERVENTIONAL_STREAM, target, seed)
        values, z = self._propagate(rng, applied.size, clamped=(target, applied))
        values = self._perturb(values, target, seed)

        result = InterventionSet(
            target=target,
            do_values=do_values,
            values=values,
            per_value_counts=[m_per_value] * len(do_values),
        )
        return (result, z) if return_latent else result

    def _perturb(self, values: np.ndarray, target: int, seed: Optional[int]) -> np.ndarray:
        return values


class NoisySimulator(ScmSimulator):
    """Simulator with approximation error: N(0, eps_sim^2) added to every non-target output."""

    def __init__(self, spec: ScmSpec, eps_sim: float):
        if eps_sim < 0:
            raise SimulationError("eps_sim must be nonnegative")
        super().__init__(spec)
        self.eps_sim = eps_sim

    def _perturb(self, values: np.ndarray, target: int, seed: Optional[int]) -> np.ndarray:
        if self.eps_sim == 0:
            return values
        rng = self._rng(_PERTURBATION_STREAM, target, seed)
        perturbation = rng.normal(0.0, self.eps_sim, size=values.shape)
        perturbation[:, target] = 0.0
        return values + perturbation


def sample_observational(spec: ScmSpec, n: int, seed: Optional[int] = None) -> Dataset:
    return ScmSimulator(spec).sample(n, seed=seed)


def intervene(
    spec: ScmSpec,
    target: int,
    do_values: Sequence[float],
    m_per_value: int,
    seed: Optional[int] = None,
) -> InterventionSet:
    return ScmSimulator(spec).intervene(target, do_values, m_per_value, seed=seed)


def noisy_simulator(spec: ScmSpec, eps_sim: float) -> NoisySimulator:
    return NoisySimulator(spec, eps_sim)
