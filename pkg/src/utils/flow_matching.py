"""Conditional flow matching for one-dimensional conditionals P(X_j | X_i)."""

import logging
import math
from typing import Any, Dict, List, Optional

import numpy as np
import torch
from torch import nn

from ..types import Dataset, FlowModel, TrainingError
from .settings import FlowConfig

logger = logging.getLogger(__name__)

MIN_TRAINING_ROWS = 50


class FlowMatching:
    """Train and sample a small MLP velocity field v(x, t, c)."""

    @staticmethod
    def build_network(
        hidden: int, zero_init: bool = False, dtype: torch.dtype = torch.float32
    ) -> nn.Sequential:
        """Inputs (x, t, c) -> two hidden SiLU layers of width ``hidden`` -> velocity."""
        network = nn.Sequential(
            nn.Linear(3, hidden),
            nn.SiLU(),
            nn.Linear(hidden, hidden),
            nn.SiLU(),
            nn.Linear(hidden, 1),
        ).to(dtype)
        if zero_init:
            nn.init.zeros_(network[-1].weight)
            nn.init.zeros_(network[-1].bias)
        return network

    @staticmethod
    def velocity(
        network: nn.Module, x: torch.Tensor, t: torch.Tensor, c: torch.Tensor
    ) -> torch.Tensor:
        return network(torch.stack([x, t, c], dim=-1)).squeeze(-1)

    @staticmethod
    def cfm_loss(
        network: nn.Module,
        x0: torch.Tensor,
        x1: torch.Tensor,
        t: torch.Tensor,
        c: torch.Tensor,
    ) -> torch.Tensor:
        """Mean squared error of v(x_t, t, c) against the straight-path velocity x1 - x0."""
        xt = (1 - t) * x0 + t * x1
        target = x1 - x0
        return torch.mean((FlowMatching.velocity(network, xt, t, c) - target) ** 2)

    @staticmethod
    def _standardise(values: np.ndarray) -> tuple:
        loc = float(np.mean(values))
        scale = float(np.std(values))
        return loc, scale if scale > 0 else 1.0

    @staticmethod
    def zero_model(pair: tuple, config: Optional[FlowConfig] = None) -> FlowModel:
        """Untrained model whose velocity field is identically zero."""
        config = config or FlowConfig()
        with torch.random.fork_rng():
            torch.manual_seed(config.seed)
            network = FlowMatching.build_network(config.hidden, zero_init=True)
        return FlowModel(
            pair=(int(pair[0]), int(pair[1])),
            network=network,
            hidden=config.hidden,
            ode_steps=config.ode_steps,
        )

    @staticmethod
    def train_flow(data: Dataset, i: int, j: int, config: Optional[FlowConfig] = None) -> FlowModel:
        """
        Fit v_theta so that integrating it from N(0, 1) reproduces P(X_j | X_i = c).

        Args:
            data: Observational dataset (n >= 50)
            i: Conditioning column
            j: Target column
            config: Network and optimiser settings

        Returns:
            FlowModel with the per-epoch mean loss trace
        """
        config = config or FlowConfig()
        if data.n < MIN_TRAINING_ROWS:
            raise TrainingError(f"need at least {MIN_TRAINING_ROWS} rows to train, got {data.n}")

        cond_loc, cond_scale = FlowMatching._standardise(data.column(i))
        target_loc, target_scale = FlowMatching._standardise(data.column(j))
        condition = torch.as_tensor((data.column(i) - cond_loc) / cond_scale, dtype=torch.float32)
        target = torch.as_tensor((data.column(j) - target_loc) / target_scale, dtype=torch.float32)

        generator = torch.Generator().manual_seed(config.seed)
        with torch.random.fork_rng():
            torch.manual_seed(config.seed)
            network = FlowMatching.build_network(config.hidden)
        optimizer = torch.optim.Adam(
            network.parameters(), lr=config.step_size, betas=(0.9, 0.999)
        )

        trace: List[float] = []
        for epoch in range(config.epochs):
            order = torch.randperm(data.n, generator=generator)
            epoch_loss = 0.0
            batches = 0
            for start in range(0, data.n, config.batch):
                index = order[start : start + config.batch]
                x1 = target[index]
                c = condition[index]
                x0 = torch.randn(x1.shape, generator=generator)
                t = torch.rand(x1.shape, generator=generator)

                loss = FlowMatching.cfm_loss(network, x0, x1, t, c)
                if not torch.isfinite(loss):
                    raise TrainingError(
                        f"non-finite loss at epoch {epoch} for pair ({i}, {j}); "
                        f"step_size {config.step_size} is likely too large"
                    )
                optimizer.zero_grad()
                loss.backward()
                optimizer.step()

                epoch_loss += float(loss.item())
                batches += 1
            trace.append(epoch_loss / batches)

        logger.debug(
            "flow (%d, %d): loss %.4f -> %.4f over %d epochs", i, j, trace[0], trace[-1], len(trace)
        )
        return FlowModel(
            pair=(i, j),
            network=network,
            hidden=config.hidden,
            ode_steps=config.ode_steps,
            cond_loc=cond_loc,
            cond_scale=cond_scale,
            target_loc=target_loc,
            target_scale=target_scale,
            train_loss_trace=trace,
        )

    @staticmethod
    def sample_conditional(model: FlowModel, c: float, n_samples: int, seed: int = 0) -> np.ndarray:
        """Explicit Euler integration of dx/dt = v(x, t, c) from t=0 to 1, starting at N(0, 1)."""
        if n_samples <= 0:
            return np.empty(0)

        generator = torch.Generator().manual_seed(seed)
        dtype = next(model.network.parameters()).dtype
        x = torch.randn(n_samples, generator=generator).to(dtype)
        condition = torch.full_like(x, (c - model.cond_loc) / model.cond_scale)
        dt = 1.0 / model.ode_steps

        with torch.no_grad():
            for step in range(model.ode_steps):
                t = torch.full_like(x, step * dt)
                x = x + dt * FlowMatching.velocity(model.network, x, t, condition)

        samples = x.double().numpy() * model.target_scale + model.target_loc
        if not np.all(np.isfinite(samples)):
            raise TrainingError(f"non-finite trajectory for pair {model.pair} at c = {c}")
        return samples

    @staticmethod
    def evaluation_loss(model: FlowModel, data: Dataset, seed: int = 0) -> Dict[str, float]:
        """CFM loss of the model on ``data`` next to the zero-field baseline E[(x1 - x0)^2]."""
        i, j = model.pair
        generator = torch.Generator().manual_seed(seed)
        dtype = next(model.network.parameters()).dtype
        c = torch.as_tensor((data.column(i) - model.cond_loc) / model.cond_scale, dtype=dtype)
        x1 = torch.as_tensor((data.column(j) - model.target_loc) / model.target_scale, dtype=dtype)
        x0 = torch.randn(x1.shape, generator=generator).to(dtype)
        t = torch.rand(x1.shape, generator=generator).to(dtype)

        with torch.no_grad():
            loss = float(FlowMatching.cfm_loss(model.network, x0, x1, t, c))
            baseline = float(torch.mean((x1 - x0) ** 2))
        return {"loss": loss, "baseline": baseline}

    @staticmethod
    def to_dict(model: FlowModel) -> Dict[str, Any]:
        """Flat parameter array with the shape metadata needed to rebuild the network."""
        flat: List[float] = []
        shapes = []
        for name, parameter in model.network.named_parameters():
            shapes.append({"name": name, "shape": list(parameter.shape)})
            flat.extend(parameter.detach().double().flatten().tolist())
        return {
            "pair": list(model.pair),
            "hidden": model.hidden,
            "odeSteps": model.ode_steps,
            "standardisation": {
                "condLoc": model.cond_loc,
                "condScale": model.cond_scale,
                "targetLoc": model.target_loc,
                "targetScale": model.target_scale,
            },
            "shapes": shapes,
            "params": flat,
            "trainLossTrace": model.train_loss_trace,
        }

    @staticmethod
    def from_dict(payload: Dict[str, Any]) -> FlowModel:
        network = FlowMatching.build_network(int(payload["hidden"]))
        flat = torch.as_tensor(payload["params"], dtype=torch.float32)
        offset = 0
        state = {}
        for entry in payload["shapes"]:
            size = math.prod(entry["shape"])
            state[entry["name"]] = flat[offset : offset + size].reshape(entry["shape"])
            offset += size
        network.load_state_dict(state)
        standardisation = payload["standardisation"]
        return FlowModel(
            pair=(int(payload["pair"][0]), int(payload["pair"][1])),
            network=network,
            hidden=int(payload["hidden"]),
            ode_steps=int(payload["odeSteps"]),
            cond_loc=standardisation["condLoc"],
            cond_scale=standardisation["condScale"],
            target_loc=standardisation["targetLoc"],
            target_scale=standardisation["targetScale"],
            train_loss_trace=list(payload.get("trainLossTrace", [])),
        )
