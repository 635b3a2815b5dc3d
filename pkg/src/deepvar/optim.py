"""SGD (Nesterov momentum), RMSProp and Adam with ``lr / (1 + decay * t)`` decay.

``t`` counts completed updates, so the first step uses the base rate.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields

import numpy as np

from .errors import ConfigError, NumericError

KINDS = ("SGD", "RMSP", "ADAM")


@dataclass
class OptimizerConfig:
    kind: str = "ADAM"
    learning_rate: float = 1e-4
    decay: float = 1e-5
    momentum: float = 0.9
    nesterov: bool = True
    rho: float = 0.9
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    clipnorm: float = 1.0

    def __post_init__(self):
        self.kind = str(self.kind).upper()
        if self.kind not in KINDS:
            raise ConfigError(f"optimizer.kind must be one of {', '.join(KINDS)}, got {self.kind!r}")
        if not self.learning_rate > 0:
            raise ConfigError(f"optimizer.learning_rate must be > 0, got {self.learning_rate}")
        if self.decay < 0:
            raise ConfigError(f"optimizer.decay must be >= 0, got {self.decay}")
        if not self.clipnorm > 0:
            raise ConfigError(f"optimizer.clipnorm must be > 0, got {self.clipnorm}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "OptimizerConfig":
        unknown = sorted(set(d) - {f.name for f in fields(cls)})
        if unknown:
            raise ConfigError(f"unknown optimizer config key(s): {', '.join(unknown)}")
        return cls(**d)


def effective_lr(config: OptimizerConfig, step_index: int) -> float:
    return config.learning_rate / (1.0 + config.decay * step_index)


def optimizer_step(config: OptimizerConfig, params: dict, grads: dict, state: dict, step_index: int) -> None:
    """Update ``params`` (name -> array) in place from ``grads``; ``state`` holds accumulators."""
    lr = effective_lr(config, step_index)
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise NumericError(f"non-finite gradient for {name} at step {step_index}")
        p = params[name]
        if config.kind == "SGD":
            v = state.setdefault(("velocity", name), np.zeros_like(p))
            v *= config.momentum
            v -= lr * g
            if config.nesterov:
                p += config.momentum * v - lr * g
            else:
                p += v
        elif config.kind == "RMSP":
            a = state.setdefault(("sq", name), np.zeros_like(p))
            a *= config.rho
            a += (1.0 - config.rho) * g * g
            p -= lr * g / (np.sqrt(a) + config.epsilon)
        else:
            m = state.setdefault(("m", name), np.zeros_like(p))
            v = state.setdefault(("v", name), np.zeros_like(p))
            m *= config.beta1
            m += (1.0 - config.beta1) * g
            v *= config.beta2
            v += (1.0 - config.beta2) * g * g
            t = step_index + 1
            m_hat = m / (1.0 - config.beta1 ** t)
            v_hat = v / (1.0 - config.beta2 ** t)
            p -= lr * m_hat / (np.sqrt(v_hat) + config.epsilon)


class Optimizer:
    """Stateful wrapper binding an :class:`OptimizerConfig` to a parameter list."""

    def __init__(self, config: OptimizerConfig, parameters):
        self.config = config
        self.parameters = list(parameters)
        self.state: dict = {}
        self.steps = 0

    def step(self, grads: list[np.ndarray] | None = None):
        if grads is None:
            grads = [p.grad for p in self.parameters]
        optimizer_step(self.config,
                       {p.name: p.data for p in self.parameters},
                       {p.name: g for p, g in zip(self.parameters, grads)},
                       self.state, self.steps)
        self.steps += 1
