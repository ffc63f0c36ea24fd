"""Brox diffusion in a periodic Brownian environment (bindings to the C++ library)."""

import json

import numpy as np

from . import _core
from ._core import BroxError, ConfigError, ParameterError, __version__, commands, config_schema, default_config

__all__ = [
    "BroxError",
    "ConfigError",
    "ParameterError",
    "__version__",
    "commands",
    "config_schema",
    "default_config",
    "eigenvalues",
    "environment",
    "noise_coefficients",
    "run",
]


def noise_coefficients(seed, k_max):
    """Complex coefficients xi_1..xi_{k_max} of the environment."""
    return np.asarray(_core.noise_coefficients(seed, k_max), dtype=complex)


def environment(seed, n, M=1024, K=341):
    """Grid nodes, xi_n and W_n as numpy arrays."""
    return {k: np.asarray(v) for k, v in _core.environment(seed, n, M, K).items()}


def eigenvalues(seed, n, basis_modes=128, flat=False, ground_state=False):
    """Galerkin eigenvalues of the generator, largest first."""
    return np.asarray(_core.eigenvalues(seed, n, basis_modes, flat, ground_state))


def run(command, seed=1, **overrides):
    """Run one experiment. Config keys use underscores for dots, e.g. spectral__n=16 or {"spectral.n": 16}."""
    flat = {}
    for key, value in overrides.items():
        if isinstance(value, dict):
            flat.update({k: v for k, v in value.items()})
        else:
            flat[key.replace("__", ".")] = value
    as_text = {k: ",".join(map(str, v)) if isinstance(v, (list, tuple)) else str(v).lower() if isinstance(v, bool) else str(v)
               for k, v in flat.items()}
    out = _core.run(command, seed, as_text)
    out["extra"] = json.loads(out["extra"])
    return out
