"""2-D desk playground: config, state, dynamics, observation encoding."""

from .config import EnvConfig
from .env import (
    OBS_DIM,
    clamp_action,
    OBS_FIELDS,
    Action,
    EnvState,
    perturb_initial,
    reset,
    state_to_vector,
    step,
    vector_to_state,
    wrap_angle,
)

__all__ = [
    "Action",
    "EnvConfig",
    "EnvState",
    "OBS_DIM",
    "clamp_action",
    "OBS_FIELDS",
    "observe",
    "perturb_initial",
    "reset",
    "state_to_vector",
    "step",
    "vector_to_state",
    "wrap_angle",
]


def observe(state, normalizer):
    """Fixed-order normalized observation vector for one state."""
    import numpy as np

    vec = np.asarray(state_to_vector(state), dtype=np.float64)
    return normalizer.transform(vec.reshape(1, -1))[0]
