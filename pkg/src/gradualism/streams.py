"""Deterministic random streams keyed by (master seed, replication, agent).

Every stream is a Philox-4x64 counter-based generator whose 128-bit key is

    key = (seed mod 2**64) * 2**64 + (replication mod 2**32) * 2**32 + agent

so any run is reproducible from the three indices alone, independent of
scheduling or worker count.  Agent component 0 is reserved for session-level
draws (the stage-2 reshuffle); agents use their 0-based id plus 1.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_LIMIT32 = 1 << 32

SESSION_STREAM = 0  # reserved agent component for session-level draws


def stream_key(seed: int, replication: int = 0, agent: int = SESSION_STREAM) -> int:
    """128-bit Philox key for one (seed, replication, agent) stream."""
    if not isinstance(seed, int) or not 0 <= seed <= _MASK64:
        raise ValueError(f"seed must be an integer in [0, 2**64), got {seed!r}")
    if not isinstance(replication, int) or not 0 <= replication < _LIMIT32:
        raise ValueError(f"replication must be an integer in [0, 2**32), got {replication!r}")
    if not isinstance(agent, int) or not 0 <= agent < _LIMIT32:
        raise ValueError(f"agent must be an integer in [0, 2**32), got {agent!r}")
    return (seed << 64) | (replication << 32) | agent


def stream(seed: int, replication: int = 0, agent: int = SESSION_STREAM) -> np.random.Generator:
    """Independent generator for one (seed, replication, agent) triple."""
    return np.random.Generator(np.random.Philox(key=stream_key(seed, replication, agent)))
