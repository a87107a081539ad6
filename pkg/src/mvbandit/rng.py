"""Seeded, splittable random streams.

Every stochastic component takes a ``numpy.random.Generator``. Streams are
derived from a 64-bit base seed plus a tuple of small integer ids via
``SeedSequence`` spawn keys on top of the counter-based Philox generator,
so distinct id tuples give independent, non-overlapping streams and the
same (seed, ids) always reproduces the same draw sequence.
"""

from __future__ import annotations

import numpy as np

__all__ = ["derive_stream", "stream_key"]

# Roles for the two per-run streams.
ROLE_POLICY = 0
ROLE_ENV = 1


def stream_key(policy_id: int, rho_index: int, run: int, role: int) -> tuple[int, int, int, int]:
    """Canonical spawn key for one simulation stream."""
    if role not in (ROLE_POLICY, ROLE_ENV):
        raise ValueError(f"role must be {ROLE_POLICY} (policy) or {ROLE_ENV} (env), got {role}")
    return (int(policy_id), int(rho_index), int(run), int(role))


def derive_stream(base_seed: int, key: tuple[int, ...] = ()) -> np.random.Generator:
    """Derive an independent generator from ``base_seed`` and an id tuple.

    The same (base_seed, key) always yields the same stream; distinct keys
    yield streams that do not overlap.
    """
    ss = np.random.SeedSequence(int(base_seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))
