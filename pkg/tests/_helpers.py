"""Shared test doubles for generator-driven code."""

import numpy as np


class FakeRng:
    """Returns queued arrays/scalars for each sampler method, in call order."""

    def __init__(self, **queues):
        self._queues = {name: list(vals) for name, vals in queues.items()}

    def _pop(self, name):
        if not self._queues.get(name):
            raise AssertionError(f"no queued draws left for {name}")
        return self._queues[name].pop(0)

    def standard_normal(self, size=None):
        return np.asarray(self._pop("standard_normal"), dtype=float)

    def standard_gamma(self, shape):
        return np.asarray(self._pop("standard_gamma"), dtype=float)

    def beta(self, a, b):
        return np.asarray(self._pop("beta"), dtype=float)


class CountingRng:
    """Delegates to a real generator while counting elements drawn per method."""

    def __init__(self, rng: np.random.Generator):
        self._rng = rng
        self.counts = {"standard_normal": 0, "standard_gamma": 0, "beta": 0}

    def standard_normal(self, size=None):
        out = self._rng.standard_normal(size)
        self.counts["standard_normal"] += int(np.size(out))
        return out

    def standard_gamma(self, shape):
        out = self._rng.standard_gamma(shape)
        self.counts["standard_gamma"] += int(np.size(out))
        return out

    def beta(self, a, b):
        out = self._rng.beta(a, b)
        self.counts["beta"] += int(np.size(out))
        return out

    def __getattr__(self, name):
        return getattr(self._rng, name)
