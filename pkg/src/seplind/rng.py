"""Counter-based random streams, one per trajectory.

Each trajectory draws from a Philox generator keyed by (master seed,
trajectory index); the Philox counter advances with the substep index.  A
trajectory's numbers therefore depend only on its index, never on which
worker runs it or in what order.
"""
from dataclasses import dataclass

import numpy as np

__all__ = ["TrajectoryStream", "MASK64"]

MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class TrajectoryStream:
    seed: int
    index: int

    def __post_init__(self):
        if not 0 <= self.seed <= MASK64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if not 0 <= self.index <= MASK64:
            raise ValueError("trajectory index must be a 64-bit unsigned integer")

    def bit_generator(self):
        return np.random.Philox(key=np.array([self.seed, self.index], dtype=np.uint64))

    def uniforms(self, n):
        """The first ``n`` uniforms in [0, 1); one per substep."""
        return np.random.Generator(self.bit_generator()).random(n)
