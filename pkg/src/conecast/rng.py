"""Seeded, splittable random streams.

Two abstractions, both deterministic given a root seed:

* ``RandomStream``: a tree of independent generators built on
  ``numpy.random.SeedSequence`` spawn keys.  Child streams are addressed by
  integer key tuples, so independent work units (ensemble draws, Monte Carlo
  paths) can be split without coordination.
* ``counter_uniforms``: counter-addressed uniform blocks from a Philox
  generator.  A consumer that knows its absolute cell index can re-derive its
  own draws without generating anything that precedes them, and the mapping
  from index to value never shifts when neighbouring regions grow.
"""

import numpy as np


class RandomStream:
    """A node in a deterministic tree of random generators."""

    def __init__(self, seed_seq):
        self._seq = seed_seq

    @classmethod
    def from_seed(cls, seed):
        return cls(np.random.SeedSequence(int(seed)))

    def child(self, *key):
        """Independent stream addressed by a tuple of non-negative ints."""
        if any(int(k) < 0 for k in key):
            raise ValueError("stream keys must be non-negative")
        parent = self._seq
        seq = np.random.SeedSequence(
            entropy=parent.entropy,
            spawn_key=tuple(parent.spawn_key) + tuple(int(k) for k in key),
        )
        return RandomStream(seq)

    def generator(self):
        """Fresh Generator for this node. Repeated calls restart the stream."""
        return np.random.Generator(np.random.PCG64(self._seq))


def counter_uniforms(seed, start, count):
    """`count` uniforms in (0,1) at absolute draw offsets start..start+count-1.

    Deterministic in (seed, offset): disjoint ranges give independent values,
    overlapping ranges give identical values.
    """
    start, count = int(start), int(count)
    # Philox.advance counts 4-output blocks, not single draws
    block, rem = divmod(start, 4)
    bg = np.random.Philox(key=int(seed))
    bg.advance(block)
    u = np.random.Generator(bg).random(count + rem)[rem:]
    # the open interval matters downstream (inverse normal CDF rejects 0)
    return np.clip(u, 1e-300, 1.0 - 1e-16)
