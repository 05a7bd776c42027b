"""Reproducible Monte-Carlo plumbing.

Random numbers come from counter-based Philox generators keyed by
(seed, stream_id); sub-streams are derived by hashing keys into a new
stream_id. Work is cut into fixed-size chunks, each with its own sub-stream,
and chunk moments are merged in a fixed pairwise tree. Results therefore do
not depend on how many threads ran the chunks.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1
DEFAULT_CHUNK = 1 << 16


@dataclass(frozen=True)
class SeededStream:
    seed: int = 0
    stream_id: int = 0

    def generator(self):
        key = np.array([self.seed & _MASK64, self.stream_id & _MASK64], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def spawn(self, *keys):
        """Child stream keyed by ``keys`` (non-negative ints)."""
        ss = np.random.SeedSequence([self.stream_id & _MASK64, *[int(k) & _MASK64 for k in keys]])
        return SeededStream(self.seed, int(ss.generate_state(1, np.uint64)[0]))


def rng_of(stream):
    if isinstance(stream, np.random.Generator):
        return stream
    return stream.generator()


@dataclass(frozen=True)
class Moments:
    """Count, mean and centred sum of squares of a sample."""

    n: int = 0
    mean: float = 0.0
    m2: float = 0.0

    @classmethod
    def of(cls, values):
        v = np.asarray(values, dtype=float).ravel()
        if v.size == 0:
            return cls()
        mean = float(np.sum(v) / v.size)
        return cls(int(v.size), mean, float(np.sum((v - mean) ** 2)))

    def merge(self, other):
        if self.n == 0:
            return other
        if other.n == 0:
            return self
        n = self.n + other.n
        delta = other.mean - self.mean
        mean = self.mean + delta * other.n / n
        m2 = self.m2 + other.m2 + delta * delta * self.n * other.n / n
        return Moments(n, mean, m2)

    @property
    def variance(self):
        return self.m2 / (self.n - 1) if self.n > 1 else 0.0

    @property
    def stderr(self):
        return math.sqrt(self.variance / self.n) if self.n > 1 else 0.0

    def scaled(self, c):
        return Moments(self.n, c * self.mean, c * c * self.m2)


def tree_merge(parts):
    """Pairwise merge in a fixed order."""
    parts = list(parts)
    if not parts:
        return Moments()
    while len(parts) > 1:
        nxt = [parts[i].merge(parts[i + 1]) for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0]


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    n_samples: int
    truncated: bool = False

    @classmethod
    def from_moments(cls, mom, truncated=False):
        return cls(mom.mean, mom.stderr, mom.n, truncated)

    def __iter__(self):
        return iter((self.value, self.stderr))


def chunk_sizes(n_samples, chunk_size=DEFAULT_CHUNK):
    full, rest = divmod(int(n_samples), int(chunk_size))
    return [chunk_size] * full + ([rest] if rest else [])


def mc_moments(sample_fn, n_samples, stream, chunk_size=DEFAULT_CHUNK, threads=1):
    """Moments of ``sample_fn(rng, size)`` over ``n_samples`` draws.

    Chunk k draws from ``stream.spawn(k)``; ``threads`` only changes who
    computes a chunk, never the result.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    sizes = chunk_sizes(n_samples, chunk_size)

    def run(k):
        return Moments.of(sample_fn(stream.spawn(k).generator(), sizes[k]))

    if threads > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    else:
        parts = [run(k) for k in range(len(sizes))]
    return tree_merge(parts)
