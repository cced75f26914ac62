"""Haar-random unitaries from reproducible counter-based streams, and
mergeable streaming statistics of a coherence value over many samples.

Sample ``i`` of a run with seed ``s`` always comes from chunk ``i // CHUNK``,
whose generator is Philox keyed by ``SeedSequence(s, spawn_key=(chunk,))``.
Any partition of the chunks over workers therefore yields the same values,
and a longer run with the same seed extends a shorter one.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import NonpositiveBound
from .hermlin import UnitaryMatrix, as_array, dagger

CHUNK = 4096
TOP_K = 10


def chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(chunk,))))


def haar_unitaries(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    """``n`` Haar unitaries: QR of a complex Ginibre matrix, columns rephased
    by r_jj/|r_jj| so the triangular factor has a positive diagonal."""
    z = rng.standard_normal((n, d, d)) + 1j * rng.standard_normal((n, d, d))
    z /= np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=1, axis2=2)
    mag = np.abs(diag)
    bad = np.flatnonzero((mag == 0).any(axis=1))
    if bad.size:
        # zero pivot has probability zero; redraw just those samples
        q[bad] = haar_unitaries(rng, bad.size, d)
        diag = diag.copy()
        diag[bad] = 1.0
        mag = np.abs(diag)
    return q * (diag / mag)[:, None, :]


def chunk_unitaries(seed: int, chunk: int, d: int, size: int = CHUNK) -> np.ndarray:
    return haar_unitaries(chunk_rng(seed, chunk), size, d)


def haar_stream(seed: int, n: int, d: int) -> np.ndarray:
    """The first ``n`` unitaries of the stream for ``seed``."""
    chunks = [chunk_unitaries(seed, k, d) for k in range(-(-n // CHUNK))]
    return np.concatenate(chunks)[:n]


@dataclass
class HaarSampler:
    """Sequential access to the sample stream of ``(dim, seed)``."""

    dim: int
    seed: int
    counter: int = 0
    _cache: tuple = field(default=(None, None), repr=False)

    def _chunk(self, k):
        if self._cache[0] != k:
            self._cache = (k, chunk_unitaries(self.seed, k, self.dim))
        return self._cache[1]

    def sample(self) -> UnitaryMatrix:
        k, j = divmod(self.counter, CHUNK)
        u = self._chunk(k)[j]
        self.counter += 1
        return UnitaryMatrix(u)

    def sample_batch(self, n: int) -> np.ndarray:
        out = np.empty((n, self.dim, self.dim), dtype=complex)
        for i in range(n):
            k, j = divmod(self.counter + i, CHUNK)
            out[i] = self._chunk(k)[j]
        self.counter += n
        return out


def sample_unitary(sampler: HaarSampler) -> UnitaryMatrix:
    return sampler.sample()


@dataclass
class StreamingStats:
    """Running maximum, fixed-edge histogram, threshold exceedances and the
    ``TOP_K`` largest values.  Values outside the edges land in the end bins."""

    bin_edges: np.ndarray
    threshold: float | None = None
    count: int = 0
    max_value: float = -np.inf
    argmax_index: int = -1
    counts: np.ndarray | None = None
    threshold_exceed_count: int = 0
    top_values: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        self.bin_edges = np.asarray(self.bin_edges, dtype=float)
        if self.counts is None:
            self.counts = np.zeros(self.bin_edges.size - 1, dtype=np.int64)

    @classmethod
    def empty(cls, upper: float, bins: int = 200, threshold: float | None = None, lower: float = 0.0):
        if not upper > lower:
            upper = lower + 1.0
        return cls(np.linspace(lower, upper, bins + 1), threshold)

    def update(self, values, offset: int = 0) -> "StreamingStats":
        """Fold in ``values``; ``offset`` is the global index of values[0]."""
        v = np.asarray(values, dtype=float).ravel()
        if v.size == 0:
            return self
        self.count += v.size
        j = int(np.argmax(v))
        if v[j] > self.max_value:
            self.max_value = float(v[j])
            self.argmax_index = offset + j
        clipped = np.clip(v, self.bin_edges[0], self.bin_edges[-1])
        self.counts += np.histogram(clipped, self.bin_edges)[0]
        if self.threshold is not None:
            self.threshold_exceed_count += int(np.count_nonzero(v > self.threshold))
        self.top_values = _top(np.concatenate([self.top_values, v]))
        return self

    def merge(self, other: "StreamingStats") -> "StreamingStats":
        if not np.array_equal(self.bin_edges, other.bin_edges) or self.threshold != other.threshold:
            raise ValueError("can only merge statistics with identical bins and threshold")
        out = StreamingStats(self.bin_edges, self.threshold)
        out.count = self.count + other.count
        out.counts = self.counts + other.counts
        out.threshold_exceed_count = self.threshold_exceed_count + other.threshold_exceed_count
        # ties go to the lower sample index so merge order never matters
        cands = [(s.max_value, -s.argmax_index) for s in (self, other) if s.count]
        if cands:
            best = max(cands)
            out.max_value, out.argmax_index = best[0], -best[1]
        out.top_values = _top(np.concatenate([self.top_values, other.top_values]))
        return out

    @property
    def exceedance_fraction(self) -> float:
        if self.threshold is None or self.count == 0:
            return float("nan")
        return self.threshold_exceed_count / self.count

    @property
    def exceedance_stderr(self) -> float:
        """Binomial standard error of the exceedance fraction."""
        p = self.exceedance_fraction
        return float(np.sqrt(p * (1 - p) / self.count)) if self.count else float("nan")

    @property
    def resolution(self) -> float:
        """Mean spacing of the largest order statistics, (x_1 - x_k)/(k - 1).

        Measures how finely the sample resolves the upper tail near the maximum.
        """
        t = self.top_values
        if t.size < 2:
            return float("nan")
        return float((t[0] - t[-1]) / (t.size - 1))

    def peak(self) -> float:
        """Centre of the most populated histogram bin."""
        k = int(np.argmax(self.counts))
        return float(0.5 * (self.bin_edges[k] + self.bin_edges[k + 1]))

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "max_value": self.max_value,
            "argmax_index": self.argmax_index,
            "threshold": self.threshold,
            "threshold_exceed_count": self.threshold_exceed_count,
            "exceedance_fraction": self.exceedance_fraction if self.threshold is not None else None,
            "resolution": self.resolution,
            "top_values": [float(x) for x in self.top_values],
            "bin_edges": [float(x) for x in self.bin_edges],
            "counts": [int(c) for c in self.counts],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _top(v):
    return np.sort(v)[::-1][:TOP_K]


def l1_values(states: np.ndarray) -> np.ndarray:
    a = np.abs(states)
    return a.sum(axis=(-2, -1)) - np.real(np.trace(a, axis1=-2, axis2=-1))


def rotate(rho, unitaries: np.ndarray) -> np.ndarray:
    """U rho U^dag for a stack of unitaries; cheaper when rho is diagonal."""
    a = as_array(rho)
    if np.count_nonzero(a - np.diag(np.diagonal(a))) == 0:
        lam = np.real(np.diagonal(a))
        return (unitaries * lam) @ dagger(unitaries)
    return unitaries @ a @ dagger(unitaries)


def _scan_chunk(rho, d, seed, k, size, value_fn, edges, threshold):
    u = chunk_unitaries(seed, k, d)[:size]
    vals = value_fn(rotate(rho, u))
    return StreamingStats(edges, threshold).update(vals, offset=k * CHUNK)


def scan_max(
    rho,
    n: int,
    seed: int,
    value_fn=l1_values,
    threshold: float | None = None,
    bins: int = 200,
    upper: float | None = None,
    workers: int = 1,
) -> StreamingStats:
    """Statistics of ``value_fn(U rho U^dag)`` over ``n`` Haar samples.

    ``value_fn`` maps a stack of states to an array of reals.  The histogram
    spans [0, upper], with ``upper`` defaulting to the purity bound B_d.
    The result does not depend on ``workers``.
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    a = as_array(rho)
    d = a.shape[0]
    if upper is None:
        from .bounds import bound_b

        upper = bound_b(a)
    edges = StreamingStats.empty(upper, bins).bin_edges
    jobs = [(k, min(CHUNK, n - k * CHUNK)) for k in range(-(-n // CHUNK))]

    def run(job):
        return _scan_chunk(a, d, seed, job[0], job[1], value_fn, edges, threshold)

    total = StreamingStats(edges, threshold)
    if workers <= 1:
        for job in jobs:
            total = total.merge(run(job))
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(run, jobs):
                total = total.merge(part)
    return total


def relative_deviation(max_found: float, bound: float) -> float:
    """(bound - max_found) / bound."""
    if not bound > 0:
        raise NonpositiveBound(f"bound must be positive, got {bound}", bound)
    return (bound - max_found) / bound


def random_spectrum(rng: np.random.Generator, d: int) -> np.ndarray:
    """Uniform on the probability simplex, sorted descending."""
    return np.sort(rng.dirichlet(np.ones(d)))[::-1]


def random_state(rng: np.random.Generator, d: int) -> np.ndarray:
    """Random spectrum rotated by a Haar unitary."""
    lam = random_spectrum(rng, d)
    u = haar_unitaries(rng, 1, d)[0]
    m = (u * lam) @ dagger(u)
    return 0.5 * (m + dagger(m))
