"""Uniform sampling of the microcanonically allowed region and Monte Carlo estimates.

The allowed region is a product of spheres: each (gas shell, container shell)
block of the amplitude matrix carries a conserved weight w_AB = P_A^g * P_B^c,
and the block amplitude vector is confined to the sphere of squared radius
w_AB.  Sampling draws an isotropic complex Gaussian per block and rescales to
the sphere, which realizes the uniform surface measure.

Determinism: the sample stream is partitioned into fixed chunks of
``micropurity._rng.CHUNK`` samples; chunk k of a run is a pure function of
(seed, k), and aggregation merges per-chunk statistics in chunk order.
Results are therefore bit-identical for any worker count, and any sample can
be regenerated in isolation.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _rng, backend
from ._rng import CHUNK
from .errors import ValidationError
from .qcore import StateVector
from .shells import (SystemProfile, ShellProfile, container_smallness,
                     in_thermodynamic_regime, max_constrained_entropy)

#: histogram support extends this far below 1/dim_g so the purity floor lands in bin 0
HIST_EPS = 1e-12

_OBSERVABLES = ("purity", "entropy")
_SUBSYSTEMS = ("gas", "container")


@dataclass(frozen=True)
class SampleConfig:
    """Reproducible sampling run: seed, sample count, histogram bins, workers."""

    seed: int
    n_samples: int
    n_bins: int = 100
    worker_count: int = 1

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValidationError("seed must be a 64-bit unsigned integer")
        if self.n_samples < 1:
            raise ValidationError("n_samples must be >= 1")
        if self.n_bins < 2:
            raise ValidationError("n_bins must be >= 2")
        if self.worker_count < 1:
            raise ValidationError("worker_count must be >= 1")


@dataclass(frozen=True)
class EstimateResult:
    """Monte Carlo mean with its standard error.

    ``std_error`` is the unbiased sample standard deviation divided by
    sqrt(n_samples); for a single sample it is NaN (reported as "na"
    downstream).
    """

    mean: float
    std_error: float
    n_samples: int
    observable: str


@dataclass(frozen=True)
class Histogram:
    """Binned observable counts with the bin-width-normalized density."""

    bin_edges: np.ndarray
    counts: np.ndarray
    normalized_density: np.ndarray

    def __post_init__(self):
        integral = float(self.normalized_density @ np.diff(self.bin_edges))
        if self.counts.sum() > 0 and abs(integral - 1.0) > 1e-9:
            raise ValidationError(f"density integrates to {integral}, not 1")

    @property
    def n_samples(self):
        return int(self.counts.sum())


# ---------------------------------------------------------------------------
# state generation


def _profile_block_arrays(profile):
    """Shell blocks of a single subsystem seen as an (dim, 1) column."""
    off = profile.offsets
    nsh = profile.n_shells
    return (off[:-1].astype(np.int64), off[1:].astype(np.int64),
            np.zeros(nsh, dtype=np.int64), np.ones(nsh, dtype=np.int64),
            np.asarray(profile.weights, dtype=np.float64))


def _chunk_ranges(start, count):
    """Split global sample range [start, start+count) along chunk boundaries."""
    pos = start
    end = start + count
    while pos < end:
        k = pos // CHUNK
        hi = min(end, (k + 1) * CHUNK)
        yield k, pos - k * CHUNK, hi - pos
        pos = hi


def constrained_states(sys, seed, start=0, count=1):
    """Uniform draws from the allowed region, samples [start, start+count).

    Returns a (count, dimension) complex array.  Sample i is a pure function
    of (seed, start + i); the block weights of every row equal the conserved
    w_AB exactly by construction.
    """
    table = sys.block_table()
    if not table.weights.any():
        raise ValidationError("all block weights are zero")
    kern = backend.kernels()
    n = sys.dimension
    out = np.empty((count, n), dtype=np.complex128)
    pos = 0
    for k, offset, length in _chunk_ranges(start, count):
        z = _rng.complex_normals(seed, _rng.DOMAIN_CONSTRAINED, k,
                                 length * n, offset=offset * n)
        z = z.reshape(length, sys.dim_g, sys.dim_c)
        kern.normalize_blocks(z, table.row_start, table.row_stop,
                              table.col_start, table.col_stop, table.weights)
        out[pos:pos + length] = z.reshape(length, n)
        pos += length
    return out


def product_states(sys, seed, start=0, count=1):
    """Product-state draws psi_g x psi_c, each factor uniform per shell sphere.

    The gas (container) factor carries squared weight P_A (P_B) on each of its
    shells, so the joint block weights come out as P_A * P_B: the same
    conserved values as the constrained ensemble, with zero initial gas
    entropy.
    """
    kern = backend.kernels()
    g, c = sys.dim_g, sys.dim_c
    gas_blocks = _profile_block_arrays(sys.gas)
    con_blocks = _profile_block_arrays(sys.container)
    out = np.empty((count, g * c), dtype=np.complex128)
    pos = 0
    for k, offset, length in _chunk_ranges(start, count):
        z = _rng.complex_normals(seed, _rng.DOMAIN_PRODUCT, k,
                                 length * (g + c), offset=offset * (g + c))
        z = z.reshape(length, g + c)
        zg = np.ascontiguousarray(z[:, :g]).reshape(length, g, 1)
        zc = np.ascontiguousarray(z[:, g:]).reshape(length, c, 1)
        kern.normalize_blocks(zg, *gas_blocks)
        kern.normalize_blocks(zc, *con_blocks)
        out[pos:pos + length] = np.einsum("mi,mj->mij", zg[:, :, 0],
                                          zc[:, :, 0]).reshape(length, g * c)
        pos += length
    return out


def sample_constrained_state(sys, seed, index=0):
    """One uniform draw from the allowed region, as a StateVector."""
    amps = constrained_states(sys, seed, start=index, count=1)[0]
    return StateVector(amps, sys.dim_g, sys.dim_c)


def sample_product_state(sys, seed, index=0):
    """One product-state draw, as a StateVector."""
    amps = product_states(sys, seed, start=index, count=1)[0]
    return StateVector(amps, sys.dim_g, sys.dim_c)


# ---------------------------------------------------------------------------
# chunked reduction


@dataclass
class _ChunkStats:
    count: int
    mean: float
    m2: float
    vmin: float
    vmax: float
    hist: np.ndarray | None


def _merge_stats(a, b):
    """Chan's pairwise update; applied in fixed chunk order."""
    n = a.count + b.count
    delta = b.mean - a.mean
    mean = a.mean + delta * (b.count / n)
    m2 = a.m2 + b.m2 + delta * delta * (a.count * b.count / n)
    hist = None
    if a.hist is not None:
        hist = a.hist + b.hist
    return _ChunkStats(n, mean, m2, min(a.vmin, b.vmin), max(a.vmax, b.vmax), hist)


def _observable_values(kern, states, dim_g, dim_c, observable, subsystem):
    arr = states.reshape(-1, dim_g, dim_c)
    if subsystem == "container":
        arr = np.ascontiguousarray(arr.transpose(0, 2, 1))
    if observable == "purity":
        return kern.gas_purity(arr)
    return kern.gas_entropy(arr)


def _reduce_samples(sys, cfg, observable, subsystem, edges=None):
    if observable not in _OBSERVABLES:
        raise ValidationError(f"observable must be one of {_OBSERVABLES}, got {observable!r}")
    if subsystem not in _SUBSYSTEMS:
        raise ValidationError(f"subsystem must be one of {_SUBSYSTEMS}, got {subsystem!r}")
    kern = backend.kernels()

    def one_chunk(k):
        lo = k * CHUNK
        length = min(cfg.n_samples, lo + CHUNK) - lo
        states = constrained_states(sys, cfg.seed, start=lo, count=length)
        vals = _observable_values(kern, states, sys.dim_g, sys.dim_c,
                                  observable, subsystem)
        mean = float(vals.mean())
        m2 = float(((vals - mean)**2).sum())
        hist = None
        if edges is not None:
            hist, _ = np.histogram(np.clip(vals, edges[0], edges[-1]), bins=edges)
        return _ChunkStats(length, mean, m2, float(vals.min()), float(vals.max()), hist)

    n_chunks = -(-cfg.n_samples // CHUNK)
    if cfg.worker_count == 1:
        results = [one_chunk(k) for k in range(n_chunks)]
    else:
        with ThreadPoolExecutor(max_workers=cfg.worker_count) as pool:
            results = list(pool.map(one_chunk, range(n_chunks)))
    total = results[0]
    for stats in results[1:]:
        total = _merge_stats(total, stats)
    return total


# ---------------------------------------------------------------------------
# public estimators


def estimate_average(sys, cfg, observable, subsystem="gas"):
    """Monte Carlo average of gas purity or entropy over the allowed region."""
    stats = _reduce_samples(sys, cfg, observable, subsystem)
    if stats.count > 1:
        std_error = math.sqrt(stats.m2 / (stats.count - 1)) / math.sqrt(stats.count)
    else:
        std_error = math.nan
    return EstimateResult(mean=stats.mean, std_error=std_error,
                          n_samples=stats.count, observable=observable)


def observable_range(sys, cfg, observable, subsystem="gas"):
    """(min, max) of the observable over the same sample stream as the estimate."""
    stats = _reduce_samples(sys, cfg, observable, subsystem)
    return stats.vmin, stats.vmax


def purity_bin_edges(dim_g, n_bins):
    """Uniform bin edges spanning [1/dim_g - eps, 1]."""
    return np.linspace(1.0 / dim_g - HIST_EPS, 1.0, n_bins + 1)


def purity_histogram(sys, cfg):
    """Histogram of the gas purity over the allowed region.

    Bins are uniform on [1/dim_g - eps, 1]; the density is normalized by bin
    width, so it integrates to 1.
    """
    edges = purity_bin_edges(sys.dim_g, cfg.n_bins)
    stats = _reduce_samples(sys, cfg, "purity", "gas", edges=edges)
    density = stats.hist / (stats.count * np.diff(edges))
    return Histogram(bin_edges=edges, counts=stats.hist, normalized_density=density)


@dataclass(frozen=True)
class ScanPoint:
    """One container size of an entropy-gap scan."""

    container_degeneracy: int
    container_smallness: float
    entropy_gap: float
    std_error: float
    in_regime: bool


def entropy_gap_scan(gas, container_degeneracies, cfg):
    """Sampled entropy deficit below the maximum, per container size.

    For each degeneracy N the container is a single fully occupied shell of
    size N; the scan reports max_constrained_entropy(gas) minus the sampled
    mean gas entropy, paired with the container smallness.  Points outside
    the thermodynamic regime are flagged (``in_regime=False``) but still
    computed.
    """
    s_top = max_constrained_entropy(gas)
    points = []
    for n_c in container_degeneracies:
        sys = SystemProfile(gas, ShellProfile.single(int(n_c)))
        est = estimate_average(sys, cfg, "entropy")
        points.append(ScanPoint(
            container_degeneracy=int(n_c),
            container_smallness=container_smallness(sys.container),
            entropy_gap=s_top - est.mean,
            std_error=est.std_error,
            in_regime=in_thermodynamic_regime(sys),
        ))
    return points
