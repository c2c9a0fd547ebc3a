"""Energy-shell profiles and the closed-form purity/entropy expressions.

A shell profile describes one subsystem's occupied energy structure as an
ordered list of (energy, degeneracy N, occupation weight P) records.  The
joint shell weights P_A * P_B of a bipartite product start are conserved under
any energy-conserving coupling, which confines trajectories to a product of
spheres in Hilbert space.  All closed forms below (minimum purity, exact and
approximate region averages, the fully degenerate average, the non-degenerate
time average, the constrained maximum entropy) are elementary functions of the
shell weights and degeneracies.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

#: weight sums deviating from 1 by less than this are silently renormalized
WEIGHT_RENORM_GATE = 1e-8

#: default full-system dimension cap (dense matrices stay desk-sized)
MAX_DIMENSION = 4096


@dataclass(frozen=True)
class ShellProfile:
    """Energy shells of one subsystem: arrays of energy, degeneracy, weight."""

    energies: np.ndarray
    degeneracies: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        en = np.array(self.energies, dtype=np.float64, copy=True)
        dg = np.array(self.degeneracies, dtype=np.int64, copy=True)
        wt = np.array(self.weights, dtype=np.float64, copy=True)
        if not (en.ndim == dg.ndim == wt.ndim == 1) or not (en.size == dg.size == wt.size):
            raise ValidationError("energies, degeneracies, weights must be 1-d and equal length")
        if en.size == 0:
            raise ValidationError("a shell profile needs at least one shell")
        if np.any(np.diff(en) <= 0):
            raise ValidationError("shell energies must be strictly increasing "
                                  "(merge equal-energy shells into one record)")
        if np.any(dg < 1):
            raise ValidationError("degeneracies must be >= 1")
        if np.any(wt < 0) or np.any(wt > 1):
            raise ValidationError("weights must lie in [0, 1]")
        total = wt.sum()
        if abs(total - 1.0) > WEIGHT_RENORM_GATE:
            raise ValidationError(f"weights sum to {total}, more than "
                                  f"{WEIGHT_RENORM_GATE} away from 1")
        wt = wt / total
        for arr in (en, dg, wt):
            arr.setflags(write=False)
        object.__setattr__(self, "energies", en)
        object.__setattr__(self, "degeneracies", dg)
        object.__setattr__(self, "weights", wt)

    @classmethod
    def from_records(cls, records):
        """Build from an iterable of (energy, degeneracy, weight) triples."""
        recs = list(records)
        if not recs:
            raise ValidationError("a shell profile needs at least one shell")
        return cls(*(np.array(col) for col in zip(*recs)))

    @classmethod
    def single(cls, degeneracy, energy=0.0):
        """One fully occupied shell: the completely degenerate case."""
        return cls([energy], [degeneracy], [1.0])

    @property
    def n_shells(self):
        return self.energies.size

    @property
    def dimension(self):
        return int(self.degeneracies.sum())

    @property
    def offsets(self):
        """Start index of each shell in the subsystem basis (shells contiguous)."""
        return np.concatenate(([0], np.cumsum(self.degeneracies)))

    def to_records(self):
        return [(float(e), int(n), float(w))
                for e, n, w in zip(self.energies, self.degeneracies, self.weights)]

    def __eq__(self, other):
        if not isinstance(other, ShellProfile):
            return NotImplemented
        return (np.array_equal(self.energies, other.energies)
                and np.array_equal(self.degeneracies, other.degeneracies)
                and np.array_equal(self.weights, other.weights))

    __hash__ = None


@dataclass(frozen=True)
class BlockTable:
    """Geometry of the (gas shell, container shell) blocks of the product basis.

    Block k covers rows [row_start[k], row_stop[k]) and columns
    [col_start[k], col_stop[k]) of the (dim_g, dim_c) amplitude matrix and
    carries the conserved weight P_A^g * P_B^c.
    """

    row_start: np.ndarray
    row_stop: np.ndarray
    col_start: np.ndarray
    col_stop: np.ndarray
    weights: np.ndarray
    gas_shell: np.ndarray
    container_shell: np.ndarray
    dim_g: int
    dim_c: int

    @property
    def n_blocks(self):
        return self.weights.size

    def flat_indices(self, k):
        """Flat product-basis indices covered by block k."""
        rows = np.arange(self.row_start[k], self.row_stop[k])
        cols = np.arange(self.col_start[k], self.col_stop[k])
        return (rows[:, None] * self.dim_c + cols[None, :]).ravel()

    def block_of_basis(self):
        """Map from flat basis index to block index, shape (dim_g*dim_c,)."""
        out = np.empty(self.dim_g * self.dim_c, dtype=np.int64)
        for k in range(self.n_blocks):
            out[self.flat_indices(k)] = k
        return out


@dataclass(frozen=True)
class SystemProfile:
    """Gas and container shell profiles of one bipartite system."""

    gas: ShellProfile
    container: ShellProfile
    max_dimension: int = MAX_DIMENSION

    def __post_init__(self):
        dim = self.gas.dimension * self.container.dimension
        if dim > self.max_dimension:
            raise ValidationError(
                f"total dimension {dim} exceeds the configured maximum "
                f"{self.max_dimension}")

    @property
    def dim_g(self):
        return self.gas.dimension

    @property
    def dim_c(self):
        return self.container.dimension

    @property
    def dimension(self):
        return self.dim_g * self.dim_c

    def block_table(self):
        """All (gas shell, container shell) blocks in row-major shell order."""
        goff, coff = self.gas.offsets, self.container.offsets
        na, nb = self.gas.n_shells, self.container.n_shells
        a_idx = np.repeat(np.arange(na), nb)
        b_idx = np.tile(np.arange(nb), na)
        return BlockTable(
            row_start=goff[a_idx], row_stop=goff[a_idx + 1],
            col_start=coff[b_idx], col_stop=coff[b_idx + 1],
            weights=self.gas.weights[a_idx] * self.container.weights[b_idx],
            gas_shell=a_idx, container_shell=b_idx,
            dim_g=self.dim_g, dim_c=self.dim_c,
        )

    def __eq__(self, other):
        if not isinstance(other, SystemProfile):
            return NotImplemented
        return self.gas == other.gas and self.container == other.container

    __hash__ = None


def minimum_purity(gas):
    """Smallest gas purity compatible with fixed shell weights.

    Attained by spreading each shell's weight uniformly over its degenerate
    subspace: sum_A P_A^2 / N_A.  Always >= 1/dimension.
    """
    return float((gas.weights**2 / gas.degeneracies).sum())


def container_smallness(container):
    """sum_B P_B^2 / N_B of the container profile.

    The quantity whose smallness puts a system in the thermodynamic regime:
    it controls both the purity surplus over the minimum and the entropy
    deficit below the maximum.
    """
    return float((container.weights**2 / container.degeneracies).sum())


def average_purity_exact(sys):
    """Exact average gas purity over the constrained region of Hilbert space.

    The region is the product of spheres fixed by the conserved block weights;
    the average is taken under the uniform surface measure.
    """
    pg2 = sys.gas.weights**2
    pc2 = sys.container.weights**2
    ng = sys.gas.degeneracies.astype(np.float64)
    nc = sys.container.degeneracies.astype(np.float64)
    a = pg2.sum()
    b = pc2.sum()
    qg = (pg2 / ng).sum()
    qc = (pc2 / nc).sum()
    cross = (pg2[:, None] * pc2[None, :]
             * (ng[:, None] + nc[None, :]) / (ng[:, None] * nc[None, :] + 1.0)).sum()
    return float(qg * (1.0 - b) + qc * (1.0 - a) + cross)


def average_purity_approx(sys):
    """Large-degeneracy approximation of the region-averaged gas purity.

    sum_A P_A^2/N_A + sum_B P_B^2/N_B.  Valid when occupied degeneracies are
    large (1/(N_A N_B + 1) ~ 1/(N_A N_B)); for tiny systems it can exceed 1,
    signalling that the system is outside the regime.
    """
    return float((sys.gas.weights**2 / sys.gas.degeneracies).sum()
                 + (sys.container.weights**2 / sys.container.degeneracies).sum())


def average_purity_degenerate(n_g, n_c):
    """Region-averaged purity for one fully degenerate shell per side.

    (n_g + n_c) / (n_g * n_c + 1): the average purity of either reduction of
    a Haar-random pure state on an n_g x n_c product space.
    """
    if n_g < 1 or n_c < 1:
        raise ValidationError("subsystem dimensions must be >= 1")
    return (n_g + n_c) / (n_g * n_c + 1.0)


def time_average_nondegenerate(gas_weights, container_weights):
    """Long-time average of the gas purity for non-degenerate, non-resonant spectra.

    a + b - a*b with a = sum of squared gas weights, b = same for the
    container.  Coincides with the exact region average when every
    degeneracy equals 1.
    """
    gw = np.asarray(gas_weights, dtype=np.float64)
    cw = np.asarray(container_weights, dtype=np.float64)
    for name, w in (("gas", gw), ("container", cw)):
        if abs(w.sum() - 1.0) > WEIGHT_RENORM_GATE:
            raise ValidationError(f"{name} weights sum to {w.sum()}, not 1")
    gw = gw / gw.sum()
    cw = cw / cw.sum()
    a = float(gw @ gw)
    b = float(cw @ cw)
    return a + b - a * b


def max_constrained_entropy(gas):
    """Largest gas entropy compatible with fixed shell weights (nats).

    -sum_A P_A ln(P_A / N_A), the entropy of the block-uniform state that
    also attains the purity minimum.  Zero-weight shells contribute nothing.
    """
    mask = gas.weights > 0
    w = gas.weights[mask]
    n = gas.degeneracies[mask].astype(np.float64)
    return float(-(w * np.log(w / n)).sum())


def in_thermodynamic_regime(sys, ratio_threshold=10.0):
    """Whether the gas purity floor dominates the container smallness.

    True iff minimum_purity(gas) >= ratio_threshold * container_smallness.
    In this regime almost all allowed states have gas purity near its
    minimum and gas entropy near its maximum.
    """
    return minimum_purity(sys.gas) >= ratio_threshold * container_smallness(sys.container)
