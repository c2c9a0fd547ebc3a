"""Microcanonically constrained Hamiltonians and exact trajectory observables.

The Hamiltonian splits into local shell energies plus a coupling that
conserves every (gas shell, container shell) block weight: the coupling is a
random Hermitian matrix confined to each product block, so it commutes with
both local level operators.  Dynamics is solved exactly by eigendecomposition;
no integrator error enters any result.

An optional relaxed mode confines the coupling only to gas-shell row bands
(commuting with the gas levels alone); then only per-gas-shell weight sums are
conserved.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _rng, backend
from .errors import NumericalError, ValidationError
from .qcore import EigenSystem, _frozen_copy, hermitian_eigendecompose
from .shells import BlockTable, SystemProfile

GOLDEN_RATIO = (1.0 + math.sqrt(5.0)) / 2.0

#: time batch size for trajectory evaluation, in amplitude counts
_BATCH_AMPS = 1 << 22


@dataclass(frozen=True)
class MicroHamiltonian:
    """Block-structured Hamiltonian honoring the shell-weight constraints."""

    sys: SystemProfile
    coupling: float
    matrix: np.ndarray
    eigensystem: EigenSystem
    blocks: BlockTable
    block_index: np.ndarray
    relax_container_commutation: bool = False

    @property
    def dimension(self):
        return self.matrix.shape[0]


@dataclass(frozen=True)
class TimeSeries:
    """Scalar observables sampled along one trajectory."""

    times: np.ndarray
    values: dict

    def __post_init__(self):
        times = _frozen_copy(self.times, np.float64)
        if times.ndim != 1:
            raise ValidationError("times must be one-dimensional")
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise ValidationError("times must be strictly increasing")
        for key, series in self.values.items():
            if len(series) != times.size:
                raise ValidationError(f"series {key!r} length != number of times")
        object.__setattr__(self, "times", times)


@dataclass(frozen=True)
class EnergyTable:
    """Eigenvalues E[A, B] of a fully non-degenerate bipartite system."""

    entries: np.ndarray

    def __post_init__(self):
        ent = _frozen_copy(self.entries, np.float64)
        if ent.ndim != 2:
            raise ValidationError("energy table must be two-dimensional")
        object.__setattr__(self, "entries", ent)

    @classmethod
    def from_profiles(cls, sys):
        """Non-interacting table E_A + E_B (requires non-degenerate shells)."""
        _require_nondegenerate(sys)
        return cls(sys.gas.energies[:, None] + sys.container.energies[None, :])

    @classmethod
    def from_hamiltonian(cls, hamiltonian):
        """Read E[A, B] off a non-degenerate Hamiltonian (diagonal by construction)."""
        sys = hamiltonian.sys
        _require_nondegenerate(sys)
        if hamiltonian.relax_container_commutation and sys.dim_c > 1:
            raise ValidationError("relaxed coupling mixes container shells; "
                                  "eigenvalues carry no (A, B) labels")
        diag = np.diag(hamiltonian.matrix).real
        return cls(diag.reshape(sys.gas.n_shells, sys.container.n_shells))


def _require_nondegenerate(sys):
    if np.any(sys.gas.degeneracies != 1) or np.any(sys.container.degeneracies != 1):
        raise ValidationError("operation requires all shell degeneracies equal to 1")


@dataclass(frozen=True)
class ResonanceReport:
    """Accidental degeneracies of purity Bohr frequencies.

    Lists canonical quadruples (A, B, C, D) with A < C, B < D whose combined
    gap E_AB - E_CB + E_CD - E_AD vanishes within the tolerance; each
    physical resonance appears exactly once.  An empty report certifies the
    non-resonance assumption behind the long-time purity average.
    """

    tolerance: float
    quadruples: tuple

    @property
    def is_clear(self):
        return len(self.quadruples) == 0

    def to_dict(self):
        return {
            "tolerance": self.tolerance,
            "count": len(self.quadruples),
            "quadruples": [
                {"gas_a": a, "container_b": b, "gas_c": c, "container_d": d, "gap": gap}
                for a, b, c, d, gap in self.quadruples
            ],
        }


# ---------------------------------------------------------------------------
# construction


def _gue_block(seed, ordinal, dim):
    """Hermitian random block, spectral norm O(1) for every dimension.

    (Z + Z^dagger) / (2 sqrt(dim)) with Z iid complex standard normal; the
    1/sqrt(dim) scaling keeps the coupling strength comparable across block
    sizes.
    """
    z = _rng.complex_normals(seed, _rng.DOMAIN_COUPLING, ordinal, dim * dim)
    z = z.reshape(dim, dim)
    return (z + z.conj().T) / (2.0 * math.sqrt(dim))


def build_hamiltonian(sys, coupling, seed, relax_container_commutation=False):
    """Assemble local shell energies plus a constrained random coupling.

    The coupling strength multiplies independent Hermitian blocks placed
    within each (gas shell, container shell) product subspace, so every block
    weight is an exact constant of motion.  With
    ``relax_container_commutation`` the blocks span whole gas-shell row bands
    instead, conserving only per-gas-shell sums.

    Parameters
    ----------
    sys : SystemProfile
        Shell structure and energies of both subsystems.
    coupling : float
        Nonnegative strength of the random coupling (energy units).
    seed : int
        Stream seed; the Hamiltonian is a pure function of (sys, coupling,
        seed, relax_container_commutation).
    """
    if coupling < 0:
        raise ValidationError("coupling must be nonnegative; pass its absolute value")
    table = sys.block_table()
    gas_levels = np.repeat(sys.gas.energies, sys.gas.degeneracies)
    con_levels = np.repeat(sys.container.energies, sys.container.degeneracies)
    matrix = np.diag((gas_levels[:, None] + con_levels[None, :]).ravel()
                     ).astype(np.complex128)
    if coupling != 0.0:
        if relax_container_commutation:
            goff = sys.gas.offsets * sys.dim_c
            groups = [np.arange(goff[a], goff[a + 1]) for a in range(sys.gas.n_shells)]
        else:
            groups = [table.flat_indices(k) for k in range(table.n_blocks)]
        for ordinal, idx in enumerate(groups):
            block = _gue_block(seed, ordinal, len(idx))
            matrix[np.ix_(idx, idx)] += coupling * block
    eigensystem = hermitian_eigendecompose(matrix)
    return MicroHamiltonian(
        sys=sys, coupling=float(coupling), matrix=_frozen_copy(matrix, np.complex128),
        eigensystem=eigensystem, blocks=table, block_index=table.block_of_basis(),
        relax_container_commutation=relax_container_commutation,
    )


# ---------------------------------------------------------------------------
# trajectories


def _check_state(hamiltonian, psi0):
    if psi0.dim != hamiltonian.dimension:
        raise ValidationError(f"state dimension {psi0.dim} != Hamiltonian "
                              f"dimension {hamiltonian.dimension}")
    if (psi0.dim_g, psi0.dim_c) != (hamiltonian.sys.dim_g, hamiltonian.sys.dim_c):
        raise ValidationError("state bipartition does not match the system profile")


def states_at(hamiltonian, psi0, times):
    """Exactly propagated states at the given times, shape (len(times), dim)."""
    _check_state(hamiltonian, psi0)
    es = hamiltonian.eigensystem
    coeff = es.eigenvectors.conj().T @ psi0.amplitudes
    times = np.asarray(times, dtype=np.float64)
    phases = np.exp(-1j * times[:, None] * es.eigenvalues[None, :])
    return (phases * coeff) @ es.eigenvectors.T


def evolve_observables(hamiltonian, psi0, times):
    """Gas purity/entropy, all block weights, and total purity along a trajectory.

    Block-weight series are keyed ``weight_{A}_{B}`` by gas and container
    shell index; they are exact constants of motion and serve as the
    conservation monitor.
    """
    kern = backend.kernels()
    sys = hamiltonian.sys
    table = hamiltonian.blocks
    times = np.asarray(times, dtype=np.float64)
    n_times = times.size
    purity = np.empty(n_times)
    entr = np.empty(n_times)
    weights = np.empty((n_times, table.n_blocks))
    total = np.empty(n_times)
    batch = max(1, _BATCH_AMPS // max(1, hamiltonian.dimension))
    for lo in range(0, n_times, batch):
        hi = min(n_times, lo + batch)
        states = np.ascontiguousarray(
            states_at(hamiltonian, psi0, times[lo:hi])
        ).reshape(hi - lo, sys.dim_g, sys.dim_c)
        purity[lo:hi] = kern.gas_purity(states)
        entr[lo:hi] = kern.gas_entropy(states)
        weights[lo:hi] = kern.block_weights(states, table.row_start, table.row_stop,
                                            table.col_start, table.col_stop)
        norms = weights[lo:hi].sum(axis=1)
        total[lo:hi] = norms * norms
    values = {"purity": purity, "entropy": entr}
    for k in range(table.n_blocks):
        key = f"weight_{table.gas_shell[k]}_{table.container_shell[k]}"
        values[key] = weights[:, k]
    values["total_purity"] = total
    return TimeSeries(times=times, values=values)


def nondegenerate_purity(table, gas_weights, container_weights, t):
    """Closed-form gas purity at time t for fully non-degenerate spectra.

    Quadruple phase sum over shell pairs:

        P(t) = sum_{A,B,C,D} exp(-i (E_AB - E_CB + E_CD - E_AD) t)
               * P_A P_B P_C P_D

    Conjugate terms pair up, so the value is real; initial per-shell phases
    drop out for product starts.  Accepts a scalar or an array of times.
    """
    gw = np.asarray(gas_weights, dtype=np.float64)
    cw = np.asarray(container_weights, dtype=np.float64)
    if table.entries.shape != (gw.size, cw.size):
        raise ValidationError(f"energy table shape {table.entries.shape} does not "
                              f"match weight counts ({gw.size}, {cw.size})")
    for name, w in (("gas", gw), ("container", cw)):
        if abs(w.sum() - 1.0) > 1e-8:
            raise ValidationError(f"{name} weights sum to {w.sum()}, not 1")
    tarr = np.atleast_1d(np.asarray(t, dtype=np.float64))
    phase = np.exp(-1j * tarr[:, None, None] * table.entries[None, :, :])
    vals = np.einsum("tab,tcb,tcd,tad,a,b,c,d->t",
                     phase, phase.conj(), phase, phase.conj(),
                     gw, cw, gw, cw, optimize=True)
    if np.abs(vals.imag).max(initial=0.0) > 1e-12:
        raise NumericalError("purity phase sum acquired an imaginary part "
                             f"{np.abs(vals.imag).max()}")
    out = vals.real
    return float(out[0]) if np.ndim(t) == 0 else out


def time_average_purity(hamiltonian, psi0, total_time, n_steps):
    """Uniform-grid time average of the gas purity over [0, total_time].

    The grid spacing is total_time / (n_steps * golden_ratio): the irrational
    multiplier keeps the grid incommensurate with Bohr frequencies, so
    oscillating terms are not aliased into the average.
    """
    if total_time <= 0:
        raise ValidationError("total_time must be positive")
    if n_steps < 100:
        raise ValidationError("n_steps must be at least 100")
    kern = backend.kernels()
    sys = hamiltonian.sys
    delta = total_time / (n_steps * GOLDEN_RATIO)
    count = int(math.floor(total_time / delta)) + 1
    batch = max(1, _BATCH_AMPS // max(1, hamiltonian.dimension))
    acc = 0.0
    for lo in range(0, count, batch):
        hi = min(count, lo + batch)
        times = np.arange(lo, hi) * delta
        states = np.ascontiguousarray(states_at(hamiltonian, psi0, times)
                                      ).reshape(hi - lo, sys.dim_g, sys.dim_c)
        acc += float(kern.gas_purity(states).sum())
    return acc / count


def effective_velocity(hamiltonian, psi0):
    """Speed sqrt(<psi|H^2|psi>) of the state along its Hilbert-space path.

    Equals the norm of d|psi>/dt (hbar = 1) and is constant along any
    trajectory, which is what makes time averages equal path averages.
    """
    _check_state(hamiltonian, psi0)
    return float(np.linalg.norm(hamiltonian.matrix @ psi0.amplitudes))


def resonance_check(table, tol=1e-9):
    """Search for vanishing combined gaps E_AB - E_CB + E_CD - E_AD.

    Scans canonical quadruples (A < C, B < D); see ResonanceReport.  With an
    additive (non-interacting) table every quadruple is resonant; a generic
    random coupling clears the report.
    """
    energies = table.entries
    na, nb = energies.shape
    hits = []
    iu_b, iu_d = np.triu_indices(nb, k=1)
    for a in range(na):
        for c in range(a + 1, na):
            diff = energies[a] - energies[c]
            gaps = diff[iu_b] - diff[iu_d]
            for pos in np.flatnonzero(np.abs(gaps) < tol):
                hits.append((a, int(iu_b[pos]), c, int(iu_d[pos]), float(gaps[pos])))
    return ResonanceReport(tolerance=float(tol), quadruples=tuple(hits))
