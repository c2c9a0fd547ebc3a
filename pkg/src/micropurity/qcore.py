"""Dense complex linear algebra for bipartite pure-state quantum mechanics.

States live in the product basis of a gas (observed) subsystem of dimension
``dim_g`` and a container (environment) subsystem of dimension ``dim_c``; the
flat basis index is ``i * dim_c + j`` for gas index ``i`` and container index
``j``.  Units are natural throughout: hbar = 1 (time/energy) and k = 1
(entropy in nats).

Everything here is a pure function of immutable values; arrays are copied on
construction and marked read-only, so instances are safe to share across
threads.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, PositivityError, ValidationError

#: allowed deviation of state norms and density-matrix traces from 1
NORM_TOL = 1e-12
#: allowed Hermiticity defect of density matrices
HERMITICITY_TOL = 1e-12
#: reduced-spectrum eigenvalues in [-EIG_CLIP, 0) are round-off and clipped to 0
EIG_CLIP = 1e-10
#: norm gate for turning user-supplied amplitudes into a density matrix
STATE_NORM_GATE = 1e-8


def _frozen_copy(arr, dtype):
    out = np.array(arr, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class StateVector:
    """Pure state of the bipartite system, flat over the product basis."""

    amplitudes: np.ndarray
    dim_g: int
    dim_c: int

    def __post_init__(self):
        if self.dim_g < 1 or self.dim_c < 1:
            raise ValidationError("subsystem dimensions must be positive")
        amps = _frozen_copy(self.amplitudes, np.complex128)
        if amps.ndim != 1 or amps.size != self.dim_g * self.dim_c:
            raise ValidationError(
                f"amplitude length {amps.size} != dim_g*dim_c = {self.dim_g * self.dim_c}")
        nrm = np.linalg.norm(amps)
        if abs(nrm - 1.0) > NORM_TOL:
            raise ValidationError(
                f"state norm {nrm} deviates from 1 by more than {NORM_TOL}; "
                "use StateVector.normalized for unnormalized amplitudes")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, amplitudes, dim_g, dim_c):
        """Build a state from arbitrary amplitudes, rescaling to unit norm."""
        amps = np.asarray(amplitudes, dtype=np.complex128)
        nrm = np.linalg.norm(amps)
        if nrm == 0.0:
            raise ValidationError("cannot normalize the zero vector")
        return cls(amps / nrm, dim_g, dim_c)

    @property
    def dim(self):
        return self.dim_g * self.dim_c

    def amplitude_matrix(self):
        """The (dim_g, dim_c) view with entries psi[i, j]."""
        return self.amplitudes.reshape(self.dim_g, self.dim_c)


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace density operator (full or reduced)."""

    entries: np.ndarray

    def __post_init__(self):
        ent = _frozen_copy(self.entries, np.complex128)
        if ent.ndim != 2 or ent.shape[0] != ent.shape[1]:
            raise ValidationError(f"density matrix must be square, got shape {ent.shape}")
        defect = np.abs(ent - ent.conj().T).max(initial=0.0)
        if defect > HERMITICITY_TOL:
            raise ValidationError(f"Hermiticity defect {defect} exceeds {HERMITICITY_TOL}")
        tr = np.trace(ent)
        if abs(tr - 1.0) > NORM_TOL:
            raise ValidationError(f"trace {tr} deviates from 1 by more than {NORM_TOL}")
        object.__setattr__(self, "entries", ent)

    @property
    def dim(self):
        return self.entries.shape[0]

    def eigenvalues(self):
        """Real spectrum, ascending; raises if positivity is violated."""
        evals = np.linalg.eigvalsh((self.entries + self.entries.conj().T) / 2.0)
        if evals.min(initial=0.0) < -EIG_CLIP:
            raise PositivityError(
                f"eigenvalue {evals.min()} below the -{EIG_CLIP} round-off floor")
        return evals


@dataclass(frozen=True)
class EigenSystem:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns are eigenvectors

    def __post_init__(self):
        evals = _frozen_copy(self.eigenvalues, np.float64)
        evecs = _frozen_copy(self.eigenvectors, np.complex128)
        if evals.ndim != 1 or evecs.ndim != 2 or evecs.shape != (evals.size, evals.size):
            raise ValidationError("eigenvalue/eigenvector shapes are inconsistent")
        if evals.size > 1 and np.any(np.diff(evals) < 0):
            raise ValidationError("eigenvalues must be sorted ascending")
        object.__setattr__(self, "eigenvalues", evals)
        object.__setattr__(self, "eigenvectors", evecs)

    @property
    def dim(self):
        return self.eigenvalues.size


def density_from_state(psi):
    """Rank-1 density operator |psi><psi| of a (nearly) normalized state.

    Amplitudes whose norm deviates from 1 by more than ``STATE_NORM_GATE``
    are rejected; smaller deviations are renormalized exactly.
    """
    amps = psi.amplitudes if isinstance(psi, StateVector) else np.asarray(psi, np.complex128)
    nrm = np.linalg.norm(amps)
    if abs(nrm - 1.0) > STATE_NORM_GATE:
        raise ValidationError(f"state norm {nrm} deviates from 1 by more than {STATE_NORM_GATE}")
    amps = amps / nrm
    return DensityMatrix(np.outer(amps, amps.conj()))


def partial_trace(rho, dim_g, dim_c, keep="gas"):
    """Trace out one subsystem of a bipartite density matrix.

    Parameters
    ----------
    rho : DensityMatrix
        Full density matrix of dimension ``dim_g * dim_c``.
    dim_g, dim_c : int
        Gas and container dimensions of the product basis.
    keep : {"gas", "container"}
        Which subsystem's reduced density matrix to return.
    """
    if rho.dim != dim_g * dim_c:
        raise ValidationError(f"dimension {rho.dim} != dim_g*dim_c = {dim_g * dim_c}")
    arr = rho.entries.reshape(dim_g, dim_c, dim_g, dim_c)
    if keep == "gas":
        red = np.einsum("ikjk->ij", arr)
    elif keep == "container":
        red = np.einsum("kikj->ij", arr)
    else:
        raise ValidationError(f"keep must be 'gas' or 'container', got {keep!r}")
    red = (red + red.conj().T) / 2.0
    return DensityMatrix(red)


def reduced_density(psi, keep="gas"):
    """Reduced density matrix of a pure state, via its amplitude matrix.

    Equivalent to ``partial_trace(density_from_state(psi), ...)`` but never
    forms the full outer product.
    """
    a = psi.amplitude_matrix()
    if keep == "gas":
        red = a @ a.conj().T
    elif keep == "container":
        red = a.T @ a.conj()
    else:
        raise ValidationError(f"keep must be 'gas' or 'container', got {keep!r}")
    red = (red + red.conj().T) / 2.0
    return DensityMatrix(red)


def purity(rho):
    """Tr(rho^2), in [1/dim, 1]."""
    h = (rho.entries + rho.entries.conj().T) / 2.0
    return float(np.einsum("ij,ij->", h, h.conj()).real)


def entropy(rho):
    """Von Neumann entropy -Tr(rho ln rho) in nats (k = 1).

    Eigenvalues in [-EIG_CLIP, 0) are treated as round-off zeros; anything
    below raises :class:`PositivityError`.
    """
    evals = rho.eigenvalues()
    evals = np.clip(evals, 0.0, None)
    logs = np.log(np.where(evals > 0.0, evals, 1.0))
    return float(-(evals * logs).sum())


def hermitian_eigendecompose(matrix):
    """Eigendecomposition of a Hermitian matrix (symmetrized internally).

    The input may deviate from exact Hermiticity by at most 1e-10; it is
    replaced by (M + M^dagger)/2 before the solve.
    """
    mat = np.asarray(matrix, dtype=np.complex128)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValidationError(f"matrix must be square, got shape {mat.shape}")
    defect = np.abs(mat - mat.conj().T).max(initial=0.0)
    if defect > 1e-10:
        raise ValidationError(f"Hermiticity defect {defect} exceeds 1e-10")
    herm = (mat + mat.conj().T) / 2.0
    try:
        evals, evecs = np.linalg.eigh(herm)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed on dim {mat.shape[0]}: {exc}") from exc
    return EigenSystem(evals, evecs)


def propagate(psi0, eigensystem, t):
    """Evolve a state for time t under H = V diag(w) V^dagger (hbar = 1).

    Exact unitary propagation: psi(t) = V exp(-i w t) V^dagger psi0.
    """
    if eigensystem.dim != psi0.dim:
        raise ValidationError(
            f"eigensystem dimension {eigensystem.dim} != state dimension {psi0.dim}")
    v = eigensystem.eigenvectors
    coeffs = v.conj().T @ psi0.amplitudes
    amps = v @ (np.exp(-1j * eigensystem.eigenvalues * t) * coeffs)
    return StateVector(amps, psi0.dim_g, psi0.dim_c)
