"""Pure numpy implementation of the hot sampling/observable kernels.

All functions operate on stacks of bipartite amplitude matrices with shape
``(m, dim_g, dim_c)`` (sample index first).  A compiled Cython twin of this
module (``micropurity._kernels``) implements the same contracts; the active
implementation is chosen in :mod:`micropurity.backend`.
"""

import numpy as np

from .errors import PositivityError, ValidationError

BACKEND_NAME = "python"

#: eigenvalues of reduced density matrices may undershoot zero by round-off;
#: anything below -EIG_CLIP is treated as a genuine positivity violation.
EIG_CLIP = 1e-10


def normalize_blocks(states, row_start, row_stop, col_start, col_stop, weights):
    """Rescale each (gas shell, container shell) block to its target weight.

    ``states`` is modified in place: block ``k`` of every sample ends up with
    squared norm exactly ``weights[k]`` (up to one rounding of the scale
    factor).  Blocks with zero target weight are zeroed.
    """
    m = states.shape[0]
    for k in range(len(weights)):
        view = states[:, row_start[k]:row_stop[k], col_start[k]:col_stop[k]]
        if weights[k] == 0.0:
            view[...] = 0.0
            continue
        sq = (view.real**2 + view.imag**2).sum(axis=(1, 2))
        if m and not sq.all():
            raise ValidationError("cannot normalize a zero block to nonzero weight")
        view *= np.sqrt(weights[k] / sq)[:, None, None]
    return states


def block_weights(states, row_start, row_stop, col_start, col_stop):
    """Squared amplitude mass of every block, shape ``(m, n_blocks)``."""
    m = states.shape[0]
    out = np.empty((m, len(row_start)))
    for k in range(len(row_start)):
        view = states[:, row_start[k]:row_stop[k], col_start[k]:col_stop[k]]
        out[:, k] = (view.real**2 + view.imag**2).sum(axis=(1, 2))
    return out


def gas_purity(states):
    """Purity of the first-subsystem reduction of each pure state.

    For an amplitude matrix A the reduction is A A^dagger, and the purity is
    its squared Frobenius norm.
    """
    g = states @ states.conj().transpose(0, 2, 1)
    return np.einsum("mij,mij->m", g, g.conj()).real


def gas_entropy(states, clip=EIG_CLIP):
    """Von Neumann entropy of the first-subsystem reduction of each state."""
    g = states @ states.conj().transpose(0, 2, 1)
    evals = np.linalg.eigvalsh(g)
    low = evals.min(initial=0.0)
    if low < -clip:
        raise PositivityError(f"reduced density matrix eigenvalue {low} < -{clip}")
    evals = np.clip(evals, 0.0, None)
    logs = np.log(np.where(evals > 0.0, evals, 1.0))
    return -(evals * logs).sum(axis=1)
