"""Lowest eigenpair of a sector-restricted Hamiltonian."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as spla

from .fock import SectorLabel, StateVector
from .models import SparseOperator

log = logging.getLogger(__name__)

DENSE_LIMIT = 4096
MAX_DIM = 1 << 20
DEGENERACY_GAP = 1e-8
LANCZOS_SEED = 0x5EED


class ConvergenceError(RuntimeError):
    """Iterative eigensolver gave up; ``residual`` is the best residual norm reached."""

    def __init__(self, message: str, residual: float):
        self.residual = residual
        super().__init__(f"{message} (best residual {residual:.3e})")


@dataclass(frozen=True, eq=False)
class EigenResult:
    energy: float
    state: StateVector
    degenerate: bool
    residual: float = 0.0


def _canonical_vector(vecs: np.ndarray) -> np.ndarray:
    """Deterministic representative of the span of the columns of ``vecs``.

    Projects unit vectors e_0, e_1, ... onto the span and keeps the first
    projection that does not vanish.
    """
    if vecs.shape[1] == 1:
        return vecs[:, 0]
    weights = np.sum(np.abs(vecs) ** 2, axis=1)
    k = int(np.flatnonzero(weights > 1e-10)[0])
    return vecs @ vecs[k].conj()


def ground_state(
    H: SparseOperator,
    sector: SectorLabel | None = None,
    *,
    dense_limit: int = DENSE_LIMIT,
    max_iter: int | None = None,
    tol: float = 1e-12,
) -> EigenResult:
    """Lowest eigenpair of ``H``.

    Dense diagonalization up to ``dense_limit`` basis states, ARPACK's
    implicitly restarted Lanczos above. ``sector``, when given, must match
    the operator's basis sector.
    """
    basis = H.basis
    if sector is not None and sector != basis.sector:
        raise ValueError(f"operator basis is sector {basis.sector}, not {sector}")
    if not H.is_hermitian():
        raise ValueError("ground_state needs a Hermitian operator")
    dim = basis.dim
    if dim > MAX_DIM:
        raise ValueError(f"sector dimension {dim} exceeds the limit {MAX_DIM}")

    if dim <= dense_limit:
        evals, evecs = np.linalg.eigh(H.toarray())
        e0 = evals[0]
        scale = max(1.0, np.max(np.abs(evals)))
        nearly = np.flatnonzero(evals - e0 < DEGENERACY_GAP * scale)
        vec = _canonical_vector(evecs[:, nearly])
        degenerate = nearly.size > 1
    else:
        rng = np.random.default_rng(LANCZOS_SEED)
        v0 = rng.standard_normal(dim)
        k = min(4, dim - 1)
        try:
            evals, evecs = spla.eigsh(
                H.matrix, k=k, which="SA", v0=v0, tol=tol, maxiter=max_iter or 20 * dim
            )
        except spla.ArpackNoConvergence as exc:
            best = np.inf
            for val, vec in zip(exc.eigenvalues, exc.eigenvectors.T):
                best = min(best, float(np.linalg.norm(H.matrix @ vec - val * vec)))
            raise ConvergenceError("Lanczos did not converge", best) from exc
        order = np.argsort(evals)
        evals, evecs = evals[order], evecs[:, order]
        e0 = evals[0]
        nearly = np.flatnonzero(evals - e0 < DEGENERACY_GAP * max(1.0, abs(e0)))
        vec = _canonical_vector(evecs[:, nearly])
        degenerate = nearly.size > 1
    if degenerate:
        log.warning("ground state is degenerate; returning a canonical representative")
    state = StateVector(basis, vec).fix_phase()
    residual = float(np.linalg.norm(H.matrix @ state.amplitudes - e0 * state.amplitudes))
    return EigenResult(float(e0), state, bool(degenerate), residual)
