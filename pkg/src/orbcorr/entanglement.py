"""Correlation and entanglement measures between orbitals.

All entropies are in nats. ``I`` is the quantum mutual information, ``E``
the relative entropy of entanglement (distance to the closest separable
state) and ``C`` the distance from that separable state to the product of
marginals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fock import StateVector
from .rdm import DensityMatrix, OneOrbitalSpectrum, one_orbital_rdm, two_orbital_rdm
from .separable import (
    DEFAULT_SEED,
    OptimizerOptions,
    optimize_closest_separable,
    partial_traces,
    partial_transpose,
)
from .ssr import SSR_MODES, Bipartition, from_product_form, product_form, project, resolve_split

ZERO_CUTOFF = 1e-10
PPT_TOL = 1e-10
SUPPORT_TOL = 1e-12


def _as_array(rho) -> np.ndarray:
    return rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


def _entropy(p) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    return float(-np.sum(p * np.log(p))) if p.size else 0.0


def _clean(x: float) -> float:
    return 0.0 if x < ZERO_CUTOFF else float(x)


def von_neumann_entropy(rho) -> float:
    """``-Tr rho ln rho`` over the clipped spectrum."""
    if isinstance(rho, DensityMatrix):
        return _entropy(rho.eigenvalues())
    return _entropy(np.clip(np.linalg.eigvalsh(_as_array(rho)), 0.0, None))


def relative_entropy(rho, sigma) -> float:
    """``Tr rho (ln rho - ln sigma)``; ``math.inf`` when supp(rho) is not inside supp(sigma)."""
    r, s = _as_array(rho), _as_array(sigma)
    if r.shape != s.shape:
        raise ValueError(f"dimension mismatch {r.shape} vs {s.shape}")
    lam, u = np.linalg.eigh(s)
    keep = lam > SUPPORT_TOL
    r_u = u.conj().T @ r @ u
    if np.real(np.trace(r_u[np.ix_(~keep, ~keep)])) > SUPPORT_TOL:
        return math.inf
    cross = float(np.real(np.sum(np.diag(r_u)[keep] * np.log(lam[keep]))))
    return max(-von_neumann_entropy(r) - cross, 0.0)


def reduced_states(rho: DensityMatrix, split: Bipartition | None = None):
    """Marginals ``(rho_A, rho_B)`` as arrays in local configuration order."""
    m, d_a, d_b = product_form(rho, split)
    return partial_traces(m, d_a, d_b)


def mutual_information(rho: DensityMatrix, split: Bipartition | None = None) -> float:
    rho_a, rho_b = reduced_states(rho, split)
    value = von_neumann_entropy(rho_a) + von_neumann_entropy(rho_b) - von_neumann_entropy(rho)
    return max(value, 0.0)


@dataclass(frozen=True)
class PPTResult:
    """Outcome of the partial-transpose test; ``min_eigenvalue`` is the witness."""

    is_ppt: bool
    min_eigenvalue: float

    @property
    def label(self) -> str:
        return "PPT" if self.is_ppt else "NPT"


def ppt_test(rho: DensityMatrix, split: Bipartition | None = None) -> PPTResult:
    """Peres test with the transpose taken on side B."""
    m, d_a, d_b = product_form(rho, split)
    low = float(np.linalg.eigvalsh(partial_transpose(m, d_a, d_b)).min())
    return PPTResult(low >= -PPT_TOL, low)


@dataclass(frozen=True)
class CorrelationTriple:
    """``I``, ``E`` and (when computed) ``C`` in nats under one SSR mode."""

    total: float
    quantum: float
    classical: float | None
    ssr_mode: str = "none"
    converged: bool = True

    def __post_init__(self):
        if self.ssr_mode not in SSR_MODES:
            raise ValueError(f"unknown SSR mode {self.ssr_mode!r}")
        if self.quantum > self.total + 1e-8:
            raise ValueError(f"entanglement {self.quantum} exceeds total correlation {self.total}")

    def as_dict(self) -> dict:
        return {
            "I": self.total,
            "E": self.quantum,
            "C": self.classical,
            "ssr_mode": self.ssr_mode,
            "converged": self.converged,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CorrelationTriple":
        return cls(data["I"], data["E"], data["C"], data["ssr_mode"], data["converged"])


@dataclass(eq=False)
class SeparableApproximation:
    """Closest separable state found, with the product-state ensemble that builds it.

    ``residual`` is the final Frank-Wolfe duality gap of the distance
    minimization, an upper bound on how far ``distance`` may sit above the
    optimum over the explored directions. When the input's local supports are
    2x2 or 2x3 and it passes the partial-transpose test, it is separable
    outright: ``sigma_star`` is then the input itself and the ensemble
    reproduces it up to ``residual``.
    """

    sigma_star: DensityMatrix
    ensemble: list[tuple[float, np.ndarray, np.ndarray]] = field(default_factory=list)
    converged: bool = True
    residual: float = 0.0
    distance: float = 0.0
    classical: float = 0.0
    iterations: int = 0
    tiebreak: str = "none"


def local_charges(rho: DensityMatrix, split: Bipartition | None = None, tol: float = 1e-12):
    """Conserved charges ``q_A + q_B`` of ``rho`` among number, spin and local-parity candidates.

    Returns per-basis-state label columns for each side and the modulus of
    each charge (0 for additive, 2 for parity).
    """
    split = resolve_split(rho, split)
    m, d_a, d_b = product_form(rho, split)

    def side(modes, d):
        labels = np.arange(d)
        occ = (labels[:, None] >> np.arange(len(modes))) & 1
        spin = np.array([1 if mode % 2 == 0 else -1 for mode in modes])
        return occ.sum(axis=1), occ @ spin if len(modes) else np.zeros(d, dtype=int)

    n_a, s_a = side(split.side_a_modes, d_a)
    n_b, s_b = side(split.side_b_modes, d_b)
    zero_b = np.zeros(d_b, dtype=int)
    candidates = [
        (n_a, n_b, 0),
        (s_a, s_b, 0),
        (n_a, zero_b, 0),
        (n_a % 2, zero_b, 2),
        (s_a, zero_b, 0),
    ]
    scale = max(np.abs(m).max(), 1.0)
    cols_a, cols_b, moduli = [], [], []
    for qa, qb, modulus in candidates:
        q = (qa[:, None] + qb[None, :]).reshape(-1)
        if modulus:
            q = q % modulus
        off = q[:, None] != q[None, :]
        if np.abs(m[off]).max(initial=0.0) <= tol * scale:
            cols_a.append(qa)
            cols_b.append(qb)
            moduli.append(modulus)
    la = np.column_stack(cols_a) if cols_a else np.zeros((d_a, 0), dtype=int)
    lb = np.column_stack(cols_b) if cols_b else np.zeros((d_b, 0), dtype=int)
    return la, lb, tuple(moduli)


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def closest_separable(
    rho: DensityMatrix,
    split: Bipartition | None = None,
    *,
    options: OptimizerOptions | None = None,
    seed=None,
) -> SeparableApproximation:
    """Separable state minimizing ``S(rho || sigma)``.

    The search is restricted to states with the same conserved local charges
    as ``rho`` (its sector mask), which loses nothing because averaging over
    those symmetries maps separable states to separable states and cannot
    increase the distance. ``seed`` may be any value accepted by
    :func:`numpy.random.default_rng`.
    """
    opts = options or OptimizerOptions()
    split = resolve_split(rho, split)
    m, d_a, d_b = product_form(rho, split)
    la, lb, moduli = local_charges(rho, split)
    res = optimize_closest_separable(
        m, d_a, d_b, labels_a=la, labels_b=lb, charges=moduli, options=opts,
        rng=_rng(opts.seed if seed is None else seed),
    )
    sigma = from_product_form(res.sigma / np.trace(res.sigma).real, rho.modes, split)
    ens = res.ensemble
    return SeparableApproximation(
        sigma,
        list(zip(ens.weights, ens.a, ens.b)),
        res.converged,
        res.residual,
        _clean(res.distance),
        _clean(res.classical),
        res.iterations,
        res.tiebreak,
    )


def correlation_triple(
    rho: DensityMatrix,
    ssr_mode: str = "none",
    split: Bipartition | None = None,
    *,
    options: OptimizerOptions | None = None,
    seed=None,
) -> CorrelationTriple:
    """``(I, E, C)`` of ``rho`` after the SSR projection, from one optimizer run."""
    split = resolve_split(rho, split)
    projected = project(rho, ssr_mode, split)
    total = _clean(mutual_information(projected, split))
    approx = closest_separable(projected, split, options=options, seed=seed)
    quantum = min(approx.distance, total)
    return CorrelationTriple(total, quantum, approx.classical, ssr_mode, approx.converged)


def rel_entropy_of_entanglement(rho, ssr_mode="none", split=None, *, options=None, seed=None) -> float:
    """``E`` of the projected state."""
    projected = project(rho, ssr_mode, resolve_split(rho, split))
    return closest_separable(projected, split, options=options, seed=seed).distance


def classical_correlation(rho, ssr_mode="none", split=None, *, options=None, seed=None) -> float:
    """``S(sigma* || rho_A (x) rho_B)`` for the projected state.

    When several separable states tie for the smallest distance (within the
    optimizer's face tolerance), the smallest value over them is reported.
    """
    projected = project(rho, ssr_mode, resolve_split(rho, split))
    return closest_separable(projected, split, options=options, seed=seed).classical


def single_orbital_measures(p: OneOrbitalSpectrum | np.ndarray, ssr_mode: str = "none") -> CorrelationTriple:
    """Closed-form ``I`` and ``E`` of one orbital against the rest of a pure state.

    ``p`` holds the probabilities of the empty, up, down and doubly occupied
    local configurations. ``C`` is not part of the closed forms and is left
    as ``None``.
    """
    p = np.asarray(p.as_array() if isinstance(p, OneOrbitalSpectrum) else p, dtype=float)
    p1, p2, p3, p4 = p
    s = _entropy(p)
    if ssr_mode == "none":
        quantum = s
    elif ssr_mode == "parity":
        quantum = s - _entropy([p1 + p4, p2 + p3])
    elif ssr_mode == "number":
        quantum = _entropy([p2, p3]) - _entropy([p2 + p3])
    else:
        raise ValueError(f"unknown SSR mode {ssr_mode!r}; expected one of {SSR_MODES}")
    quantum = _clean(quantum)
    return CorrelationTriple(_clean(quantum + s), quantum, None, ssr_mode)


def pair_seed(base: int, i: int, j: int, ssr_mode: str) -> list[int]:
    """Deterministic per-pair, per-mode seed sequence."""
    return [int(base), int(i), int(j), SSR_MODES.index(ssr_mode)]


def correlation_profile(
    state: StateVector,
    i: int,
    j: int | None = None,
    ssr_mode: str = "none",
    *,
    options: OptimizerOptions | None = None,
) -> CorrelationTriple:
    """Measures for orbital ``i`` against the rest (``j is None``) or for the pair ``(i, j)``.

    Orbital indices are zero-based. Single orbitals use the closed forms;
    pairs go through the two-orbital reduced state and the optimizer.
    """
    if j is None:
        _, spectrum = one_orbital_rdm(state, i)
        return single_orbital_measures(spectrum, ssr_mode)
    opts = options or OptimizerOptions()
    rho = two_orbital_rdm(state, i, j)
    return correlation_triple(rho, ssr_mode, options=opts, seed=pair_seed(opts.seed, i, j, ssr_mode))


__all__ = [
    "DEFAULT_SEED",
    "CorrelationTriple",
    "OptimizerOptions",
    "PPTResult",
    "SeparableApproximation",
    "classical_correlation",
    "closest_separable",
    "correlation_profile",
    "correlation_triple",
    "local_charges",
    "mutual_information",
    "pair_seed",
    "ppt_test",
    "reduced_states",
    "rel_entropy_of_entanglement",
    "relative_entropy",
    "single_orbital_measures",
    "von_neumann_entropy",
]
