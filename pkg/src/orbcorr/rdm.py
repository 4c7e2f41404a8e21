"""Mode partial traces, orbital reduced density matrices and the 1-RDM.

A reduced state lives on the Fock space of a list of kept modes. The kept
modes are brought to the front of the global mode order first; every
configuration picks up the sign of that reordering, after which the Fock
space factorizes as kept (x) rest and the rest is traced out.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .fock import StateVector, annihilate_bits, create_bits, popcount

HERMITIAN_TOL = 1e-10
LEAK_TOL = 1e-8
MAX_KEPT_MODES = 12


class SymmetryLeakError(ValueError):
    """Reduced state has coherences its symmetry forbids (beyond ``LEAK_TOL``)."""


def local_particle_numbers(modes, configs) -> np.ndarray:
    return np.array([popcount(int(c)) for c in configs])


def local_twice_sz(modes, configs) -> np.ndarray:
    spins = [1 if m % 2 == 0 else -1 for m in modes]
    return np.array(
        [sum(s for p, s in enumerate(spins) if (int(c) >> p) & 1) for c in configs]
    )


def _sector_mask(modes, configs) -> np.ndarray:
    n = local_particle_numbers(modes, configs)
    s = local_twice_sz(modes, configs)
    return (n[:, None] == n[None, :]) & (s[:, None] == s[None, :])


@dataclass(eq=False)
class DensityMatrix:
    """Density operator on the Fock space of ``modes``.

    Row ``r`` is the configuration ``configs[r]`` whose bit ``p`` is the
    occupation of global mode ``modes[p]``. ``sector_mask`` marks entries
    allowed by conservation of the kept-space particle number and S_z; it is
    all-true when the state does not respect those symmetries.
    """

    modes: tuple[int, ...]
    configs: np.ndarray
    matrix: np.ndarray
    sector_mask: np.ndarray = field(default=None)

    def __post_init__(self):
        self.modes = tuple(int(m) for m in self.modes)
        self.configs = np.asarray(self.configs, dtype=np.int64)
        self.matrix = np.asarray(self.matrix, dtype=complex)
        n = len(self.configs)
        if self.matrix.shape != (n, n):
            raise ValueError(f"matrix shape {self.matrix.shape} does not match {n} configurations")
        if not np.allclose(self.matrix, self.matrix.conj().T, rtol=0, atol=HERMITIAN_TOL):
            raise ValueError("density matrix is not Hermitian")
        tr = np.trace(self.matrix).real
        if abs(tr - 1) > HERMITIAN_TOL:
            raise ValueError(f"density matrix has trace {tr}")
        if self.sector_mask is None:
            mask = _sector_mask(self.modes, self.configs)
            leak = np.abs(self.matrix[~mask]).max(initial=0.0)
            self.sector_mask = mask if leak <= HERMITIAN_TOL else np.ones((n, n), dtype=bool)

    @property
    def dim(self) -> int:
        return len(self.configs)

    def eigenvalues(self) -> np.ndarray:
        """Spectrum with round-off negatives clipped and renormalized."""
        return clip_spectrum(np.linalg.eigvalsh(self.matrix))

    def index_of(self, config: int) -> int:
        return int(np.flatnonzero(self.configs == config)[0])

    def is_pure(self, tol: float = 1e-10) -> bool:
        return abs(np.trace(self.matrix @ self.matrix).real - 1) < tol


def clip_spectrum(evals: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    evals = np.asarray(evals, dtype=float)
    if evals.min(initial=0.0) < -tol:
        raise ValueError(f"density matrix has negative eigenvalue {evals.min():.3e}")
    evals = np.clip(evals, 0.0, None)
    return evals / evals.sum()


def pure_density_matrix(state: StateVector) -> DensityMatrix:
    """``|psi><psi|`` on all modes, rows in the state's basis order."""
    psi = state.amplitudes
    return DensityMatrix(tuple(range(state.mode_count)), np.array(state.basis.configs), np.outer(psi, psi.conj()))


def _reorder_sign(bits: int, positions: dict[int, int]) -> int:
    """Sign of reordering the occupied modes of ``bits`` by ``positions``."""
    occ = [positions[m] for m in range(bits.bit_length()) if (bits >> m) & 1]
    inv = sum(1 for x, y in itertools.combinations(occ, 2) if x > y)
    return -1 if inv % 2 else 1


def _split_configs(modes, configs, kept):
    """Local kept/rest labels and reordering signs for each configuration.

    ``modes`` lists the global modes of the input (bit p <-> modes[p]).
    """
    pos_in = {m: p for p, m in enumerate(modes)}
    missing = [m for m in kept if m not in pos_in]
    if missing:
        raise ValueError(f"modes {missing} are not present in the input")
    if len(set(kept)) != len(kept):
        raise ValueError("kept modes must be distinct")
    kept_pos = [pos_in[m] for m in kept]
    rest_pos = [p for p in range(len(modes)) if p not in set(kept_pos)]
    new_rank = {p: r for r, p in enumerate(kept_pos + rest_pos)}
    a_lab, b_lab, signs = [], [], []
    for c in configs:
        c = int(c)
        a = sum(((c >> p) & 1) << r for r, p in enumerate(kept_pos))
        b = sum(((c >> p) & 1) << r for r, p in enumerate(rest_pos))
        a_lab.append(a)
        b_lab.append(b)
        signs.append(_reorder_sign(c, new_rank))
    return np.array(a_lab), np.array(b_lab), np.array(signs)


def mode_partial_trace(source, kept_modes) -> DensityMatrix:
    """Reduce a state (or density matrix) to the Fock space of ``kept_modes``.

    ``kept_modes`` are global mode indices; their order fixes the local
    tensor-product order. Rows of the result are all ``2**k`` local
    configurations in ascending bit-pattern order.
    """
    kept = tuple(int(m) for m in kept_modes)
    if len(kept) > MAX_KEPT_MODES:
        raise ValueError(f"at most {MAX_KEPT_MODES} kept modes supported")
    if isinstance(source, StateVector):
        modes = tuple(range(source.mode_count))
        configs = source.basis.configs
    else:
        modes, configs = source.modes, source.configs
    if not kept:
        return DensityMatrix((), np.array([0]), np.ones((1, 1)))
    dim_a = 1 << len(kept)
    a_lab, b_lab, signs = _split_configs(modes, configs, kept)

    if isinstance(source, StateVector):
        b_unique, b_idx = np.unique(b_lab, return_inverse=True)
        psi = np.zeros((dim_a, len(b_unique)), dtype=complex)
        np.add.at(psi, (a_lab, b_idx), signs * source.amplitudes)
        rho = psi @ psi.conj().T
    else:
        m = source.matrix * np.outer(signs, signs)
        rho = np.zeros((dim_a, dim_a), dtype=complex)
        for b in np.unique(b_lab):
            rows = np.flatnonzero(b_lab == b)
            np.add.at(rho, (a_lab[rows][:, None], a_lab[rows][None, :]), m[np.ix_(rows, rows)])
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(kept, np.arange(dim_a), rho)


@dataclass(frozen=True)
class OneOrbitalSpectrum:
    """Occupation probabilities of ``(empty, up, down, doubly occupied)``."""

    p1: float
    p2: float
    p3: float
    p4: float

    def __post_init__(self):
        p = self.as_array()
        if np.any(p < -1e-10) or np.any(p > 1 + 1e-10) or abs(p.sum() - 1) > 1e-10:
            raise ValueError(f"invalid one-orbital spectrum {p}")

    def as_array(self) -> np.ndarray:
        return np.array([self.p1, self.p2, self.p3, self.p4])


def one_orbital_rdm(state: StateVector, orbital: int):
    """Diagonal one-orbital RDM in the local basis ``(vac, up, dn, updn)``."""
    rho = mode_partial_trace(state, (2 * orbital, 2 * orbital + 1))
    off = rho.matrix - np.diag(np.diag(rho.matrix))
    leak = np.abs(off).max()
    if leak > LEAK_TOL:
        raise SymmetryLeakError(f"one-orbital RDM has off-diagonal entry {leak:.3e}")
    p = np.clip(np.diag(rho.matrix).real, 0.0, None)
    p = p / p.sum()
    diag = DensityMatrix(rho.modes, rho.configs, np.diag(p).astype(complex))
    return diag, OneOrbitalSpectrum(*p)


def two_orbital_rdm(state: StateVector, i: int, j: int) -> DensityMatrix:
    """Two-orbital RDM with rows in the product order ``(local_i, local_j)``.

    Row ``4 * a + b`` holds orbital ``i`` in local state ``a`` and orbital
    ``j`` in local state ``b``, each from ``(vac, up, dn, updn)``.
    """
    if i == j:
        raise ValueError("two_orbital_rdm needs two distinct orbitals")
    rho = mode_partial_trace(state, (2 * i, 2 * i + 1, 2 * j, 2 * j + 1))
    order = np.array([a | (b << 2) for a in range(4) for b in range(4)])
    out = DensityMatrix(rho.modes, order, rho.matrix[np.ix_(order, order)])
    mask = _sector_mask(out.modes, out.configs)
    leak = np.abs(out.matrix[~mask]).max(initial=0.0)
    if leak > LEAK_TOL:
        raise SymmetryLeakError(f"two-orbital RDM violates the sector mask by {leak:.3e}")
    return out


@dataclass(frozen=True, eq=False)
class OneParticleRDM:
    """``gamma[i, j] = <c+_j c_i>`` over spin-orbital modes."""

    gamma: np.ndarray

    @property
    def trace(self) -> float:
        return float(np.trace(self.gamma).real)

    def natural_occupations(self) -> "NaturalOccupations":
        lam = np.sort(np.linalg.eigvalsh(self.gamma))[::-1]
        return NaturalOccupations(lam, int(round(self.trace)))


@dataclass(frozen=True, eq=False)
class NaturalOccupations:
    lambdas: np.ndarray
    electron_count: int

    @property
    def hf_point(self) -> np.ndarray:
        ref = np.zeros(len(self.lambdas))
        ref[: self.electron_count] = 1.0
        return ref


def one_particle_rdm(state: StateVector) -> OneParticleRDM:
    D = state.mode_count
    basis = state.basis
    psi = state.amplitudes
    gamma = np.zeros((D, D), dtype=complex)
    for col, bits in enumerate(basis.configs):
        amp = psi[col]
        if amp == 0:
            continue
        for i in range(D):
            out = annihilate_bits(bits, i)
            if out is None:
                continue
            mid, p1 = out
            for j in range(D):
                out2 = create_bits(mid, j)
                if out2 is None:
                    continue
                new, p2 = out2
                row = basis.find(new)
                if row is not None:
                    gamma[i, j] += np.conj(psi[row]) * p1 * p2 * amp
    gamma = 0.5 * (gamma + gamma.conj().T)
    return OneParticleRDM(gamma)


def intrinsic_correlation(occs, electron_count: int | None = None) -> float:
    """l1 distance of decreasing natural occupations from the Hartree-Fock point."""
    if isinstance(occs, NaturalOccupations):
        lam, n = occs.lambdas, occs.electron_count if electron_count is None else electron_count
    else:
        lam, n = np.sort(np.asarray(occs, dtype=float))[::-1], electron_count
    return max(0.0, float(np.sum(1 - lam[:n]) + np.sum(lam[n:])))


@dataclass(frozen=True)
class SlaterOverlap:
    overlap: float
    degenerate: bool


def natural_slater_overlap(state: StateVector, gap_tol: float = 1e-8) -> SlaterOverlap:
    """``|<phi_1 .. phi_N|psi>|^2`` for the N leading natural spin-orbitals.

    When the N-th and (N+1)-th occupations coincide the determinant is not
    unique; the degenerate cluster is then resolved by projecting the
    spin-orbital basis into it and taking the best determinant over those
    candidates, and ``degenerate`` is set.
    """
    n = state.basis.sector.particle_count
    if n is None:
        ns = state.basis.particle_numbers()
        if np.any(ns != ns[0]):
            raise ValueError("natural_slater_overlap needs a fixed particle number")
        n = int(ns[0])
    gamma = one_particle_rdm(state).gamma
    lam, vecs = np.linalg.eigh(gamma)
    lam, vecs = lam[::-1], vecs[:, ::-1]
    D = len(lam)
    if n == 0 or n == D:
        return SlaterOverlap(1.0, False)
    degenerate = lam[n - 1] - lam[n] < gap_tol
    if not degenerate:
        return SlaterOverlap(_det_overlap(state, vecs[:, :n]), False)

    cluster = np.flatnonzero(np.abs(lam - lam[n - 1]) < gap_tol)
    fixed = vecs[:, : cluster[0]]
    need = n - cluster[0]
    span = vecs[:, cluster]
    proj = span @ span.conj().T
    cands = []
    for m in range(D):
        v = proj[:, m]
        for c in cands:
            v = v - c * (c.conj() @ v)
        if np.linalg.norm(v) > 1e-8:
            cands.append(v / np.linalg.norm(v))
        if len(cands) == len(cluster):
            break
    best = 0.0
    for subset in itertools.combinations(range(len(cands)), need):
        orbs = np.column_stack([fixed] + [cands[k] for k in subset]) if need else fixed
        best = max(best, _det_overlap(state, orbs))
    return SlaterOverlap(best, True)


def _det_overlap(state: StateVector, orbitals: np.ndarray) -> float:
    """``|<det(orbitals)|psi>|^2`` with ``det = prod_a (sum_m U_ma c+_m) |vac>``."""
    total = 0j
    for amp, bits in zip(state.amplitudes, state.basis.configs):
        occ = [m for m in range(state.mode_count) if (bits >> m) & 1]
        if len(occ) != orbitals.shape[1]:
            continue
        total += np.conj(np.linalg.det(orbitals[occ, :])) * amp
    return float(abs(total) ** 2)
