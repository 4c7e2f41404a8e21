"""Independent reference implementations used only by the tests.

Everything here works on the full 2^D Fock space with Jordan-Wigner matrices
built from Kronecker products, sharing no code with the package.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

LN2 = math.log(2.0)
CLASSICAL_CONST = math.log(4.0 / 3.0) / 2.0


@lru_cache(maxsize=None)
def jw_annihilators(mode_count: int) -> tuple[np.ndarray, ...]:
    """Dense ``c_k`` on 2^D; basis index = sum of n_k 2^k, strings over lower modes."""
    a = np.array([[0.0, 1.0], [0.0, 0.0]])
    z = np.diag([1.0, -1.0])
    eye = np.eye(2)
    ops = []
    for k in range(mode_count):
        # kron's leftmost factor is the most significant bit, i.e. the highest mode
        factors = [eye] * (mode_count - 1 - k) + [a] + [z] * k
        m = np.array([[1.0]])
        for f in factors:
            m = np.kron(m, f)
        ops.append(m)
    return tuple(ops)


def dense_vector(state) -> np.ndarray:
    psi = np.zeros(1 << state.mode_count, dtype=complex)
    psi[list(state.basis.configs)] = state.amplitudes
    return psi


def brute_force_rdm(psi: np.ndarray, mode_count: int, kept) -> np.ndarray:
    """``rho[x, y] = <psi| F+_y P F_x |psi>`` with ``|x> = prod_p (c+_{kept[p]})^{x_p} |vac>`` in kept order."""
    c = jw_annihilators(mode_count)
    dim = 1 << mode_count
    proj = np.eye(dim)
    for m in kept:
        proj = proj @ (np.eye(dim) - c[m].T @ c[m])

    def creator(x):
        op = np.eye(dim)
        for p, m in enumerate(kept):
            if (x >> p) & 1:
                op = op @ c[m].T
        return op

    k = len(kept)
    creators = [creator(x) for x in range(1 << k)]
    rho = np.zeros((1 << k, 1 << k), dtype=complex)
    for x in range(1 << k):
        fx_psi = proj @ creators[x].T @ psi
        for y in range(1 << k):
            rho[x, y] = np.vdot(psi, creators[y] @ fx_psi)
    return rho


def dense_hamiltonian(one_body: np.ndarray, two_body: np.ndarray, core: float = 0.0) -> np.ndarray:
    """``sum h_ij c+_is c_js + 1/2 sum (ij|kl) c+_is c+_kt c_lt c_js + core`` on 2^D."""
    n = one_body.shape[0]
    c = jw_annihilators(2 * n)
    dim = 1 << (2 * n)
    H = core * np.eye(dim)
    mode = lambda i, s: 2 * i + s  # noqa: E731
    for i in range(n):
        for j in range(n):
            if one_body[i, j]:
                for s in (0, 1):
                    H += one_body[i, j] * c[mode(i, s)].T @ c[mode(j, s)]
    for i, j, k, l in zip(*np.nonzero(two_body)):
        v = two_body[i, j, k, l]
        for s in (0, 1):
            for t in (0, 1):
                H += 0.5 * v * c[mode(i, s)].T @ c[mode(k, t)].T @ c[mode(l, t)] @ c[mode(j, s)]
    return H


def sector_indices(mode_count: int, n: int, ms2: int) -> np.ndarray:
    idx = []
    for b in range(1 << mode_count):
        ups = sum((b >> m) & 1 for m in range(0, mode_count, 2))
        dns = sum((b >> m) & 1 for m in range(1, mode_count, 2))
        if ups + dns == n and ups - dns == ms2:
            idx.append(b)
    return np.array(idx)


def entropy(p) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > 1e-300]
    return float(-(p * np.log(p)).sum())


def dimer_oracle(t: float, u: float) -> dict[str, tuple[float, float, float]]:
    """Closed-form ``(I, E, C)`` of the Hubbard-dimer ground state per SSR mode.

    Derived by hand from the two-configuration Schmidt structure: the state
    splits into a singly-occupied singlet part (weight a^2) and an ionic
    part (weight b^2).
    """
    W = math.sqrt(u * u / 4 + 4 * t * t)
    a2 = (W + u / 2) / (2 * W)
    b2 = 1 - a2
    H = entropy([a2, b2])
    e_none = LN2 + H
    c_none = H + CLASSICAL_CONST
    return {
        "none": (2 * e_none, e_none, c_none),
        "parity": (LN2 + e_none, LN2, c_none),
        "number": (a2 * LN2 + e_none, a2 * LN2, H + a2 / 2 * math.log(4 / 3) + b2 * LN2),
    }


def dimer_energy(t: float, u: float) -> float:
    return u / 2 - math.sqrt(u * u / 4 + 4 * t * t)


# two-orbital local structure: row 4a + b, local bit0 = up, bit1 = down
_LOC_N = np.array([0, 1, 1, 2])
_LOC_SZ = np.array([0, 1, -1, 0])
PAIR_N = (_LOC_N[:, None] + _LOC_N[None, :]).ravel()
PAIR_SZ = (_LOC_SZ[:, None] + _LOC_SZ[None, :]).ravel()
PAIR_CONFIGS = np.array([a | (b << 2) for a in range(4) for b in range(4)])


def random_masked_state(rng: np.random.Generator) -> np.ndarray:
    """Random two-orbital 16x16 state, block diagonal in global (N, 2S_z).

    Block weights are Dirichlet(1/2), each block a random-rank Wishart matrix,
    then mixed toward its diagonal by a uniform fraction. Rows are in the
    ``4a + b`` product order.
    """
    keys = sorted(set(zip(PAIR_N, PAIR_SZ)))
    rho = np.zeros((16, 16), complex)
    weights = rng.dirichlet(np.ones(len(keys)) * 0.5)
    mix = rng.uniform(0, 1)
    for w, key in zip(weights, keys):
        idx = np.flatnonzero((PAIR_N == key[0]) & (PAIR_SZ == key[1]))
        rank = rng.integers(1, len(idx) + 1)
        g = rng.standard_normal((len(idx), rank)) + 1j * rng.standard_normal((len(idx), rank))
        blk = g @ g.conj().T
        rho[np.ix_(idx, idx)] += w * blk / np.trace(blk).real
    rho = (1 - mix) * rho + mix * np.diag(np.diag(rho))
    return 0.5 * (rho + rho.conj().T)


def partial_transpose_min(rho: np.ndarray) -> float:
    """Smallest eigenvalue of the partial transpose on the second 4-dim factor."""
    r = rho.reshape(4, 4, 4, 4).transpose(0, 3, 2, 1).reshape(16, 16)
    return float(np.linalg.eigvalsh(r).min())


def random_sector_state(rng: np.random.Generator, mode_count: int, n: int, ms2: int) -> np.ndarray:
    """Dense 2^D complex vector supported on one (N, 2S_z) sector."""
    idx = sector_indices(mode_count, n, ms2)
    psi = np.zeros(1 << mode_count, dtype=complex)
    psi[idx] = rng.standard_normal(len(idx)) + 1j * rng.standard_normal(len(idx))
    return psi / np.linalg.norm(psi)


def block_reachability(T: np.ndarray, tol: float = 1e-14) -> np.ndarray:
    """Boolean matrix: orbitals i and j lie in the same connected block of T."""
    n = T.shape[0]
    reach = (np.abs(T) > tol) | np.eye(n, dtype=bool)
    for _ in range(n):
        reach = (reach.astype(int) @ reach.astype(int)) > 0
    return reach


def random_integral_arrays(rng: np.random.Generator, n: int):
    """Random real ``(h, (ij|kl), core)``; one draw per 8-fold permutation class."""
    h = rng.standard_normal((n, n))
    h = h + h.T
    g = np.zeros((n,) * 4)
    for idx in np.ndindex(*g.shape):
        i, j, k, l = idx
        images = ((i, j, k, l), (j, i, k, l), (i, j, l, k), (j, i, l, k),
                  (k, l, i, j), (l, k, i, j), (k, l, j, i), (l, k, j, i))
        if min(images) == idx:
            v = rng.standard_normal()
            for im in images:
                g[im] = v
    return h, g, float(rng.standard_normal())


def _annihilate(psi: np.ndarray, mode: int) -> np.ndarray:
    """``c_mode psi`` on a dense 2^D vector, same sign convention as jw_annihilators."""
    idx = np.arange(len(psi))
    occ = (idx >> mode) & 1 == 1
    below = idx & ((1 << mode) - 1)
    sign = 1 - 2 * (np.array([bin(b).count("1") for b in below]) & 1)
    out = np.zeros_like(psi)
    out[idx[occ] ^ (1 << mode)] = sign[occ] * psi[occ]
    return out


def _create(psi: np.ndarray, mode: int) -> np.ndarray:
    idx = np.arange(len(psi))
    empty = (idx >> mode) & 1 == 0
    below = idx & ((1 << mode) - 1)
    sign = 1 - 2 * (np.array([bin(b).count("1") for b in below]) & 1)
    out = np.zeros_like(psi)
    out[idx[empty] | (1 << mode)] = sign[empty] * psi[empty]
    return out


def brute_force_rdm_vector(psi: np.ndarray, kept) -> np.ndarray:
    """Same matrix as :func:`brute_force_rdm`, acting on the vector bit by bit.

    Needs only O(2^D) memory, so it reaches 12 modes.
    """
    idx = np.arange(len(psi))
    vacuum_kept = np.ones(len(psi), dtype=bool)
    for m in kept:
        vacuum_kept &= (idx >> m) & 1 == 0
    k = len(kept)

    def lower(x, v):  # F_x^+ v = c_{k_last} ... c_{k_0} v
        for p, m in enumerate(kept):
            if (x >> p) & 1:
                v = _annihilate(v, m)
        return v

    def raise_(y, v):  # F_y v = c+_{k_0} ... c+_{k_last} v
        for p in reversed(range(k)):
            if (y >> p) & 1:
                v = _create(v, kept[p])
        return v

    rho = np.zeros((1 << k, 1 << k), dtype=complex)
    for x in range(1 << k):
        fx = np.where(vacuum_kept, lower(x, psi), 0)
        for y in range(1 << k):
            rho[x, y] = np.vdot(psi, raise_(y, fx))
    return rho
