"""Closest separable state under the quantum relative entropy.

Conditional gradient (pairwise Frank-Wolfe) over explicit ensembles of
product states. Every iterate is a mixture of product states, so the
distance it certifies is an upper bound on the relative entropy of
entanglement. Atoms are averaged over the local U(1)/Z2 symmetries of the
input (an entry mask), which keeps them separable.

Each minimization alternates short Frank-Wolfe bursts with a joint L-BFGS
polish of all atoms and weights. Two phases run on that machinery:

1. minimize ``F(s) = S(rho || s)``, giving the distance ``E``;
2. minimize ``F(s) + mu * G(s)`` with ``G(s) = S(s || rho_A (x) rho_B)``.
   The minimizer is unique and, as ``mu -> 0``, tends to the separable
   state of smallest ``G`` among those attaining ``E``. ``mu`` is halved
   until three consecutive points show either a settled penalty or the
   linear-in-mu behaviour of a smooth face, which is then extrapolated
   (second-order Richardson) to ``mu = 0``.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq, minimize

log = logging.getLogger(__name__)

DEFAULT_SEED = 0xC0FFEE
EIG_FLOOR = 1e-15
SUPPORT_TOL = 1e-13


@dataclass(frozen=True)
class OptimizerOptions:
    """Stopping rules and search effort of :func:`optimize_closest_separable`."""

    improvement_tol: float = 1e-9
    patience: int = 50
    gap_tol: float = 1e-12
    max_iter: int = 3000
    multistarts: int = 32
    warm_starts: int = 8
    max_atoms: int = 48
    polish_iter: int = 2000
    lmo_sweeps: int = 30
    corrective_steps: int = 2
    rounds: int = 60
    round_iter: int = 5
    round_tol: float = 1e-11
    tiebreak: bool = True
    tiebreak_mu: float = 5e-3
    tiebreak_mu_min: float = 1e-7
    flat_tol: float = 1e-6
    face_tol: float = 1e-8
    seed: int = DEFAULT_SEED


@dataclass(eq=False)
class Ensemble:
    """Weighted product states; ``a[k] (x) b[k]`` with weight ``w[k]``."""

    weights: list[float] = field(default_factory=list)
    a: list[np.ndarray] = field(default_factory=list)
    b: list[np.ndarray] = field(default_factory=list)

    def __len__(self):
        return len(self.weights)


@dataclass(eq=False)
class OptimizerResult:
    sigma: np.ndarray
    distance: float
    classical: float
    ensemble: Ensemble
    converged: bool
    residual: float
    iterations: int
    certified_separable: bool = False
    tiebreak: str = "none"


# ---------------------------------------------------------------- linear algebra


def partial_traces(rho: np.ndarray, d_a: int, d_b: int):
    r4 = rho.reshape(d_a, d_b, d_a, d_b)
    return np.einsum("ijkj->ik", r4), np.einsum("ijil->jl", r4)


def entropy_of_spectrum(evals) -> float:
    p = np.asarray(evals, dtype=float)
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def hermitian_log(m: np.ndarray, floor: float = EIG_FLOOR) -> np.ndarray:
    lam, u = np.linalg.eigh(m)
    return (u * np.log(np.clip(lam, floor, None))) @ u.conj().T


def partial_transpose(rho: np.ndarray, d_a: int, d_b: int) -> np.ndarray:
    """Transpose of side B in the product basis."""
    return rho.reshape(d_a, d_b, d_a, d_b).transpose(0, 3, 2, 1).reshape(d_a * d_b, d_a * d_b)


def _log_divided_differences(lam: np.ndarray) -> np.ndarray:
    li, lj = lam[:, None], lam[None, :]
    logs = np.log(lam)
    diff = li - lj
    close = np.abs(diff) <= 1e-10 * np.maximum(li, lj)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (logs[:, None] - logs[None, :]) / diff
    mean = 0.5 * (li + lj)
    return np.where(close, 1.0 / np.broadcast_to(mean, out.shape), out)


class _Objective:
    """``S(rho||s) + mu * S(s||tau)`` and its gradient on the compressed space."""

    def __init__(self, rho, tau_log, mask, mu, eig_floor):
        self.rho = rho
        self.tau_log = tau_log
        self.mask = mask
        self.mu = mu
        self.floor = eig_floor
        self.rho_term = -entropy_of_spectrum(np.linalg.eigvalsh(rho))

    def _eig(self, sigma):
        lam, u = np.linalg.eigh(sigma)
        return np.clip(lam, self.floor, None), u

    def parts(self, sigma):
        lam, u = self._eig(sigma)
        rho_u = u.conj().T @ self.rho @ u
        f = self.rho_term - float(np.real(np.sum(np.diag(rho_u) * np.log(lam))))
        g = 0.0
        if self.mu:
            g = float(np.sum(lam * np.log(lam)) - np.real(np.sum(sigma * self.tau_log.T)))
        return f, g

    def value(self, sigma) -> float:
        f, g = self.parts(sigma)
        return f + self.mu * g

    def slope(self, sigma, direction) -> float:
        """Directional derivative along ``direction``."""
        lam, u = self._eig(sigma)
        rho_u = u.conj().T @ self.rho @ u
        d_u = u.conj().T @ direction @ u
        out = -np.real(np.sum(_log_divided_differences(lam) * rho_u * d_u.T))
        if self.mu:
            out += self.mu * (np.real(np.diag(d_u)) @ np.log(lam) - np.real(np.sum(self.tau_log * direction.T)))
        return float(out)

    def gradient(self, sigma) -> np.ndarray:
        return self.value_and_gradient(sigma)[1]

    def value_and_gradient(self, sigma):
        """Both at the cost of one eigendecomposition."""
        lam, u = self._eig(sigma)
        rho_u = u.conj().T @ self.rho @ u
        log_lam = np.log(lam)
        value = self.rho_term - float(np.real(np.sum(np.diag(rho_u) * log_lam)))
        if self.mu:
            value += self.mu * float(np.sum(lam * log_lam) - np.real(np.sum(sigma * self.tau_log.T)))
        grad = -(u @ (_log_divided_differences(lam) * rho_u) @ u.conj().T)
        if self.mu:
            grad = grad + self.mu * ((u * np.log(lam)) @ u.conj().T - self.tau_log)
        grad = 0.5 * (grad + grad.conj().T)
        return value, np.where(self.mask, grad, 0.0)


# ---------------------------------------------------------------- linear minimization


def _normalize_rows(x):
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def _contract_b(m4, b):
    """``<b|m|b>`` for each row of ``b``; shape ``(n, d_a, d_a)``."""
    d_a, d_b = m4.shape[0], m4.shape[1]
    mm = m4.transpose(0, 2, 1, 3).reshape(d_a * d_a, d_b * d_b)
    bb = (b.conj()[:, :, None] * b[:, None, :]).reshape(len(b), -1)
    return (bb @ mm.T).reshape(len(b), d_a, d_a)


def _contract_a(m4, a):
    d_a, d_b = m4.shape[0], m4.shape[1]
    mm = m4.transpose(1, 3, 0, 2).reshape(d_b * d_b, d_a * d_a)
    aa = (a.conj()[:, :, None] * a[:, None, :]).reshape(len(a), -1)
    return (aa @ mm.T).reshape(len(a), d_b, d_b)


def best_product_state(m: np.ndarray, d_a: int, d_b: int, rng, starts: int, sweeps: int,
                       warm_b=None):
    """Approximately maximize ``<a b| m |a b>`` over unit product vectors.

    Alternating top-eigenvector updates from ``starts`` random seeds plus any
    warm starts, run as one batch.
    """
    m4 = m.reshape(d_a, d_b, d_a, d_b)
    b = rng.standard_normal((starts, d_b)) + 1j * rng.standard_normal((starts, d_b))
    if warm_b is not None and len(warm_b):
        b = np.vstack([np.asarray(warm_b), b])
    b = _normalize_rows(b)
    prev = None
    for _ in range(sweeps):
        _, va = np.linalg.eigh(_contract_b(m4, b))
        a = va[:, :, -1]
        wb, vb = np.linalg.eigh(_contract_a(m4, a))
        b = vb[:, :, -1]
        vals = wb[:, -1]
        if prev is not None and np.max(np.abs(vals - prev)) < 1e-14:
            break
        prev = vals
    k = int(np.argmax(vals))
    return float(vals[k]), a[k], b[k]


# ---------------------------------------------------------------- conditional gradient


def _atom_matrix(a, b, mask):
    v = np.kron(a, b)
    return np.where(mask, np.outer(v, v.conj()), 0.0)


class _ActiveSet:
    def __init__(self, mask):
        self.mask = mask
        self.w: list[float] = []
        self.a: list[np.ndarray] = []
        self.b: list[np.ndarray] = []
        self.mats: list[np.ndarray] = []

    def add(self, a, b, weight=0.0) -> int:
        for k, (ak, bk) in enumerate(zip(self.a, self.b)):
            if abs(np.vdot(ak, a) * np.vdot(bk, b)) ** 2 > 1 - 1e-13:
                self.w[k] += weight
                return k
        self.a.append(a)
        self.b.append(b)
        self.w.append(weight)
        self.mats.append(_atom_matrix(a, b, self.mask))
        return len(self.w) - 1

    def sigma(self):
        return sum(w * m for w, m in zip(self.w, self.mats))

    def prune(self, tol=1e-12, max_atoms=None):
        keep = [k for k, w in enumerate(self.w) if w > tol]
        if max_atoms is not None and len(keep) > max_atoms:
            keep = sorted(sorted(keep, key=lambda k: self.w[k])[-max_atoms:])
        total = sum(self.w[k] for k in keep)
        self.w = [self.w[k] / total for k in keep]
        self.a = [self.a[k] for k in keep]
        self.b = [self.b[k] for k in keep]
        self.mats = [self.mats[k] for k in keep]

    def copy(self):
        new = _ActiveSet(self.mask)
        new.w, new.a, new.b, new.mats = list(self.w), list(self.a), list(self.b), list(self.mats)
        return new


def _line_search(obj: _Objective, sigma, direction, gmax):
    """Exact step along a segment; the objective is convex in the step length."""
    if gmax <= 0:
        return 0.0
    if obj.slope(sigma, direction) >= 0:
        return 0.0
    end = sigma + gmax * direction
    if obj.slope(end, direction) <= 0:
        return gmax
    return float(brentq(lambda g: obj.slope(sigma + g * direction, direction), 0.0, gmax,
                        xtol=1e-15, rtol=1e-13, maxiter=100))


def _pairwise_step(obj, active: _ActiveSet, sigma, toward: int, away: int):
    if toward == away:
        return sigma
    direction = active.mats[toward] - active.mats[away]
    g = _line_search(obj, sigma, direction, active.w[away])
    if g > 0:
        active.w[toward] += g
        active.w[away] -= g
        if active.w[away] < 1e-15:
            active.w[away] = 0.0
        sigma = active.sigma()
    return sigma


def _frank_wolfe(obj: _Objective, active: _ActiveSet, d_a, d_b, opts: OptimizerOptions, rng):
    sigma = active.sigma()
    value = obj.value(sigma)
    stall = 0
    gap = math.inf
    it = 0
    for it in range(1, opts.max_iter + 1):
        grad = obj.gradient(sigma)
        heavy = np.argsort(active.w)[::-1][: opts.warm_starts]
        best, a, b = best_product_state(
            -grad, d_a, d_b, rng, opts.multistarts, opts.lmo_sweeps, warm_b=[active.b[k] for k in heavy]
        )
        scores = np.array([np.real(np.sum(grad * m.T)) for m in active.mats])
        weights = np.array(active.w)
        gap = float(weights @ scores + best)
        if gap < opts.gap_tol:
            break
        new = active.add(a, b)
        scores = np.append(scores, -best) if new == len(scores) else scores
        live = [k for k, w in enumerate(active.w) if w > 0]
        away = max(live, key=lambda k: scores[k])
        sigma = _pairwise_step(obj, active, sigma, new, away)
        for _ in range(opts.corrective_steps):
            grad = obj.gradient(sigma)
            scores = np.array([np.real(np.sum(grad * m.T)) for m in active.mats])
            live = [k for k, w in enumerate(active.w) if w > 0]
            away = max(live, key=lambda k: scores[k])
            toward = min(range(len(scores)), key=lambda k: scores[k])
            sigma = _pairwise_step(obj, active, sigma, toward, away)
        active.prune()
        sigma = active.sigma()
        new_value = obj.value(sigma)
        improvement = value - new_value
        value = new_value
        stall = stall + 1 if improvement < opts.improvement_tol else 0
        if stall >= opts.patience:
            break
    converged = gap < opts.gap_tol or stall >= opts.patience
    return sigma, value, gap, it, converged


def _polish(obj: _Objective, active: _ActiveSet, d_a, d_b, max_iter=2000):
    """Joint L-BFGS refinement of all atoms and weights (softmax weights)."""
    k = len(active.w)
    if k == 0:
        return active
    mask = active.mask
    na, nb = 2 * d_a, 2 * d_b
    width = na + nb + 1

    def unpack(x):
        x = x.reshape(k, width)
        a = x[:, :d_a] + 1j * x[:, d_a:na]
        b = x[:, na:na + d_b] + 1j * x[:, na + d_b:na + nb]
        theta = x[:, -1]
        w = np.exp(theta - theta.max())
        return a, b, w / w.sum()

    def fun(x):
        a, b, w = unpack(x)
        an = a / np.linalg.norm(a, axis=1, keepdims=True)
        bn = b / np.linalg.norm(b, axis=1, keepdims=True)
        vecs = np.einsum("ni,nj->nij", an, bn).reshape(k, -1)
        sigma = np.where(mask, (vecs.T * w) @ vecs.conj(), 0.0)
        value, g = obj.value_and_gradient(sigma)
        g4 = g.reshape(d_a, d_b, d_a, d_b)
        ma = _contract_b(g4, bn)
        mb = _contract_a(g4, an)
        s = np.real(np.einsum("ni,nij,nj->n", an.conj(), ma, an))
        ga = (np.einsum("nij,nj->ni", ma, an) - s[:, None] * an) / np.linalg.norm(a, axis=1, keepdims=True)
        gb = (np.einsum("nij,nj->ni", mb, bn) - s[:, None] * bn) / np.linalg.norm(b, axis=1, keepdims=True)
        ga *= 2 * w[:, None]
        gb *= 2 * w[:, None]
        gt = w * (s - w @ s)
        grad = np.concatenate([ga.real, ga.imag, gb.real, gb.imag, gt[:, None]], axis=1)
        return value, grad.ravel()

    theta = np.log(np.clip(active.w, 1e-300, None))
    a = np.array(active.a)
    b = np.array(active.b)
    x0 = np.concatenate([a.real, a.imag, b.real, b.imag, theta[:, None]], axis=1).ravel()
    res = minimize(fun, x0, jac=True, method="L-BFGS-B",
                   options={"maxiter": max_iter, "ftol": 1e-16, "gtol": 1e-12})
    if res.fun > obj.value(active.sigma()):
        return active
    a, b, w = unpack(res.x)
    out = _ActiveSet(mask)
    for wk, ak, bk in zip(w, a, b):
        out.add(ak / np.linalg.norm(ak), bk / np.linalg.norm(bk), float(wk))
    out.prune()
    return out


def _minimize(obj: _Objective, active: _ActiveSet, d_a, d_b, opts: OptimizerOptions, rng, windowed=False):
    """Frank-Wolfe bursts alternated with joint polishing until a round stops helping.

    With ``windowed`` the run also stops once every round covering the last
    ``patience`` Frank-Wolfe iterations gained less than ``improvement_tol``
    per iteration.
    """
    burst = replace(opts, max_iter=opts.round_iter)
    value = obj.value(active.sigma())
    history = [value]
    window = max(1, math.ceil(opts.patience / opts.round_iter))
    iterations = 0
    gap = math.inf
    done = False
    for _ in range(opts.rounds):
        _, _, gap, it, _ = _frank_wolfe(obj, active, d_a, d_b, burst, rng)
        iterations += it
        active.prune(max_atoms=opts.max_atoms)
        active = _polish(obj, active, d_a, d_b, opts.polish_iter)
        new_value = obj.value(active.sigma())
        history.append(new_value)
        done = value - new_value < opts.round_tol or gap < opts.gap_tol
        if windowed and len(history) > window:
            gains = -np.diff(history[-window - 1:])
            done = done or bool(np.all(gains < opts.improvement_tol * opts.round_iter))
        value = new_value
        if done:
            break
    return active, value, gap, iterations, done


# ---------------------------------------------------------------- compression


def _local_isometry(rho_local: np.ndarray, labels: np.ndarray):
    """Orthonormal basis of the support of ``rho_local`` respecting ``labels`` blocks.

    ``labels`` has one row of conserved local charges per basis state.
    Returns ``(V, new_labels)``.
    """
    d = rho_local.shape[0]
    cols, new_labels = [], []
    keys = [tuple(row) for row in labels]
    for key in sorted(set(keys)):
        idx = [i for i in range(d) if keys[i] == key]
        block = rho_local[np.ix_(idx, idx)]
        lam, u = np.linalg.eigh(block)
        for val, vec in zip(lam, u.T):
            if val > SUPPORT_TOL:
                col = np.zeros(d, dtype=complex)
                col[idx] = vec
                cols.append(col)
                new_labels.append(key)
    return np.column_stack(cols), np.array(new_labels).reshape(len(cols), -1)


def _charge_mask(labels_a, labels_b, charges):
    """Entries allowed by every conserved charge ``q_A + q_B`` (mod ``modulus`` if set)."""
    d_a, d_b = len(labels_a), len(labels_b)
    mask = np.ones((d_a * d_b, d_a * d_b), dtype=bool)
    for c, modulus in enumerate(charges):
        q = (labels_a[:, c][:, None] + labels_b[:, c][None, :]).reshape(-1)
        if modulus:
            q = q % modulus
        mask &= q[:, None] == q[None, :]
    return mask


def _twirl(a, b, labels_a, labels_b, charges):
    """Product states whose mixture is the charge-masked ``|a><a| (x) |b><b|``.

    Averaging ``e^{i theta q_A} a (x) e^{i theta q_B} b`` over ``M`` equally
    spaced phases removes every coherence between total charges that differ
    by less than ``M``, so a grid wider than the charge span is exact.
    """
    grids = []
    for c, modulus in enumerate(charges):
        qa, qb = labels_a[:, c], labels_b[:, c]
        sa, sb = np.unique(qa[np.abs(a) > 0]), np.unique(qb[np.abs(b) > 0])
        if len(sa) <= 1 and len(sb) <= 1:
            continue
        m = modulus or int(np.ptp(qa) + np.ptp(qb)) + 1
        grids.append((qa, qb, m))
    if not grids:
        return [(1.0, a, b)]
    weight = 1.0 / math.prod(m for _, _, m in grids)
    out = []
    for ks in itertools.product(*(range(m) for _, _, m in grids)):
        pa = sum(2 * np.pi * k / m * qa for k, (qa, _, m) in zip(ks, grids))
        pb = sum(2 * np.pi * k / m * qb for k, (_, qb, m) in zip(ks, grids))
        out.append((weight, np.exp(1j * pa) * a, np.exp(1j * pb) * b))
    return out


# ---------------------------------------------------------------- driver


def _tiebreak_regime(excess, penalties, opts: OptimizerOptions) -> str:
    """Classify three consecutive points ``mu, mu/2, mu/4`` of the penalty path.

    ``smooth``: the penalty moves linearly in mu and leaving the face costs
    O(mu^2), so the penalty can be extrapolated to mu -> 0. ``flat``: the
    penalty has settled to within ``flat_tol``. Anything else is
    ``irregular``.
    """
    steps = np.diff(penalties)
    smooth = all(lo != 0 and 1.5 <= hi / lo <= 2.7 for hi, lo in zip(steps, steps[1:])) and all(
        hi <= opts.face_tol or (lo > 0 and 3.0 <= hi / lo <= 5.3) for hi, lo in zip(excess, excess[1:])
    )
    if smooth:
        return "smooth"
    if np.max(np.abs(steps)) <= opts.flat_tol:
        return "flat"
    return "irregular"


def _start_from_product(active: _ActiveSet, ua, la, ub, lb, scale=1.0):
    for pa, va in zip(la, ua.T):
        for pb, vb in zip(lb, ub.T):
            if pa * pb > 0:
                active.add(va, vb, scale * pa * pb)


def optimize_closest_separable(
    rho: np.ndarray,
    d_a: int,
    d_b: int,
    *,
    labels_a: np.ndarray | None = None,
    labels_b: np.ndarray | None = None,
    charges: tuple = (),
    options: OptimizerOptions | None = None,
    rng: np.random.Generator | None = None,
) -> OptimizerResult:
    """Closest separable state to ``rho`` on ``C^d_a (x) C^d_b``.

    ``labels_a``/``labels_b`` give, per local basis state, the values of the
    conserved local charges; ``charges`` lists each charge's modulus (0 for
    U(1), 2 for parity). ``rho`` must commute with every ``q_A + q_B``.
    """
    opts = options or OptimizerOptions()
    rng = rng or np.random.default_rng(opts.seed)
    rho = 0.5 * (rho + rho.conj().T)
    if labels_a is None:
        labels_a = np.zeros((d_a, 0), dtype=int)
        labels_b = np.zeros((d_b, 0), dtype=int)
    rho_a, rho_b = partial_traces(rho, d_a, d_b)
    va, la_lab = _local_isometry(rho_a, labels_a)
    vb, lb_lab = _local_isometry(rho_b, labels_b)
    v = np.kron(va, vb)
    rc = v.conj().T @ rho @ v
    lost = 1 - np.trace(rc).real
    if lost > 1e-9:
        raise ValueError(f"state leaks {lost:.2e} of weight outside its local supports")
    rc = 0.5 * (rc + rc.conj().T) / np.trace(rc).real
    ca, cb = va.shape[1], vb.shape[1]
    mask = _charge_mask(la_lab, lb_lab, charges)
    rc = np.where(mask, rc, 0.0)

    ra, rb = partial_traces(rc, ca, cb)
    pa, ua = np.linalg.eigh(ra)
    pb, ub = np.linalg.eigh(rb)
    pa, pb = np.clip(pa, 0, None), np.clip(pb, 0, None)
    tau_log = np.kron(hermitian_log(ra), np.eye(cb)) + np.kron(np.eye(ca), hermitian_log(rb))
    s_rho = entropy_of_spectrum(np.linalg.eigvalsh(rc))
    mutual = entropy_of_spectrum(pa) + entropy_of_spectrum(pb) - s_rho

    def lift(sig):
        return v @ sig @ v.conj().T

    def ensemble_of(active):
        out = Ensemble()
        for w, x, y in zip(active.w, active.a, active.b):
            for p, xs, ys in _twirl(x, y, la_lab, lb_lab, charges):
                out.weights.append(w * p)
                out.a.append(va @ xs)
                out.b.append(vb @ ys)
        return out

    if mutual < 1e-12:
        act = _ActiveSet(mask)
        _start_from_product(act, ua, pa, ub, pb)
        return OptimizerResult(lift(rc), 0.0, 0.0, ensemble_of(act), True, 0.0, 0, True, "product")
    phase1 = _Objective(rc, tau_log, mask, 0.0, EIG_FLOOR)
    active = _ActiveSet(mask)
    _start_from_product(active, ua, pa, ub, pb)
    active, e1, gap1, iters, conv1 = _minimize(phase1, active, ca, cb, opts, rng, windowed=True)
    if ca * cb <= 6 and np.linalg.eigvalsh(partial_transpose(rc, ca, cb)).min() >= -1e-12:
        # Peres-Horodecki: PPT is sufficient for separability in 2x2 and 2x3,
        # so rho itself is the optimum; the ensemble approximates it.
        return OptimizerResult(lift(rc), 0.0, max(mutual, 0.0), ensemble_of(active), True,
                               float(gap1), iters, True, "ppt")
    sigma1 = active.sigma()
    g1 = _Objective(rc, tau_log, mask, 1.0, EIG_FLOOR).parts(sigma1)[1]
    if not opts.tiebreak:
        return OptimizerResult(lift(sigma1), max(e1, 0.0), max(g1, 0.0), ensemble_of(active),
                               bool(conv1), float(gap1), iters, False, "skipped")

    # Tie-break on the optimal face. Keep a sliver of rho_A (x) rho_B so the
    # penalty stays finite, then follow mu -> 0.
    warm = active.copy()
    warm.w = [w * (1 - 1e-6) for w in warm.w]
    _start_from_product(warm, ua, pa, ub, pb, scale=1e-6)
    path = []  # (objective, penalty, sigma, active set)
    regime = "irregular"
    mu = opts.tiebreak_mu
    while mu >= opts.tiebreak_mu_min:
        obj = _Objective(rc, tau_log, mask, mu, EIG_FLOOR)
        # the penalty is resolved to about round_tol / mu, so tighten with mu
        tight = replace(opts, round_tol=max(opts.round_tol * mu / opts.tiebreak_mu, 1e-15))
        warm, _, _, it, conv2 = _minimize(obj, warm, ca, cb, tight, rng)
        iters += it
        f, g = obj.parts(warm.sigma())
        e1 = min(e1, f)
        path.append((f, g, warm.sigma(), warm.copy()))
        if len(path) >= 3:
            tail = path[-3:]
            regime = _tiebreak_regime([max(p[0] - e1, 0.0) for p in tail], [p[1] for p in tail], opts)
            if regime != "irregular":
                break
        mu /= 2
    penalties = [p[1] for p in path[-3:]]
    if regime == "smooth":
        first = [2 * penalties[1] - penalties[0], 2 * penalties[2] - penalties[1]]
        classical = min((4 * first[1] - first[0]) / 3, g1)
        sigma_star, star_set = path[-1][2], path[-1][3]
    elif regime == "flat":
        classical = min(penalties[-1], g1)
        sigma_star, star_set = path[-1][2], path[-1][3]
    else:
        # no usable limit; fall back to the end of the path if it still ties
        classical, sigma_star, star_set = g1, sigma1, active
        f, g, sig, act = path[-1]
        if f - e1 <= opts.face_tol and g < classical:
            classical, sigma_star, star_set = g, sig, act
    distance = e1
    converged = conv1 and conv2
    return OptimizerResult(
        lift(sigma_star),
        max(distance, 0.0),
        max(classical, 0.0),
        ensemble_of(star_set),
        bool(converged),
        float(gap1),
        iters,
        False,
        regime,
    )
