"""Superselection-rule projections onto fixed local parity or particle number."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rdm import DensityMatrix, _split_configs

SSR_MODES = ("none", "parity", "number")


@dataclass(frozen=True)
class Bipartition:
    """Split of a density matrix's modes into sides A and B (global mode indices)."""

    side_a_modes: tuple[int, ...]
    side_b_modes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "side_a_modes", tuple(int(m) for m in self.side_a_modes))
        object.__setattr__(self, "side_b_modes", tuple(int(m) for m in self.side_b_modes))
        if set(self.side_a_modes) & set(self.side_b_modes):
            raise ValueError("bipartition sides overlap")

    @classmethod
    def first_orbital(cls, rho: DensityMatrix) -> "Bipartition":
        """Orbital made of the first two modes of ``rho`` against the rest."""
        return cls(rho.modes[:2], rho.modes[2:])

    def check(self, rho: DensityMatrix):
        if sorted(self.side_a_modes + self.side_b_modes) != sorted(rho.modes):
            raise ValueError(f"bipartition {self} does not cover modes {rho.modes}")

    @property
    def local_dims(self) -> tuple[int, int]:
        return 1 << len(self.side_a_modes), 1 << len(self.side_b_modes)


def resolve_split(rho: DensityMatrix, split: Bipartition | None) -> Bipartition:
    split = split or Bipartition.first_orbital(rho)
    split.check(rho)
    return split


def local_labels(rho: DensityMatrix, split: Bipartition):
    """Local configurations ``(a, b)`` of every row (bit r <-> side mode r)."""
    lab, _, _ = _split_configs(rho.modes, rho.configs, split.side_a_modes + split.side_b_modes)
    n_a = len(split.side_a_modes)
    return lab & ((1 << n_a) - 1), lab >> n_a


def product_form(rho: DensityMatrix, split: Bipartition | None = None):
    """Matrix of ``rho`` on F_A (x) F_B, row index ``a * dim_B + b``.

    Side-A modes are moved in front of side-B modes with the fermionic
    reordering sign. Returns ``(matrix, dim_A, dim_B)``.
    """
    split = resolve_split(rho, split)
    lab, _, signs = _split_configs(rho.modes, rho.configs, split.side_a_modes + split.side_b_modes)
    n_a = len(split.side_a_modes)
    d_a, d_b = split.local_dims
    idx = (lab & ((1 << n_a) - 1)) * d_b + (lab >> n_a)
    out = np.zeros((d_a * d_b, d_a * d_b), dtype=complex)
    out[np.ix_(idx, idx)] = rho.matrix * np.outer(signs, signs)
    return out, d_a, d_b


def from_product_form(matrix: np.ndarray, modes, split: Bipartition) -> DensityMatrix:
    """Inverse of :func:`product_form` onto all configurations of ``modes``."""
    modes = tuple(modes)
    configs = np.arange(1 << len(modes))
    lab, _, signs = _split_configs(modes, configs, split.side_a_modes + split.side_b_modes)
    n_a = len(split.side_a_modes)
    d_b = 1 << len(split.side_b_modes)
    idx = (lab & ((1 << n_a) - 1)) * d_b + (lab >> n_a)
    out = matrix[np.ix_(idx, idx)] * np.outer(signs, signs)
    return DensityMatrix(modes, configs, 0.5 * (out + out.conj().T))


def _popcounts(labels):
    return np.array([bin(int(x)).count("1") for x in labels])


@dataclass(frozen=True)
class SectorProjector:
    """Block structure of a locally conserved quantity (``parity`` or ``number``)."""

    quantity: str

    def __post_init__(self):
        if self.quantity not in ("parity", "number"):
            raise ValueError(f"unknown conserved quantity {self.quantity!r}")

    def charges(self, rho: DensityMatrix, split: Bipartition):
        a, b = local_labels(rho, split)
        qa, qb = _popcounts(a), _popcounts(b)
        if self.quantity == "parity":
            qa, qb = qa % 2, qb % 2
        return qa, qb

    def mask(self, rho: DensityMatrix, split: Bipartition) -> np.ndarray:
        qa, qb = self.charges(rho, split)
        return (qa[:, None] == qa[None, :]) & (qb[:, None] == qb[None, :])

    def apply(self, rho: DensityMatrix, split: Bipartition | None = None) -> DensityMatrix:
        split = resolve_split(rho, split)
        keep = self.mask(rho, split)
        return DensityMatrix(rho.modes, rho.configs, np.where(keep, rho.matrix, 0.0))


def project_parity(rho: DensityMatrix, split: Bipartition | None = None) -> DensityMatrix:
    """Remove coherences between different local parity sectors."""
    return SectorProjector("parity").apply(rho, split)


def project_number(rho: DensityMatrix, split: Bipartition | None = None) -> DensityMatrix:
    """Remove coherences between different local particle-number sectors."""
    return SectorProjector("number").apply(rho, split)


def project(rho: DensityMatrix, ssr_mode: str, split: Bipartition | None = None) -> DensityMatrix:
    if ssr_mode == "none":
        return rho
    if ssr_mode == "parity":
        return project_parity(rho, split)
    if ssr_mode == "number":
        return project_number(rho, split)
    raise ValueError(f"unknown SSR mode {ssr_mode!r}; expected one of {SSR_MODES}")
