"""Occupation-number representation of a fermionic Fock space.

Spin-orbital modes are numbered orbital-major with spin-up before spin-down,
so orbital ``j`` (0-based) owns modes ``2j`` (up) and ``2j + 1`` (down).
Mode ``k`` is stored in bit ``k`` of an integer bit pattern, and a
configuration ``|n_1 ... n_D>`` is the ordered creation string
``(f_1^+)^{n_1} ... (f_D^+)^{n_D} |vac>``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

MAX_MODES = 64
_MAX_UNCONSTRAINED = 24


class EmptySectorError(ValueError):
    """Raised when a sector contains no configuration."""


def popcount(x: int) -> int:
    return bin(x).count("1")


@dataclass(frozen=True)
class OccupationConfig:
    """Occupation flags over ``mode_count`` spin-orbital modes."""

    bits: int
    mode_count: int

    def __post_init__(self):
        _check_mode_count(self.mode_count)
        if self.bits < 0 or self.bits >> self.mode_count:
            raise ValueError(f"bit pattern {self.bits:#x} does not fit in {self.mode_count} modes")

    @classmethod
    def from_occupations(cls, occupations) -> "OccupationConfig":
        """Build from a sequence ``n_1 .. n_D`` of 0/1 flags."""
        occ = [int(n) for n in occupations]
        if any(n not in (0, 1) for n in occ):
            raise ValueError("occupations must be 0 or 1")
        return cls(sum(n << k for k, n in enumerate(occ)), len(occ))

    @classmethod
    def vacuum(cls, mode_count: int) -> "OccupationConfig":
        return cls(0, mode_count)

    @property
    def occupations(self) -> tuple[int, ...]:
        return tuple((self.bits >> k) & 1 for k in range(self.mode_count))

    @property
    def particle_count(self) -> int:
        return popcount(self.bits)

    @property
    def twice_sz(self) -> int:
        return config_twice_sz(self.bits)

    def __str__(self):
        return "|" + "".join(str(n) for n in self.occupations) + ">"


def _check_mode_count(mode_count: int):
    if mode_count < 2 or mode_count % 2 or mode_count > MAX_MODES:
        raise ValueError(f"mode count must be even and in [2, {MAX_MODES}], got {mode_count}")


_UP_MASK = int("01" * (MAX_MODES // 2), 2)


def config_twice_sz(bits: int) -> int:
    """Twice the S_z eigenvalue: (#up - #down)."""
    up = popcount(bits & _UP_MASK)
    return 2 * up - popcount(bits)


def apply_creation(config: OccupationConfig, mode: int):
    """Apply ``f_mode^+``.

    Returns ``(new_config, phase)`` or ``None`` when the mode is already
    occupied.
    """
    if not 0 <= mode < config.mode_count:
        raise IndexError(f"mode {mode} out of range for {config.mode_count} modes")
    flag = 1 << mode
    if config.bits & flag:
        return None
    phase = -1 if popcount(config.bits & (flag - 1)) % 2 else 1
    return OccupationConfig(config.bits | flag, config.mode_count), phase


def apply_annihilation(config: OccupationConfig, mode: int):
    """Apply ``f_mode``; ``None`` when the mode is empty."""
    if not 0 <= mode < config.mode_count:
        raise IndexError(f"mode {mode} out of range for {config.mode_count} modes")
    flag = 1 << mode
    if not config.bits & flag:
        return None
    phase = -1 if popcount(config.bits & (flag - 1)) % 2 else 1
    return OccupationConfig(config.bits ^ flag, config.mode_count), phase


def create_bits(bits: int, mode: int):
    """Bit-level creation used in hot loops: ``(bits, phase)`` or ``None``."""
    flag = 1 << mode
    if bits & flag:
        return None
    return bits | flag, (-1 if popcount(bits & (flag - 1)) & 1 else 1)


def annihilate_bits(bits: int, mode: int):
    flag = 1 << mode
    if not bits & flag:
        return None
    return bits ^ flag, (-1 if popcount(bits & (flag - 1)) & 1 else 1)


@dataclass(frozen=True)
class SectorLabel:
    """Quantum numbers selecting a block of Fock space.

    ``None`` means unconstrained. The magnetization is S_z, a multiple of 1/2.
    """

    particle_count: int | None = None
    magnetization: float | Fraction | None = None
    parity: int | None = None

    def __post_init__(self):
        if self.particle_count is not None and self.particle_count < 0:
            raise ValueError("particle count must be non-negative")
        if self.magnetization is not None and (2 * Fraction(self.magnetization)).denominator != 1:
            raise ValueError(f"magnetization must be a multiple of 1/2, got {self.magnetization}")
        if self.parity is not None:
            if self.parity not in (0, 1):
                raise ValueError("parity must be 0 (even) or 1 (odd)")
            if self.particle_count is not None and self.particle_count % 2 != self.parity:
                raise ValueError("parity inconsistent with particle count")

    @property
    def twice_sz(self) -> int | None:
        if self.magnetization is None:
            return None
        return int(2 * Fraction(self.magnetization))

    @classmethod
    def from_ms2(cls, n: int | None, ms2: int | None) -> "SectorLabel":
        return cls(n, None if ms2 is None else Fraction(ms2, 2))

    def contains(self, bits: int) -> bool:
        n = popcount(bits)
        if self.particle_count is not None and n != self.particle_count:
            return False
        if self.parity is not None and n % 2 != self.parity:
            return False
        if self.twice_sz is not None and config_twice_sz(bits) != self.twice_sz:
            return False
        return True


@dataclass(frozen=True)
class FockBasis:
    """Configurations of one sector, in ascending bit-pattern order."""

    configs: tuple[int, ...]
    sector: SectorLabel
    mode_count: int
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {c: i for i, c in enumerate(self.configs)})

    def __len__(self):
        return len(self.configs)

    @property
    def dim(self) -> int:
        return len(self.configs)

    @property
    def orbital_count(self) -> int:
        return self.mode_count // 2

    def index(self, bits: int) -> int:
        return self._index[bits]

    def find(self, bits: int) -> int | None:
        return self._index.get(bits)

    def config(self, i: int) -> OccupationConfig:
        return OccupationConfig(self.configs[i], self.mode_count)

    def particle_numbers(self) -> np.ndarray:
        return np.array([popcount(c) for c in self.configs])

    def twice_sz(self) -> np.ndarray:
        return np.array([config_twice_sz(c) for c in self.configs])


def enumerate_sector_basis(mode_count: int, sector: SectorLabel | None = None) -> FockBasis:
    """All configurations of ``mode_count`` modes lying in ``sector``."""
    _check_mode_count(mode_count)
    sector = sector or SectorLabel()
    d = mode_count // 2
    n, ms2 = sector.particle_count, sector.twice_sz
    if n is not None and ms2 is not None:
        if (n + ms2) % 2:
            raise EmptySectorError(f"N={n} and 2M={ms2} have different parity")
        n_up, n_dn = (n + ms2) // 2, (n - ms2) // 2
        if not (0 <= n_up <= d and 0 <= n_dn <= d):
            raise EmptySectorError(f"no configuration with N={n}, 2M={ms2} in {mode_count} modes")
        ups = [sum(1 << (2 * o) for o in occ) for occ in itertools.combinations(range(d), n_up)]
        dns = [sum(1 << (2 * o + 1) for o in occ) for occ in itertools.combinations(range(d), n_dn)]
        configs = sorted(u | v for u in ups for v in dns)
    elif n is not None:
        if n > mode_count:
            raise EmptySectorError(f"N={n} exceeds {mode_count} modes")
        configs = sorted(
            sum(1 << k for k in occ) for occ in itertools.combinations(range(mode_count), n)
        )
        configs = [c for c in configs if sector.contains(c)]
    else:
        if mode_count > _MAX_UNCONSTRAINED:
            raise ValueError(f"refusing to enumerate 2^{mode_count} configurations")
        configs = [c for c in range(1 << mode_count) if sector.contains(c)]
    if not configs:
        raise EmptySectorError(f"sector {sector} is empty for {mode_count} modes")
    return FockBasis(tuple(configs), sector, mode_count)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized amplitudes over a Fock basis."""

    basis: FockBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.basis.dim,):
            raise ValueError(f"expected {self.basis.dim} amplitudes, got shape {amps.shape}")
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise ValueError("zero vector cannot be normalized")
        amps = amps / norm
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_configs(cls, basis: FockBasis, amplitudes: dict) -> "StateVector":
        """Build from ``{bits: amplitude}``; every key must lie in ``basis``."""
        amps = np.zeros(basis.dim, dtype=complex)
        for bits, value in amplitudes.items():
            amps[basis.index(bits)] += value
        return cls(basis, amps)

    @property
    def mode_count(self) -> int:
        return self.basis.mode_count

    def amplitude(self, bits: int) -> complex:
        i = self.basis.find(bits)
        return 0j if i is None else complex(self.amplitudes[i])

    def fix_phase(self) -> "StateVector":
        """Rotate the global phase so the first nonzero amplitude is real positive."""
        amps = self.amplitudes
        nz = np.flatnonzero(np.abs(amps) > 1e-12)
        if nz.size == 0:
            return self
        first = amps[nz[0]]
        return StateVector(self.basis, amps * (abs(first) / first))

    def overlap(self, other: "StateVector") -> complex:
        """``<self|other>``; bases may differ."""
        total = 0j
        for i, c in enumerate(other.basis.configs):
            total += np.conj(self.amplitude(c)) * other.amplitudes[i]
        return total


def creation_string_state(basis: FockBasis, terms) -> StateVector:
    """State from a sum of creation strings acting on the vacuum.

    ``terms`` is an iterable of ``(coefficient, modes)``; ``modes`` is the
    operator string written left to right, e.g. ``(0, 3)`` means
    ``f_0^+ f_3^+ |vac>``.
    """
    amps = {}
    for coeff, modes in terms:
        cfg = OccupationConfig.vacuum(basis.mode_count)
        phase = 1
        for m in reversed(modes):
            out = apply_creation(cfg, m)
            if out is None:
                break
            cfg, p = out
            phase *= p
        else:
            amps[cfg.bits] = amps.get(cfg.bits, 0) + coeff * phase
    return StateVector.from_configs(basis, amps)
