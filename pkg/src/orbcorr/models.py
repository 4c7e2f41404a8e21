"""Hamiltonians from integral files and built-in models, plus closed-form states.

Two-body integrals are kept in chemists' notation ``(ij|kl)``, as FCIDUMP
stores them. The electronic Hamiltonian is

    H = sum_{ij,s} T_ij c+_is c_js + sum_{ijkl,s,t} V_ijkl c+_is c+_jt c_kt c_ls

with ``V_ijkl = (il|jk) / 2``; see :meth:`IntegralSet.v_tensor`.
"""

from __future__ import annotations

import io
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .fock import (
    FockBasis,
    SectorLabel,
    StateVector,
    annihilate_bits,
    config_twice_sz,
    create_bits,
    creation_string_state,
    enumerate_sector_basis,
    popcount,
)

SYMMETRY_TOL = 1e-12


class FCIDumpParseError(ValueError):
    """Malformed FCIDUMP input. ``line`` is 1-based."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(eq=False)
class IntegralSet:
    """Spin-restricted one- and two-electron integrals of an active space."""

    one_body: np.ndarray
    two_body: np.ndarray
    core_energy: float = 0.0
    electron_count: int = 0
    ms2: int = 0
    orbsym: tuple[int, ...] = ()
    isym: int | None = None

    def __post_init__(self):
        self.one_body = np.asarray(self.one_body, dtype=float)
        self.two_body = np.asarray(self.two_body, dtype=float)
        d = self.one_body.shape[0]
        if self.one_body.shape != (d, d) or self.two_body.shape != (d,) * 4:
            raise ValueError("integral shapes are inconsistent")
        if not np.allclose(self.one_body, self.one_body.T, rtol=0, atol=SYMMETRY_TOL):
            raise ValueError("one-body integrals are not symmetric")
        for perm in _EIGHTFOLD[1:]:
            if not np.allclose(self.two_body, self.two_body.transpose(perm), rtol=0, atol=SYMMETRY_TOL):
                raise ValueError("two-body integrals break the 8-fold permutation symmetry")

    @property
    def orbital_count(self) -> int:
        return self.one_body.shape[0]

    def v_tensor(self) -> np.ndarray:
        """Coefficients ``V_ijkl`` of ``c+_is c+_jt c_kt c_ls``."""
        return 0.5 * self.two_body.transpose(0, 2, 3, 1)

    def without_interaction(self) -> "IntegralSet":
        return IntegralSet(
            self.one_body.copy(),
            np.zeros_like(self.two_body),
            self.core_energy,
            self.electron_count,
            self.ms2,
            self.orbsym,
            self.isym,
        )

    def sector(self) -> SectorLabel:
        return SectorLabel.from_ms2(self.electron_count, self.ms2)


# index permutations (as transpose axes) leaving (ij|kl) invariant for real orbitals
_EIGHTFOLD = [
    (0, 1, 2, 3),
    (1, 0, 2, 3),
    (0, 1, 3, 2),
    (1, 0, 3, 2),
    (2, 3, 0, 1),
    (3, 2, 0, 1),
    (2, 3, 1, 0),
    (3, 2, 1, 0),
]


def _eightfold_images(i, j, k, l):
    return {(i, j, k, l), (j, i, k, l), (i, j, l, k), (j, i, l, k),
            (k, l, i, j), (l, k, i, j), (k, l, j, i), (l, k, j, i)}


_HEADER_END = re.compile(r"(&END|/)", re.IGNORECASE)
_KEYVAL = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)\s*=\s*([^=]*?)(?=(?:[A-Za-z_][A-Za-z0-9_]*\s*=)|$)")


def _parse_header(text: str, first_line: int) -> dict:
    body = text.strip()
    if not body.upper().startswith("&FCI"):
        raise FCIDumpParseError("header must start with &FCI", first_line)
    body = body[4:]
    fields = {}
    for key, raw in _KEYVAL.findall(body.replace("\n", " ")):
        values = [v for v in re.split(r"[,\s]+", raw.strip()) if v]
        fields[key.upper()] = values
    return fields


def _header_int(fields, key, line, required=True):
    if key not in fields:
        if required:
            raise FCIDumpParseError(f"header lacks {key}=", line)
        return None
    vals = fields[key]
    try:
        if len(vals) != 1:
            raise ValueError
        return int(vals[0])
    except ValueError:
        raise FCIDumpParseError(f"bad value for {key}: {' '.join(vals)!r}", line) from None


def parse_fcidump(stream) -> IntegralSet:
    """Read an FCIDUMP from a text stream, a path, or a string of file content."""
    if isinstance(stream, Path):
        with open(stream) as fh:
            return parse_fcidump(fh)
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    lines = stream.read().splitlines()

    header_lines = []
    body_start = None
    for n, line in enumerate(lines):
        m = _HEADER_END.search(line)
        if m:
            header_lines.append(line[: m.start()])
            body_start = n + 1
            break
        header_lines.append(line)
    if body_start is None:
        raise FCIDumpParseError("header is not terminated by &END or /", len(lines) or 1)
    fields = _parse_header("\n".join(header_lines), 1)
    norb = _header_int(fields, "NORB", 1)
    nelec = _header_int(fields, "NELEC", 1)
    ms2 = _header_int(fields, "MS2", 1, required=False) or 0
    isym = _header_int(fields, "ISYM", 1, required=False)
    orbsym = ()
    if "ORBSYM" in fields:
        try:
            orbsym = tuple(int(v) for v in fields["ORBSYM"])
        except ValueError:
            raise FCIDumpParseError("non-integer ORBSYM entry", 1) from None
    if norb is None or norb < 1:
        raise FCIDumpParseError("NORB must be positive", 1)

    h = np.zeros((norb, norb))
    eri = np.zeros((norb,) * 4)
    core = 0.0
    for n, line in enumerate(lines[body_start:], start=body_start + 1):
        tokens = line.split()
        if not tokens:
            continue
        if len(tokens) != 5:
            raise FCIDumpParseError(f"expected 'value i j k l', got {line.strip()!r}", n)
        try:
            value = float(tokens[0].replace("D", "E").replace("d", "e"))
            i, j, k, l = (int(t) for t in tokens[1:])
        except ValueError:
            raise FCIDumpParseError(f"non-numeric token in {line.strip()!r}", n) from None
        if min(i, j, k, l) < 0 or max(i, j, k, l) > norb:
            raise FCIDumpParseError(f"orbital index out of range 0..{norb}", n)
        if i == j == k == l == 0:
            core = value
        elif k == 0 and l == 0:
            if j == 0:
                continue  # orbital energy line; not needed
            h[i - 1, j - 1] = h[j - 1, i - 1] = value
        else:
            if 0 in (i, j, k, l):
                raise FCIDumpParseError(f"partially zero index set {i} {j} {k} {l}", n)
            for idx in _eightfold_images(i - 1, j - 1, k - 1, l - 1):
                eri[idx] = value
    return IntegralSet(h, eri, core, nelec, ms2, orbsym, isym)


def write_fcidump(ints: IntegralSet, stream=None) -> str:
    """Serialize to FCIDUMP text (one entry per 8-fold class); also written to ``stream``."""
    d = ints.orbital_count
    out = [f"&FCI NORB={d},NELEC={ints.electron_count},MS2={ints.ms2},"]
    if ints.orbsym:
        out.append(" ORBSYM=" + ",".join(str(s) for s in ints.orbsym) + ",")
    if ints.isym is not None:
        out.append(f" ISYM={ints.isym},")
    out.append("&END")
    for i in range(d):
        for j in range(i + 1):
            for k in range(d):
                for l in range(k + 1):
                    if i * (i + 1) // 2 + j < k * (k + 1) // 2 + l:
                        continue
                    v = ints.two_body[i, j, k, l]
                    if v != 0.0:
                        out.append(f"{float(v)!r} {i + 1} {j + 1} {k + 1} {l + 1}")
    for i in range(d):
        for j in range(i + 1):
            v = ints.one_body[i, j]
            if v != 0.0:
                out.append(f"{float(v)!r} {i + 1} {j + 1} 0 0")
    out.append(f"{float(ints.core_energy)!r} 0 0 0 0")
    text = "\n".join(out) + "\n"
    if stream is not None:
        stream.write(text)
    return text


@dataclass(eq=False)
class SparseOperator:
    """Operator restricted to one sector basis, stored as a CSR matrix."""

    basis: FockBasis
    matrix: sp.csr_matrix
    observable: bool = True

    def __post_init__(self):
        self.matrix = sp.csr_matrix(self.matrix)
        if self.matrix.shape != (self.basis.dim, self.basis.dim):
            raise ValueError("matrix shape does not match basis")
        if self.observable and not self.is_hermitian():
            raise ValueError("operator flagged as observable is not Hermitian")

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        diff = self.matrix - self.matrix.conj().T
        return diff.nnz == 0 or abs(diff).max() <= tol

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def apply(self, state: StateVector) -> np.ndarray:
        if state.basis.configs != self.basis.configs:
            raise ValueError("state lives on a different basis")
        return self.matrix @ state.amplitudes


def excitation_operators(basis: FockBasis):
    """Spin-summed ``E_ij = sum_s c+_is c_js`` as CSR matrices on ``basis``."""
    d = basis.orbital_count
    ops = {}
    for i in range(d):
        for j in range(d):
            rows, cols, vals = [], [], []
            for col, bits in enumerate(basis.configs):
                for s in (0, 1):
                    out = annihilate_bits(bits, 2 * j + s)
                    if out is None:
                        continue
                    mid, p1 = out
                    out = create_bits(mid, 2 * i + s)
                    if out is None:
                        continue
                    new, p2 = out
                    row = basis.find(new)
                    if row is None:
                        continue
                    rows.append(row)
                    cols.append(col)
                    vals.append(float(p1 * p2))
            ops[i, j] = sp.csr_matrix((vals, (rows, cols)), shape=(basis.dim, basis.dim))
    return ops


def build_hamiltonian(ints: IntegralSet, basis: FockBasis, include_core: bool = True) -> SparseOperator:
    """Second-quantized Hamiltonian of ``ints`` on ``basis``.

    Uses the spin-free form
    ``H = sum h_ij E_ij + 1/2 sum (ij|kl) (E_ij E_kl - delta_jk E_il)``.
    """
    d = ints.orbital_count
    if basis.mode_count != 2 * d:
        raise ValueError(f"basis has {basis.mode_count} modes, integrals need {2 * d}")
    E = excitation_operators(basis)
    dim = basis.dim
    H = sp.csr_matrix((dim, dim))
    for (i, j), op in E.items():
        if ints.one_body[i, j] != 0.0:
            H = H + ints.one_body[i, j] * op
    eri = ints.two_body
    for i in range(d):
        for j in range(d):
            if not np.any(eri[i, j]):
                continue
            W = sp.csr_matrix((dim, dim))
            for k in range(d):
                for l in range(d):
                    if eri[i, j, k, l] != 0.0:
                        W = W + eri[i, j, k, l] * E[k, l]
            H = H + 0.5 * (E[i, j] @ W)
            for l in range(d):
                if eri[i, j, j, l] != 0.0:
                    H = H - 0.5 * eri[i, j, j, l] * E[i, l]
    if include_core and ints.core_energy:
        H = H + ints.core_energy * sp.identity(dim, format="csr")
    H.eliminate_zeros()
    return SparseOperator(basis, H)


@dataclass(frozen=True)
class HubbardParams:
    """Open-boundary Hubbard chain; ``site_count=2`` is the dimer."""

    t: float
    u: float
    site_count: int = 2

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError("hopping t must be positive")
        if self.u < 0:
            raise ValueError("repulsion U must be non-negative")
        if self.site_count < 2:
            raise ValueError("need at least two sites")

    def integrals(self, electron_count: int | None = None, ms2: int = 0) -> IntegralSet:
        """Equivalent integral set: ``T_{i,i+1} = -t`` and ``(ii|ii) = U``."""
        L = self.site_count
        h = np.zeros((L, L))
        for i in range(L - 1):
            h[i, i + 1] = h[i + 1, i] = -self.t
        eri = np.zeros((L,) * 4)
        for i in range(L):
            eri[i, i, i, i] = self.u
        return IntegralSet(h, eri, 0.0, L if electron_count is None else electron_count, ms2)


def hubbard_hamiltonian(params: HubbardParams, sector: SectorLabel | None = None) -> SparseOperator:
    """Hubbard chain assembled directly from hopping and on-site terms.

    Defaults to half filling with ``S_z = 0``.
    """
    L = params.site_count
    if sector is None:
        sector = SectorLabel(L, 0)
    basis = enumerate_sector_basis(2 * L, sector)
    entries = {}
    for col, bits in enumerate(basis.configs):
        diag = sum(
            params.u for site in range(L) if (bits >> (2 * site)) & 1 and (bits >> (2 * site + 1)) & 1
        )
        if diag:
            entries[col, col] = entries.get((col, col), 0.0) + diag
        for site in range(L - 1):
            for s in (0, 1):
                for src, dst in ((site + 1, site), (site, site + 1)):
                    out = annihilate_bits(bits, 2 * src + s)
                    if out is None:
                        continue
                    mid, p1 = out
                    out = create_bits(mid, 2 * dst + s)
                    if out is None:
                        continue
                    new, p2 = out
                    row = basis.index(new)
                    entries[row, col] = entries.get((row, col), 0.0) - params.t * p1 * p2
    if entries:
        (rows, cols), vals = zip(*entries.keys()), list(entries.values())
    else:
        rows, cols, vals = (), (), []
    return SparseOperator(basis, sp.csr_matrix((vals, (rows, cols)), shape=(basis.dim, basis.dim)))


@dataclass(frozen=True)
class HubbardDimerCoefficients:
    a: float
    b: float
    W: float


def hubbard_dimer_coefficients(params: HubbardParams) -> HubbardDimerCoefficients:
    t, U = params.t, params.u
    W = math.sqrt(U * U / 4 + 4 * t * t)
    a = math.sqrt((W + U / 2) / (2 * W))
    b = 2 * t / math.sqrt(2 * W * (W + U / 2))
    return HubbardDimerCoefficients(a, b, W)


def hubbard_dimer_energy(params: HubbardParams) -> float:
    return params.u / 2 - hubbard_dimer_coefficients(params).W


def analytic_state(kind: str, params: HubbardParams | None = None) -> StateVector:
    """Closed-form two-orbital states.

    ``kind`` is ``"one_electron"``, ``"dissociated_h2"`` or ``"hubbard_dimer"``
    (the latter needs ``params``). Modes: 0 = 1up, 1 = 1dn, 2 = 2up, 3 = 2dn.
    """
    r = 1 / math.sqrt(2)
    if kind == "one_electron":
        basis = enumerate_sector_basis(4, SectorLabel(1, 0.5))
        terms = [(r, (0,)), (r, (2,))]
    elif kind == "dissociated_h2":
        basis = enumerate_sector_basis(4, SectorLabel(2, 0))
        terms = [(r, (0, 3)), (-r, (1, 2))]
    elif kind == "hubbard_dimer":
        if params is None or params.site_count != 2:
            raise ValueError("hubbard_dimer needs dimer HubbardParams")
        c = hubbard_dimer_coefficients(params)
        basis = enumerate_sector_basis(4, SectorLabel(2, 0))
        terms = [
            (c.a * r, (0, 3)),
            (-c.a * r, (1, 2)),
            (c.b * r, (0, 1)),
            (-c.b * r, (3, 2)),
        ]
    else:
        raise ValueError(f"unknown analytic state {kind!r}")
    return creation_string_state(basis, terms).fix_phase()


def configuration_state(mode_count: int, occupied_modes) -> StateVector:
    """Single configuration with the given occupied modes (positive amplitude)."""
    bits = sum(1 << m for m in occupied_modes)
    n = popcount(bits)
    basis = enumerate_sector_basis(mode_count, SectorLabel.from_ms2(n, config_twice_sz(bits)))
    return StateVector.from_configs(basis, {bits: 1.0})
