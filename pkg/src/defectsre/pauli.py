"""Pauli strings, real-weighted Pauli sums and their matrix-free action.

Encoding: a string on ``L`` sites is ``i**phase * sigma(x_1, z_1) (x) ... (x) sigma(x_L, z_L)``
with ``sigma(0,0)=I, sigma(1,0)=X, sigma(0,1)=Z, sigma(1,1)=Y``.  Site ``j`` (1-based)
lives in bit ``j-1`` of the masks and of computational-basis indices.  Because ``Y``
is stored directly, a string is Hermitian exactly when ``phase`` is even.
"""
from __future__ import annotations

import functools
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

MAX_STRING_LENGTH = 24
DROP_TOL = 1e-14
EQUAL_TOL = 1e-12

_CHAR_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
_BITS_CHAR = {v: k for k, v in _CHAR_BITS.items()}


class DimensionError(ValueError):
    """Operands act on different numbers of sites."""


class ContractError(ValueError):
    """An operation was called outside its precondition."""


def _popcount(v: int) -> int:
    return bin(v).count("1")


def parity_array(masks: np.ndarray) -> np.ndarray:
    """Bit parity of each entry of an unsigned integer array (0 or 1)."""
    return (np.bitwise_count(masks) & 1).astype(np.int8)


@dataclass(frozen=True)
class PauliString:
    length: int
    x_bits: int = 0
    z_bits: int = 0
    phase_exp: int = 0

    def __post_init__(self) -> None:
        if not 1 <= self.length <= MAX_STRING_LENGTH:
            raise ValueError(f"length must be in [1, {MAX_STRING_LENGTH}], got {self.length}")
        full = (1 << self.length) - 1
        if self.x_bits & ~full or self.z_bits & ~full or self.x_bits < 0 or self.z_bits < 0:
            raise ValueError("bit masks exceed the string length")
        object.__setattr__(self, "phase_exp", self.phase_exp % 4)

    # constructors -------------------------------------------------------
    @classmethod
    def identity(cls, length: int) -> "PauliString":
        return cls(length)

    @classmethod
    def from_label(cls, label: str, phase_exp: int = 0) -> "PauliString":
        """``"XZIY"`` puts X on site 1, Z on site 2 and Y on site 4."""
        x = z = 0
        for k, ch in enumerate(label.upper()):
            if ch not in _CHAR_BITS:
                raise ValueError(f"bad Pauli character {ch!r} in {label!r}")
            bx, bz = _CHAR_BITS[ch]
            x |= bx << k
            z |= bz << k
        return cls(len(label), x, z, phase_exp)

    @classmethod
    def from_sites(cls, length: int, ops: Mapping[int, str] | Iterable[tuple[int, str]],
                   phase_exp: int = 0) -> "PauliString":
        """Build from ``{site: 'X'|'Y'|'Z'}`` with 1-based sites; repeated sites multiply."""
        items = ops.items() if isinstance(ops, Mapping) else ops
        out = cls(length, phase_exp=phase_exp)
        for site, ch in items:
            if not 1 <= site <= length:
                raise ValueError(f"site {site} out of range for length {length}")
            bx, bz = _CHAR_BITS[ch.upper()]
            bit = 1 << (site - 1)
            out = multiply(out, cls(length, bx * bit, bz * bit))
        return out

    # views ---------------------------------------------------------------
    @property
    def label(self) -> str:
        return "".join(_BITS_CHAR[((self.x_bits >> k) & 1, (self.z_bits >> k) & 1)]
                       for k in range(self.length))

    @property
    def y_count(self) -> int:
        return _popcount(self.x_bits & self.z_bits)

    @property
    def weight(self) -> int:
        return _popcount(self.x_bits | self.z_bits)

    @property
    def is_hermitian(self) -> bool:
        return self.phase_exp % 2 == 0

    @property
    def sign(self) -> int:
        """+1 or -1 for Hermitian strings."""
        if not self.is_hermitian:
            raise ContractError(f"string {self} is not Hermitian")
        return 1 if self.phase_exp == 0 else -1

    def unsigned(self) -> "PauliString":
        return PauliString(self.length, self.x_bits, self.z_bits, 0)

    def site_op(self, site: int) -> str:
        k = site - 1
        return _BITS_CHAR[((self.x_bits >> k) & 1, (self.z_bits >> k) & 1)]

    def __str__(self) -> str:
        prefix = {0: "+", 1: "+i", 2: "-", 3: "-i"}[self.phase_exp]
        return prefix + self.label

    def __mul__(self, other: "PauliString") -> "PauliString":
        return multiply(self, other)

    def to_matrix(self) -> np.ndarray:
        """Dense ``2**L x 2**L`` matrix (only for small L)."""
        if self.length > 12:
            raise ContractError("dense matrices limited to 12 sites")
        mats = {"I": np.eye(2), "X": np.array([[0, 1], [1, 0]]),
                "Y": np.array([[0, -1j], [1j, 0]]), "Z": np.diag([1, -1])}
        out = np.array([[1.0 + 0j]])
        # site 1 is the least significant bit, so it is the rightmost Kronecker factor
        for ch in reversed(self.label):
            out = np.kron(out, mats[ch])
        return (1j ** self.phase_exp) * out


def _check_len(a: PauliString | "PauliSum", b: PauliString | "PauliSum") -> None:
    if a.length != b.length:
        raise DimensionError(f"length mismatch: {a.length} vs {b.length}")


def multiply(a: PauliString, b: PauliString) -> PauliString:
    """Exact operator product ``a @ b`` including the phase."""
    _check_len(a, b)
    x = a.x_bits ^ b.x_bits
    z = a.z_bits ^ b.z_bits
    # sigma(x,z) = i^{|x&z|} X^x Z^z; moving Z^{za} past X^{xb} costs (-1)^{|za&xb|}
    phase = (a.phase_exp + b.phase_exp + _popcount(a.x_bits & a.z_bits)
             + _popcount(b.x_bits & b.z_bits) + 2 * _popcount(a.z_bits & b.x_bits)
             - _popcount(x & z))
    return PauliString(a.length, x, z, phase)


def commutes(a: PauliString, b: PauliString) -> bool:
    _check_len(a, b)
    return (_popcount(a.x_bits & b.z_bits) + _popcount(a.z_bits & b.x_bits)) % 2 == 0


# ---------------------------------------------------------------------------
# states


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized state on ``length`` sites; bit ``j-1`` of the index is site ``j``."""

    amplitudes: np.ndarray
    length: int = field(default=-1)

    def __post_init__(self) -> None:
        amp = np.asarray(self.amplitudes)
        if amp.ndim != 1:
            raise ValueError("amplitudes must be one-dimensional")
        n = amp.size
        L = n.bit_length() - 1
        if n < 2 or (1 << L) != n:
            raise ValueError(f"amplitude count {n} is not a power of two >= 2")
        if self.length not in (-1, L):
            raise DimensionError(f"length {self.length} does not match {n} amplitudes")
        if not np.iscomplexobj(amp):
            amp = amp.astype(np.float64)
        else:
            amp = amp.astype(np.complex128)
        nrm = np.linalg.norm(amp)
        if abs(nrm - 1.0) > 1e-10:
            raise ValueError(f"state norm {nrm!r} differs from 1; use StateVector.normalized")
        amp = amp.copy()
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)
        object.__setattr__(self, "length", L)

    @classmethod
    def normalized(cls, amplitudes: Sequence[complex] | np.ndarray) -> "StateVector":
        amp = np.asarray(amplitudes)
        nrm = np.linalg.norm(amp)
        if nrm == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(amp / nrm)

    @classmethod
    def basis(cls, length: int, index: int = 0) -> "StateVector":
        amp = np.zeros(1 << length)
        amp[index] = 1.0
        return cls(amp)

    @classmethod
    def product(cls, single_site: Sequence[Sequence[complex]]) -> "StateVector":
        """Product state; ``single_site[0]`` is the site-1 factor."""
        out = np.array([1.0 + 0j])
        for v in single_site:
            v = np.asarray(v, dtype=complex)
            out = np.kron(v / np.linalg.norm(v), out)
        if np.allclose(out.imag, 0.0):
            out = out.real
        return cls.normalized(out)

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.amplitudes)

    def tensor(self, other: "StateVector") -> "StateVector":
        """``self`` on sites 1..L, ``other`` on the following sites."""
        return StateVector.normalized(np.kron(other.amplitudes, self.amplitudes))


def _as_array(psi: StateVector | np.ndarray) -> np.ndarray:
    return psi.amplitudes if isinstance(psi, StateVector) else np.asarray(psi)


def apply_string(p: PauliString, psi: StateVector | np.ndarray) -> np.ndarray:
    """``p|psi>`` as an array.  Works along axis 0 for 2-D input."""
    v = _as_array(psi)
    n = v.shape[0]
    if n != 1 << p.length:
        raise DimensionError("state and string lengths differ")
    idx = np.arange(n, dtype=np.uint64)
    # sigma(x,z)|b> = i^{phase+|x&z|} (-1)^{|z&b|} |b^x>
    sgn = 1.0 - 2.0 * parity_array(idx & np.uint64(p.z_bits))
    coef = 1j ** ((p.phase_exp + p.y_count) % 4)
    out = np.empty(v.shape, dtype=np.result_type(v, complex))
    src = (idx ^ np.uint64(p.x_bits)).astype(np.intp)
    shaped = sgn.reshape((-1,) + (1,) * (v.ndim - 1))
    out[src] = coef * shaped * v
    return out


def expectation(psi: StateVector, p: PauliString) -> float:
    if psi.length != p.length:
        raise DimensionError("state and string lengths differ")
    if not p.is_hermitian:
        raise ContractError(f"expectation of non-Hermitian string {p}")
    val = np.vdot(psi.amplitudes, apply_string(p, psi))
    if abs(val.imag) > 1e-12:
        raise ContractError(f"expectation has imaginary part {val.imag:.3e}")
    return float(val.real)


# ---------------------------------------------------------------------------
# sums


@dataclass(frozen=True)
class PauliSum:
    """``sum_k c_k P_k`` with real ``c_k`` and phase-free (Hermitian) strings."""

    length: int
    terms: tuple[tuple[float, PauliString], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", tuple((float(c), s) for c, s in self.terms))
        for _, s in self.terms:
            if s.length != self.length:
                raise DimensionError("term length differs from sum length")

    @classmethod
    def from_terms(cls, length: int,
                   terms: Iterable[tuple[float, PauliString | str]]) -> "PauliSum":
        """Canonical sum from ``(coeff, string)`` pairs; labels are accepted for strings."""
        raw = []
        for c, s in terms:
            if isinstance(s, str):
                s = PauliString.from_label(s)
            raw.append((c, s))
        return canonicalize(cls(length, tuple(_fold_phase(c, s) for c, s in raw)))

    @classmethod
    def zero(cls, length: int) -> "PauliSum":
        return cls(length)

    def __len__(self) -> int:
        return len(self.terms)

    def __add__(self, other: "PauliSum") -> "PauliSum":
        _check_len(self, other)
        return canonicalize(PauliSum(self.length, self.terms + other.terms))

    def __neg__(self) -> "PauliSum":
        return PauliSum(self.length, tuple((-c, s) for c, s in self.terms))

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + (-other)

    def __mul__(self, scalar: float) -> "PauliSum":
        return canonicalize(PauliSum(self.length, tuple((scalar * c, s) for c, s in self.terms)))

    __rmul__ = __mul__

    def coefficient(self, s: PauliString | str) -> float:
        if isinstance(s, str):
            s = PauliString.from_label(s)
        key = (s.x_bits, s.z_bits)
        total = 0.0
        for c, t in self.terms:
            if (t.x_bits, t.z_bits) == key:
                total += c * (1 if t.phase_exp == 0 else -1)
        return total * (1 if s.phase_exp == 0 else -1)

    @property
    def is_real_matrix(self) -> bool:
        """True when every term is real in the computational basis (even Y count)."""
        return all(s.y_count % 2 == 0 for _, s in self.terms)

    def __str__(self) -> str:
        return format_pauli_sum(self)

    def to_matrix(self) -> np.ndarray:
        dim = 1 << self.length
        out = np.zeros((dim, dim), dtype=complex)
        for c, s in self.terms:
            out += c * s.to_matrix()
        return out


def _fold_phase(c: float, s: PauliString) -> tuple[float, PauliString]:
    if not s.is_hermitian:
        raise ContractError(f"non-Hermitian string {s} in a real-coefficient sum")
    return (c * s.sign, s.unsigned())


def canonicalize(h: PauliSum) -> PauliSum:
    """Merge duplicates, sort by ``(x_bits, z_bits)`` and drop ``|c| < 1e-14``."""
    acc: dict[tuple[int, int], list[float]] = {}
    for c, s in h.terms:
        c, s = _fold_phase(c, s)
        acc.setdefault((s.x_bits, s.z_bits), []).append(c)
    out = []
    for key in sorted(acc):
        c = float(np.sum(sorted(acc[key], key=abs)))
        if abs(c) >= DROP_TOL:
            out.append((c, PauliString(h.length, key[0], key[1])))
    return PauliSum(h.length, tuple(out))


def term_deviations(a: PauliSum, b: PauliSum) -> list[tuple[float, PauliString, float, float]]:
    """Per-string ``(|ca - cb|, string, ca, cb)`` over the union of both supports, largest first."""
    _check_len(a, b)
    ca = {(s.x_bits, s.z_bits): c for c, s in canonicalize(a).terms}
    cb = {(s.x_bits, s.z_bits): c for c, s in canonicalize(b).terms}
    rows = []
    for key in sorted(set(ca) | set(cb)):
        u, v = ca.get(key, 0.0), cb.get(key, 0.0)
        rows.append((abs(u - v), PauliString(a.length, *key), u, v))
    rows.sort(key=lambda r: -r[0])
    return rows


def sums_equal(a: PauliSum, b: PauliSum, tol: float = EQUAL_TOL) -> bool:
    if a.length != b.length:
        return False
    dev = term_deviations(a, b)
    return not dev or dev[0][0] < tol


# ---------------------------------------------------------------------------
# matrix-free action


class CompiledSum:
    """Terms grouped by X mask: ``H psi = sum_x D_x psi[. ^ x]`` with diagonal ``D_x``."""

    def __init__(self, h: PauliSum):
        self.length = h.length
        n = 1 << h.length
        idx = np.arange(n, dtype=np.uint64)
        groups: dict[int, np.ndarray] = {}
        for c, s in h.terms:
            # <b^x| s |b> = i^{|x&z|} (-1)^{|z&b|}; store the diagonal indexed by the output b^x
            coef = c * (1j ** (s.y_count % 4))
            diag = coef * (1.0 - 2.0 * parity_array(idx & np.uint64(s.z_bits)))
            src = (idx ^ np.uint64(s.x_bits)).astype(np.intp)
            d = np.empty(n, dtype=complex)
            d[src] = diag
            if s.x_bits in groups:
                groups[s.x_bits] = groups[s.x_bits] + d
            else:
                groups[s.x_bits] = d
        self.is_real = all(np.allclose(d.imag, 0.0) for d in groups.values())
        self.groups = []
        for x in sorted(groups):
            d = groups[x].real.copy() if self.is_real else groups[x]
            perm = (idx ^ np.uint64(x)).astype(np.intp)
            self.groups.append((x, d, perm))

    def __call__(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v)
        dtype = np.result_type(v, np.float64 if self.is_real else np.complex128)
        out = np.zeros(v.shape, dtype=dtype)
        for x, d, perm in self.groups:
            dd = d if v.ndim == 1 else d[:, None]
            out += dd * (v if x == 0 else v[perm])
        return out


@functools.lru_cache(maxsize=32)
def compile_sum(h: PauliSum) -> CompiledSum:
    return CompiledSum(h)


def apply_sum(h: PauliSum, psi: StateVector | np.ndarray) -> np.ndarray:
    """Unnormalized ``sum_k c_k P_k |psi>`` as an amplitude array (axis 0 for 2-D input)."""
    v = _as_array(psi)
    if v.shape[0] != 1 << h.length:
        raise DimensionError("state and sum lengths differ")
    return compile_sum(h)(v)


# ---------------------------------------------------------------------------
# site bookkeeping


def project_site(h: PauliSum, site: int, value: int) -> PauliSum:
    """Substitute ``Z_site -> value`` (``value = +-1``); fails if a term has X or Y there."""
    if value not in (1, -1):
        raise ValueError("projection value must be +1 or -1")
    bit = 1 << (site - 1)
    out = []
    for c, s in h.terms:
        if s.x_bits & bit:
            raise ContractError(f"term {s.label} is not diagonal on site {site}")
        if s.z_bits & bit:
            out.append((c * value, PauliString(h.length, s.x_bits, s.z_bits & ~bit)))
        else:
            out.append((c, s))
    return canonicalize(PauliSum(h.length, tuple(out)))


def shift_sites(h: PauliSum, offset: int, length: int) -> PauliSum:
    """Relabel site ``j`` as ``j + offset`` inside a chain of ``length`` sites."""
    out = []
    for c, s in h.terms:
        if offset >= 0:
            x, z = s.x_bits << offset, s.z_bits << offset
        else:
            x, z = s.x_bits >> -offset, s.z_bits >> -offset
            if (x << -offset) != s.x_bits or (z << -offset) != s.z_bits:
                raise ContractError("shift would drop an occupied site")
        out.append((c, PauliString(length, x, z)))
    return canonicalize(PauliSum(length, tuple(out)))


def support(h: PauliSum) -> int:
    """Mask of sites touched by any term."""
    m = 0
    for _, s in h.terms:
        m |= s.x_bits | s.z_bits
    return m


# ---------------------------------------------------------------------------
# text format


def format_pauli_sum(h: PauliSum) -> str:
    return "\n".join(f"{c:+.17g} {s.label}" for c, s in h.terms) + ("\n" if h.terms else "")


def parse_pauli_sum(text: str, length: int | None = None) -> PauliSum:
    """Parse ``<coeff> <op-string>`` lines; ``#`` starts a comment."""
    terms = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2 or not re.fullmatch(r"[IXYZixyz]+", parts[1]):
            raise ValueError(f"line {lineno}: expected '<coeff> <op-string>', got {line!r}")
        s = PauliString.from_label(parts[1])
        if length is None:
            length = s.length
        elif s.length != length:
            raise DimensionError(f"line {lineno}: string length {s.length} != {length}")
        terms.append((float(parts[0]), s))
    if length is None:
        raise ValueError("empty Pauli sum text with no length given")
    return PauliSum.from_terms(length, terms)
