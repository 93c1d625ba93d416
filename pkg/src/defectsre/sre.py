"""Stabilizer Renyi entropy from the Bell-basis participation distribution.

For a pure state on ``L`` qubits, ``p_m = <psi|sigma^m|psi>^2 / 2^L`` sums to one and

    M_alpha = ln(sum_m p_m^alpha) / (1 - alpha) - L ln 2.

All ``4^L`` expectations come from one transform: with ``R[b, x] = conj(psi[b ^ x]) psi[b]``
(the doubled state ``psi (x) psi*`` after a CNOT from each row qubit onto its column
partner), a Hadamard transform over ``b`` gives ``<X^x Z^z>`` for every ``z``.
That is the per-site Bell rotation, applied as two Kronecker factors of a Hadamard matrix.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.linalg import hadamard

from .pauli import PauliString, StateVector, expectation

DEFAULT_MAX_LENGTH = 14
ORACLE_MAX_LENGTH = 7
PARTICIPATION_TOL = 1e-14
_CHUNK = 256

DUMP_MAGIC = b"SREP"
DUMP_VERSION = 1
DTYPE_F64_LE = 1


class ResourceError(MemoryError):
    def __init__(self, length: int, required_bytes: int, cap: int):
        super().__init__(f"L={length} exceeds the cap of {cap} sites "
                         f"(needs about {required_bytes} bytes)")
        self.required_bytes = required_bytes


@dataclass(frozen=True)
class BellDistribution:
    length: int
    probabilities: np.ndarray  # index bit 2(j-1) = x_j, bit 2(j-1)+1 = z_j
    sum_check: float

    def entry(self, p: PauliString) -> float:
        return float(self.probabilities[interleave(p.x_bits, p.z_bits, p.length)])


@dataclass(frozen=True)
class SreResult:
    alpha: float
    length: int
    value: float
    max_prob: float
    participation: int  # number of p_m above 1e-14

    @property
    def bits(self) -> float:
        return self.value / math.log(2)


def interleave(x: int, z: int, length: int) -> int:
    m = 0
    for k in range(length):
        m |= ((x >> k) & 1) << (2 * k) | ((z >> k) & 1) << (2 * k + 1)
    return m


def _interleave_array(length: int) -> np.ndarray:
    """``perm[x * 2^L + z]`` = interleaved index of the string ``(x, z)``."""
    n = 1 << length
    x = np.repeat(np.arange(n, dtype=np.int64), n)
    z = np.tile(np.arange(n, dtype=np.int64), n)
    m = np.zeros(n * n, dtype=np.int64)
    for k in range(length):
        m |= ((x >> k) & 1) << (2 * k)
        m |= ((z >> k) & 1) << (2 * k + 1)
    return m


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if alpha <= 0 or alpha == 1.0:
        raise ValueError(f"alpha must be positive and different from 1, got {alpha}")
    return alpha


def _require(length: int, cap: int, bytes_needed: int) -> None:
    if length > cap:
        raise ResourceError(length, bytes_needed, cap)


def _xz_blocks(psi: StateVector, chunk: int = _CHUNK):
    """Yield ``(x0, W)`` with ``W[i, z] = <psi| X^{x0+i} Z^z |psi>``."""
    a = psi.amplitudes
    L = psi.length
    n = 1 << L
    lo = L // 2
    hi = L - lo
    h_lo = hadamard(1 << lo).astype(float)
    h_hi = hadamard(1 << hi).astype(float)
    idx = np.arange(n)
    conj = np.conj(a) if np.iscomplexobj(a) else a
    chunk = min(chunk, n)
    for x0 in range(0, n, chunk):
        xs = np.arange(x0, min(x0 + chunk, n))
        r = conj[idx[None, :] ^ xs[:, None]] * a[None, :]
        r = r.reshape(len(xs), 1 << hi, 1 << lo)
        # (-1)^{z.b} factorizes over the high and low halves of the bit string
        w = np.matmul(np.matmul(h_hi, r), h_lo)
        yield x0, w.reshape(len(xs), n)


def pauli_expectations(psi: StateVector) -> np.ndarray:
    """``E[x, z] = <psi| sigma(x, z) |psi>`` (Y-form strings, real) for all ``4^L`` strings."""
    L = psi.length
    n = 1 << L
    _require(L, DEFAULT_MAX_LENGTH, 8 * n * n)
    out = np.empty((n, n))
    ycount = np.bitwise_count(np.arange(n)[:, None] & np.arange(n)[None, :]) % 4
    for x0, w in _xz_blocks(psi):
        blk = w * (1j ** ycount[x0:x0 + w.shape[0]])
        out[x0:x0 + w.shape[0]] = blk.real
    return out


def bell_distribution(psi: StateVector, max_length: int = DEFAULT_MAX_LENGTH) -> BellDistribution:
    L = psi.length
    n = 1 << L
    _require(L, max_length, 16 * n * n)
    flat = np.empty(n * n)
    for x0, w in _xz_blocks(psi):
        flat[x0 * n:(x0 + w.shape[0]) * n] = (np.abs(w) ** 2).ravel() / n
    probs = np.empty(n * n)
    probs[_interleave_array(L)] = flat
    return BellDistribution(L, probs, math.fsum(probs) - 1.0)


def _power_sum(psi: StateVector, alpha: float) -> tuple[float, float, int]:
    n = 1 << psi.length
    partial = []
    pmax = 0.0
    count = 0
    for _, w in _xz_blocks(psi):
        p = (w * w if not np.iscomplexobj(w) else np.abs(w) ** 2) / n
        pmax = max(pmax, float(p.max()))
        count += int(np.count_nonzero(p > PARTICIPATION_TOL))
        partial.append(float(np.sum(p * p)) if alpha == 2.0 else float(np.sum(p ** alpha)))
    return math.fsum(partial), pmax, count


def sre(psi: StateVector, alpha: float = 2.0, max_length: int = DEFAULT_MAX_LENGTH) -> SreResult:
    """``M_alpha`` in nats, streamed over blocks of X masks (no ``4^L`` buffer)."""
    alpha = _check_alpha(alpha)
    L = psi.length
    n = 1 << L
    _require(L, max_length, 8 * n * n)
    total, pmax, count = _power_sum(psi, alpha)
    value = math.log(total) / (1.0 - alpha) - L * math.log(2.0)
    return SreResult(alpha, L, value, pmax, count)


def sre_from_distribution(dist: BellDistribution, alpha: float = 2.0) -> SreResult:
    alpha = _check_alpha(alpha)
    p = dist.probabilities
    total = math.fsum(np.sort(p ** alpha))
    value = math.log(total) / (1.0 - alpha) - dist.length * math.log(2.0)
    return SreResult(alpha, dist.length, value, float(p.max()),
                     int(np.count_nonzero(p > PARTICIPATION_TOL)))


def sre_direct_oracle(psi: StateVector, alpha: float = 2.0) -> SreResult:
    """Literal ``ln(sum_m <sigma^m>^{2 alpha} / 2^L) / (1 - alpha)`` over every string."""
    alpha = _check_alpha(alpha)
    L = psi.length
    n = 1 << L
    _require(L, ORACLE_MAX_LENGTH, 8 * n * n)
    vals = []
    for x in range(n):
        for z in range(n):
            vals.append(expectation(psi, PauliString(L, x, z)))
    e = np.array(vals)
    total = math.fsum(np.abs(e) ** (2 * alpha)) / n
    p = e * e / n
    return SreResult(alpha, L, math.log(total) / (1.0 - alpha), float(p.max()),
                     int(np.count_nonzero(p > PARTICIPATION_TOL)))


def is_stabilizer(psi: StateVector, tol: float = 1e-10) -> bool:
    return sre(psi, 2.0).value < tol


# ---------------------------------------------------------------------------
# binary dump


def write_distribution(path: str | Path, dist: BellDistribution) -> None:
    with open(path, "wb") as fh:
        fh.write(DUMP_MAGIC + struct.pack("<III", DUMP_VERSION, dist.length, DTYPE_F64_LE))
        fh.write(np.ascontiguousarray(dist.probabilities, dtype="<f8").tobytes())


def read_distribution(path: str | Path) -> BellDistribution:
    with open(path, "rb") as fh:
        head = fh.read(16)
        if len(head) != 16 or head[:4] != DUMP_MAGIC:
            raise ValueError("not a Bell-distribution dump")
        version, L, tag = struct.unpack("<III", head[4:])
        if version != DUMP_VERSION or tag != DTYPE_F64_LE:
            raise ValueError(f"unsupported dump version {version} / dtype tag {tag}")
        probs = np.frombuffer(fh.read(), dtype="<f8").astype(np.float64)
    if probs.size != 4 ** L:
        raise ValueError(f"dump holds {probs.size} values, expected {4 ** L}")
    return BellDistribution(L, probs, math.fsum(probs) - 1.0)


# ---------------------------------------------------------------------------
# reference states


def t_state() -> StateVector:
    return StateVector(np.array([1.0, np.exp(1j * np.pi / 4)]) / np.sqrt(2))


def plus_state(length: int) -> StateVector:
    return StateVector(np.full(1 << length, 2.0 ** (-length / 2)))


def ghz_state(length: int) -> StateVector:
    a = np.zeros(1 << length)
    a[0] = a[-1] = 1 / np.sqrt(2)
    return StateVector(a)
