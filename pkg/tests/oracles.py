"""Dense-matrix reference implementations, independent of the bit-packed code paths.

Site 1 is the least significant bit of a basis index, so it is the rightmost
Kronecker factor.
"""
from __future__ import annotations

import itertools
from functools import reduce

import numpy as np

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S = np.diag([1, 1j])
SINGLE = {"I": I2, "X": X, "Y": Y, "Z": Z, "H": H, "S": S}


def site_op(op: np.ndarray, site: int, length: int) -> np.ndarray:
    factors = [I2] * length
    factors[site - 1] = op
    return reduce(np.kron, reversed(factors))


def string_matrix(label: str, phase_exp: int = 0) -> np.ndarray:
    """``label[0]`` acts on site 1."""
    return (1j ** phase_exp) * reduce(np.kron, [SINGLE[c] for c in reversed(label)])


def projector(site: int, value: int, length: int) -> np.ndarray:
    return site_op((I2 + value * Z) / 2, site, length)


def gate_matrix(gate, length: int) -> np.ndarray:
    kind, *sites = gate
    if kind in SINGLE:
        return site_op(SINGLE[kind], sites[0], length)
    a, b = sites
    if kind == "CZ":
        return (site_op(I2, 1, length) + site_op(Z, a, length) + site_op(Z, b, length)
                - site_op(Z, a, length) @ site_op(Z, b, length)) / 2
    if kind == "CX":
        p0 = site_op((I2 + Z) / 2, a, length)
        p1 = site_op((I2 - Z) / 2, a, length)
        return p0 + p1 @ site_op(X, b, length)
    raise ValueError(kind)


def circuit_matrix(gates, length: int) -> np.ndarray:
    """``U = G1 G2 ... Gn``."""
    u = np.eye(2 ** length, dtype=complex)
    for g in gates:
        u = u @ gate_matrix(g, length)
    return u


def ising_matrix(length: int, lam: float = 1.0, *, periodic: bool = True, eta=(), duality=(),
                 left_field: float = 0.0, right_field: float = 0.0) -> np.ndarray:
    """Transverse-field Ising chain written term by term from its definition."""
    L = length
    bonds = [(j, j + 1) for j in range(1, L)] + ([(L, 1)] if periodic else [])
    h = np.zeros((2 ** L, 2 ** L), dtype=complex)
    removed = set()
    for i, j in bonds:
        if (i, j) in duality:
            h -= site_op(Z, i, L) @ site_op(X, j, L)
            removed.add(j)
        elif (i, j) in eta:
            h += site_op(Z, i, L) @ site_op(Z, j, L)
        else:
            h -= site_op(Z, i, L) @ site_op(Z, j, L)
    for j in range(1, L + 1):
        if j not in removed:
            h -= lam * site_op(X, j, L)
    if left_field:
        h += left_field * site_op(Z, 1, L)
    if right_field:
        h += right_field * site_op(Z, L, L)
    return h


def all_labels(length: int):
    for ops in itertools.product("IXYZ", repeat=length):
        yield "".join(ops)


def sre_brute(psi: np.ndarray, alpha: float) -> float:
    """Stabilizer Renyi entropy from ``<psi|P|psi>`` over all ``4^L`` strings."""
    L = int(np.log2(psi.size))
    probs = np.array([abs(np.vdot(psi, string_matrix(lab) @ psi)) ** 2 / 2 ** L
                      for lab in all_labels(L)])
    return float(np.log(np.sum(probs ** alpha)) / (1 - alpha) - L * np.log(2))


def ground_dense(h: np.ndarray) -> tuple[float, np.ndarray, float]:
    w, v = np.linalg.eigh(h)
    return float(w[0]), v[:, 0], float(w[1] - w[0])
