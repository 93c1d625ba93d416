"""Clifford unitaries as signed symplectic tableaux acting by conjugation.

A :class:`CliffordMap` stores the images ``U X_j U^dag`` and ``U Z_j U^dag`` as signed
Pauli strings.  Gate lists are read as written operator products: ``[G1, G2, G3]``
is ``U = G1 G2 G3``, so ``G3`` acts first on a state.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .pauli import DimensionError, PauliString, PauliSum, canonicalize, multiply

Gate = tuple  # ("H", 3) or ("CZ", 3, 4)

SINGLE_GATES = ("X", "Y", "Z", "H", "S")
TWO_GATES = ("CZ", "CX")


@dataclass(frozen=True)
class CliffordMap:
    length: int
    x_images: tuple[PauliString, ...]
    z_images: tuple[PauliString, ...]
    label: str = ""

    def __post_init__(self) -> None:
        if len(self.x_images) != self.length or len(self.z_images) != self.length:
            raise DimensionError("need one X image and one Z image per site")
        for p in self.x_images + self.z_images:
            if p.length != self.length or not p.is_hermitian:
                raise ValueError("images must be Hermitian strings of the map length")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CliffordMap):
            return NotImplemented
        return (self.length == other.length and self.x_images == other.x_images
                and self.z_images == other.z_images)

    def __hash__(self) -> int:
        return hash((self.length, self.x_images, self.z_images))

    @classmethod
    def identity(cls, length: int) -> "CliffordMap":
        xs = tuple(PauliString(length, 1 << k, 0) for k in range(length))
        zs = tuple(PauliString(length, 0, 1 << k) for k in range(length))
        return cls(length, xs, zs, "I")

    @property
    def tableau(self) -> np.ndarray:
        """``2L x 2L`` GF(2) matrix; column ``k`` (``k < L``: X_{k+1}, else Z_{k-L+1}) holds
        the image bits ordered as ``[x_1..x_L, z_1..z_L]``."""
        L = self.length
        m = np.zeros((2 * L, 2 * L), dtype=np.uint8)
        for col, p in enumerate(self.x_images + self.z_images):
            for k in range(L):
                m[k, col] = (p.x_bits >> k) & 1
                m[L + k, col] = (p.z_bits >> k) & 1
        return m

    @property
    def signs(self) -> np.ndarray:
        """1 where the image carries a minus sign."""
        return np.array([p.phase_exp // 2 for p in self.x_images + self.z_images], dtype=np.uint8)

    def is_symplectic(self) -> bool:
        L = self.length
        m = self.tableau.astype(np.int64)
        j = np.zeros((2 * L, 2 * L), dtype=np.int64)
        j[:L, L:] = np.eye(L, dtype=np.int64)
        j[L:, :L] = np.eye(L, dtype=np.int64)
        return bool(np.array_equal((m.T @ j @ m) % 2, j))

    def __call__(self, p: PauliString) -> PauliString:
        return conjugate_string(self, p)


def conjugate_string(c: CliffordMap, p: PauliString) -> PauliString:
    """``C p C^dag`` with its exact phase."""
    if c.length != p.length:
        raise DimensionError("Clifford and string lengths differ")
    # p = i^{phase + |x&z|} prod_j X_j^{x_j} Z_j^{z_j}
    out = PauliString(p.length, 0, 0, p.phase_exp + p.y_count)
    for k in range(p.length):
        if (p.x_bits >> k) & 1:
            out = multiply(out, c.x_images[k])
        if (p.z_bits >> k) & 1:
            out = multiply(out, c.z_images[k])
    return out


def conjugate_sum(c: CliffordMap, h: PauliSum) -> PauliSum:
    if c.length != h.length:
        raise DimensionError("Clifford and sum lengths differ")
    out = []
    for coeff, s in h.terms:
        img = conjugate_string(c, s)
        out.append((coeff * img.sign, img.unsigned()))
    return canonicalize(PauliSum(h.length, tuple(out)))


def compose(a: CliffordMap, b: CliffordMap) -> CliffordMap:
    """Map of the unitary ``A B``: conjugation by ``b`` first, then ``a``."""
    if a.length != b.length:
        raise DimensionError("Clifford lengths differ")
    xs = tuple(conjugate_string(a, p) for p in b.x_images)
    zs = tuple(conjugate_string(a, p) for p in b.z_images)
    label = " ".join(t for t in (a.label, b.label) if t and t != "I") or "I"
    return CliffordMap(a.length, xs, zs, label)


def _gf2_inverse(m: np.ndarray) -> np.ndarray:
    n = m.shape[0]
    aug = np.concatenate([m % 2, np.eye(n, dtype=np.uint8)], axis=1).astype(np.uint8)
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r, col]), None)
        if piv is None:
            raise ValueError("tableau is singular over GF(2)")
        aug[[col, piv]] = aug[[piv, col]]
        for r in range(n):
            if r != col and aug[r, col]:
                aug[r] ^= aug[col]
    return aug[:, n:]


def inverse(c: CliffordMap) -> CliffordMap:
    L = c.length
    minv = _gf2_inverse(c.tableau)
    images = []
    for col in range(2 * L):
        bits = minv[:, col]
        x = sum(int(bits[k]) << k for k in range(L))
        z = sum(int(bits[L + k]) << k for k in range(L))
        cand = PauliString(L, x, z, 0)
        target = (PauliString(L, 1 << col, 0) if col < L
                  else PauliString(L, 0, 1 << (col - L)))
        img = conjugate_string(c, cand)
        if img.unsigned() != target:
            raise ValueError("tableau inversion failed")
        images.append(cand if img.phase_exp == 0 else PauliString(L, x, z, 2))
    return CliffordMap(L, tuple(images[:L]), tuple(images[L:]), f"({c.label})^-1")


# ---------------------------------------------------------------------------
# gates


def _check_sites(gate: Sequence, length: int) -> None:
    kind = gate[0]
    sites = gate[1:]
    want = 1 if kind in SINGLE_GATES else 2 if kind in TWO_GATES else None
    if want is None:
        raise ValueError(f"unknown gate {kind!r}")
    if len(sites) != want:
        raise ValueError(f"gate {kind} takes {want} site(s), got {len(sites)}")
    for s in sites:
        if not isinstance(s, (int, np.integer)) or not 1 <= s <= length:
            raise ValueError(f"site {s} out of range [1, {length}] in gate {gate}")
    if want == 2 and sites[0] == sites[1]:
        raise ValueError(f"duplicate site in two-qubit gate {gate}")


def gate_map(gate: Sequence, length: int) -> CliffordMap:
    _check_sites(gate, length)
    kind = gate[0]
    ident = CliffordMap.identity(length)
    xs, zs = list(ident.x_images), list(ident.z_images)
    j = gate[1] - 1
    X = lambda k, ph=0: PauliString(length, 1 << k, 0, ph)  # noqa: E731
    Z = lambda k, ph=0: PauliString(length, 0, 1 << k, ph)  # noqa: E731
    if kind == "X":
        zs[j] = Z(j, 2)
    elif kind == "Z":
        xs[j] = X(j, 2)
    elif kind == "Y":
        xs[j], zs[j] = X(j, 2), Z(j, 2)
    elif kind == "H":
        xs[j], zs[j] = Z(j), X(j)
    elif kind == "S":
        xs[j] = PauliString(length, 1 << j, 1 << j)
    elif kind == "CZ":
        k = gate[2] - 1
        xs[j] = PauliString(length, 1 << j, 1 << k)
        xs[k] = PauliString(length, 1 << k, 1 << j)
    elif kind == "CX":
        t = gate[2] - 1
        xs[j] = PauliString(length, (1 << j) | (1 << t), 0)
        zs[t] = PauliString(length, 0, (1 << j) | (1 << t))
    label = kind + "".join(f"_{s}" for s in gate[1:])
    return CliffordMap(length, tuple(xs), tuple(zs), label)


def from_gate_sequence(gates: Iterable[Sequence], length: int) -> CliffordMap:
    """Tableau of ``U = G1 G2 ... Gn`` for ``gates = [G1, ..., Gn]``."""
    gates = [tuple(g) for g in gates]
    out = CliffordMap.identity(length)
    for g in reversed(gates):
        out = compose(gate_map(g, length), out)
    label = " ".join(g[0] + "".join(f"_{s}" for s in g[1:]) for g in gates) or "I"
    return CliffordMap(length, out.x_images, out.z_images, label)


def parse_gate_file(text: str) -> list[Gate]:
    """One gate per line (``H 3``, ``CZ 3 4``); line order is product order."""
    gates = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0].upper()
        try:
            sites = tuple(int(p) for p in parts[1:])
        except ValueError:
            raise ValueError(f"line {lineno}: bad site in {line!r}") from None
        try:
            # arity and name only; site range needs the chain length
            _check_sites((kind,) + sites, max(sites, default=1))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
        gates.append((kind,) + sites)
    return gates


# ---------------------------------------------------------------------------
# defect movement and fusion operators


class DefectOperator(str, enum.Enum):
    U_ETA = "U_eta"                      # moves eta from bond (j-1,j) to (j,j+1)
    U_D = "U_D"                          # moves D from bond (j-1,j) to (j,j+1)
    ETA_ETA = "lambda_eta_eta"           # eta x eta -> 1
    ETA_D = "lambda_eta_D"               # eta x D -> D, form that satisfies the identity
    ETA_D_LITERAL = "lambda_eta_D_literal"  # Z_j X_{j+1}, kept for comparison
    D_ETA = "lambda_D_eta"               # D x eta -> D
    D_D = "lambda_D_D"                   # D x D -> T^-(1 + eta)
    ETA_BOUNDARY = "lambda_eta_boundary"  # eta fused into a Cardy boundary
    D_UP = "lambda_D_up"                 # D fused into the up boundary -> free
    D_DOWN = "lambda_D_down"             # D fused into the down boundary -> free
    D_FREE = "lambda_D_free"             # D fused into the free boundary -> up + down


def defect_gates(name: DefectOperator | str, site: int, length: int) -> list[Gate]:
    name = DefectOperator(name)
    j = site
    if not 1 <= j <= length:
        raise ValueError(f"site {j} out of range [1, {length}]")
    needs_pair = name not in (DefectOperator.U_ETA, DefectOperator.ETA_ETA,
                              DefectOperator.ETA_BOUNDARY)
    if needs_pair and j == length:
        raise ValueError(f"{name.value} at site {j} requires neighbor {j + 1} inside the chain")
    k = j + 1
    table: dict[DefectOperator, list[Gate]] = {
        DefectOperator.U_ETA: [("X", j)],
        DefectOperator.U_D: [("CZ", j, k), ("H", j)],
        DefectOperator.ETA_ETA: [("X", j)],
        DefectOperator.ETA_D: [("X", j), ("Z", k)],
        DefectOperator.ETA_D_LITERAL: [("Z", j), ("X", k)],
        DefectOperator.D_ETA: [("CZ", j, k), ("H", j), ("X", j)],
        DefectOperator.D_D: [("H", j), ("CZ", j, k)],
        DefectOperator.ETA_BOUNDARY: [("X", j)],
        DefectOperator.D_UP: [("H", j), ("CZ", j, k)],
        DefectOperator.D_DOWN: [("H", j), ("CZ", j, k), ("X", j)],
        DefectOperator.D_FREE: [("H", j), ("CZ", j, k)],
    }
    return table[name]


def defect_unitary(name: DefectOperator | str, site: int, length: int) -> CliffordMap:
    """Tableau of a cataloged movement or fusion operator at ``site``."""
    name = DefectOperator(name)
    c = from_gate_sequence(defect_gates(name, site, length), length)
    return CliffordMap(length, c.x_images, c.z_images, f"{name.value}^{site}")


def global_duality(length: int) -> CliffordMap:
    """``U_D^{L-1} ... U_D^1``, the sequential Kramers-Wannier circuit."""
    out = CliffordMap.identity(length)
    for j in range(1, length):
        out = compose(defect_unitary(DefectOperator.U_D, j, length), out)
    return CliffordMap(length, out.x_images, out.z_images, "D_tilde")


def random_gate_sequence(length: int, depth: int, rng: np.random.Generator) -> list[Gate]:
    gates: list[Gate] = []
    for _ in range(depth):
        if length > 1 and rng.random() < 0.4:
            a, b = rng.choice(length, size=2, replace=False) + 1
            gates.append((str(rng.choice(TWO_GATES)), int(a), int(b)))
        else:
            gates.append((str(rng.choice(SINGLE_GATES)), int(rng.integers(1, length + 1))))
    return gates
