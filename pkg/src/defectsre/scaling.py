"""Finite-size scaling fits of SRE data.

The model is a linear combination of basis functions of the system size, chosen from
``L`` (extensive density), ``lnL`` (universal logarithm), ``const`` and ``invL``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

BASIS_TAGS = ("L", "lnL", "const", "invL")


class SingularDesignError(ValueError):
    """The design matrix is rank deficient or has too few rows."""


@dataclass(frozen=True)
class FitResult:
    model: tuple[str, ...]
    coefficients: np.ndarray
    std_errors: np.ndarray
    residual_norm: float
    data_range: tuple[int, ...]
    residuals: np.ndarray = field(repr=False)
    shift: int = 0

    def coef(self, tag: str) -> float:
        return float(self.coefficients[self.model.index(tag)])

    def err(self, tag: str) -> float:
        return float(self.std_errors[self.model.index(tag)])

    @property
    def constant_term(self) -> float:
        """``c`` in ``M = m (L - shift) - c + ...``."""
        return -self.coef("const")

    def to_dict(self) -> dict:
        return {
            "model": list(self.model),
            "coefficients": {t: float(c) for t, c in zip(self.model, self.coefficients)},
            "std_errors": {t: float(e) for t, e in zip(self.model, self.std_errors)},
            "residual_norm": float(self.residual_norm),
            "window": list(self.data_range),
            "shift": self.shift,
        }


def _column(tag: str, L: np.ndarray) -> np.ndarray:
    if tag == "L":
        return L
    if tag == "lnL":
        return np.log(L)
    if tag == "const":
        return np.ones_like(L)
    if tag == "invL":
        return 1.0 / L
    raise ValueError(f"unknown basis tag {tag!r}; choose from {BASIS_TAGS}")


def design_matrix(sizes: Sequence[float], basis: Sequence[str], shift: int = 0) -> np.ndarray:
    L = np.asarray(sizes, dtype=float) - shift
    if np.any(L <= 0):
        raise ValueError("effective sizes must be positive")
    return np.column_stack([_column(t, L) for t in basis])


def fit(data: Iterable[tuple[float, float]], basis: Sequence[str] = ("L", "const", "invL"),
        shift: int = 0) -> FitResult:
    """Ordinary least squares through a QR factorization.

    ``shift`` replaces ``L`` by ``L - shift`` in every size-dependent column.
    """
    pts = sorted((float(L), float(m)) for L, m in data)
    basis = tuple(basis)
    if len(set(basis)) != len(basis):
        raise ValueError("repeated basis tag")
    sizes = [p[0] for p in pts]
    if len(set(sizes)) != len(sizes):
        raise ValueError("sizes must be distinct")
    if len(pts) < len(basis) + 1:
        raise SingularDesignError(
            f"{len(pts)} points cannot constrain {len(basis)} coefficients with a residual")
    a = design_matrix(sizes, basis, shift)
    y = np.array([p[1] for p in pts])
    q, r = np.linalg.qr(a)
    diag = np.abs(np.diag(r))
    if diag.min() < 1e-10 * max(diag.max(), 1.0):
        raise SingularDesignError("design matrix is rank deficient")
    coeffs = np.linalg.solve(r, q.T @ y)
    resid = y - a @ coeffs
    dof = len(pts) - len(basis)
    sigma2 = float(resid @ resid) / dof
    rinv = np.linalg.inv(r)
    cov = sigma2 * (rinv @ rinv.T)
    return FitResult(basis, coeffs, np.sqrt(np.maximum(np.diag(cov), 0.0)),
                     float(np.linalg.norm(resid)), tuple(int(round(s)) for s in sizes),
                     resid, shift)


def two_point_log(data: Iterable[tuple[float, float]],
                  sizes: Sequence[int] | None = None) -> list[tuple[int, float]]:
    """``(L, 2 M(L/2) - M(L))`` for even ``L`` whose half is also present.

    For ``M = m L + g lnL + c`` this equals ``g lnL + (c - g ln 4)``: the extensive
    term cancels and the slope against ``lnL`` is ``g`` itself.
    """
    table = {int(round(L)): float(m) for L, m in data}
    if sizes is None:
        sizes = [L for L in sorted(table) if L % 2 == 0 and L // 2 in table]
        if not sizes:
            raise ValueError("no size has its L/2 partner in the data")
    out = []
    for L in sizes:
        if L % 2 or L not in table or L // 2 not in table:
            raise ValueError(f"size {L} lacks its L/2 partner or is odd")
        out.append((L, 2.0 * table[L // 2] - table[L]))
    return out


def log_coefficient(data: Iterable[tuple[float, float]],
                    sizes: Sequence[int] | None = None) -> FitResult:
    """Fit the two-point combination to ``g lnL + const``; ``coef('lnL')`` is ``g``."""
    pts = two_point_log(data, sizes)
    if len(pts) < 3:
        # two points determine the line exactly; report zero uncertainty
        if len(pts) != 2:
            raise SingularDesignError("need at least two two-point values")
        (l1, y1), (l2, y2) = pts
        g = (y2 - y1) / (math.log(l2) - math.log(l1))
        c = y1 - g * math.log(l1)
        return FitResult(("lnL", "const"), np.array([g, c]), np.zeros(2), 0.0,
                         (l1, l2), np.zeros(2))
    return fit(pts, ("lnL", "const"))


def extract_defect_constant(data: Iterable[tuple[float, float]], effective_shift: int,
                            basis: Sequence[str] = ("L", "const")) -> FitResult:
    """Fit ``M = m (L - shift) - c [+ ...]``; the constant is ``result.constant_term``."""
    if effective_shift not in (0, 1):
        raise ValueError("effective_shift must be 0 or 1")
    return fit(data, basis, shift=effective_shift)


# ---------------------------------------------------------------------------
# CSV


def read_sre_csv(path: str | Path, alpha: float | None = None) -> list[tuple[int, float]]:
    """``(L, sre)`` rows with status ok (or no status column), optionally for one alpha."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(line for line in fh if not line.startswith("#"))
        for row in reader:
            if row.get("status", "ok") not in ("ok", ""):
                continue
            if alpha is not None and float(row["alpha"]) != alpha:
                continue
            rows.append((int(row["L"]), float(row["sre"])))
    return rows


def write_sre_csv(path: str | Path, rows: Iterable[tuple[int, float, float]]) -> None:
    """Minimal ``L,alpha,sre`` file."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["L", "alpha", "sre"])
        for L, alpha, m in rows:
            w.writerow([L, alpha, repr(float(m))])
