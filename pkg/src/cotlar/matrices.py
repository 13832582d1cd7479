"""Small structured matrices and their algebraic predicates.

Indices in family parameters are 1-based and coordinate 1 is the vertical
(extension) variable, so ``Rj`` with ``j = 1`` couples coordinates 1 and 2.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ArgumentError, DimensionError, DomainError

__all__ = [
    "FAMILIES",
    "build_matrix",
    "StructureReport",
    "verify_structure",
    "euclidean_norm",
    "decompose_hilbert",
    "riesz_multiplier_defect",
    "matrix_to_json",
    "matrix_from_json",
]

TOL = 1e-12

FAMILIES = (
    "H2", "H4_j", "H2n", "Rj", "Rj_half1", "Rj_half2", "Rjk", "Rjk_half1",
    "Rjk_half2", "Rjk_tilde", "AB_pair_A", "AB_pair_B", "A0", "B0", "Cm", "C_full",
)

_H4 = {
    1: [(1, 2, 1), (2, 1, -1), (3, 4, 1), (4, 3, -1)],
    2: [(1, 3, 1), (2, 4, -1), (3, 1, -1), (4, 2, 1)],
    # inner block sign chosen so that <H4^j v, H4^k v> = 0 for every pair; the
    # opposite sign is also a Cotlar matrix with the same first row and column
    # but fails orthogonality against H4^1 and H4^2
    3: [(1, 4, 1), (2, 3, 1), (3, 2, -1), (4, 1, -1)],
}


def _entries(dim: int, triples, dtype=float) -> np.ndarray:
    a = np.zeros((dim, dim), dtype=dtype)
    for i, j, v in triples:
        a[i - 1, j - 1] = v
    return a


def _index(params, count: int, family: str) -> list[int]:
    if len(params) != count:
        raise ArgumentError(f"{family} takes {count} index parameter(s), got {list(params)}")
    out = []
    for p in params:
        if int(p) != p:
            raise ArgumentError(f"{family}: indices must be integers, got {p}")
        out.append(int(p))
    return out


def _in_range(family: str, idx: int, lo: int, hi: int) -> None:
    if not lo <= idx <= hi:
        raise ArgumentError(f"{family}: index {idx} outside [{lo}, {hi}]")


def build_matrix(family: str, params=(), dim: int | None = None) -> np.ndarray:
    """Build a named matrix.

    Parameters
    ----------
    family : str
        One of ``FAMILIES``.
    params : sequence of int
        1-based indices: ``j`` for ``H4_j``, ``Rj*`` and ``Cm`` (block index);
        ``(j, k)`` for ``Rjk*`` and ``AB_pair_*``.
    dim : int
        Matrix size. ``Rj``/``Rjk`` families act on ``R^{d+1}`` so ``dim = d + 1``.
        Fixed-size families (``H2``, ``H4_j``, ``A0``, ``B0``) ignore it when omitted.

    Returns
    -------
    ndarray
        Real matrix with entries in {-1, 0, 1}, or complex for ``Cm``/``C_full``.
    """
    if family not in FAMILIES:
        raise ArgumentError(f"unknown matrix family {family!r}")
    params = list(params)
    fixed = {"H2": 2, "H4_j": 4, "A0": 2, "B0": 2}
    if family in fixed:
        if dim is not None and dim != fixed[family]:
            raise DimensionError(f"{family} is {fixed[family]}x{fixed[family]}, got dim={dim}")
        dim = fixed[family]
    if dim is None or int(dim) != dim or dim < 1:
        raise ArgumentError(f"{family}: dim must be a positive integer, got {dim}")
    dim = int(dim)

    if family == "H2":
        _index(params, 0, family)
        return _entries(2, [(1, 2, 1), (2, 1, -1)])
    if family == "H4_j":
        (j,) = _index(params, 1, family)
        _in_range(family, j, 1, 3)
        return _entries(4, _H4[j])
    if family == "H2n":
        _index(params, 0, family)
        if dim % 2:
            raise DimensionError(f"H2n needs an even dimension, got {dim}")
        triples = []
        for b in range(dim // 2):
            triples += [(2 * b + 1, 2 * b + 2, 1), (2 * b + 2, 2 * b + 1, -1)]
        return _entries(dim, triples)
    if family in ("Rj", "Rj_half1", "Rj_half2"):
        (j,) = _index(params, 1, family)
        _in_range(family, j, 1, dim - 1)
        upper, lower = (1, j + 1, 1), (j + 1, 1, -1)
        parts = {"Rj": [upper, lower], "Rj_half1": [upper], "Rj_half2": [lower]}
        return _entries(dim, parts[family])
    if family in ("Rjk", "Rjk_half1", "Rjk_half2", "Rjk_tilde"):
        j, k = _index(params, 2, family)
        _in_range(family, j, 1, dim - 1)
        _in_range(family, k, 1, dim - 1)
        if j == k:
            raise ArgumentError(f"{family}: indices must differ, got j = k = {j}")
        first, second = (k + 1, j + 1, -1), (j + 1, k + 1, -1)
        parts = {
            "Rjk": [first, second],
            "Rjk_half1": [first],
            "Rjk_half2": [second],
            "Rjk_tilde": [(j + 1, k + 1, 1), (k + 1, j + 1, -1)],
        }
        return _entries(dim, parts[family])
    if family in ("AB_pair_A", "AB_pair_B"):
        j, k = _index(params, 2, family)
        _in_range(family, j, 1, dim)
        _in_range(family, k, 1, dim)
        if j == k:
            raise ArgumentError(f"{family}: indices must differ, got j = k = {j}")
        if family == "AB_pair_A":
            return _entries(dim, [(j, j, 1), (k, k, -1)])
        return _entries(dim, [(j, k, -1), (k, j, -1)])
    if family == "A0":
        return _entries(2, [(1, 1, 1), (2, 2, -1)])
    if family == "B0":
        return _entries(2, [(1, 2, -1), (2, 1, -1)])

    # Cm and C_full: copies of the 2x2 block A0 + i B0
    if dim % 2:
        raise DimensionError(f"{family} needs an even dimension, got {dim}")
    block = [(1, 1, 1), (1, 2, -1j), (2, 1, -1j), (2, 2, -1)]
    if family == "Cm":
        (m,) = _index(params, 1, family)
        _in_range(family, m, 1, dim // 2)
        blocks = [m]
    else:
        _index(params, 0, family)
        blocks = range(1, dim // 2 + 1)
    triples = [(2 * (b - 1) + i, 2 * (b - 1) + j, v) for b in blocks for i, j, v in block]
    return _entries(dim, triples, dtype=complex)


def euclidean_norm(a: np.ndarray, rtol: float = 1e-10, max_iter: int = 10_000) -> float:
    """Largest singular value by power iteration on ``A^H A``."""
    a = np.asarray(a)
    if a.ndim != 2:
        raise DimensionError("expected a matrix")
    gram = a.conj().T @ a
    if not np.any(gram):
        return 0.0
    rng = np.random.default_rng(0x5EED)
    v = rng.standard_normal(a.shape[1]) + 1j * rng.standard_normal(a.shape[1])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = gram @ v
        new = float(np.real(np.vdot(v, w)))
        nw = np.linalg.norm(w)
        if nw == 0:
            return 0.0
        v = w / nw
        if abs(new - lam) <= rtol * abs(new):
            lam = new
            break
        lam = new
    return float(np.sqrt(max(lam, 0.0)))


@dataclass
class StructureReport:
    skew: bool
    cotlar: bool
    square_is_minus_identity: bool
    euclidean_norm: float
    residuals: dict = field(default_factory=dict)
    conformal_pair: bool | None = None
    mutual_orthogonality: bool | None = None
    partner_norm: float | None = None

    def as_dict(self) -> dict:
        return asdict(self)


def _max_abs(a: np.ndarray) -> float:
    return float(np.max(np.abs(a))) if a.size else 0.0


def verify_structure(a: np.ndarray, b: np.ndarray | None = None, spot_checks: int = 100,
                     seed: int = 2024) -> StructureReport:
    """Decide skewness, the Cotlar property and, with ``b``, the conformal-pair relations.

    ``Av . v = 0`` for all real ``v`` is decided from ``A + A^T = 0``; a batch of
    random vectors is also pushed through the quadratic form as a cross-check.
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ArgumentError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    res = {
        "skew": _max_abs(a + a.T),
        "square_plus_identity": _max_abs(a @ a + np.eye(n)),
    }
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((spot_checks, n))
    quad = np.einsum("ij,kj,ki->k", a, v, v)
    res["quadratic_form_spot"] = float(np.max(np.abs(quad) / np.einsum("ki,ki->k", v, v)))
    skew = res["skew"] <= TOL
    square = res["square_plus_identity"] <= TOL
    report = StructureReport(
        skew=skew,
        cotlar=skew and square,
        square_is_minus_identity=square,
        euclidean_norm=euclidean_norm(a),
        residuals=res,
    )
    if b is not None:
        b = np.asarray(b)
        if b.shape != a.shape:
            raise ArgumentError(f"pair shapes differ: {a.shape} vs {b.shape}")
        res["gram_difference"] = _max_abs(a.T @ a - b.T @ b)
        res["cross_symmetric_part"] = _max_abs(a.T @ b + b.T @ a)
        report.mutual_orthogonality = res["cross_symmetric_part"] <= TOL
        report.conformal_pair = report.mutual_orthogonality and res["gram_difference"] <= TOL
        report.partner_norm = euclidean_norm(b)
    return report


def decompose_hilbert(n: int) -> list[np.ndarray]:
    """Split ``H_{2n}`` into ``R_1`` plus the elementary skew pieces ``R~_{(2k, 2k+1)}``."""
    if int(n) != n or n < 1:
        raise ArgumentError(f"n must be a positive integer, got {n}")
    dim = 2 * int(n)
    parts = [build_matrix("Rj", [1], dim)]
    for k in range(1, int(n)):
        parts.append(build_matrix("Rjk_tilde", [2 * k, 2 * k + 1], dim))
    return parts


def riesz_multiplier_defect(j: int, xi, eta) -> complex:
    """``(m(xi+eta) - m(xi)) (m(-xi) - m(eta))`` for ``m(z) = i z_j/|z|``.

    A multiplier satisfying the Cotlar identity would make this vanish for all
    pairs; a nonzero value is a witness that ``R_j`` does not.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    if xi.shape != eta.shape:
        raise DimensionError("xi and eta must have the same length")
    if not 1 <= j <= xi.size:
        raise ArgumentError(f"coordinate index {j} outside [1, {xi.size}]")

    def m(z):
        nz = np.linalg.norm(z)
        if nz == 0:
            raise DomainError("multiplier undefined at the origin")
        return 1j * z[j - 1] / nz

    return complex((m(xi + eta) - m(xi)) * (m(-xi) - m(eta)))


def matrix_to_json(a: np.ndarray) -> str:
    a = np.asarray(a)
    return json.dumps({
        "rows": int(a.shape[0]),
        "cols": int(a.shape[1]),
        "real_entries": np.real(a).ravel().tolist(),
        "imag_entries": np.imag(a).ravel().tolist(),
    })


def matrix_from_json(text: str) -> np.ndarray:
    obj = json.loads(text)
    shape = (obj["rows"], obj["cols"])
    re = np.asarray(obj["real_entries"], dtype=float).reshape(shape)
    im = np.asarray(obj["imag_entries"], dtype=float).reshape(shape)
    return re + 1j * im if np.any(im) else re
