"""Fourier multiplier operators on periodic grids.

Conventions
-----------
Symbols are written for the analysis transform ``f^(xi) = int f(x) e^{+2 pi i x.xi} dx``
with synthesis ``e^{-2 pi i x.xi}``. Under numpy's FFT (which uses ``e^{-2 pi i}``
for analysis) the coefficient at frequency ``k`` is therefore multiplied by
``m(-k)``. With this choice the Hilbert symbol ``i sgn(xi)`` maps ``cos`` to ``sin``.

Every symbol is set to zero at the zero frequency and on Nyquist planes. The
Nyquist mode has no symmetric partner, so keeping it would break both
realness and anti-self-adjointness of the odd multipliers.
"""

from __future__ import annotations

import csv
import io
import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, DimensionError, DomainError, PreconditionError

__all__ = [
    "GridSpec",
    "GridFn",
    "MultiplierOp",
    "OPERATOR_KINDS",
    "symbol",
    "apply_operator",
    "refine",
    "cotlar_identity_residual",
    "rotations_reconstruct",
    "gv_multiplier",
    "gv_multiplier_literal",
    "orientation_calibration",
    "s1_symbol",
    "s1_block_sandwich",
]

ZERO_MEAN_RTOL = 1e-12


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on ``[0, L)^d`` with ``n`` points per axis."""

    d: int
    n: int
    L: float

    def __post_init__(self) -> None:
        if self.d not in (1, 2, 3, 4):
            raise DimensionError(f"grid dimension must be 1..4, got {self.d}")
        if self.n < 8 or self.n & (self.n - 1):
            raise ArgumentError(f"points per axis must be a power of two >= 8, got {self.n}")
        if not self.L > 0:
            raise ArgumentError(f"box length must be positive, got {self.L}")

    @property
    def h(self) -> float:
        return self.L / self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.d

    def axis(self) -> np.ndarray:
        return np.arange(self.n) * self.h

    def mesh(self) -> tuple[np.ndarray, ...]:
        ax = self.axis()
        return tuple(np.meshgrid(*([ax] * self.d), indexing="ij"))

    def frequencies(self) -> tuple[np.ndarray, ...]:
        """Frequency mesh ``k/L`` in numpy FFT order."""
        k = np.fft.fftfreq(self.n, d=self.h)
        return tuple(np.meshgrid(*([k] * self.d), indexing="ij"))

    def nyquist_mask(self) -> np.ndarray:
        idx = np.arange(self.n) == self.n // 2
        grids = np.meshgrid(*([idx] * self.d), indexing="ij")
        return np.logical_or.reduce(grids)


@dataclass
class GridFn:
    spec: GridSpec
    values: np.ndarray
    zero_mean: bool = field(init=False)

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != self.spec.shape:
            raise DimensionError(f"values shape {vals.shape} does not match grid {self.spec.shape}")
        if not np.all(np.isfinite(vals)):
            raise ArgumentError("grid values must be finite")
        self.values = vals
        scale = float(np.max(np.abs(vals))) if vals.size else 0.0
        self.zero_mean = abs(vals.mean()) <= ZERO_MEAN_RTOL * scale

    @classmethod
    def from_function(cls, spec: GridSpec, func) -> "GridFn":
        return cls(spec, func(*spec.mesh()))

    @property
    def real(self) -> np.ndarray:
        return self.values.real

    def is_real(self, rtol: float = 1e-12) -> bool:
        scale = float(np.max(np.abs(self.values))) if self.values.size else 0.0
        return float(np.max(np.abs(self.values.imag))) <= rtol * max(scale, 1e-300)

    def mean_removed(self) -> "GridFn":
        return GridFn(self.spec, self.values - self.values.mean())

    def to_bytes(self) -> bytes:
        head = struct.pack("<qqd", self.spec.d, self.spec.n, float(self.spec.L))
        body = np.empty(self.values.size * 2, dtype="<f8")
        flat = self.values.ravel()
        body[0::2] = flat.real
        body[1::2] = flat.imag
        return head + body.tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes) -> "GridFn":
        d, n, L = struct.unpack("<qqd", blob[:24])
        spec = GridSpec(int(d), int(n), float(L))
        body = np.frombuffer(blob[24:], dtype="<f8")
        if body.size != 2 * n**d:
            raise DimensionError("payload length does not match header")
        vals = (body[0::2] + 1j * body[1::2]).reshape(spec.shape)
        return cls(spec, vals)

    def to_csv(self) -> str:
        if self.spec.d != 1:
            raise DimensionError("CSV export is defined for d = 1 only")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "re", "im"])
        for x, v in zip(self.spec.axis(), self.values):
            w.writerow([repr(float(x)), repr(float(v.real)), repr(float(v.imag))])
        return buf.getvalue()


OPERATOR_KINDS = (
    "hilbert",
    "riesz_j",
    "second_riesz_jk",
    "complex_hilbert",
    "complex_hilbert_power_k",
    "beurling_ahlfors",
    "riesz_pair_square_jk",
    "directional",
)


@dataclass(frozen=True)
class MultiplierOp:
    """Operator identifier plus parameters.

    ``riesz_j`` takes ``(j,)``; ``second_riesz_jk`` and ``riesz_pair_square_jk``
    take ``(j, k)``; ``complex_hilbert_power_k`` takes ``(k,)``; ``directional``
    takes ``(phi,)``. Indices are 1-based.
    """

    kind: str
    params: tuple = ()

    def __post_init__(self) -> None:
        if self.kind not in OPERATOR_KINDS:
            raise ArgumentError(f"unknown operator kind {self.kind!r}")

    def min_dim(self) -> int:
        if self.kind == "riesz_j":
            return int(self.params[0])
        if self.kind in ("second_riesz_jk", "riesz_pair_square_jk"):
            return int(max(self.params[:2]))
        if self.kind in ("complex_hilbert", "complex_hilbert_power_k", "beurling_ahlfors", "directional"):
            return 2
        return 1


def _safe_ratio(num, den):
    out = np.zeros(np.broadcast(num, den).shape, dtype=np.result_type(num, den, float))
    np.divide(num, den, out=out, where=den != 0)
    return out


def symbol(op: MultiplierOp, xi: tuple[np.ndarray, ...]) -> np.ndarray:
    """Evaluate the multiplier at frequency arrays ``xi = (xi_1, ..., xi_d)``; zero at the origin."""
    d = len(xi)
    kind, prm = op.kind, op.params
    if op.min_dim() > d or (kind == "hilbert" and d != 1) or (kind == "directional" and d != 2):
        raise DimensionError(f"{kind}{tuple(prm)} is not defined in dimension {d}")
    norm = np.sqrt(sum(x * x for x in xi))
    if kind == "hilbert":
        return 1j * np.sign(xi[0])
    if kind == "riesz_j":
        j = int(prm[0])
        return 1j * _safe_ratio(xi[j - 1], norm)
    if kind == "second_riesz_jk":
        j, k = int(prm[0]), int(prm[1])
        return -_safe_ratio(xi[j - 1] * xi[k - 1], norm * norm).astype(complex)
    if kind == "riesz_pair_square_jk":
        j, k = int(prm[0]), int(prm[1])
        return _safe_ratio((1j * xi[j - 1] - xi[k - 1]) ** 2, (norm * norm).astype(complex))
    ch = 1j * _safe_ratio(xi[0] + 1j * xi[1], norm.astype(complex))
    if kind == "complex_hilbert":
        return ch
    if kind == "complex_hilbert_power_k":
        return ch ** int(prm[0])
    if kind == "beurling_ahlfors":
        return -(ch**2)
    # directional
    phi = float(prm[0])
    dot = xi[0] * math.cos(phi) + xi[1] * math.sin(phi)
    dot = np.where(np.abs(dot) <= 1e-12 * norm, 0.0, dot)
    return 1j * np.sign(dot)


def _fft_symbol(op: MultiplierOp, spec: GridSpec) -> np.ndarray:
    freqs = spec.frequencies()
    m = symbol(op, tuple(-k for k in freqs)).astype(complex)
    m[spec.nyquist_mask()] = 0.0
    return m


def _apply_symbol(m: np.ndarray, f: GridFn) -> GridFn:
    return GridFn(f.spec, np.fft.ifftn(m * np.fft.fftn(f.values)))


def apply_operator(op: MultiplierOp, f: GridFn) -> GridFn:
    """Apply the multiplier ``op`` to ``f`` (mean and Nyquist modes are removed)."""
    return _apply_symbol(_fft_symbol(op, f.spec), f)


def refine(f: GridFn, factor: int = 2) -> GridFn:
    """Trigonometric interpolation of ``f`` onto a grid ``factor`` times finer.

    Exact for grid functions without Nyquist content; used so that quadratic
    expressions of band-limited inputs are free of aliasing.
    """
    spec = f.spec
    if spec.d != 1:
        raise DimensionError("refinement is implemented for d = 1")
    n, big = spec.n, spec.n * factor
    coef = np.fft.fft(f.values)
    padded = np.zeros(big, dtype=complex)
    half = n // 2
    padded[:half] = coef[:half]
    padded[big - half + 1:] = coef[half + 1:]
    return GridFn(GridSpec(1, big, spec.L), np.fft.ifft(padded) * factor)


def _check_band_limit(f: GridFn, fraction: float = 1.0 / 3.0, rtol: float = 1e-10) -> None:
    coef = np.abs(np.fft.fft(f.values))
    k = np.abs(np.fft.fftfreq(f.spec.n, d=1.0 / f.spec.n))
    top = float(coef.max()) if coef.size else 0.0
    outside = coef[k > fraction * f.spec.n]
    if outside.size and float(outside.max()) > rtol * max(top, 1e-300):
        raise PreconditionError(
            f"input is not band-limited to |k| <= n/3 (max coefficient outside {outside.max():.3e})"
        )


HILBERT = MultiplierOp("hilbert")


def cotlar_identity_residual(f: GridFn, allow_mean: bool = False) -> tuple[float, float]:
    """Pointwise defect of ``(Hf)^2 = 2H(f Hf) + f^2`` on the grid.

    Products are formed on a grid twice as fine, so quadratic terms of an
    input band-limited to ``|k| <= n/3`` are computed without aliasing.

    Parameters
    ----------
    f : GridFn
        Real, band-limited, one-dimensional.
    allow_mean : bool
        For zero-mean input the identity holds exactly on the torus. With
        ``allow_mean=True`` a nonzero mean ``c`` is accepted; ``H`` removes it
        and the identity then holds up to the constant ``-c^2``.

    Returns
    -------
    max_residual : float
        ``max |g - mean(g)|`` with ``g = (Hf)^2 - 2H(f Hf) - f^2``.
    constant_part : float
        ``mean(g)``.
    """
    spec = f.spec
    if spec.d != 1:
        raise DimensionError("the Cotlar identity check is one-dimensional")
    if not f.is_real():
        raise PreconditionError("input must be real")
    if not f.zero_mean and not allow_mean:
        raise PreconditionError(
            "input must have zero mean; subtract the mean first, or pass allow_mean=True "
            "to accept a constant defect equal to minus the squared mean"
        )
    _check_band_limit(f)
    fine = refine(GridFn(spec, f.values.real))
    fv = fine.values.real
    hf = apply_operator(HILBERT, fine).values.real
    cross = apply_operator(HILBERT, GridFn(fine.spec, fv * hf)).values.real
    g = hf * hf - 2.0 * cross - fv * fv
    mean = float(g.mean())
    return float(np.max(np.abs(g - mean))), mean


def rotations_reconstruct(f: GridFn, M: int) -> tuple[GridFn, float]:
    """Rebuild ``R_1 + i R_2`` from directional Hilbert transforms.

    Evaluates ``(pi/2)(1/M) sum_m e^{i phi_m} H_{phi_m} f`` on ``phi_m = 2 pi m/M``.
    The directional symbols are summed first and applied once, which is the
    same linear map. Returns the reconstruction and its relative max-norm
    deviation from the complex Hilbert transform of ``f``.
    """
    if f.spec.d != 2:
        raise DimensionError("rotation reconstruction is two-dimensional")
    if int(M) != M or M < 8:
        raise ArgumentError(f"need at least 8 quadrature angles, got {M}")
    if not f.zero_mean:
        raise PreconditionError("input must have zero mean")
    total = np.zeros(f.spec.shape, dtype=complex)
    for m in range(int(M)):
        phi = 2.0 * math.pi * m / M
        total += np.exp(1j * phi) * _fft_symbol(MultiplierOp("directional", (phi,)), f.spec)
    total *= (math.pi / 2.0) / M
    recon = _apply_symbol(total, f)
    target = apply_operator(MultiplierOp("complex_hilbert"), f).values
    scale = float(np.max(np.abs(target)))
    err = float(np.max(np.abs(recon.values - target))) / scale if scale > 0 else 0.0
    return recon, err


def _check_xi(xi) -> tuple[np.ndarray, float]:
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    norm = float(np.linalg.norm(xi))
    if norm == 0:
        raise DomainError("projection multipliers are undefined at xi = 0")
    return xi, norm


def gv_multiplier(extension: str, a: np.ndarray, xi) -> complex:
    """Closed-form multiplier of the projected martingale transform by ``a``.

    ``poisson``: harmonic extension to the upper half-space; ``a`` is
    ``(d+1) x (d+1)`` acting on the gradient ordered as (vertical, x_1, ..., x_d).
    ``heat``: heat extension; ``a`` is ``d x d`` and may be complex.

    Orientation is fixed by requiring ``R_j -> i xi_j/|xi|`` (poisson) and
    ``A^{(j,k)} + i B^{(j,k)} -> ((i xi_j - xi_k)/|xi|)^2`` (heat); in both cases the
    result is ``conj(a v) . v`` for the relevant symbol vector ``v``.
    """
    xi, norm = _check_xi(xi)
    a = np.asarray(a)
    d = xi.size
    if extension == "poisson":
        if a.shape != (d + 1, d + 1):
            raise ArgumentError(f"poisson multiplier needs a {(d + 1, d + 1)} matrix, got {a.shape}")
        w = np.concatenate(([-norm], 1j * xi))
        return complex(np.vdot(a @ w, w) / (2.0 * norm * norm))
    if extension == "heat":
        if a.shape != (d, d):
            raise ArgumentError(f"heat multiplier needs a {(d, d)} matrix, got {a.shape}")
        return complex(-np.vdot(a @ xi, xi) / (norm * norm))
    raise ArgumentError(f"unknown extension {extension!r}")


def gv_multiplier_literal(extension: str, a: np.ndarray, xi) -> complex:
    """Unconjugated orientation ``(a v) . conj(v)``, kept for the calibration record."""
    xi, norm = _check_xi(xi)
    a = np.asarray(a)
    if extension == "poisson":
        w = np.concatenate(([-norm], 1j * xi))
        return complex(np.dot(a @ w, np.conj(w)) / (2.0 * norm * norm))
    if extension == "heat":
        return complex(-np.dot(a @ xi, xi) / (norm * norm))
    raise ArgumentError(f"unknown extension {extension!r}")


def orientation_calibration(xi=(0.3, -0.7, 0.5)) -> list[dict]:
    """Compare both orientations on the reference cases at a sample frequency."""
    from .matrices import build_matrix

    xi = np.asarray(xi, dtype=float)
    norm = float(np.linalg.norm(xi))
    d = xi.size
    cases = [
        ("poisson", build_matrix("Rj", [1], d + 1), 1j * xi[0] / norm, "R_1 -> i xi_1/|xi|"),
        ("poisson", build_matrix("Rj_half1", [2], d + 1), 1j * xi[1] / (2 * norm), "R_2 half -> i xi_2/(2|xi|)"),
        ("poisson", build_matrix("Rjk_tilde", [1, 2], d + 1), 0.0, "R~_(1,2) -> 0"),
        ("heat", build_matrix("AB_pair_A", [1, 2], d) + 1j * build_matrix("AB_pair_B", [1, 2], d),
         ((1j * xi[0] - xi[1]) / norm) ** 2, "A+iB -> ((i xi_1 - xi_2)/|xi|)^2"),
    ]
    out = []
    for ext, mat, target, label in cases:
        cal = gv_multiplier(ext, mat, xi)
        lit = gv_multiplier_literal(ext, mat, xi)
        out.append({
            "case": label,
            "extension": ext,
            "target": [float(np.real(target)), float(np.imag(target))],
            "calibrated_residual": float(abs(cal - target)),
            "unconjugated_residual": float(abs(lit - target)),
        })
    return out


def s1_symbol(xi) -> np.ndarray:
    """``(xi xi^T - |xi|^2 I)/|xi|^2``."""
    xi, norm = _check_xi(xi)
    return (np.outer(xi, xi) - norm * norm * np.eye(xi.size)) / (norm * norm)


def s1_block_sandwich(xi, m: int) -> tuple[complex, complex]:
    """Recover the heat multiplier of block ``C_m`` from the ``S_1`` symbol.

    With the isotropic vector ``q = e_{2m-1} + i e_{2m}`` one has ``q^T q = 0``, so
    ``-q^T S_1 q = -(q.xi)^2/|xi|^2``, which is the heat multiplier of ``C_m``.
    Returns ``(sandwich, heat_multiplier)``.
    """
    from .matrices import build_matrix

    xi, _ = _check_xi(xi)
    d = xi.size
    if d % 2:
        raise DimensionError("block sandwich needs an even dimension")
    if not 1 <= m <= d // 2:
        raise ArgumentError(f"block index {m} outside [1, {d // 2}]")
    q = np.zeros(d, dtype=complex)
    q[2 * m - 2], q[2 * m - 1] = 1.0, 1j
    sandwich = complex(-(q @ s1_symbol(xi) @ q))
    heat = gv_multiplier("heat", build_matrix("Cm", [m], d), xi)
    return sandwich, heat
