"""Sharp constants for Hilbert, Riesz and martingale-transform inequalities.

Every Gamma-function ratio is evaluated through ``gammaln`` and exponentiated
last, so the formulas stay finite for exponents up to 1e8.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import optimize
from scipy.special import gammaln

from .errors import ArgumentError, DomainError

__all__ = [
    "PNorm",
    "ConstantsRow",
    "KINDS",
    "sharp_constant",
    "constants_row",
    "q_series",
    "Q_CONSTANT",
    "h_function",
    "find_cutoff",
    "crossover_function",
    "crossover_root",
    "inequality_audit",
    "rows_to_csv",
]

LOG_PI = math.log(math.pi)
LOG_2 = math.log(2.0)

# Formula tags carried into CSV output; they name the formula, not a source.
FORMULA_IDS = {
    "burkholder": "p*-1",
    "pichorides": "cot(pi/(2p*))",
    "gaussian_moment": "(2^(p/2) G((p+1)/2)/sqrt(pi))^(1/p)",
    "sphere_moment": "(G(d/2) G((p+1)/2)/(sqrt(pi) G((d+p)/2)))^(1/p)",
    "khintchine": "(sqrt(pi)/(2^(p/2) G((p+1)/2)))^(1/p) for p<=2, else 1",
    "kahane_alpha": "G((p+2)/2)^(1/p)",
    "dragicevic_D": "G(1/p) G(1/q+1/2)/(G(1/q) G(1/p+1/2))",
    "Q": "1-sum_{n>=2} 1/(n(n-1)n!) = e-2",
    "h": "(1/p)((p+3)pi/2)^(1/(2p)) (p-Q)/Q",
}

KINDS = tuple(k for k in FORMULA_IDS if k not in ("Q", "h"))

# Moment-type kinds are finite for every p > 0; the operator constants need p > 1.
_MOMENT_KINDS = {"gaussian_moment", "sphere_moment", "kahane_alpha"}


@dataclass(frozen=True)
class PNorm:
    """An exponent together with its conjugate and ``p* = max(p, q)``."""

    p: float

    def __post_init__(self) -> None:
        if not self.p > 1:
            raise DomainError(f"exponent must exceed 1, got {self.p}")

    @property
    def q(self) -> float:
        return self.p / (self.p - 1.0)

    @property
    def p_star(self) -> float:
        return max(self.p, self.q)


@dataclass(frozen=True)
class ConstantsRow:
    kind: str
    p: float
    d: int | None
    value: float
    formula_id: str

    def as_dict(self) -> dict:
        return asdict(self)


def _p_star(p: float) -> float:
    return PNorm(p).p_star


def _check_p(kind: str, p: float) -> None:
    if not math.isfinite(p):
        raise DomainError(f"{kind}: exponent must be finite, got {p}")
    lower_ok = p > 0 if kind in _MOMENT_KINDS else p > 1
    if not lower_ok:
        bound = "0" if kind in _MOMENT_KINDS else "1"
        raise DomainError(f"{kind}: exponent must exceed {bound}, got {p}")


def _log_gaussian_abs_moment(p: float) -> float:
    # log E|N(0,1)|^p
    return 0.5 * p * LOG_2 + gammaln((p + 1.0) / 2.0) - 0.5 * LOG_PI


def sharp_constant(kind: str, p: float, d: int | None = None) -> float:
    """Evaluate a named constant at exponent ``p``.

    Parameters
    ----------
    kind : str
        One of ``KINDS``.
    p : float
        Exponent. Operator constants need ``p > 1``; the moment kinds
        (``gaussian_moment``, ``sphere_moment``, ``kahane_alpha``) accept any
        ``p > 0`` so that values such as ``gaussian_moment(1)`` are available.
    d : int, optional
        Dimension, required for ``sphere_moment``.

    Returns
    -------
    float
    """
    if kind not in FORMULA_IDS or kind in ("Q", "h"):
        raise ArgumentError(f"unknown constant kind {kind!r}")
    _check_p(kind, p)

    if kind == "burkholder":
        return _p_star(p) - 1.0
    if kind == "pichorides":
        return 1.0 / math.tan(math.pi / (2.0 * _p_star(p)))
    if kind == "gaussian_moment":
        return math.exp(_log_gaussian_abs_moment(p) / p)
    if kind == "sphere_moment":
        if d is None:
            raise ArgumentError("sphere_moment needs the dimension d")
        if int(d) != d or d < 1:
            raise ArgumentError(f"dimension must be a positive integer, got {d}")
        log_val = (
            gammaln(d / 2.0)
            + gammaln((p + 1.0) / 2.0)
            - 0.5 * LOG_PI
            - gammaln((d + p) / 2.0)
        )
        return math.exp(log_val / p)
    if kind == "khintchine":
        if p >= 2.0:
            return 1.0
        return math.exp(-_log_gaussian_abs_moment(p) / p)
    if kind == "kahane_alpha":
        return math.exp(gammaln((p + 2.0) / 2.0) / p)
    # dragicevic_D
    q = PNorm(p).q
    log_val = (
        gammaln(1.0 / p)
        + gammaln(1.0 / q + 0.5)
        - gammaln(1.0 / q)
        - gammaln(1.0 / p + 0.5)
    )
    return math.exp(log_val)


def constants_row(kind: str, p: float, d: int | None = None) -> ConstantsRow:
    value = sharp_constant(kind, p, d)
    return ConstantsRow(kind, float(p), d if kind == "sphere_moment" else None, value, FORMULA_IDS[kind])


def q_series(n_terms: int) -> tuple[float, float]:
    """Partial sum ``1 - sum_{n=2}^{n_terms+1} (n-2)!/(n!)^2`` and its limit ``e - 2``.

    The term is written as ``1/(n(n-1)n!)`` and computed in log space so it
    underflows to zero instead of overflowing.
    """
    if int(n_terms) != n_terms or n_terms < 1:
        raise ArgumentError(f"n_terms must be a positive integer, got {n_terms}")
    terms = [
        math.exp(-(math.log(n) + math.log(n - 1) + math.lgamma(n + 1)))
        for n in range(2, int(n_terms) + 2)
    ]
    return 1.0 - math.fsum(terms), math.e - 2.0


Q_CONSTANT = math.e - 2.0


def h_function(p: float) -> float:
    """``(1/p)((p+3)pi/2)^(1/(2p)) (p-Q)/Q`` with ``Q = e - 2``, for ``p > 2``."""
    if not p > 2:
        raise DomainError(f"h is defined for p > 2, got {p}")
    log_growth = math.log((p + 3.0) * math.pi / 2.0) / (2.0 * p)
    return math.exp(log_growth) * (p - Q_CONSTANT) / (Q_CONSTANT * p)


def _bisect(f, lo: float, hi: float, tol: float) -> float:
    try:
        return float(optimize.bisect(f, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=200))
    except ValueError:
        raise DomainError(f"no sign change on [{lo}, {hi}]") from None


CUTOFF_BRACKET = (4.0, 1.0e6)


def find_cutoff(target: float) -> dict:
    """Solve ``h(p) = target`` on ``[4, 1e6]`` by bisection to 1e-6.

    Returns a dict with the root and the bracketing pair of sample points
    ``(floor(root), ceil(root))`` with their ``h`` values, so that any
    printed bracket can be checked against the computed root.
    """
    lo, hi = CUTOFF_BRACKET
    h_lo, h_hi = h_function(lo), h_function(hi)
    if not (h_hi < target < h_lo):
        raise DomainError(
            f"target {target} outside the range ({h_hi}, {h_lo}) of h on [{lo}, {hi}]"
        )
    root = _bisect(lambda p: h_function(p) - target, lo, hi, 1e-6)
    left, right = math.floor(root), math.ceil(root)
    return {
        "root": root,
        "bracket": (lo, hi),
        "integer_bracket": (left, right),
        "h_at_integer_bracket": (h_function(max(left, 4)), h_function(right)),
    }


def crossover_function(p: float) -> float:
    """``(p - 1) - sqrt(2) cot(pi/(2p))``."""
    return (p - 1.0) - math.sqrt(2.0) / math.tan(math.pi / (2.0 * p))


def crossover_root(n_check: int = 50) -> float:
    """Root of :func:`crossover_function` on ``(2, 100)`` by bisection to 1e-8.

    The sign pattern (negative left of the root, positive right of it) is
    checked at ``n_check`` sample points on each side.
    """
    root = _bisect(crossover_function, 2.0, 100.0, 1e-8)
    left = np.linspace(2.0, root - 1e-6, n_check)
    right = np.linspace(root + 1e-6, 100.0, n_check)
    if not all(crossover_function(x) < 0 for x in left):
        raise AssertionError("crossover function is not negative left of its root")
    if not all(crossover_function(x) > 0 for x in right):
        raise AssertionError("crossover function is not positive right of its root")
    return root


def _audit_row(check: str, p: float, lhs: float, rhs: float, ok: bool, note: str = "") -> dict:
    return {"check": check, "p": float(p), "lhs": float(lhs), "rhs": float(rhs),
            "margin": float(rhs - lhs), "pass": bool(ok), "note": note}


def inequality_audit(p_grid, dims=(1, 2, 3, 4, 8), large_p: float = 1.0e8) -> list[dict]:
    """Evaluate the Gaussian-moment and trigonometric inequality chain on a grid.

    Checks, each reported per grid point with its margin ``rhs - lhs``:

    a. ``gamma(q)/gamma(p) <= sqrt(pi/2)/sqrt(p-1)`` for ``1 < p < 2``
    b. ``gamma(r) <= sqrt(r-1)`` for ``r > 2`` (``r`` is ``p`` or its conjugate)
    c. ``gamma(r)/sqrt(r)`` decreasing along the sorted grid
    d. ``cot(pi/(4p)) = cot(pi/(2p)) + sqrt(1 + cot^2(pi/(2p)))`` to 1e-10
    e. ``C_p(d)`` nondecreasing along the grid and close to 1 at ``large_p``
    """
    grid = sorted(float(p) for p in p_grid)
    if any(p <= 1 for p in grid):
        raise DomainError("every audit exponent must exceed 1")
    gm = lambda r: sharp_constant("gaussian_moment", r)  # noqa: E731
    rows: list[dict] = []
    for p in grid:
        q = PNorm(p).q
        if p < 2:
            lhs = gm(q) / gm(p)
            rhs = math.sqrt(math.pi / 2.0) / math.sqrt(p - 1.0)
            rows.append(_audit_row("a:gamma_ratio", p, lhs, rhs, lhs <= rhs))
        r = p if p > 2 else q
        if r > 2:
            lhs, rhs = gm(r), math.sqrt(r - 1.0)
            rows.append(_audit_row("b:gamma_vs_sqrt", r, lhs, rhs, lhs <= rhs))
        c1 = 1.0 / math.tan(math.pi / (2.0 * p))
        lhs = 1.0 / math.tan(math.pi / (4.0 * p))
        rhs = c1 + math.sqrt(1.0 + c1 * c1)
        rows.append(_audit_row("d:cot_recurrence", p, lhs, rhs, abs(lhs - rhs) <= 1e-10 * max(1.0, rhs)))
    ratios = [gm(r) / math.sqrt(r) for r in grid]
    for r, a, b in zip(grid[1:], ratios[:-1], ratios[1:]):
        rows.append(_audit_row("c:gamma_over_sqrt_decreasing", r, b, a, b <= a))
    for d in dims:
        vals = [sharp_constant("sphere_moment", p, d) for p in grid]
        for p, a, b in zip(grid[1:], vals[:-1], vals[1:]):
            rows.append(_audit_row(f"e:sphere_moment_monotone[d={d}]", p, a, b, a <= b * (1 + 1e-14)))
        far = sharp_constant("sphere_moment", large_p, d)
        rows.append(_audit_row(f"e:sphere_moment_limit[d={d}]", large_p, abs(1.0 - far), 1e-5,
                               abs(1.0 - far) <= 1e-5))
    return rows


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["kind", "p", "d", "value", "formula_id"])
    for row in rows:
        writer.writerow([row.kind, repr(row.p), "" if row.d is None else row.d,
                         repr(row.value), row.formula_id])
    return buf.getvalue()
