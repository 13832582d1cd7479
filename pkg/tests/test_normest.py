import json
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cotlar.errors import ArgumentError, DimensionError, DomainError, PreconditionError
from cotlar.normest import (
    SLACK,
    NormEstimate,
    averaging_consistency,
    asymptotic_gate,
    bound_crossing,
    bound_table,
    chaos_projection,
    extremal_search,
    lp_norm,
    never_exceed,
    recurrence_audit,
)
from cotlar.operators import HILBERT, GridFn, GridSpec, MultiplierOp

COT = {2.0: 1.0, 4.0: 1.0 + math.sqrt(2.0)}


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=40), st.floats(1.0, 12.0), st.floats(0.01, 3.0))
def test_lp_norm_matches_direct_sum(vals, p, cell):
    # extended-precision oracle so tiny entries do not underflow
    direct = float((mpmath.fsum(abs(mpmath.mpf(x)) ** p for x in vals) * cell) ** (1 / mpmath.mpf(p)))
    assert lp_norm(np.array(vals), p, cell) == pytest.approx(direct, rel=1e-10, abs=1e-300)


def test_lp_norm_edge_cases():
    assert lp_norm(np.zeros(5), 3.0, 1.0) == 0.0
    assert lp_norm(np.array([1e200, 1e200]), 4.0, 1.0) == pytest.approx(1e200 * 2**0.25)
    f = GridFn(GridSpec(1, 8, 2.0), np.ones(8))
    assert lp_norm(f, 2.0) == pytest.approx(math.sqrt(2.0))
    with pytest.raises(ArgumentError):
        lp_norm(np.ones(3), 0.5, 1.0)
    with pytest.raises(ArgumentError):
        lp_norm(np.ones(3), 2.0)


def test_hilbert_is_an_isometry_at_p2():
    est = extremal_search(HILBERT, 2.0, "family", n=1024)
    assert est.lower_bound <= 1.0 + 1e-12
    assert est.lower_bound > 0.95


@pytest.mark.parametrize("p", [4.0, 8.0])
def test_hilbert_search_stays_below_sharp_constant(p):
    fam = extremal_search(HILBERT, p, "family", n=1024)
    asc = extremal_search(HILBERT, p, "ascent", n=1024)
    cot = 1.0 / math.tan(math.pi / (2 * p))
    assert fam.lower_bound <= asc.lower_bound <= cot
    assert np.all(np.diff(asc.history) > 0)
    assert never_exceed(asc)["pass"]
    assert asc.reference == pytest.approx(cot)


def test_two_dimensional_operators_respect_bounds():
    for op in (MultiplierOp("riesz_j", (1,)), MultiplierOp("complex_hilbert"), MultiplierOp("beurling_ahlfors")):
        est = extremal_search(op, 4.0, "family", n=64)
        res = never_exceed(est)
        assert res["pass"] and res["limit"] == pytest.approx((1 + SLACK) * est.best_upper.value)


def test_search_errors():
    with pytest.raises(DomainError):
        extremal_search(HILBERT, 1.0)
    with pytest.raises(ArgumentError):
        extremal_search(HILBERT, 4.0, "annealing")
    with pytest.raises(ArgumentError):
        extremal_search(HILBERT, 4.0, n=64)
    with pytest.raises(ArgumentError):
        extremal_search(MultiplierOp("second_riesz_jk", (1, 2)), 4.0, n=32)


def test_bound_table_values():
    riesz, ba = bound_table(2.0, 3, "real")
    r = {b.name: b.value for b in riesz.upper_bounds}
    assert riesz.lower_bound == pytest.approx(1.0)
    assert r["martingale_transform"] == pytest.approx(2.0)
    assert r["rotation_minkowski"] == pytest.approx(2.0)
    assert r["minkowski"] == pytest.approx(2 * math.sqrt(2))
    assert r["gaussian_averaging"] == pytest.approx(math.sqrt(math.pi / 2))
    assert r["rademacher_averaging"] == pytest.approx(math.sqrt(3))
    b = {x.name: x.value for x in ba.upper_bounds}
    assert ba.lower_bound == pytest.approx(1.0)
    assert b["conformal_real"] == pytest.approx(math.sqrt(2))
    assert "laguerre_root" not in b
    _, ba4 = bound_table(4.0, 2, "complex")
    assert {x.name for x in ba4.upper_bounds} == {"interpolation", "conformal_complex", "laguerre_root"}
    assert "large_p_linear" in {x.name for x in bound_table(2000.0, 1)[1].upper_bounds}
    for bad in ((1.0, 2, "real"), (2.0, 0, "real"), (2.0, 2, "quaternion")):
        with pytest.raises((ArgumentError, DomainError)):
            bound_table(*bad)


@given(st.floats(1.05, 30.0), st.integers(1, 8), st.sampled_from(["real", "complex"]))
def test_bound_table_lower_below_every_upper(p, d, fld):
    for row in bound_table(p, d, fld):
        assert all(row.lower_bound <= b.value * (1 + 1e-12) for b in row.upper_bounds)


def test_estimate_serialization():
    row = bound_table(4.0, 2)[0]
    data = json.loads(row.to_json())
    assert data["operator"] == "riesz_vector" and data["witness"] == "analytic"
    assert row.csv_row()[0] == "riesz_vector" and row.csv_row()[-1] == row.best_upper.name
    assert isinstance(row, NormEstimate)


def test_bound_crossing_and_averaging():
    cross = bound_crossing()
    assert cross["pass"] and 9.0 < cross["p0"] < 9.5
    avg = averaging_consistency()
    assert avg["pass"] and avg["max_error"] <= 1e-10
    assert asymptotic_gate()["pass"]


def test_chaos_projection():
    rep = chaos_projection([1.0, -2.0, 0.5], 200_000, seed=3)
    assert rep.passes and rep.max_deviation <= rep.gate
    assert abs(rep.orthogonality_residual) <= 4 * rep.orthogonality_se
    assert rep.alpha_estimate == pytest.approx(rep.alpha_exact, rel=0.02)
    assert rep.alpha_exact == pytest.approx(math.sqrt(2 / math.pi) / math.sqrt(5.25))
    with pytest.raises(DomainError):
        chaos_projection([0.0, 0.0], 10_000)
    with pytest.raises(ArgumentError):
        chaos_projection([1.0], 100)


def trig(n=128):
    return GridFn.from_function(GridSpec(1, n, 1.0), lambda x: np.cos(2 * np.pi * x) + 0.3 * np.sin(6 * np.pi * x))


@pytest.mark.parametrize("p", [2.0, 3.0, 4.0])
def test_recurrence_audit(p):
    out = recurrence_audit(trig(), p)
    assert out["pass"] and out["triangle"]["slack"] >= -1e-12
    assert out["cauchy_schwarz"]["lhs"] <= out["cauchy_schwarz"]["rhs"] * (1 + 1e-12)


def test_recurrence_audit_at_p2_is_tight_for_cosine():
    # for f = cos, Hf = sin: |f Hf|_2 = |sin 2x|_2/2 while |f|_4 |Hf|_4 = (3/8)^(1/2)
    f = GridFn.from_function(GridSpec(1, 64, 1.0), lambda x: np.cos(2 * np.pi * x))
    out = recurrence_audit(f, 2.0)
    assert out["cauchy_schwarz"]["lhs"] == pytest.approx(math.sqrt(0.125), rel=1e-12)
    assert out["cauchy_schwarz"]["rhs"] == pytest.approx(math.sqrt(0.375), rel=1e-12)


def test_recurrence_audit_preconditions():
    with pytest.raises(DomainError):
        recurrence_audit(trig(), 1.5)
    with pytest.raises(PreconditionError):
        recurrence_audit(GridFn(GridSpec(1, 16, 1.0), np.ones(16)), 2.0)
    with pytest.raises(PreconditionError):
        recurrence_audit(GridFn(GridSpec(1, 16, 1.0), 1j * np.sin(2 * np.pi * np.arange(16) / 16)), 2.0)
    with pytest.raises(DimensionError):
        recurrence_audit(GridFn(GridSpec(2, 8, 1.0), np.zeros((8, 8))), 2.0)
