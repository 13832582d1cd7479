import math

import mpmath as mp
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cotlar.constants import (
    KINDS,
    PNorm,
    Q_CONSTANT,
    constants_row,
    crossover_function,
    crossover_root,
    find_cutoff,
    h_function,
    inequality_audit,
    q_series,
    rows_to_csv,
    sharp_constant,
)
from cotlar.errors import ArgumentError, DomainError

# frozen from a 40-digit mpmath evaluation of the defining gamma expressions
ORACLE = [
    ("gaussian_moment", 3.0, None, 1.1685752549624655487),
    ("gaussian_moment", 1.5, None, 0.90436919903662046568),
    ("sphere_moment", 4.0, 3, 0.66874030497642203328),
    ("sphere_moment", 3.0, 5, 0.5),
    ("kahane_alpha", 3.0, None, 1.0995426165057688343),
    ("dragicevic_D", 3.0, None, 1.6259637327569132559),
    ("dragicevic_D", 1.5, None, 0.61501986781983357882),
    ("khintchine", 1.5, None, 1.1057430981343131444),
    ("pichorides", 1.25, None, 3.0776835371752534026),
    ("pichorides", 3.0, None, math.sqrt(3.0)),
    ("burkholder", 1.25, None, 4.0),
]


@pytest.mark.parametrize("kind,p,d,expected", ORACLE)
def test_frozen_oracle_values(kind, p, d, expected):
    assert sharp_constant(kind, p, d) == pytest.approx(expected, rel=1e-13)


def test_exact_values():
    assert abs(sharp_constant("pichorides", 4.0) - (1.0 + math.sqrt(2.0))) < 1e-12
    assert abs(sharp_constant("gaussian_moment", 1.0) - math.sqrt(2.0 / math.pi)) < 1e-12
    assert abs(sharp_constant("sphere_moment", 1.0, 2) - 2.0 / math.pi) < 1e-12
    for d in range(1, 65):
        assert abs(sharp_constant("sphere_moment", 2.0, d) - 1.0 / math.sqrt(d)) < 1e-12


def _mp_sphere(p, d):
    mp.mp.dps = 30
    p = mp.mpf(p)
    val = mp.gamma(mp.mpf(d) / 2) * mp.gamma((p + 1) / 2) / (mp.sqrt(mp.pi) * mp.gamma((d + p) / 2))
    return float(val ** (1 / p))


@given(st.floats(0.1, 60.0), st.integers(1, 40))
def test_sphere_moment_matches_mpmath(p, d):
    assert sharp_constant("sphere_moment", p, d) == pytest.approx(_mp_sphere(p, d), rel=1e-12)


@given(st.floats(1.001, 500.0))
def test_pichorides_duality(p):
    q = PNorm(p).q
    assert sharp_constant("pichorides", p) == pytest.approx(sharp_constant("pichorides", q), rel=1e-11)
    assert sharp_constant("burkholder", p) == pytest.approx(sharp_constant("burkholder", q), rel=1e-11)


@given(st.floats(4.0, 1.0e6), st.floats(4.0, 1.0e6))
def test_h_strictly_decreasing(a, b):
    lo, hi = sorted((a, b))
    if hi - lo > 1e-6 * hi:
        assert h_function(lo) > h_function(hi)


@given(st.floats(1.01, 1.0e4), st.integers(1, 16))
def test_sphere_moment_below_one_and_increasing_in_p(p, d):
    v = sharp_constant("sphere_moment", p, d)
    assert 0.0 < v <= 1.0
    assert sharp_constant("sphere_moment", p * 1.5, d) >= v * (1 - 1e-14)


def test_q_series():
    partial = [q_series(k)[0] for k in range(1, 31)]
    assert all(b <= a for a, b in zip(partial, partial[1:]))
    s, limit = q_series(30)
    assert limit == Q_CONSTANT
    assert abs(s - (math.e - 2.0)) < 1e-12
    assert q_series(1)[0] == 0.75
    with pytest.raises(ArgumentError):
        q_series(0)


def test_h_values_and_cutoff():
    assert h_function(4.0) == pytest.approx(1.5413407151134298077, rel=1e-13)
    assert h_function(10.0) == pytest.approx(1.5025767321943164583, rel=1e-13)
    assert 1.4001 <= h_function(450.0) <= 1.4002
    cut = find_cutoff(1.4)
    assert cut["root"] == pytest.approx(462.10790940679026648, abs=2e-6)
    assert 450 < cut["root"] < 500
    lo, hi = cut["h_at_integer_bracket"]
    assert lo > 1.4 > hi
    assert abs(h_function(1.0e8) - 1.0 / (math.e - 2.0)) < 1e-3
    with pytest.raises(DomainError):
        find_cutoff(2.0)
    with pytest.raises(DomainError):
        h_function(2.0)


def test_h_500_is_below_the_printed_bracket():
    # the formula itself gives 1.39952; a printed interval [1.39999, 1.40000] is not reproduced
    assert h_function(500.0) == pytest.approx(1.3995179341508266374, rel=1e-13)


def test_crossover():
    p0 = crossover_root()
    assert p0 == pytest.approx(9.2249290137040528352, abs=1e-7)
    assert crossover_function(p0 - 0.5) < 0 < crossover_function(p0 + 0.5)


def test_khintchine_continuity():
    assert sharp_constant("khintchine", 2.0) == 1.0
    assert abs(sharp_constant("khintchine", 2.0 - 1e-12) - 1.0) < 1e-11


def test_dragicevic_ratio_limit():
    r = sharp_constant("dragicevic_D", 1.0e4) / sharp_constant("pichorides", 1.0e4)
    assert abs(r - math.pi / 4.0) < 1e-2


@pytest.mark.parametrize("kind", ["burkholder", "pichorides", "khintchine", "dragicevic_D"])
def test_operator_constants_need_p_above_one(kind):
    with pytest.raises(DomainError):
        sharp_constant(kind, 1.0)


@pytest.mark.parametrize("kind", ["gaussian_moment", "kahane_alpha"])
def test_moment_constants_accept_small_p(kind):
    assert sharp_constant(kind, 0.5) > 0
    with pytest.raises(DomainError):
        sharp_constant(kind, 0.0)


def test_argument_errors():
    with pytest.raises(ArgumentError):
        sharp_constant("nope", 2.0)
    with pytest.raises(ArgumentError):
        sharp_constant("sphere_moment", 2.0)
    with pytest.raises(ArgumentError):
        sharp_constant("sphere_moment", 2.0, 0)
    with pytest.raises(DomainError):
        sharp_constant("pichorides", float("nan"))


def test_large_p_is_finite():
    for kind in KINDS:
        v = sharp_constant(kind, 1.0e8, 3 if kind == "sphere_moment" else None)
        assert math.isfinite(v)


def test_inequality_audit_passes():
    rows = inequality_audit([1.2, 1.5, 1.8, 2.5, 3.0, 4.0, 6.0, 8.0, 16.0, 64.0])
    assert rows and all(r["pass"] for r in rows)
    assert {r["check"][0] for r in rows} == set("abcde")
    with pytest.raises(DomainError):
        inequality_audit([0.5, 2.0])


def test_csv_rows():
    text = rows_to_csv([constants_row("pichorides", 4.0), constants_row("sphere_moment", 2.0, 4)])
    lines = text.strip().splitlines()
    assert lines[0] == "kind,p,d,value,formula_id"
    assert lines[1].startswith("pichorides,4.0,,2.414213562373095")
    assert lines[2].split(",")[2] == "4"
