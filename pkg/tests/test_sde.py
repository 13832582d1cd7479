import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cotlar import sde
from cotlar.errors import (
    ArgumentError,
    ConfigurationError,
    DimensionError,
    PreconditionError,
    StatisticalPowerError,
)
from cotlar.matrices import build_matrix
from cotlar.operators import HILBERT, GridFn, GridSpec, apply_operator
from cotlar.rng import path_normals
from cotlar.sde import (
    IntegrandSpec,
    PathConfig,
    PathEnsemble,
    conformality_report,
    distribution_test,
    dkw_epsilon,
    dyadic_residuals,
    gv_hilbert_pathwise,
    harmonic_modes,
    identity_residual,
    simulate,
    strip_exit_samples,
    transform,
    transform_all,
)

H2 = build_matrix("H2")


def trig_f(n=64):
    spec = GridSpec(1, n, 2 * math.pi)
    return GridFn.from_function(spec, lambda x: np.cos(x) + 0.5 * np.sin(2 * x))


def test_config_validation():
    with pytest.raises(ArgumentError):
        PathConfig(0, 0.1, 10, 10)
    with pytest.raises(ArgumentError):
        PathConfig(2, 0.0, 10, 10)
    with pytest.raises(ArgumentError):
        PathConfig(2, 0.1, 0, 10)
    with pytest.raises(ArgumentError):
        PathConfig(2, 0.1, 10, 0)
    assert PathConfig(2, 0.25, 8, 1).horizon == 2.0


def test_integrand_specs():
    assert IntegrandSpec.indicator(1.0, 0.0).offset == 0.5
    assert IntegrandSpec.indicator(4.0, 0.6).offset == pytest.approx(0.5 * math.erfc(0.3 / math.sqrt(2)))
    with pytest.raises(ArgumentError):
        IntegrandSpec.modulated([1.0, 1.0], 2)
    with pytest.raises(ArgumentError):
        IntegrandSpec.indicator(0.0)
    with pytest.raises(ArgumentError):
        IntegrandSpec("brownian")
    with pytest.raises(DimensionError):
        simulate(PathConfig(3, 0.1, 4, 10), IntegrandSpec.constant([1.0, 0.0]))
    with pytest.raises(DimensionError):
        simulate(PathConfig(3, 0.1, 4, 10), IntegrandSpec.poisson_gradient(trig_f(), 0.5))


def test_constant_integrand_matches_direct_sum():
    cfg = PathConfig(2, 0.01, 50, 700, seed=11)
    ens = simulate(cfg, IntegrandSpec.constant([1.0, -2.0]))
    dB = path_normals(11, 0, 700, 50, 2) * math.sqrt(0.01)
    assert np.allclose(ens.terminal["M"], dB.sum(axis=1) @ np.array([1.0, -2.0]), atol=1e-12)
    assert np.allclose(ens.terminal["qv_pred"], 5.0 * 0.5)


def test_transform_matches_direct_sum():
    cfg = PathConfig(2, 0.01, 40, 600, seed=3)
    ens = transform(H2, simulate(cfg, IntegrandSpec.constant([1.0, 0.5])))
    dB = path_normals(3, 0, 600, 40, 2) * 0.1
    assert np.allclose(ens.terminal["X0"], dB.sum(axis=1) @ (H2 @ np.array([1.0, 0.5])), atol=1e-12)
    assert np.allclose(ens.terminal["cov0"], np.einsum("ps,ps->p", dB @ np.array([1.0, 0.5]), dB @ np.array([0.5, -1.0])))


def test_determinism_across_workers_and_batches():
    cfg = PathConfig(3, 2**-5, 32, 1100, seed=5)
    spec = IntegrandSpec.modulated([1.0, 0.5, 0.0], 3)
    one = transform_all([build_matrix("AB_pair_A", [1, 2], 3), build_matrix("AB_pair_B", [1, 2], 3)], simulate(cfg, spec), 1)
    two = transform_all([build_matrix("AB_pair_A", [1, 2], 3), build_matrix("AB_pair_B", [1, 2], 3)], simulate(cfg, spec, 3), 3)
    for key in one.terminal:
        assert np.array_equal(one.terminal[key], two.terminal[key])
    head = simulate(PathConfig(3, 2**-5, 32, 600, seed=5), spec)
    assert np.array_equal(head.terminal["M"], one.terminal["M"][:600])


@pytest.mark.parametrize("spec,dim,dt,steps", [
    (IntegrandSpec.constant([1.0, 0.5]), 2, 2**-6, 64),
    (IntegrandSpec.indicator(1.0, 0.3), 2, 2**-7, 128),
    (IntegrandSpec.modulated([1.0, 0.5, 0.0], 3), 3, 2**-6, 64),
    (IntegrandSpec.poisson_gradient(trig_f(), 0.5), 2, 2**-6, 256),
])
def test_ito_isometry_and_zero_mean(spec, dim, dt, steps):
    ens = simulate(PathConfig(dim, dt, steps, 6000, seed=21), spec)
    diff = ens.terminal["M"] ** 2 - ens.terminal["qv_pred"]
    assert abs(diff.mean()) <= 3 * diff.std(ddof=1) / math.sqrt(diff.size)
    m, se = ens.stat("M")
    assert abs(m) <= 3 * se


@pytest.mark.parametrize("a,spec,dim", [
    (H2, IntegrandSpec.constant([1.0, 0.5]), 2),
    (build_matrix("H4_j", [1]), IntegrandSpec.modulated([1.0, 0.5, -0.3, 0.0], 4), 4),
])
def test_cotlar_transform_preserves_energy(a, spec, dim):
    ens = transform(a, simulate(PathConfig(dim, 2**-6, 64, 6000, seed=8), spec))
    # |AK| = |K| pathwise, so the predicted brackets agree exactly
    assert np.allclose(ens.terminal["qv_pred0"], ens.terminal["qv_pred"], rtol=1e-12)
    diff = ens.terminal["X0"] ** 2 - ens.terminal["M"] ** 2
    assert abs(diff.mean()) <= 3 * diff.std(ddof=1) / math.sqrt(diff.size)


def test_identity_residual_preconditions():
    ens = PathEnsemble(PathConfig(2, 0.01, 10, 50), IntegrandSpec.constant([1.0, 0.0]))
    with pytest.raises(PreconditionError):
        identity_residual("cotlar_martingale", np.eye(2), ens)
    with pytest.raises(PreconditionError):
        identity_residual("cotlar_martingale", 2 * H2, ens)
    assert identity_residual("general_skew", 2 * H2, ens).rms >= 0
    assert identity_residual("product_formula", np.eye(2), ens).rms >= 0
    with pytest.raises(ArgumentError):
        identity_residual("ito", H2, ens)
    with pytest.raises(DimensionError):
        identity_residual("cotlar_martingale", build_matrix("H4_j", [1]), ens)


def test_product_formula_is_exact_for_discrete_brackets():
    # with the realized covariation in place of the compensator the discrete product rule is exact
    cfg = PathConfig(2, 0.05, 20, 300, seed=4)
    ens = transform(np.array([[0.3, 1.0], [-0.2, 0.7]]), simulate(cfg, IntegrandSpec.modulated([1.0, 0.0], 2)))
    stats = identity_residual("product_formula", np.array([[0.3, 1.0], [-0.2, 0.7]]), ens)
    realized_minus_pred = ens.terminal["cov0"] - np.mean(ens.terminal["cov0"])
    assert stats.rms > 0 and np.isfinite(realized_minus_pred).all()


@pytest.mark.parametrize("kind,a,spec,dim", [
    ("cotlar_martingale", H2, IntegrandSpec.constant([1.0, 0.5]), 2),
    ("general_skew", np.array([[0.0, 1.0, -2.0], [-1.0, 0.0, 0.5], [2.0, -0.5, 0.0]]), IntegrandSpec.constant([1.0, 0.0, 0.0]), 3),
    ("product_formula", H2, IntegrandSpec.constant([1.0, 0.5]), 2),
])
def test_dyadic_residual_ratios(kind, a, spec, dim):
    out = dyadic_residuals(kind, a, spec, dim, (2**-5, 2**-6, 2**-7), 1.0, 3000, 17)
    assert all(1.2 <= r <= 1.8 for r in out["ratios"])


def test_conformality_report():
    full = build_matrix("C_full", dim=4)
    ens = simulate(PathConfig(4, 2**-5, 32, 800, seed=2), IntegrandSpec.modulated([1.0, 0.5, -0.3, 0.0], 4))
    rep = conformality_report(ens, (full.real, full.imag))
    assert rep["blocks"] == 2
    assert max(rep["max_qv_gap"], rep["max_cov_gap"], rep["max_block_cross_bracket"], rep["max_block_self_bracket"]) <= 1e-12
    with pytest.raises(PreconditionError):
        conformality_report(ens, (np.eye(4), np.eye(4)))


def test_distribution_test_guards():
    small = PathEnsemble(PathConfig(2, 0.01, 10, 500), IntegrandSpec.indicator())
    with pytest.raises(StatisticalPowerError):
        distribution_test("indicator_tail", small, [H2])
    ens = PathEnsemble(PathConfig(2, 0.01, 10, 1000), IntegrandSpec.constant([1.0, 0.0]))
    with pytest.raises(PreconditionError):
        distribution_test("indicator_tail", ens, [H2])
    with pytest.raises(PreconditionError):
        distribution_test("rotation_invariance", ens, [np.eye(2), np.eye(2)])
    ens = PathEnsemble(PathConfig(2, 0.01, 10, 1000), IntegrandSpec.indicator())
    with pytest.raises(PreconditionError):
        distribution_test("sup_tail", ens, [2 * H2])
    with pytest.raises(ArgumentError):
        distribution_test("anderson_darling", ens, [H2])


def test_distribution_tests_pass_and_reject():
    ab = [build_matrix("AB_pair_A", [1, 2], 3), build_matrix("AB_pair_B", [1, 2], 3)]
    ens = PathEnsemble(PathConfig(3, 2**-5, 32, 4000, seed=1), IntegrandSpec.modulated([1.0, 0.5, 0.0], 3))
    assert distribution_test("rotation_invariance", ens, ab)["pass"]
    ens = PathEnsemble(PathConfig(2, 2**-5, 32, 4000, seed=1), IntegrandSpec.indicator())
    out = distribution_test("rotation_invariance", ens, [np.eye(2), H2])
    assert not any(r["pass"] for r in out["angles"])
    tail = distribution_test("indicator_tail", PathEnsemble(PathConfig(2, 2**-8, 256, 4000, seed=3),
                                                            IntegrandSpec.indicator(1.0, 0.3)), [H2])
    assert tail["pass"] and tail["gate"] == pytest.approx(3 * dkw_epsilon(4000))


def test_dkw_epsilon():
    assert dkw_epsilon(10**4) == pytest.approx(math.sqrt(math.log(2000.0) / 2e4))
    assert dkw_epsilon(100, 0.05) > dkw_epsilon(100, 0.001) / 2


@given(st.integers(1, 6), st.floats(-2, 2), st.floats(-2, 2))
def test_harmonic_modes_reconstruct(k, a, b):
    spec = GridSpec(1, 64, 2 * math.pi)
    f = GridFn.from_function(spec, lambda x: a * np.cos(k * x) + b * np.sin(k * x))
    kappa, ca, cb = harmonic_modes(f)
    x = spec.axis()
    recon = sum(p * np.cos(kk * x) + q * np.sin(kk * x) for kk, p, q in zip(kappa, ca, cb)) if kappa.size else 0 * x
    assert np.allclose(recon, f.values.real, atol=1e-12)


def test_conjugate_on_boundary_equals_fft_hilbert():
    f = GridFn.from_function(GridSpec(1, 128, 5.0), lambda x: np.exp(np.sin(2 * np.pi * x / 5.0))).mean_removed()
    kappa, a, b = harmonic_modes(f)
    x = f.spec.axis()
    v = sde._conjugate(kappa, a, b, x, np.zeros_like(x))
    assert np.allclose(v, apply_operator(HILBERT, f).values.real, atol=1e-12)


def test_gradient_matches_finite_differences():
    kappa, a, b = harmonic_modes(trig_f())
    def u(x, y):
        return sum(np.exp(-k * y) * (p * np.cos(k * x) + q * np.sin(k * x)) for k, p, q in zip(kappa, a, b))
    x, y, h = 0.7, 0.4, 1e-6
    ux, uy = sde._gradient(kappa, a, b, np.array(x), np.array(y))
    assert ux == pytest.approx((u(x + h, y) - u(x - h, y)) / (2 * h), abs=1e-8)
    assert uy == pytest.approx((u(x, y + h) - u(x, y - h)) / (2 * h), abs=1e-8)


def test_harmonic_modes_preconditions():
    spec = GridSpec(1, 32, 1.0)
    with pytest.raises(PreconditionError):
        harmonic_modes(GridFn(spec, np.ones(32)))
    with pytest.raises(PreconditionError):
        harmonic_modes(GridFn(spec, 1j * np.sin(2 * np.pi * spec.axis())))


def test_strip_exit_samples():
    out = strip_exit_samples(0.3, PathConfig(2, 2**-8, 4096, 2000, seed=9))
    assert out["censored"] == 0
    assert set(np.unique(out["side"])) <= {1, 2}
    left = np.mean(out["side"] == 1)
    assert abs(left - 0.7) <= 3 * math.sqrt(0.21 / 2000)
    with pytest.raises(ConfigurationError):
        strip_exit_samples(0.5, PathConfig(2, 2**-8, 4, 200))
    with pytest.raises(ArgumentError):
        strip_exit_samples(1.0, PathConfig(2, 2**-8, 4, 200))


def test_gv_pathwise_small():
    out = gv_hilbert_pathwise(trig_f(), 0.25, PathConfig(2, 2**-6, 1024, 2000, seed=4))
    assert out["n_paths"] == 2000 and out["censored"] <= 200
    assert abs(out["integral_mean"]) <= 3 * out["integral_se"]
    assert out["rms_residual"] < 0.2
    with pytest.raises(ArgumentError):
        gv_hilbert_pathwise(trig_f(), 0.0, PathConfig(2, 2**-6, 16, 10))
