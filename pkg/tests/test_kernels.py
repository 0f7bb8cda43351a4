import math

import numpy as np
import pytest
from scipy.integrate import quad

from conftest import GATE_MARK, kernel_lt_quadrature
from hptml.kernels import (
    Exponential,
    HawkesParams,
    MittagLeffler,
    NoKernel,
    TemperedML,
    kernel_cdf,
    kernel_density,
    kernel_from_dict,
    kernel_lt,
    kernel_lt_continued,
    kernel_tail_rate,
    kernel_to_dict,
    tml_triple,
)

gate = getattr(pytest.mark, GATE_MARK)


def random_specs(n, seed):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        beta = rng.uniform(0.3, 1.0)
        nu = rng.uniform(0.05, 2.0)
        gamma = rng.uniform(0.05, 2.0)
        out.append(TemperedML(beta, nu, gamma))
    return out


@gate
@pytest.mark.parametrize("spec", [TemperedML(0.9, 1.0, 0.1), TemperedML(0.6, 0.3, 2.0),
                                  TemperedML(0.45, 1.5, 0.4), MittagLeffler(0.8, 1.0)])
def test_lt_round_trip(spec):
    for s in (0.1, 0.5, 1, 2, 5, 10):
        want = kernel_lt(spec, s).real
        assert kernel_lt_quadrature(spec, s) == pytest.approx(want, rel=1e-6)


@gate
def test_lt_round_trip_real_axis_sweep():
    # twenty real s values, including the negative-argument regime gamma < nu^beta
    spec = TemperedML(0.7, 1.2, 0.3)
    assert spec.gamma < spec.nu**spec.beta
    for s in np.geomspace(0.05, 20, 20):
        assert kernel_lt_quadrature(spec, s) == pytest.approx(kernel_lt(spec, s).real, rel=1e-6)


def test_density_examples():
    assert kernel_density(Exponential(1.0), 1.0) == pytest.approx(math.exp(-1), rel=1e-15)
    # beta = 1: the tempering cancels and the density is exponential whatever nu is
    assert kernel_density(TemperedML(1.0, 0.5, 1.0), 1.0) == pytest.approx(math.exp(-1), rel=1e-13)
    with pytest.raises(ValueError):
        kernel_density(TemperedML(0.5, 1, 1), 0.0)


def test_density_nonnegative_both_signs():
    for spec in [TemperedML(0.9, 1.0, 0.1), TemperedML(0.5, 2.0, 0.2), TemperedML(0.7, 0.1, 1.5)]:
        for t in np.geomspace(1e-6, 200, 120):
            assert kernel_density(spec, t) >= 0


def test_normalization_through_transform():
    for spec in random_specs(10, 3) + [Exponential(2.0)]:
        assert abs(kernel_lt(spec, 1e-8).real - 1) <= 1e-6
    # without tempering the defect is s^beta / gamma, far above s itself
    assert 1 - kernel_lt(MittagLeffler(0.6, 1.3), 1e-8).real == pytest.approx(1e-8**0.6 / 1.3, rel=1e-4)


def test_normalization_by_quadrature():
    for spec in [TemperedML(0.9, 1.0, 0.1), TemperedML(0.5, 1.0, 1.0), TemperedML(0.8, 0.3, 2.0)]:
        assert kernel_lt_quadrature(spec, 0.0) == pytest.approx(1.0, abs=1e-6)


def test_cdf_examples():
    assert kernel_cdf(Exponential(1.0), math.log(2)) == pytest.approx(0.5, rel=1e-14)
    v = kernel_cdf(TemperedML(0.9, 0.01, 1.0), 10.0)
    assert 0.9 < v < 1
    assert kernel_cdf(TemperedML(0.9, 0.01, 1.0), 0.0) == 0.0


def test_cdf_matches_density_quadrature():
    rng = np.random.default_rng(11)
    for spec in random_specs(8, 5) + [MittagLeffler(0.5, 1.0)]:
        beta = tml_triple(spec)[0]
        for _ in range(3):
            t1, t2 = np.sort(rng.uniform(0.01, 20, 2))
            dens = quad(
                lambda u: kernel_density(spec, u ** (1 / beta)) * u ** (1 / beta - 1) / beta,
                t1**beta, t2**beta, epsabs=1e-13, epsrel=1e-11, limit=200,
            )[0]
            assert abs(kernel_cdf(spec, t2) - kernel_cdf(spec, t1) - dens) <= 1e-6


def test_cdf_against_extended_precision():
    import mpmath as mp

    from conftest import ml_oracle

    for beta, nu, gamma, t in [(0.7, 0.5, 1.0, 3.0), (0.6, 2.0, 1.0, 3.0), (0.9, 1.0, 0.1, 6.0)]:
        with mp.workdps(25):
            z = -(gamma - nu**beta) * t**beta
            f = lambda u: gamma * mp.e ** (-nu * u) * u ** (beta - 1) * ml_oracle(
                beta, beta, -(gamma - nu**beta) * float(u) ** beta, digits=20)
            want = float(mp.quad(f, [0, t / 4, t / 2, t]))
        got = kernel_cdf(TemperedML(beta, nu, gamma), t)
        assert got == pytest.approx(want, abs=5e-11), (beta, nu, gamma, z)


def test_cdf_monotone_and_bounded():
    for spec in [TemperedML(0.9, 1.0, 0.1), TemperedML(0.4, 0.05, 1.0), MittagLeffler(0.3, 2.0)]:
        vals = [kernel_cdf(spec, t) for t in np.geomspace(1e-4, 1e3, 80)]
        assert all(0 <= v <= 1 for v in vals)
        # monotone up to the 1e-10 evaluation tolerance
        assert all(b >= a - 1e-10 for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("beta, gamma", [(0.6, 1.0), (0.9, 0.3), (0.35, 2.0)])
def test_zero_tempering_is_mittag_leffler(beta, gamma):
    a, b = TemperedML(beta, 0.0, gamma), MittagLeffler(beta, gamma)
    for t in (0.01, 0.5, 3.0, 40.0):
        assert kernel_density(a, t) == pytest.approx(kernel_density(b, t), rel=1e-10)
        assert kernel_cdf(a, t) == pytest.approx(kernel_cdf(b, t), abs=1e-10)
    s = np.array([0.1, 1 + 2j, 7.0])
    assert np.allclose(kernel_lt(a, s), kernel_lt(b, s), rtol=1e-10, atol=0)


@pytest.mark.parametrize("nu, gamma", [(0.5, 1.0), (2.0, 0.3), (0.0, 1.7)])
def test_unit_index_is_exponential(nu, gamma):
    a, b = TemperedML(1.0, nu, gamma), Exponential(gamma)
    for t in (0.01, 0.5, 3.0, 12.0):
        assert kernel_density(a, t) == pytest.approx(kernel_density(b, t), rel=1e-10)
        assert kernel_cdf(a, t) == pytest.approx(kernel_cdf(b, t), abs=1e-10)
    s = np.array([0.1, 1 + 2j, 7.0])
    assert np.allclose(kernel_lt(a, s), kernel_lt(b, s), rtol=1e-10, atol=0)


def test_lt_domain():
    with pytest.raises(ValueError):
        kernel_lt(TemperedML(0.5, 1, 1), -0.5)
    with pytest.raises(ValueError):
        kernel_lt(NoKernel(), 1.0)
    # the continued transform is what contour inversion uses in Re(s) < 0
    assert np.isfinite(kernel_lt_continued(TemperedML(0.5, 1, 1), -0.5 + 3j))


def test_conjugate_symmetry():
    spec = TemperedML(0.7, 0.4, 1.3)
    s = np.array([0.3 + 2j, 5 - 1j, 1e-3 + 40j])
    assert np.allclose(kernel_lt(spec, np.conj(s)), np.conj(kernel_lt(spec, s)), rtol=1e-14)


def test_tail_rate():
    assert kernel_tail_rate(TemperedML(0.5, 1.0, 2.0)) == 1.0
    assert kernel_tail_rate(TemperedML(0.5, 4.0, 1.0)) == pytest.approx(4 - 1.0)
    assert kernel_tail_rate(MittagLeffler(0.5, 1.0)) == 0.0
    assert kernel_tail_rate(Exponential(3.0)) == 3.0


def test_parameter_validation():
    with pytest.raises(ValueError):
        TemperedML(1.2, 0.1, 1)
    with pytest.raises(ValueError):
        TemperedML(0.5, -0.1, 1)
    with pytest.raises(ValueError):
        MittagLeffler(0.5, 0.0)
    with pytest.raises(ValueError):
        HawkesParams(0.0, 0.5, 0.5, 0.1, 1)
    with pytest.raises(ValueError):
        HawkesParams(1.0, -0.1, 0.5, 0.1, 1)
    p = HawkesParams(1.0, 0.5, 0.9, 0.5, 1.0)
    assert p.stationary and not HawkesParams(1.0, 1.0, 0.9, 0.5, 1.0).stationary


def test_kernel_dict_round_trip():
    for spec in [TemperedML(0.5, 1, 2), MittagLeffler(0.3, 1), Exponential(4), NoKernel()]:
        assert kernel_from_dict(kernel_to_dict(spec)) == spec
