import math

import numpy as np
import pytest
from scipy.integrate import quad

import levyescape as le
from levyescape.stable import ExtendedFunction, kernel_mass, kernel_second_moment


# ---------------------------------------------------------------------------
# normalizing constant
# ---------------------------------------------------------------------------

def test_stable_constant_alpha_one_is_inverse_pi():
    assert le.stable_constant(1.0) == pytest.approx(1.0 / math.pi, abs=1e-15)


def test_stable_constant_alpha_half():
    # Gamma(0.75) cancels between numerator and denominator
    assert le.stable_constant(0.5) == pytest.approx(0.5 / math.sqrt(2 * math.pi), abs=1e-15)


def test_stable_constant_high_precision_oracle():
    import mpmath

    mpmath.mp.dps = 50
    for alpha in (0.3, 0.7, 1.2, 1.5, 1.9):
        a = mpmath.mpf(alpha)
        ref = a * mpmath.gamma((1 + a) / 2) / (
            mpmath.power(2, 1 - a) * mpmath.sqrt(mpmath.pi) * mpmath.gamma(1 - a / 2)
        )
        assert le.stable_constant(alpha) == pytest.approx(float(ref), rel=1e-14)


def test_stable_constant_reflection_identity():
    # independent closed form via the reflection formula route
    for alpha in np.linspace(0.1, 1.9, 19):
        ref = math.gamma(1 + alpha) * math.sin(math.pi * alpha / 2) / math.pi
        assert le.stable_constant(alpha) == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("alpha", [0.0, 2.0, -0.3, 2.4])
def test_stable_constant_rejects_out_of_range(alpha):
    with pytest.raises(le.DomainValidationError):
        le.stable_constant(alpha)


# ---------------------------------------------------------------------------
# kernel density
# ---------------------------------------------------------------------------

def test_levy_density_full_power_law_value():
    spec = le.LevyMeasureSpec.full_power_law(1.0)
    assert le.levy_density(spec, 1.0) == pytest.approx(1.0 / math.pi, abs=1e-15)


def test_levy_density_truncated_vanishes_outside_radius():
    spec = le.LevyMeasureSpec.truncated_power_law(1.5, 1.0)
    assert le.levy_density(spec, 2.0) == 0.0
    assert le.levy_density(spec, 0.999) > 0.0


@pytest.mark.parametrize(
    "spec",
    [le.LevyMeasureSpec.full_power_law(0.8), le.LevyMeasureSpec.truncated_power_law(1.3, 2.0)],
)
def test_levy_density_symmetric(spec):
    for u in (0.05, 0.3, 0.9, 1.7):
        assert le.levy_density(spec, u) == le.levy_density(spec, -u)


def test_levy_density_no_atom_at_zero():
    spec = le.LevyMeasureSpec.full_power_law(1.5)
    with pytest.raises(le.DomainValidationError):
        le.levy_density(spec, 0.0)


def test_measure_spec_validation():
    with pytest.raises(le.DomainValidationError):
        le.LevyMeasureSpec.truncated_power_law(1.5, -1.0)
    with pytest.raises(le.DomainValidationError):
        le.LevyMeasureSpec("bogus", 1.5)
    with pytest.raises(le.DomainValidationError):
        le.LevyMeasureSpec(le.FULL_POWER_LAW, 1.5, kappa=2.0)


# ---------------------------------------------------------------------------
# characteristic exponent
# ---------------------------------------------------------------------------

def test_characteristic_exponent_values():
    assert le.characteristic_exponent(1.5, 0.0) == 0.0
    assert le.characteristic_exponent(1.0, 2.0) == pytest.approx(-2.0)
    assert le.characteristic_exponent(0.5, 4.0) == pytest.approx(-2.0)


# ---------------------------------------------------------------------------
# generator quadrature
# ---------------------------------------------------------------------------

def _gaussian_bump(x):
    x = np.asarray(x, dtype=float)
    return np.exp(-(x**2))


@pytest.mark.parametrize(
    "spec",
    [le.LevyMeasureSpec.full_power_law(1.5), le.LevyMeasureSpec.truncated_power_law(1.5, 1.0)],
)
def test_generator_annihilates_constants(spec):
    f = lambda x: np.full_like(np.asarray(x, dtype=float), 2.75)
    for x in (-0.7, 0.0, 1.3):
        assert abs(le.apply_generator(f, x, spec)) <= 1e-12


@pytest.mark.parametrize(
    "spec",
    [le.LevyMeasureSpec.full_power_law(1.5), le.LevyMeasureSpec.truncated_power_law(1.5, 0.7)],
)
def test_generator_annihilates_linear_all_jumps(spec):
    # roundoff in the symmetrized increment amplified by the kernel sets the
    # floor here; the criterion tolerance is 1e-8
    f = lambda x: 3.0 * np.asarray(x, dtype=float) - 1.2
    for x in (-0.4, 0.0, 0.9):
        assert abs(le.apply_generator(f, x, spec, le.ALL_JUMPS)) <= 1e-10


def test_generator_all_jumps_needs_heavy_alpha():
    spec = le.LevyMeasureSpec.full_power_law(0.8)
    with pytest.raises(le.DomainValidationError):
        le.apply_generator(_gaussian_bump, 0.0, spec, le.ALL_JUMPS)


def test_generator_compensations_agree_for_symmetric_kernel():
    spec = le.LevyMeasureSpec.full_power_law(1.5)
    a = le.apply_generator(_gaussian_bump, 0.3, spec, le.SMALL_JUMPS)
    b = le.apply_generator(_gaussian_bump, 0.3, spec, le.ALL_JUMPS)
    assert a == pytest.approx(b, abs=1e-12)


def test_generator_layer_field_beyond_truncation_radius():
    # the exponential layer profile turns the generator into minus the drift
    # term wherever the wall sits farther than one truncation radius away
    alpha, kappa, b_const = 1.5, 1.0, 1.0
    g = le.gamma_root(alpha, kappa, b_const)
    spec = le.LevyMeasureSpec.truncated_power_law(alpha, kappa)
    f = lambda x: le.left_layer_profile(x, g)
    for xi in (1.0, 1.5, 3.0, 6.0):
        lhs = le.apply_generator(f, xi, spec, le.ALL_JUMPS)
        rhs = -b_const * g * math.exp(-g * xi)
        assert lhs == pytest.approx(rhs, abs=1e-7)


def test_generator_linearity():
    spec = le.LevyMeasureSpec.full_power_law(1.3)
    f = _gaussian_bump
    g = lambda x: np.cos(np.asarray(x, dtype=float))
    combo = lambda x: 2.0 * f(x) - 0.5 * g(x)
    x = 0.4
    lf = le.apply_generator(f, x, spec)
    lg = le.apply_generator(g, x, spec)
    lc = le.apply_generator(combo, x, spec)
    assert lc == pytest.approx(2.0 * lf - 0.5 * lg, abs=1e-8)


def test_generator_scaling_law_full_kernel():
    # the intensity-scaled generator equals eps^alpha times the unit one;
    # oracle: direct quadrature of the symmetrized increment with scaled argument
    alpha, eps, x = 1.5, 0.3, 0.2
    spec = le.LevyMeasureSpec.full_power_law(alpha)
    c = le.stable_constant(alpha)
    route_a = eps**alpha * le.apply_generator(_gaussian_bump, x, spec)

    def integrand(w):
        return (
            (_gaussian_bump(x + eps * w) + _gaussian_bump(x - eps * w) - 2 * _gaussian_bump(x))
            * c
            * w ** (-1.0 - alpha)
        )

    route_b = quad(integrand, 0, np.inf, limit=400)[0]
    assert route_a == pytest.approx(route_b, abs=1e-8)


def test_generator_translation_covariance():
    spec = le.LevyMeasureSpec.full_power_law(1.4)
    c = 0.37
    shifted = lambda x: _gaussian_bump(np.asarray(x, dtype=float) + c)
    x = 0.1
    assert le.apply_generator(shifted, x, spec) == pytest.approx(
        le.apply_generator(_gaussian_bump, x + c, spec), abs=1e-9
    )


def test_generator_quadrature_refinement_stable():
    spec = le.LevyMeasureSpec.full_power_law(1.5)
    base = le.QuadratureConfig()
    finer = le.QuadratureConfig(
        inner_cutoff=base.inner_cutoff / 2, nodes_per_decade=base.nodes_per_decade * 2
    )
    x = 0.25
    v1 = le.apply_generator(_gaussian_bump, x, spec, quad=base)
    v2 = le.apply_generator(_gaussian_bump, x, spec, quad=finer)
    assert abs(v1 - v2) < base.tolerance


def test_generator_respects_declared_exterior():
    # escape-probability style data: 0 left of the interval, 1 right of it
    spec = le.LevyMeasureSpec.full_power_law(1.5)
    ramp = ExtendedFunction(lambda x: (np.asarray(x) + 1.0) / 2.0, -1.0, 1.0, 0.0, 1.0)
    val = le.apply_generator(ramp, 0.5, spec)
    # independent direct quadrature of the symmetrized increments
    def f(y):
        y = np.asarray(y, dtype=float)
        return np.clip((y + 1.0) / 2.0, 0.0, 1.0)

    c = le.stable_constant(1.5)
    integrand = lambda u: (f(0.5 + u) + f(0.5 - u) - 2 * f(0.5)) * c * u ** (-2.5)
    ref = quad(integrand, 0, 2, limit=400, points=[0.5, 1.5])[0]
    ref += quad(integrand, 2, np.inf, limit=400)[0]
    assert val == pytest.approx(ref, abs=1e-7)


def test_quadrature_config_validation():
    with pytest.raises(le.DomainValidationError):
        le.QuadratureConfig(inner_cutoff=1.5)
    with pytest.raises(le.DomainValidationError):
        le.QuadratureConfig(outer_cutoff=0.5)
    with pytest.raises(le.DomainValidationError):
        le.QuadratureConfig(nodes_per_decade=4)
    with pytest.raises(le.DomainValidationError):
        le.QuadratureConfig(tolerance=0.0)


def test_kernel_mass_and_moment_closed_forms():
    c, alpha = 0.7, 1.5
    assert kernel_mass(c, alpha, 0.5, 2.0) == pytest.approx(
        quad(lambda u: c * u ** (-2.5), 0.5, 2.0)[0], rel=1e-12
    )
    assert kernel_second_moment(c, alpha, 0.3) == pytest.approx(
        2 * quad(lambda u: c * u ** (-0.5), 0.0, 0.3)[0], rel=1e-12
    )


# ---------------------------------------------------------------------------
# increment sampler
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("alpha", [0.6, 1.0, 1.5])
def test_sampler_empirical_characteristic_function(alpha):
    rng = np.random.default_rng(90321)
    dt = 0.7
    n = 1_000_000
    draws = le.sample_stable_increments(alpha, dt, n, rng)
    for z in (0.5, 1.0, 2.0):
        target = math.exp(dt * le.characteristic_exponent(alpha, z))
        cos_vals = np.cos(z * draws)
        sin_vals = np.sin(z * draws)
        se_cos = cos_vals.std() / math.sqrt(n)
        se_sin = sin_vals.std() / math.sqrt(n)
        assert abs(cos_vals.mean() - target) <= 3 * se_cos
        assert abs(sin_vals.mean()) <= 3 * se_sin


def test_sampler_sign_symmetry():
    rng = np.random.default_rng(7)
    n = 200_000
    draws = le.sample_stable_increments(1.5, 1.0, n, rng)
    assert abs(np.mean(np.sign(draws))) <= 3.0 / math.sqrt(n)


def test_sampler_deterministic_given_state():
    a = le.sample_stable_increment(1.5, 0.25, np.random.default_rng(42))
    b = le.sample_stable_increment(1.5, 0.25, np.random.default_rng(42))
    assert a == b


def test_sampler_scaling_in_dt():
    # dt enters only through the dt^(1/alpha) prefactor
    alpha, dt = 1.25, 0.3
    x1 = le.sample_stable_increments(alpha, dt, 5, np.random.default_rng(3))
    x2 = le.sample_stable_increments(alpha, 1.0, 5, np.random.default_rng(3))
    np.testing.assert_allclose(x1, dt ** (1 / alpha) * x2, rtol=1e-13)


def test_sampler_rejects_bad_dt():
    with pytest.raises(le.DomainValidationError):
        le.sample_stable_increment(1.5, 0.0, np.random.default_rng(0))


# ---------------------------------------------------------------------------
# extended functions
# ---------------------------------------------------------------------------

def test_extended_function_exterior_values():
    f = ExtendedFunction(lambda x: np.asarray(x) ** 2, 0.0, 2.0, -5.0, 7.0)
    assert f(-1.0) == -5.0
    assert f(0.0) == -5.0
    assert f(2.0) == 7.0
    assert f(1.5) == pytest.approx(2.25)
    np.testing.assert_allclose(f(np.array([-3.0, 1.0, 9.0])), [-5.0, 1.0, 7.0])
