import math

import numpy as np
import pytest

from freemax.attraction import NormingConstants, convergence_report
from freemax.cdf import (
    CdfError,
    classical_max_conv,
    comparison_grid,
    free_max_conv,
    free_max_iterate,
    free_max_power,
    point_mass,
    rescale,
    sup_distance,
)
from freemax.laws import (
    BetaPowerCdf,
    ExponentialCdf,
    FrechetCdf,
    GpdCdf,
    GumbelCdf,
    LawKind,
    LawSpec,
    ParetoCdf,
    StdNormalCdf,
    UniformCdf,
    WeibullCdf,
    f_c_map,
    gpd_correspondence,
    law_catalog,
    make_law,
    stability_constants,
    verify_max_stable,
)


# ----------------------------------------------------------------------
# canonical formulas
# ----------------------------------------------------------------------
def test_canonical_formulas_match_definitions():
    xs = np.linspace(-3, 6, 901)
    pareto = np.where(xs > 1, 1 - np.maximum(xs, 1.0) ** -2.0, 0.0)
    checks = [
        (make_law(LawSpec(LawKind.FREE_TYPE_I)), np.clip(1 - np.exp(-xs), 0, 1)),
        (make_law(LawSpec(LawKind.FREE_TYPE_II, shape=2.0)), pareto),
        (make_law(LawSpec(LawKind.UNIFORM)), np.clip(xs, 0, 1)),
        (make_law(LawSpec(LawKind.CLASSICAL_GUMBEL)), np.exp(-np.exp(-xs))),
    ]
    for law, expected in checks:
        np.testing.assert_allclose(law.value(xs), expected, atol=1e-14)


def test_remaining_canonical_formulas():
    from scipy import stats

    xs_pos = np.linspace(0.05, 8, 401)
    frechet = make_law(LawSpec(LawKind.CLASSICAL_FRECHET, shape=1.5))
    np.testing.assert_allclose(frechet.value(xs_pos), np.exp(-(xs_pos**-1.5)), atol=1e-14)
    xs_neg = np.linspace(-4, -0.05, 401)
    weibull = make_law(LawSpec(LawKind.CLASSICAL_WEIBULL, shape=2.0))
    np.testing.assert_allclose(
        weibull.value(xs_neg), np.exp(-(np.abs(xs_neg) ** 2.0)), atol=1e-14
    )
    assert weibull.value(0.5) == 1.0
    xs = np.linspace(-5, 5, 401)
    normal = make_law(LawSpec(LawKind.STD_NORMAL))
    np.testing.assert_allclose(normal.value(xs), stats.norm.cdf(xs), atol=1e-14)
    gpd = make_law(LawSpec(LawKind.GENERALIZED_PARETO, shape=0.5))
    np.testing.assert_allclose(
        gpd.value(xs_pos), 1 - (1 + 0.5 * xs_pos) ** -2.0, atol=1e-14
    )


def test_beta_power_law_formula():
    law = make_law(LawSpec(LawKind.FREE_TYPE_III, shape=1.5))
    xs = np.linspace(-1, 0, 301)
    np.testing.assert_allclose(law.value(xs), 1 - np.abs(xs) ** 1.5, atol=1e-14)
    assert law.value(-1.5) == 0.0
    assert law.value(0.5) == 1.0


def test_free_type_ii_example_value():
    law = make_law(LawSpec(LawKind.FREE_TYPE_II, shape=2.0))
    assert law.value(2.0) == pytest.approx(0.75, abs=1e-14)


def test_gpd_minus_one_is_uniform():
    law = make_law(LawSpec(LawKind.GENERALIZED_PARETO, shape=-1.0))
    xs = np.linspace(0, 1, 201)
    np.testing.assert_allclose(law.value(xs), xs, atol=1e-14)
    assert law.omega == pytest.approx(1.0)


def test_gpd_small_gamma_approaches_exponential():
    g = make_law(LawSpec(LawKind.GENERALIZED_PARETO, shape=1e-8))
    g0 = make_law(LawSpec(LawKind.GENERALIZED_PARETO, shape=0.0))
    xs = np.linspace(0, 10, 501)
    assert np.max(np.abs(g.value(xs) - g0.value(xs))) < 1e-6


def test_gpd_supports():
    assert make_law(LawSpec(LawKind.GENERALIZED_PARETO, shape=0.5)).omega == math.inf
    neg = make_law(LawSpec(LawKind.GENERALIZED_PARETO, shape=-0.25))
    assert neg.omega == pytest.approx(4.0)
    assert neg.alpha == pytest.approx(0.0)


def test_make_law_rejects_bad_shape():
    with pytest.raises(CdfError):
        make_law(LawSpec(LawKind.FREE_TYPE_II, shape=-1.0))
    with pytest.raises(CdfError):
        make_law(LawSpec(LawKind.CLASSICAL_FRECHET, shape=0.0))
    with pytest.raises(CdfError):
        make_law(LawSpec(LawKind.UNIFORM, scale=-1.0))


def test_location_scale_parametrization():
    law = make_law(LawSpec(LawKind.FREE_TYPE_I, location=2.0, scale=3.0))
    base = ExponentialCdf()
    xs = np.linspace(-1, 20, 601)
    np.testing.assert_allclose(law.value(xs), base.value((xs - 2.0) / 3.0), atol=1e-14)


def test_law_spec_json_round_trip():
    spec = LawSpec(LawKind.GENERALIZED_PARETO, shape=0.5, location=1.0, scale=2.0)
    back = LawSpec.from_json(spec.to_json())
    assert back == spec
    assert '"kind": "GeneralizedPareto"' in spec.to_json()


# ----------------------------------------------------------------------
# f_c homomorphism
# ----------------------------------------------------------------------
def test_f1_maps_gumbel_to_exponential_law():
    mapped = f_c_map(GumbelCdf(), 1.0)
    target = ExponentialCdf()
    xs = np.linspace(-5, 15, 2001)
    np.testing.assert_allclose(mapped.value(xs), target.value(xs), atol=1e-12)


def test_f1_maps_frechet_to_pareto():
    mapped = f_c_map(FrechetCdf(2.0), 1.0)
    target = ParetoCdf(2.0)
    xs = np.linspace(0, 40, 2001)
    np.testing.assert_allclose(mapped.value(xs), target.value(xs), atol=1e-12)


def test_f1_maps_weibull_to_beta_power():
    mapped = f_c_map(WeibullCdf(1.5), 1.0)
    target = BetaPowerCdf(1.5)
    xs = np.linspace(-2, 1, 1201)
    np.testing.assert_allclose(mapped.value(xs), target.value(xs), atol=1e-12)


def test_fc_zero_set():
    c = 0.5
    mapped = f_c_map(UniformCdf(), c)
    cut = math.exp(-1.0 / c)
    assert mapped.value(cut - 1e-9) == 0.0
    assert mapped.value(cut + 1e-9) > 0.0


def test_fc_rejects_nonpositive_c():
    with pytest.raises(CdfError):
        f_c_map(UniformCdf(), 0.0)


@pytest.mark.parametrize("c", [0.5, 1.0, 2.0])
def test_fc_is_a_homomorphism(c):
    catalog = law_catalog()
    names = sorted(catalog)
    pairs = [(names[i], names[(i + 3) % len(names)]) for i in range(len(names))]
    for name_f, name_g in pairs:
        f, g = catalog[name_f], catalog[name_g]
        lhs = f_c_map(classical_max_conv(f, g), c)
        rhs = free_max_conv(f_c_map(f, c), f_c_map(g, c))
        grid = comparison_grid(f, g)
        assert sup_distance(lhs, rhs, grid) <= 1e-12, (name_f, name_g)


def test_fc_power_identity():
    f = StdNormalCdf()
    c, n = 1.0, 4
    product = f
    for _ in range(n - 1):
        product = classical_max_conv(product, f)
    lhs = f_c_map(product, c)
    rhs = free_max_iterate(f_c_map(f, c), n)
    grid = comparison_grid(f)
    assert sup_distance(lhs, rhs, grid) <= 1e-12


# ----------------------------------------------------------------------
# stability constants and verification
# ----------------------------------------------------------------------
def test_stability_constants_examples():
    c1 = stability_constants(LawKind.FREE_TYPE_I, None, 5.0)
    assert (c1.a_of_s, c1.b_of_s, c1.theta) == (1.0, pytest.approx(math.log(5)), 0.0)
    c2 = stability_constants(LawKind.FREE_TYPE_II, 2.0, 4.0)
    assert c2.a_of_s == pytest.approx(2.0)
    assert c2.b_of_s == 0.0 and c2.theta == pytest.approx(0.5)
    c3 = stability_constants(LawKind.FREE_TYPE_III, 1.0, 4.0)
    assert c3.a_of_s == pytest.approx(0.25)
    assert c3.theta == pytest.approx(-1.0)


def test_stability_constants_semigroup_laws():
    for kind, alpha in [
        (LawKind.FREE_TYPE_I, None),
        (LawKind.FREE_TYPE_II, 1.7),
        (LawKind.FREE_TYPE_III, 0.6),
    ]:
        s, t = 3.0, 5.0
        cs = stability_constants(kind, alpha, s)
        ct = stability_constants(kind, alpha, t)
        cst = stability_constants(kind, alpha, s * t)
        assert cst.a_of_s == pytest.approx(cs.a_of_s * ct.a_of_s, rel=1e-12)
        assert cst.b_of_s == pytest.approx(
            ct.a_of_s * cs.b_of_s + ct.b_of_s, rel=1e-12, abs=1e-12
        )


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
@pytest.mark.parametrize(
    "kind",
    [LawKind.FREE_TYPE_I, LawKind.FREE_TYPE_II, LawKind.FREE_TYPE_III],
)
def test_fixed_point_suite(kind, alpha):
    shape = None if kind is LawKind.FREE_TYPE_I else alpha
    law = make_law(LawSpec(kind, shape=shape))
    grid = comparison_grid(law)
    for s in (2.0, 10.0, 1e6):
        c = stability_constants(kind, shape, s)
        composed = rescale(free_max_power(law, s), c.a_of_s, c.b_of_s)
        assert sup_distance(composed, law, grid) <= 1e-10
    # the fitted check agrees and recovers the closed-form constants
    check = verify_max_stable(law, 3, tol=1e-9)
    c3 = stability_constants(kind, shape, 3.0)
    assert check.stable
    assert check.a == pytest.approx(c3.a_of_s, rel=1e-6)
    assert check.b == pytest.approx(c3.b_of_s, rel=1e-6, abs=1e-7)


def test_verify_max_stable_free_type_i():
    check = verify_max_stable(ExponentialCdf(), 3)
    assert check.stable
    assert check.a == pytest.approx(1.0, abs=1e-8)
    assert check.b == pytest.approx(math.log(3), abs=1e-8)


def test_verify_max_stable_gpd():
    check = verify_max_stable(GpdCdf(0.5), 2)
    assert check.stable


def test_gumbel_fails_free_stability():
    check = verify_max_stable(GumbelCdf(), 2)
    assert not check.stable
    assert check.sup_distance > 1e-3


def test_classical_types_fail_free_stability():
    for law in (GumbelCdf(), FrechetCdf(1.0), WeibullCdf(1.0)):
        check = verify_max_stable(law, 2)
        assert not check.stable
        assert check.sup_distance > 1e-3


def test_verify_rejects_degenerate():
    with pytest.raises(CdfError):
        verify_max_stable(point_mass(0.3), 2)


def test_each_stable_law_attracts_itself():
    # self-attraction with the closed-form constants, every n exact
    for kind, alpha in [
        (LawKind.FREE_TYPE_I, None),
        (LawKind.FREE_TYPE_II, 2.0),
        (LawKind.FREE_TYPE_III, 1.0),
    ]:
        law = make_law(LawSpec(kind, shape=alpha))
        constants = [
            NormingConstants(
                n,
                stability_constants(kind, alpha, float(n)).a_of_s,
                stability_constants(kind, alpha, float(n)).b_of_s,
            )
            for n in (2, 5, 17, 1000)
        ]
        rows = convergence_report(law, law, constants)
        assert all(r.sup_distance <= 1e-10 for r in rows)


# ----------------------------------------------------------------------
# GPD correspondence
# ----------------------------------------------------------------------
@pytest.mark.parametrize("gamma", [1.0, 0.5, 0.0, -0.5, -1.0, 2.5])
def test_gpd_correspondence_pointwise(gamma):
    match = gpd_correspondence(gamma)
    gpd = make_law(LawSpec(LawKind.GENERALIZED_PARETO, shape=gamma))
    base = make_law(LawSpec(match.kind, shape=match.alpha))
    mapped = rescale(base, match.a, match.b)
    grid = comparison_grid(gpd)
    assert sup_distance(mapped, gpd, grid) <= 1e-12


def test_gpd_correspondence_kinds():
    assert gpd_correspondence(1.0).kind is LawKind.FREE_TYPE_II
    assert gpd_correspondence(1.0).alpha == pytest.approx(1.0)
    assert gpd_correspondence(0.0) == (LawKind.FREE_TYPE_I, None, 1.0, 0.0)
    down = gpd_correspondence(-1.0)
    assert down.kind is LawKind.FREE_TYPE_III
    assert down.alpha == pytest.approx(1.0)
