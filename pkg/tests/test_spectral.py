import math

import numpy as np
import pytest

from freemax.cdf import CdfError, free_max_conv, free_min_conv, sup_distance
from freemax.poisson import mp_cdf
from freemax.spectral import (
    HermitianMatrix,
    Projection,
    RngSeed,
    empirical_spectral_cdf,
    general_position_check,
    haar_conjugate,
    haar_projection,
    logexp_approx,
    pnorm_approx,
    pnorm_approx_shifted,
    proj_join,
    proj_meet,
    range_contains,
    rng_from_seed,
    spectral_leq,
    spectral_max,
    spectral_min,
    spectral_projection,
)


def _random_pair(n, seed, lo=0.0, hi=1.0):
    rng = rng_from_seed(seed, 100)
    spec_a = np.sort(lo + (hi - lo) * rng.random(n))
    spec_b = np.sort(lo + (hi - lo) * rng.random(n))
    a = haar_conjugate(HermitianMatrix(np.diag(spec_a)), seed, 0)
    b = haar_conjugate(HermitianMatrix(np.diag(spec_b)), seed, 1)
    return a, b


# ----------------------------------------------------------------------
# types
# ----------------------------------------------------------------------
def test_hermitian_rejects_asymmetric():
    with pytest.raises(CdfError):
        HermitianMatrix(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_hermitian_reconstruction():
    a, _ = _random_pair(12, 5)
    recon = (a.eigenvectors * a.eigenvalues) @ a.eigenvectors.T
    assert np.linalg.norm(recon - a.array) <= 1e-10 * max(1.0, np.linalg.norm(a.array))


def test_projection_validates_orthonormality():
    with pytest.raises(CdfError):
        Projection(np.array([[1.0], [1.0]]))


def test_rng_seed_reproducibility():
    seed = RngSeed(42)
    x = seed.generator(1).standard_normal(5)
    y = RngSeed(42).generator(1).standard_normal(5)
    np.testing.assert_array_equal(x, y)
    assert seed.derive(3) == seed.derive(3)
    assert seed.derive(3) != seed.derive(4)


# ----------------------------------------------------------------------
# spectral projections
# ----------------------------------------------------------------------
def test_spectral_projection_ranks():
    a = HermitianMatrix(np.diag([1.0, 2.0, 3.0]))
    assert spectral_projection(a, 2.0, "closed_up").rank == 2
    assert spectral_projection(a, 2.0, "open_up").rank == 1
    assert spectral_projection(a, 5.0, "closed_up").rank == 0
    assert spectral_projection(a, 2.0, "closed_down").rank == 2
    assert spectral_projection(a, 2.0, "open_down").rank == 1


def test_spectral_projection_tie_tolerance():
    a = HermitianMatrix(np.diag([1.0, 2.0]))
    assert spectral_projection(a, 2.0 + 1e-10, "closed_up").rank == 1
    assert spectral_projection(a, 2.0 - 1e-10, "open_up").rank == 0


# ----------------------------------------------------------------------
# lattice
# ----------------------------------------------------------------------
def test_join_meet_two_lines():
    p = Projection(np.array([[1.0], [0.0]]))
    q = Projection(np.array([[1.0], [1.0]]) / math.sqrt(2))
    assert proj_join(p, q).rank == 2
    assert proj_meet(p, q).rank == 0
    assert general_position_check(p, q)


def test_lattice_idempotence():
    p = haar_projection(20, 7, 3)
    assert proj_join(p, p).rank == p.rank
    meet = proj_meet(p, p)
    assert meet.rank == p.rank
    assert np.linalg.norm(meet.matrix - p.matrix) < 1e-10


def test_lattice_laws_commutative_associative():
    n = 30
    p = haar_projection(n, 8, 11, 0)
    q = haar_projection(n, 10, 11, 1)
    r = haar_projection(n, 5, 11, 2)
    pq = proj_join(p, q)
    qp = proj_join(q, p)
    assert np.linalg.norm(pq.matrix - qp.matrix) < 1e-9
    left = proj_join(proj_join(p, q), r)
    right = proj_join(p, proj_join(q, r))
    assert left.rank == right.rank
    assert np.linalg.norm(left.matrix - right.matrix) < 1e-9
    # meet <= each factor <= join
    assert range_contains(p, proj_meet(p, q))
    assert range_contains(pq, p)


def test_haar_generic_ranks_100_trials():
    hits = 0
    for s in range(100):
        p = haar_projection(50, 30, 1000 + s, 0)
        q = haar_projection(50, 40, 1000 + s, 1)
        join_ok = proj_join(p, q).rank == 50
        meet_ok = proj_meet(p, q).rank == 20
        if join_ok and meet_ok and general_position_check(p, q):
            hits += 1
    assert hits == 100


def test_general_position_fails_for_equal_lines():
    p = Projection(np.array([[1.0], [0.0]]))
    assert not general_position_check(p, p)


def test_haar_projection_edges():
    assert haar_projection(8, 0, 1).rank == 0
    full = haar_projection(8, 8, 1)
    assert full.rank == 8
    assert full.tau == 1.0
    assert haar_projection(10, 3, 2).tau == pytest.approx(0.3)
    with pytest.raises(CdfError):
        haar_projection(5, 6, 1)


# ----------------------------------------------------------------------
# spectral max / min
# ----------------------------------------------------------------------
def test_spectral_max_commuting_diagonals():
    a = HermitianMatrix(np.diag([1.0, 3.0]))
    b = HermitianMatrix(np.diag([2.0, 2.0]))
    np.testing.assert_allclose(spectral_max(a, b).eigenvalues, [2.0, 3.0])
    np.testing.assert_allclose(spectral_min(a, b).eigenvalues, [1.0, 2.0])


def test_spectral_max_spin_pair_is_identity():
    a = HermitianMatrix(np.diag([1.0, -1.0]))
    b = HermitianMatrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
    out = spectral_max(a, b)
    np.testing.assert_allclose(out.array, np.eye(2), atol=1e-12)
    # cross-validation against the p-norm route after a +2I shift
    approx = pnorm_approx(a.shifted(2.0), b.shifted(2.0), 2.0**14).shifted(-2.0)
    assert np.linalg.norm(approx.array - out.array) < 1e-3


def test_spectral_max_idempotent():
    a, _ = _random_pair(10, 21)
    out = spectral_max(a, a)
    assert np.linalg.norm(out.array - a.array) < 1e-10


def test_spectral_max_upper_family_is_join():
    a, b = _random_pair(16, 77)
    out = spectral_max(a, b)
    points = np.unique(np.concatenate([a.eigenvalues, b.eigenvalues]))
    mids = 0.5 * (points[:-1] + points[1:])
    for t in mids:
        joined = proj_join(
            spectral_projection(a, t, "open_up"), spectral_projection(b, t, "open_up")
        )
        ours = spectral_projection(out, t, "open_up")
        assert ours.rank == joined.rank
        assert range_contains(joined, ours)


def test_spectral_max_dominates_in_spectral_order():
    a, b = _random_pair(10, 4)
    out = spectral_max(a, b)
    assert spectral_leq(a, out)
    assert spectral_leq(b, out)
    # hence also in the semidefinite order
    assert np.linalg.eigvalsh(out.array - a.array).min() >= -1e-10


def test_spectral_min_idempotent():
    a, _ = _random_pair(10, 22)
    assert np.linalg.norm(spectral_min(a, a).array - a.array) < 1e-10


def test_spectral_min_trace_inequality():
    for s in range(20):
        a, b = _random_pair(12, 400 + s)
        low = spectral_min(a, b)
        assert low.tau <= min(a.tau, b.tau) + 1e-12


def test_monotone_function_equivariance():
    knots_x = np.array([-2.0, 0.0, 0.5, 1.0, 3.0])
    knots_y = np.array([-1.0, 0.2, 0.7, 2.0, 2.5])  # increasing piecewise-linear

    def f(lams):
        return np.interp(lams, knots_x, knots_y)

    for s in range(5):
        a, b = _random_pair(12, 900 + s)
        lhs = spectral_max(a.apply(f), b.apply(f))
        rhs = spectral_max(a, b).apply(f)
        assert np.linalg.norm(lhs.array - rhs.array) < 1e-8


# ----------------------------------------------------------------------
# spectral order
# ----------------------------------------------------------------------
def test_leq_shift_always_holds():
    a, _ = _random_pair(9, 13)
    assert spectral_leq(a, a.shifted(1.0))
    assert not spectral_leq(a.shifted(1.0), a)


def test_leq_incomparable_diagonals():
    a = HermitianMatrix(np.diag([0.0, 1.0]))
    b = HermitianMatrix(np.diag([1.0, 0.0]))
    assert not spectral_leq(a, b)
    assert not spectral_leq(b, a)


def test_spectral_order_strictly_stronger_than_semidefinite():
    a = HermitianMatrix(np.diag([1.0, 0.0]))
    b = HermitianMatrix(np.array([[1.5, 0.5], [0.5, 0.5]]))
    assert np.linalg.eigvalsh(b.array - a.array).min() >= -1e-12
    assert not spectral_leq(a, b)


# ----------------------------------------------------------------------
# approximation lemmas
# ----------------------------------------------------------------------
def test_pnorm_commuting_limit():
    a = HermitianMatrix(np.diag([1.0, 2.0, 3.0]))
    b = HermitianMatrix(np.diag([3.0, 1.0, 2.0]))
    approx = pnorm_approx(a, b, 2.0**10)
    target = np.diag([3.0, 2.0, 3.0])  # entrywise max
    assert np.linalg.norm(approx.array - target) < 1e-2


def test_pnorm_monotone_in_p():
    a, b = _random_pair(8, 55, lo=0.1, hi=1.0)
    r2 = pnorm_approx(a, b, 2.0)
    r4 = pnorm_approx(a, b, 4.0)
    assert np.linalg.eigvalsh(r4.array - r2.array).min() >= -1e-10


def test_pnorm_requires_psd():
    a = HermitianMatrix(np.diag([1.0, -0.5]))
    with pytest.raises(CdfError):
        pnorm_approx(a, a, 4.0)
    # the shifted wrapper handles it; p kept inside the underflow range
    # for the shifted eigenvalue ratio (1.0/2.5)
    out = pnorm_approx_shifted(a, a, 2.0**6)
    assert np.linalg.norm(out.array - a.array) < 1e-10


def test_logexp_zero_pair():
    z = HermitianMatrix(np.zeros((3, 3)))
    out = logexp_approx(z, z, 10.0)
    np.testing.assert_allclose(out.array, math.log(2) / 10.0 * np.eye(3), atol=1e-12)


def test_logexp_commuting():
    a = HermitianMatrix(np.diag([0.0, 1.0]))
    b = HermitianMatrix(np.diag([1.0, 0.0]))
    out = logexp_approx(a, b, 100.0)
    assert np.linalg.norm(out.array - np.eye(2)) < 0.01


def test_logexp_distance_decreasing():
    a, b = _random_pair(8, 60, lo=0.993, hi=1.0)
    target = spectral_max(a, b)
    dists = [
        np.linalg.norm(logexp_approx(a, b, p).array - target.array)
        for p in (2.0**4, 2.0**8, 2.0**12)
    ]
    assert dists[0] > dists[1] > dists[2]


# ----------------------------------------------------------------------
# Haar conjugation and spectral measures
# ----------------------------------------------------------------------
def test_haar_conjugate_preserves_spectrum_and_trace():
    a = HermitianMatrix(np.diag([0.3, 0.9, 1.7]))
    u = haar_conjugate(a, 5)
    np.testing.assert_array_equal(u.eigenvalues, a.eigenvalues)
    assert u.tau == pytest.approx(a.tau, abs=1e-12)


def test_complex_hermitian_backend():
    spec = np.array([0.2, 0.5, 0.8, 1.3])
    a = haar_conjugate(HermitianMatrix(np.diag(spec)), 71, 0, complex_field=True)
    b = haar_conjugate(HermitianMatrix(np.diag(spec)), 71, 1, complex_field=True)
    assert np.iscomplexobj(a.array)
    np.testing.assert_allclose(a.eigenvalues, spec, atol=1e-12)
    out = spectral_max(a, b)
    fa, fb = empirical_spectral_cdf(a), empirical_spectral_cdf(b)
    err = np.max(
        np.abs(
            empirical_spectral_cdf(out).value(out.eigenvalues)
            - free_max_conv(fa, fb).value(out.eigenvalues)
        )
    )
    assert err <= 1e-9


def test_esd_examples():
    eye = HermitianMatrix(np.eye(4))
    esd = empirical_spectral_cdf(eye)
    assert esd.value(1.0) == 1.0
    assert esd.value(1.0 - 1e-9) == 0.0
    diag = HermitianMatrix(np.diag([1.0, 2.0, 3.0]))
    np.testing.assert_allclose(
        empirical_spectral_cdf(diag).value([1.0, 2.0, 3.0]), [1 / 3, 2 / 3, 1.0]
    )


def test_esd_conv_identity_max_and_min():
    # matrix model vs CDF formula, exactly at eigenvalue points
    for s in range(6):
        a, b = _random_pair(50, 700 + s)
        fa, fb = empirical_spectral_cdf(a), empirical_spectral_cdf(b)
        top = spectral_max(a, b)
        err_up = np.max(
            np.abs(
                empirical_spectral_cdf(top).value(top.eigenvalues)
                - free_max_conv(fa, fb).value(top.eigenvalues)
            )
        )
        bottom = spectral_min(a, b)
        err_dn = np.max(
            np.abs(
                empirical_spectral_cdf(bottom).value(bottom.eigenvalues)
                - free_min_conv(fa, fb).value(bottom.eigenvalues)
            )
        )
        assert err_up <= 1e-9
        assert err_dn <= 1e-9


def test_wishart_esd_close_to_free_poisson_law():
    n, m = 1000, 500
    rng = rng_from_seed(12, 0)
    g = rng.standard_normal((n, m)) / math.sqrt(n)
    w = HermitianMatrix(g @ g.T)
    law = mp_cdf(0.5)
    esd = empirical_spectral_cdf(w)
    xs = np.linspace(-0.5, 3.5, 801)
    assert sup_distance(esd, law, xs) < 0.05


def test_matrix_csv_round_trip(tmp_path):
    from freemax.spectral import read_matrix_csv, write_eigenvalues_csv, write_matrix_csv

    a, _ = _random_pair(7, 91)
    path = str(tmp_path / "matrix.csv")
    write_matrix_csv(a, path)
    back = read_matrix_csv(path)
    np.testing.assert_array_equal(back.array, a.array)
    eig_path = str(tmp_path / "eigs.csv")
    write_eigenvalues_csv(a, eig_path)
    import csv as _csv

    rows = list(_csv.reader(open(eig_path)))
    assert rows[0] == ["index", "lambda"]
    np.testing.assert_allclose([float(r[1]) for r in rows[1:]], a.eigenvalues)


def test_logexp_esd_converges_to_free_conv():
    # matrix sum-of-exponentials experiment against the CDF formula
    a, b = _random_pair(60, 31, lo=0.5, hi=1.0)
    conv = free_max_conv(empirical_spectral_cdf(a), empirical_spectral_cdf(b))
    xs = np.linspace(0.4, 1.2, 801)
    dists = []
    for k in (4.0, 16.0, 64.0):
        esd = empirical_spectral_cdf(logexp_approx(a, b, k))
        dists.append(sup_distance(esd, conv, xs))
    assert dists[0] > dists[1] > dists[2]
