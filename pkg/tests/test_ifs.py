import itertools

import numpy as np
import pytest

from fbe import systems
from fbe.addresses import Address, parse_address
from fbe.errors import DomainError, NoConvergenceError
from fbe.ifs import (
    IfsSystem,
    attractor,
    chaos_game,
    coding_map,
    dual,
    hausdorff_distance,
    random_address,
    verify_semiconjugacy,
)
from fbe.maps import AffineMap, from_sphere

from oracles import cantor_level_points

A = parse_address


# -- apply_word ------------------------------------------------------------------


def test_apply_word_examples(cantor_ifs, interval_ifs):
    assert cantor_ifs.apply_word_point((1,), [2.0]) == pytest.approx([2 / 3])
    assert cantor_ifs.apply_word_point((), [0.7]) == pytest.approx([0.7])
    assert interval_ifs.apply_word_point((-2,), [0.5]) == pytest.approx([0.0])


def test_apply_word_concatenation(koch_ifs, rng):
    for _ in range(30):
        w1 = tuple(int(d) for d in rng.choice([-2, -1, 1, 2], size=3))
        w2 = tuple(int(d) for d in rng.choice([-2, -1, 1, 2], size=3))
        x = rng.normal(size=2)
        lhs = koch_ifs.apply_word_point(w1 + w2, x)
        rhs = koch_ifs.apply_word_point(w1, koch_ifs.apply_word_point(w2, x))
        assert np.linalg.norm(lhs - rhs) < 1e-12


def test_inverse_word_identity(interval_ifs, koch_ifs, rng):
    for ifs, dim in ((interval_ifs, 1), (koch_ifs, 2)):
        for _ in range(20):
            k = int(rng.integers(1, 9))
            w = tuple(int(d) for d in rng.choice([1, 2], size=k))
            x = rng.normal(size=dim)
            inv = tuple(-d for d in reversed(w))
            back = ifs.apply_word_point(w, ifs.apply_word_point(inv, x))
            assert np.linalg.norm(back - x) < 1e-9


# -- lipschitz bounds ---------------------------------------------------------------


def test_lipschitz_examples(cantor_ifs, koch_ifs):
    assert cantor_ifs.map_lipschitz(1) == pytest.approx(1 / 3)
    assert koch_ifs.map_lipschitz(1) == pytest.approx(1 / np.sqrt(3), abs=1e-12)
    ident = IfsSystem("R2", (AffineMap(np.eye(2), np.zeros(2)),))
    assert ident.map_lipschitz(1) == pytest.approx(1.0)


def test_inverse_lipschitz(cantor_ifs):
    assert cantor_ifs.map_lipschitz(-1) == pytest.approx(3.0)


# -- attractor -----------------------------------------------------------------------


def test_attractor_cantor_vs_level_cover(cantor_ifs):
    cloud = attractor(cantor_ifs, np.array([[0.0]]), cell=3.0**-8)
    cover = np.array([[float(q)] for q in cantor_level_points(8)])
    assert hausdorff_distance(cloud.points, cover) <= 3.0**-7


def test_attractor_interval_gaps(interval_ifs):
    cell = 2.0**-9
    cloud = attractor(interval_ifs, systems.default_seed(interval_ifs), cell=cell)
    xs = np.sort(cloud.points[:, 0])
    assert xs[0] <= 2 * cell and xs[-1] >= 1 - 2 * cell
    assert np.max(np.diff(xs)) <= 2 * cell


def test_attractor_single_map():
    ifs = IfsSystem("R1", (AffineMap(np.array([[0.5]]), np.array([0.0])),), 0.5)
    cloud = attractor(ifs, np.array([[1.0]]), cell=1e-3)
    assert np.abs(cloud.points).max() <= 1e-3


def test_attractor_no_convergence():
    ifs = IfsSystem("R1", (AffineMap(np.array([[0.5]]), np.array([0.0])),), 0.5)
    with pytest.raises(NoConvergenceError) as ei:
        attractor(ifs, np.array([[1.0]]), depth=2, cell=1e-9)
    assert ei.value.residual is not None


def test_attractor_f_invariance(cantor_cloud, cantor_ifs, sierpinski_cloud, sierpinski_ifs):
    for ifs, cloud in ((cantor_ifs, cantor_cloud), (sierpinski_ifs, sierpinski_cloud)):
        imgs = np.concatenate(
            [ifs.transform(i, cloud.points) for i in range(1, ifs.n_maps + 1)]
        )
        assert hausdorff_distance(imgs, cloud.points) <= 2 * cloud.epsilon


# -- chaos game ----------------------------------------------------------------------


def test_chaos_game_matches_attractor(cantor_ifs, cantor_cloud):
    orbit = chaos_game(cantor_ifs, 100_000, burn_in=64, rng_seed=1)
    cell = cantor_cloud.meta["cell"]
    assert cantor_cloud.nearest_dist(orbit.points).max() <= 3 * cell


def test_chaos_game_deterministic(cantor_ifs):
    a = chaos_game(cantor_ifs, 2000, burn_in=10, rng_seed=42)
    b = chaos_game(cantor_ifs, 2000, burn_in=10, rng_seed=42)
    assert np.array_equal(a.points, b.points)
    c = chaos_game(cantor_ifs, 2000, burn_in=10, rng_seed=43)
    assert not np.array_equal(a.points, c.points)


def test_chaos_game_single_map():
    ifs = IfsSystem("R1", (AffineMap(np.array([[0.5]]), np.array([0.5])),), 0.5)
    orbit = chaos_game(ifs, 500, burn_in=100, rng_seed=0)
    assert np.abs(orbit.points - 1.0).max() < 1e-9


# -- coding map ----------------------------------------------------------------------


def test_coding_map_interval_values(interval_ifs):
    assert coding_map(interval_ifs, A("(1)*")) == pytest.approx([0.0], abs=1e-9)
    assert coding_map(interval_ifs, A("(2)*")) == pytest.approx([1.0], abs=1e-9)
    assert coding_map(interval_ifs, A("-1.(2)*")) == pytest.approx([2.0], abs=1e-9)
    assert coding_map(interval_ifs, A("1.(2)*")) == pytest.approx([0.5], abs=1e-9)


def test_coding_map_periodic_fixed_point(interval_ifs, rng):
    # pi(overline(w)) is the fixed point of f_w: cross-check by solving directly
    for _ in range(20):
        k = int(rng.integers(1, 4))
        w = tuple(int(d) for d in rng.choice([1, 2], size=k))
        comp = interval_ifs.identity_composition()
        for d in w:
            comp = comp.compose(interval_ifs.map_for(d))
        fixed = comp.fixed_point()
        val = coding_map(interval_ifs, Address((), w), tol=1e-11)
        assert np.linalg.norm(val - fixed) < 1e-9


def test_coding_map_domain_errors(interval_ifs):
    with pytest.raises(DomainError):
        coding_map(interval_ifs, A("1.2"))  # finite word
    with pytest.raises(DomainError):
        coding_map(interval_ifs, A("(-1)*"))  # negative tail


def test_coding_map_sphere(cantor_ifs):
    ifs = systems.projective_line()
    val = coding_map(ifs, A("(1)*"), tol=1e-10)
    z = from_sphere(val[None, :])[0]
    assert z.real == pytest.approx(0.0, abs=1e-7)
    assert abs(z.imag) < 1e-7


# -- hausdorff -----------------------------------------------------------------------


def test_hausdorff_examples():
    assert hausdorff_distance(np.array([[0.0]]), np.array([[1.0]])) == 1.0
    a = np.random.default_rng(0).normal(size=(40, 2))
    assert hausdorff_distance(a, a) == 0.0


def test_hausdorff_level_covers():
    k = 3
    a = np.array([[float(q)] for q in cantor_level_points(k)])
    b = np.array([[float(q)] for q in cantor_level_points(k + 1)])
    assert hausdorff_distance(a, b) == pytest.approx(3.0 ** -(k + 1))


def test_hausdorff_matches_bruteforce(rng):
    a = rng.normal(size=(50, 2))
    b = rng.normal(size=(60, 2))
    diff = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2)
    brute = max(diff.min(axis=1).max(), diff.min(axis=0).max())
    assert hausdorff_distance(a, b) == pytest.approx(brute, rel=1e-12)


def test_hausdorff_empty_error():
    with pytest.raises(DomainError):
        hausdorff_distance(np.empty((0, 1)), np.array([[1.0]]))


# -- dual ----------------------------------------------------------------------------


def test_dual_involution(cantor_ifs, koch_ifs):
    for ifs in (cantor_ifs, koch_ifs):
        dd = dual(dual(ifs))
        for m, m2 in zip(ifs.maps, dd.maps):
            assert np.allclose(m.matrix, m2.matrix)
            assert np.allclose(m.offset, m2.offset)


def test_dual_moebius_involution():
    ifs = systems.mobius_arc()
    dd = dual(dual(ifs))
    for m, m2 in zip(ifs.maps, dd.maps):
        assert np.allclose(m.matrix(), m2.matrix())


def test_dual_scalar():
    ifs = IfsSystem("R1", (AffineMap(np.array([[1 / 3]]), np.array([0.0])),))
    d = dual(ifs)
    assert d.maps[0].matrix[0, 0] == pytest.approx(3.0)


# -- semiconjugacy -----------------------------------------------------------------


def test_semiconjugacy_spec_examples(interval_ifs):
    # n=1, iota=(2)*: pi(sigma_1((2)*)) = f_1(1) = 1/2
    from fbe.addresses import sigma

    lhs = coding_map(interval_ifs, sigma(1, A("(2)*")))
    assert lhs == pytest.approx([0.5], abs=1e-9)
    # n=-1, iota=1.(2)*: cancellation gives (2)* with pi = 1 = f_1^{-1}(1/2)
    lhs = coding_map(interval_ifs, sigma(-1, A("1.(2)*")))
    assert lhs == pytest.approx([1.0], abs=1e-9)


def test_semiconjugacy_reports(interval_ifs, cantor_ifs):
    for ifs in (interval_ifs, cantor_ifs):
        rep = verify_semiconjugacy(ifs, n_samples=40, tol=1e-9, rng_seed=2)
        assert rep.passed, rep.failures
        assert rep.max_residual <= 1e-9
        assert rep.n_checks == 40 * 2 * ifs.n_maps


def test_random_address_validity(rng):
    for _ in range(200):
        addr = random_address(rng, 3, tail="any")
        from fbe.addresses import validate

        assert validate(addr, 3).in_I


# -- moebius arc invariant -------------------------------------------------------------


def test_mobius_arc_on_circle():
    ifs = systems.mobius_arc()
    cloud = attractor(ifs, systems.default_seed(ifs), depth=200, cell=1e-3)
    z = from_sphere(cloud.points)
    residual = np.abs(np.abs(z - 1.5j) - 0.5)
    assert residual.max() <= 10 * cloud.epsilon
