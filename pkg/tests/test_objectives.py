import numpy as np
import pytest

from psopt import objectives as ob
from psopt.numerics import DomainError, make_rng


def test_quadratic_values():
    f = ob.quadratic(np.ones(2), np.zeros(2))
    w = np.array([1.0, 2.0])
    assert f.value(w) == 2.5
    assert np.array_equal(f.gradient(w), w)
    assert f.value(f.w_star) == 0.0
    assert np.array_equal(f.gradient(f.w_star), np.zeros(2))


def test_quadratic_ill_conditioned_construction():
    f = ob.quadratic(np.array([1.0, 1e4]), np.zeros(2))
    assert f.diag[1] / f.diag[0] == 1e4


def test_quadratic_rejects_nonpositive_diag():
    with pytest.raises(DomainError):
        ob.quadratic(np.array([1.0, 0.0]), np.zeros(2))


def test_l1_values():
    f = ob.l1_lipschitz(np.zeros(2))
    assert f.value(np.array([1.0, -2.0])) == 3.0
    assert np.array_equal(f.gradient(np.array([1.0, -2.0])), [1.0, -1.0])
    assert f.value(f.w_star) == 0.0
    assert np.array_equal(f.gradient(f.w_star), np.zeros(2))
    assert f.lipschitz_G == pytest.approx(np.sqrt(2.0))
    # off the axes the subgradient norm equals G
    assert np.linalg.norm(f.gradient(np.array([0.3, -0.7]))) == pytest.approx(np.sqrt(2.0))


def test_logreg_at_zero_is_log2():
    ds = ob.SyntheticDataset.generate(seed=1, n=30, dim=3, noise=0.2)
    f = ob.logistic_regression(ds)
    assert f.value(np.zeros(3)) == pytest.approx(np.log(2.0), rel=1e-15)


def test_logreg_single_sample_gradient():
    ds = ob.SyntheticDataset(features=np.array([[1.0]]), labels=np.array([1.0]),
                             seed=0)
    f = ob.logistic_regression(ds)
    assert f.gradient(np.zeros(1)) == pytest.approx(-0.5)


def test_logreg_full_batch_is_mean_of_singletons():
    ds = ob.SyntheticDataset.generate(seed=2, n=25, dim=4, noise=0.1)
    f = ob.logistic_regression(ds)
    w = make_rng(0).standard_normal(4)
    singles = np.mean([f.gradient(w, [i]) for i in range(25)], axis=0)
    assert np.allclose(singles, f.gradient(w), rtol=1e-12, atol=1e-15)


def test_logreg_empty_batch_rejected():
    ds = ob.SyntheticDataset.generate(seed=2, n=5, dim=2)
    f = ob.logistic_regression(ds)
    with pytest.raises(DomainError):
        f.value(np.zeros(2), batch=[])


def test_logreg_f_star_is_attainable_lower_bound():
    ds = ob.SyntheticDataset.generate(seed=4, n=100, dim=5, noise=0.15)
    f = ob.logistic_regression(ds)
    fs = f.f_star
    rng = make_rng(1)
    assert all(f.value(rng.standard_normal(5)) >= fs for _ in range(20))


def test_dataset_regenerable_from_spec():
    ds = ob.SyntheticDataset.generate(seed=9, n=20, dim=3, noise=0.1, margin=0.5)
    ds2 = ob.SyntheticDataset.from_spec(ds.spec())
    assert np.array_equal(ds.features, ds2.features)
    assert np.array_equal(ds.labels, ds2.labels)


def test_mlp_zero_weights_give_log_num_classes():
    ds = ob.SyntheticDataset.generate(seed=3, n=20, dim=3)
    f = ob.tiny_mlp(ds, hidden=4, seed=0)
    assert f.value(np.zeros(f.dim)) == pytest.approx(np.log(2.0), rel=1e-12)


def test_mlp_same_seed_same_init():
    ds = ob.SyntheticDataset.generate(seed=3, n=20, dim=3)
    a = ob.tiny_mlp(ds, hidden=4, seed=5)
    b = ob.tiny_mlp(ds, hidden=4, seed=5)
    assert np.array_equal(a.init_params(), b.init_params())
    assert a.value(a.init_params()) == b.value(b.init_params())


def test_finite_diff_on_quadratic():
    f = ob.quadratic(np.ones(2), np.zeros(2))
    fd = ob.finite_diff_grad(f, np.array([1.0, 2.0]), h=1e-5)
    assert np.allclose(fd, [1.0, 2.0], atol=1e-9)


def test_finite_diff_on_constant_is_zero():
    class Flat(ob.Objective):
        def __init__(self):
            super().__init__(dim=3)

        def value(self, w, batch=None):
            return 4.2

    assert np.array_equal(ob.finite_diff_grad(Flat(), np.ones(3)), np.zeros(3))


def test_finite_diff_rejects_nonpositive_h():
    f = ob.quadratic(np.ones(1), np.zeros(1))
    with pytest.raises(DomainError):
        ob.finite_diff_grad(f, np.zeros(1), h=0.0)


@pytest.mark.parametrize("make", [
    lambda: ob.quadratic(np.array([1.0, 4.0, 9.0]), np.array([0.1, -0.2, 0.3])),
    lambda: ob.logistic_regression(
        ob.SyntheticDataset.generate(seed=6, n=40, dim=4, noise=0.1)),
    lambda: ob.tiny_mlp(
        ob.SyntheticDataset.generate(seed=6, n=30, dim=3, noise=0.1),
        hidden=5, seed=7),
])
def test_analytic_gradient_matches_finite_differences(make):
    f = make()
    rng = make_rng(21)
    for _ in range(10):
        w = rng.standard_normal(f.dim)
        g = f.gradient(w)
        fd = ob.finite_diff_grad(f, w, h=1e-5)
        assert np.linalg.norm(g - fd) <= 1e-5 * max(np.linalg.norm(g), 1e-12)


def test_l1_gradient_matches_finite_differences_off_kink():
    f = ob.l1_lipschitz(np.zeros(4))
    rng = make_rng(22)
    for _ in range(10):
        w = rng.standard_normal(4)
        w[np.abs(w) < 0.1] = 0.5
        fd = ob.finite_diff_grad(f, w, h=1e-5)
        assert np.allclose(f.gradient(w), fd, atol=1e-9)


@pytest.mark.parametrize("make", [
    lambda: ob.quadratic(np.array([1.0, 3.0]), np.zeros(2)),
    lambda: ob.l1_lipschitz(np.zeros(2)),
    lambda: ob.logistic_regression(
        ob.SyntheticDataset.generate(seed=8, n=30, dim=2, noise=0.1)),
])
def test_convexity_spot_check(make):
    f = make()
    rng = make_rng(23)
    for _ in range(30):
        a, b = rng.standard_normal(2), rng.standard_normal(2)
        lam = rng.random()
        mid = f.value(lam * a + (1 - lam) * b)
        assert mid <= lam * f.value(a) + (1 - lam) * f.value(b) + 1e-12
