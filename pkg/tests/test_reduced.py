"""Reduced cubic energy: identities, critical points, degenerate lines."""

import math

import numpy as np
import pytest

from graphnls import (
    change_of_variables_matrix,
    enumerate_critical_points,
    even_case_lines,
    perturbed_gradient_hessian,
    reduced_energy,
    reduced_energy_diagonal,
)
from graphnls.errors import DimensionMismatch, EvenN, OddN


@pytest.mark.parametrize("N", [3, 4, 5, 7])
def test_change_of_variables_identity(N):
    A = change_of_variables_matrix(N)
    assert abs(np.linalg.det(A)) > 1e-12
    rng = np.random.default_rng(N)
    for _ in range(10):
        b = rng.standard_normal(N - 1)
        assert reduced_energy(N, b) == pytest.approx(
            reduced_energy_diagonal(N, A @ b), rel=1e-12, abs=1e-12
        )


def test_reduced_energy_is_homogeneous_cubic():
    rng = np.random.default_rng(1)
    for _ in range(10):
        b = rng.standard_normal(4)
        t = float(rng.uniform(0.2, 3.0))
        assert reduced_energy(5, t * b) == pytest.approx(
            t**3 * reduced_energy(5, b), rel=1e-12
        )


def test_dimension_checks():
    with pytest.raises(DimensionMismatch):
        reduced_energy(4, [1.0, 2.0])
    with pytest.raises(DimensionMismatch):
        reduced_energy_diagonal(4, [1.0, 2.0])
    with pytest.raises(DimensionMismatch):
        perturbed_gradient_hessian(4, 0.1, [1.0, 2.0])


@pytest.mark.parametrize("N, eps", [(3, 0.4), (5, 0.3), (6, 0.25)])
def test_gradient_and_hessian_match_finite_differences(N, eps):
    def value(x):
        return reduced_energy_diagonal(N, x) - 3.0 * eps**2 * float(np.sum(x))

    rng = np.random.default_rng(10 * N)
    h = 1e-6
    for _ in range(6):
        x = rng.uniform(-1.0, 1.0, size=N - 1)
        grad, hess = perturbed_gradient_hessian(N, eps, x)
        assert np.allclose(hess, hess.T)
        for k in range(N - 1):
            step = np.zeros(N - 1)
            step[k] = h
            fd = (value(x + step) - value(x - step)) / (2.0 * h)
            assert grad[k] == pytest.approx(fd, abs=5e-8)
            gp, _ = perturbed_gradient_hessian(N, eps, x + step)
            gm, _ = perturbed_gradient_hessian(N, eps, x - step)
            assert np.allclose(hess[:, k], (gp - gm) / (2.0 * h), atol=5e-8)


def test_tripod_critical_points_closed_form():
    rep = enumerate_critical_points(3, 0.5)
    assert rep.N == 3 and rep.eps == 0.5
    pts = {tuple(round(c, 12) for c in p) for p in rep.critical_points}
    assert pts == {(0.5, -0.5), (-0.5, 0.5)}
    assert rep.hessian_signs == (-1, -1)
    assert rep.local_degree == -2
    assert rep.even_case_lines is None


@pytest.mark.parametrize(
    "N, count, degree",
    [(3, 2, -2), (5, 6, 6), (7, 20, -20)],
)
def test_odd_star_counts_and_degrees(N, count, degree):
    rep = enumerate_critical_points(N, 0.3)
    assert len(rep.critical_points) == count
    assert count == math.comb(N - 1, (N - 1) // 2)
    assert rep.local_degree == degree
    for p in rep.critical_points:
        # every point is a sign pattern scaled by eps with (N-1)/2 minuses
        assert sorted(abs(c) for c in p) == pytest.approx([0.3] * (N - 1))
        assert sum(1 for c in p if c < 0) == (N - 1) // 2


def test_critical_points_scale_linearly_with_eps():
    a = enumerate_critical_points(5, 0.2)
    b = enumerate_critical_points(5, 0.7)
    pa = {tuple(round(c / 0.2, 9) for c in p) for p in a.critical_points}
    pb = {tuple(round(c / 0.7, 9) for c in p) for p in b.critical_points}
    assert pa == pb


def test_enumerate_rejects_bad_input():
    with pytest.raises(EvenN):
        enumerate_critical_points(4, 0.3)
    with pytest.raises(ValueError):
        enumerate_critical_points(1, 0.3)
    with pytest.raises(ValueError):
        enumerate_critical_points(5, 0.0)


@pytest.mark.parametrize("N, count", [(2, 2), (4, 6), (6, 20)])
def test_even_case_line_counts(N, count):
    lines = even_case_lines(N)
    assert len(lines) == count
    assert count == 2 * math.comb(N - 1, N // 2)
    dir_set = {tuple(s) for s in lines}
    for sigma in lines:
        assert set(sigma) <= {-1, 1}
        assert tuple(-s for s in sigma) in dir_set
        n_minus = sum(1 for s in sigma if s < 0)
        assert (N - 1 - 2 * n_minus) ** 2 == 1


def test_even_case_lines_are_unperturbed_critical_rays():
    for sigma in even_case_lines(4):
        for t in (0.8, 1.7, -0.4):
            grad, _ = perturbed_gradient_hessian(4, 0.0, t * np.asarray(sigma, float))
            assert np.max(np.abs(grad)) < 1e-12
    with pytest.raises(OddN):
        even_case_lines(5)


def test_generic_directions_are_not_critical():
    rng = np.random.default_rng(17)
    for _ in range(10):
        x = rng.standard_normal(3)
        x /= np.linalg.norm(x)
        grad, _ = perturbed_gradient_hessian(4, 0.0, x)
        sigma = np.sign(x)
        n_minus = int(np.sum(sigma < 0))
        if (3 - 2 * n_minus) ** 2 != 1 or not np.allclose(np.abs(x), np.abs(x)[0]):
            assert np.max(np.abs(grad)) > 1e-10
