"""The cubic reduced energy on kernel coefficients and its critical set.

For an N-star the leading finite-dimensional obstruction to continuing
the peaked state is a homogeneous cubic in the N-1 kernel coefficients.
After a linear change of variables it reads

    sum_j x_j^3 - (sum_j x_j)^3,

whose gradient vanishes only at the origin when N is odd.  A small
symmetric perturbation splits the origin into finitely many
nondegenerate critical points whose Hessian signs sum to the local
topological degree; for even N the critical set degenerates into
straight lines and no degree is defined.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EvenN, OddN
from .profiles import kernel_basis


@dataclass(frozen=True)
class ReducedEnergyReport:
    """Critical-point structure of the perturbed reduced energy."""

    N: int
    eps: float
    critical_points: tuple[tuple[float, ...], ...]
    hessian_signs: tuple[int, ...]
    local_degree: int | None
    even_case_lines: tuple[tuple[int, ...], ...] | None = None


def change_of_variables_matrix(N: int) -> np.ndarray:
    """Matrix sending kernel coefficients to the first N-1 edge sums."""
    basis = kernel_basis(N)
    A = np.zeros((N - 1, N - 1))
    for k, vec in enumerate(basis.vectors):
        A[:, k] = vec[: N - 1]
    return A


def reduced_energy(N: int, coeffs) -> float:
    """The cubic: sum over edges of (signed coefficient sum)^3.

    Homogeneous of degree three in the coefficients.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (N - 1,):
        raise DimensionMismatch(
            f"expected {N - 1} coefficients for N={N}, got {coeffs.shape}"
        )
    basis = kernel_basis(N)
    edge_sums = np.zeros(N)
    for k, vec in enumerate(basis.vectors):
        edge_sums += coeffs[k] * vec
    return float(np.sum(edge_sums**3))


def reduced_energy_diagonal(N: int, x) -> float:
    """The cubic after the change of variables: sum x^3 - (sum x)^3."""
    x = np.asarray(x, dtype=float)
    if x.shape != (N - 1,):
        raise DimensionMismatch(f"expected {N - 1} entries for N={N}, got {x.shape}")
    s = float(np.sum(x))
    return float(np.sum(x**3)) - s**3


def perturbed_gradient_hessian(
    N: int, eps: float, x
) -> tuple[np.ndarray, np.ndarray]:
    """Gradient and Hessian of the linearly perturbed diagonal cubic.

    The perturbation is -3*eps^2 * sum(x), normalized so the critical
    points sit exactly at the sign patterns scaled by eps and the
    Hessian there is diag(6*sign*eps).
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (N - 1,):
        raise DimensionMismatch(f"expected {N - 1} entries for N={N}, got {x.shape}")
    s = float(np.sum(x))
    grad = 3.0 * x**2 - 3.0 * s**2 - 3.0 * eps**2
    hess = np.full((N - 1, N - 1), -6.0 * s)
    hess[np.diag_indices(N - 1)] += 6.0 * x
    return grad, hess


def _newton_zeros(
    N: int, eps: float, starts: np.ndarray, iters: int = 60, tol: float = 1e-12
) -> np.ndarray:
    """Batched Newton on the perturbed gradient; returns converged points."""
    x = np.array(starts, dtype=float)
    for _ in range(iters):
        s = x.sum(axis=1)
        grad = 3.0 * x**2 - 3.0 * s[:, None] ** 2 - 3.0 * eps**2
        hess = np.zeros((x.shape[0], N - 1, N - 1))
        hess[:] = -6.0 * s[:, None, None]
        idx = np.arange(N - 1)
        hess[:, idx, idx] += 6.0 * x
        try:
            step = np.linalg.solve(hess, grad[..., None])[..., 0]
        except np.linalg.LinAlgError:
            # regularize the singular batch entries and keep going
            hess[:, idx, idx] += 1e-12
            step = np.linalg.solve(hess, grad[..., None])[..., 0]
        x = x - step
        bad = ~np.isfinite(x).all(axis=1)
        x[bad] = np.inf
    s = x.sum(axis=1)
    grad = 3.0 * x**2 - 3.0 * s[:, None] ** 2 - 3.0 * eps**2
    ok = np.isfinite(x).all(axis=1) & (
        np.linalg.norm(grad, axis=1) < tol * max(1.0, eps**2)
    )
    return x[ok]


def _dedupe(points: np.ndarray, scale: float) -> list[np.ndarray]:
    out: list[np.ndarray] = []
    for p in points:
        if not any(np.linalg.norm(p - q) < 1e-8 * max(1.0, scale) for q in out):
            out.append(p)
    return out


def enumerate_critical_points(N: int, eps: float) -> ReducedEnergyReport:
    """All critical points of the perturbed cubic, found two ways.

    Closed form: sign patterns with exactly (N-1)/2 minus entries,
    scaled by eps.  Verification: the gradient vanishes there, and a
    Newton sweep started from every sign pattern finds nothing else.
    The local degree is the sum of Hessian determinant signs.
    """
    if N % 2 == 0:
        raise EvenN("critical points degenerate into lines for even N")
    if N < 3:
        raise ValueError("need N >= 3")
    if not eps > 0.0:
        raise ValueError("eps must be positive")

    d = N - 1
    points = []
    signs = []
    for pattern in itertools.product((1, -1), repeat=d):
        if sum(1 for s in pattern if s < 0) != d // 2:
            continue
        x = eps * np.asarray(pattern, dtype=float)
        grad, hess = perturbed_gradient_hessian(N, eps, x)
        if np.linalg.norm(grad) >= 1e-10 * max(1.0, eps**2):
            raise AssertionError(f"closed-form point {x} is not critical")
        points.append(x)
        signs.append(int(math.copysign(1.0, np.linalg.det(hess))))

    # independent sweep: Newton from every sign pattern at two scales
    starts = []
    for pattern in itertools.product((1.0, -1.0), repeat=d):
        starts.append(eps * np.asarray(pattern))
        starts.append(0.5 * eps * np.asarray(pattern))
    found = _dedupe(_newton_zeros(N, eps, np.asarray(starts)), eps)
    known = {tuple(np.round(p / eps).astype(int)) for p in points}
    for p in found:
        key = tuple(np.round(p / eps).astype(int))
        if key not in known or not np.allclose(p, eps * np.asarray(key), atol=1e-9):
            raise AssertionError(f"Newton sweep found an unexpected zero {p}")

    return ReducedEnergyReport(
        N=N,
        eps=eps,
        critical_points=tuple(tuple(p) for p in points),
        hessian_signs=tuple(signs),
        local_degree=int(sum(signs)),
    )


def even_case_lines(N: int) -> list[tuple[int, ...]]:
    """Sign directions spanning the degenerate critical lines (even N).

    A direction sigma in {-1, 1}^(N-1) is critical when its number of
    minus entries n satisfies (N-1-2n)^2 = 1, i.e. n = N/2 - 1 or
    n = N/2.  Directions come in opposite pairs (sigma, -sigma) that
    span the same line; both members are returned.
    """
    if N % 2 == 1:
        raise OddN("the line structure exists only for even N")
    if N < 2:
        raise ValueError("need N >= 2")
    out = []
    for pattern in itertools.product((1, -1), repeat=N - 1):
        n = sum(1 for s in pattern if s < 0)
        if (N - 1 - 2 * n) ** 2 == 1:
            out.append(pattern)
    return out
