"""Peaked bound states by damped Newton continuation from the seed state.

The discrete problem is the weak form of -u'' + lam*u = (u+)^(2*mu+1)
with Kirchhoff coupling.  Newton is seeded with the peaked ansatz at
the first shift of the schedule and with the rescaled previous solution
afterwards; the correction u - W and its split along the tapered kernel
modes are measured, not assumed.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .discrete import (
    DiscreteField,
    KirchhoffOperator,
    Mesh,
    assemble,
    dual_residual_norm,
    lambda_inner,
    lambda_norm,
    refined_mesh,
    weighted_mass,
)
from .errors import NotConverged, SingularJacobian
from .graphs import MetricGraph
from .profiles import AnsatzSpec, assemble_ansatz, sample_kernel_mode


@dataclass(frozen=True)
class SolveConfig:
    """Newton and continuation knobs."""

    mu: float = 1.0
    newton_tol: float = 1e-10
    max_iters: int = 50
    damping: float = 0.5
    lambda_schedule: tuple[float, ...] = ()
    nodes_per_width: float = 40.0
    # mesh refinement grows like (lam/lam0)^growth so discretization
    # error in the normalized diagnostics keeps shrinking along a sweep
    refinement_growth: float = 0.25
    # "previous": rescale the last converged state; "ansatz": start every
    # shift from the peaked seed state itself
    seed: str = "previous"

    def __post_init__(self):
        if not self.newton_tol > 0.0:
            raise ValueError("newton_tol must be positive")
        if not 0.0 < self.damping < 1.0:
            raise ValueError("damping must be in (0, 1)")
        if self.seed not in ("previous", "ansatz"):
            raise ValueError(f"unknown seed strategy {self.seed!r}")
        sched = tuple(float(x) for x in self.lambda_schedule)
        if any(b <= a for a, b in zip(sched, sched[1:])):
            raise ValueError("lambda_schedule must be strictly increasing")
        object.__setattr__(self, "lambda_schedule", sched)


@dataclass
class BoundStateResult:
    """One converged (or not) state plus its measured diagnostics.

    residual_norm is the natural-norm residual relative to the state's
    own size, the quantity the Newton tolerance is applied to.
    correction_norm, kernel_component_norm and peak_locations are
    filled by the sweep, which knows the seed state.
    """

    u: DiscreteField
    lam: float
    converged: bool
    iterations: int
    residual_norm: float
    residual_norm_absolute: float
    min_value: float
    correction_norm: float | None = None
    kernel_component_norm: float | None = None
    peak_locations: list[tuple[str, float]] = field(default_factory=list)


def _nodal_nonlinearity(mu: float, v: np.ndarray) -> np.ndarray:
    return np.maximum(v, 0.0) ** (2.0 * mu + 1.0)


def _nodal_nonlinearity_slope(mu: float, v: np.ndarray) -> np.ndarray:
    return (2.0 * mu + 1.0) * np.maximum(v, 0.0) ** (2.0 * mu)


def nonlinear_residual(
    op: KirchhoffOperator, mu: float, u: DiscreteField
) -> DiscreteField:
    """Weak-form residual S u + lam M u - M f(u), f = (u+)^(2*mu+1).

    Zero exactly at discrete Kirchhoff solutions; the positive part in
    f means nonpositive states produce a purely linear residual.
    """
    v = u.values
    r = (
        op.stiffness @ v
        + op.lam * (op.mass @ v)
        - op.mass @ _nodal_nonlinearity(mu, v)
    )
    return DiscreteField(op.mesh, r)


def jacobian(op: KirchhoffOperator, mu: float, u: DiscreteField) -> sp.csr_matrix:
    """Exact derivative of the discrete residual: S + lam M - M f'(u)."""
    slope = sp.diags(_nodal_nonlinearity_slope(mu, u.values))
    return (op.stiffness + op.lam * op.mass - op.mass @ slope).tocsr()


def symmetric_linearization(
    op: KirchhoffOperator, mu: float, u: DiscreteField
) -> sp.csr_matrix:
    """Galerkin form of the linearized operator -v'' + lam v - f'(u) v.

    Unlike the residual Jacobian, the potential term is assembled as a
    weighted mass matrix, so the result is symmetric and suited to
    eigenvalue diagnostics of the linearization.
    """
    W = weighted_mass(op.mesh, _nodal_nonlinearity_slope(mu, u.values))
    return (op.stiffness + op.lam * op.mass - W).tocsr()


def _relative_residual(op: KirchhoffOperator, r: np.ndarray, u: DiscreteField):
    absolute = dual_residual_norm(op, r)
    return absolute / max(1.0, lambda_norm(op, u)), absolute


def newton_solve(
    op: KirchhoffOperator, mu: float, u0: DiscreteField, cfg: SolveConfig
) -> BoundStateResult:
    """Damped Newton with the exact discrete Jacobian S + lam M - M f'(u).

    Backtracking halves the step until the natural-norm residual
    decreases (Armijo on the residual norm); non-convergence within
    max_iters is reported in the result, not raised.
    """
    free = op.free
    v = u0.values.copy()
    v[op.mesh.dirichlet_dofs] = 0.0
    u = DiscreteField(op.mesh, v)
    rel, absolute = _relative_residual(op, nonlinear_residual(op, mu, u).values, u)
    converged = rel <= cfg.newton_tol
    iters = 0
    while not converged and iters < cfg.max_iters:
        iters += 1
        Jf = jacobian(op, mu, u)[free][:, free].tocsc()
        r = nonlinear_residual(op, mu, u).values
        try:
            step_free = spla.splu(Jf).solve(-r[free])
        except RuntimeError as exc:
            raise SingularJacobian(str(exc)) from exc
        if not np.all(np.isfinite(step_free)):
            raise SingularJacobian("non-finite Newton step")
        step = np.zeros(op.mesh.ndof)
        step[free] = step_free

        t, accepted = 1.0, False
        while t >= 2.0**-24:
            trial = DiscreteField(op.mesh, u.values + t * step)
            trial_rel, trial_abs = _relative_residual(
                op, nonlinear_residual(op, mu, trial).values, trial
            )
            if trial_rel <= (1.0 - 1e-4 * t) * rel or trial_rel <= cfg.newton_tol:
                u, rel, absolute, accepted = trial, trial_rel, trial_abs, True
                break
            t *= cfg.damping
        if not accepted:
            break
        converged = rel <= cfg.newton_tol

    return BoundStateResult(
        u=u,
        lam=op.lam,
        converged=bool(converged),
        iterations=iters,
        residual_norm=rel,
        residual_norm_absolute=absolute,
        min_value=float(np.min(u.values)),
    )


def kernel_projection_diagnostics(
    op: KirchhoffOperator, result: BoundStateResult, ansatz: AnsatzSpec
) -> tuple[float, float]:
    """Split u - W along the tapered kernel modes, in the natural norm.

    The modes are nearly orthogonal already; the small Gram system is
    solved exactly anyway.  Returns (norm of the kernel component,
    norm of the orthogonal complement component).
    """
    if not result.converged:
        raise NotConverged("kernel diagnostics need a converged result")
    mesh = op.mesh
    seed = assemble_ansatz(mesh.graph, ansatz, mesh)
    phi = result.u.values - seed.values
    modes = []
    for star, _ in ansatz.peaks:
        for j in range(1, star.degree):
            modes.append(
                sample_kernel_mode(
                    mesh, star, j, ansatz.lam, ansatz.mu, ansatz.cutoff_kind
                )
            )
    gram = np.array([[lambda_inner(op, a, b) for b in modes] for a in modes])
    rhs = np.array([lambda_inner(op, a, phi) for a in modes])
    coef = np.linalg.solve(gram, rhs)
    kernel_sq = float(coef @ gram @ coef)
    total_sq = lambda_norm(op, DiscreteField(mesh, phi)) ** 2
    kernel_norm = math.sqrt(max(kernel_sq, 0.0))
    orth_norm = math.sqrt(max(total_sq - kernel_sq, 0.0))
    return kernel_norm, orth_norm


def peak_offsets(
    mesh: Mesh, u: DiscreteField, ansatz: AnsatzSpec
) -> list[tuple[str, float]]:
    """Distance from each peak vertex to the argmax inside its ball."""
    out = []
    for star, _ in ansatz.peaks:
        best_t, best_val = 0.0, -math.inf
        for eid, away in star.incident_edges:
            nodes = mesh.edge_nodes[eid]
            t = nodes if away else nodes[-1] - nodes
            sel = t <= 2.0 * star.radius
            vals = u.values[mesh.edge_dofs[eid][sel]]
            if vals.size == 0:
                continue
            k = int(np.argmax(vals))
            if vals[k] > best_val:
                best_val, best_t = float(vals[k]), float(t[sel][k])
        out.append((star.center, best_t))
    return out


def _resample(prev: DiscreteField, mesh: Mesh) -> np.ndarray:
    """Linear interpolation of a field onto a new mesh of the same graph."""
    out = np.zeros(mesh.ndof)
    for eid, dofs in mesh.edge_dofs.items():
        old_nodes = prev.mesh.edge_nodes[eid]
        old_vals = prev.values[prev.mesh.edge_dofs[eid]]
        out[dofs] = np.interp(mesh.edge_nodes[eid], old_nodes, old_vals)
    return out


def continuation_sweep(
    g: MetricGraph, template: AnsatzSpec, cfg: SolveConfig
) -> list[BoundStateResult]:
    """Solve along the schedule, reseeding from the previous solution.

    Each shift gets a fresh peak-refined mesh and seed state; failures
    are recorded and the sweep continues.  Peaks at even-degree or
    degree-1 vertices are permitted but flagged as exploratory, since
    the existence theory covers odd degree >= 3 only.
    """
    if not cfg.lambda_schedule:
        raise ValueError("empty lambda schedule")
    for star, _ in template.peaks:
        if star.degree % 2 == 0 or star.degree < 3:
            warnings.warn(
                f"peak at {star.center!r} has degree {star.degree}: outside "
                "the odd-degree hypotheses, exploratory run",
                stacklevel=2,
            )
    peaks = [star.center for star, _ in template.peaks]
    lam0 = cfg.lambda_schedule[0]
    results: list[BoundStateResult] = []
    prev: BoundStateResult | None = None
    for lam in cfg.lambda_schedule:
        npw = cfg.nodes_per_width * (lam / lam0) ** cfg.refinement_growth
        mesh = refined_mesh(g, lam, peaks, nodes_per_width=npw)
        op = assemble(g, mesh, lam)
        spec = template.with_lam(lam)
        seed = assemble_ansatz(g, spec, mesh)
        if cfg.seed == "previous" and prev is not None and prev.converged:
            scale = (lam / prev.lam) ** (1.0 / (2.0 * cfg.mu))
            u0 = DiscreteField(mesh, scale * _resample(prev.u, mesh))
        else:
            u0 = seed
        res = newton_solve(op, cfg.mu, u0, cfg)
        res.correction_norm = lambda_norm(
            op, DiscreteField(mesh, res.u.values - seed.values)
        )
        if res.converged:
            kn, _ = kernel_projection_diagnostics(op, res, spec)
            res.kernel_component_norm = kn
            prev = res
        res.peak_locations = peak_offsets(mesh, res.u, spec)
        results.append(res)
    return results
