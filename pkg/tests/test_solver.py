"""Newton iteration, linearizations, and the continuation sweep."""

import math

import numpy as np
import pytest

from graphnls import (
    AnsatzSpec,
    SolveConfig,
    assemble,
    assemble_ansatz,
    build_graph,
    continuation_sweep,
    jacobian,
    kernel_projection_diagnostics,
    lambda_norm,
    newton_solve,
    nonlinear_residual,
    refined_mesh,
    star_neighborhood,
    symmetric_linearization,
    uniform_mesh,
)
from graphnls.discrete import DiscreteField, dual_residual_norm
from graphnls.errors import NotConverged
from graphnls.solve import BoundStateResult, _resample, peak_offsets

TRIPOD = """
vertices: [c, a1, a2, a3]
edges:
  - {id: e1, from: c, to: a1, length: 1.0}
  - {id: e2, from: c, to: a2, length: 1.0}
  - {id: e3, from: c, to: a3, length: 1.0}
"""


def _tripod_setup(lam=50.0, npw=25.0):
    g = build_graph(TRIPOD)
    star = star_neighborhood(g, "c", mode="single")
    spec = AnsatzSpec(((star, (0.0, 0.0)),), mu=1.0, lam=lam, alpha=0.25)
    mesh = refined_mesh(g, lam, ["c"], nodes_per_width=npw)
    op = assemble(g, mesh, lam)
    return g, star, spec, mesh, op


def test_solve_config_validation():
    with pytest.raises(ValueError):
        SolveConfig(newton_tol=0.0)
    with pytest.raises(ValueError):
        SolveConfig(damping=1.0)
    with pytest.raises(ValueError):
        SolveConfig(seed="warmstart")
    with pytest.raises(ValueError):
        SolveConfig(lambda_schedule=(25.0, 25.0))
    cfg = SolveConfig(lambda_schedule=(25, 50))
    assert cfg.lambda_schedule == (25.0, 50.0)


def test_newton_converges_from_the_peaked_seed():
    g, star, spec, mesh, op = _tripod_setup()
    seed = assemble_ansatz(g, spec, mesh)
    cfg = SolveConfig(mu=1.0, newton_tol=1e-10)
    res = newton_solve(op, 1.0, seed, cfg)
    assert res.converged
    assert res.iterations <= 8
    assert res.residual_norm <= 1e-10
    assert res.min_value > 0.0
    # the reported residual is reproducible from the state itself
    r = nonlinear_residual(op, 1.0, res.u)
    rel = dual_residual_norm(op, r.values) / max(1.0, lambda_norm(op, res.u))
    assert rel == pytest.approx(res.residual_norm, rel=1e-6, abs=1e-14)


def test_newton_flags_nonconvergence_within_budget():
    g, star, spec, mesh, op = _tripod_setup()
    seed = assemble_ansatz(g, spec, mesh)
    cfg = SolveConfig(mu=1.0, newton_tol=1e-10, max_iters=1)
    res = newton_solve(op, 1.0, seed, cfg)
    assert not res.converged
    assert res.iterations == 1


def test_jacobian_matches_directional_differences():
    g, star, spec, mesh, op = _tripod_setup(lam=9.0, npw=10.0)
    rng = np.random.default_rng(12)
    u = DiscreteField(mesh, 0.2 + 0.1 * rng.random(mesh.ndof))
    J = jacobian(op, 1.0, u)
    h = 1e-6
    for _ in range(4):
        d = rng.standard_normal(mesh.ndof)
        up = DiscreteField(mesh, u.values + h * d)
        um = DiscreteField(mesh, u.values - h * d)
        fd = (
            nonlinear_residual(op, 1.0, up).values
            - nonlinear_residual(op, 1.0, um).values
        ) / (2.0 * h)
        exact = J @ d
        denom = max(1.0, float(np.linalg.norm(exact)))
        assert np.linalg.norm(fd - exact) / denom < 1e-7


def test_symmetric_linearization_is_symmetric_and_consistent():
    g, star, spec, mesh, op = _tripod_setup(lam=9.0, npw=10.0)
    u = assemble_ansatz(g, spec.with_lam(9.0), mesh)
    L = symmetric_linearization(op, 1.0, u)
    assert abs(L - L.T).max() < 1e-12
    # both linearizations act identically on smooth directions up to
    # quadrature error
    d = np.ones(mesh.ndof)
    gap = np.max(np.abs((L - jacobian(op, 1.0, u)) @ d))
    assert gap < 1e-2


def test_residual_of_negative_state_is_linear():
    g, star, spec, mesh, op = _tripod_setup(lam=4.0, npw=10.0)
    u = DiscreteField(mesh, -np.ones(mesh.ndof))
    r = nonlinear_residual(op, 1.0, u)
    linear = (op.stiffness + op.lam * op.mass) @ u.values
    assert np.allclose(r.values, linear)


def test_continuation_sweep_populates_diagnostics():
    g = build_graph(TRIPOD)
    star = star_neighborhood(g, "c", mode="single")
    template = AnsatzSpec(((star, (0.0, 0.0)),), mu=1.0, lam=25.0, alpha=0.25)
    cfg = SolveConfig(
        mu=1.0, lambda_schedule=(25.0, 50.0), nodes_per_width=20.0, seed="previous"
    )
    results = continuation_sweep(g, template, cfg)
    assert [r.lam for r in results] == [25.0, 50.0]
    for res in results:
        assert res.converged
        assert res.correction_norm is not None and res.correction_norm > 0.0
        assert res.kernel_component_norm is not None
        assert res.peak_locations and res.peak_locations[0][0] == "c"
        assert res.peak_locations[0][1] == pytest.approx(0.0, abs=1e-12)
    # the kernel part of the correction is tiny for a symmetric seed
    assert results[-1].kernel_component_norm < 1e-6 * results[-1].correction_norm


def test_seed_strategies_agree_on_easy_sweeps():
    g = build_graph(TRIPOD)
    star = star_neighborhood(g, "c", mode="single")
    template = AnsatzSpec(((star, (0.0, 0.0)),), mu=1.0, lam=25.0, alpha=0.25)
    sched = (25.0, 50.0)
    res_prev = continuation_sweep(
        g, template, SolveConfig(lambda_schedule=sched, nodes_per_width=15.0)
    )
    res_ansatz = continuation_sweep(
        g,
        template,
        SolveConfig(lambda_schedule=sched, nodes_per_width=15.0, seed="ansatz"),
    )
    for a, b in zip(res_prev, res_ansatz):
        assert a.converged and b.converged
        assert np.max(np.abs(a.u.values - b.u.values)) < 1e-8


def test_sweep_warns_outside_odd_degree_hypotheses():
    g = build_graph(
        """
vertices: [c, a1, a2, a3, a4]
edges:
  - {id: e1, from: c, to: a1, length: 1.0}
  - {id: e2, from: c, to: a2, length: 1.0}
  - {id: e3, from: c, to: a3, length: 1.0}
  - {id: e4, from: c, to: a4, length: 1.0}
"""
    )
    star = star_neighborhood(g, "c", mode="single")
    template = AnsatzSpec(((star, (0.0,) * 3),), mu=1.0, lam=25.0, alpha=0.25)
    cfg = SolveConfig(lambda_schedule=(25.0,), nodes_per_width=15.0)
    with pytest.warns(UserWarning, match="outside the odd-degree hypotheses"):
        results = continuation_sweep(g, template, cfg)
    assert results[0].converged


def test_sweep_rejects_empty_schedule():
    g = build_graph(TRIPOD)
    star = star_neighborhood(g, "c", mode="single")
    template = AnsatzSpec(((star, (0.0, 0.0)),), mu=1.0, lam=25.0, alpha=0.25)
    with pytest.raises(ValueError):
        continuation_sweep(g, template, SolveConfig())


def test_kernel_diagnostics_require_convergence():
    g, star, spec, mesh, op = _tripod_setup(lam=4.0, npw=10.0)
    fake = BoundStateResult(
        u=DiscreteField(mesh, np.zeros(mesh.ndof)),
        lam=4.0,
        converged=False,
        iterations=0,
        residual_norm=1.0,
        residual_norm_absolute=1.0,
        min_value=0.0,
    )
    with pytest.raises(NotConverged):
        kernel_projection_diagnostics(op, fake, spec.with_lam(4.0))


def test_peak_offsets_catch_displaced_maxima():
    g, star, spec, mesh, op = _tripod_setup(lam=25.0, npw=20.0)
    spec = spec.with_lam(25.0)
    centered = assemble_ansatz(g, spec, mesh)
    assert peak_offsets(mesh, centered, spec)[0][1] == pytest.approx(0.0)
    shifted = centered.copy()
    nodes = mesh.edge_nodes["e1"]
    bump = np.exp(-80.0 * (nodes - 0.3) ** 2)
    shifted.values[mesh.edge_dofs["e1"]] += 2.0 * centered.values.max() * bump
    off = peak_offsets(mesh, shifted, spec)[0][1]
    assert off == pytest.approx(0.3, abs=2.0 * mesh.edge_spacing("e1"))


def test_resample_is_exact_on_shared_nodes():
    g = build_graph(TRIPOD)
    coarse = uniform_mesh(g, 0.1)
    rng = np.random.default_rng(8)
    field = DiscreteField(coarse, rng.standard_normal(coarse.ndof))
    same = _resample(field, coarse)
    assert np.allclose(same, field.values)
    fine = uniform_mesh(g, 0.05)
    lifted = _resample(field, fine)
    for eid in ("e1", "e2", "e3"):
        shared = fine.edge_nodes[eid][::2]
        assert np.allclose(shared, coarse.edge_nodes[eid])
        assert np.allclose(
            lifted[fine.edge_dofs[eid][::2]], field.values[coarse.edge_dofs[eid]]
        )
