"""The nine acceptance checks, shared by the test suite and `verify`.

Each criterion function runs a pinned experiment and returns a
CriterionResult with the measured values in its detail string.  The
expensive sweeps are cached so criteria that share a run (the tripod
sweep feeds 4, 5, 6 and 8) only pay for it once per process.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from importlib.resources import files

import numpy as np
import scipy.sparse.linalg as spla

from .discrete import DiscreteField, assemble, resolvent_apply, uniform_mesh
from .errors import GraphNLSError
from .functionals import evaluate_functionals, ground_state_gap, soliton_reference
from .graphs import (
    MetricGraph,
    build_graph,
    insert_midpoints,
    star_neighborhood,
)
from .profiles import AnsatzSpec, sample_kernel_mode, sample_star_state
from .reduced import (
    enumerate_critical_points,
    even_case_lines,
    perturbed_gradient_hessian,
)
from .solve import (
    SolveConfig,
    continuation_sweep,
    jacobian,
    newton_solve,
    nonlinear_residual,
    symmetric_linearization,
)


@dataclass(frozen=True)
class CriterionResult:
    """Outcome of one acceptance criterion."""

    cid: int
    name: str
    passed: bool
    detail: str
    skipped: bool = False

    def line(self) -> str:
        if self.skipped:
            status = "SKIP"
        else:
            status = "PASS" if self.passed else "FAIL"
        return f"criterion {self.cid} ({self.name}): {status} - {self.detail}"


def reference_graph(name: str) -> MetricGraph:
    """Load one of the graphs shipped with the package."""
    text = (files("graphnls") / "data" / f"{name}.yaml").read_text(encoding="utf-8")
    return build_graph(text)


def _star_yaml(N: int, truncation: float) -> str:
    lines = [f"vertices: [c, {', '.join(f't{i}' for i in range(N))}]", "edges:"]
    for i in range(N):
        lines.append(f'  - {{id: e{i}, from: c, to: t{i}, length: "inf"}}')
    lines.append(f"truncation: {truncation}")
    return "\n".join(lines)


def criterion_1() -> CriterionResult:
    """Kernel of the linearization at the star state has dimension N-1."""
    details = []
    passed = True
    for N in (2, 3, 4, 5):
        g = build_graph(_star_yaml(N, 25.0))
        mesh = uniform_mesh(g, 1.0 / 200.0)
        op = assemble(g, mesh, 1.0)
        star = star_neighborhood(g, "c")
        psi = DiscreteField(mesh, sample_star_state(mesh, star, 1.0, 1.0))
        L = symmetric_linearization(op, 1.0, psi)
        free = mesh.free_dofs
        Lf = L[free][:, free].tocsc()
        Mf = op.mass[free][:, free].tocsc()
        v0 = np.ones(len(free)) / math.sqrt(len(free))
        vals, vecs = spla.eigsh(Lf, k=N + 2, M=Mf, sigma=0.0, which="LM", v0=v0)
        order = np.argsort(np.abs(vals))
        vals, vecs = vals[order], vecs[:, order]

        n_small = int(np.sum(np.abs(vals) < 1e-3))
        gap_ok = abs(vals[N - 1]) > 1e-2
        modes = np.stack(
            [
                sample_kernel_mode(mesh, star, j, 1.0, 1.0)[free]
                for j in range(1, N)
            ],
            axis=1,
        )
        gram = modes.T @ (Mf @ modes)
        corr_min = 1.0
        for i in range(N - 1):
            v = vecs[:, i]
            b = modes.T @ (Mf @ v)
            proj_sq = float(b @ np.linalg.solve(gram, b))
            corr = math.sqrt(max(proj_sq, 0.0) / float(v @ (Mf @ v)))
            corr_min = min(corr_min, corr)
        ok = n_small == N - 1 and gap_ok and corr_min > 0.999
        passed = passed and ok
        details.append(
            f"N={N}: {n_small} small, next {abs(vals[N - 1]):.3g}, "
            f"corr {corr_min:.5f}"
        )
    return CriterionResult(1, "kernel dimension", passed, "; ".join(details))


def criterion_2() -> CriterionResult:
    """Local degree of the reduced energy matches the closed form (odd N)."""
    details = []
    passed = True
    for N in (3, 5, 7, 9):
        rep = enumerate_critical_points(N, eps=0.3)
        count = math.comb(N - 1, (N - 1) // 2)
        degree = (-1) ** ((N - 1) // 2) * count
        ok = rep.local_degree == degree and len(rep.critical_points) == count
        passed = passed and ok
        details.append(
            f"N={N}: degree {rep.local_degree} (want {degree}), "
            f"{len(rep.critical_points)} points (want {count})"
        )
    return CriterionResult(2, "reduced-energy degree", passed, "; ".join(details))


def criterion_3() -> CriterionResult:
    """Even N: the critical set is the expected family of lines."""
    details = []
    passed = True
    for N in (4, 6):
        lines = even_case_lines(N)
        want = 2 * math.comb(N - 1, N // 2)
        worst = 0.0
        for sigma in lines:
            for t in (0.7, 1.3, -0.6):
                x = t * np.asarray(sigma, dtype=float)
                grad, _ = perturbed_gradient_hessian(N, 0.0, x)
                worst = max(worst, float(np.max(np.abs(grad))))
        ok = len(lines) == want and worst <= 1e-10
        passed = passed and ok
        details.append(
            f"N={N}: {len(lines)} directions (want {want}), "
            f"max |grad| {worst:.2g}"
        )
    return CriterionResult(3, "even-N structure", passed, "; ".join(details))


_TRIPOD_SCHEDULE = (25.0, 50.0, 100.0, 200.0, 400.0)


@lru_cache(maxsize=None)
def _tripod_sweep():
    g = reference_graph("tripod")
    star = star_neighborhood(g, "c", mode="single")
    template = AnsatzSpec(
        peaks=((star, (0.0, 0.0)),),
        mu=1.0,
        lam=_TRIPOD_SCHEDULE[0],
        alpha=0.25,
    )
    cfg = SolveConfig(
        mu=1.0,
        lambda_schedule=_TRIPOD_SCHEDULE,
        nodes_per_width=40.0,
        seed="ansatz",
    )
    return g, continuation_sweep(g, template, cfg)


def criterion_4() -> CriterionResult:
    """Ansatz-seeded Newton converges to a positive single-peak state."""
    _, results = _tripod_sweep()
    details = []
    passed = True
    for res in results:
        mesh = res.u.mesh
        h = mesh.edge_spacing(mesh.graph.edges[0].id)
        low = float(np.min(res.u.values[mesh.free_dofs]))
        offset = res.peak_locations[0][1]
        ok = res.converged and low > 0.0 and offset <= h + 1e-12
        passed = passed and ok
        details.append(
            f"lam={res.lam:g}: conv={res.converged} its={res.iterations} "
            f"min={low:.2g} offset={offset:.2g} (cell {h:.2g})"
        )
    return CriterionResult(4, "peaked solution existence", passed, "; ".join(details))


def _tripod_mass_errors() -> tuple[list[float], list[float]]:
    _, results = _tripod_sweep()
    ref = soliton_reference(1.0)
    ratios = []
    for res in results:
        mesh = res.u.mesh
        op = assemble(mesh.graph, mesh, res.lam)
        rep = evaluate_functionals(op, 1.0, res.u)
        ratios.append(rep.mass / (math.sqrt(res.lam) * 1.5 * ref.mass))
    return ratios, [abs(r - 1.0) for r in ratios]


def criterion_5() -> CriterionResult:
    """Mass follows sqrt(lam) * (3/2) * (soliton mass), approaching it."""
    ratios, errs = _tripod_mass_errors()
    in_band = 0.95 <= ratios[-1] <= 1.05
    monotone = all(b <= a * (1.0 + 1e-6) for a, b in zip(errs, errs[1:]))
    passed = in_band and monotone
    detail = (
        "ratios " + ", ".join(f"{r:.4f}" for r in ratios) + f"; final in band={in_band}, monotone={monotone}"
    )
    return CriterionResult(5, "mass asymptotics", passed, detail)


def criterion_6() -> CriterionResult:
    """Normalized correction size strictly decreases along the sweep."""
    _, results = _tripod_sweep()
    rates = [
        res.correction_norm * res.lam ** (-0.25 - 0.5) for res in results
    ]
    passed = all(b < a for a, b in zip(rates, rates[1:]))
    detail = "rates " + ", ".join(f"{r:.4g}" for r in rates)
    return CriterionResult(6, "correction rate", passed, detail)


# the double tripod's long truncated sides leave the linearization's
# kernel eigenvalues at machine scale, so the ansatz-quality floor at
# lam=25 stalls Newton; the sweep starts where the seed is inside the
# quadratic basin
_DOUBLE_SCHEDULE = (50.0, 100.0, 200.0, 400.0)


@lru_cache(maxsize=None)
def _double_sweep():
    g0 = reference_graph("double_tripod")
    g = insert_midpoints(g0, ["c1", "c2"])
    stars = [star_neighborhood(g, v, mode="multi") for v in ("c1", "c2")]
    template = AnsatzSpec(
        peaks=tuple((s, (0.0, 0.0)) for s in stars),
        mu=1.0,
        lam=_DOUBLE_SCHEDULE[0],
        alpha=0.25,
    )
    cfg = SolveConfig(
        mu=1.0,
        lambda_schedule=_DOUBLE_SCHEDULE,
        nodes_per_width=40.0,
        seed="previous",
    )
    return g, continuation_sweep(g, template, cfg)


def criterion_7() -> CriterionResult:
    """Two-peak state on the double tripod carries twice the mass."""
    g, results = _double_sweep()
    ref = soliton_reference(1.0)
    all_converged = all(res.converged for res in results)
    last = results[-1]
    mesh = last.u.mesh
    op = assemble(g, mesh, last.lam)
    rep = evaluate_functionals(op, 1.0, last.u)
    ratio = rep.mass / (math.sqrt(last.lam) * 3.0 * ref.mass)
    offsets_ok = True
    offs = []
    for center, off in last.peak_locations:
        eid = star_neighborhood(g, center, mode="multi").incident_edges[0][0]
        h = mesh.edge_spacing(eid)
        offsets_ok = offsets_ok and off <= h + 1e-12
        offs.append(f"{center}:{off:.2g}")
    passed = all_converged and abs(ratio - 1.0) <= 0.07 and offsets_ok
    detail = (
        f"converged={all_converged}, mass ratio {ratio:.4f} "
        f"(band 7%), offsets {', '.join(offs)}"
    )
    return CriterionResult(7, "multi-peak", passed, detail)


@lru_cache(maxsize=None)
def _mu2_result():
    g = reference_graph("tripod")
    star = star_neighborhood(g, "c", mode="single")
    template = AnsatzSpec(
        peaks=((star, (0.0, 0.0)),), mu=2.0, lam=400.0, alpha=0.25
    )
    cfg = SolveConfig(
        mu=2.0, lambda_schedule=(400.0,), nodes_per_width=40.0, seed="ansatz"
    )
    return continuation_sweep(g, template, cfg)[-1]


def criterion_8() -> CriterionResult:
    """The peaked state is not a ground state: action and mass excess."""
    _, results = _tripod_sweep()
    last = results[-1]
    gap = ground_state_gap(last, 1.0, weight=1.5)
    ratio = gap.normalized_action / gap.action_reference
    ratio_ok = 1.35 <= ratio <= 1.65 and gap.not_ground_state

    res2 = _mu2_result()
    gap2 = ground_state_gap(res2, 2.0, weight=1.5)
    mass_ok = (
        res2.converged and gap2.mass_exceeds and gap2.not_ground_state
    )
    passed = ratio_ok and mass_ok
    detail = (
        f"action ratio {ratio:.4f} (band [1.35, 1.65]); mu=2 mass "
        f"{gap2.mass:.4f} vs {gap2.mass_reference:.4f}"
    )
    return CriterionResult(8, "not a ground state", passed, detail)


def criterion_9(coarse: bool = False) -> CriterionResult:
    """Discretization hygiene: h^2 rate, resolvent symmetry, Jacobian."""
    spacings = (2.0, 1.0, 0.5) if coarse else (1.0 / 40.0, 1.0 / 80.0, 1.0 / 160.0)
    g = build_graph(_star_yaml(3, 10.0))
    star = star_neighborhood(g, "c")
    lam, mu = 4.0, 1.0
    errors = []
    for h in spacings:
        mesh = uniform_mesh(g, h)
        op = assemble(g, mesh, lam)
        exact = sample_star_state(mesh, star, lam, mu)
        cfg = SolveConfig(mu=mu, newton_tol=1e-11, lambda_schedule=(lam,))
        res = newton_solve(op, mu, DiscreteField(mesh, exact), cfg)
        diff = res.u.values - exact
        diff[mesh.dirichlet_dofs] = 0.0
        errors.append(float(np.max(np.abs(diff))))
    factors = [a / b for a, b in zip(errors, errors[1:])]
    rate_ok = all(f >= 3.5 for f in factors)

    mesh = uniform_mesh(g, 1.0 / 100.0)
    op = assemble(g, mesh, 3.0)
    rng = np.random.default_rng(7)
    f = DiscreteField(mesh, rng.standard_normal(mesh.ndof))
    w = DiscreteField(mesh, rng.standard_normal(mesh.ndof))
    lhs = float(resolvent_apply(op, f).values @ (op.mass @ w.values))
    rhs = float(f.values @ (op.mass @ resolvent_apply(op, w).values))
    adj_err = abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)
    adj_ok = adj_err <= 1e-10

    u = DiscreteField(mesh, 0.1 + rng.random(mesh.ndof))
    direction = rng.standard_normal(mesh.ndof)
    eps = 1e-5
    up = DiscreteField(mesh, u.values + eps * direction)
    dn = DiscreteField(mesh, u.values - eps * direction)
    fd = (
        nonlinear_residual(op, mu, up).values
        - nonlinear_residual(op, mu, dn).values
    ) / (2.0 * eps)
    jv = jacobian(op, mu, u) @ direction
    jac_err = float(np.linalg.norm(fd - jv) / max(1.0, np.linalg.norm(jv)))
    jac_ok = jac_err <= 1e-5

    passed = rate_ok and adj_ok and jac_ok
    detail = (
        "factors " + ", ".join(f"{f:.2f}" for f in factors)
        + f"; adjointness {adj_err:.2g}; jacobian fd {jac_err:.2g}"
    )
    return CriterionResult(9, "numerical hygiene", passed, detail)


_NAMES = {
    1: "kernel dimension",
    2: "reduced-energy degree",
    3: "even-N structure",
    4: "peaked solution existence",
    5: "mass asymptotics",
    6: "correction rate",
    7: "multi-peak",
    8: "not a ground state",
    9: "numerical hygiene",
}

# criteria that rest on the odd-degree peak hypotheses
_HYPOTHESIS_BOUND = (4, 5, 6, 7, 8)


def run_criterion(cid: int, peak_degree: int = 3, coarse: bool = False) -> CriterionResult:
    """Run one criterion, honoring the hypothesis gate and error capture."""
    if cid not in _NAMES:
        raise ValueError(f"no criterion {cid}")
    if cid in _HYPOTHESIS_BOUND and (peak_degree % 2 == 0 or peak_degree < 3):
        return CriterionResult(
            cid,
            _NAMES[cid],
            passed=True,
            detail=(
                f"peak degree {peak_degree} is outside the odd-degree "
                "hypotheses; criterion skipped"
            ),
            skipped=True,
        )
    fns = {
        1: criterion_1,
        2: criterion_2,
        3: criterion_3,
        4: criterion_4,
        5: criterion_5,
        6: criterion_6,
        7: criterion_7,
        8: criterion_8,
    }
    try:
        if cid == 9:
            return criterion_9(coarse=coarse)
        return fns[cid]()
    except GraphNLSError as exc:
        return CriterionResult(
            cid, _NAMES[cid], passed=False, detail=f"{type(exc).__name__}: {exc}"
        )


def run_all(
    criteria=None, peak_degree: int = 3, coarse: bool = False
) -> list[CriterionResult]:
    """Run the requested criteria (all nine by default) in order."""
    wanted = sorted(set(criteria)) if criteria else list(range(1, 10))
    return [run_criterion(cid, peak_degree, coarse) for cid in wanted]
