"""Meshes and sparse operators for the Kirchhoff Laplacian on a metric graph.

Discretization is piecewise-linear finite elements per edge with one
shared unknown per vertex, so continuity is built in and the Kirchhoff
flux balance is the natural condition of the weak form.  Truncated
half-line endpoints carry a homogeneous Dirichlet condition, applied by
restriction to the free degrees of freedom.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    EigenSolveFailure,
    IndefiniteOperator,
    NegativeForm,
    SolveFailure,
)
from .graphs import MetricGraph


@dataclass(frozen=True)
class Mesh:
    """Per-edge uniform grids with shared vertex unknowns.

    `edge_nodes[eid]` holds the node coordinates on edge eid including
    both endpoints; `edge_dofs[eid]` the matching global indices.  The
    two endpoint entries are the vertex dofs, so a self-loop's ends map
    to the same unknown.
    """

    graph: MetricGraph
    edge_nodes: dict[str, np.ndarray]
    edge_dofs: dict[str, np.ndarray]
    vertex_dofs: dict[str, int]
    ndof: int

    @property
    def dirichlet_dofs(self) -> np.ndarray:
        return np.array(
            sorted(self.vertex_dofs[v] for v in self.graph.dirichlet_vertices),
            dtype=int,
        )

    @property
    def free_dofs(self) -> np.ndarray:
        mask = np.ones(self.ndof, dtype=bool)
        mask[self.dirichlet_dofs] = False
        return np.nonzero(mask)[0]

    def edge_spacing(self, eid: str) -> float:
        nodes = self.edge_nodes[eid]
        return float(nodes[1] - nodes[0])


def build_mesh(g: MetricGraph, edge_h: dict[str, float] | float) -> Mesh:
    """Mesh with target spacing per edge (>= 3 interior nodes each)."""
    vertex_dofs = {v: i for i, v in enumerate(g.vertices)}
    next_dof = len(g.vertices)
    edge_nodes: dict[str, np.ndarray] = {}
    edge_dofs: dict[str, np.ndarray] = {}
    for e in g.edges:
        h = edge_h[e.id] if isinstance(edge_h, dict) else edge_h
        n = max(4, int(math.ceil(e.length / h)))
        nodes = np.linspace(0.0, e.length, n + 1)
        dofs = np.empty(n + 1, dtype=int)
        dofs[0] = vertex_dofs[e.src]
        dofs[-1] = vertex_dofs[e.dst]
        dofs[1:-1] = np.arange(next_dof, next_dof + n - 1)
        next_dof += n - 1
        edge_nodes[e.id] = nodes
        edge_dofs[e.id] = dofs
    return Mesh(g, edge_nodes, edge_dofs, vertex_dofs, next_dof)


def uniform_mesh(g: MetricGraph, h: float) -> Mesh:
    return build_mesh(g, h)


def refined_mesh(
    g: MetricGraph,
    lam: float,
    peaks: list[str],
    nodes_per_width: float = 40.0,
) -> Mesh:
    """Mesh resolving the peak scale: spacing 1/(nodes_per_width*sqrt(lam))
    on edges incident to a peak, five times coarser elsewhere."""
    h_fine = 1.0 / (nodes_per_width * math.sqrt(lam))
    peak_set = set(peaks)
    edge_h = {}
    for e in g.edges:
        touches = e.src in peak_set or e.dst in peak_set
        edge_h[e.id] = h_fine if touches else 5.0 * h_fine
    return build_mesh(g, edge_h)


@dataclass
class DiscreteField:
    """Nodal samples of a function on the graph (one value per dof)."""

    mesh: Mesh
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.mesh.ndof,):
            raise ValueError(
                f"expected {self.mesh.ndof} values, got {self.values.shape}"
            )

    def copy(self) -> "DiscreteField":
        return DiscreteField(self.mesh, self.values.copy())

    def argmax_point(self) -> tuple[str, float, float]:
        """(edge id, arc-length coordinate, value) of the nodal maximum."""
        best = (None, 0.0, -math.inf)
        for eid, dofs in self.mesh.edge_dofs.items():
            vals = self.values[dofs]
            k = int(np.argmax(vals))
            if vals[k] > best[2]:
                best = (eid, float(self.mesh.edge_nodes[eid][k]), float(vals[k]))
        return best


def zero_field(mesh: Mesh) -> DiscreteField:
    return DiscreteField(mesh, np.zeros(mesh.ndof))


def _assemble_pair(mesh: Mesh) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    rows, cols, s_vals, m_vals = [], [], [], []
    for eid, dofs in mesh.edge_dofs.items():
        h = mesh.edge_spacing(eid)
        left, right = dofs[:-1], dofs[1:]
        # element matrices: stiffness (1/h)[[1,-1],[-1,1]], mass (h/6)[[2,1],[1,2]]
        for r, c, s, m in (
            (left, left, 1.0 / h, h / 3.0),
            (right, right, 1.0 / h, h / 3.0),
            (left, right, -1.0 / h, h / 6.0),
            (right, left, -1.0 / h, h / 6.0),
        ):
            rows.append(r)
            cols.append(c)
            s_vals.append(np.full(len(r), s))
            m_vals.append(np.full(len(r), m))
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    shape = (mesh.ndof, mesh.ndof)
    S = sp.coo_matrix((np.concatenate(s_vals), (rows, cols)), shape=shape).tocsr()
    M = sp.coo_matrix((np.concatenate(m_vals), (rows, cols)), shape=shape).tocsr()
    return S, M


def weighted_mass(mesh: Mesh, weight: np.ndarray) -> sp.csr_matrix:
    """Mass matrix of the form integral(w u v) with w interpolated nodewise.

    Used to assemble symmetric linearized operators; exact for piecewise
    linear w, u, v.
    """
    weight = np.asarray(weight, dtype=float)
    rows, cols, vals = [], [], []
    for eid, dofs in mesh.edge_dofs.items():
        h = mesh.edge_spacing(eid)
        left, right = dofs[:-1], dofs[1:]
        wl, wr = weight[left], weight[right]
        # element integrals of w*phi_i*phi_j with w linear on the element
        for r, c, v in (
            (left, left, h * (3.0 * wl + wr) / 12.0),
            (right, right, h * (wl + 3.0 * wr) / 12.0),
            (left, right, h * (wl + wr) / 12.0),
            (right, left, h * (wl + wr) / 12.0),
        ):
            rows.append(r)
            cols.append(c)
            vals.append(v)
    shape = (mesh.ndof, mesh.ndof)
    return sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=shape,
    ).tocsr()


@dataclass
class KirchhoffOperator:
    """Assembled weak forms of the shifted operator -u'' + lam*u.

    Holds the full stiffness and mass matrices plus the free-dof
    restriction; the factorization of the shifted form on the free dofs
    is cached on first use.
    """

    mesh: Mesh
    lam: float
    stiffness: sp.csr_matrix
    mass: sp.csr_matrix
    free: np.ndarray
    _factor: spla.SuperLU | None = field(default=None, repr=False)

    def shifted_free(self) -> sp.csc_matrix:
        A = self.stiffness + self.lam * self.mass
        return A[self.free][:, self.free].tocsc()

    def factor(self) -> spla.SuperLU:
        if self._factor is None:
            self._check_definite()
            try:
                self._factor = spla.splu(self.shifted_free())
            except RuntimeError as exc:
                raise SolveFailure(f"factorization failed: {exc}") from exc
        return self._factor

    def _check_definite(self) -> None:
        if self.lam > 0.0:
            return
        bottom = spectral_bottom(self.mesh.graph, self.mesh)
        if self.lam <= -bottom + 1e-10:
            raise IndefiniteOperator(
                f"shift {self.lam} is at or below the spectral bottom {-bottom}"
            )


def assemble(g: MetricGraph, mesh: Mesh, lam: float) -> KirchhoffOperator:
    """Assemble the stiffness/mass pair on the mesh at the given shift."""
    if mesh.graph is not g:
        raise ValueError("mesh was built for a different graph")
    S, M = _assemble_pair(mesh)
    return KirchhoffOperator(mesh, float(lam), S, M, mesh.free_dofs)


def resolvent_apply(op: KirchhoffOperator, g_rhs: DiscreteField) -> DiscreteField:
    """Solve the weak problem -v'' + lam*v = g with Kirchhoff coupling.

    The right-hand side enters through the mass matrix; Dirichlet dofs
    (truncation endpoints) stay pinned at zero.
    """
    rhs = op.mass @ g_rhs.values
    lu = op.factor()
    x_free = lu.solve(rhs[op.free])
    A = op.shifted_free()
    resid = A @ x_free - rhs[op.free]
    denom = max(float(np.linalg.norm(rhs[op.free])), 1e-300)
    if float(np.linalg.norm(resid)) / denom > 1e-10:
        raise SolveFailure("resolvent residual above 1e-10 relative")
    out = np.zeros(op.mesh.ndof)
    out[op.free] = x_free
    return DiscreteField(op.mesh, out)


def lambda_norm(op: KirchhoffOperator, u: DiscreteField) -> float:
    """sqrt(u' . u' + lam * u . u) in the assembled quadrature."""
    v = u.values
    q = float(v @ (op.stiffness @ v) + op.lam * (v @ (op.mass @ v)))
    if q < -1e-12 * max(1.0, float(v @ (op.mass @ v))):
        raise NegativeForm(f"shifted form returned {q}")
    return math.sqrt(max(q, 0.0))


def dual_residual_norm(op: KirchhoffOperator, r: np.ndarray) -> float:
    """Norm of a weak-form residual measured through the shifted inverse.

    This is the natural norm of the Riesz representative of r: with
    A = S + lam*M on the free dofs, returns sqrt(r^T A^{-1} r).
    """
    rf = r[op.free]
    y = op.factor().solve(rf)
    return math.sqrt(max(float(rf @ y), 0.0))


def lambda_inner(op: KirchhoffOperator, u: np.ndarray, v: np.ndarray) -> float:
    return float(u @ (op.stiffness @ v) + op.lam * (u @ (op.mass @ v)))


def spectral_bottom(g: MetricGraph, mesh: Mesh) -> float:
    """Smallest generalized eigenvalue of (stiffness, mass) on free dofs.

    Zero for compact graphs (constants); positive when Dirichlet
    truncation endpoints are present.
    """
    S, M = _assemble_pair(mesh)
    free = mesh.free_dofs
    Sf = S[free][:, free]
    Mf = M[free][:, free]
    n = Sf.shape[0]
    if n < 8:
        vals = scipy.linalg.eigh(
            Sf.toarray(), Mf.toarray(), eigvals_only=True
        )
        return float(np.min(vals))
    v0 = np.ones(n) / math.sqrt(n)
    for sigma in (-1e-4, -1e-2):
        try:
            vals = spla.eigsh(
                Sf.tocsc(),
                k=1,
                M=Mf.tocsc(),
                sigma=sigma,
                which="LM",
                v0=v0,
                return_eigenvectors=False,
            )
            return float(vals[0])
        except (RuntimeError, spla.ArpackNoConvergence):
            continue
    raise EigenSolveFailure("generalized eigensolve did not converge")


def central_second_difference(values: np.ndarray, h: float) -> np.ndarray:
    """Second derivative at interior nodes, O(h^2)."""
    v = np.asarray(values, dtype=float)
    return (v[:-2] - 2.0 * v[1:-1] + v[2:]) / (h * h)


def one_sided_derivative(values: np.ndarray, h: float, at_start: bool) -> float:
    """Outgoing first derivative at an edge end, O(h^2) stencil."""
    v = np.asarray(values, dtype=float)
    if at_start:
        return float((-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h))
    return float((-3.0 * v[-1] + 4.0 * v[-2] - v[-3]) / (2.0 * h))


def kirchhoff_flux(mesh: Mesh, u: DiscreteField) -> dict[str, float]:
    """Sum of outgoing derivatives at each vertex (discrete flux balance)."""
    out: dict[str, float] = {}
    for v in mesh.graph.vertices:
        total = 0.0
        for e, away in mesh.graph.incident(v):
            vals = u.values[mesh.edge_dofs[e.id]]
            h = mesh.edge_spacing(e.id)
            total += one_sided_derivative(vals, h, at_start=away)
        out[v] = total
    return out
