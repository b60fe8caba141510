"""Command line interface: peak sweeps, reduced-energy reports, verification.

Subcommands:

    graphnls solve          run a continuation sweep and emit artifacts
    graphnls reduced-energy print the critical-point structure for one N
    graphnls verify         run the acceptance checks

Artifacts are plain CSV and two-column text files so they can be
plotted or diffed without extra tooling.  A run is deterministic:
identical configuration produces bit-identical tables.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

from .acceptance import reference_graph, run_all
from .discrete import assemble
from .errors import GraphNLSError
from .functionals import evaluate_functionals, soliton_reference
from .graphs import (
    MetricGraph,
    check_disjoint_peak_balls,
    insert_midpoints,
    load_graph,
    star_neighborhood,
)
from .profiles import AnsatzSpec
from .reduced import enumerate_critical_points, even_case_lines
from .solve import SolveConfig, continuation_sweep

_BUILTIN_GRAPHS = ("tripod", "t_graph", "star5", "double_tripod", "figure1")


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved description of one solve run."""

    graph: str
    peaks: tuple[str, ...]
    mu: float = 1.0
    alpha: float = 0.25
    coeffs: tuple[tuple[float, ...], ...] | None = None
    lambdas: tuple[float, ...] = (25.0, 50.0, 100.0, 200.0, 400.0)
    nodes_per_width: float = 40.0
    newton_tol: float = 1e-10
    max_iters: int = 50
    damping: float = 0.5
    refinement_growth: float = 0.25
    seed: str = "previous"
    cutoff: str = "cos2"
    outdir: str = "graphnls-out"

    def __post_init__(self):
        if not self.peaks:
            raise ValueError("at least one peak vertex is required")
        if any(b <= a for a, b in zip(self.lambdas, self.lambdas[1:])):
            raise ValueError("lambda schedule must be strictly increasing")

    def resolved(self) -> dict:
        """Every knob with its in-effect value (no hidden defaults)."""
        return asdict(self)

    def config_hash(self) -> str:
        payload = self.resolved()
        payload.pop("outdir")  # output location does not affect content
        text = json.dumps(payload, sort_keys=True)
        return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def _load_config_graph(name: str) -> MetricGraph:
    if name in _BUILTIN_GRAPHS:
        return reference_graph(name)
    return load_graph(name)


def _fmt(x) -> str:
    if x is None:
        return "nan"
    return f"{float(x):.17g}"


def cmd_solve(cfg: ExperimentConfig) -> int:
    """Run the sweep described by cfg and write its artifacts."""
    outdir = Path(os.environ.get("GRAPHNLS_OUTDIR", cfg.outdir))
    outdir.mkdir(parents=True, exist_ok=True)
    g = _load_config_graph(cfg.graph)
    missing = [p for p in cfg.peaks if p not in g.vertices]
    if missing:
        raise ValueError(f"peak vertices not in graph: {missing}")
    if len(set(cfg.peaks)) != len(cfg.peaks):
        raise ValueError("duplicate peak vertices")

    mode = "multi" if len(cfg.peaks) > 1 else "single"
    if mode == "multi":
        g = insert_midpoints(g, list(cfg.peaks))
    stars = [star_neighborhood(g, p, mode=mode) for p in cfg.peaks]
    check_disjoint_peak_balls(g, stars)

    coeffs = cfg.coeffs
    if coeffs is None:
        coeffs = tuple(tuple(0.0 for _ in range(s.degree - 1)) for s in stars)
    if len(coeffs) != len(stars):
        raise ValueError(
            f"got {len(coeffs)} coefficient vectors for {len(stars)} peaks"
        )
    template = AnsatzSpec(
        peaks=tuple(zip(stars, coeffs)),
        mu=cfg.mu,
        lam=cfg.lambdas[0],
        alpha=cfg.alpha,
        cutoff_kind=cfg.cutoff,
    )
    solve_cfg = SolveConfig(
        mu=cfg.mu,
        newton_tol=cfg.newton_tol,
        max_iters=cfg.max_iters,
        damping=cfg.damping,
        lambda_schedule=cfg.lambdas,
        nodes_per_width=cfg.nodes_per_width,
        refinement_growth=cfg.refinement_growth,
        seed=cfg.seed,
    )
    results = continuation_sweep(g, template, solve_cfg)

    ref = soliton_reference(cfg.mu)
    weight = sum(s.degree for s in stars) / 2.0
    mass_pow = 1.0 / cfg.mu - 0.5
    action_pow = 1.0 / cfg.mu + 0.5
    rate_pow = -0.25 - 1.0 / (2.0 * cfg.mu)

    header = [
        "lam",
        "converged",
        "iterations",
        "residual",
        "mass",
        "action",
        "energy",
        "correction_norm",
        "kernel_component_norm",
        "mass_ratio",
        "action_ratio",
        "correction_rate",
    ] + [f"peak_offset_{p}" for p in cfg.peaks]
    rows = []
    for res in results:
        mesh = res.u.mesh
        op = assemble(mesh.graph, mesh, res.lam)
        rep = evaluate_functionals(op, cfg.mu, res.u)
        row = [
            _fmt(res.lam),
            "1" if res.converged else "0",
            str(res.iterations),
            _fmt(res.residual_norm),
            _fmt(rep.mass),
            _fmt(rep.action),
            _fmt(rep.energy),
            _fmt(res.correction_norm),
            _fmt(res.kernel_component_norm),
            _fmt(rep.mass / (res.lam**mass_pow * weight * ref.mass)),
            _fmt(rep.action / (res.lam**action_pow * weight * ref.action)),
            _fmt(
                None
                if res.correction_norm is None
                else res.correction_norm * res.lam**rate_pow
            ),
        ] + [_fmt(off) for _, off in res.peak_locations]
        rows.append(row)

        state_dir = outdir / f"state_lam{res.lam:g}"
        state_dir.mkdir(exist_ok=True)
        for eid in sorted(mesh.edge_nodes):
            nodes = mesh.edge_nodes[eid]
            vals = res.u.values[mesh.edge_dofs[eid]]
            lines = [f"{_fmt(x)} {_fmt(v)}" for x, v in zip(nodes, vals)]
            (state_dir / f"{eid}.txt").write_text(
                "\n".join(lines) + "\n", encoding="utf-8"
            )

    csv_lines = [f"# config {cfg.config_hash()}", ",".join(header)]
    csv_lines += [",".join(row) for row in rows]
    (outdir / "diagnostics.csv").write_text(
        "\n".join(csv_lines) + "\n", encoding="utf-8"
    )

    manifest = {
        "command": "solve",
        "config": cfg.resolved(),
        "config_hash": cfg.config_hash(),
        "graph_summary": {
            "vertices": len(g.vertices),
            "edges": len(g.edges),
            "compact": g.is_compact,
            "peak_degrees": [s.degree for s in stars],
            "within_hypotheses": all(
                s.degree % 2 == 1 and s.degree >= 3 for s in stars
            ),
        },
        "results": [
            {
                "lam": res.lam,
                "converged": res.converged,
                "iterations": res.iterations,
            }
            for res in results
        ],
    }
    (outdir / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )

    for res in results:
        print(
            f"lam={res.lam:g} converged={res.converged} "
            f"iterations={res.iterations} residual={res.residual_norm:.3g}"
        )
    if not all(res.converged for res in results):
        _write_error_record(
            outdir,
            "NotConverged",
            "some shifts did not converge: "
            + ", ".join(f"{r.lam:g}" for r in results if not r.converged),
        )
        return 2
    return 0


def cmd_reduced_energy(N: int, eps: float) -> int:
    """Print the critical-point structure of the reduced energy."""
    if N % 2 == 1:
        rep = enumerate_critical_points(N, eps)
        print(f"reduced energy: N={N}, eps={eps:g}")
        print("critical points (hessian determinant sign):")
        for point, sign in zip(rep.critical_points, rep.hessian_signs):
            coords = ", ".join(f"{c:+.6g}" for c in point)
            print(f"  ({coords})  {sign:+d}")
        print(f"local degree: {rep.local_degree:+d}")
    else:
        lines = even_case_lines(N)
        print(f"reduced energy: N={N} (even)")
        print("critical directions (each spans a line t*sigma):")
        for sigma in lines:
            print("  (" + ", ".join(f"{s:+d}" for s in sigma) + ")")
        print(f"{len(lines)} directions; degree undefined (degenerate lines)")
    return 0


def cmd_verify(criteria, peak_degree: int, coarse: bool) -> int:
    """Run acceptance criteria and report pass/fail lines."""
    results = run_all(criteria, peak_degree=peak_degree, coarse=coarse)
    for res in results:
        print(res.line())
    failed = [r for r in results if not r.passed and not r.skipped]
    return 1 if failed else 0


def _write_error_record(outdir: Path, kind: str, message: str) -> None:
    try:
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / "error.json").write_text(
            json.dumps({"error": kind, "message": message}, sort_keys=True)
            + "\n",
            encoding="utf-8",
        )
    except OSError:
        pass


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.split(",") if tok.strip())


def _parse_ints(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.split(",") if tok.strip())


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphnls",
        description="peaked bound states of the NLS equation on metric graphs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="run a continuation sweep")
    ps.add_argument(
        "--graph",
        required=True,
        help=f"graph file, or one of: {', '.join(_BUILTIN_GRAPHS)}",
    )
    ps.add_argument(
        "--peak",
        action="append",
        required=True,
        dest="peaks",
        metavar="VERTEX",
        help="peak vertex id (repeat for multiple peaks)",
    )
    ps.add_argument("--mu", type=float, default=1.0)
    ps.add_argument("--alpha", type=float, default=0.25)
    ps.add_argument(
        "--coeffs",
        action="append",
        default=None,
        metavar="C1,C2,...",
        help="kernel coefficients for one peak (repeat per peak)",
    )
    ps.add_argument(
        "--lambdas",
        type=_parse_floats,
        default=(25.0, 50.0, 100.0, 200.0, 400.0),
        help="comma-separated increasing frequency shifts",
    )
    ps.add_argument("--nodes-per-width", type=float, default=40.0)
    ps.add_argument("--newton-tol", type=float, default=1e-10)
    ps.add_argument("--max-iters", type=int, default=50)
    ps.add_argument("--damping", type=float, default=0.5)
    ps.add_argument("--refinement-growth", type=float, default=0.25)
    ps.add_argument("--seed", choices=("previous", "ansatz"), default="previous")
    ps.add_argument("--cutoff", default="cos2")
    ps.add_argument(
        "--outdir",
        default="graphnls-out",
        help="output directory (env GRAPHNLS_OUTDIR overrides)",
    )

    pr = sub.add_parser("reduced-energy", help="critical-point structure")
    pr.add_argument("N", type=int, help="number of star edges (>= 2)")
    pr.add_argument("--eps", type=float, default=0.35)

    pv = sub.add_parser("verify", help="run acceptance criteria")
    pv.add_argument(
        "--criteria",
        type=_parse_ints,
        default=None,
        help="comma-separated criterion numbers (default: all)",
    )
    pv.add_argument("--peak-degree", type=int, default=3)
    pv.add_argument(
        "--coarse",
        action="store_true",
        help="use a deliberately coarse mesh in the convergence check",
    )
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "solve":
        coeffs = None
        if args.coeffs is not None:
            coeffs = tuple(_parse_floats(c) for c in args.coeffs)
        try:
            cfg = ExperimentConfig(
                graph=args.graph,
                peaks=tuple(args.peaks),
                mu=args.mu,
                alpha=args.alpha,
                coeffs=coeffs,
                lambdas=tuple(args.lambdas),
                nodes_per_width=args.nodes_per_width,
                newton_tol=args.newton_tol,
                max_iters=args.max_iters,
                damping=args.damping,
                refinement_growth=args.refinement_growth,
                seed=args.seed,
                cutoff=args.cutoff,
                outdir=args.outdir,
            )
            return cmd_solve(cfg)
        except (GraphNLSError, ValueError, OSError) as exc:
            outdir = Path(os.environ.get("GRAPHNLS_OUTDIR", args.outdir))
            _write_error_record(outdir, type(exc).__name__, str(exc))
            print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
            return 1
    if args.command == "reduced-energy":
        if args.N < 2:
            print("error: N must be >= 2", file=sys.stderr)
            return 1
        if args.eps <= 0.0:
            print("error: eps must be positive", file=sys.stderr)
            return 1
        return cmd_reduced_energy(args.N, args.eps)
    if args.command == "verify":
        return cmd_verify(args.criteria, args.peak_degree, args.coarse)
    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
