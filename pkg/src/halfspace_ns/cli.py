"""Command-line surface.

Subcommands: solve, linear, besov, kernels-check, asymptotics, verify.
Flags: --config PATH, --out DIR, --seed U64, --format {csv,json-lines}.

Exit codes: 0 all gates pass, 1 usage, 2 malformed data or config,
3 numeric gate failure.  Every error path prints a single line
`error[usage|data|gate]: ...` to stderr.  Reports are deterministic for a
fixed (config, seed): floats are rendered with %.17g and timing information
goes to stderr only.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from .besov import chemin_lerner_norm
from .calibration import solution_norm_indices
from .config import ConfigError, RunConfig, load_run_config
from .fieldio import FieldFormatError, load_field, store_field
from .fields import HalfSpaceField, TangentialField
from .fixed_point import (
    NonconvergenceError,
    SmallnessError,
    SolverConfig,
    picard_solve,
    residual_report,
)
from .presets import PRESET_NAMES, make_preset
from .profile import (
    LimitSmallnessError,
    limit_force_solve,
    pde_residual,
    profile_ladder,
)
from .spectral import tensor_product
from .stokes import evolution_relation_check, linear_solve
from .verify import VerificationSuite

EXIT_CODES = {"usage": 1, "data": 2, "gate": 3}


class CliError(Exception):
    def __init__(self, kind: str, message: str):
        self.kind = kind
        super().__init__(message)


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit(2); route to usage=1
        raise CliError("usage", message)


def _fmt(x: float) -> str:
    return "%.17g" % float(x)


def _cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return _fmt(value)
    return str(value)


def _json_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return _fmt(value)
    if isinstance(value, int):
        return str(value)
    return json.dumps(value)


class Reporter:
    """Writes tables and key=value summaries to --out, or stdout without it."""

    def __init__(self, out: str | None, fmt: str):
        self.out = Path(out) if out else None
        self.fmt = fmt
        if self.out is not None:
            self.out.mkdir(parents=True, exist_ok=True)

    def table(self, name: str, header: list[str], rows: list[list]) -> None:
        if self.fmt == "csv":
            lines = [",".join(header)]
            lines += [",".join(_cell(v) for v in row) for row in rows]
            ext = "csv"
        else:
            lines = [
                "{" + ", ".join(
                    f"{json.dumps(k)}: {_json_cell(v)}" for k, v in zip(header, row)
                ) + "}"
                for row in rows
            ]
            ext = "jsonl"
        text = "\n".join(lines) + "\n"
        if self.out is None:
            sys.stdout.write(f"# {name}\n{text}")
        else:
            (self.out / f"{name}.{ext}").write_text(text)

    def summary(self, name: str, mapping: dict) -> None:
        lines = [f"{k} = {_cell(v)}" for k, v in mapping.items()]
        text = "\n".join(lines) + "\n"
        sys.stdout.write(text)
        if self.out is not None:
            (self.out / f"{name}.txt").write_text(text)


def _build_parser() -> _Parser:
    parser = _Parser(prog="halfspace-ns", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")
    for name, help_text in [
        ("solve", "nonlinear Picard solve"),
        ("linear", "one linear solve with residual report"),
        ("besov", "block norms of input or preset data"),
        ("kernels-check", "kernel quadrature oracle and trace identities"),
        ("asymptotics", "far-field profile ladder (n = 4)"),
        ("verify", "run all verification gates"),
    ]:
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", metavar="PATH", default=None)
        sp.add_argument("--out", metavar="DIR", default=None)
        sp.add_argument("--seed", metavar="U64", default=None)
        sp.add_argument("--format", choices=("csv", "json-lines"), default=None)
    return parser


def _run_config(args) -> RunConfig:
    rc = load_run_config(args.config) if args.config else RunConfig()
    if args.seed is not None:
        try:
            seed = int(args.seed, 10)
        except ValueError as exc:
            raise CliError("usage", f"--seed must be an integer, got {args.seed!r}") from exc
        if not 0 <= seed < 2**64:
            raise CliError("usage", "--seed must fit in an unsigned 64-bit integer")
        rc.seed = seed
    if args.format is not None:
        rc.format = args.format
    if args.out is not None:
        rc.out = args.out
    return rc


def _load_data(rc: RunConfig, cfg: SolverConfig):
    """Resolve (a, F, preset) from the configured source."""
    nv = cfg.grid.d + 1
    if rc.preset is not None and (rc.a_file or rc.f_file):
        raise CliError("usage", "preset and a_file/f_file are mutually exclusive")
    if rc.preset is not None:
        if rc.preset not in PRESET_NAMES:
            raise CliError(
                "data", f"unknown preset {rc.preset!r}; choose one of {', '.join(PRESET_NAMES)}"
            )
        data = make_preset(rc.preset, cfg, amplitude=rc.amplitude, perturb=rc.perturb, seed=rc.seed)
        return data.a, data.F, data
    if rc.a_file is None and rc.f_file is None:
        raise CliError("usage", "no data source: set preset or a_file/f_file in the config")
    a = TangentialField.zeros(cfg.grid, nv)
    F = None
    if rc.a_file is not None:
        a = load_field(rc.a_file, cfg.grid)
        if not isinstance(a, TangentialField):
            raise CliError("data", f"{rc.a_file}: boundary data must be a TBF1 file")
        if a.ncomp != nv:
            raise CliError("data", f"{rc.a_file}: expected {nv} components, got {a.ncomp}")
    if rc.f_file is not None:
        F = load_field(rc.f_file, cfg.grid)
        if not isinstance(F, HalfSpaceField):
            raise CliError("data", f"{rc.f_file}: forcing must be an HSF1 file")
        if F.ncomp != nv * nv:
            raise CliError("data", f"{rc.f_file}: expected {nv * nv} components, got {F.ncomp}")
    return a, F, None


def _config_summary(rc: RunConfig, cfg: SolverConfig) -> dict:
    return {
        "n": cfg.n,
        "N": cfg.grid.N,
        "L": float(cfg.grid.L),
        "M": cfg.grid.M,
        "x_max": float(cfg.grid.x_max),
        "p": float(cfg.p),
        "q": float(cfg.q),
        "r": float(cfg.r),
        "seed": rc.seed,
        "preset": rc.preset or "",
    }


def cmd_solve(rc: RunConfig, reporter: Reporter) -> int:
    cfg = rc.solver_config()
    a, F, _ = _load_data(rc, cfg)
    t0 = time.perf_counter()
    res = picard_solve(a, F, cfg)
    rep = residual_report(res, a, F, cfg)
    print(f"solve: {time.perf_counter() - t0:.2f}s", file=sys.stderr)
    rows = []
    prev = None
    for i, diff in enumerate(res.diffs, start=1):
        ratio = diff / prev if prev else 0.0
        rows.append([i, diff, ratio])
        prev = diff
    reporter.table("iterations", ["iteration", "difference", "ratio"], rows)
    if reporter.out is not None:
        store_field(reporter.out / "solution.hsf1", res.u)
    summary = _config_summary(rc, cfg)
    summary.update(
        {
            "iterations": res.iterations,
            "converged": res.converged,
            "data_norm": res.data_norm,
            "solution_norm": res.solution_norm,
            "residual_fixed_point": rep["fixed_point"],
            "residual_divergence": rep["divergence"],
            "residual_trace": rep["trace"],
        }
    )
    if res.calibration is not None:
        summary["delta0"] = res.calibration.delta0
    reporter.summary("solve_summary", summary)
    return 0


def cmd_linear(rc: RunConfig, reporter: Reporter) -> int:
    cfg = rc.solver_config()
    a, F, _ = _load_data(rc, cfg)
    t0 = time.perf_counter()
    sol = linear_solve(a, F)
    u = sol.sample()
    ev = evolution_relation_check(a, F)
    print(f"linear: {time.perf_counter() - t0:.2f}s", file=sys.stderr)
    cl_u, idx_u = solution_norm_indices(cfg.n, cfg.p, cfg.q, cfg.r)
    if reporter.out is not None:
        store_field(reporter.out / "solution.hsf1", u)
    reporter.table(
        "residuals",
        ["name", "value"],
        [
            ["trace", sol.trace_residual()],
            ["divergence", sol.divergence_residual()],
            ["evolution_tangential", ev["tangential"] / ev["scale"]],
            ["evolution_normal", ev["normal"] / ev["scale"]],
        ],
    )
    summary = _config_summary(rc, cfg)
    summary["solution_norm"] = chemin_lerner_norm(u, cl_u, idx_u)
    reporter.summary("linear_summary", summary)
    return 0


def cmd_besov(rc: RunConfig, reporter: Reporter) -> int:
    cfg = rc.solver_config()
    a, F, _ = _load_data(rc, cfg)
    from .besov import BesovIndex, CLIndex, block_lp_norm, besov_norm, _slab_block_norms, _vertical_lq

    idx_a, cl_f, idx_f = cfg.data_indices()
    cl_u, idx_u = cfg.solution_indices()
    grid = cfg.grid
    rows = []
    for j in grid.dyadic_range():
        row = [j, 2.0 ** (idx_a.s * j) * block_lp_norm(a, j, idx_a.p)]
        if F is not None:
            per_slab, tail_norm = _slab_block_norms(F, j, idx_f.p)
            row.append(
                2.0 ** (idx_f.s * j)
                * _vertical_lq(per_slab, tail_norm, grid, cl_f, F.tail is not None)
            )
        rows.append(row)
    header = ["block", "boundary_weighted_norm"]
    if F is not None:
        header.append("forcing_weighted_norm")
    reporter.table("block_norms", header, rows)
    summary = _config_summary(rc, cfg)
    summary["boundary_norm"] = besov_norm(a, idx_a)
    if F is not None:
        summary["forcing_norm"] = chemin_lerner_norm(F, cl_f, idx_f)
        summary["forcing_solution_space_norm"] = chemin_lerner_norm(F, cl_u, idx_u)
    reporter.summary("besov_summary", summary)
    return 0


def cmd_kernels_check(rc: RunConfig, reporter: Reporter) -> int:
    suite = VerificationSuite()
    results = suite.run_all([1, 2])
    reporter.table(
        "kernels_check",
        ["criterion", "name", "status", "details"],
        [[r.index, r.name, "PASS" if r.passed else "FAIL", r.details] for r in results],
    )
    reporter.summary(
        "kernels_check_summary",
        {"passed": sum(r.passed for r in results), "total": len(results)},
    )
    bad = [r for r in results if not r.passed]
    if bad:
        raise CliError("gate", f"kernel battery failed: {bad[0].details}")
    return 0


def cmd_asymptotics(rc: RunConfig, reporter: Reporter) -> int:
    if rc.n != 4:
        raise CliError("data", f"asymptotics needs n = 4, config has n = {rc.n}")
    if rc.preset is None:
        rc.preset = "profile-consistent"
    if not math.isinf(rc.q):
        raise CliError("data", "asymptotics needs q = inf (tail norms diverge otherwise)")
    cfg = rc.solver_config()
    a, F, preset = _load_data(rc, cfg)
    t0 = time.perf_counter()
    res = picard_solve(a, F, cfg)
    grid = cfg.grid
    d, n = grid.d, grid.d + 1
    eff = res.u * 0.0 if F is None else F
    eff = eff - tensor_product(res.u, res.u)
    tail = eff.tail_or_zero()
    g_eff = np.empty((n * d,) + grid.shape, dtype=np.complex128)
    for k in range(n):
        for m in range(d):
            g_eff[k * d + m] = tail[k * n + m]
    g_field = TangentialField(grid, g_eff, _trust=True)
    profile = limit_force_solve(g_field)
    ladder = profile_ladder(res.u, profile)
    u_tail = TangentialField(grid, res.u.tail_or_zero(), _trust=True)
    resid = pde_residual(u_tail, g_field)
    print(f"asymptotics: {time.perf_counter() - t0:.2f}s", file=sys.stderr)
    reporter.table(
        "profile_ladder",
        ["R", "distance"],
        [[R, D] for R, D in zip(ladder.cutoffs, ladder.distances)],
    )
    summary = _config_summary(rc, cfg)
    summary.update(
        {
            "iterations": res.iterations,
            "pde_residual": resid,
            "initial_distance": ladder.initial,
            "final_distance": ladder.final,
            "decay_ratio": ladder.decay_ratio(),
            "monotone": ladder.monotone(),
        }
    )
    reporter.summary("asymptotics_summary", summary)
    if resid > 1e-9:
        raise CliError("gate", f"limit-system residual {resid:.3e} exceeds 1e-09")
    if not ladder.monotone():
        raise CliError("gate", "profile distance ladder is not non-increasing")
    if rc.preset == "profile-consistent" and rc.perturb > 0.0 and ladder.decay_ratio() > 0.2:
        raise CliError(
            "gate", f"far-field decay ratio {ladder.decay_ratio():.3f} exceeds 0.2"
        )
    return 0


def cmd_verify(rc: RunConfig, reporter: Reporter) -> int:
    suite = VerificationSuite(echo=lambda line: print(line, flush=True))
    t0 = time.perf_counter()
    results = suite.run_all()
    print(f"verify: {time.perf_counter() - t0:.1f}s total", file=sys.stderr)
    reporter.table(
        "verification",
        ["criterion", "name", "status", "details"],
        [[r.index, r.name, "PASS" if r.passed else "FAIL", r.details] for r in results],
    )
    reporter.summary(
        "verify_summary",
        {"passed": sum(r.passed for r in results), "total": len(results)},
    )
    failed = [r for r in results if not r.passed]
    if failed:
        names = ", ".join(f"{r.index}:{r.name}" for r in failed)
        raise CliError("gate", f"verification failed: {names}")
    return 0


_HANDLERS = {
    "solve": cmd_solve,
    "linear": cmd_linear,
    "besov": cmd_besov,
    "kernels-check": cmd_kernels_check,
    "asymptotics": cmd_asymptotics,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        rc = _run_config(args)
        reporter = Reporter(rc.out, rc.format)
        return _HANDLERS[args.command](rc, reporter)
    except CliError as exc:
        print(f"error[{exc.kind}]: {exc}", file=sys.stderr)
        return EXIT_CODES[exc.kind]
    except (ConfigError, FieldFormatError) as exc:
        print(f"error[data]: {exc}", file=sys.stderr)
        return EXIT_CODES["data"]
    except (SmallnessError, LimitSmallnessError, NonconvergenceError) as exc:
        print(f"error[gate]: {exc}", file=sys.stderr)
        return EXIT_CODES["gate"]
    except (ValueError, OSError) as exc:
        print(f"error[data]: {exc}", file=sys.stderr)
        return EXIT_CODES["data"]


if __name__ == "__main__":
    raise SystemExit(main())
