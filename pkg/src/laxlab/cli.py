"""``laxlab`` command line: verify, simulate, charges and report."""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from pathlib import Path

import numpy as np

from . import charges, continuity, dynamics, gauge, lax, suite
from .config import ScenarioConfig, apply_overrides, load_config
from .errors import NumericalBlowup, ParseError, ValidationError
from .fields import snapshot_csv
from .jetcalc import pretty

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_BLOWUP = 2
EXIT_CONFIG = 3


def rows_csv(rows: list[dict]) -> str:
    header = list(rows[0])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(row[k])) for k in header])
    return buf.getvalue()


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="")


def densities_filename(theta0: float) -> str:
    return f"densities_theta{round(math.degrees(theta0)):02d}.txt"


def densities_text(series: charges.AknsSeries) -> str:
    lines = [f"# theta0 = {series.theta0!r}"]
    lines += [f"rho_{n} = {pretty(d)}" for n, d in enumerate(series.rho, start=1)]
    return "\n".join(lines) + "\n"


def scenario_block(cfg: ScenarioConfig) -> str:
    p, g = cfg.params, cfg.grid
    return "\n".join(
        [
            "[scenario]",
            f"seed = {cfg.seed}",
            f"m_s = {p.m_s!r}",
            f"m_f = {p.m_f!r}",
            f"beta = {p.beta!r}",
            f"g = {p.g!r}",
            f"theta0 = {p.theta0!r}",
            f"lam = {p.lam!r}",
            f"mu = {p.mu!r}",
            f"grid = n {g.n} length {g.length!r} stencil_order {g.stencil_order}",
            f"dt = {cfg.dt!r}",
            f"t_end = {cfg.t_end!r}",
            f"preset = {cfg.preset}",
        ]
    )


def initial_state(cfg: ScenarioConfig):
    return dynamics.initial_state(cfg.preset, cfg.grid, **cfg.preset_args)


def state_diagnostics(cfg: ScenarioConfig, state, mutate: bool = False) -> list[str]:
    p, spec, obs = cfg.params, cfg.grid, cfg.observers
    blocks = []
    if obs.gauge_check:
        a_minus = suite.flipped_build_a_minus if mutate else lax.build_a_minus
        zeta = obs.curvature[0] if obs.curvature else 1.0
        blocks.append(f"[gauge]\ngauge_lemma_defect = {gauge.verify_gauge_lemma(state, p, spec, zeta, a_minus=a_minus):.6e}")
    if obs.curvature:
        rep = lax.curvature_report(state, p, spec, obs.curvature, obs.curvature_mode)
        blocks.append(rep.summary())
    surf, flat = dynamics.constraint_surface_residuals(state, spec)
    blocks.append(
        "\n".join(
            [
                "[constraint_surface]",
                f"phi_t_plus_2i_rho_Linf = {float(np.max(np.abs(surf))):.6e}",
                f"phi_x_Linf = {float(np.max(np.abs(flat))):.6e}",
                "note = the printed phi_t relation is self-referential; the cleaned form phi_t = -2i psibar psi is used",
            ]
        )
    )
    return blocks


# ---------------------------------------------------------------- subcommands


def run_verify(cfg: ScenarioConfig, mutate: bool = False) -> tuple[int, str]:
    """Randomized identity suites with the configured seed; exit 0 iff all hard checks pass."""
    result = suite.run_suites(cfg.params, cfg.grid, cfg.seed, mutate=mutate)
    state = initial_state(cfg)
    lines = [scenario_block(cfg), "[verify]", result.text()]
    lines += state_diagnostics(cfg, state, mutate)
    lines.append(continuity.report_block(state, cfg.params, cfg.grid))
    lines.append(f"verdict = {'PASS' if result.ok else 'FAIL'}")
    return (EXIT_OK if result.ok else EXIT_VERIFY_FAILED), "\n".join(lines) + "\n"


def _observers(cfg: ScenarioConfig):
    obs = cfg.observers
    out = []
    monitor = None
    if obs.charges or obs.monodromy:
        monitor = charges.ConservationMonitor(
            cfg.params,
            n_max=obs.charges,
            zetas=obs.monodromy,
            connection_choice=obs.connection,
            fermion_substitution=obs.fermion_substitution,
        )
        out.append(monitor)
    if obs.continuity:
        def cont(state, p, spec):
            return {
                "continuity_adjoint_Linf": float(np.max(np.abs(continuity.continuity_residual(state, p, spec, "adjoint")))),
                "continuity_paper_Linf": float(np.max(np.abs(continuity.continuity_residual(state, p, spec, "paper")))),
            }
        out.append(cont)
    if obs.curvature:
        def curv(state, p, spec):
            return {
                f"curvature_Linf_{i}": float(np.max(np.abs(lax.curvature_field(state, p, spec, z, obs.curvature_mode))))
                for i, z in enumerate(obs.curvature)
            }
        out.append(curv)
    return out, monitor


def run_simulate(cfg: ScenarioConfig) -> tuple[int, str]:
    """Full run; writes timeseries.csv, final_state.csv and report.txt into the output directory."""
    out = Path(cfg.output_dir)
    state = initial_state(cfg)
    observers, monitor = _observers(cfg)
    dt = cfg.t_end / cfg.n_steps
    try:
        rows, final = dynamics.run(
            state, cfg.params, cfg.grid, dt, cfg.n_steps, cfg.observers.stride, observers, strict_cfl=not cfg.allow_cfl_violation
        )
    except NumericalBlowup as exc:
        return EXIT_BLOWUP, f"numerical blowup: {exc}\n"
    _write(out / "timeseries.csv", rows_csv(rows))
    _write(out / "final_state.csv", snapshot_csv(final, cfg.grid))

    lines = [scenario_block(cfg), "[simulation]", f"n_steps = {cfg.n_steps}", f"dt_used = {dt!r}", f"t_final = {final.t!r}"]
    growth = continuity.growth_law_check(rows, cfg.params) if len(rows) >= 3 else None
    lines.append(continuity.report_block(final, cfg.params, cfg.grid, growth))
    if monitor is not None:
        stats = charges.drift_stats(rows)
        lines.append("[conservation]")
        for key, value in stats.trace_drift_rel.items():
            lines.append(f"{key}_drift_rel = {value:.6e}")
        for key, value in stats.charge_drift_rel.items():
            lines.append(f"{key}_drift_rel = {value:.6e}")
        if monitor.zetas:
            lines.append(f"residual_budget = {stats.residual_budget:.6e}")
            lines.append(f"drift_within_10x_budget = {stats.within_budget(10.0)}")
            mono = [charges.monodromy(final, cfg.params, cfg.grid, z, cfg.observers.connection) for z in monitor.zetas]
            lines.append(f"det_T_minus_1_max = {max(abs(m.det - 1) for m in mono):.6e}")
            lines.append(f"det_T_minus_1_scaled_max = {max(m.det_defect_scaled for m in mono):.6e}")
    lines += state_diagnostics(cfg, final)
    report = "\n".join(lines) + "\n"
    _write(out / "report.txt", report)
    return EXIT_OK, report


def run_charges(cfg: ScenarioConfig, n_max: int) -> tuple[int, str]:
    p = cfg.params
    series = charges.akns_build(p, n_max)
    out = Path(cfg.output_dir)
    _write(out / densities_filename(p.theta0), densities_text(series))
    lines = [scenario_block(cfg), "[charges]", "monomial_counts = " + " ".join(map(str, series.monomial_counts()))]
    lines += [c.text() for c in charges.compare_densities(p, min(n_max, 3))]
    state = initial_state(cfg)
    jets = charges.compute_jets(state, p, cfg.grid)
    for n in range(1, min(n_max, charges.MAX_JET_ORDER + 1) + 1):
        val = charges.evaluate_charge(series.density(n), state, p, cfg.grid, cfg.observers.fermion_substitution, jets)
        lines.append(f"I_{n} = {val!r}")
    if n_max >= 2:
        _, notes = suite.phase_suite(cfg.seed, p)
        lines += notes
    return EXIT_OK, "\n".join(lines) + "\n"


def run_report(cfg: ScenarioConfig) -> tuple[int, str]:
    """Diagnostics of the configured initial state without time stepping."""
    state = initial_state(cfg)
    zetas = cfg.observers.curvature or (1.0,)
    rep = lax.curvature_report(state, cfg.params, cfg.grid, zetas, cfg.observers.curvature_mode)
    _write(Path(cfg.output_dir) / "curvature.csv", rep.to_csv())
    lines = [scenario_block(cfg)]
    cfg_obs = cfg.observers
    if not cfg_obs.curvature:
        lines.append(rep.summary())
    lines += state_diagnostics(cfg, state)
    lines.append(continuity.report_block(state, cfg.params, cfg.grid))
    return EXIT_OK, "\n".join(lines) + "\n"


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="laxlab", description="Verification laboratory for the deformed Dirac/sinh-Gordon Lax pair.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("-c", "--config", required=True, help="scenario TOML file")
        sp.add_argument("--theta0", type=float)
        sp.add_argument("--g", type=float)
        sp.add_argument("--n", type=int, help="grid points")
        sp.add_argument("--dt", type=float)
        sp.add_argument("--t-end", type=float)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--output-dir")
        return sp

    v = common(sub.add_parser("verify", help="run the randomized identity suites"))
    v.add_argument("--mutate", action="store_true", help=argparse.SUPPRESS)
    common(sub.add_parser("simulate", help="evolve the fields and write CSV artifacts"))
    ch = common(sub.add_parser("charges", help="AKNS densities, closed-form comparison and phase probe"))
    ch.add_argument("--n-max", type=int)
    common(sub.add_parser("report", help="curvature and continuity diagnostics of the initial state"))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        cfg = apply_overrides(
            cfg,
            theta0=args.theta0,
            g=args.g,
            n=args.n,
            dt=args.dt,
            t_end=args.t_end,
            seed=args.seed,
            output_dir=args.output_dir,
        )
    except (ParseError, ValidationError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "verify":
        code, text = run_verify(cfg, mutate=args.mutate)
    elif args.command == "simulate":
        code, text = run_simulate(cfg)
    elif args.command == "charges":
        n_max = args.n_max if args.n_max is not None else max(cfg.observers.charges, 3)
        if n_max < 1:
            print("config error: --n-max must be >= 1", file=sys.stderr)
            return EXIT_CONFIG
        code, text = run_charges(cfg, n_max)
    else:
        code, text = run_report(cfg)
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
