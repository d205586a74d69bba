"""Command-line entry point: ``threelevel {steady,sweep,doe,validate}``.

Exit codes: 0 success, 1 validation failure, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import asdict, replace
from pathlib import Path

from . import __version__, doe, gkls, io, kinetic, validate
from .config import RunConfig, emit_config, load_config, with_grid
from .errors import AnalysisError, ConfigError, ThreeLevelError
from .model import carnot_efficiency, dressed_energies
from .sweep import GKLS_OBSERVABLES, KINETIC_OBSERVABLES, run_sweep

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

# Published orthogonal-test maxima (P, eta, P*eta) per case, shown beside
# evaluated results for comparison.
PUBLISHED_TABLE4 = doe.load_fixture("table4")


def _build_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    overrides = {}
    if args.engine:
        overrides["engine"] = args.engine
    if args.out:
        overrides["out"] = args.out
    if args.format:
        overrides["fmt"] = args.format
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.workers is not None:
        overrides["workers"] = args.workers
    try:
        cfg = replace(cfg, **overrides)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if args.grid:
        cfg = with_grid(cfg, args.grid)
    return cfg


def _metadata(cfg: RunConfig) -> dict:
    return {"engine": cfg.engine, "config_hash": cfg.digest(), "version": __version__}


def cmd_steady(cfg: RunConfig, args) -> int:
    baths = cfg.baths.require_engine()
    spec = cfg.spec
    frame = dressed_energies(spec)
    rep = kinetic.evaluate(spec, baths, cfg.closure)
    record = {
        "engine": cfg.engine,
        "config": {"spec": asdict(spec), "baths": asdict(baths)},
        "frame": asdict(frame),
        "carnot": carnot_efficiency(baths),
        "kinetic": {**asdict(rep), "leak_ratio": rep.leak_ratio,
                    "inv_coupling_eff": 1.0 / rep.coupling_eff},
        "metadata": _metadata(cfg),
    }
    print(f"theta = {frame.theta:.6f}  eps10 = {frame.eps10:.6f}  eps20 = {frame.eps20:.6f}")
    print(f"P = {rep.power:.6g}  phi_h = {rep.heat_in:.6g}  phi_c = {rep.heat_out:.6g}")
    print(f"eta = {rep.efficiency:.6g}  P*eta = {rep.efficacy:.6g}  carnot = {record['carnot']:.6g}")
    print(f"1/eta_CP = {1.0 / rep.coupling_eff:.3f}  leak = {rep.leak:.6g}  leak/P = {rep.leak_ratio:.6g}")
    print(f"<sigma> = {rep.sigma_avg:.6g}  engine = {rep.engine_ok}")
    if cfg.engine == "gkls":
        gen = gkls.build_generator(spec, baths)
        rho = gkls.steady_state(gen)
        phi_h, phi_c, power = gkls.heat_currents(gen, rho)
        dec = gkls.heat_decomposition(gen, rho)
        record["gkls"] = {
            "P": power, "phi_h": phi_h, "phi_c": phi_c,
            "sigma": gkls.entropy_production_rate(gen, rho, baths),
            "diag": dec.diag, "nondiag": dec.nondiag,
            "inv_eta_nd": dec.inv_eta_nd,
            "mode": None if dec.mode is None else int(dec.mode),
            "rho_real": rho.real, "rho_imag": rho.imag,
        }
        mode = "unclassified" if dec.mode is None else f"{int(dec.mode)} ({dec.mode.name})"
        print(f"[gkls] P = {power:.6g}  phi_h = {phi_h:.6g}  1/eta_nd = {dec.inv_eta_nd}  mode = {mode}")
    path = io.write_json(Path(cfg.out) / "steady.json", record)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, args) -> int:
    baths = cfg.baths
    if args.case:
        design = doe.build_design(cfg.levels)
        if not 1 <= args.case <= 9:
            raise ConfigError(f"--case must be in 1..9, got {args.case}")
        baths = cfg.levels.baths(design.cases[args.case - 1])
    baths.require_engine()
    allowed = KINETIC_OBSERVABLES if cfg.engine == "kinetic" else GKLS_OBSERVABLES
    names = args.observables.split(",") if args.observables else list(allowed)
    for name in names:
        if name not in allowed:
            raise ConfigError(f"observable {name!r} not available for engine {cfg.engine}")
    grid = run_sweep(baths, cfg.axes, cfg.engine, cfg.closure, cfg.spec.omega10, cfg.spec.drive_freq)
    grid.metadata.update(_metadata(cfg))
    for name in names:
        print(f"wrote {io.write_grid(grid, name, Path(cfg.out), cfg.fmt)}")
    return EXIT_OK


def _write_both(out: Path, stem: str, header, rows, payload):
    io.write_csv(out / f"{stem}.csv", header, rows)
    io.write_json(out / f"{stem}.json", payload)
    print(f"wrote {out / stem}.csv/.json")


def cmd_doe(cfg: RunConfig, args) -> int:
    out = Path(cfg.out)
    design = doe.build_design(cfg.levels)
    if args.fixture:
        table = doe.load_fixture(args.fixture, design)
        results = None
    else:
        results = doe.run_design(cfg.levels, cfg.axes, cfg.engine, cfg.closure,
                                 workers=cfg.workers, keep_grid=False)
        table = {m: [r.metric(m) for r in results] for m in doe.METRICS}

    names = doe.LEVEL_NAMES
    rows4 = []
    for i, case in enumerate(design.cases):
        row = [i + 1, *(names[lv - 1] for lv in case), *(table[m][i] for m in doe.METRICS)]
        if results is not None:
            r = results[i]
            row += [*(r.argmax_P or (float("nan"),) * 2), *(r.argmax_eta or (float("nan"),) * 2),
                    *(r.argmax_Peta or (float("nan"),) * 2), r.min_sigma,
                    *(PUBLISHED_TABLE4[m][i] for m in doe.METRICS)]
        rows4.append(row)
    header4 = ["case", *doe.FACTORS, *doe.METRICS]
    if results is not None:
        header4 += ["P_omega20", "P_lam", "eta_omega20", "eta_lam", "Peta_omega20", "Peta_lam",
                    "min_sigma", "published_P", "published_eta", "published_Peta"]
    _write_both(out, "table4_results", header4, rows4,
                {"columns": header4, "rows": rows4, "metadata": _metadata(cfg)})
    if results is not None:
        rows3 = [[r.case_id, r.min_sigma] for r in results]
        _write_both(out, "table3_min_sigma", ["case", "min_sigma"], rows3,
                    {"columns": ["case", "min_sigma"], "rows": rows3})

    ranges = doe.range_analysis(table, design)
    header5 = ["metric", "factor", "K1", "K2", "K3", "Kbar1", "Kbar2", "Kbar3", "R", "optimal", "rank"]
    rows5 = []
    for m in doe.METRICS:
        for f in doe.FACTORS:
            e = ranges[m, f]
            best = names[e.optimal_level - 1] if e.optimal_level else "none"
            rows5.append([m, f, *e.K, *e.Kbar, e.R, best, ranges.ranking[m].index(f) + 1])
    _write_both(out, "table5_range", header5, rows5, {"columns": header5, "rows": rows5})

    table6 = doe.anova(table, design)
    header6 = ["metric", "source", "S", "df", "MS", "F", "p", "mark"]
    rows6 = []
    for m in doe.METRICS:
        for f in doe.FACTORS:
            a = table6[m, f]
            rows6.append([m, f, a.S, a.df, a.MS, a.F, a.p, a.mark])
        s_e, df_e, ms_e = table6.error[m]
        rows6.append([m, "error", s_e, df_e, ms_e, "", "", ""])
    _write_both(out, "table6_anova", header6, rows6, {"columns": header6, "rows": rows6})

    best = doe.select_best(ranges, table6)
    header7 = ["metric", "D_d", "D_r", "dbeta", "order", "consistent", "note"]
    rows7 = []
    for m in doe.METRICS:
        b = best[m]
        lv = b.level_names()
        rows7.append([m, lv["D_d"], lv["D_r"], lv["dbeta"], ">".join(b.order),
                      "yes" if b.consistent else "no", b.note])
    _write_both(out, "table7_best", header7, rows7, {"columns": header7, "rows": rows7})

    for row in rows7:
        print(f"best {row[0]}: D_d={row[1]} D_r={row[2]} dbeta={row[3]} (impact {row[4]})")
    return EXIT_OK


def cmd_validate(cfg: RunConfig, args) -> int:
    checks = validate.run_checks(cfg)
    failed = [c for c in checks if not c.passed]
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return EXIT_FAIL if failed else EXIT_OK


COMMANDS = {"steady": cmd_steady, "sweep": cmd_sweep, "doe": cmd_doe, "validate": cmd_validate}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="threelevel", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="run configuration file")
        p.add_argument("--engine", choices=("kinetic", "gkls"))
        p.add_argument("--grid", help="NxM: N omega20 points by M lam points")
        p.add_argument("--out", help="output directory")
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--seed", type=int)
        p.add_argument("--workers", type=int)
        if name == "doe":
            p.add_argument("--fixture", help="results table to analyse ('table4' = bundled)")
        if name == "sweep":
            p.add_argument("--case", type=int, help="use the baths of orthogonal-test case 1-9")
            p.add_argument("--observables", help="comma-separated subset to emit")
        if name == "validate":
            p.add_argument("--dump-config", action="store_true", help=argparse.SUPPRESS)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _build_config(args)
        if getattr(args, "dump_config", False):
            print(emit_config(cfg))
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, AnalysisError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ThreeLevelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
