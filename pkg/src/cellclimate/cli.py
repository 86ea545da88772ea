"""Command-line front end.

    cellclimate equilibrium [--preset offset] [--set eps=0.8408]
    cellclimate synthesize  [--config run.yaml] [--out out/] [--threads 4]
    cellclimate scenario regulator|offset [--set target_radius=1]

Exit codes: 0 success, 2 configuration error, 3 numerical failure
(non-convergence, blow-up, lost control), 4 infeasible target.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
import time
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, apply_flat, dump_config, load_config, parse_overrides
from .model import EquilibriumError, NumericalBlowUp, net_flux, jacobian, equilibrium

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_INFEASIBLE = 4

log = logging.getLogger("cellclimate")


def _resolve_config(args, preset: str) -> RunConfig:
    cfg = RunConfig.preset(preset)
    if args.config:
        cfg = load_config(args.config, cfg)
    if args.set:
        cfg = apply_flat(cfg, parse_overrides(args.set))
    if args.out:
        cfg = cfg.with_(out=args.out)
    return cfg


def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.yaml").write_text(dump_config(cfg), encoding="utf-8")
    return out


def cmd_equilibrium(args) -> int:
    cfg = _resolve_config(args, args.preset)
    p = cfg.params
    x = equilibrium(p)
    f_a, f_s = net_flux(x, 0.0, p)
    eig = np.linalg.eigvals(jacobian(x, 0.0, p))
    eig = eig[np.argsort(eig.real)]
    out = _outdir(cfg)
    header = ["eps", "u", "t_a", "t_s", "flux_residual_a", "flux_residual_s",
              "eig1_re", "eig1_im", "eig2_re", "eig2_im"]
    row = [p.eps, 0.0, x.t_a, x.t_s, f_a, f_s, eig[0].real, eig[0].imag, eig[1].real, eig[1].imag]
    with open(out / "equilibrium.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerow([repr(float(v)) for v in row])
    print(
        f"equilibrium eps={p.eps}: t_a={x.t_a:.4f} K t_s={x.t_s:.4f} K "
        f"eigenvalues=({eig[0].real:.4e}{eig[0].imag:+.1e}j, {eig[1].real:.4e}{eig[1].imag:+.1e}j) s^-1"
    )
    return EXIT_OK


def _write_synthesis(cfg, table, doc, out: Path, figures: bool) -> int:
    from . import export
    from .synthesis import controllable_region

    count, mask = controllable_region(doc)
    export.write_doc_csv(doc, out / "doc.csv")
    export.write_matrix_csv(mask.astype(int), out / "controllable.csv")
    export.write_matrix_csv(doc.chosen_u().reshape(mask.shape), out / "doc_u.csv")
    export.write_matrix_csv(doc.cost.reshape(mask.shape), out / "cost.csv")
    (out / "transitions.txt").write_text(export.transitions_summary(table), encoding="utf-8")
    if figures:
        from .plotting import plot_doc

        plot_doc(doc, out / "doc.png", title=f"eps = {cfg.params.eps}")
    return count


def cmd_synthesize(args) -> int:
    from .simulate import synthesize

    cfg = _resolve_config(args, args.preset)
    t0 = time.perf_counter()
    table, doc = synthesize(cfg, threads=args.threads)
    elapsed = time.perf_counter() - t0
    out = _outdir(cfg)
    count = _write_synthesis(cfg, table, doc, out, not args.no_figures)
    print(f"controllable cells: {count} / {cfg.grid.n_cells}; synthesis {elapsed:.2f} s")
    return EXIT_OK


def cmd_scenario(args) -> int:
    from . import export
    from .simulate import run_scenario

    cfg = _resolve_config(args, args.which)
    out = _outdir(cfg)
    report = run_scenario(cfg, args.which, threads=args.threads)
    _write_synthesis(cfg, report.transitions, report.doc, out, not args.no_figures)
    export.write_trajectory_csv(report.trajectory, out / "trajectory.csv")
    export.write_trajectory_csv(report.uncontrolled, out / "uncontrolled.csv")
    text = export.report_text(report)
    (out / "report.txt").write_text(text, encoding="utf-8")
    if not args.no_figures:
        from .plotting import plot_response

        plot_response(report, out / "response.png")
    sys.stdout.write(text)
    if report.infeasibility is not None:
        print(f"error: {report.infeasibility.describe()}", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML run configuration")
    common.add_argument("--out", help="output directory (overrides the config's 'out')")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one config key; repeatable")
    common.add_argument("--threads", type=int, default=1, help="worker threads for synthesis")
    common.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="cellclimate",
        description="Minimum-time cell-mapping control of a two-box climate model.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("equilibrium", parents=[common], help="steady state and Jacobian eigenvalues")
    p.add_argument("--preset", choices=["regulator", "offset"], default="regulator")
    p.set_defaults(func=cmd_equilibrium)

    p = sub.add_parser("synthesize", parents=[common], help="build the DOC table")
    p.add_argument("--preset", choices=["regulator", "offset"], default="regulator")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("scenario", parents=[common], help="synthesize and run a closed-loop scenario")
    p.add_argument("which", choices=["regulator", "offset"])
    p.set_defaults(func=cmd_scenario)
    return parser


def main(argv: list[str] | None = None) -> int:
    from .simulate import ControlLost

    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (EquilibriumError, NumericalBlowUp, ControlLost) as e:
        print(f"numerical failure: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
