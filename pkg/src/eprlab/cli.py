"""Command-line entry point: evolve, predict, measure, sweep, validate, plot.

Numeric results go to stdout or files as JSON/CSV; logs and progress go to
stderr.  Exit codes: 0 success, 1 validation/computation failure, 2
configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .config import load_config
from .duhamel import first_order_state
from .errors import ConfigError, EprLabError
from .observables import (
    measurement_record,
    scaled_momentum_expectation,
    spin_down_probability,
    spin_up_probability,
)
from .oracle import run_validation
from .spectral import assemble_full_state
from .sweep import (
    DEFAULT_EPSILONS,
    SweepConfig,
    run_sweep,
    summary_dict,
    write_plot_data,
    write_plots,
    write_records_csv,
    write_summary_json,
)

log = logging.getLogger("eprlab")


def _emit(payload: dict, out_path: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_evolve(args) -> int:
    cfg = load_config(args.config)
    grid = cfg.build_grid()
    t = cfg.params.t_final
    state = assemble_full_state(
        grid, cfg.params, t, None, cfg.envelope, cfg.potential
    )
    if args.dump:
        with open(args.dump, "w", encoding="utf-8") as fh:
            json.dump(state.to_dict(), fh)
        log.info("state snapshot written to %s", args.dump)
    _emit(
        {
            "epsilon": cfg.params.epsilon,
            "t": t,
            "norm": state.norm(),
            "spin_up_probability": spin_up_probability(state),
            "spin_down_probability": spin_down_probability(state),
            "grid": grid.to_dict(),
        },
        args.out,
    )
    return 0


def _cmd_predict(args) -> int:
    cfg = load_config(args.config)
    grid = cfg.build_grid()
    params = cfg.params
    t = params.t_final
    pred = first_order_state(grid, params, t, cfg.envelope, cfg.potential)
    eps, p, a = params.epsilon, params.momentum, params.spin_pos
    _emit(
        {
            "epsilon": eps,
            "t": t,
            "alpha": pred.alpha,
            "norm_A": pred.flip_norm,
            "predicted_P_u": spin_up_probability(pred.approximation),
            "predicted_mean_p1_up": p - eps / p,
            "predicted_mean_x1_up": a * eps / p**2 + (p - eps / p) * t,
            "predicted_mean_x2": -p * t,
            "flip_momentum_check": scaled_momentum_expectation(pred.flip_field, params),
        },
        args.out,
    )
    return 0


def _cmd_measure(args) -> int:
    cfg = load_config(args.config)
    grid = cfg.build_grid()
    t = cfg.params.t_final
    state = assemble_full_state(grid, cfg.params, t, None, cfg.envelope, cfg.potential)
    record = measurement_record(state, cfg.params)
    record.update({"epsilon": cfg.params.epsilon, "t": t})
    _emit(record, args.out)
    return 0


def _parse_eps(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError as exc:
        raise ConfigError(f"bad --eps list '{text}': {exc}") from exc
    if not values:
        raise ConfigError("--eps list is empty")
    return values


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    epsilons = _parse_eps(args.eps) if args.eps else DEFAULT_EPSILONS
    sweep_cfg = SweepConfig(base=cfg, epsilons=epsilons)
    records = run_sweep(sweep_cfg)
    for r in records:
        if r.error:
            log.warning("eps=%g %s failed: %s", r.epsilon, r.observable, r.error)
        else:
            log.info(
                "eps=%g %s = %.6e (%.2f s)", r.epsilon, r.observable, r.measured, r.seconds
            )
    out_dir = args.out or "."
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "sweep.csv")
    json_path = os.path.join(out_dir, "sweep.json")
    write_records_csv(records, csv_path)
    write_summary_json(sweep_cfg, records, json_path)
    log.info("wrote %s and %s", csv_path, json_path)
    _emit(summary_dict(sweep_cfg, records), None)
    return 0


def _cmd_validate(args) -> int:
    cfg = load_config(args.config)
    grid = cfg.build_grid()
    report = run_validation(grid, cfg.params, cfg.potential, cfg.envelope)
    _emit(report, args.out)
    return 0 if report["passed"] else 1


def _cmd_plot(args) -> int:
    from .sweep import SweepRecord  # local import keeps startup light

    path = args.csv or "sweep.csv"
    if not os.path.exists(path):
        raise ConfigError(f"sweep CSV not found: {path}")
    records = []
    import csv as csv_mod

    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv_mod.DictReader(fh):
            records.append(
                SweepRecord(
                    epsilon=float(row["epsilon"]),
                    observable=row["observable"],
                    measured=float(row["measured"]) if row["measured"] else float("nan"),
                    predicted=float(row["predicted"]) if row["predicted"] else None,
                    seconds=float(row["seconds"]) if row["seconds"] else 0.0,
                )
            )
    out_dir = args.out or "."
    os.makedirs(out_dir, exist_ok=True)
    written = write_plots(records, out_dir) + write_plot_data(records, out_dir)
    _emit({"written": written}, None)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eprlab",
        description="Two-particle + spin collision laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, dump=False, eps=False, csv=False):
        p = sub.add_parser(name, help=help_text)
        if not csv:
            p.add_argument("--config", required=True, help="JSON config path")
        p.add_argument("--out", help="output file (JSON) or directory (sweep/plot)")
        if dump:
            p.add_argument("--dump", help="write the evolved state snapshot here")
        if eps:
            p.add_argument("--eps", help="comma-separated epsilon list, descending")
        if csv:
            p.add_argument("--csv", help="sweep CSV to plot (default sweep.csv)")
        p.set_defaults(func=func)
        return p

    add("evolve", _cmd_evolve, "run the full evolution and report norms/probabilities",
        dump=True)
    add("predict", _cmd_predict, "closed-form first-order predictions")
    add("measure", _cmd_measure, "evolve and measure spin/momentum probabilities")
    add("sweep", _cmd_sweep, "epsilon sweep with power-law fits", eps=True)
    add("validate", _cmd_validate, "run the oracle suite")
    add("plot", _cmd_plot, "log-log SVG charts and .dat files from a sweep CSV",
        csv=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(message)s"
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        log.error("%s", exc)
        return 2
    except EprLabError as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
