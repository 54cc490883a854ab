"""Epsilon-sweep driver, power-law fitting, and result persistence.

Each sweep point runs the full evolution plus the closed-form predictions on
a grid auto-scaled to that epsilon (unless the config pins one), so the
quadratic and super-polynomial decay laws can be read off as fitted log-log
slopes.  The pipeline is deterministic: fixed iteration orders, no
randomness, records merged in descending epsilon regardless of which worker
finished first.
"""

from __future__ import annotations

import csv
import json
import math
import os
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import RunConfig
from .duhamel import far_branch_bound, first_order_remainder, stationary_phase_residual
from .errors import ConfigError, EprLabError, FitError
from .model import check_resolution, default_grid
from .observables import spin_flip_coefficient, spin_up_probability
from .spectral import assemble_full_state, default_dt

DEFAULT_EPSILONS = (0.4, 0.3, 0.2, 0.15)
OBSERVABLES = (
    "theorem_residual",
    "spin_up_probability",
    "stationary_phase_residual",
    "far_branch_bound",
)


@dataclass(frozen=True)
class SweepRecord:
    """One (epsilon, observable) measurement row."""

    epsilon: float
    observable: str
    measured: float
    predicted: float | None
    seconds: float
    error: str | None = None

    def ok(self) -> bool:
        return self.error is None and math.isfinite(self.measured)


@dataclass(frozen=True)
class PowerLawFit:
    """Least-squares fit of log(value) against log(epsilon)."""

    exponent: float
    log_prefactor: float
    residual_rms: float
    n_points: int

    @property
    def prefactor(self) -> float:
        return math.exp(self.log_prefactor)


def fit_power_law(records: Sequence[SweepRecord]) -> PowerLawFit:
    """Ordinary least squares in log-log space over one observable's records.

    Non-positive or failed measurements are dropped with a warning; fewer
    than three surviving points is an error.
    """
    usable = [r for r in records if r.ok()]
    dropped = [r for r in records if not r.ok() or r.measured <= 0]
    usable = [r for r in usable if r.measured > 0]
    if dropped:
        warnings.warn(
            f"power-law fit dropped {len(dropped)} non-positive/failed points",
            stacklevel=2,
        )
    if len(usable) < 3:
        raise FitError(f"need >= 3 positive measurements, have {len(usable)}")
    lx = np.log([r.epsilon for r in usable])
    ly = np.log([r.measured for r in usable])
    exponent, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (exponent * lx + intercept)
    return PowerLawFit(
        exponent=float(exponent),
        log_prefactor=float(intercept),
        residual_rms=float(np.sqrt(np.mean(resid**2))),
        n_points=len(usable),
    )


@dataclass(frozen=True)
class SweepConfig:
    base: RunConfig
    epsilons: tuple[float, ...] = DEFAULT_EPSILONS
    observables: tuple[str, ...] = OBSERVABLES

    def __post_init__(self):
        if any(e2 >= e1 for e1, e2 in zip(self.epsilons, self.epsilons[1:])):
            raise ConfigError("epsilon list must be strictly decreasing")
        unknown = set(self.observables) - set(OBSERVABLES)
        if unknown:
            raise ConfigError(f"unknown observables: {sorted(unknown)}")


def _thread_cap() -> int:
    env = os.environ.get("EPR_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _measure_one(cfg: SweepConfig, epsilon: float) -> list[SweepRecord]:
    base = cfg.base
    params = base.params.with_epsilon(epsilon)
    records: list[SweepRecord] = []
    try:
        grid = base.grid if base.grid is not None else default_grid(params)
        # raises ResolutionError if this epsilon's packet does not fit the grid
        check_resolution(grid, params, params.momentum)
    except EprLabError as exc:
        return [
            SweepRecord(epsilon, obs, math.nan, None, 0.0, error=str(exc))
            for obs in cfg.observables
        ]

    t = params.t_final
    dt = default_dt(params)
    state = None
    for obs in cfg.observables:
        start = time.perf_counter()
        try:
            predicted = None
            if obs == "theorem_residual":
                value = first_order_remainder(
                    grid, params, t, dt, base.envelope, base.potential
                )
            elif obs == "spin_up_probability":
                if state is None:
                    state = assemble_full_state(
                        grid, params, t, dt, base.envelope, base.potential
                    )
                value = spin_up_probability(state)
                predicted = spin_flip_coefficient(params, base.potential) * epsilon**2
            elif obs == "stationary_phase_residual":
                value = stationary_phase_residual(
                    t, grid, params, base.potential, base.envelope
                )
            elif obs == "far_branch_bound":
                value = far_branch_bound(t, grid, params, base.potential, base.envelope)
            else:  # pragma: no cover - guarded by SweepConfig
                raise FitError(f"unknown observable {obs}")
            records.append(
                SweepRecord(epsilon, obs, float(value), predicted,
                            time.perf_counter() - start)
            )
        except EprLabError as exc:
            records.append(
                SweepRecord(epsilon, obs, math.nan, None,
                            time.perf_counter() - start, error=str(exc))
            )
    return records


def run_sweep(cfg: SweepConfig) -> list[SweepRecord]:
    """Run every observable at every epsilon; per-point failures become
    error records and the sweep continues."""
    if not cfg.epsilons:
        return []
    with ThreadPoolExecutor(max_workers=min(_thread_cap(), len(cfg.epsilons))) as pool:
        chunks = list(pool.map(lambda e: _measure_one(cfg, e), cfg.epsilons))
    records: list[SweepRecord] = []
    for chunk in chunks:  # cfg.epsilons is already descending
        records.extend(chunk)
    return records


def fit_all(records: Sequence[SweepRecord]) -> dict[str, PowerLawFit]:
    fits = {}
    for obs in sorted({r.observable for r in records}):
        subset = [r for r in records if r.observable == obs]
        try:
            fits[obs] = fit_power_law(subset)
        except FitError:
            continue
    return fits


def _fmt(value: float | None) -> str:
    return "" if value is None else repr(float(value))


def write_records_csv(records: Sequence[SweepRecord], path: str,
                      include_timings: bool = False) -> None:
    """Persist records; timings are zeroed by default so identical configs
    yield byte-identical files (wall times go to the logs instead)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epsilon", "observable", "measured", "predicted", "seconds"])
        for r in records:
            writer.writerow(
                [
                    repr(r.epsilon),
                    r.observable,
                    _fmt(r.measured),
                    _fmt(r.predicted),
                    repr(r.seconds) if include_timings else "0.0",
                ]
            )


def summary_dict(cfg: SweepConfig, records: Sequence[SweepRecord]) -> dict:
    fits = fit_all(records)
    return {
        "config": cfg.base.echo,
        "epsilons": list(cfg.epsilons),
        "observables": list(cfg.observables),
        "fits": {
            name: {
                "exponent": f.exponent,
                "log_prefactor": f.log_prefactor,
                "prefactor": f.prefactor,
                "residual_rms": f.residual_rms,
                "n_points": f.n_points,
            }
            for name, f in fits.items()
        },
        "records": [
            {
                "epsilon": r.epsilon,
                "observable": r.observable,
                "measured": None if math.isnan(r.measured) else r.measured,
                "predicted": r.predicted,
                "error": r.error,
            }
            for r in records
        ],
    }


def write_summary_json(cfg: SweepConfig, records: Sequence[SweepRecord], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary_dict(cfg, records), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_plot_data(records: Sequence[SweepRecord], out_dir: str) -> list[str]:
    """gnuplot-ready .dat files: epsilon, measured, fitted value."""
    fits = fit_all(records)
    paths = []
    for obs in sorted({r.observable for r in records}):
        subset = [r for r in records if r.observable == obs and r.ok() and r.measured > 0]
        if not subset:
            continue
        path = os.path.join(out_dir, f"{obs}.dat")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("# epsilon measured fitted\n")
            for r in subset:
                fitted = (
                    fits[obs].prefactor * r.epsilon ** fits[obs].exponent
                    if obs in fits
                    else math.nan
                )
                fh.write(f"{r.epsilon!r} {r.measured!r} {fitted!r}\n")
        paths.append(path)
    return paths


def write_plots(records: Sequence[SweepRecord], out_dir: str) -> list[str]:
    """Log-log SVG chart per observable: measured points plus fitted line."""
    from matplotlib.backends.backend_svg import FigureCanvasSVG
    from matplotlib.figure import Figure

    fits = fit_all(records)
    paths = []
    for obs in sorted({r.observable for r in records}):
        subset = [r for r in records if r.observable == obs and r.ok() and r.measured > 0]
        if not subset:
            continue
        eps = np.array([r.epsilon for r in subset])
        meas = np.array([r.measured for r in subset])
        fig = Figure(figsize=(5, 4))
        FigureCanvasSVG(fig)
        ax = fig.add_subplot(111)
        ax.loglog(eps, meas, "o", label="measured")
        if obs in fits:
            f = fits[obs]
            xs = np.geomspace(eps.min(), eps.max(), 50)
            ax.loglog(xs, f.prefactor * xs**f.exponent, "-",
                      label=f"fit slope {f.exponent:.2f}")
        ax.set_xlabel("epsilon")
        ax.set_ylabel(obs)
        ax.legend()
        fig.tight_layout()
        path = os.path.join(out_dir, f"{obs}.svg")
        fig.savefig(path, metadata={"Date": None})
        paths.append(path)
    return paths
