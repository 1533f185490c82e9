"""Monte Carlo evaluation over scenario run directories.

Directory layout::

    run_dir/
      truth/t000.json  t001.json ...          # MB density per time step
      runs/run000/t000.json  t001.json ...    # estimate per run and step
      runs/run001/...

Estimate files may hold MB densities or MB mixtures (the mixture is scored
as the weighted sum of per-component metric values).  Every run must
provide exactly the time-step files present under ``truth/``.

Aggregation: at each time step the root-mean-square value is
(mean over runs of total^p)^(1/p).  Decomposition series, which live in
p-th-power units, are aggregated by arithmetic mean over runs and then
rooted for display, so the displayed terms stay comparable to the
displayed total.  Decomposition columns are produced only when every
estimate is a plain MB density and alpha = 2.

A small synthetic generator (objects drifting at constant velocity, with
noisy detections, occasional misses, and false components) is included to
exercise the pipeline; it is not a tracking filter.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .distances import BaseDistanceKind
from .metric import mbm_pgospa, pgospa
from .model import (
    BernoulliComponent,
    DiracDensity,
    GaussianDensity,
    MBDensity,
    MBMixture,
    MetricParams,
    canonical_json,
    load_document,
    mb_from_dict,
    mb_to_dict,
    mbm_from_dict,
    mbm_to_dict,
)

__all__ = ["RunSeries", "evaluate_run_dir", "rms_series", "write_rms_csv", "generate_runs"]

DECOMP_KEYS = ("localization", "existence_mismatch", "missed", "false")


@dataclass(frozen=True)
class RunSeries:
    """Per-run, per-time-step metric values (runs x timesteps), plus the
    p-th-power decomposition matrices when available."""

    totals: np.ndarray
    decomposition: dict | None
    timesteps: tuple
    p: float


def _timestep_files(directory: Path) -> dict:
    files = {}
    for name in sorted(os.listdir(directory)):
        if name.endswith(".json"):
            files[name] = directory / name
    if not files:
        raise ValueError(f"no time-step files found in {directory}")
    return files


def evaluate_run_dir(
    run_dir,
    params: MetricParams,
    base: BaseDistanceKind = BaseDistanceKind.W2,
) -> RunSeries:
    run_dir = Path(run_dir)
    truth_dir = run_dir / "truth"
    runs_dir = run_dir / "runs"
    if not truth_dir.is_dir() or not runs_dir.is_dir():
        raise ValueError(f"run directory must contain truth/ and runs/: {run_dir}")
    truth_files = _timestep_files(truth_dir)
    labels = tuple(truth_files)
    run_names = sorted(d for d in os.listdir(runs_dir) if (runs_dir / d).is_dir())
    if not run_names:
        raise ValueError(f"no run subdirectories found in {runs_dir}")

    truths = {name: mb_from_dict(load_document(path)) for name, path in truth_files.items()}

    totals = np.zeros((len(run_names), len(labels)))
    decomp = {key: np.zeros_like(totals) for key in DECOMP_KEYS}
    decomposable = params.alpha == 2.0
    for ri, run_name in enumerate(run_names):
        rdir = runs_dir / run_name
        run_files = _timestep_files(rdir)
        if tuple(run_files) != labels:
            raise ValueError(
                f"missing/misaligned run files in {rdir}: expected {list(labels)}"
            )
        for ti, name in enumerate(labels):
            doc = load_document(run_files[name])
            if isinstance(doc, dict) and "mixture" in doc:
                mix = mbm_from_dict(doc)
                totals[ri, ti] = mbm_pgospa(mix, truths[name], params, base)
                decomposable = False
            else:
                res = pgospa(mb_from_dict(doc), truths[name], params, base)
                totals[ri, ti] = res.total
                if decomposable:
                    decomp["localization"][ri, ti] = res.localization
                    decomp["existence_mismatch"][ri, ti] = res.existence_mismatch
                    decomp["missed"][ri, ti] = res.missed
                    decomp["false"][ri, ti] = res.false_det
    return RunSeries(
        totals=totals,
        decomposition=decomp if decomposable else None,
        timesteps=labels,
        p=params.p,
    )


def rms_series(series: RunSeries) -> dict:
    """Per-time-step aggregates: keys 'rms_total' and, when decomposition
    is available, 'rms_<term>' for each term."""
    p = series.p
    out = {"rms_total": (series.totals**p).mean(axis=0) ** (1.0 / p)}
    if series.decomposition is not None:
        for key, mat in series.decomposition.items():
            out[f"rms_{key}"] = mat.mean(axis=0) ** (1.0 / p)
    return out


def write_rms_csv(stream, series: RunSeries) -> None:
    agg = rms_series(series)
    if series.decomposition is not None:
        stream.write(
            "# decomposition terms: per-term mean of p-th powers across runs, then 1/p root\n"
        )
        header = "t,rms_total," + ",".join(f"rms_{k}" for k in DECOMP_KEYS)
        columns = ["rms_total"] + [f"rms_{k}" for k in DECOMP_KEYS]
    else:
        header = "t,rms_total"
        columns = ["rms_total"]
    stream.write(header + "\n")
    for ti in range(len(series.timesteps)):
        cells = [f"{agg[col][ti]:.12g}" for col in columns]
        stream.write(f"{ti}," + ",".join(cells) + "\n")


# ---------------------------------------------------------------------------
# Synthetic run generation


def _truth_states(rng: np.random.Generator, n_objects: int, n_steps: int, dim: int):
    pos = rng.uniform(20.0, 80.0, size=(n_objects, dim))
    vel = rng.uniform(-2.0, 2.0, size=(n_objects, dim))
    return np.stack([pos + t * vel for t in range(n_steps)])  # (T, K, dim)


def _estimate_mb(rng: np.random.Generator, truth_t: np.ndarray, dim: int) -> MBDensity:
    comps = []
    for pos in truth_t:
        if rng.random() < 0.9:
            mean = pos + rng.normal(0.0, 0.5, size=dim)
            sigma = rng.uniform(0.3, 1.0)
            comps.append(
                BernoulliComponent(
                    rng.uniform(0.5, 0.99), GaussianDensity(mean, sigma**2 * np.eye(dim))
                )
            )
    for _ in range(rng.poisson(0.5)):
        comps.append(
            BernoulliComponent(
                rng.uniform(0.2, 0.6),
                GaussianDensity(rng.uniform(0.0, 100.0, size=dim), np.eye(dim)),
            )
        )
    return MBDensity(comps)


def _extract_points(mix: MBMixture, threshold: float) -> MBDensity:
    # report components above the existence threshold from the
    # highest-weight mixture entry, as unit-existence point masses
    _, best_mb = max(mix.entries, key=lambda wm: wm[0])
    comps = []
    for c in best_mb.components:
        if c.r > threshold:
            loc = c.density.mean if isinstance(c.density, GaussianDensity) else c.density.location
            comps.append(BernoulliComponent(1.0, DiracDensity(np.asarray(loc))))
    return MBDensity(comps)


def generate_runs(
    out_dir,
    n_runs: int = 4,
    n_steps: int = 10,
    n_objects: int = 3,
    dim: int = 2,
    seed: int = 0,
    mixture: bool = False,
    point_extract: float | None = None,
) -> Path:
    """Write a synthetic run directory and return its path.

    ``mixture`` emits two-entry MB mixtures as estimates.  With
    ``point_extract`` set, estimates are instead unit-existence Dirac MBs
    holding the means of components whose existence probability exceeds
    the threshold (taken from the highest-weight mixture entry).
    """
    out_dir = Path(out_dir)
    truth_dir = out_dir / "truth"
    truth_dir.mkdir(parents=True, exist_ok=True)
    states = _truth_states(np.random.default_rng([seed, 1]), n_objects, n_steps, dim)
    for t in range(n_steps):
        mb = MBDensity(
            [BernoulliComponent(1.0, DiracDensity(s)) for s in states[t]]
        )
        (truth_dir / f"t{t:03d}.json").write_text(
            canonical_json(mb_to_dict(mb)) + "\n", encoding="utf-8"
        )
    for run in range(n_runs):
        rdir = out_dir / "runs" / f"run{run:03d}"
        rdir.mkdir(parents=True, exist_ok=True)
        rng = np.random.default_rng([seed, 2, run])
        for t in range(n_steps):
            mb = _estimate_mb(rng, states[t], dim)
            if mixture or point_extract is not None:
                other = _estimate_mb(rng, states[t], dim)
                w = float(rng.uniform(0.55, 0.9))
                mix = MBMixture([(w, mb), (1.0 - w, other)])
                if point_extract is not None:
                    doc = mb_to_dict(_extract_points(mix, point_extract))
                else:
                    doc = mbm_to_dict(mix)
            else:
                doc = mb_to_dict(mb)
            (rdir / f"t{t:03d}.json").write_text(
                canonical_json(doc) + "\n", encoding="utf-8"
            )
    return out_dir
