"""Command-line front end.

Four commands: ``estimate`` evaluates entropy estimators on a counts
file, ``simulate`` runs the benchmark grid and writes per-setting and
per-regime CSVs, ``biodiv`` runs the subsample-from-population benchmark
with Borda aggregation, and ``report`` renders figures from a finished
run directory.

Exit codes: 0 success, 2 usage or config error, 3 input-data error,
4 internal numeric failure. All floats are serialized with repr(), the
shortest decimal that round-trips, so output files are portable golden
files. Directory-writing commands emit manifest.json last, carrying
sha256 digests of every other output.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
import sys
import time
from pathlib import Path

import click

from . import __version__
from .bench import (
    FamilySpec,
    GridConfig,
    borda,
    borda_pivot,
    oracle_residual_scenario,
    regime_pivot,
    run_grid,
    subsample_bench,
)
from .entropy import ESTIMATORS, entropy_seneca
from .sample import SampleCounts
from .seeding import derive_rng
from .support import support_chao1, support_chao1_bc, support_risky_threshold

_SUPPORT_ESTIMATORS = {"chao1-bc": support_chao1_bc, "chao1": support_chao1}

_PRESET_FAMILIES = (
    {"family": "uniform"},
    {"family": "step"},
    {"family": "zipf", "alpha": 0.5},
    {"family": "zipf", "alpha": 1.0},
    {"family": "zipf", "alpha": 1.5},
    {"family": "dirichlet", "alpha": 0.5},
    {"family": "dirichlet", "alpha": 1.0},
    {"family": "beta-binomial"},
)

PRESETS: dict[str, dict] = {
    "table1": {
        "families": list(_PRESET_FAMILIES),
        "support_sizes": [2, 4, 6, 8, 10, 20, 30, 40, 50],
        "n": 10,
        "trials": 1000,
        "estimators": list(ESTIMATORS),
        "master_seed": 0,
    },
    "table2": {
        "families": list(_PRESET_FAMILIES),
        "support_sizes": [4, 8, 12, 16, 20, 40, 60, 80, 100],
        "n": 20,
        "trials": 1000,
        "estimators": list(ESTIMATORS),
        "master_seed": 0,
    },
}

_CONFIG_KEYS = {
    "families",
    "support_sizes",
    "n",
    "trials",
    "estimators",
    "master_seed",
    "bootstrap_reps",
    "confidence",
}


class CountsParseError(ValueError):
    """A counts file that cannot be parsed, with its line and column."""

    def __init__(self, path: Path, line: int, column: int, message: str):
        self.path, self.line, self.column = path, line, column
        super().__init__(f"{path}:{line}:{column}: {message}")


def parse_counts_file(path: Path) -> SampleCounts:
    """Read a counts table: `label,count` CSV or a headerless count column."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    rows = [(i + 1, line.strip()) for i, line in enumerate(lines) if line.strip()]
    if not rows:
        raise CountsParseError(path, 1, 1, "empty counts file")
    counts: list[int] = []
    if rows[0][1] == "label,count":
        seen: dict[str, int] = {}
        for lineno, text in rows[1:]:
            fields = text.split(",")
            if len(fields) != 2:
                raise CountsParseError(
                    path, lineno, 1, f"expected 2 fields, found {len(fields)}"
                )
            label, raw = fields[0].strip(), fields[1].strip()
            if not label:
                raise CountsParseError(path, lineno, 1, "empty label")
            if label in seen:
                raise CountsParseError(
                    path, lineno, 1,
                    f"duplicate label {label!r} (first seen at line {seen[label]})",
                )
            seen[label] = lineno
            counts.append(_parse_count(path, lineno, 2, raw))
        if not counts:
            raise CountsParseError(path, rows[0][0], 1, "no data rows after header")
    else:
        for lineno, text in rows:
            if "," in text:
                raise CountsParseError(
                    path, lineno, 1,
                    "expected header 'label,count' or a single column of counts",
                )
            counts.append(_parse_count(path, lineno, 1, text))
    return SampleCounts.from_counts(counts)


def _parse_count(path: Path, lineno: int, column: int, raw: str) -> int:
    try:
        value = int(raw)
    except ValueError:
        raise CountsParseError(
            path, lineno, column, f"count {raw!r} is not an integer"
        ) from None
    if value <= 0:
        raise CountsParseError(path, lineno, column, f"count must be positive, got {value}")
    return value


def _fmt(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[list[object]]) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _digest(path: Path) -> dict[str, object]:
    data = path.read_bytes()
    return {"sha256": hashlib.sha256(data).hexdigest(), "bytes": len(data)}


def _write_manifest(
    out_dir: Path, command: str, seed: int | None, config_echo: dict,
    outputs: list[Path], elapsed: float, extra: dict | None = None,
) -> Path:
    manifest = {
        "command": command,
        "version": __version__,
        "master_seed": seed,
        "config": config_echo,
        "elapsed_seconds": elapsed,
        "outputs": {p.name: _digest(p) for p in outputs},
    }
    if extra:
        manifest.update(extra)
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return path


def _config_from_dict(doc: dict, source: str) -> GridConfig:
    if not isinstance(doc, dict):
        raise click.UsageError(f"{source}: config must be a JSON object")
    unknown = set(doc) - _CONFIG_KEYS
    if unknown:
        raise click.UsageError(f"{source}: unknown config keys {sorted(unknown)}")
    missing = {"families", "support_sizes", "n", "trials", "estimators"} - set(doc)
    if missing:
        raise click.UsageError(f"{source}: missing config keys {sorted(missing)}")
    families = []
    for entry in doc["families"]:
        if not isinstance(entry, dict) or "family" not in entry:
            raise click.UsageError(
                f"{source}: each family entry must be an object with a 'family' key"
            )
        params = {k: v for k, v in entry.items() if k != "family"}
        for key, val in params.items():
            if not isinstance(val, (int, float)) or isinstance(val, bool):
                raise click.UsageError(
                    f"{source}: family parameter {key!r} must be a number"
                )
        families.append(FamilySpec(entry["family"], params))
    try:
        return GridConfig(
            families=tuple(families),
            support_sizes=tuple(int(k) for k in doc["support_sizes"]),
            n=int(doc["n"]),
            trials=int(doc["trials"]),
            estimators=tuple(doc["estimators"]),
            master_seed=int(doc.get("master_seed", 0)),
            bootstrap_reps=int(doc.get("bootstrap_reps", 1000)),
            confidence=float(doc.get("confidence", 0.95)),
        )
    except (TypeError, ValueError) as exc:
        raise click.UsageError(f"{source}: {exc}") from exc


@click.group()
@click.version_option(version=__version__, prog_name="seneca-lab")
def main() -> None:
    """Small-sample entropy estimation benchmark tools."""


@main.command("estimate")
@click.argument("counts_file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option(
    "--estimator", "-e", "estimators", multiple=True,
    type=click.Choice(list(ESTIMATORS)), default=tuple(ESTIMATORS),
    show_default=False, help="Estimator tag; repeatable. Defaults to all.",
)
@click.option(
    "--support-estimator", type=click.Choice(sorted(_SUPPORT_ESTIMATORS)),
    default="chao1-bc", show_default=True,
    help="Support estimator feeding the self-consistent solve.",
)
@click.option(
    "--base", type=float, default=None,
    help="Convert reported entropies to this logarithm base (default: nats).",
)
@click.option(
    "--out", type=click.Path(dir_okay=False, allow_dash=True), default="-",
    help="Output CSV path, '-' for stdout.",
)
def cmd_estimate(
    counts_file: Path, estimators: tuple[str, ...], support_estimator: str,
    base: float | None, out: str,
) -> None:
    """Estimate entropy of one counts table with the chosen estimators."""
    if base is not None and (base <= 0.0 or base == 1.0):
        raise click.BadParameter("base must be positive and not 1", param_hint="--base")
    try:
        counts = parse_counts_file(counts_file)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(3)
    scale = 1.0 if base is None else 1.0 / math.log(base)
    support_fn = _SUPPORT_ESTIMATORS[support_estimator]
    rows: list[list[object]] = []
    try:
        for tag in estimators:
            if tag == "seneca":
                est = entropy_seneca(counts, support_fn)
                solve = est.diagnostics
                rows.append([
                    tag, est.value * scale, solve.coverage, solve.m_star,
                    solve.upsilon_used, solve.fallback,
                ])
            else:
                est = ESTIMATORS[tag](counts)
                coverage = est.diagnostics if tag == "chao-shen" else None
                rows.append([tag, est.value * scale, coverage, None, None, None])
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(3)
    except Exception as exc:  # pragma: no cover - defensive
        click.echo(f"numeric failure: {exc}", err=True)
        sys.exit(4)
    with click.open_file(out, "w") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["estimator", "value", "coverage", "m_star", "upsilon", "fallback"])
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _regime_of(support_size: int, n: int) -> str:
    return "well" if support_size <= n else "under"


def _summaries_rows(result, seed: int, gamma: int | None) -> list[list[object]]:
    rows = []
    for s in result.summaries:
        rows.append([
            s.family, s.params, s.support_size, s.n, s.estimator,
            _regime_of(s.support_size, s.n),
            gamma is not None and s.support_size > gamma,
            s.trials, s.rmse, s.bias, s.variance, s.ci_low, s.ci_high, seed,
        ])
    return rows


def _regimes_rows(result, config: GridConfig, seed: int) -> list[list[object]]:
    rows = []
    for spec in config.families:
        pjson = spec.params_json
        for tag in config.estimators:
            for regime in ("well", "under"):
                errs = [
                    result.errors[(spec.family, pjson, k, tag)]
                    for k in config.support_sizes
                    if _regime_of(k, config.n) == regime
                    and (spec.family, pjson, k, tag) in result.errors
                ]
                if not errs:
                    continue
                mean_rmse = float(
                    sum(math.sqrt(float((e * e).mean())) for e in errs) / len(errs)
                )
                interval = regime_pivot(
                    errs,
                    reps=config.bootstrap_reps,
                    level=config.confidence,
                    rng=derive_rng(seed, spec.family, pjson, tag, regime, "pivot"),
                )
                rows.append([
                    spec.family, pjson, config.n, tag, regime, len(errs),
                    config.trials, mean_rmse, interval.low, interval.high,
                    interval.radius, seed,
                ])
    return rows


@main.command("simulate")
@click.option(
    "--config", "config_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None,
    help="JSON config mirroring the grid fields.",
)
@click.option("--preset", type=click.Choice(sorted(PRESETS)), default=None)
@click.option(
    "--out-dir", type=click.Path(file_okay=False, path_type=Path), required=True,
)
@click.option("--seed", type=int, default=None, help="Override the master seed.")
@click.option("--trials", type=int, default=None, help="Override the trial count.")
@click.option(
    "--threads", type=int, default=None, envvar="SENECA_LAB_THREADS",
    help="Worker threads for the grid (env: SENECA_LAB_THREADS; default 1).",
)
@click.option("--residuals", is_flag=True, help="Also emit missing-mass residuals.")
@click.option("--keep-trials", is_flag=True, help="Also emit per-trial records.")
def cmd_simulate(
    config_path: Path | None, preset: str | None, out_dir: Path,
    seed: int | None, trials: int | None, threads: int | None,
    residuals: bool, keep_trials: bool,
) -> None:
    """Run the simulation grid and write summary CSVs plus a manifest."""
    if (config_path is None) == (preset is None):
        raise click.UsageError("provide exactly one of --config and --preset")
    if preset is not None:
        doc = json.loads(json.dumps(PRESETS[preset]))
        source = f"preset {preset}"
    else:
        try:
            doc = json.loads(config_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise click.UsageError(f"{config_path}: invalid JSON ({exc})") from exc
        source = str(config_path)
    if seed is not None:
        doc["master_seed"] = seed
    if trials is not None:
        doc["trials"] = trials
    config = _config_from_dict(doc, source)
    if threads is None:
        threads = 1
    if threads < 1:
        raise click.UsageError("--threads must be >= 1")

    started = time.monotonic()
    try:
        result = run_grid(config, keep_trials=keep_trials, threads=threads)
        residual_records = oracle_residual_scenario(config) if residuals else None
    except Exception as exc:
        click.echo(f"numeric failure: {exc}", err=True)
        sys.exit(4)

    out_dir.mkdir(parents=True, exist_ok=True)
    gamma = support_risky_threshold(config.n)
    master = config.master_seed
    outputs: list[Path] = []

    summaries_path = out_dir / "summaries.csv"
    _write_csv(
        summaries_path,
        ["family", "params", "support_size", "n", "estimator", "regime",
         "support_risky", "trials", "rmse", "bias", "variance", "ci_low",
         "ci_high", "seed"],
        _summaries_rows(result, master, gamma),
    )
    outputs.append(summaries_path)

    regimes_path = out_dir / "regimes.csv"
    _write_csv(
        regimes_path,
        ["family", "params", "n", "estimator", "regime", "settings", "trials",
         "mean_rmse", "ci_low", "ci_high", "radius", "seed"],
        _regimes_rows(result, config, master),
    )
    outputs.append(regimes_path)

    if residual_records is not None:
        residuals_path = out_dir / "residuals.csv"
        _write_csv(
            residuals_path,
            ["family", "params", "support_size", "n", "trial", "mode",
             "residual", "seed"],
            [[r.family, r.params, r.support_size, r.n, r.trial, r.mode,
              r.residual, master] for r in residual_records],
        )
        outputs.append(residuals_path)

    if keep_trials and result.records is not None:
        trials_path = out_dir / "trials.csv"
        _write_csv(
            trials_path,
            ["family", "params", "support_size", "n", "trial", "estimator",
             "estimate", "truth", "seed"],
            [[r.family, r.params, r.support_size, r.n, r.trial, r.estimator,
              r.estimate, r.truth, master] for r in result.records],
        )
        outputs.append(trials_path)

    config_echo = dict(doc)
    config_echo["threads"] = threads
    extra = {
        "failures": [
            {"family": f.family, "params": f.params,
             "support_size": f.support_size, "message": f.message}
            for f in result.failures
        ]
    }
    manifest = _write_manifest(
        out_dir, "simulate", master, config_echo, outputs,
        time.monotonic() - started, extra,
    )
    for path in [*outputs, manifest]:
        click.echo(f"wrote {path}")


@main.command("biodiv")
@click.argument(
    "populations", nargs=-1, required=True,
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
)
@click.option("--sizes", default="10,20,30,40,50", show_default=True,
              help="Comma-separated subsample sizes.")
@click.option("--trials", type=int, default=1000, show_default=True)
@click.option(
    "--estimator", "-e", "estimators", multiple=True,
    type=click.Choice(list(ESTIMATORS)), default=tuple(ESTIMATORS),
    help="Estimator tag; repeatable. Defaults to all.",
)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--bootstrap-reps", type=int, default=1000, show_default=True)
@click.option(
    "--out-dir", type=click.Path(file_okay=False, path_type=Path), required=True,
)
def cmd_biodiv(
    populations: tuple[Path, ...], sizes: str, trials: int,
    estimators: tuple[str, ...], seed: int, bootstrap_reps: int, out_dir: Path,
) -> None:
    """Subsample census populations and rank estimators by Borda count."""
    try:
        size_list = [int(s) for s in sizes.split(",") if s.strip()]
    except ValueError as exc:
        raise click.BadParameter(str(exc), param_hint="--sizes") from exc
    if not size_list:
        raise click.BadParameter("at least one size is required", param_hint="--sizes")
    if trials < 1:
        raise click.BadParameter("trials must be >= 1", param_hint="--trials")

    started = time.monotonic()
    ids: list[str] = []
    parsed: list[tuple[str, SampleCounts]] = []
    try:
        for path in populations:
            pop_id = path.stem
            if pop_id in ids:
                pop_id = f"{path.stem}-{len(ids) + 1}"
            ids.append(pop_id)
            parsed.append((pop_id, parse_counts_file(path)))
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(3)

    all_summaries = []
    all_ballots = []
    try:
        for pop_id, counts in parsed:
            summaries, ballots = subsample_bench(
                counts, size_list, trials=trials, estimators=estimators,
                master_seed=seed, population_id=pop_id,
                bootstrap_reps=bootstrap_reps,
            )
            all_summaries.extend(summaries)
            all_ballots.extend(ballots)
        totals = borda(all_ballots)
        intervals = None
        if len(parsed) >= 2:
            intervals = borda_pivot(
                all_ballots, reps=bootstrap_reps,
                rng=derive_rng(seed, "biodiv", "borda", "pivot"),
            )
    except Exception as exc:
        click.echo(f"numeric failure: {exc}", err=True)
        sys.exit(4)

    out_dir.mkdir(parents=True, exist_ok=True)
    outputs: list[Path] = []

    summaries_path = out_dir / "summaries.csv"
    _write_csv(
        summaries_path,
        ["population", "n", "estimator", "trials", "truth", "rmse", "bias",
         "variance", "ci_low", "ci_high", "seed"],
        [[s.population, s.n, s.estimator, s.trials, s.truth, s.rmse, s.bias,
          s.variance, s.ci_low, s.ci_high, seed] for s in all_summaries],
    )
    outputs.append(summaries_path)

    ballots_path = out_dir / "ballots.csv"
    ballot_rows: list[list[object]] = []
    for ballot in all_ballots:
        total = sum(len(group) for group in ballot.ranking)
        remaining = total
        for rank, group in enumerate(ballot.ranking, start=1):
            remaining -= len(group)
            shared = remaining + (len(group) - 1) / 2.0
            for tag in group:
                ballot_rows.append(
                    [ballot.context[0], ballot.context[1], rank, tag, shared, seed]
                )
    _write_csv(
        ballots_path,
        ["population", "n", "rank", "estimator", "points", "seed"],
        ballot_rows,
    )
    outputs.append(ballots_path)

    borda_path = out_dir / "borda.json"
    doc: dict[str, object] = {
        "estimators": list(estimators),
        "totals": {tag: totals.get(tag, 0.0) for tag in estimators},
        "ballots": len(all_ballots),
        "populations": ids,
    }
    if intervals is not None:
        doc["pivot_ci"] = {
            tag: {"low": iv.low, "high": iv.high, "radius": iv.radius}
            for tag, iv in intervals.items()
        }
    borda_path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    outputs.append(borda_path)

    config_echo = {
        "populations": [str(p) for p in populations],
        "sizes": size_list,
        "trials": trials,
        "estimators": list(estimators),
        "bootstrap_reps": bootstrap_reps,
    }
    manifest = _write_manifest(
        out_dir, "biodiv", seed, config_echo, outputs, time.monotonic() - started
    )
    for path in [*outputs, manifest]:
        click.echo(f"wrote {path}")


@main.command("report")
@click.argument(
    "run_dir", type=click.Path(exists=True, file_okay=False, path_type=Path),
)
def cmd_report(run_dir: Path) -> None:
    """Render PNG figures from a finished run directory."""
    from .figures import render_report

    try:
        written = render_report(run_dir)
    except Exception as exc:
        click.echo(f"numeric failure: {exc}", err=True)
        sys.exit(4)
    if not written:
        click.echo(f"error: no benchmark outputs found in {run_dir}", err=True)
        sys.exit(3)
    for path in written:
        click.echo(f"wrote {path}")


if __name__ == "__main__":
    main()
