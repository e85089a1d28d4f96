"""Benchmark runner and CSV emission for the max-plus-quadratic experiment.

The benchmark minimizes F(x) = max_i x_i + (mu/2)||x||^2 over a Euclidean ball
of radius 10 ||x_*|| around the origin, where x_* = -(1/(mu n)) 1 is the known
minimizer, so optimality gaps are exact.  Runs write one CSV row per oracle
call; certificate columns are filled on scheduled iterations of the Vaidya
engine and left empty otherwise.

Config files are key=value lines with '#' comments; command-line flags
override file values.  Exit codes: 0 success, 2 config error, 3 engine
failure, 4 partial sweep failure.
"""

from __future__ import annotations

import argparse
import itertools
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import engines
from .geometry import EuclideanBall
from .oracle import make_benchmark_oracle

CSV_HEADER = "iter,oracle_calls,kind,f_best,eps_opt,d_tau,D_tau,eps_cert,two_over_d,wall_ms"
SWEEP_THRESHOLDS = (1e-1, 1e-2, 1e-3)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ENGINE = 3
EXIT_PARTIAL = 4


class ParseError(ValueError):
    """Malformed config input; message carries the line number and key."""


class ValidationError(ValueError):
    """Config values outside their allowed ranges."""


@dataclass(frozen=True)
class ExperimentConfig:
    method: str = "vaidya"
    n: int = 10
    mu: float = 0.1
    max_oracle_calls: int = 2000
    cert_every: int = 1
    lp_alpha: float = 0.5
    vaidya_eps: float = 5e-3
    vaidya_gamma: float = 1.0
    out: str = "run.csv"
    seed: int = 0  # reserved for randomized problem families


_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}
_INT_KEYS = {"n", "max_oracle_calls", "cert_every", "seed"}
_FLOAT_KEYS = {"mu", "lp_alpha", "vaidya_eps", "vaidya_gamma"}
_STR_KEYS = {"method", "out"}


def _convert(key: str, raw: str, line_no: int):
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
        return raw
    except ValueError as exc:
        raise ParseError(f"line {line_no}: bad value for {key!r}: {raw!r}") from exc


def parse_config_file(path) -> dict:
    """Read key=value lines (utf-8, '#' comments) into a raw config mapping."""
    values: dict = {}
    text = Path(path).read_text(encoding="utf-8")
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ParseError(f"line {line_no}: expected key=value, got {line!r}")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in _FIELD_TYPES:
            raise ParseError(f"line {line_no}: unknown key {key!r}")
        values[key] = _convert(key, raw, line_no)
    return values


def build_config(file_values: dict | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Merge file values and flag overrides over the defaults, then validate."""
    merged: dict = {}
    merged.update(file_values or {})
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
    cfg = ExperimentConfig(**merged)
    if cfg.method not in ("vaidya", "ellipsoid"):
        raise ValidationError(f"method must be vaidya or ellipsoid, got {cfg.method!r}")
    if cfg.n < 1:
        raise ValidationError(f"n must be >= 1, got {cfg.n}")
    if cfg.mu <= 0:
        raise ValidationError(f"mu must be positive, got {cfg.mu}")
    if cfg.max_oracle_calls < 0:
        raise ValidationError("max_oracle_calls must be nonnegative")
    if cfg.cert_every < 0:
        raise ValidationError("cert_every must be nonnegative")
    if not 0.0 <= cfg.lp_alpha < 1.0:
        raise ValidationError(f"lp_alpha must lie in [0, 1), got {cfg.lp_alpha}")
    if cfg.vaidya_eps <= 0 or cfg.vaidya_gamma <= 0:
        raise ValidationError("vaidya_eps and vaidya_gamma must be positive")
    return cfg


def benchmark_problem(cfg: ExperimentConfig):
    """Domain, oracle, and closed-form optimum for the benchmark objective."""
    x_star = -np.ones(cfg.n) / (cfg.mu * cfg.n)
    opt = -1.0 / (2.0 * cfg.mu * cfg.n)
    radius = 10.0 * float(np.linalg.norm(x_star))
    domain = EuclideanBall(np.zeros(cfg.n), radius)
    return domain, make_benchmark_oracle(cfg.mu), x_star, opt


def _format(x: float) -> str:
    return f"{x:.17g}"


def run_benchmark(cfg: ExperimentConfig, iteration_hook=None) -> Path:
    """Run one configuration and write its CSV; returns the output path."""
    domain, oracle_fn, _, opt = benchmark_problem(cfg)
    params = engines.VaidyaParams(drop_threshold=cfg.vaidya_eps,
                                  cut_depth=cfg.vaidya_gamma)
    cert_every = cfg.cert_every if cfg.method == "vaidya" else 0
    out = Path(cfg.out)
    lines = [
        "# eps_opt: gap of the certificate-induced point at certificate rows,",
        "#          gap of the best productive iterate otherwise",
        "# eps_cert: certificate residual over the initial localizer box",
        CSV_HEADER,
    ]
    status_note = None
    try:
        result = engines.run(cfg.method, domain, oracle_fn,
                             budget=cfg.max_oracle_calls,
                             cert_every=cert_every, lp_alpha=cfg.lp_alpha,
                             vaidya_params=params, iteration_hook=iteration_hook)
    except (engines.EngineStall, engines.DegenerateCut) as exc:
        lines.append(f"# error: {type(exc).__name__}: {exc}")
        out.write_text("\n".join(lines) + "\n", encoding="utf-8")
        raise

    mu = cfg.mu
    for rec in result.trace.records:
        f_best = "" if rec.best_value is None else _format(rec.best_value)
        eps_opt = "" if rec.best_value is None else _format(rec.best_value - opt)
        d_tau = big_d = eps_cert = two_over_d = ""
        snap = rec.snapshot
        if snap is not None and snap.diagnostics is not None:
            diag = snap.diagnostics
            induced_value = float(np.max(snap.induced_point)) \
                + 0.5 * mu * float(snap.induced_point @ snap.induced_point)
            eps_opt = _format(induced_value - opt)
            d_tau = _format(diag.d_tau)
            big_d = _format(diag.D_tau)
            eps_cert = _format(diag.eps_cert)
            two_over_d = _format(diag.two_over_d)
        lines.append(",".join([
            str(rec.iteration), str(rec.oracle_calls), rec.kind.value,
            f_best, eps_opt, d_tau, big_d, eps_cert, two_over_d,
            _format(rec.wall_ms),
        ]))
    if result.trace.engine_frozen_at is not None:
        status_note = (f"# note: localizer frozen at iteration "
                       f"{result.trace.engine_frozen_at} (numerical resolution reached)")
    if result.trace.termination == "zero_subgradient":
        status_note = "# note: zero subgradient; final point is optimal to oracle accuracy"
    if status_note:
        lines.append(status_note)
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return out


def read_csv_rows(path) -> list[dict]:
    """Parse a benchmark CSV back into row dictionaries (comments skipped)."""
    rows = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line or line.startswith("#") or line.startswith("iter,"):
            continue
        parts = line.split(",")
        rows.append(dict(zip(CSV_HEADER.split(","), parts)))
    return rows


def _calls_to_reach(rows: list[dict], column: str, threshold: float) -> int | None:
    for row in rows:
        raw = row[column]
        if raw and float(raw) <= threshold:
            return int(row["oracle_calls"])
    return None


def summarize_run(name: str, csv_path) -> dict:
    rows = read_csv_rows(csv_path)
    summary = {"run": name, "status": "ok", "rows": len(rows)}
    for threshold in SWEEP_THRESHOLDS:
        opt_hit = _calls_to_reach(rows, "eps_opt", threshold)
        cert_hit = _calls_to_reach(rows, "eps_cert", threshold)
        summary[f"eps_opt<={threshold:g}"] = "-" if opt_hit is None else str(opt_hit)
        summary[f"eps_cert<={threshold:g}"] = "-" if cert_hit is None else str(cert_hit)
    return summary


def parse_grid_file(path) -> list[ExperimentConfig]:
    """Grid files use the config syntax with comma-separated value lists;
    the cartesian product over list-valued keys defines the runs."""
    lists: dict[str, list] = {}
    text = Path(path).read_text(encoding="utf-8")
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ParseError(f"line {line_no}: expected key=value, got {line!r}")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in _FIELD_TYPES:
            raise ParseError(f"line {line_no}: unknown key {key!r}")
        lists[key] = [_convert(key, item.strip(), line_no) for item in raw.split(",")]
    keys = list(lists)
    configs = []
    for combo in itertools.product(*(lists[k] for k in keys)):
        configs.append(build_config(dict(zip(keys, combo))))
    return configs


def _run_name(cfg: ExperimentConfig) -> str:
    return f"{cfg.method}_n{cfg.n}_mu{cfg.mu:g}"


def run_sweep(configs: list[ExperimentConfig], jobs: int, out_dir) -> tuple[list[dict], list[str]]:
    """Run configurations concurrently; returns (summaries, failure messages)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    summaries: list[dict] = []
    failures: list[str] = []

    def one(cfg: ExperimentConfig) -> dict:
        name = _run_name(cfg)
        target = replace(cfg, out=str(out_dir / f"{name}.csv"))
        run_benchmark(target)
        return summarize_run(name, target.out)

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        future_by_name = {_run_name(cfg): pool.submit(one, cfg) for cfg in configs}
        for name, future in future_by_name.items():
            try:
                summaries.append(future.result())
            except Exception as exc:
                failures.append(f"{name}: {type(exc).__name__}: {exc}")
                summaries.append({"run": name, "status": "failed"})

    _write_summary(out_dir / "summary.txt", summaries, failures)
    return summaries, failures


def _write_summary(path: Path, summaries: list[dict], failures: list[str]) -> None:
    columns = ["run", "status"]
    for threshold in SWEEP_THRESHOLDS:
        columns += [f"eps_opt<={threshold:g}", f"eps_cert<={threshold:g}"]
    lines = ["\t".join(columns)]
    for summary in summaries:
        lines.append("\t".join(str(summary.get(col, "-")) for col in columns))
    for failure in failures:
        lines.append(f"# failed: {failure}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_plotscript(in_dir, out_file) -> Path:
    """Emit a gnuplot script plotting eps_opt / eps_cert against oracle calls."""
    in_dir = Path(in_dir)
    out_file = Path(out_file)
    csvs = sorted(in_dir.glob("*.csv"))
    lines = [
        "set datafile separator ','",
        "set logscale y",
        "set xlabel 'oracle calls'",
        "set ylabel 'gap / residual'",
        "set key outside",
        "set terminal pngcairo size 1200,800",
    ]
    for csv in csvs:
        stem = csv.stem
        lines.append(f"set output '{stem}.png'")
        lines.append(
            f"plot '{csv.name}' using 2:5 with lines title '{stem} eps_opt', \\\n"
            f"     '{csv.name}' using 2:8 with points title '{stem} eps_cert'"
        )
    out_file.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return out_file


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=str, default=None)
    parser.add_argument("--method", type=str, default=None)
    parser.add_argument("--n", type=int, default=None)
    parser.add_argument("--mu", type=float, default=None)
    parser.add_argument("--max-oracle-calls", dest="max_oracle_calls", type=int, default=None)
    parser.add_argument("--cert-every", dest="cert_every", type=int, default=None)
    parser.add_argument("--lp-alpha", dest="lp_alpha", type=float, default=None)
    parser.add_argument("--vaidya-eps", dest="vaidya_eps", type=float, default=None)
    parser.add_argument("--vaidya-gamma", dest="vaidya_gamma", type=float, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", type=str, default=None)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="cutcert",
                                     description="cutting-plane benchmark runner")
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run one benchmark configuration")
    _add_run_flags(run_p)
    sweep_p = sub.add_parser("sweep", help="run a grid of configurations")
    sweep_p.add_argument("--grid", type=str, required=True)
    sweep_p.add_argument("--jobs", type=int, default=1)
    sweep_p.add_argument("--out-dir", dest="out_dir", type=str, required=True)
    plot_p = sub.add_parser("plotscript", help="emit a gnuplot script for sweep output")
    plot_p.add_argument("--in", dest="in_dir", type=str, required=True)
    plot_p.add_argument("--out", dest="out_file", type=str, required=True)
    args = parser.parse_args(argv)

    if args.command == "run":
        try:
            file_values = parse_config_file(args.config) if args.config else {}
            overrides = {key: getattr(args, key) for key in _FIELD_TYPES}
            cfg = build_config(file_values, overrides)
        except (ParseError, ValidationError, OSError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        try:
            path = run_benchmark(cfg)
        except (engines.EngineStall, engines.DegenerateCut) as exc:
            print(f"engine failure: {exc}", file=sys.stderr)
            return EXIT_ENGINE
        print(path)
        return EXIT_OK

    if args.command == "sweep":
        try:
            configs = parse_grid_file(args.grid)
        except (ParseError, ValidationError, OSError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        started = time.perf_counter()
        summaries, failures = run_sweep(configs, args.jobs, args.out_dir)
        print(Path(args.out_dir) / "summary.txt")
        print(f"{len(summaries) - len(failures)}/{len(summaries)} runs succeeded "
              f"in {time.perf_counter() - started:.1f}s")
        for failure in failures:
            print(f"failed: {failure}", file=sys.stderr)
        return EXIT_PARTIAL if failures else EXIT_OK

    try:
        print(write_plotscript(args.in_dir, args.out_file))
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


def cli_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    cli_entry()
