"""Command-line experiment runner.

Subcommands ``learn``, ``scaling``, ``decompose`` and ``discrete-learn``
each read a JSON config, run seeded trials and write CSV plus JSON outputs
into ``--out-dir``. Exit codes: 0 success, 2 config or IO error, 3 target
not log-concave, 4 any other library error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .discrete import (
    DiscretePmf,
    continuize_sampler,
    discretize,
    make_discrete_target,
    tv_distance_pmf,
)
from .empirical import make_rng
from .errors import NotLogConcaveDetected, PolyDensityError
from .learner import learn_mixture, learn_piecewise_poly
from .poly import tv_distance_density
from .zoo import approximate_gaussian, decompose_log_concave, target_from_spec

CSV_HEADER = ("seed", "m", "tv_error", "tau", "wall_ms")


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the field."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass
class TrialResult:
    seed: int
    m: int
    tv_error: float
    tau: float
    wall_ms: float
    hypothesis_path: str

    def row(self) -> list:
        return [self.seed, self.m, repr(float(self.tv_error)), repr(float(self.tau)), repr(float(self.wall_ms))]


# ----------------------------------------------------------------------------
# Config validation
# ----------------------------------------------------------------------------


def _require(cfg: dict, key: str, where: str = ""):
    if key not in cfg:
        raise ConfigError(where + key, "missing")
    return cfg[key]


def _int_field(value, field: str, minimum: int) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
        raise ConfigError(field, f"must be an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(field, f"must be >= {minimum}, got {value!r}")
    return int(value)


def _epsilon(value, field: str, upper: float = 0.5) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not 0 < value < upper:
        raise ConfigError(field, f"must lie in (0, {upper}), got {value!r}")
    return float(value)


def validate_learner(cfg: dict) -> dict:
    learner = _require(cfg, "learner")
    if not isinstance(learner, dict):
        raise ConfigError("learner", "must be an object")
    out = {
        "t": _int_field(learner.get("t", 1), "learner.t", 1),
        "d": _int_field(learner.get("d", 0), "learner.d", 0),
        "k": _int_field(learner.get("k", 1), "learner.k", 1),
        "epsilon": _epsilon(_require(learner, "epsilon", "learner."), "learner.epsilon"),
    }
    if "m" in learner and learner["m"] is not None:
        out["m"] = _int_field(learner["m"], "learner.m", 1)
    if "domain" in learner and learner["domain"] is not None:
        dom = learner["domain"]
        if not (isinstance(dom, list) and len(dom) == 2 and dom[0] < dom[1]):
            raise ConfigError("learner.domain", "must be [lo, hi] with lo < hi")
        out["domain"] = (float(dom[0]), float(dom[1]))
    return out


def validate_common(cfg: dict, args) -> dict:
    trials = args.trials if args.trials is not None else cfg.get("trials", 1)
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    return {
        "trials": _int_field(trials, "trials", 1),
        "seed": _int_field(seed, "seed", 0),
    }


def _load_target(cfg: dict):
    spec = _require(cfg, "target")
    if not isinstance(spec, dict):
        raise ConfigError("target", "must be an object")
    try:
        return target_from_spec(spec)
    except PolyDensityError as exc:
        raise ConfigError("target", str(exc)) from exc


# ----------------------------------------------------------------------------
# Trials
# ----------------------------------------------------------------------------


def _learn_trial(task):
    target_spec, learner, seed, m_override, timing = task
    target = target_from_spec(target_spec)
    domain = learner.get("domain", target.domain)
    if not all(np.isfinite(domain)):
        raise ConfigError("learner.domain", "required for unbounded targets")
    m = m_override if m_override is not None else learner.get("m")
    start = time.perf_counter()
    fit = learn_mixture(
        target.sampler, learner["k"], learner["t"], learner["d"], learner["epsilon"], make_rng(seed),
        domain=domain, m=m, full_output=True,
    )
    wall = (time.perf_counter() - start) * 1e3 if timing else 0.0
    tv = min(max(tv_distance_density(fit.hypothesis, target), 0.0), 1.0)
    return fit, tv, wall


def _map(func, tasks, jobs: int):
    if jobs <= 1 or len(tasks) <= 1:
        return [func(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, tasks))


def _write_csv(path: Path, results: list[TrialResult]):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in results:
        writer.writerow(r.row())
    path.write_text(buf.getvalue())


def _dump_json(path: Path, obj):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=False) + "\n")


def _run_trials(cfg, learner, common, out_dir: Path, jobs: int, timing: bool, m=None, tag=""):
    seeds = [common["seed"] + i for i in range(common["trials"])]
    tasks = [(cfg["target"], learner, s, m, timing) for s in seeds]
    outputs = _map(_learn_trial, tasks, jobs)
    results = []
    for idx, (seed, (fit, tv, wall)) in enumerate(zip(seeds, outputs)):
        name = f"trial_{tag}{idx:03d}.json"
        hyp_path = out_dir / "hypotheses" / name
        _dump_json(hyp_path, fit.hypothesis.to_dict())
        report = {
            "config": {"target": cfg["target"], "learner": learner},
            "seed": seed,
            "wall_time_ms": wall,
            "tv_error": tv,
            **fit.report(),
        }
        report["config"]["learner"] = {k: (list(v) if isinstance(v, tuple) else v) for k, v in learner.items()}
        _dump_json(out_dir / "reports" / name, report)
        results.append(TrialResult(seed, fit.m, tv, fit.tau, wall, str(hyp_path)))
    return results


def run_learn(cfg: dict, args) -> list[TrialResult]:
    learner = validate_learner(cfg)
    common = validate_common(cfg, args)
    _load_target(cfg)
    out_dir = _out_dir(cfg, args)
    results = _run_trials(cfg, learner, common, out_dir, _jobs(args), not args.no_timing)
    _write_csv(out_dir / "results.csv", results)
    return results


def loglog_slope(ms, medians) -> float:
    """Least-squares slope of ``log(median)`` against ``log(m)``; NaN if a median is below 1e-6."""
    med = np.asarray(medians, dtype=float)
    if np.any(~np.isfinite(med)) or np.any(med < 1e-6):
        return float("nan")
    slope, _ = np.polyfit(np.log(np.asarray(ms, dtype=float)), np.log(med), 1)
    return float(slope)


def run_scaling(cfg: dict, args):
    learner = validate_learner(cfg)
    common = validate_common(cfg, args)
    sizes = _require(cfg, "sample_sizes")
    if not isinstance(sizes, list) or len(sizes) < 3:
        raise ConfigError("sample_sizes", "need at least 3 sample sizes")
    sizes = [_int_field(v, "sample_sizes", 1) for v in sizes]
    if any(b <= a for a, b in zip(sizes[:-1], sizes[1:])):
        raise ConfigError("sample_sizes", "must be strictly increasing")
    _load_target(cfg)
    out_dir = _out_dir(cfg, args)
    timing = not args.no_timing
    all_results, medians = [], []
    for m in sizes:
        res = _run_trials(cfg, learner, common, out_dir, _jobs(args), timing, m=m, tag=f"m{m}_")
        all_results.extend(res)
        medians.append(float(np.median([r.tv_error for r in res])))
    slope = loglog_slope(sizes, medians)
    _write_csv(out_dir / "results.csv", all_results)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["m", "median_tv_error"])
    for m, med in zip(sizes, medians):
        writer.writerow([m, repr(med)])
    writer.writerow(["slope", repr(slope)])
    (out_dir / "summary.csv").write_text(buf.getvalue())
    return all_results, medians, slope


def run_decompose(cfg: dict, args) -> dict:
    target = _load_target(cfg)
    mode = _require(cfg, "mode")
    if mode not in ("logconcave", "gaussian"):
        raise ConfigError("mode", f"must be 'logconcave' or 'gaussian', got {mode!r}")
    eps = _epsilon(_require(cfg, "epsilon"), "epsilon", 0.3 if mode == "gaussian" else 1.0)
    if mode == "gaussian":
        spec = cfg["target"]
        if spec.get("kind") != "truncated_gaussian":
            raise ConfigError("target.kind", "gaussian mode needs a truncated_gaussian target")
        params = spec.get("params", {})
        h = approximate_gaussian(float(params.get("mu", 0.0)), float(params.get("sigma", 1.0)), eps)
    else:
        h = decompose_log_concave(target, eps)
    tv = tv_distance_density(h, target)
    out_dir = _out_dir(cfg, args)
    _dump_json(out_dir / "hypothesis.json", h.to_dict())
    report = {"mode": mode, "epsilon": eps, "pieces": h.num_pieces, "degree": h.degree, "tv": tv}
    _dump_json(out_dir / "report.json", report)
    return report


def _discrete_trial(task):
    pmf_json, learner, seed, timing = task
    pmf = DiscretePmf.from_json(pmf_json)
    start = time.perf_counter()
    cont = continuize_sampler(pmf.sampler(), pmf.N)
    fit = learn_piecewise_poly(
        cont, learner["k"] * learner["t"], 0, learner["epsilon"], make_rng(seed),
        domain=(-1.0, 1.0), m=learner.get("m"), full_output=True,
    )
    wall = (time.perf_counter() - start) * 1e3 if timing else 0.0
    learned = discretize(fit.hypothesis, pmf.N)
    return fit, learned, tv_distance_pmf(learned, pmf), wall


def _load_pmf(cfg: dict) -> DiscretePmf:
    spec = _require(cfg, "pmf")
    N = _int_field(_require(spec, "N", "pmf."), "pmf.N", 1)
    try:
        if "masses" in spec:
            return DiscretePmf(N, np.asarray(spec["masses"], dtype=float))
        kind = _require(spec, "kind", "pmf.")
        return make_discrete_target(kind, spec.get("params"), N)
    except PolyDensityError as exc:
        raise ConfigError("pmf", str(exc)) from exc


def run_discrete_learn(cfg: dict, args) -> list[TrialResult]:
    learner = validate_learner(cfg)
    common = validate_common(cfg, args)
    pmf = _load_pmf(cfg)
    out_dir = _out_dir(cfg, args)
    seeds = [common["seed"] + i for i in range(common["trials"])]
    tasks = [(pmf.to_json(), learner, s, not args.no_timing) for s in seeds]
    outputs = _map(_discrete_trial, tasks, _jobs(args))
    results = []
    for idx, (seed, (fit, learned, tv, wall)) in enumerate(zip(seeds, outputs)):
        path = out_dir / "hypotheses" / f"trial_{idx:03d}.json"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(learned.to_json() + "\n")
        _dump_json(out_dir / "reports" / f"trial_{idx:03d}.json", {"seed": seed, "tv_error": tv, **fit.report()})
        results.append(TrialResult(seed, fit.m, tv, fit.tau, wall, str(path)))
    _write_csv(out_dir / "results.csv", results)
    return results


# ----------------------------------------------------------------------------
# Entry point
# ----------------------------------------------------------------------------


def _out_dir(cfg: dict, args) -> Path:
    out = args.out_dir or cfg.get("output") or "results"
    path = Path(out)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError("output", f"cannot create {path}: {exc}") from exc
    return path


def _jobs(args) -> int:
    if os.environ.get("POLYDENSITY_FP_STRICT") == "1":
        return 1
    return max(1, int(args.jobs))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polydensity", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("learn", "learn a target repeatedly and record TV errors"),
        ("scaling", "sweep sample sizes and fit a log-log slope"),
        ("decompose", "build a structural approximation of a target"),
        ("discrete-learn", "learn a pmf on the 2N-point grid"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True, help="JSON experiment config")
        p.add_argument("--seed", type=int, default=None, help="base seed (trial i uses seed + i)")
        p.add_argument("--out-dir", default=None, help="output directory")
        p.add_argument("--trials", type=int, default=None, help="number of trials")
        p.add_argument("--jobs", type=int, default=1, help="worker processes")
        p.add_argument("--no-timing", action="store_true", help="write wall_ms = 0 for byte-stable output")
    return parser


_COMMANDS = {
    "learn": run_learn,
    "scaling": run_scaling,
    "decompose": run_decompose,
    "discrete-learn": run_discrete_learn,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise ConfigError("config", f"cannot read {args.config}: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON: {exc.msg}") from exc
        if not isinstance(cfg, dict):
            raise ConfigError("config", "top level must be an object")
        out = _COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"polydensity: config error: {exc}", file=sys.stderr)
        return 2
    except NotLogConcaveDetected as exc:
        print(f"polydensity: not log-concave: {exc}", file=sys.stderr)
        return 3
    except PolyDensityError as exc:
        print(f"polydensity: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"polydensity: IO error: {exc}", file=sys.stderr)
        return 2
    if args.command == "scaling":
        print(f"slope {out[2]!r}")
    elif args.command == "decompose":
        print(f"pieces {out['pieces']} tv {out['tv']!r}")
    else:
        ok = sum(r.tv_error <= 0.1 for r in out)
        print(f"{len(out)} trials, {ok} with tv_error <= 0.1")
    return 0


if __name__ == "__main__":
    sys.exit(main())
