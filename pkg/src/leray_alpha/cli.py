"""Command-line front end for simulations and verification suites.

Exit codes: 0 success, 1 configuration or usage error, 2 blow-up detected,
3 parameters not admissible (or a verification row failed).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import subprocess
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, checkpoint
from .besov import (
    EMBEDDINGS,
    BesovParams,
    EmbeddingPair,
    HypothesisError,
    build_filter_bank,
    norm_sweep,
    sweep_to_csv,
    verify_embeddings,
    verify_product_est_chemin,
    verify_product_est_standard,
)
from .fields import random_coeffs
from .multipliers import (
    check_kernel_condition,
    check_mikhlin,
    verify_semigroup_lp_lq,
    verify_sobolev_smoothing,
)
from .reports import EstimateReport, fmt, reports_to_csv, reports_to_json
from .solver import (
    ConfigError,
    SolverConfig,
    check_admissibility,
    global_criterion_monitor,
    integrate,
    make_initial_data,
    monitor_X_norm,
    smoothing_diagnostic,
)
from .solver.admissibility import params_from_config, uses_log_variant
from .solver.integrate import DIAGNOSTIC_COLUMNS
from .solver.monitors import growth_ratio
from .spectral import W_VARIANTS
from .symbols import registered_g

EXIT_OK, EXIT_CONFIG, EXIT_BLOWUP, EXIT_REJECTED = 0, 1, 2, 3
SUITES = ("semigroup", "sobolev", "kernel", "mikhlin", "products", "embeddings", "global", "smoothing")
G_FAMILIES = ("constant_one", "log_half", "power", "mikhlin_custom")


def _index(v) -> float:
    return math.inf if v == "inf" else float(v)


def thread_cap() -> int:
    """Worker count for sweeps, from LERAY_THREADS (default 1)."""
    raw = os.environ.get("LERAY_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def version_string() -> str:
    """``git describe`` of the source tree when available, else the package version."""
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


@dataclass
class RunManifest:
    """Completion marker: written last, lists every output of the command."""

    command: str
    config_path: str | None
    out_dir: str
    version: str = field(default_factory=version_string)
    timings: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)
    exit_code: int = 0

    def add(self, path: Path) -> Path:
        self.outputs.append(Path(path).name)
        return path

    def write(self) -> Path:
        path = Path(self.out_dir) / "manifest.json"
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n")
        tmp.replace(path)
        return path


class _Timer:
    def __init__(self, timings: dict, name: str):
        self.timings, self.name = timings, name

    def __enter__(self):
        self.t0 = time.perf_counter()

    def __exit__(self, *exc):
        self.timings[self.name] = round(time.perf_counter() - self.t0, 6)


def _write_rows(path: Path, header, rows) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def _load_config(path, seed=None) -> SolverConfig:
    if path is None:
        raise ConfigError("$", "--config is required")
    cfg = SolverConfig.load(path)
    return cfg.replace(seed=seed) if seed is not None else cfg


def _initial(cfg: SolverConfig):
    params = {k: v for k, v in cfg.initial.items() if k != "kind"}
    return make_initial_data(cfg.initial.get("kind", "random_divfree"), cfg.grid, params, cfg.seed)


# --------------------------------------------------------------------------
# simulate


def cmd_simulate(config_path, out_dir, seed=None) -> int:
    cfg = _load_config(config_path, seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    man = RunManifest("simulate", str(config_path), str(out))
    (out / "config.json").write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n")
    man.add(out / "config.json")

    with _Timer(man.timings, "integrate"):
        traj = integrate(_initial(cfg), cfg)
    man.add(_write_rows(out / "trajectory.csv", DIAGNOSTIC_COLUMNS, traj.rows()))

    every = cfg.checkpoint_every
    for step, u in zip(traj.steps, traj.fields):
        if every and step and step % every == 0:
            man.add(checkpoint.save(u, out / f"checkpoint_{step:08d}.lrac"))
    man.add(checkpoint.save(traj.final, out / "final.lrac"))

    summary = {"blew_up": traj.blew_up, "message": traj.message, "t_final": traj.times[-1], "samples": len(traj)}
    with _Timer(man.timings, "monitors"):
        xn = monitor_X_norm(traj)
        summary["X_norm"] = asdict(xn)
        summary["growth_ratio_H_s1"] = growth_ratio(traj)
    summary = json.loads(json.dumps(summary, default=float))
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    man.add(out / "summary.json")

    if cfg.rate_checks:
        with _Timer(man.timings, "rate_checks"):
            rep = verify_semigroup_lp_lq(cfg.L1, cfg.grid, 2, math.inf)
        reports_to_csv([rep], out / "rate_checks.csv")
        man.add(out / "rate_checks.csv")

    code = EXIT_BLOWUP if traj.blew_up else EXIT_OK
    if traj.blew_up:
        print(f"blow-up detected: {traj.message}", file=sys.stderr)
    else:
        print(f"finished t={traj.times[-1]:.6g}, {len(traj)} samples, X-norm {xn.total:.6g}")
    man.exit_code = code
    man.write()
    return code


# --------------------------------------------------------------------------
# check-params


def cmd_check_params(config_path, variant="A", out_dir=None) -> int:
    cfg = _load_config(config_path)
    res = check_admissibility(params_from_config(cfg), variant, log_variant=uses_log_variant(cfg))
    print(res.table())
    code = EXIT_OK if res.admissible else EXIT_REJECTED
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        man = RunManifest("check-params", str(config_path), str(out), exit_code=code)
        (out / "admissibility.json").write_text(json.dumps(res.to_dict(), indent=2, sort_keys=True) + "\n")
        man.add(out / "admissibility.json")
        man.write()
    return code


# --------------------------------------------------------------------------
# verify


def _rejected(check: str, params: dict, exc: HypothesisError) -> EstimateReport:
    return EstimateReport(
        check, params, f"rejected:{exc.failed}", False, math.nan, details={"rejected": exc.failed, "reason": str(exc)}
    )


def _scalar_samples(cfg: SolverConfig, count: int, sigma: float, offset: int = 0):
    rng = np.random.default_rng(cfg.seed + offset)
    return [random_coeffs(cfg.grid, sigma, rng) for _ in range(count)]


def _suite_semigroup(cfg, opts):
    p, q = _index(opts.get("p", cfg.p)), _index(opts.get("q", cfg.q))
    gammas = opts.get("gammas", [cfg.L1.gamma])

    def job(gamma):
        s = registered_g(cfg.L1.g_id, cfg.L1.params, gamma=gamma)
        return [verify_semigroup_lp_lq(s, cfg.grid, p, q)]

    return [(job, g) for g in gammas]


def _suite_sobolev(cfg, opts):
    tuples = opts.get("tuples", [[cfg.s1, cfg.s2, cfg.L1.gamma]])

    def job(t):
        s1, s2, gamma = t
        s = registered_g(cfg.L1.g_id, cfg.L1.params, gamma=gamma)
        return [verify_sobolev_smoothing(s, cfg.grid, s1, s2)]

    return [(job, t) for t in tuples]


def _suite_kernel(cfg, opts):
    return [(lambda s: [check_kernel_condition(s, n=cfg.n)], cfg.L1)]


def _suite_mikhlin(cfg, opts):
    k_max = int(opts.get("k_max", cfg.n + 1))
    return [(lambda s: [check_mikhlin(s, k_max)], s) for s in (cfg.L1, cfg.L2)]


def _suite_products(cfg, opts):
    count = int(opts.get("pairs", 20))
    sigma = float(opts.get("sigma", 2.5))
    f = _scalar_samples(cfg, count, sigma, 1)
    g = _scalar_samples(cfg, count, sigma, 2)
    pairs = list(zip(f, g))
    bank = build_filter_bank(cfg.grid)
    standard = opts.get("standard", [{"s": 1.0, "p": 2, "q": 2, "split": ["inf", 2, 2, "inf"]}])
    chemin = opts.get("chemin", [{"s1": 0.5, "s2": 0.5, "p1": 2, "p2": 2, "p": 2, "q": 2}])

    def job_standard(t):
        args = (float(t["s"]), _index(t["p"]), _index(t["q"]), [_index(v) for v in t["split"]])
        try:
            return [verify_product_est_standard(pairs, *args, bank)]
        except HypothesisError as exc:
            return [_rejected("product_est_standard", t, exc)]

    def job_chemin(t):
        keys = ("s1", "s2", "p1", "p2", "p", "q")
        vals = [float(t[k]) if k in ("s1", "s2") else _index(t[k]) for k in keys]
        try:
            return [verify_product_est_chemin(pairs, *vals, bank)]
        except HypothesisError as exc:
            return [_rejected("product_est_chemin", t, exc)]

    return [(job_standard, t) for t in standard] + [(job_chemin, t) for t in chemin]


def _default_embeddings(n: int):
    half = n * (1 / 2 - 1 / 4)
    return [
        {"kind": "regularity", "lhs": [0.5, 2, "inf"], "rhs": [1.0, 2, 2]},
        {"kind": "integrability", "lhs": [0.0, 4, 2], "rhs": [half, 2, 2]},
        {"kind": "sobolev", "lhs": [0.5, 2, 2], "rhs": [1.0, 2, 2]},
        {"kind": "hilbert", "lhs": [1.0, 2, 2], "rhs": [1.0, 2, 2]},
    ]


def _suite_embeddings(cfg, opts):
    samples = _scalar_samples(cfg, int(opts.get("samples", 10)), float(opts.get("sigma", 2.5)), 3)
    bank = build_filter_bank(cfg.grid)
    specs = opts.get("pairs", _default_embeddings(cfg.n))

    def job(spec):
        if spec["kind"] not in EMBEDDINGS:
            raise ConfigError("$.verify.embeddings.pairs", f"unknown embedding kind {spec['kind']!r}")
        lhs, rhs = (BesovParams(float(v[0]), _index(v[1]), _index(v[2])) for v in (spec["lhs"], spec["rhs"]))
        try:
            return verify_embeddings(samples, [EmbeddingPair(spec["kind"], lhs, rhs)], bank)
        except HypothesisError as exc:
            return [_rejected("embedding", spec, exc)]

    return [(job, s) for s in specs]


def _suite_global(cfg, opts):
    def job(_):
        verdict = global_criterion_monitor(cfg, float(opts.get("R_max", 1e8)))
        rep = verdict.integral
        rep.details["verdict"] = verdict.verdict
        rep.details["exponent_sum"] = verdict.exponent_sum
        rep.details["advisories"] = verdict.advisories
        return [rep]

    return [(job, None)]


def _suite_smoothing(cfg, opts):
    r_list = opts.get("r", [cfg.s1 + 0.5 * i for i in range(5)])

    def job(_):
        traj = integrate(_initial(cfg), cfg)
        rows = smoothing_diagnostic(traj, r_list)
        out = []
        for row in rows:
            finite = math.isfinite(row.sup) and not traj.blew_up
            out.append(
                EstimateReport(
                    "smoothing",
                    {"r": row.r, "s1": cfg.s1, "gamma1": cfg.L1.gamma, "N": cfg.N},
                    cfg.initial.get("kind", "random_divfree"),
                    finite,
                    math.nan,
                    constant=row.sup,
                    exponent=row.exponent,
                    details={"t_at_sup": row.t_at_sup, "exponent_alt": row.exponent_alt, "sup_alt": row.sup_alt},
                )
            )
        return out

    return [(job, None)]


_SUITE_BUILDERS = {
    "semigroup": _suite_semigroup,
    "sobolev": _suite_sobolev,
    "kernel": _suite_kernel,
    "mikhlin": _suite_mikhlin,
    "products": _suite_products,
    "embeddings": _suite_embeddings,
    "global": _suite_global,
    "smoothing": _suite_smoothing,
}


def run_suite(suite: str, cfg: SolverConfig) -> list[EstimateReport]:
    """All rows of one suite; tuples run on up to LERAY_THREADS workers, results kept in input order."""
    if suite not in _SUITE_BUILDERS:
        raise ConfigError("--suite", f"unknown suite {suite!r}; expected one of {', '.join(SUITES)}")
    jobs = _SUITE_BUILDERS[suite](cfg, cfg.verify.get(suite, {}))
    with ThreadPoolExecutor(max_workers=thread_cap()) as pool:
        results = list(pool.map(lambda jp: jp[0](jp[1]), jobs))
    return [r for rs in results for r in rs]


def cmd_verify(suite, config_path, out_dir, seed=None) -> int:
    if suite not in _SUITE_BUILDERS:
        raise ConfigError("--suite", f"unknown suite {suite!r}; expected one of {', '.join(SUITES)}")
    cfg = _load_config(config_path, seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    man = RunManifest(f"verify {suite}", str(config_path), str(out))
    with _Timer(man.timings, suite):
        reports = run_suite(suite, cfg)
    reports_to_csv(reports, out / f"verify_{suite}.csv")
    reports_to_json(reports, out / f"verify_{suite}.json")
    man.add(out / f"verify_{suite}.csv")
    man.add(out / f"verify_{suite}.json")
    failed = 0
    for r in reports:
        if r.details.get("rejected"):
            print(f"{r.check}: REJECTED ({r.details['rejected']})")
            continue
        print(r.summary())
        failed += not r.passed
    code = EXIT_OK if failed == 0 else EXIT_REJECTED
    man.exit_code = code
    man.write()
    return code


# --------------------------------------------------------------------------
# besov-norm and info


def cmd_besov_norm(config_path, out_dir=None, field_path=None, seed=None) -> int:
    """Besov norms of a checkpointed field (or of the configured initial data)."""
    cfg = _load_config(config_path, seed)
    u = checkpoint.load(field_path) if field_path else _initial(cfg)
    opts = cfg.verify.get("besov_norm", {})
    params = [BesovParams(float(v[0]), _index(v[1]), _index(v[2])) for v in opts.get("params", [])] or [
        BesovParams(cfg.s1, cfg.p, cfg.q),
        BesovParams(cfg.s2, cfg.p, cfg.q),
    ]
    rows = norm_sweep([u], params, build_filter_bank(u.grid))
    text = sweep_to_csv(rows)
    print(text, end="")
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        man = RunManifest("besov-norm", str(config_path), str(out))
        (out / "besov_norms.csv").write_text(text)
        man.add(out / "besov_norms.csv")
        man.write()
    return EXIT_OK


def cmd_info() -> int:
    print(f"leray-alpha {version_string()}")
    print(f"g families: {', '.join(G_FAMILIES)}")
    print(f"W variants: {', '.join(W_VARIANTS)}")
    print(f"verify suites: {', '.join(SUITES)}")
    print(f"trajectory columns: {', '.join(DIAGNOSTIC_COLUMNS)}")
    print(f"threads (LERAY_THREADS): {thread_cap()}")
    print("exit codes: 0 ok, 1 config error, 2 blow-up, 3 not admissible / failed check")
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="leray-alpha", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="integrate a configuration and write the trajectory")
    sim.add_argument("--config", required=True)
    sim.add_argument("--out", default="out")
    sim.add_argument("--seed", type=int)

    chk = sub.add_parser("check-params", help="print the admissibility table")
    chk.add_argument("--config", required=True)
    chk.add_argument("--variant", choices=("A", "B"), default="A")
    chk.add_argument("--out")

    ver = sub.add_parser("verify", help="run a verification suite")
    ver.add_argument("--suite", required=True, help=", ".join(SUITES))
    ver.add_argument("--config", required=True)
    ver.add_argument("--out", default="out")
    ver.add_argument("--seed", type=int)

    bn = sub.add_parser("besov-norm", help="Besov norms of a checkpoint or the initial data")
    bn.add_argument("--config", required=True)
    bn.add_argument("--field", help="checkpoint file; default is the configured initial data")
    bn.add_argument("--out")
    bn.add_argument("--seed", type=int)

    sub.add_parser("info", help="version and registered names")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return cmd_simulate(args.config, args.out, args.seed)
        if args.command == "check-params":
            return cmd_check_params(args.config, args.variant, args.out)
        if args.command == "verify":
            return cmd_verify(args.suite, args.config, args.out, args.seed)
        if args.command == "besov-norm":
            return cmd_besov_norm(args.config, args.out, args.field, args.seed)
        return cmd_info()
    except ConfigError as exc:
        print(f"config error at {exc.path}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
