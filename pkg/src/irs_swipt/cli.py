"""Experiment runner: single solves, distance sweeps, trade-off sweeps and
the verification suites.

Exit codes: 0 success, 2 configuration error, 3 infeasible instance.
"""

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .baselines import SchemeId, eig_g_scheme, eig_hd_scheme, separate_beams_scheme
from .channel import ExperimentConfig, config_from_dict, load_config, sample_channels
from .swipt import InfeasibleError, result_record, solve_p1
from .verify import SUITES, run_suite
from .wpt import solve_p2

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3

# wall times stay off the CSV so repeated runs are byte-identical; they are
# still available on the ResultRow objects run_sweep returns
CSV_HEADER = ("scheme,value,mean_sum_power_w,mean_sum_power_dbm,std_sum_power_w,"
              "trials,feasible_fraction,mean_iterations")


@dataclass
class SweepSpec:
    variable: str                    # "ap_irs_distance" | "sinr_target_db"
    values: list
    trials: int = 100
    schemes: list = field(default_factory=list)
    output_path: str = "sweep.csv"

    def __post_init__(self):
        if self.variable not in ("ap_irs_distance", "sinr_target_db"):
            raise ValueError(f"unknown sweep variable {self.variable!r}")
        if not len(self.values):
            raise ValueError("sweep needs at least one value")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


@dataclass
class ResultRow:
    scheme: str
    value: float
    mean_w: float
    mean_dbm: float
    std_w: float
    trials: int
    feasible_fraction: float
    mean_iterations: float
    mean_wall_time: float

    def csv(self):
        return (f"{self.scheme},{self.value:.10g},{self.mean_w:.10e},"
                f"{self.mean_dbm:.10e},{self.std_w:.10e},{self.trials},"
                f"{self.feasible_fraction:.10g},{self.mean_iterations:.10g}")


def _apply_sweep_value(cfg, variable, value):
    if variable == "ap_irs_distance":
        if value <= cfg.d_irs_ehr + 1.0:
            raise ValueError(
                f"ap_irs_distance {value} must exceed d_irs_ehr + 1 = {cfg.d_irs_ehr + 1}")
        return replace(cfg, d_ap_irs=float(value))
    return replace(cfg, gamma=float(10.0 ** (value / 10.0)))


def _trial(cfg_dict, variable, value, scheme_name, seed):
    """One Monte-Carlo trial; returns (objective, feasible, iterations, wall)."""
    cfg = config_from_dict(cfg_dict)
    cfg = _apply_sweep_value(cfg, variable, value)
    scheme = SchemeId(scheme_name)
    t0 = time.perf_counter()
    try:
        if cfg.k_i == 0:
            ch = sample_channels(cfg, np.random.default_rng(seed))
            if scheme == SchemeId.Proposed:
                res = solve_p2(ch, cfg)
            elif scheme == SchemeId.EigG:
                res = eig_g_scheme(ch, cfg)
            elif scheme == SchemeId.EigHd:
                res = eig_hd_scheme(ch, cfg, use_irs=True)
            elif scheme == SchemeId.NoIrs:
                res = eig_hd_scheme(ch, cfg, use_irs=False)
            else:
                raise ValueError(f"scheme {scheme_name} needs information receivers")
            return res.objective, True, res.iteration, time.perf_counter() - t0
        if scheme == SchemeId.NoIrs:
            cfg = replace(cfg, n=0)
        ch = sample_channels(cfg, np.random.default_rng(seed))
        if scheme in (SchemeId.Proposed, SchemeId.NoIrs):
            res = solve_p1(ch, cfg, np.random.default_rng([seed, 777]))
            return res.objective, True, res.iterations, time.perf_counter() - t0
        if scheme == SchemeId.SeparateBeams:
            res = separate_beams_scheme(ch, cfg)
            if not res.feasible:
                return np.nan, False, 0, time.perf_counter() - t0
            return res.objective, True, 1, time.perf_counter() - t0
        raise ValueError(f"scheme {scheme_name} not available with K_I >= 1")
    except InfeasibleError:
        return np.nan, False, 0, time.perf_counter() - t0


def run_sweep(spec: SweepSpec, cfg: ExperimentConfig, base_seed=0, threads=1):
    """One ResultRow per (scheme, value); per-trial seed is base_seed XOR the
    trial index, so output is identical for any thread count."""
    cfg_dict = cfg.to_dict()
    jobs = []
    for scheme in spec.schemes:
        name = scheme.value if isinstance(scheme, SchemeId) else str(scheme)
        for value in spec.values:
            for t in range(spec.trials):
                jobs.append((cfg_dict, spec.variable, float(value), name,
                             base_seed ^ t))
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(_trial_star, jobs, chunksize=4))
    else:
        outcomes = [_trial_star(j) for j in jobs]

    rows = []
    idx = 0
    for scheme in spec.schemes:
        name = scheme.value if isinstance(scheme, SchemeId) else str(scheme)
        for value in spec.values:
            chunk = outcomes[idx:idx + spec.trials]
            idx += spec.trials
            objs = np.array([c[0] for c in chunk])
            feas = np.array([c[1] for c in chunk])
            good = objs[feas]
            mean_w = float(np.mean(good)) if len(good) else float("nan")
            std_w = float(np.std(good)) if len(good) else float("nan")
            mean_dbm = (10.0 * np.log10(mean_w) + 30.0
                        if len(good) and mean_w > 0 else float("nan"))
            rows.append(ResultRow(
                scheme=name, value=float(value), mean_w=mean_w,
                mean_dbm=mean_dbm, std_w=std_w, trials=spec.trials,
                feasible_fraction=float(np.mean(feas)),
                mean_iterations=float(np.mean([c[2] for c in chunk])),
                mean_wall_time=float(np.mean([c[3] for c in chunk]))))
    return rows


def _trial_star(args):
    return _trial(*args)


def write_csv(rows, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for row in rows:
            fh.write(row.csv() + "\n")


def run_single(cfg: ExperimentConfig, seed, scheme: SchemeId):
    """One realization, one scheme; returns the JSON-ready result record."""
    if cfg.k_i == 0 or scheme in (SchemeId.EigG, SchemeId.EigHd):
        ch = sample_channels(cfg, np.random.default_rng(seed))
        if scheme == SchemeId.Proposed:
            res = solve_p2(ch, cfg)
        elif scheme == SchemeId.EigG:
            res = eig_g_scheme(ch, cfg)
        elif scheme in (SchemeId.EigHd, SchemeId.NoIrs):
            res = eig_hd_scheme(ch, cfg, use_irs=scheme == SchemeId.EigHd)
        else:
            raise ValueError("separate_beams needs information receivers")
        return {
            "config": cfg.to_dict(),
            "scheme": scheme.value,
            "objective_w": res.objective,
            "trace_w": [float(t) for t in res.trace],
            "iterations": res.iteration,
            "theta": [float(t) for t in res.phases.theta],
            "converged": res.converged,
        }
    if scheme == SchemeId.NoIrs:
        cfg = replace(cfg, n=0)
    ch = sample_channels(cfg, np.random.default_rng(seed))
    if scheme == SchemeId.SeparateBeams:
        res = separate_beams_scheme(ch, cfg)
        if not res.feasible:
            raise InfeasibleError("separate-beams stage 1 exceeds the power budget")
        return {
            "config": cfg.to_dict(),
            "scheme": scheme.value,
            "objective_w": res.objective,
            "min_power_w": res.min_power,
            "nulling_residual": res.nulling_residual,
            "theta": [float(t) for t in res.phases.theta],
        }
    res = solve_p1(ch, cfg, np.random.default_rng([seed, 777]))
    rec = result_record(cfg, res)
    rec["scheme"] = scheme.value
    return rec


def run_verify(suite):
    """Print one pass/fail line per property; True when all pass."""
    if suite not in SUITES:
        print(f"unknown suite {suite!r}; available: {', '.join(SUITES)}")
        return False
    all_ok = True
    for name, ok, detail in run_suite(suite):
        tag = "PASS" if ok else "FAIL"
        line = f"[{tag}] {suite}: {name}"
        if detail:
            line += f" ({detail})"
        print(line)
        all_ok = all_ok and ok
    return all_ok


class _ConfigError(Exception):
    pass


def _add_common(sp):
    sp.add_argument("--config", help="path to a flat JSON config file")
    sp.add_argument("--seed", type=int, default=1, help="base RNG seed")
    sp.add_argument("--out", help="output path")


def _load(args, **overrides):
    try:
        return load_config(args.config) if args.config else ExperimentConfig(**overrides)
    except (OSError, ValueError, json.JSONDecodeError, TypeError) as exc:
        raise _ConfigError(str(exc)) from exc


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="irs-swipt",
        description="IRS-aided SWIPT harvested-power optimization experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("single", help="solve one realization")
    _add_common(sp)
    sp.add_argument("--scheme", default="proposed",
                    choices=[s.value for s in SchemeId])

    sp = sub.add_parser("wpt-sweep", help="sum power vs AP-IRS distance")
    _add_common(sp)
    sp.add_argument("--values", default="5,10,15,20,25,30,35,40,45,50",
                    help="comma-separated AP-IRS distances in meters")
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--schemes", default="proposed,eig_g,eig_hd,no_irs")

    sp = sub.add_parser("swipt-tradeoff", help="sum power vs SINR target")
    _add_common(sp)
    sp.add_argument("--values", default="0,5,10,15,20",
                    help="comma-separated SINR targets in dB")
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--schemes", default="proposed,separate_beams,no_irs")

    sp = sub.add_parser("verify", help="run a property suite")
    sp.add_argument("suite", choices=list(SUITES) + ["all"])

    args = parser.parse_args(argv)

    if args.command == "verify":
        suites = SUITES if args.suite == "all" else [args.suite]
        ok = all([run_verify(s) for s in suites])
        return EXIT_OK if ok else 1

    try:
        if args.command == "single":
            cfg = _load(args)
            try:
                record = run_single(cfg, args.seed, SchemeId(args.scheme))
            except InfeasibleError as exc:
                print(f"infeasible: {exc}", file=sys.stderr)
                return EXIT_INFEASIBLE
            text = json.dumps(record, indent=2)
            if args.out:
                with open(args.out, "w", encoding="utf-8") as fh:
                    fh.write(text + "\n")
            else:
                print(text)
            return EXIT_OK

        # sweeps
        values = [float(v) for v in args.values.split(",") if v.strip()]
        schemes = [SchemeId(s.strip()) for s in args.schemes.split(",") if s.strip()]
        if args.command == "wpt-sweep":
            cfg = _load(args, k_i=0, k_e=4, d_irs_ehr=2.0, d_ap_irs=max(values))
            variable = "ap_irs_distance"
            default_out = "wpt_sweep.csv"
        else:
            cfg = _load(args)
            variable = "sinr_target_db"
            default_out = "swipt_tradeoff.csv"
        spec = SweepSpec(variable=variable, values=values, trials=args.trials,
                         schemes=schemes, output_path=args.out or default_out)
        rows = run_sweep(spec, cfg, base_seed=args.seed, threads=args.threads)
    except (_ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    write_csv(rows, spec.output_path)
    print(f"wrote {spec.output_path} ({len(rows)} rows)")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
