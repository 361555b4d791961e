"""Command-line entry point: the one interface users script against.

Commands: simulate | exact | ocean-demo | chain-sweep | llt-report | beta-fit.
Each takes --config PATH plus optional --seed, --out, --threads overrides
(WALKLAB_THREADS is the env fallback).  Exit codes: 0 success, 2
config/validation error, 3 resource budget exceeded — nothing else.
"""

from __future__ import annotations

import argparse
import sys
from itertools import product as iproduct
from pathlib import Path

import numpy as np

from . import backends, statlab
from .birkhoff import ocean_event_check
from .chains import ThreeStateChain, chain_sweep
from .config import RunConfig, load_config
from .engine import path_trial, resolve_threads
from .errors import BudgetError, ConfigError
from .kernels import llt_report as kernel_llt_report
from .moments import (MomentPlan, enumerate_moments, exact_pair_moment,
                      exact_second_moment, variance_exponent_scan)
from .observables import beta_fit as run_beta_fit
from .reports import VERSION, write_csv, write_json


def _checkpoints_from(section) -> list:
    spec = section.get("checkpoints")
    if spec is None:
        raise ConfigError("simulate needs `checkpoints` (a list or {start, stop, ratio})")
    if isinstance(spec, dict):
        return statlab.geometric_checkpoints(int(spec["start"]), int(spec["stop"]),
                                             float(spec.get("ratio", 1.25)))
    return [int(c) for c in spec]


def _summary_base(cfg: RunConfig, law=None, obs=None) -> dict:
    out = {"version": VERSION, "command": cfg.command, "config": cfg.hash,
           "seed": cfg.seed, "backend": backends.active_name()}
    if law is not None:
        out["law"] = law.descriptor()
    if obs is not None:
        out["observable"] = obs.descriptor()
    return out


def cmd_simulate(cfg: RunConfig, out_dir: Path, threads: int) -> dict:
    law = cfg.law()
    obs = cfg.observable(law)
    sec = cfg.section()
    trials = int(sec.get("trials", 100))
    checkpoints = _checkpoints_from(sec)
    analysis = sec.get("analysis", {})
    ens = statlab.run_ensemble(law, obs, cfg.seed, trials, checkpoints,
                               threads=threads, x0=sec.get("x0"))

    rows = []
    for trial in range(trials):
        t_vals, s_vals = ens.records[trial]
        for j, n in enumerate(checkpoints):
            rows.append([trial, n, float(t_vals[j])] + [int(c) for c in np.atleast_1d(s_vals[j])])
    cols = ["trial", "n", "T"] + [f"S_{j + 1}" for j in range(law.d)]
    write_csv(out_dir / "ensemble.csv", cols, rows, meta=cfg.meta())

    summary = _summary_base(cfg, law, obs)
    summary["trials"] = trials
    summary["checkpoints"] = checkpoints
    t = ens.t_matrix()
    summary["per_checkpoint"] = [
        {"n": int(n), "mean": float(t[:, j].mean()),
         "rms": float(np.sqrt((t[:, j] ** 2).mean())),
         "se": float(t[:, j].std(ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0}
        for j, n in enumerate(checkpoints)]
    if len(checkpoints) >= 3:
        fit = statlab.growth_exponent(ens, analysis.get("growth_statistic", "rms"),
                                      q=float(analysis.get("quantile", 0.9)))
        summary["growth"] = {"statistic": fit.statistic, "slope": fit.fit.slope,
                             "intercept": fit.fit.intercept, "slope_se": fit.fit.slope_se,
                             "table": [[int(n), s, se] for n, s, se in fit.table]}
        if "slope_band" in analysis:
            lo, hi = analysis["slope_band"]
            summary["growth"]["band"] = [lo, hi]
            summary["growth"]["in_band"] = bool(lo <= fit.fit.slope <= hi)
    if analysis.get("arcsine"):
        n_last = checkpoints[-1]
        reduced = statlab.affine_reduce(obs, n_last, t[:, -1])
        summary["arcsine"] = {
            "n": int(n_last),
            "ks_distance": statlab.ks_distance(reduced, statlab.ArcsineLaw.cdf),
            "tolerance_basis": "empirical",
        }
    deltas = analysis.get("weak_lln_deltas")
    if deltas:
        summary["weak_lln"] = [
            {"n": n, "delta": d, "freq": f, "se": se}
            for (n, d, f, se) in statlab.weak_lln_check(ens, obs.nominal_mean, deltas)]
    write_json(out_dir / "summary.json", summary)
    return summary


def cmd_exact(cfg: RunConfig, out_dir: Path, threads: int) -> dict:
    law = cfg.law()
    obs = cfg.observable(law)
    sec = cfg.section()
    horizon = int(sec.get("horizon", 6))
    tol = float(cfg.tolerances().get("kernel_trunc", 1e-9))
    plan = MomentPlan(law, obs, horizon, x0=sec.get("x0"), trunc_tol=tol)
    n_grid = [int(n) for n in sec.get("n_grid", [])] or None
    rows = exact_second_moment(plan, n_grid or [horizon])
    write_csv(out_dir / "moments.csv", ["N", "mean", "second", "var"],
              [[r["N"], r["mean"], r["second"], r["var"]] for r in rows], meta=cfg.meta())

    summary = _summary_base(cfg, law, obs)
    summary["horizon"] = horizon
    pairs = [tuple(int(c) for c in p) for p in sec.get("pairs", [])]
    if pairs:
        prows = [[a, b, exact_pair_moment(plan, a, b)] for a, b in pairs]
        write_csv(out_dir / "pair_moments.csv", ["n1", "n2", "E"], prows, meta=cfg.meta())
    oracle_max = int(sec.get("oracle_max", 0))
    if oracle_max:
        n_chk = min(horizon, oracle_max)
        oracle = enumerate_moments(law, obs, n_chk, x0=plan.x0, pairs=pairs)
        got = exact_second_moment(plan, list(range(1, n_chk + 1)))
        ok = all(abs(g["mean"] - oracle["mean"][g["N"] - 1]) < 1e-12
                 and abs(g["second"] - oracle["second"][g["N"] - 1]) < 1e-12
                 for g in got)
        for a, b in pairs:
            if b <= n_chk:
                ok = ok and abs(exact_pair_moment(plan, a, b) - oracle["pairs"][(a, b)]) < 1e-12
        summary["oracle_match"] = bool(ok)
        summary["oracle_horizon"] = n_chk
    if sec.get("scan") and n_grid:
        scan = variance_exponent_scan(plan, n_grid)
        summary["variance_scan"] = {"slope": scan.slope, "intercept": scan.intercept,
                                    "degenerate": scan.degenerate,
                                    "rows": [[int(n), v] for n, v in scan.rows]}
    write_json(out_dir / "summary.json", summary)
    return summary


def cmd_ocean_demo(cfg: RunConfig, out_dir: Path, threads: int) -> dict:
    law = cfg.law()
    obs = cfg.observable(law)
    if obs.kind != "ocean":
        raise ConfigError("ocean-demo needs an observable of kind `ocean`")
    sched = obs.schedule
    sec = cfg.section()
    blocks = int(sec.get("blocks", 48))
    trace_blocks = int(sec.get("trace_blocks", 1200))
    alpha = float(obs.params["alpha"])

    sched.extend_to(blocks + 1)
    srows = [[n, sched.a_n(n), sched.b_n(n), sched.c2_n(n), sched.t_n(n, alpha),
              sched.half_width(n)] for n in range(1, blocks + 1)]
    write_csv(out_dir / "schedule.csv", ["n", "a_n", "b_n", "c2_n", "t_n", "half_width"],
              srows, meta=cfg.meta())

    trows = [[n, b, m] for (n, b, m) in sched.trace(trace_blocks)]
    write_csv(out_dir / "trace.csv", ["n", "b_n", "mean_0_bn"], trows, meta=cfg.meta())

    erows = []
    all_ok = True
    for n in [int(x) for x in sec.get("event_n_list", [1, 2, 3])]:
        t = sched.t_n(n, alpha)
        if 3 * t > 10**7:
            raise BudgetError(f"event horizon 3 t_{n} = {3 * t} exceeds the demo budget")
        pos, _, _, _ = path_trial(law, int(sec.get("walk_seed", cfg.seed)), n, 3 * t, obs=obs)
        chk = ocean_event_check(obs, sched, n, pos, alpha=alpha)
        if chk["event"] and chk["implication"] is False:
            all_ok = False
        erows.append([n, chk["t_n"], chk["event"],
                      "" if chk["implication"] is None else chk["implication"], chk["T_3t"]])
    write_csv(out_dir / "events.csv", ["n", "t_n", "event", "implication", "T_3t"],
              erows, meta=cfg.meta())

    summary = _summary_base(cfg, law, obs)
    summary["schedule"] = {"blocks": blocks,
                           "dyadic_holds_from": sched.dyadic_holds_from(blocks),
                           "chain_ok": True}
    summary["trace"] = {"blocks": trace_blocks,
                        "oscillation_settled_at": sched.oscillation_settled(trace_blocks),
                        "final_mean": trows[-1][2]}
    summary["events"] = {"rows": len(erows), "implications_ok": all_ok}
    write_json(out_dir / "summary.json", summary)
    return summary


def _chains_from(sec) -> list:
    chains = []
    for row in sec.get("explicit", []):
        if len(row) != 9:
            raise ConfigError("explicit chain rows are (p1,q1,eta1,q2,p2,eta2,pi1,pi2,pi3)")
        p1, q1, e1, q2, p2, e2, pi1, pi2, pi3 = [float(v) for v in row]
        chains.append(ThreeStateChain(p1, q1, e1, q2, p2, e2, (pi1, pi2, pi3)))
    grid = sec.get("grid")
    if grid:
        axes = {k: [float(v) for v in grid.get(k, [0.0])]
                for k in ("p1", "q1", "q2", "p2", "pi1", "pi2")}
        for p1, q1, q2, p2, pi1, pi2 in iproduct(*(axes[k] for k in
                                                   ("p1", "q1", "q2", "p2", "pi1", "pi2"))):
            e1, e2, pi3 = 1 - p1 - q1, 1 - q2 - p2, 1 - pi1 - pi2
            if min(e1, e2, pi3) < -1e-12:
                continue  # infeasible grid cell, skipped (counted below)
            chains.append(ThreeStateChain(p1, q1, max(e1, 0.0), q2, p2, max(e2, 0.0),
                                          (pi1, pi2, max(pi3, 0.0))))
    if not chains:
        raise ConfigError("chain-sweep needs `explicit` rows or a `grid`")
    return chains


def cmd_chain_sweep(cfg: RunConfig, out_dir: Path, threads: int) -> dict:
    sec = cfg.section()
    chains = _chains_from(sec)
    rows, max_ratio = chain_sweep(chains, delta=float(sec.get("delta", 0.1)),
                                  mc_every=int(sec.get("mc_every", 0)),
                                  mc_trials=int(sec.get("mc_trials", 10**5)),
                                  seed=cfg.seed)
    csv_rows = []
    for r in rows:
        c = r["chain"]
        csv_rows.append([c.p1, c.q1, c.eta1, c.q2, c.p2, c.eta2, c.pi[0], c.pi[1],
                         r["cov"], r["bracket"], r["ratio"], r["flagged"]])
    write_csv(out_dir / "sweep.csv",
              ["p1", "q1", "eta1", "q2", "p2", "eta2", "pi1", "pi2",
               "cov", "bracket", "ratio", "flagged"], csv_rows, meta=cfg.meta())
    summary = _summary_base(cfg)
    summary["cells"] = len(rows)
    summary["max_ratio"] = max_ratio
    summary["flagged_rows"] = int(sum(r["flagged"] for r in rows))
    summary["delta"] = float(sec.get("delta", 0.1))
    summary["mc_checked"] = int(sum(1 for r in rows if r.get("mc_checked")))
    write_json(out_dir / "summary.json", summary)
    return summary


def cmd_llt_report(cfg: RunConfig, out_dir: Path, threads: int) -> dict:
    law = cfg.law()
    sec = cfg.section()
    n_list = [int(n) for n in sec.get("n_list", [100, 400])]
    tol = float(cfg.tolerances().get("kernel_trunc", 1e-9))
    rows = kernel_llt_report(law, n_list, trunc_tol=tol)
    write_csv(out_dir / "llt.csv", ["n", "sup_error", "window", "truncated_mass"],
              [list(r) for r in rows], meta=cfg.meta())
    summary = _summary_base(cfg, law)
    summary["rows"] = [[int(n), e] for n, e, _, _ in rows]
    summary["decreasing"] = bool(rows[-1][1] < rows[0][1]) if len(rows) >= 2 else None
    write_json(out_dir / "summary.json", summary)
    return summary


def cmd_beta_fit(cfg: RunConfig, out_dir: Path, threads: int) -> dict:
    law = cfg.law() if "law" in cfg.semantic else None
    obs = cfg.observable(law)
    sec = cfg.section()
    f_bar = sec.get("f_bar", obs.nominal_mean)
    if f_bar is None:
        raise ConfigError("beta-fit needs `f_bar` (observable has no nominal mean)")
    fit = run_beta_fit(obs, float(f_bar), float(sec.get("gamma", 1.0)),
                       [int(L) for L in sec["L_list"]],
                       z_samples=int(sec.get("z_samples", 64)),
                       box_a=sec.get("box_a"), box_b=sec.get("box_b"), seed=cfg.seed)
    write_csv(out_dir / "beta_fit.csv", ["L", "max_dev", "samples"],
              [list(r) for r in fit.table], meta=cfg.meta())
    summary = _summary_base(cfg, obs=obs)
    summary["beta_hat"] = fit.beta_hat
    summary["c_hat"] = fit.c_hat
    summary["degenerate"] = fit.degenerate
    summary["zero_rows_dropped"] = fit.zero_rows_dropped
    write_json(out_dir / "summary.json", summary)
    return summary


_COMMANDS = {
    "simulate": cmd_simulate,
    "exact": cmd_exact,
    "ocean-demo": cmd_ocean_demo,
    "chain-sweep": cmd_chain_sweep,
    "llt-report": cmd_llt_report,
    "beta-fit": cmd_beta_fit,
}
_CFG_NAMES = {"ocean-demo": "ocean_demo", "chain-sweep": "chain_sweep",
              "llt-report": "llt_report", "beta-fit": "beta_fit"}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="walklab",
                                     description="lattice random-walk laboratory")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--threads", type=int, default=None)
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, _CFG_NAMES.get(args.command, args.command),
                          seed_override=args.seed, threads=args.threads, out=args.out)
        threads = resolve_threads(cfg.threads)
        out_dir = Path(cfg.out or "walklab-run")
        out_dir.mkdir(parents=True, exist_ok=True)
        _COMMANDS[args.command](cfg, out_dir, threads)
    except ConfigError as e:
        print(f"walklab: config error: {e}", file=sys.stderr)
        return 2
    except BudgetError as e:
        print(f"walklab: budget exceeded: {e}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
