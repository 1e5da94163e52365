"""Config-driven experiment runner.

One JSON config describes one experiment; outputs are a manifest, a verdicts
document and CSV files, all deterministic given the config and seed.

    lab run --config cfg.json [--out-dir DIR] [--seed N]
    lab validate --config cfg.json
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import scipy

from . import __version__, arithmetic, cocycle, hamiltonian, specialflow
from .errors import LabError

EXPERIMENTS = ("one-hole-rigidity", "two-hole-weak-mixing",
               "half-cover-corollary", "am-pipeline")


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _angle(value):
    """Angles in configs: numbers stay floats, strings parse as fractions."""
    if isinstance(value, str):
        return Fraction(value)
    return value


def _build_cf(cfg: dict) -> arithmetic.ContinuedFraction:
    spec = cfg.get("cf")
    if spec is None:
        raise LabError("config needs a 'cf' object with partial_quotients")
    pq = spec["partial_quotients"]
    depth = spec.get("depth", len(pq))
    return arithmetic.build_cf(pq[:depth])


def validate(cfg: dict) -> list:
    """Dry-run precondition checks; returns diagnostics, runs nothing."""
    diags = []

    def err(msg):
        diags.append({"level": "error", "message": msg})

    def warn(msg):
        diags.append({"level": "warning", "message": msg})

    exp = cfg.get("experiment")
    if exp not in EXPERIMENTS:
        err(f"unknown experiment {exp!r}; choose one of {EXPERIMENTS}")
        return diags
    try:
        cf = _build_cf(cfg)
    except (LabError, KeyError, TypeError, ValueError) as e:
        err(f"invalid cf spec: {e}")
        return diags

    if exp in ("two-hole-weak-mixing", "half-cover-corollary"):
        eps = cfg.get("epsilon")
        if eps is None or not 0 < float(eps) < 1:
            err(f"epsilon must lie in (0,1), got {eps}")
        beta = _angle(cfg.get("beta", "1/2"))
        try:
            report = arithmetic.general_position(cf, beta)
            if report.verdict != arithmetic.VERDICT_HOLDS:
                warn(
                    f"general position of beta={beta} not supported at depth "
                    f"{cf.depth}: ||q_n beta|| tail max {report.tail_max:.2e} "
                    f"(verdict {report.verdict}); the weak-mixing construction "
                    f"needs ||q_n beta|| bounded away from 0"
                )
        except LabError as e:
            err(f"cannot evaluate general position: {e}")
        n_max = max(cfg.get("N_schedule", [10**5]))
        if cf.max_orbit_index() < n_max:
            err(
                f"insufficient depth: cf certifies orbit indices up to "
                f"{cf.max_orbit_index()}, schedule needs {n_max}"
            )
    if exp == "one-hole-rigidity":
        jumps = cfg.get("jumps", {})
        try:
            J = cocycle.JumpSequence.geometric(
                C=_angle(jumps.get("C", "1/4")),
                Delta=_angle(jumps.get("Delta", "1/2")),
                K_jump=jumps.get("K_jump", 60),
                mean=jumps.get("mean", 1.0))
            if not float(J.mean) > 2 * J.sigma().abs_sum():
                err("jump-BV ceiling positivity not certified: "
                    "mean <= 2*sum|sigma|")
        except LabError as e:
            err(f"invalid jump sequence: {e}")
        n_max = max(cfg.get("N_schedule", [10**5]))
        if cf.max_orbit_index() < n_max:
            err(f"insufficient depth for N = {n_max}")
    if exp == "am-pipeline":
        eps = cfg.get("epsilon", 0.01)
        if not 0 <= float(eps) < 1:
            err(f"perturbation strength must be small and nonnegative, got {eps}")
        for t in cfg.get("targets", ["1/2", "2/3", "3/5", "5/8"]):
            f = Fraction(t)
            if not 0 < f < 1:
                err(f"rotation target {t} outside (0,1)")
            if f.denominator > 10**4:
                err(f"rotation target {t} has q > 1e4")
        se = cfg.get("step_epsilon", 0.25)
        if not 0 < float(se) < 1:
            err(f"step_epsilon must lie in (0,1), got {se}")
    return diags


def _scan_to_outputs(scan, out, ops, prefix="scan"):
    _write_csv(out / f"{prefix}.csv", ["lambda", "N", "x_index", "magnitude"],
               scan.csv_rows())
    return scan.to_dict()


def run_one_hole_rigidity(cfg, cf, out, seed, ops):
    jumps = cfg.get("jumps", {})
    J = cocycle.JumpSequence.geometric(
        C=_angle(jumps.get("C", "1/4")), Delta=_angle(jumps.get("Delta", "1/2")),
        K_jump=jumps.get("K_jump", 60), mean=jumps.get("mean", 1.0))
    ops += ["JumpSequence.geometric", "sigma_from_jumps", "birkhoff_spread",
            "eigenvalue_scan", "eigenfunction_integral"]
    spread = cocycle.birkhoff_spread(
        J, cf, m_max=cfg.get("m_max", 10**4), grid_size=cfg.get("grid_size", 100))
    _write_csv(out / "spread.csv", ["m", "spread_m", "bound"], spread.csv_rows())

    ceiling = specialflow.JumpBVCeiling(J, cf)
    lam = cfg.get("lambda", 2 * math.pi / float(J.mean))
    Ns = tuple(cfg.get("N_schedule", [10**3, 10**4, 10**5]))
    scan = specialflow.eigenvalue_scan(
        cf, ceiling, lambda_grid=np.array([lam]), N_schedule=Ns,
        x_samples=cfg.get("x_samples", 5), seed=seed)
    oracle = cocycle.eigenfunction_integral(J, cf, lam,
                                            n=cfg.get("oracle_n", 1 << 16))
    weyl_final = scan.reports[0].magnitudes[-1]
    verdict = {
        "experiment": "one-hole-rigidity",
        "spread": {"measured": spread.spread,
                   "two_sigma_bound": 2 * spread.sigma_abs_sum,
                   "weighted_bound": 2 * spread.bound,
                   "bounded": spread.spread <= 2 * spread.sigma_abs_sum + 1e-8},
        "eigenvalue": {"lambda": lam, "magnitudes": scan.reports[0].magnitudes,
                       "oracle": oracle,
                       "oracle_gap": abs(weyl_final - oracle),
                       "evidence": scan.reports[0].verdict},
        "verdict": ("bounded-spread + eigenvalue-evidence"
                    if spread.spread <= 2 * spread.sigma_abs_sum + 1e-8
                    and scan.reports[0].verdict == specialflow.EIGENVALUE_EVIDENCE
                    and abs(weyl_final - oracle) < 0.02
                    else "inconclusive"),
    }
    _scan_to_outputs(scan, out, ops, prefix="weyl")
    return verdict


def _weak_mixing_scan(cfg, cf, out, seed, ops, beta):
    eps = float(cfg["epsilon"])
    ceiling = specialflow.make_step_ceiling(eps, beta)
    grid = specialflow.default_lambda_grid(
        ceiling, count=cfg.get("lambda_count", 400),
        lam_max=cfg.get("lambda_max", 8 * math.pi),
        suspect_count=cfg.get("suspect_count", 20))
    Ns = tuple(cfg.get("N_schedule", [10**3, 10**4, 10**5]))
    ops += ["make_step_ceiling", "default_lambda_grid", "eigenvalue_scan",
            "eigenvalue_exclusion", "search_reciprocal_relation",
            "general_position"]
    scan = specialflow.eigenvalue_scan(
        cf, ceiling, lambda_grid=grid, N_schedule=Ns,
        x_samples=cfg.get("x_samples", 5),
        theta_decay=cfg.get("theta_decay", 0.2),
        theta_eig=cfg.get("theta_eig", 0.6), seed=seed)
    exclusion_sound = True
    excluded = 0
    for r in scan.reports:
        ex = specialflow.eigenvalue_exclusion(
            eps, cf, r.lam, bound=cfg.get("relation_bound", 50))
        if ex.status == specialflow.EXCLUDED_BY_STEP_LEMMA:
            excluded += 1
            if r.verdict == specialflow.EIGENVALUE_EVIDENCE:
                exclusion_sound = False
    relation = arithmetic.search_reciprocal_relation(
        eps, cf, cfg.get("relation_bound", 50))
    gp = arithmetic.general_position(cf, beta)
    _write_csv(out / "norms.csv", ["n", "q_n", "norm_qn_alpha", "norm_qn_beta"],
               gp.csv_rows())
    scan_dict = _scan_to_outputs(scan, out, ops)
    return {
        "ceiling": ceiling.describe(),
        "general_position": gp.to_dict(),
        "reciprocal_relation": relation.to_dict(),
        "scan": scan_dict,
        "exclusion": {"excluded_count": excluded,
                      "sound": exclusion_sound},
        "verdict": scan.verdict if exclusion_sound else "exclusion-violated",
    }


def run_two_hole_weak_mixing(cfg, cf, out, seed, ops):
    beta = _angle(cfg.get("beta", "1/2"))
    verdict = _weak_mixing_scan(cfg, cf, out, seed, ops, beta)
    verdict["experiment"] = "two-hole-weak-mixing"
    return verdict


def run_half_cover_corollary(cfg, cf, out, seed, ops):
    ops.append("parity_certificate")
    cert = arithmetic.parity_certificate(cf)
    _write_csv(out / "parity.csv", ["n", "q_n", "odd"],
               ((n, cf.q[n], n in set(cert)) for n in range(cf.depth + 1)))
    verdict = _weak_mixing_scan(cfg, cf, out, seed, ops, Fraction(1, 2))
    verdict["experiment"] = "half-cover-corollary"
    verdict["parity_certificate"] = {"odd_indices": cert,
                                     "count": len(cert),
                                     "depth": cf.depth}
    return verdict


def run_am_pipeline(cfg, cf, out, seed, ops):
    eps = float(cfg.get("epsilon", 0.01))
    kick = hamiltonian.builtin_kick(cfg.get("kick_c", 0.3))
    sys_h = hamiltonian.HamiltonianSystem(kick, epsilon=eps)
    ops += ["builtin_kick", "twist_check", "jacobian_determinant",
            "am_minimize", "rotation_residual", "am_cantor_approx",
            "gap_decay_fit", "reparam_ceiling"]
    r_lo, r_hi = cfg.get("r_range", [0.3, 0.9])
    tw = hamiltonian.twist_check(sys_h, (r_lo, r_hi),
                                 tuple(cfg.get("twist_grid", [10, 10])))
    _write_csv(out / "twist.csv", ["i", "j", "dtheta_dr"],
               ((i, j, tw.slopes[i, j]) for i in range(tw.slopes.shape[0])
                for j in range(tw.slopes.shape[1])))
    det = hamiltonian.jacobian_determinant(sys_h, 0.2, (r_lo + r_hi) / 2)

    orbit_rows = []
    orbits = {}
    for t in cfg.get("targets", ["1/2", "2/3", "3/5", "5/8"]):
        conf = hamiltonian.am_minimize(sys_h, Fraction(t), seed=seed)
        resid = hamiltonian.rotation_residual(sys_h, conf)
        orbits[t] = {"gradient_norm": conf.gradient_norm,
                     "monotone": conf.monotone,
                     "action": conf.action,
                     "rotation_residual": resid}
        for i, (th, r) in enumerate(conf.points()):
            orbit_rows.append((t, i, th, r))
    _write_csv(out / "orbits.csv", ["target", "i", "theta", "r"], orbit_rows)

    n_levels = cfg.get("n_levels", 5)
    cloud = hamiltonian.am_cantor_approx(sys_h, cf, n_levels, seed=seed)
    _write_csv(out / "cloud.csv", ["theta", "r"],
               ((th, r) for th, r in cloud.points))

    from .denjoy import gap_decay_fit
    fit = None
    if len(cloud.gap_iterates) >= 10:
        try:
            fit = gap_decay_fit(cloud.gap_iterates)
        except LabError:
            fit = None

    se = float(cfg.get("step_epsilon", 0.25))
    split = (Fraction(0), Fraction(1, 2))
    two_level = hamiltonian.TwoLevelTimeChange(split, 1 / (1 - se), 1 / (1 + se))
    sys_tc = hamiltonian.HamiltonianSystem(kick, epsilon=0.0, phi=two_level)
    psi_in = hamiltonian.reparam_ceiling(sys_tc, 0.2, 0.01)
    psi_out = hamiltonian.reparam_ceiling(sys_tc, 0.7, 0.01)
    sys_one = hamiltonian.HamiltonianSystem(
        kick, epsilon=eps, phi=hamiltonian.TrigPoly.constant(1.0))
    psi_one = hamiltonian.reparam_ceiling(sys_one, 0.2, (r_lo + r_hi) / 2)
    _write_csv(out / "ceiling.csv", ["theta", "psi"],
               [(0.2, psi_in), (0.7, psi_out)])

    ok = (tw.verdict == "monotone-twist" and abs(det - 1) < 1e-8
          and all(o["monotone"] and o["rotation_residual"] < 1e-6
                  for o in orbits.values())
          and abs(psi_one - 1) < 1e-9
          and abs(psi_in - (1 - se)) < 1e-9
          and abs(psi_out - (1 + se)) < 1e-9)
    return {
        "experiment": "am-pipeline",
        "twist": {"verdict": tw.verdict, "min_slope": tw.min_slope},
        "jacobian_determinant": det,
        "orbits": orbits,
        "cloud": {"n_points": int(len(cloud.points)),
                  "lipschitz": cloud.lipschitz,
                  "lipschitz_by_level": cloud.lipschitz_by_level,
                  "gap_ratio": cloud.gap_ratio},
        "gap_decay_fit": (None if fit is None else
                          {"C": fit.C_est, "Delta": fit.Delta_est,
                           "r_squared": fit.r_squared}),
        "reparam_ceiling": {"phi_one": psi_one, "two_level_low": psi_in,
                            "two_level_high": psi_out},
        "verdict": "pipeline-consistent" if ok else "inconclusive",
    }


RUNNERS = {
    "one-hole-rigidity": run_one_hole_rigidity,
    "two-hole-weak-mixing": run_two_hole_weak_mixing,
    "half-cover-corollary": run_half_cover_corollary,
    "am-pipeline": run_am_pipeline,
}


def run(cfg: dict, out_dir: str | None = None, seed: int | None = None) -> dict:
    diags = validate(cfg)
    errors = [d for d in diags if d["level"] == "error"]
    if errors:
        raise LabError("; ".join(d["message"] for d in errors))
    out = Path(out_dir or cfg.get("out_dir", "lab-out"))
    out.mkdir(parents=True, exist_ok=True)
    seed = int(cfg.get("seed", 7)) if seed is None else int(seed)
    cf = _build_cf(cfg)
    ops = ["build_cf"]
    t0 = time.time()
    verdict = RUNNERS[cfg["experiment"]](cfg, cf, out, seed, ops)
    verdict["seed"] = seed
    wall = time.time() - t0
    with open(out / "verdicts.json", "w") as fh:
        json.dump(verdict, fh, indent=2, sort_keys=True)
        fh.write("\n")
    manifest = {
        "config": cfg,
        "seed": seed,
        "operations": ops,
        "versions": {"amlab": __version__, "numpy": np.__version__,
                     "scipy": scipy.__version__,
                     "python": sys.version.split()[0]},
        "wall_time_s": wall,
        "outputs": sorted(p.name for p in out.iterdir() if p.suffix == ".csv"),
        "diagnostics": diags,
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return verdict


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="lab",
        description="special flows over circle rotations and Aubry-Mather sets")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out-dir", default=None)
    p_run.add_argument("--seed", type=int, default=None)
    p_val = sub.add_parser("validate", help="validate a config, run nothing")
    p_val.add_argument("--config", required=True)
    args = parser.parse_args(argv)

    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        print(json.dumps({"error": "config-unreadable", "message": str(e)}))
        return 2

    if args.command == "validate":
        diags = validate(cfg)
        print(json.dumps(diags, indent=2))
        return 1 if any(d["level"] == "error" for d in diags) else 0

    try:
        verdict = run(cfg, out_dir=args.out_dir, seed=args.seed)
    except LabError as e:
        print(json.dumps({"error": type(e).__name__, "message": str(e)}))
        return 1
    print(json.dumps({"experiment": cfg.get("experiment"),
                      "verdict": verdict.get("verdict")}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
