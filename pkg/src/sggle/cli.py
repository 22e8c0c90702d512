"""Command-line entry point: ``sggle <command> [options]``.

Exit status: 0 when every assertion of the command holds, 1 when an
inequality or contraction check failed (witnesses are written), 2 on a
configuration error.
"""

from __future__ import annotations

import argparse
import json
import subprocess
import sys
import time
from pathlib import Path

import numpy as np

from .core import ConfigError
from .io import (help_text, load_config, load_witness, save_field, save_witness,
                 write_energy_csv, write_report_csv)

COMMANDS = ("simulate", "ensemble", "verify-inequalities", "uniqueness", "galerkin-scan")


def _git_describe() -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"],
                             cwd=Path(__file__).resolve().parent, capture_output=True,
                             text=True, timeout=5)
        return out.stdout.strip() or "unknown"
    except (OSError, subprocess.SubprocessError):
        return "unknown"


class Manifest:
    """Written before the run starts and rewritten when it ends."""

    def __init__(self, out: Path, command: str, config_path, seed):
        self.path = out / "manifest.json"
        self.data = {"command": command, "config_path": config_path, "out_dir": str(out),
                     "seed_override": seed,
                     "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
                     "git_describe": _git_describe(), "exit_status": None, "summary": {}}
        self._write()

    def _write(self):
        self.path.write_text(json.dumps(self.data, indent=1, default=float))

    def finish(self, code: int, summary: dict):
        self.data["exit_status"] = code
        self.data["summary"] = summary
        self._write()


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="sggle", formatter_class=argparse.RawDescriptionHelpFormatter,
        description="Galerkin simulator for a stochastic generalized Ginzburg-Landau "
                    "equation with jump noise.", epilog=help_text())
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON config with sections params, noise, sim, monotonicity")
    p.add_argument("--seed", type=int, help="override sim.seed")
    p.add_argument("--paths", type=int, help="override sim.n_paths")
    p.add_argument("--out-dir", default="out", help="output directory (default: out)")
    p.add_argument("--threads", type=int,
                   help="worker threads (default: $SGGLE_THREADS, else the CPU count)")
    p.add_argument("--samples", type=int, default=100_000,
                   help="verify-inequalities: pointwise samples (default: 100000)")
    p.add_argument("--negative-control", action="store_true",
                   help="verify-inequalities: also sample outside the beta threshold")
    p.add_argument("--replay", metavar="FILE", help="verify-inequalities: re-check a witness file")
    p.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=JSON",
                   help="override any config key, e.g. --set sim.dt=5e-4")
    return p


def _overrides(args) -> dict:
    out = {}
    for item in args.set:
        key, eq, val = item.partition("=")
        if not eq or "." not in key:
            raise ConfigError(f"{item}: expected SECTION.KEY=VALUE")
        try:
            out[key] = json.loads(val)
        except json.JSONDecodeError:
            out[key] = val
    if args.seed is not None:
        out["sim.seed"] = args.seed
    if args.paths is not None:
        out["sim.n_paths"] = args.paths
    return out


# -- commands ------------------------------------------------------------------

def _simulate(cfg, out: Path, args) -> tuple[int, dict]:
    from .integrator import simulate_ensemble

    sim = cfg.sim.replace(n_paths=1)
    res = simulate_ensemble(sim, cfg.params, cfg.model, cfg.initial(), cfg.terms,
                            threads=1, keep_jump_states=False)
    s = res.series
    write_energy_csv(out / "energy.csv", res.times, {f: getattr(s, f)[0] for f in
                                                     ("l2_sq", "h1_sq", "l2s2_pow", "mixed")})
    save_field(out / "final.sggl", res.trajectory(0).final)
    if res.snapshots is not None:
        for k, t in enumerate(res.snap_times):
            save_field(out / f"snap_{k:05d}.sggl", res.trajectory(0).states[k])
    stopped = float(res.stopped_at[0])
    return 0, {"jumps": len(res.jumps[0]), "stopped_at": None if np.isnan(stopped) else stopped,
               "nonfinite": bool(res.nonfinite[0]), "final_l2_sq": float(s.l2_sq[0, -1])}


def _ensemble(cfg, out: Path, args) -> tuple[int, dict]:
    from .diagnostics import all_statistics, write_lemma_csv
    from .integrator import ensemble_stats, simulate_ensemble

    res = simulate_ensemble(cfg.sim, cfg.params, cfg.model, cfg.initial(), cfg.terms,
                            threads=args.threads)
    st = ensemble_stats(res)
    write_energy_csv(out / "energy.csv", res.times, st.mean)
    stats = all_statistics(res, cfg.get("sim", "moment"), cfg.params.sigma)
    write_lemma_csv(out / "lemma-stats.csv", stats)
    return 0, {"paths": res.n_paths, "blowup_frequency": st.blowup_frequency,
               "sup_l2_mean": st.sup_l2_mean, "ratios": {s.lemma_id: s.ratio for s in stats}}


def _replay(cfg, path: str) -> tuple[int, dict]:
    from .core import GLParams
    from .inequalities import replay

    meta, u, phi = load_witness(path)
    pr = meta["params"]
    params = GLParams(alpha=pr["alpha"], beta=pr["beta"], gamma=pr["gamma"], sigma=pr["sigma"],
                      lambda1=[a + 1j * b for a, b in zip(pr["lambda1_re"], pr["lambda1_im"])],
                      lambda2=[a + 1j * b for a, b in zip(pr["lambda2_re"], pr["lambda2_im"])],
                      L1=pr["L1"], L2=pr["L2"])
    res = replay(meta["check"], params, u, phi, cfg.model)
    slack, scale = float(np.asarray(res.slack)), float(np.asarray(res.scale))
    violated = bool(np.asarray(res.violations()))
    print(f"{meta['check']}: slack={slack:.6g} scale={scale:.6g} "
          f"{'VIOLATED' if violated else 'holds'} (stored slack {meta['slack']:.6g})")
    expected = meta["check"].endswith("_negative")
    return (0 if violated == expected or not violated else 1), {
        "check": meta["check"], "slack": slack, "scale": scale, "violated": violated}


def _verify(cfg, out: Path, args) -> tuple[int, dict]:
    from .inequalities import run_suite

    if args.replay:
        return _replay(cfg, args.replay)
    M = cfg.raw["monotonicity"]
    rows, witnesses = run_suite(
        cfg.params, cfg.model, samples=args.samples, field_samples=M["field_samples"],
        seed=cfg.sim.seed, n=int(M["lab_modes"]), sigmas=tuple(M["sigmas"]),
        beta_fractions=tuple(M["beta_fractions"]), negative_control=args.negative_control,
        negative_fraction=float(M["negative_fraction"]))
    write_report_csv(out / "inequality-report.csv", rows)
    if witnesses:
        wdir = out / "witnesses"
        wdir.mkdir(exist_ok=True)
        for i, w in enumerate(witnesses):
            save_witness(wdir / f"{w.check}_{i:03d}.sggw", w.check, w.params, w.u, w.phi,
                         w.slack, w.scale)
    in_regime = sum(r.violations for r in rows if not r.negative_control)
    negative = [r for r in rows if r.negative_control]
    for r in rows:
        tag = " (negative control)" if r.negative_control else ""
        print(f"{r.check}{tag}: sigma={r.sigma:g} beta={r.beta:.4g} samples={r.samples} "
              f"violations={r.violations} max_slack={r.max_slack:.3g}")
    ok = in_regime == 0 and all(r.violations > 0 for r in negative)
    return (0 if ok else 1), {"in_regime_violations": in_regime,
                              "negative_control_violations": sum(r.violations for r in negative),
                              "witnesses": len(witnesses)}


def _uniqueness(cfg, out: Path, args) -> tuple[int, dict]:
    from .experiments import uniqueness_experiment, write_contraction_csv

    mono = cfg.monotonicity()
    if not mono.contraction_valid(cfg.params, cfg.model.constants.k4):
        raise ConfigError("monotonicity: the eps splitting does not give a contraction (K >= 0 "
                          "or -2 + 2 eps_tilde + k4 >= 0)")
    run = uniqueness_experiment(cfg.sim, cfg.params, cfg.model, cfg.initial(),
                                float(cfg.get("sim", "delta")), mono, cfg.terms,
                                threads=args.threads)
    write_contraction_csv(out / "contraction.csv", run)
    mc = run.mean_contraction
    decreased = bool(mc[-1] < mc[0]) if np.all(np.isfinite(mc[[0, -1]])) else False
    ok = decreased and not run.violations and run.shared_noise()
    return (0 if ok else 1), {"pairs": run.n_pairs, "inconclusive": int(run.inconclusive.sum()),
                              "drift_step_violations": len(run.violations),
                              "jump_steps": len(run.jump_increments),
                              "contraction_start": float(mc[0]), "contraction_end": float(mc[-1])}


def _galerkin(cfg, out: Path, args) -> tuple[int, dict]:
    from .diagnostics import write_lemma_csv
    from .experiments import galerkin_scan, write_galerkin_csv

    scan = galerkin_scan(cfg.sim, cfg.params, cfg.model, cfg.initial(), cfg.get("sim", "levels"),
                         cfg.terms, cfg.get("sim", "moment"), threads=args.threads)
    write_galerkin_csv(out / "galerkin-scan.csv", scan)
    write_lemma_csv(out / "lemma-stats.csv", scan.table.rows())
    spreads = {k: scan.table.spread(k) for k in ("L31", "L32", "L33")}
    return (0 if scan.decreasing() else 1), {"discrepancy": scan.discrepancy.tolist(),
                                             "spread": spreads}


HANDLERS = {"simulate": _simulate, "ensemble": _ensemble, "verify-inequalities": _verify,
            "uniqueness": _uniqueness, "galerkin-scan": _galerkin}


def run(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config, _overrides(args))
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = Manifest(out, args.command, args.config, args.seed)
    try:
        code, summary = HANDLERS[args.command](cfg, out, args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        manifest.finish(2, {"error": str(e)})
        return 2
    except BaseException as e:
        manifest.finish(-1, {"error": repr(e)})
        raise
    manifest.finish(code, summary)
    print(json.dumps(summary, default=float))
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
