"""Command-line front end: run scenarios, compare controllers, verify bounds.

Exit codes: 0 success (including "not applicable" verification outcomes),
2 scenario validation failure, 3 numerical blow-up during integration.
"""

import argparse
import json
import math
import os
import sys

from .config import (
    list_presets,
    load_config,
    load_scenario,
    resolve_scenario,
)
from .controllers import BoundaryLayerSMC, DeltaAdaptiveSMC
from .core import ultimate_band
from .errors import ConfigError, ParameterError, SimulationDiverged, SmcError
from .sim import (
    compute_metrics,
    lyapunov_trace,
    run_scenario,
    certificate_summary,
    verify_ultimate_bound,
    verify_band_excursion,
    write_csv,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3


def _scenario_phi(scenario):
    ctl = scenario.controller
    if isinstance(ctl, DeltaAdaptiveSMC):
        return ctl.params.phi
    if isinstance(ctl, BoundaryLayerSMC):
        return ctl.phi
    return None


def _fmt(v):
    if v is None:
        return "-"
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _metrics_lines(name, metrics):
    d = metrics.as_dict()
    lines = [f"metrics for {name}:"]
    for key in ("reach_time_to_band", "steady_band_mean", "steady_band_max",
                "chattering_index", "max_gain", "overshoot_into_band",
                "ultimate_bound_satisfied"):
        lines.append(f"  {key:<22} {_fmt(d[key])}")
    return lines


def _write_outputs(out_dir, name, log, metrics, extra=None):
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, f"{name}.csv")
    write_csv(log, csv_path)
    payload = {"meta": log.meta, "metrics": metrics.as_dict()}
    if extra:
        payload.update(extra)
    json_path = os.path.join(out_dir, f"{name}.metrics.json")
    with open(json_path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    txt_path = os.path.join(out_dir, f"{name}.metrics.txt")
    with open(txt_path, "w") as fh:
        fh.write("\n".join(_metrics_lines(name, metrics)) + "\n")
    return csv_path


def _overrides(args):
    ov = {}
    if args.dt is not None:
        ov["dt"] = args.dt
    if getattr(args, "t_end", None) is not None:
        ov["t_end"] = args.t_end
    return ov


def cmd_run(args):
    path = resolve_scenario(args.scenario)
    scenario = load_scenario(path, overrides=_overrides(args))
    log = run_scenario(scenario)
    metrics = compute_metrics(log, _scenario_phi(scenario))

    extra = {}
    ctl = scenario.controller
    if isinstance(ctl, DeltaAdaptiveSMC) and scenario.plant.true_bound is not None:
        p = ctl.params
        if p.k > 0.0:
            mu = scenario.plant.true_bound
            sigma = mu + 1.0 / (p.k * p.rho)
            v0 = abs(log.s[0]) + log.gain[0] / p.k
            b = 0.5 * (sigma / p.k + v0)
            r2 = verify_ultimate_bound(log, p.k, p.rho, mu, b)
            metrics.ultimate_bound_satisfied = r2.holds
            extra["ultimate_bound"] = {"applicable": r2.applicable, "holds": r2.holds,
                                 "T": r2.T, "b": r2.b, "sigma": r2.sigma}
    csv_path = _write_outputs(args.out, scenario.name, log, metrics, extra)
    print(f"wrote {csv_path}")
    for line in _metrics_lines(scenario.name, metrics):
        print(line)
    return EXIT_OK


def cmd_compare(args):
    if len(args.scenarios) < 2:
        raise ConfigError("compare needs at least two scenario files")
    scenarios = [load_scenario(resolve_scenario(p)) for p in args.scenarios]

    shared = None
    for sc in scenarios:
        key = {k: sc.config[k] for k in ("plant", "uncertainty", "x0", "integration")}
        if shared is None:
            shared = key
        elif key != shared:
            raise ConfigError(
                f"scenario {sc.name!r} does not share plant/uncertainty/x0/integration "
                "with the first scenario"
            )

    phi = None
    for sc in scenarios:
        p = _scenario_phi(sc)
        if isinstance(sc.controller, DeltaAdaptiveSMC):
            phi = p
            break
        phi = phi if phi is not None else p

    rows = []
    for sc in scenarios:
        log = run_scenario(sc)
        metrics = compute_metrics(log, phi)
        _write_outputs(args.out, sc.name, log, metrics)
        rows.append((sc.name, metrics))

    fields = ("reach_time_to_band", "steady_band_mean", "steady_band_max",
              "chattering_index", "max_gain")
    width = max(len(name) for name, _ in rows)
    header = "scenario".ljust(width) + "".join(f"  {f:>18}" for f in fields)
    print(header)
    best = min(rows, key=lambda r: r[1].chattering_index)[0]
    for name, metrics in rows:
        d = metrics.as_dict()
        mark = " *" if name == best else ""
        print(name.ljust(width) + "".join(f"  {_fmt(d[f]):>18}" for f in fields) + mark)
    print(f"* lowest chattering_index: {best}")
    return EXIT_OK


def cmd_verify(args):
    path = resolve_scenario(args.scenario)
    scenario = load_scenario(path, overrides=_overrides(args))
    ctl = scenario.controller
    if not isinstance(ctl, DeltaAdaptiveSMC):
        raise ConfigError("verify requires a scenario using the delta_adaptive controller")
    p = ctl.params
    eta = ultimate_band(p.phi)
    print(f"eta = {eta:.9g}")

    mu = scenario.plant.true_bound
    if mu is None:
        print("bound checks: not applicable (plant has no declared uncertainty bound)")
        return EXIT_OK

    log = run_scenario(scenario)
    v0 = float(abs(log.s[0]) + (log.gain[0] / p.k if p.k > 0.0 else math.nan))

    bounds, ob = certificate_summary(mu, p.rho, p.phi, p.k,
                                     v0=v0 if p.k > 0.0 else None)
    print(f"sigma = {_fmt(bounds.sigma)}  T = {_fmt(bounds.T)}  b = {_fmt(bounds.b)}")
    if ob.feasible:
        print(f"m = {ob.m:.9g}  delta = {ob.delta:.9g}")
    else:
        print("m: infeasible for these mu, rho, phi (no excursion bound certified)")

    if p.k > 0.0 and math.isfinite(bounds.b):
        r2 = verify_ultimate_bound(log, p.k, p.rho, mu, bounds.b)
        status = "not applicable" if not r2.applicable else ("pass" if r2.holds else "FAIL")
        detail = f"max V' after T = {_fmt(r2.max_vprime_after)} vs 1.05*b = {_fmt(1.05 * r2.b)}"
        if r2.reason:
            detail += f" ({r2.reason})"
        print(f"ultimate-bound check: {status}  {detail}")
    else:
        print("ultimate-bound check: not applicable (k = 0, decay rate undefined)")

    r3 = verify_band_excursion(log, ob.m, ob.delta, p.phi)
    if not r3.applicable:
        print(f"excursion-bound check: not applicable ({r3.reason})")
    else:
        status = "pass" if r3.holds else "FAIL"
        print(f"excursion-bound check: {status}  max |s| after band entry = "
              f"{r3.max_excursion:.6g} vs 1.05*delta = {1.05 * r3.delta:.6g}")

    trace = lyapunov_trace(log, mu, p.rho, p.phi, p.k)
    checked = int(trace.checked.sum())
    print(f"decay check outside the band: {checked - len(trace.violations)}/{checked} rows "
          f"within certificate (+slack); {len(trace.isolated_violations)} violations away "
          "from band crossings")
    return EXIT_OK


def cmd_presets(args):
    if args.action != "list":
        raise ConfigError(f"unknown presets action {args.action!r} (try: list)")
    for name in list_presets():
        raw = load_config(resolve_scenario(name))
        ctl = raw.get("controller", {}).get("kind", "?")
        plant = raw.get("plant", {}).get("kind", "?")
        print(f"{name:<34} plant={plant:<11} controller={ctl}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="smcsim",
        description="Sliding-mode control scenarios: run, compare, verify.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate one scenario and write CSV + metrics")
    p_run.add_argument("scenario", help="scenario file or preset name")
    p_run.add_argument("--out", default=".", help="output directory")
    p_run.add_argument("--dt", type=float, default=None, help="override sample period")
    p_run.add_argument("--t-end", dest="t_end", type=float, default=None,
                       help="override horizon")
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser("compare", help="run several scenarios on one shared setup")
    p_cmp.add_argument("scenarios", nargs="+", help="scenario files or preset names")
    p_cmp.add_argument("--out", default=".", help="output directory")
    p_cmp.set_defaults(func=cmd_compare)

    p_ver = sub.add_parser("verify", help="check the closed-form bounds on a scenario")
    p_ver.add_argument("scenario", help="scenario file or preset name")
    p_ver.add_argument("--dt", type=float, default=None, help="override sample period")
    p_ver.add_argument("--t-end", dest="t_end", type=float, default=None,
                       help="override horizon")
    p_ver.set_defaults(func=cmd_verify)

    p_pre = sub.add_parser("presets", help="preset utilities")
    p_pre.add_argument("action", nargs="?", default="list")
    p_pre.set_defaults(func=cmd_presets)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SimulationDiverged as exc:
        print(f"numerical blow-up: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except SmcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
