"""Command-line front end.

Subcommands: mmse, mi, good-code, interference, corners,
verify {immse|chain-rule|spectrum}, simulate {mmse|gap|decomposition|orthogonality}.

Conventions: rates and MI are displayed in bits by default; machine output
(JSON/CSV files) carries values in nats with an explicit units field unless
--units bits is requested. A JSON config file supplies defaults and explicit
flags override it. Exit codes: 0 success, 1 computation failure or a failed
verification, 2 configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import math
import os
import sys
from typing import Optional

import numpy as np

from . import dists, immse, interference, simulator
from .errors import GiclabError
from .mmse import QuadratureSpec, mmse as mmse_value
from .reports import CheckReport

LN2 = math.log(2.0)


class ConfigError(Exception):
    pass


def _parse_grid(text: str) -> np.ndarray:
    try:
        start, stop, points = text.split(":")
        start, stop, points = float(start), float(stop), int(points)
    except ValueError:
        raise ConfigError(f"grid must look like start:stop:points, got {text!r}")
    if points < 2 or stop < start:
        raise ConfigError("grid needs start <= stop and points >= 2")
    return np.linspace(start, stop, points)


def _parse_dist(text: str) -> dists.ScalarDistribution:
    if text.startswith("@"):
        with open(text[1:], "r", encoding="utf-8") as fh:
            return dists.from_dict(json.load(fh))
    if text.lstrip().startswith("{"):
        return dists.from_dict(json.loads(text))
    return dists.named(text)


def _load_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    if not isinstance(obj, dict):
        raise ConfigError("config file must hold a JSON object")
    return obj


def _merged(args: argparse.Namespace, config: dict, key: str, default=None):
    val = getattr(args, key.replace("-", "_"), None)
    if val is not None:
        return val
    if key in config:
        return config[key]
    return default


def _require(value, name: str):
    if value is None:
        raise ConfigError(f"missing required option --{name}")
    return value


def _threads(args, config) -> int:
    val = _merged(args, config, "threads")
    if val is None:
        val = os.environ.get("GICLAB_THREADS", "1")
    try:
        n = int(val)
    except (TypeError, ValueError):
        raise ConfigError(f"threads must be an integer, got {val!r}")
    if n < 1:
        raise ConfigError("threads must be >= 1")
    return n


def _emit_json(obj: dict, output: Optional[str]) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_results_csv(path: Optional[str], rows: list[dict]) -> None:
    """Simulation results: columns quantity,value,stderr,samples,seed."""
    def render(fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["quantity", "value", "stderr", "samples", "seed"])
        for r in rows:
            writer.writerow([r["quantity"], repr(float(r["value"])),
                             repr(float(r["stderr"])), r["samples"], r["seed"]])
    if path:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            render(fh)
    else:
        render(sys.stdout)


def _write_manifest(output: Optional[str], manifest: dict, deterministic: bool) -> None:
    if not deterministic:
        manifest = dict(manifest)
        manifest["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    if output:
        root, _ = os.path.splitext(output)
        with open(root + ".manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _display_rate(value_nats: float, units: str) -> str:
    if units == "bits":
        return f"{value_nats / LN2:.6f} bits"
    return f"{value_nats:.6f} nats"


def _params_from(args, config) -> interference.InterferenceParams:
    return interference.InterferenceParams(
        snr1=float(_require(_merged(args, config, "snr1"), "snr1")),
        snr2=float(_require(_merged(args, config, "snr2"), "snr2")),
        a=float(_require(_merged(args, config, "a"), "a")),
        b=float(_merged(args, config, "b", 0.0)),
    )


# --- command handlers ---------------------------------------------------------


def _cmd_mmse(args, config) -> int:
    d = _parse_dist(_require(_merged(args, config, "dist"), "dist"))
    output = _merged(args, config, "output")
    grid = _merged(args, config, "grid")
    if grid is not None:
        samples = immse.mmse_curve(d, _parse_grid(grid))
        if output:
            immse.write_curve_csv(output, samples)
        else:
            _print_curve(samples)
        return 0
    snr = float(_require(_merged(args, config, "snr"), "snr"))
    value = mmse_value(d, snr)
    _emit_json({"quantity": "mmse", "snr": snr, "value": value,
                "units": "dimensionless", "dist": dists.to_dict(d)}, output)
    if output:
        print(f"mmse at snr {snr}: {value:.9f}")
    return 0


def _cmd_mi(args, config) -> int:
    d = _parse_dist(_require(_merged(args, config, "dist"), "dist"))
    output = _merged(args, config, "output")
    units = _merged(args, config, "units", "nats")
    grid = _merged(args, config, "grid")
    if grid is not None:
        samples = immse.mi_curve(d, _parse_grid(grid))
        if output:
            immse.write_curve_csv(output, samples)
        else:
            _print_curve(samples)
        return 0
    snr = float(_require(_merged(args, config, "snr"), "snr"))
    nats = immse.mutual_information(d, snr)
    value = nats / LN2 if units == "bits" else nats
    _emit_json({"quantity": "mutual_information", "snr": snr, "value": value,
                "units": units, "dist": dists.to_dict(d)}, output)
    if output:
        print(f"mutual information at snr {snr}: {_display_rate(nats, 'bits')}")
    return 0


def _print_curve(samples) -> None:
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["x", "y", "kind"])
    for s in samples:
        writer.writerow([repr(s.abscissa), repr(s.value), s.meaning])


def _cmd_good_code(args, config) -> int:
    snr = float(_require(_merged(args, config, "snr"), "snr"))
    grid = _parse_grid(_merged(args, config, "grid", "0:2:201"))
    profile = immse.GoodCodeProfile(snr)
    samples = immse.good_code_curve(profile, grid)
    output = _merged(args, config, "output")
    if output:
        immse.write_curve_csv(output, samples)
        print(f"good-code profile for design snr {snr}: {len(samples)} rows "
              f"-> {output}")
    else:
        _print_curve(samples)
    return 0


def _cmd_interference(args, config) -> int:
    p = _params_from(args, config)
    d = _parse_dist(_merged(args, config, "dist", "gaussian"))
    grid = _parse_grid(_merged(args, config, "grid", "0:1.5:61"))
    quantity = _merged(args, config, "quantity", "mi")
    if quantity == "mi":
        samples = [immse.CurveSample(float(g), interference.interference_mi(d, float(g), p),
                                     immse.MEANING_MI) for g in grid]
    elif quantity == "mmse-w":
        if grid[-1] >= 1.0:
            raise ConfigError("mmse-w is defined for gamma < 1; adjust the grid")
        samples = [immse.CurveSample(float(g), interference.mmse_w(d, float(g), p),
                                     immse.MEANING_MMSE) for g in grid]
    else:
        raise ConfigError("quantity must be 'mi' or 'mmse-w'")
    output = _merged(args, config, "output")
    if output:
        immse.write_curve_csv(output, samples)
        print(f"interference {quantity} curve: {len(samples)} rows -> {output}")
    else:
        _print_curve(samples)
    return 0


def _cmd_corners(args, config) -> int:
    p = _params_from(args, config)
    regime = _require(_merged(args, config, "regime"), "regime")
    units = _merged(args, config, "units", "nats")
    try:
        report = interference.corner_report(p, regime, units)
    except ValueError as exc:
        raise ConfigError(str(exc))
    output = _merged(args, config, "output")
    _emit_json(report, output)
    if output:
        rx, rz = report["corner"]
        scale = 1.0 if units == "bits" else 1.0 / LN2
        print(f"{regime} corner: rx={rx * scale:.6f} bits, rz={rz * scale:.6f} bits")
    return 0


def _report_exit(report: CheckReport, output, as_json=True) -> int:
    if as_json:
        _emit_json(report.to_dict(), output)
    status = "pass" if report.passed else "FAIL"
    print(f"verify {report.name}: {status} "
          f"(max abs error {report.max_abs_error:.3e}, tol {report.tol:.1e})")
    return 0 if report.passed else 1


def _cmd_verify(args, config) -> int:
    what = args.what
    output = _merged(args, config, "output")
    if what == "immse":
        d = _parse_dist(_require(_merged(args, config, "dist"), "dist"))
        report = immse.verify_immse(
            d,
            snr_max=float(_merged(args, config, "snr-max", 10.0)),
            grid=int(_merged(args, config, "grid-points", 100)),
            tol=float(_merged(args, config, "tol", 1e-4)),
        )
        return _report_exit(report, output)
    if what == "chain-rule":
        p = _params_from(args, config)
        report = interference.chain_rule_check(
            dists.Gaussian(0.0, 1.0),
            float(_merged(args, config, "gamma", 1.0)),
            p,
            tol=float(_merged(args, config, "tol", 1e-9)),
        )
        return _report_exit(report, output)
    if what == "spectrum":
        tol = float(_merged(args, config, "tol", 1e-6))
        trials = int(_merged(args, config, "trials", 1))
        seed = int(_merged(args, config, "seed", 0))
        rows = []
        worst = 0.0
        rng = np.random.Generator(np.random.Philox(key=seed))
        for t in range(trials):
            if t == 0:
                n = int(_merged(args, config, "n", 8))
                gamma = float(_merged(args, config, "gamma", 1.0))
                budget = float(_merged(args, config, "budget", 1.0))
            else:
                n = int(rng.integers(2, 17))
                gamma = float(rng.uniform(0.01, 20.0))
                budget = float(rng.uniform(0.1, 5.0))
            spectrum = immse.max_trace_mmse_spectrum(n, gamma, budget)
            dev = float(np.max(np.abs(spectrum - budget)))
            worst = max(worst, dev)
            rows.append({"n": n, "gamma": gamma, "budget": budget,
                         "max_deviation_from_uniform": dev})
        report = CheckReport("spectrum", worst < tol, worst, tol, tuple(rows))
        return _report_exit(report, output)
    raise ConfigError(f"unknown verify target {what!r}")


def _cmd_simulate(args, config) -> int:
    what = args.what
    output = _merged(args, config, "output")
    seed = int(_merged(args, config, "seed", 0))
    samples = int(_merged(args, config, "samples", 100_000))
    threads = _threads(args, config)
    deterministic = bool(getattr(args, "deterministic", False) or
                         config.get("deterministic", False))
    n = int(_merged(args, config, "n", 8))
    rate = float(_merged(args, config, "rate", LN2))
    cb = simulator.random_gaussian_codebook(n, rate, int(_merged(args, config, "codebook-seed", seed + 1)))
    manifest = {"command": f"simulate {what}", "n": n, "rate_nats": rate,
                "m": cb.m, "codebook_seed": cb.seed, "seed": seed,
                "samples": samples, "threads": threads}
    rows: list[dict] = []

    def row(name, est):
        rows.append({"quantity": name, "value": est.value, "stderr": est.stderr,
                     "samples": est.samples, "seed": est.seed})

    if what == "mmse":
        gsnr = float(_merged(args, config, "gsnr", 1.0))
        manifest["gsnr"] = gsnr
        row("empirical_mmse_x", simulator.empirical_mmse_x(cb, gsnr, samples, seed, threads))
    elif what == "gap":
        gsnr = float(_merged(args, config, "gsnr", 1.0))
        manifest["gsnr"] = gsnr
        rep = simulator.estimator_gap(cb, gsnr, samples, seed, threads)
        row("mmse_opt", rep.mmse_opt)
        row("mse_bitwise_linear", rep.mse_bitwise_linear)
        row("gap", rep.gap)
    elif what == "decomposition":
        p = _params_from(args, config)
        gamma = float(_merged(args, config, "gamma", 0.5))
        z = _parse_dist(_merged(args, config, "dist", "gaussian"))
        z_mode = _merged(args, config, "z-mode", "matched")
        manifest.update({"gamma": gamma, "snr1": p.snr1, "snr2": p.snr2,
                         "a": p.a, "b": p.b, "z_dist": dists.to_dict(z),
                         "z_mode": z_mode})
        rep = simulator.w_decomposition(cb, z, gamma, p, samples, seed, threads, z_mode)
        row("total_mse", rep.mmse_opt)
        row("term_x", rep.term_x)
        row("term_z", rep.term_z)
        row("cross_1", rep.cross_terms[0])
        row("cross_2", rep.cross_terms[1])
        row("residual", rep.decomposition_residual)
    elif what == "orthogonality":
        gsnr = float(_merged(args, config, "gsnr", 1.0))
        g = _merged(args, config, "g", "all")
        manifest["gsnr"] = gsnr
        manifest["g"] = g
        names = sorted(simulator._TEST_FUNCTIONS) if g == "all" else [g]
        for name in names:
            row(f"orthogonality_{name}",
                simulator.orthogonality_residual(cb, gsnr, name, samples, seed, threads))
    else:
        raise ConfigError(f"unknown simulate target {what!r}")

    _write_results_csv(output, rows)
    _write_manifest(output, manifest, deterministic)
    if output:
        print(f"simulate {what}: {len(rows)} quantities -> {output}")
    return 0


# --- parser -------------------------------------------------------------------


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON config file; flags override its fields")
    sub.add_argument("--output", help="output file (CSV or JSON per command)")
    sub.add_argument("--units", choices=["nats", "bits"])
    sub.add_argument("--threads", type=int)
    sub.add_argument("--deterministic", action="store_true",
                     help="omit the timestamp from run manifests")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="giclab",
        description="Interference-channel MMSE/MI calculator and simulator")
    subs = parser.add_subparsers(dest="command", required=True)

    s = subs.add_parser("mmse", help="MMSE of a scalar input over AWGN")
    s.add_argument("--dist")
    s.add_argument("--snr", type=float)
    s.add_argument("--grid")
    _add_common(s)
    s.set_defaults(handler=_cmd_mmse)

    s = subs.add_parser("mi", help="mutual information of a scalar input over AWGN")
    s.add_argument("--dist")
    s.add_argument("--snr", type=float)
    s.add_argument("--grid")
    _add_common(s)
    s.set_defaults(handler=_cmd_mi)

    s = subs.add_parser("good-code", help="piecewise MI/MMSE profile of a capacity-achieving code")
    s.add_argument("--snr", type=float, help="design SNR")
    s.add_argument("--grid", help="gamma grid start:stop:points")
    _add_common(s)
    s.set_defaults(handler=_cmd_good_code)

    s = subs.add_parser("interference", help="interferer MI (or combined-signal MMSE) versus gamma")
    for flag in ("--snr1", "--snr2", "--a", "--b"):
        s.add_argument(flag, type=float)
    s.add_argument("--dist", help="interferer law (default gaussian)")
    s.add_argument("--grid")
    s.add_argument("--quantity", choices=["mi", "mmse-w"])
    _add_common(s)
    s.set_defaults(handler=_cmd_interference)

    s = subs.add_parser("corners", help="capacity-region corner points")
    s.add_argument("--regime", choices=["z", "weak", "mixed"])
    for flag in ("--snr1", "--snr2", "--a", "--b"):
        s.add_argument(flag, type=float)
    _add_common(s)
    s.set_defaults(handler=_cmd_corners)

    s = subs.add_parser("verify", help="numerical verification reports")
    s.add_argument("what", choices=["immse", "chain-rule", "spectrum"])
    s.add_argument("--dist")
    s.add_argument("--snr-max", type=float, dest="snr_max")
    s.add_argument("--grid-points", type=int, dest="grid_points")
    s.add_argument("--tol", type=float)
    s.add_argument("--gamma", type=float)
    for flag in ("--snr1", "--snr2", "--a", "--b"):
        s.add_argument(flag, type=float)
    s.add_argument("--n", type=int)
    s.add_argument("--budget", type=float)
    s.add_argument("--trials", type=int)
    s.add_argument("--seed", type=int)
    _add_common(s)
    s.set_defaults(handler=_cmd_verify)

    s = subs.add_parser("simulate", help="finite-blocklength Monte Carlo runs")
    s.add_argument("what", choices=["mmse", "gap", "decomposition", "orthogonality"])
    s.add_argument("--n", type=int)
    s.add_argument("--rate", type=float, help="codebook rate in nats")
    s.add_argument("--gsnr", type=float, help="observation SNR for clean-channel runs")
    s.add_argument("--gamma", type=float)
    for flag in ("--snr1", "--snr2", "--a", "--b"):
        s.add_argument(flag, type=float)
    s.add_argument("--dist", help="interferer law for decomposition runs")
    s.add_argument("--z-mode", choices=["matched", "exact"], dest="z_mode")
    s.add_argument("--g", choices=["identity", "square", "clipped-cube", "all"])
    s.add_argument("--samples", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--codebook-seed", type=int, dest="codebook_seed")
    _add_common(s)
    s.set_defaults(handler=_cmd_simulate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(getattr(args, "config", None))
        return args.handler(args, config)
    except (ConfigError, FileNotFoundError, json.JSONDecodeError, ValueError) as exc:
        json.dump({"error": {"kind": "config", "message": str(exc)}}, sys.stderr)
        sys.stderr.write("\n")
        return 2
    except GiclabError as exc:
        kind = type(exc).__name__.removesuffix("Error").lower()
        json.dump({"error": {"kind": kind, "message": str(exc)}}, sys.stderr)
        sys.stderr.write("\n")
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
