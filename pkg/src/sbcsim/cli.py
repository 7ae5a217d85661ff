"""Command-line front end: cool, scan and modchain subcommands.

Every run writes a manifest (config hash, subcommand, seed, output
directory, tool version) next to its outputs; identical manifests give
byte-identical CSV/JSON files.  Numbers are written with full round-trip
precision via repr.  Exit codes: 0 success, 2 configuration/usage error,
3 fit or schedule failure.
"""

import argparse
import dataclasses
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .analysis import (FitError, ThermometryError, fit_decaying_sinusoid,
                       fit_gaussian_resonance, fit_rabi_sinusoid,
                       nbar_from_sidebands)
from .config import (ConfigError, LoadedConfig, default_config,
                     load_config_file)
from .detection import reference_distributions, write_reference_csv
from .dynamics import IonState, Level, PulseKind, PulseSpec, apply_doppler_cool
from .modchain import (net_shift, resolve_chain, shg_transform, solve_chain,
                       spectrum_table)
from .sequence import (ScheduleError, build_sbc_sequence, iterate_sequence,
                       probe_frequency_scan, prepare_state,
                       scan_frequency, scan_time, sequence_to_text)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_FIT = 3


def _atomic_write(path, text: str):
    """Write-then-rename so partial output never lands under the final name."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _write_json(path, payload: dict):
    _atomic_write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for value in row:
            if isinstance(value, float):
                cells.append(repr(value))
            else:
                cells.append(str(value))
        lines.append(",".join(cells))
    _atomic_write(path, "\n".join(lines) + "\n")


def _write_manifest(out_dir, subcommand, loaded: LoadedConfig, args):
    manifest = {
        "subcommand": subcommand,
        "config_path": args.config or "<builtin defaults>",
        "config_sha256": loaded.sha256,
        "seed": loaded.experiment.seed,
        "output_directory": os.path.abspath(out_dir),
        "tool_version": __version__,
        "flags": {k: v for k, v in sorted(vars(args).items())
                  if k not in ("func",)},
    }
    _write_json(os.path.join(out_dir, "manifest.json"), manifest)


def _load(args) -> LoadedConfig:
    loaded = load_config_file(args.config) if args.config else default_config()
    cfg = loaded.experiment
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.shots is not None:
        overrides["shots"] = args.shots
    if overrides:
        cfg = dataclasses.replace(
            cfg,
            seed=overrides.get("seed", cfg.seed),
            shots_per_point=overrides.get("shots", cfg.shots_per_point))
        loaded = dataclasses.replace(loaded, experiment=cfg)
    return loaded


def _scan_to_rows(scan):
    for i in range(scan.x.size):
        sigma = "" if scan.sigma_y is None else repr(float(scan.sigma_y[i]))
        yield (float(scan.x[i]), float(scan.y[i]), sigma)


def _sideband_thermometry(state, loaded: LoadedConfig, seed_offset=0,
                          probe_duration=None):
    """Probe RSB and BSB around resonance and apply the ratio thermometer."""
    cfg = loaded.experiment
    scan_cfg = loaded.scan
    duration = scan_cfg.probe if probe_duration is None else probe_duration
    detunings = np.linspace(-scan_cfg.detuning_span / 2,
                            scan_cfg.detuning_span / 2, scan_cfg.points)
    results = {}
    scans = {}
    for name, order in (("bsb", +1), ("rsb", -1)):
        probe = PulseSpec(PulseKind.SIDEBAND, duration=duration,
                          omega0=cfg.raman_omega0, order=order)
        scan = probe_frequency_scan(state, cfg, probe, detunings,
                                    shots=cfg.shots_per_point,
                                    seed=cfg.seed + seed_offset + (0 if order < 0 else 1))
        scans[name] = scan
        if name == "bsb":
            results[name] = fit_gaussian_resonance(scan)
        else:
            # sideband pairs share their lineshape; pinning the dark red
            # sideband to the blue fit keeps its amplitude well conditioned
            results[name] = fit_gaussian_resonance(
                scan, fixed_center=results["bsb"].center,
                fixed_width=results["bsb"].width)
    # noise can drag a dark sideband's fitted amplitude slightly negative
    rho_r = max(results["rsb"].amplitude, 0.0)
    rho_b = results["bsb"].amplitude
    thermometry = nbar_from_sidebands(rho_r, rho_b,
                                      results["rsb"].sigma("amplitude"),
                                      results["bsb"].sigma("amplitude"))
    return thermometry, results, scans


def cmd_cool(args) -> int:
    loaded = _load(args)
    cfg = loaded.experiment
    out = args.out
    os.makedirs(out, exist_ok=True)
    state = apply_doppler_cool(IonState.ground(cfg.n_max), cfg.atom, cfg.trap)
    nbar_doppler = state.nbar
    trace = [(0, "doppler_cool", 0, 0.0, nbar_doppler)]
    if cfg.sbc.repeats >= 1:
        seq = build_sbc_sequence(cfg)
        _atomic_write(os.path.join(out, "sequence.txt"), sequence_to_text(seq))
        for index, (step, state) in enumerate(iterate_sequence(state, seq, cfg),
                                              start=1):
            trace.append((index, step.kind.value, step.order,
                          step.duration * 1e6, state.nbar))
        total_duration = seq.total_duration
    else:
        total_duration = 0.0
    _write_csv(os.path.join(out, "nbar_trace.csv"),
               ["step", "kind", "order", "duration_us", "nbar"],
               [(i, k, o, float(d), float(nb)) for i, k, o, d, nb in trace])
    rows = []
    for level in Level:
        for n in range(cfg.n_max + 1):
            rows.append((level.name.lower(), n, float(state.pop[level, n])))
    _write_csv(os.path.join(out, "final_state.csv"),
               ["level", "n", "population"], rows)
    summary = {
        "nbar_doppler": nbar_doppler,
        "nbar_final": state.nbar,
        "ground_population_final": float(state.motional_marginal()[0]),
        "total_sequence_duration_s": total_duration,
        "coherent_pulses": sum(1 for _, k, *_ in trace if k == "sideband"),
        "seed": cfg.seed,
        "config_sha256": loaded.sha256,
        "tool_version": __version__,
    }
    probe = (loaded.scan.probe if cfg.sbc.repeats >= 1
             else loaded.scan.probe_doppler)
    try:
        thermometry, fits, scans = _sideband_thermometry(state, loaded,
                                                         probe_duration=probe)
    except (ThermometryError, FitError, ValueError) as exc:
        # a hot or barely cooled ion gives saturated, nearly flat sideband
        # scans whose amplitude ratio has no thermal reading
        summary["thermometry"] = None
        summary["thermometry_error"] = str(exc)
        thermometry = None
    else:
        for name in ("rsb", "bsb"):
            scans[name].write_csv(os.path.join(out, f"thermometry_{name}.csv"))
            fits[name].write_json(
                os.path.join(out, f"thermometry_{name}_fit.json"))
        summary["thermometry"] = thermometry.to_dict()
    psi_down, psi_up = reference_distributions(cfg.detection)
    write_reference_csv(os.path.join(out, "detection_references.csv"),
                        psi_down, psi_up)
    _write_json(os.path.join(out, "summary.json"), summary)
    _write_manifest(out, "cool", loaded, args)
    report = (f"thermometry nbar = {thermometry.nbar:.4f} "
              f"+- {thermometry.sigma_nbar:.4f}" if thermometry is not None
              else "thermometry invalid for this state")
    print(f"nbar: doppler {nbar_doppler:.3f} -> final {state.nbar:.5f}; "
          + report)
    return EXIT_OK


def _parse_range(text: str, scale: float) -> np.ndarray:
    try:
        start, stop, num = text.split(":")
        values = np.linspace(float(start) * scale, float(stop) * scale,
                             int(num))
    except ValueError as exc:
        raise ConfigError(f"bad range {text!r}; expected start:stop:points "
                          f"({exc})") from exc
    if values.size == 0:
        raise ConfigError(f"range {text!r} is empty")
    return values


def cmd_scan(args) -> int:
    loaded = _load(args)
    cfg = loaded.experiment
    scan_cfg = loaded.scan
    out = args.out
    os.makedirs(out, exist_ok=True)
    probe_duration = (args.probe_us * 1e-6 if args.probe_us is not None
                      else (scan_cfg.probe if cfg.prepare == "sbc"
                            else scan_cfg.probe_doppler))
    if args.observable == "sidebands":
        if args.axis != "frequency":
            raise ConfigError("observable 'sidebands' only scans frequency")
        state = prepare_state(cfg)
        thermometry, fits, scans = _sideband_thermometry(state, loaded)
        for name in ("rsb", "bsb"):
            scans[name].write_csv(os.path.join(out, f"{name}.csv"))
            fits[name].write_json(os.path.join(out, f"{name}_fit.json"))
        _write_json(os.path.join(out, "thermometry.json"),
                    thermometry.to_dict())
        _write_manifest(out, "scan", loaded, args)
        print(f"thermometry nbar = {thermometry.nbar:.4f} "
              f"+- {thermometry.sigma_nbar:.4f} "
              f"(P0 = {thermometry.ground_population:.4f})")
        return EXIT_OK

    templates = {
        "rsb": PulseSpec(PulseKind.SIDEBAND, probe_duration,
                         cfg.raman_omega0, order=-1),
        "bsb": PulseSpec(PulseKind.SIDEBAND, probe_duration,
                         cfg.raman_omega0, order=+1),
        "carrier": PulseSpec(PulseKind.CARRIER, probe_duration,
                             cfg.raman_omega0),
        "rf": PulseSpec(PulseKind.RF, probe_duration, cfg.rf_omega),
    }
    template = templates[args.observable]
    if args.axis == "frequency":
        values = (_parse_range(args.range, 2 * math.pi * 1e3) if args.range
                  else np.linspace(-scan_cfg.detuning_span / 2,
                                   scan_cfg.detuning_span / 2, scan_cfg.points))
        scan = scan_frequency(cfg, template, values,
                              shots=cfg.shots_per_point, seed=cfg.seed)
        scan.write_csv(os.path.join(out, "scan.csv"))
        fit = fit_gaussian_resonance(scan)
    else:
        values = (_parse_range(args.range, 1e-6) if args.range
                  else np.linspace(0.0, scan_cfg.time_max, scan_cfg.time_points))
        scan = scan_time(cfg, template, values, shots=cfg.shots_per_point,
                         seed=cfg.seed)
        scan.write_csv(os.path.join(out, "scan.csv"))
        if args.observable == "carrier":
            fit = fit_decaying_sinusoid(scan)
        else:
            fit = fit_rabi_sinusoid(scan)
    fit.write_json(os.path.join(out, "fit.json"))
    _write_manifest(out, "scan", loaded, args)
    shown = {k: v for k, v in fit.params.items()}
    print(f"{args.observable} {args.axis} scan: " +
          ", ".join(f"{k} = {v:.6g}" for k, v in shown.items()))
    return EXIT_OK


def cmd_modchain(args) -> int:
    loaded = _load(args)
    settings = loaded.modchain
    out = args.out
    os.makedirs(out, exist_ok=True)
    green = settings.modulation
    uv = shg_transform(green)
    rows = []
    for label, state in (("green", green), ("uv", uv)):
        for entry in spectrum_table(state, settings.max_order):
            rows.append((label, entry["order"], float(entry["offset"]),
                         float(entry["frequency"]),
                         float(entry["power_fraction"])))
    header = ["stage", "order", "offset_hz", "frequency_hz", "power_fraction"]
    _write_csv(os.path.join(out, "modchain.csv"), header, rows)
    solved = solve_chain(settings.chain, settings.beat_target)
    resolved = resolve_chain(settings.chain, solved)
    chain_payload = {
        "beat_target_hz": settings.beat_target,
        "solved_stage_hz": solved,
        "net_shift_hz": net_shift(resolved),
        "stages": [{"frequency_hz": stage.frequency, "passes": stage.passes,
                    "sign": stage.sign} for stage in resolved.stages],
    }
    _write_json(os.path.join(out, "chain.json"), chain_payload)
    _write_manifest(out, "modchain", loaded, args)
    print(",".join(header))
    for row in rows:
        print(",".join(repr(v) if isinstance(v, float) else str(v)
                       for v in row))
    print(f"solved AOM drive: {solved / 1e6:.6f} MHz for a "
          f"{settings.beat_target / 1e9:.6f} GHz splitting")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sbcsim",
        description="Simulate resolved-sideband cooling of a single trapped "
                    "ion and the accompanying analysis chain.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="configuration file (INI); omit for "
                                        "built-in defaults")
        p.add_argument("--seed", type=int, help="override the run seed")
        p.add_argument("--shots", type=int,
                       help="override shots per scan point")
        p.add_argument("--out", default=".", help="output directory")

    cool = sub.add_parser("cool", help="run the full cooling sequence and "
                                       "simulated thermometry")
    common(cool)
    cool.set_defaults(func=cmd_cool)

    scan = sub.add_parser("scan", help="frequency or time scan of one "
                                       "observable")
    common(scan)
    scan.add_argument("--observable", required=True,
                      choices=["rsb", "bsb", "carrier", "rf", "sidebands"])
    scan.add_argument("--axis", default="frequency",
                      choices=["frequency", "time"])
    scan.add_argument("--range",
                      help="start:stop:points, in kHz (frequency) or us (time)")
    scan.add_argument("--probe-us", type=float, dest="probe_us",
                      help="probe pulse duration in us")
    scan.set_defaults(func=cmd_scan)

    mod = sub.add_parser("modchain", help="sideband powers through the "
                                          "doubling stage and AOM arithmetic")
    common(mod)
    mod.set_defaults(func=cmd_modchain)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FitError, ScheduleError, ThermometryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FIT


if __name__ == "__main__":
    sys.exit(main())
