# Full sideband-cooling run with sideband-ratio thermometry.
#
# The schedule chains 25 second-order red-sideband pi-pulses (targets 40
# down to 16) into 15 first-order ones (15 down to 1), each followed by a
# repump block, and repeats everything three times.  Each pulse removes one
# or two quanta from the addressed rung; three repeats funnel nbar ~ 10 to
# a few 1e-2.  Afterwards the red/blue sideband asymmetry of 45 us probe
# scans gives the occupancy estimate nbar = Q/(1-Q).

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from sbcsim import (IonState, PulseKind, apply_doppler_cool,
                    build_sbc_sequence, default_config, fit_gaussian_resonance,
                    iterate_sequence, nbar_from_sidebands, PulseSpec,
                    probe_frequency_scan)

loaded = default_config()
cfg = loaded.experiment

state = apply_doppler_cool(IonState.ground(cfg.n_max), cfg.atom, cfg.trap)
print(f"after Doppler cooling: nbar = {state.nbar:.2f}")

seq = build_sbc_sequence(cfg)
trace = [state.nbar]
for step, state in iterate_sequence(state, seq, cfg):
    if step.kind is PulseKind.REPUMP:
        trace.append(state.nbar)
print(f"after {len(trace) - 1} pulse+repump blocks "
      f"({seq.total_duration * 1e3:.1f} ms): nbar = {state.nbar:.4f}")

fig, ax = plt.subplots(figsize=(6.5, 3.5))
ax.semilogy(np.arange(len(trace)), trace)
ax.set_xlabel("pulse + repump blocks applied")
ax.set_ylabel("nbar")
ax.set_title("Mean occupation through the cooling schedule")
fig.tight_layout()
fig.savefig("demo_cooling_run.png", dpi=150)

# simulated thermometry on the final state, 300 shots per point; the dark
# red sideband is fit with the blue sideband's line position and width
detunings = np.linspace(-loaded.scan.detuning_span / 2,
                        loaded.scan.detuning_span / 2, loaded.scan.points)
amplitudes = {}
fig, ax = plt.subplots(figsize=(6.5, 3.5))
for label, order, color in (("blue sideband", +1, "tab:blue"),
                            ("red sideband", -1, "tab:red")):
    probe = PulseSpec(PulseKind.SIDEBAND, loaded.scan.probe,
                      cfg.raman_omega0, order=order)
    scan = probe_frequency_scan(state, cfg, probe, detunings,
                                shots=cfg.shots_per_point,
                                seed=cfg.seed + order)
    if order > 0:
        fit = fit_gaussian_resonance(scan)
    else:
        fit = fit_gaussian_resonance(scan,
                                     fixed_center=amplitudes[+1].center,
                                     fixed_width=amplitudes[+1].width)
    amplitudes[order] = fit
    ax.errorbar(scan.x / (2 * np.pi * 1e3), scan.y, scan.sigma_y, fmt="o",
                color=color, label=label, markersize=3)
ax.set_xlabel("probe detuning (kHz)")
ax.set_ylabel("excitation")
ax.legend()
fig.tight_layout()
fig.savefig("demo_sideband_scans.png", dpi=150)

result = nbar_from_sidebands(max(amplitudes[-1].amplitude, 0.0),
                             amplitudes[+1].amplitude,
                             amplitudes[-1].sigma("amplitude"),
                             amplitudes[+1].sigma("amplitude"))
print(f"thermometry: nbar = {result.nbar:.3f} +- {result.sigma_nbar:.3f}, "
      f"ground-state population = {result.ground_population:.3f}")
print("wrote demo_cooling_run.png, demo_sideband_scans.png")
