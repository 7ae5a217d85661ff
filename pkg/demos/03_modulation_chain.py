# Single-laser trick: phase-modulation sidebands through frequency doubling.
#
# An EOM between the two doubling cavities puts 9.2 GHz sidebands on the
# green light.  Doubling to the UV doubles the modulation index (beta 0.58
# -> 1.16) without changing the 9.2 GHz separation, so switching the EOM
# toggles between a resonant beam (sideband on the cycling transition) and
# a far-detuned Raman pair.  The AOM chain then sets the 1.789 GHz
# difference frequency between the two Raman beams.

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from sbcsim import (ModulationState, beta_from_ratio, carrier_sideband_ratio,
                    net_shift, raman_difference_chain, resolve_chain,
                    shg_transform, sideband_powers, solve_chain)
from sbcsim.constants import C_LIGHT

green = ModulationState(carrier_frequency=C_LIGHT / 559.1e-9, beta=0.58,
                        mod_frequency=9.2e9)
uv = shg_transform(green)

print(f"green: beta = {green.beta}, carrier/sideband ratio = "
      f"{carrier_sideband_ratio(green.beta):.2f}")
print(f"uv:    beta = {uv.beta}, per-sideband fraction = "
      f"{sideband_powers(uv.beta, 4).fraction(1):.3f}")
print(f"inverting a measured ratio of 11 gives beta = "
      f"{beta_from_ratio(11.0):.3f}")

fig, axes = plt.subplots(1, 2, figsize=(8, 3.2), sharey=True)
for ax, (label, state) in zip(axes, (("green (beta=0.58)", green),
                                     ("uv (beta=1.16)", uv))):
    spec = sideband_powers(state.beta, 4)
    ax.bar(spec.orders * state.mod_frequency / 1e9, spec.fractions, width=3.0)
    ax.set_title(label)
    ax.set_xlabel("offset from carrier (GHz)")
axes[0].set_ylabel("power fraction")
fig.tight_layout()
fig.savefig("demo_modulation_chain.png", dpi=150)

# difference chain: two 450 MHz single passes plus a shared double pass the
# two beams traverse in opposite directions (4 effective passes)
chain = raman_difference_chain(450e6)
drive = solve_chain(chain, 1.789e9)
print(f"double-pass AOM drive for a 1.789 GHz splitting: {drive / 1e6} MHz")
print(f"check: net shift = {net_shift(resolve_chain(chain, drive)) / 1e9} GHz")
print("wrote demo_modulation_chain.png")
