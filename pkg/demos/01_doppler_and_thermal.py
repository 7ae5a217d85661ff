# Doppler cooling limit and the thermal starting point.
#
# Doppler cooling on the 280 nm cycling transition bottoms out around 1 mK.
# For a ~2 MHz trap that still means roughly ten motional quanta on average,
# spread over dozens of Fock states -- the starting point every sideband
# cooling run has to empty out.

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from sbcsim import MG25, doppler_limit_nbar, thermal_distribution

for freq_mhz in (1.9, 2.0, 2.3):
    temperature, nbar = doppler_limit_nbar(MG25, 2 * math.pi * freq_mhz * 1e6)
    print(f"omega = 2pi x {freq_mhz} MHz: T = {temperature * 1e3:.3f} mK, "
          f"nbar = {nbar:.2f}")

# distribution at the axial frequency used throughout the demos
_, nbar_ax = doppler_limit_nbar(MG25, 2 * math.pi * 1.9e6)
dist = thermal_distribution(nbar_ax, 256)

fig, ax = plt.subplots(figsize=(6, 3.5))
ns = np.arange(61)
ax.bar(ns, dist.populations[:61], color="goldenrod")
ax.set_xlabel("Fock state n")
ax.set_ylabel("P(n)")
ax.set_title(f"Thermal distribution at the Doppler limit (nbar = {nbar_ax:.1f})")
fig.tight_layout()
fig.savefig("demo_doppler_thermal.png", dpi=150)
print(f"P(0) = {dist.ground_population:.4f}; "
      f"population above n=40: {dist.populations[41:].sum():.4f}")
print("wrote demo_doppler_thermal.png")
