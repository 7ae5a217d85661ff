# Bright/dark photon-count histograms and the mixture estimator.
#
# State detection collects ~5.8 photons from a bright ion but only ~0.2
# from a dark one in a 12.5 us exposure.  The two reference distributions
# overlap below the percent level, and the internal-state amplitude of a
# measured histogram is the maximum-likelihood weight of the two-component
# mixture.  With 100-300 shots that lands the amplitude at the few-percent
# level, which is what every scan point below inherits.

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from sbcsim import (DetectionModel, fit_population, overlap,
                    reference_distributions, simulate_detection)

model = DetectionModel(mean_bright=5.8, mean_dark=0.2, exposure=12.5e-6)
psi_down, psi_up = reference_distributions(model)
print(f"reference overlap: {overlap(psi_down, psi_up) * 100:.2f}%  "
      "(pure Poisson references)")

# one simulated detection run at a 50/50 superposition
hist = simulate_detection(0.5, model, shots=300, rng=7)
fit = fit_population(hist, psi_down, psi_up)
print(f"300 shots at a = 0.5: a_hat = {fit.a:.3f} +- {fit.sigma_a:.3f}")

ks = np.arange(model.k_max + 1)
fig, ax = plt.subplots(figsize=(6.5, 3.5))
ax.bar(ks - 0.2, psi_up, width=0.4, color="tab:blue", label="dark reference")
ax.bar(ks + 0.2, psi_down, width=0.4, color="tab:red", label="bright reference")
ax.plot(ks, hist.counts / hist.shots, "k.", label="sampled mixture (300 shots)")
ax.set_xlim(-0.8, 16)
ax.set_xlabel("detected photons per exposure")
ax.set_ylabel("probability")
ax.legend()
fig.tight_layout()
fig.savefig("demo_detection_histograms.png", dpi=150)

# depumping makes a dark ion look gradually brighter; the calibrated dark
# mean of 0.2 photons over 0.15 stray corresponds to a ~1.4e3/s conversion
from sbcsim import depump_rate_for_up_mean

stray_only = DetectionModel(mean_bright=5.8, mean_dark=0.15)
rate = depump_rate_for_up_mean(stray_only, 0.2)
print(f"depump rate matching a 0.2 photon dark mean over 0.15 stray: "
      f"{rate:.0f} /s")
print("wrote demo_detection_histograms.png")
