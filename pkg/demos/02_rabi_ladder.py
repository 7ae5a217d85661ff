# Motional dependence of the Raman Rabi frequencies.
#
# The carrier and sideband couplings all pick up Fock-state-dependent
# factors (Laguerre polynomials in eta^2).  Two features drive the cooling
# schedule below:
#   * the first-order red sideband coupling crosses zero near n ~ 47 for
#     eta = 0.28, so population parked above the crossing has to be brought
#     down with the second-order sideband first;
#   * pi-times must be retuned per target level, since the coupling varies
#     by an order of magnitude across the thermal distribution.

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from sbcsim import first_zero_crossing, rabi_frequency_ladder

ETA = 0.28
N_MAX = 100
ns = np.arange(N_MAX + 1)

fig, ax = plt.subplots(figsize=(7, 4))
styles = {
    0: ("carrier", "black", "-"),
    -1: ("1st red", "tab:red", "-"),
    +1: ("1st blue", "tab:blue", "-"),
    -2: ("2nd red", "tab:red", "--"),
    +2: ("2nd blue", "tab:blue", "--"),
}
for order, (label, color, style) in styles.items():
    ladder = rabi_frequency_ladder(order, ETA, 1.0, N_MAX)
    ax.plot(ns, np.abs(ladder), style, color=color, label=label)

for order in (0, -1, -2):
    crossing = first_zero_crossing(order, ETA, 400)
    print(f"order {order:+d}: first coupling zero crossing at n = {crossing}")
    if crossing is not None and crossing <= N_MAX:
        ax.axvline(crossing, color=styles[order][1], alpha=0.25)

ax.set_xlabel("initial Fock state n")
ax.set_ylabel("|Omega| / Omega0")
ax.set_title(f"Coupling strengths vs motional state (eta = {ETA})")
ax.legend()
fig.tight_layout()
fig.savefig("demo_rabi_ladder.png", dpi=150)
print("wrote demo_rabi_ladder.png")
