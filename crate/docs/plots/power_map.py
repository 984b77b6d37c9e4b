"""Power map with the collective-region boundary. Usage: power_map.py out/maps/power_map.csv"""
import sys

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

df = pd.read_csv(sys.argv[1])
w = np.sort(df["pump_s^-1"].unique())
n = np.sort(df["n_atoms"].unique())
power = df.pivot(index="n_atoms", columns="pump_s^-1", values="power_W").loc[n, w]
closed = df.pivot(index="n_atoms", columns="pump_s^-1", values="collective_closed_form").loc[n, w]

fig, ax = plt.subplots(figsize=(6, 4.5))
mesh = ax.pcolormesh(w, n, np.log10(power.clip(lower=1e-30)), shading="nearest", cmap="viridis")
ax.contour(w, n, closed, levels=[0.5], colors="white", linestyles="--")
ax.set_xscale("log")
ax.set_yscale("log")
ax.set_xlabel("pump rate w (s$^{-1}$)")
ax.set_ylabel("atom number N")
fig.colorbar(mesh, label="log$_{10}$ power (W)")
fig.tight_layout()
fig.savefig(sys.argv[2] if len(sys.argv) > 2 else "power_map.png", dpi=150)
