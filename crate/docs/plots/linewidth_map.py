"""Linewidth map with gamma, 1/T2 and w_max markers. Usage: linewidth_map.py out/maps/linewidth_map.csv"""
import sys

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

df = pd.read_csv(sys.argv[1])
w = np.sort(df["pump_s^-1"].unique())
n = np.sort(df["n_atoms"].unique())
width = df.pivot(index="n_atoms", columns="pump_s^-1", values="linewidth_fwhm_s^-1").loc[n, w]
w_max = df.groupby("n_atoms")["w_max_s^-1"].first().loc[n]

fig, ax = plt.subplots(figsize=(6, 4.5))
mesh = ax.pcolormesh(w, n, np.log10(width), shading="nearest", cmap="magma")
ax.axvline(df["gamma_s^-1"].iloc[0], color="white", ls="--")
ax.axvline(df["t2_inv_s^-1"].iloc[0], color="white", ls="--")
ax.plot(w_max.values, n, color="white", ls="--")
ax.set_xscale("log")
ax.set_yscale("log")
ax.set_xlim(w[0], w[-1])
ax.set_xlabel("pump rate w (s$^{-1}$)")
ax.set_ylabel("atom number N")
fig.colorbar(mesh, label="log$_{10}$ FWHM (s$^{-1}$)")
fig.tight_layout()
fig.savefig(sys.argv[2] if len(sys.argv) > 2 else "linewidth_map.png", dpi=150)
