"""Emission spectrum on a log offset axis. Usage: spectrum.py out/point/spectrum.csv"""
import sys

import matplotlib.pyplot as plt
import pandas as pd

df = pd.read_csv(sys.argv[1], comment="#")
right = df[df["omega_offset_s^-1"] > 0]

fig, ax = plt.subplots(figsize=(6, 4))
ax.loglog(right["omega_offset_s^-1"], right["spectral_density"])
ax.set_xlabel("offset from line center (s$^{-1}$)")
ax.set_ylabel("S($\\omega$)")
fig.tight_layout()
fig.savefig(sys.argv[2] if len(sys.argv) > 2 else "spectrum.png", dpi=150)
