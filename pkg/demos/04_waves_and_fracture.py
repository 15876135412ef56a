"""Two dynamic vignettes: a longitudinal wave race and a running crack.

First a velocity pulse travels down a thin bar and its front speed is
compared with the longitudinal sound speed sqrt((K + 4G/3)/rho).  Then a
pre-notched strip is pulled until node splitting opens a crack across it,
demonstrating the fracture machinery (off by default in normal runs).

Run:  python3 demos/04_waves_and_fracture.py
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))
from helpers import make_notched_sim, measure_wave_speed  # reuse the tuned drivers

# --- 1. wave race -----------------------------------------------------------
measured, expected = measure_wave_speed()
print("longitudinal wave down a 100x4 bar:")
print(f"  theory  {expected:.3f} um/ns")
print(f"  measured {measured:.3f} um/ns ({abs(measured - expected) / expected * 100:.2f}% off)")

# --- 2. running crack --------------------------------------------------------
sim, notch_row = make_notched_sim()
print(f"\npre-notched 40x20 strip, crack starts at row {notch_row}; pulling...")
sim.run()
splits = sim.grid.split_nodes
rows = [int(sim.node_ij[s.original][1]) for s in splits]
cols = [int(sim.node_ij[s.original][0]) for s in splits]
print(f"  {len(splits)} nodes split; crack spans columns {min(cols)}..{max(cols)}, "
      f"rows {sorted(set(rows))}")
print(f"  total nodal mass after splitting: {sim.nodes.mass.sum():.6f} "
      f"(conserved through every split)")
