"""Paired comparison: GP derivative posterior vs Savitzky-Golay + finite
differences on the same cleaned curves.

Run: python3 demos/03_gp_vs_savgol.py
"""

import numpy as np

from dqdv_gp import plating_spec
from dqdv_gp.pipeline import paired_trial

spec = plating_spec()
rows = [paired_trial(spec, seed=s) for s in range(15)]

print("seed  gp_rmse     sg_rmse     ratio   v_peak_err  coverage")
for r in rows:
    print(f"{r['seed']:4d}  {r['gp_rmse']:.3e}  {r['sg_rmse']:.3e}  "
          f"{r['sg_rmse'] / r['gp_rmse']:5.1f}x  {r['v_peak_err']:.4f} V   "
          f"{r['coverage']:.2f}")

wins = sum(r["gp_rmse"] < r["sg_rmse"] for r in rows)
print(f"\nGP lower RMSE in {wins}/{len(rows)} paired seeds; "
      f"median advantage {np.median([r['sg_rmse'] / r['gp_rmse'] for r in rows]):.1f}x")
