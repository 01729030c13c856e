"""Charge-throughput degradation over a multi-cycle log, plus the
verdict-vs-rate concordance table for the nine published conditions.

Run: python3 demos/04_throughput_degradation.py
"""

from dqdv_gp import concordance, degradation_rate, generate_log, plating_spec, throughput_series
from dqdv_gp.pipeline import log_to_curves

# ten cycles fading 2% of first-cycle capacity per cycle
spec = plating_spec(fade_rate=0.02, n_cycles=10, seed=3)
curves = log_to_curves(generate_log(spec), capacity_ah=spec.capacity)
series = throughput_series(curves)

print("cycle  normalized throughput")
for c, n in zip(series.cycles, series.normalized):
    print(f"{c:5d}  {n:.4f}")
print(f"fitted degradation rate: {degradation_rate(series):.3f} %/cycle "
      f"(construction: 2.0)")

# published verdicts and charge-throughput decrease rates per condition
verdicts = {
    "1.0C@10C": "Plating", "0.8C@10C": "Plating", "0.6C@10C": "Plating",
    "0.4C@10C": "Plating", "0.6C@0C": "Plating", "0.4C@0C": "Plating",
    "0.2C@0C": "NoPlating", "1.0C@40C": "NoPlating", "1.0C@25C": "NoPlating",
}
rates = {
    "1.0C@10C": 1.464, "0.8C@10C": 2.734, "0.6C@10C": 2.038,
    "0.4C@10C": 1.671, "0.6C@0C": 3.617, "0.4C@0C": 1.711,
    "0.2C@0C": 0.029, "1.0C@40C": 0.093, "1.0C@25C": 0.227,
}
result = concordance(verdicts, rates, rate_split=1.0)
print(f"\nconcordance at 1.0 %/cycle split: "
      f"{result['n_agree']}/{result['n_total']} conditions agree")
for row in result["rows"]:
    print(f"  {row['condition']:9s} {row['verdict']:9s} "
          f"{row['rate_pct_per_cycle']:6.3f} %/cycle  agree={row['agree']}")
