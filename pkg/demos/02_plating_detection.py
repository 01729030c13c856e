"""Plating vs baseline classification across noise seeds.

Runs the detector on ten plating-scenario and ten baseline-scenario cycles
and tabulates verdicts, peak locations, and the confidence metric.

Run: python3 demos/02_plating_detection.py
"""

from dqdv_gp import baseline_spec, generate_cycle, plating_spec
from dqdv_gp.pipeline import analyze_curve, log_to_curves
from dqdv_gp.synth import SynthSpec


def run(spec, label):
    print(f"\n{label}:")
    for seed in range(10):
        d = spec.to_dict()
        d["seed"] = seed
        s = SynthSpec.from_dict(d)
        log = generate_cycle(s, 1)
        (curve,) = log_to_curves(log, capacity_ah=s.capacity)
        _, _, report = analyze_curve(curve)
        if report.peaks:
            best = max(report.peaks, key=lambda p: p.magnitude)
            extra = (f"peak {best.v_peak:.3f} V, band/magnitude "
                     f"{best.confidence_pct:.2f}%")
        else:
            extra = "no >4.0 V candidates"
        print(f"  seed {seed}: {report.verdict:9s} ({extra})")


run(plating_spec(), "plating scenario (bump at 4.08 V)")
run(baseline_spec(), "baseline scenario (staging bumps only)")
