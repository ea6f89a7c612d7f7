"""The learning curve: anomaly falls as the model adapts to its input.

A fresh model treats everything as novel (anomaly near 1). Fed the synthetic
seismic stream, it gradually learns the background noise as normal: the mean
anomaly per 1200-step window roughly halves within the first ten windows and,
given a few hundred thousand steps of noise, settles near zero.

This demo runs a 24k-step prefix (a couple of minutes); pass a step count to
run longer, e.g.  python demos/03_adaptation_curve.py 60000
"""

import sys
import time

from htmseis import DetectorModel, HtmConfig, SignalGenerator, window_stats

steps = int(sys.argv[1]) if len(sys.argv) > 1 else 24_000
cfg = HtmConfig.default()
model = DetectorModel(cfg)
gen = SignalGenerator(cfg.synth)

print(f"running {steps} steps with the reference configuration...")
t0 = time.perf_counter()
records = model.run(gen, steps)
elapsed = time.perf_counter() - t0
print(f"done in {elapsed:.0f}s ({elapsed / steps * 1e3:.2f} ms/step)\n")

stats = window_stats(records, cfg.run.window_len)
peak = max(s.mean_anomaly for s in stats)
print("window  mean_anomaly  rms_error")
for s in stats:
    bar = "#" * int(s.mean_anomaly / peak * 40)
    print(f"{s.window_index:6d}  {s.mean_anomaly:12.3f}  {s.rms_error:9.3f}  {bar}")

first, last = stats[0], stats[-1]
print(f"\nmean anomaly: window 0 = {first.mean_anomaly:.3f}, "
      f"window {last.window_index} = {last.mean_anomaly:.3f} "
      f"({last.mean_anomaly / first.mean_anomaly:.0%} of initial)")
print(f"model grew {model.tm.num_segments} segments / {model.tm.num_synapses} synapses")
