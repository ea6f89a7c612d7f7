"""Tour of the synthetic seismic stream.

The generator mixes uniform instrumental noise in [-1, 1) with sporadic
jitter bursts: each burst lasts 25 steps, sums ten sine waves with random
frequencies in [0.01, 0.1] cycles/step, and scales them by one random
amplitude in [0, 5]. Bursts arrive with probability 0.005 per step, i.e.
about once every 200 steps.

Run:  python demos/01_signal_generator.py
"""

import numpy as np

from htmseis import SignalGenerator, SynthConfig

cfg = SynthConfig(rng_seed=7)
gen = SignalGenerator(cfg)
values, flags = gen.take(10_000)

print(f"generated {values.size} samples with p_jitter={cfg.p_jitter}")
print(f"  value range      [{values.min():+.3f}, {values.max():+.3f}]")
print(f"  mean             {values.mean():+.5f}")
print(f"  jitter steps     {int(flags.sum())} ({flags.mean():.2%} of stream)")
print(f"  events spawned   {len(gen.events)} (expected ~{cfg.p_jitter * values.size:.0f})")

print("\nfirst three events:")
for ev in gen.events[:3]:
    freqs = ", ".join(f"{f:.3f}" for f in ev.frequencies[:4])
    print(f"  onset t={ev.onset:5d}  amplitude={ev.amplitude:.2f}  "
          f"freqs=[{freqs}, ...]")

# A close-up of one burst: noise rides on the summed sines, and the burst
# starts from zero (all sine phases vanish at the onset).
ev = gen.events[0]
window = values[ev.onset - 5: ev.onset + ev.duration + 5]
print(f"\nclose-up around the first event (t={ev.onset - 5}..):")
for i, v in enumerate(window):
    t = ev.onset - 5 + i
    marker = "*" if ev.onset <= t < ev.onset + ev.duration else " "
    bar = "#" * int(min(abs(v), 20) * 2)
    print(f"  t={t:5d} {marker} {v:+8.3f} {bar}")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(12, 4))
    t = np.arange(values.size)
    ax.plot(t, values, lw=0.4, label="acceleration")
    ax.fill_between(t, values.min(), values.max(), where=flags,
                    alpha=0.2, color="red", label="jitter active")
    ax.set_xlabel("t")
    ax.set_ylabel("acceleration")
    ax.legend(loc="upper right")
    fig.tight_layout()
    fig.savefig("demo01_signal.png", dpi=110)
    print("\nwrote demo01_signal.png")
except ImportError:
    print("\n(matplotlib not installed; skipping plot)")
