"""How a scalar acceleration becomes a sparse column code.

Stage 1: the scalar encoder maps a value in [-2, 2] to one of 98 buckets and
lights 21 consecutive bits out of 118 -- nearby values share bits, distant
values share none.

Stage 2: the spatial pooler projects those 118 bits onto 2048 columns and
keeps the 40 best-overlapping ones. After a little training the code for a
given value is stable, while staying similar for similar inputs.

Run:  python demos/02_encoder_and_pooler.py
"""

import numpy as np

from htmseis import EncoderConfig, SpConfig, SpatialPooler, bucket_index, encode

enc = EncoderConfig()
print(f"encoder: n={enc.n} bits, w={enc.w} active, {enc.bucket_count} buckets\n")

for value in (-2.0, -1.0, 0.0, 0.02, 1.0, 2.0, 3.5):
    sdr = encode(value, enc)
    first, last = sdr.active[0], sdr.active[-1]
    print(f"  value {value:+5.2f} -> bucket {bucket_index(value, enc):2d} "
          f"-> bits [{first}..{last}]")

print("\noverlap falls off linearly with value distance:")
base = encode(0.0, enc)
for delta in (0.0, 0.05, 0.2, 0.5, 1.0):
    other = encode(delta, enc)
    print(f"  overlap(encode(0.0), encode({delta:4.2f})) = {base.overlap(other):2d} / {enc.w}")

print("\nspatial pooler: training on a sweep, then probing stability")
sp = SpatialPooler(SpConfig())
rng = np.random.default_rng(3)
for value in rng.uniform(-1, 1, 2000):
    sp.compute(encode(value, enc), learn=True)

probe = encode(0.5, enc)
code_a = sp.compute(probe, learn=False)
code_b = sp.compute(probe, learn=False)
near = sp.compute(encode(0.55, enc), learn=False)
far = sp.compute(encode(-0.5, enc), learn=False)
print(f"  active columns per step : {code_a.num_active}")
print(f"  same input twice        : overlap {code_a.overlap(code_b)} / 40")
print(f"  0.50 vs 0.55            : overlap {code_a.overlap(near)} / 40")
print(f"  0.50 vs -0.50           : overlap {code_a.overlap(far)} / 40")
