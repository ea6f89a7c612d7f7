import time
import numpy as np
from htmseis.checkpoint import load_checkpoint

model, gen = load_checkpoint(".scratch/warm120k.ckpt")
tm = model.tm
print(f"loaded at t={model.t}, syns={tm.num_synapses}, rows={tm._n_rows}, free={len(tm._free)}")

stats = {'visits':0,'dirty':0,'touched':0,'cells':0,'steps':0,'rebuilds':0,'rebuild_s':0.0,
         'kernel_s':0.0}
orig_jit = tm._dendrites_jit
def timed_jit(ac):
    stats['steps'] += 1
    stats['cells'] += ac.size
    lens = tm._csr_ptr[ac+1] - tm._csr_ptr[ac]
    stats['visits'] += int(lens.sum())
    stats['dirty'] += tm._layout_n + tm._perm_n
    t0 = time.perf_counter()
    r = orig_jit(ac)
    stats['kernel_s'] += time.perf_counter() - t0
    stats['touched'] += tm._pot_touched.size
    return r
tm._dendrites_jit = timed_jit
orig_rb = tm._rebuild_presyn_index
def timed_rb():
    t0 = time.perf_counter()
    orig_rb()
    stats['rebuilds'] += 1
    stats['rebuild_s'] += time.perf_counter() - t0
tm._rebuild_presyn_index = timed_rb

t0 = time.perf_counter()
model.run(gen, 2000)
total = time.perf_counter() - t0
n = stats['steps']
print(f"total {total/n*1000:.2f} ms/step")
print(f"kernel {stats['kernel_s']/n*1000:.2f} ms/step")
print(f"rebuilds {stats['rebuilds']} costing {stats['rebuild_s']/n*1000:.2f} ms/step")
print(f"visits/step {stats['visits']/n:.0f}  dirty_rows/step {stats['dirty']/n:.0f}  touched/step {stats['touched']/n:.0f}  cells/step {stats['cells']/n:.0f}")
