import dataclasses, time
from htmseis import HtmConfig, DetectorModel, SignalGenerator, window_stats
from htmseis.checkpoint import save_checkpoint

cfg = HtmConfig.default()
cfg = cfg.replace(synth=dataclasses.replace(cfg.synth, p_jitter=0.0))
model = DetectorModel(cfg)
gen = SignalGenerator(cfg.synth)

t0 = time.perf_counter()
with open(".scratch/warm120k_log.csv", "w", buffering=1) as log:
    log.write("window,mean_anomaly,rms,ms_per_step,synapses,rows,elapsed_s\n")
    for w in range(100):
        bt0 = time.perf_counter()
        recs = model.run(gen, 1200)
        bt1 = time.perf_counter()
        ws = window_stats(recs, 1200)[0]
        log.write(f"{w},{ws.mean_anomaly:.4f},{ws.rms_error:.4f},"
                  f"{(bt1-bt0)/1.2:.2f},{model.tm.num_synapses},{model.tm._n_rows},"
                  f"{bt1-t0:.0f}\n")
save_checkpoint(".scratch/warm120k.ckpt", model, gen)
print("done", time.perf_counter() - t0)
