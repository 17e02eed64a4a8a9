"""Random search over window, stride and learning rate on a short noisy sine."""
from tssnet.pipeline import RunConfig, load_series, prepare
from tssnet.training import SearchSpace, TrainConfig, hyper_search

cfg = RunConfig.parse("", ["synth_length=600", "synth_alpha=0.3", "input_length=48", "horizon=12"])
data = prepare(cfg, load_series(cfg))
space = SearchSpace(window=(3, 10), stride=(1, 4), budget=6, seed=1)
base = {"m": 1, "T": 48, "h": 12, "kernel_height_mode": "fixed"}

best, model, trials = hyper_search(space, data.train, data.valid, base,
                                   train_cfg=TrainConfig(epochs=15, patience=5))
for t in trials:
    print(f"trial {t.trial}: window={t.window} stride={t.stride} lr={t.lr:.2e} "
          f"valid corr {t.valid_corr:.4f} [{t.status}]")
print(f"selected trial {best.trial}")
