"""Train TSSNet on a noisy sine and compare it with the two baselines.

Four phase-shifted features keep the persistence baseline's correlation
defined (a repeated last value has no spread along a univariate horizon).
"""
from tssnet.metrics import evaluate_model
from tssnet.pipeline import RunConfig, build_model, fit, load_series, prepare

cfg = RunConfig.parse("", ["synth_length=1200", "synth_alpha=0.5", "synth_features=4",
                           "input_length=96", "horizon=24", "window=8", "stride=2",
                           "epochs=30", "patience=10"])
data = prepare(cfg, load_series(cfg))
print(f"windows: train {len(data.train)}, valid {len(data.valid)}, test {len(data.test)}")

for kind in ("tssnet", "cnn1d", "persistence"):
    model = build_model(cfg, data.series.m, kind=kind)
    if kind != "persistence":
        model, history = fit(cfg, data, model)
        print(f"{kind}: best epoch {history.best_epoch} of {len(history.records)}")
    report = evaluate_model(model, data.test)
    print(f"{kind:12s} test rmse {report.rmse:.4f}  corr {report.corr:.4f}")
