"""Autocorrelation of the benchmark series, then a small input length x horizon grid."""
import numpy as np

from tssnet import acf
from tssnet.pipeline import RunConfig, load_series, run_sweep

cfg = RunConfig.parse("", ["synth_length=800", "synth_alpha=0.3", "kernel_height_mode=fixed",
                           "window=6", "stride=2", "epochs=10", "patience=0",
                           "sweep_inputs=24,48", "sweep_horizons=6,12"])
series = load_series(cfg)
r = acf(series.values[0], 48)
print("r(k) at k = 0, 6, 12, 24:", np.round(r[[0, 6, 12, 24]], 3))

for report in run_sweep(cfg, series):
    row = dict(zip(("T", "h"), report.row()[2:4]))
    print(f"T_in={row['T']:4d} h={row['h']:3d}  rmse {report.rmse:.4f}  corr {report.corr:.4f}")
