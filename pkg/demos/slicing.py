"""How a series turns into a stack of overlapping slices.

A 1 x 20 ramp of 1..20 makes the indexing easy to read: every entry in the
stack is the (1-based) time step it came from, and zero marks padding.
"""
import numpy as np

from tssnet import TemporalTensorConfig, slice_count, slice_stack

x = np.arange(1.0, 21.0)[None]

for cfg in [TemporalTensorConfig(window=4, stride=2),
            TemporalTensorConfig(window=4, stride=2, formula="maximal"),
            TemporalTensorConfig(window=3, stride=3, dilation=2, padding=2, padding_mode="zero")]:
    stack = slice_stack(x, cfg)
    print(f"window={cfg.window} stride={cfg.stride} dilation={cfg.dilation} "
          f"padding={cfg.padding} formula={cfg.formula}: o={slice_count(cfg, 20)}")
    # rows are positions inside a slice, columns are slices
    print(stack[0].astype(int))
    print()

# the default count reserves twice the window span, so a few tail slices are dropped
print("hourly week, window 8, stride 2:", slice_count(TemporalTensorConfig(8, 2), 168), "slices")
