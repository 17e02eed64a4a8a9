"""Conv1 activations of a sine-trained model repeat along the slice axis.

With a period of 24 steps and a stride of 2, one period spans 12 slices, so
the map's spectrum peaks near o * 2 / 24 cycles across the stack.
"""
import numpy as np

from tssnet import (SynthSpec, TemporalTensorConfig, TrainConfig, build_tssnet,
                    capture_feature_maps, make_windows, synth_generate, train)
from tssnet.data import export_feature_maps

series = synth_generate(SynthSpec("sine", 600, 2 * np.pi / 24))
data = make_windows(series, 96, 24)
model = build_tssnet(1, 96, 24, TemporalTensorConfig(8, 2), k=3, kernel_height_mode="fixed")
model, _ = train(model, data, cfg=TrainConfig(lr=0.005, epochs=10))

fmap = capture_feature_maps(model, data.inputs[0])[0]
power = np.abs(np.fft.rfft(fmap - fmap.mean(axis=1, keepdims=True), axis=1)) ** 2
print("map shape (window, slice):", fmap.shape)
print("dominant bin:", int(np.argmax(power.mean(axis=0)[1:]) + 1),
      f"expected about {model.o * 2 / 24:.2f}")

for path in export_feature_maps(capture_feature_maps(model, data.inputs[0]), "feature_maps_out"):
    print("wrote", path)
