"""Temporal consistency of per-frame stylization on a clip with known motion.

Builds a short clip by panning a content image one pixel per frame, writes
the matching flow files in UFLO format, stylizes every frame with one style
code, and scores the stylized clip with the warp-residual metric. The same
clip with independent per-frame noise serves as an unstable reference.

    python3 demos/04_video_temporal.py --ckpt runs/desk/ckpt_2000.bin --out runs/clip
"""
import argparse
from pathlib import Path

import numpy as np
import torch

from ucast.imageio import save_image
from ucast.synthetic import make_content_image, make_style_image
from ucast.trainer import trainer_from_checkpoint
from ucast.video import read_flow, temporal_loss, write_flow

parser = argparse.ArgumentParser()
parser.add_argument("--ckpt", required=True)
parser.add_argument("--out", default="clip")
parser.add_argument("--frames", type=int, default=8)
args = parser.parse_args()

trainer = trainer_from_checkpoint(args.ckpt)
size = trainer.config.resolution
rng = np.random.default_rng(3)
wide = make_content_image(rng, size + args.frames)[:size]
to_tensor = lambda a: torch.from_numpy(np.ascontiguousarray(a)).permute(2, 0, 1).float()

out = Path(args.out)
(out / "frames").mkdir(parents=True, exist_ok=True)
(out / "flows").mkdir(parents=True, exist_ok=True)
# Frame t shows columns [n-t, n-t+size): the scene moves right by one pixel per
# frame, so the backward flow from frame t to t-1 is u = -1.
frames = [to_tensor(wide[:, args.frames - t: args.frames - t + size]) for t in range(args.frames)]
flow = np.zeros((size, size, 2), np.float32)
flow[..., 0] = -1
for t in range(args.frames - 1):
    write_flow(out / "flows" / f"{t:03d}.uflo", flow)
flows = [read_flow(p) for p in sorted((out / "flows").iterdir())]

style = to_tensor(make_style_image("tide", rng, size))[None]
with torch.no_grad():
    code = trainer.encode(style)
    stylized = [trainer.gen(f[None], code)[0] for f in frames]
for t, img in enumerate(stylized):
    save_image(img, out / "frames" / f"{t:03d}.png")
noisy = [(f + 0.1 * torch.randn(f.shape, generator=torch.Generator().manual_seed(t))).clamp(0, 1)
         for t, f in enumerate(stylized)]

for name, clip in (("input", frames), ("stylized", stylized), ("stylized + noise", noisy)):
    printed = temporal_loss(clip, flows)
    conventional = temporal_loss(clip, flows, invert_mask=True)
    print(f"{name:17s} large-difference pixels: {printed:.4f}   small-difference pixels: {conventional:.4f}")
print(f"\nframes and flows in {out}; rerun the metric with\n"
      f"  ucast eval-temporal --frames {out / 'frames'} --flows {out / 'flows'}")
