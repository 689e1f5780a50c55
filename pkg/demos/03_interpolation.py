"""Blend two styles by mixing their conditioning parameters.

Loads a checkpoint (for example the one written by 02_desk_training.py),
stylizes one content image with weights (1-a, a) for a in 0..1, and saves the
results side by side as a strip. The a=0 and a=1 ends equal plain
single-style stylization exactly.

    python3 demos/03_interpolation.py --ckpt runs/desk/ckpt_2000.bin --out runs/strip.png
"""
import argparse

import numpy as np
import torch

from ucast.backbone import interpolate_styles
from ucast.imageio import save_image
from ucast.synthetic import make_content_image, make_style_image
from ucast.trainer import trainer_from_checkpoint

parser = argparse.ArgumentParser()
parser.add_argument("--ckpt", required=True)
parser.add_argument("--out", default="strip.png")
parser.add_argument("--steps", type=int, default=5)
args = parser.parse_args()

trainer = trainer_from_checkpoint(args.ckpt)
size = trainer.config.resolution
rng = np.random.default_rng(7)
to_tensor = lambda a: torch.from_numpy(a).permute(2, 0, 1).float()[None]
content = to_tensor(make_content_image(rng, size))
styles = [to_tensor(make_style_image("ember", rng, size)), to_tensor(make_style_image("tide", rng, size))]

tiles = []
with torch.no_grad():
    for a in np.linspace(0, 1, args.steps):
        tiles.append(interpolate_styles(content, styles, [1 - a, a], trainer.gen, trainer.style_encoder))
    plain = trainer.stylize(content, styles[0])
print("a=0 equals plain stylization:", torch.equal(tiles[0], plain))

strip = torch.cat([styles[0], *tiles, styles[1]], dim=-1)
save_image(strip[0], args.out)
print(f"wrote {args.out}: ember reference | {args.steps} blends | tide reference")
