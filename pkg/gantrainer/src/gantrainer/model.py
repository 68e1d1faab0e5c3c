"""Conditional generator and multi-head critic (ACWGAN-GP).

The generator concatenates a 100-dim standard-normal noise vector with two
learned 20-dim embeddings (temper: 2 rows, condition bin: 3 rows) into a
140-dim input and upsamples from an 8x8 base grid by strided transposed
convolutions, one block per factor of two; at the 128x128 working size that
is the 4-block stack. Output passes through a sigmoid so samples live in
[0, 1] like the chip corpus.

The critic is the mirrored strided-conv trunk with three heads on the
shared features: a scalar authenticity score and temper / bin logits. No
batch norm in the critic: the gradient penalty needs per-sample gradients.
"""

from __future__ import annotations

from typing import NamedTuple

import torch
from torch import nn

NOISE_DIM = 100
EMBED_DIM = 20
N_TEMPERS = 2
N_BINS = 3
BASE_GRID = 8


class CriticOutput(NamedTuple):
    critic_score: torch.Tensor  # (batch,)
    temper_logits: torch.Tensor  # (batch, 2)
    bin_logits: torch.Tensor  # (batch, 3)


def _n_blocks(image_size: int) -> int:
    n = 0
    size = BASE_GRID
    while size < image_size:
        size *= 2
        n += 1
    if size != image_size:
        raise ValueError(f"image_size must be {BASE_GRID} * 2^k, got {image_size}")
    return n


def _widths(n_blocks: int, cap: int = 512) -> list[int]:
    return [min(cap, 64 * 2**i) for i in reversed(range(max(n_blocks, 1)))]


class Generator(nn.Module):
    def __init__(self, image_size: int = 128):
        super().__init__()
        self.image_size = image_size
        self.temper_embedding = nn.Embedding(N_TEMPERS, EMBED_DIM)
        self.bin_embedding = nn.Embedding(N_BINS, EMBED_DIM)
        n_blocks = _n_blocks(image_size)
        widths = _widths(n_blocks)
        self.project = nn.Linear(NOISE_DIM + 2 * EMBED_DIM, widths[0] * BASE_GRID * BASE_GRID)
        blocks = []
        for i in range(n_blocks):
            cin = widths[i]
            cout = widths[i + 1] if i + 1 < n_blocks else widths[-1]
            blocks += [
                nn.ConvTranspose2d(cin, cout, 4, stride=2, padding=1),
                nn.BatchNorm2d(cout),
                nn.ReLU(inplace=True),
            ]
        self.blocks = nn.Sequential(*blocks)
        self.to_image = nn.Conv2d(widths[-1], 1, 3, padding=1)
        self._base_channels = widths[0]

    def forward(self, noise, temper_idx, bin_idx):
        z = torch.cat(
            [noise, self.temper_embedding(temper_idx), self.bin_embedding(bin_idx)], dim=1
        )
        x = self.project(z).view(-1, self._base_channels, BASE_GRID, BASE_GRID)
        x = self.blocks(x)
        return torch.sigmoid(self.to_image(x))


class Critic(nn.Module):
    def __init__(self, image_size: int = 128):
        super().__init__()
        self.image_size = image_size
        n_blocks = _n_blocks(image_size)
        widths = list(reversed(_widths(n_blocks)))
        layers = [nn.Conv2d(1, widths[0], 4, stride=2, padding=1), nn.LeakyReLU(0.2, inplace=True)]
        for i in range(1, n_blocks):
            layers += [
                nn.Conv2d(widths[i - 1], widths[i], 4, stride=2, padding=1),
                nn.GroupNorm(1, widths[i]),
                nn.LeakyReLU(0.2, inplace=True),
            ]
        self.trunk = nn.Sequential(*layers)
        feat = widths[-1] * BASE_GRID * BASE_GRID
        self.score_head = nn.Linear(feat, 1)
        self.temper_head = nn.Linear(feat, N_TEMPERS)
        self.bin_head = nn.Linear(feat, N_BINS)

    def forward(self, images) -> CriticOutput:
        h = self.trunk(images).flatten(1)
        return CriticOutput(
            critic_score=self.score_head(h).squeeze(1),
            temper_logits=self.temper_head(h),
            bin_logits=self.bin_head(h),
        )
