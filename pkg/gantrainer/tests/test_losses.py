"""Gradient penalty closed forms and loss assembly."""

from __future__ import annotations

import numpy as np
import pytest
import torch

from gantrainer.losses import critic_loss, generator_loss, gradient_penalty
from gantrainer.model import Critic


class PixelSumCritic(torch.nn.Module):
    """critic_score(x) = sum of pixels; gradient is all ones."""

    def forward(self, x):
        return x.flatten(1).sum(dim=1)


class ScaledMeanCritic(torch.nn.Module):
    """Linear score with gradient norm exactly `scale`."""

    def __init__(self, n_pixels, scale=1.0):
        super().__init__()
        self.n = n_pixels
        self.scale = scale

    def forward(self, x):
        # Per-pixel gradient scale / sqrt(n) -> norm == scale.
        return self.scale * x.flatten(1).sum(dim=1) / self.n**0.5


class TestGradientPenalty:
    def test_pixel_sum_closed_form(self):
        real = torch.rand(4, 1, 128, 128)
        fake = torch.rand(4, 1, 128, 128)
        gp = gradient_penalty(PixelSumCritic(), real, fake)
        assert abs(float(gp.detach()) - 16129.0) / 16129.0 <= 1e-6

    def test_unit_gradient_norm_is_zero(self):
        critic = ScaledMeanCritic(64 * 64, scale=1.0)
        gp = gradient_penalty(critic, torch.rand(3, 1, 64, 64), torch.rand(3, 1, 64, 64))
        assert float(gp.detach()) == 0.0

    def test_nonnegative_for_real_critic(self):
        critic = Critic(16)
        for _ in range(5):
            gp = gradient_penalty(critic, torch.rand(4, 1, 16, 16), torch.rand(4, 1, 16, 16))
            assert float(gp.detach()) >= 0.0

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            gradient_penalty(PixelSumCritic(), torch.rand(2, 1, 16, 16), torch.rand(3, 1, 16, 16))

    def test_quadratic_growth_in_critic_scale(self):
        # For gradient norm c the penalty is (c-1)^2: slope ~2 on log-log.
        scales = [16.0, 32.0, 64.0, 128.0]
        x = torch.rand(2, 1, 32, 32)
        y = torch.rand(2, 1, 32, 32)
        gps = [float(gradient_penalty(ScaledMeanCritic(32 * 32, c), x, y).detach()) for c in scales]
        slope = np.polyfit(np.log(scales), np.log(gps), 1)[0]
        assert abs(slope - 2.0) / 2.0 <= 0.10

    def test_deterministic_with_generator(self):
        critic = Critic(16)
        real, fake = torch.rand(4, 1, 16, 16), torch.rand(4, 1, 16, 16)
        a = gradient_penalty(critic, real, fake, torch.Generator().manual_seed(3)).detach()
        b = gradient_penalty(critic, real, fake, torch.Generator().manual_seed(3)).detach()
        assert float(a) == float(b)


class TestLossAssembly:
    def test_critic_loss_weights_terms(self):
        critic = Critic(16)
        real, fake = torch.rand(4, 1, 16, 16), torch.rand(4, 1, 16, 16)
        t = torch.tensor([0, 1, 0, 1])
        b = torch.tensor([0, 1, 2, 0])
        rng = torch.Generator().manual_seed(0)
        total, stats = critic_loss(critic, real, fake, t, b, generator_rng=rng)
        reconstructed = (
            stats["wasserstein"] + 10.0 * stats["gradient_penalty"] + 5.0 * stats["classification"]
        )
        assert float(total.detach()) == pytest.approx(reconstructed, rel=1e-6)

    def test_generator_loss_weights_terms(self):
        critic = Critic(16)
        fake = torch.rand(4, 1, 16, 16)
        t = torch.tensor([0, 0, 1, 1])
        b = torch.tensor([2, 1, 0, 1])
        total, stats = generator_loss(critic, fake, t, b)
        assert float(total.detach()) == pytest.approx(
            stats["adversarial"] + 5.0 * stats["classification"], rel=1e-6
        )

    def test_losses_finite(self):
        critic = Critic(16)
        for _ in range(5):
            total, _ = critic_loss(
                critic,
                torch.rand(4, 1, 16, 16),
                torch.rand(4, 1, 16, 16),
                torch.tensor([0, 1, 0, 1]),
                torch.tensor([0, 1, 2, 0]),
            )
            assert torch.isfinite(total)
