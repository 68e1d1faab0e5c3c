"""Architecture contracts: embeddings, heads, shapes."""

from __future__ import annotations

import pytest
import torch

from gantrainer.model import Critic, CriticOutput, Generator


class TestGenerator:
    def test_embedding_tables_have_fixed_rows(self):
        g = Generator(32)
        assert g.temper_embedding.num_embeddings == 2
        assert g.bin_embedding.num_embeddings == 3
        assert g.temper_embedding.embedding_dim == 20
        assert g.bin_embedding.embedding_dim == 20

    def test_input_is_140_dimensional(self):
        assert Generator(32).project.in_features == 100 + 20 + 20

    def test_output_shape_and_range_at_128(self):
        g = Generator(128)
        with torch.no_grad():
            out = g(torch.randn(2, 100), torch.tensor([0, 1]), torch.tensor([0, 2]))
        assert out.shape == (2, 1, 128, 128)
        assert out.min() >= 0.0 and out.max() <= 1.0

    def test_output_shape_at_small_sizes(self):
        for size in (16, 32):
            g = Generator(size)
            with torch.no_grad():
                out = g(torch.randn(3, 100), torch.zeros(3, dtype=torch.long), torch.zeros(3, dtype=torch.long))
            assert out.shape == (3, 1, size, size)

    def test_invalid_size_rejected(self):
        with pytest.raises(ValueError):
            Generator(100)

    def test_conditioning_reaches_output(self):
        torch.manual_seed(0)
        g = Generator(16).eval()
        noise = torch.randn(1, 100)
        with torch.no_grad():
            a = g(noise, torch.tensor([0]), torch.tensor([0]))
            b = g(noise, torch.tensor([0]), torch.tensor([1]))
            c = g(noise, torch.tensor([1]), torch.tensor([0]))
        assert not torch.equal(a, b)
        assert not torch.equal(a, c)


class TestCritic:
    def test_three_heads_over_shared_trunk(self):
        c = Critic(32)
        out = c(torch.rand(5, 1, 32, 32))
        assert isinstance(out, CriticOutput)
        assert out.critic_score.shape == (5,)
        assert out.temper_logits.shape == (5, 2)
        assert out.bin_logits.shape == (5, 3)

    def test_no_batchnorm_in_critic(self):
        # Per-sample gradient penalty forbids cross-sample coupling.
        assert not any(
            isinstance(m, torch.nn.BatchNorm2d) for m in Critic(64).modules()
        )
