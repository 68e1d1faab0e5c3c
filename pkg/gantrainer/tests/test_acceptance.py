"""Acceptance suite for the trainer: closed forms, gradients, trend, round trip."""

from __future__ import annotations

import subprocess
import time

import torch

from gantrainer.losses import generator_loss, gradient_penalty
from gantrainer.model import NOISE_DIM, Critic, Generator
from gantrainer.sample import sample
from gantrainer.train import TrainConfig, train

from conftest import make_labeled_corpus, microfid_cli


def test_gradient_penalty_closed_form():
    # Pixel-sum critic on 128x128: gradient norm 128 -> penalty (128-1)^2.
    class PixelSumCritic(torch.nn.Module):
        def forward(self, x):
            return x.flatten(1).sum(dim=1)

    gp = gradient_penalty(
        PixelSumCritic(), torch.rand(4, 1, 128, 128), torch.rand(4, 1, 128, 128)
    )
    assert abs(float(gp.detach()) - 16129.0) / 16129.0 <= 1e-6


def test_generator_gradient_finite_difference():
    # Analytic vs central-difference gradient of the generator loss with
    # respect to a probe parameter, 16x16 model, relative error < 1e-3.
    torch.manual_seed(0)
    generator = Generator(16).double().eval()
    critic = Critic(16).double().eval()
    noise = torch.randn(4, NOISE_DIM, dtype=torch.float64)
    t_idx = torch.tensor([0, 1, 0, 1])
    b_idx = torch.tensor([0, 1, 2, 1])

    def loss_value() -> torch.Tensor:
        fake = generator(noise, t_idx, b_idx)
        total, _ = generator_loss(critic, fake, t_idx, b_idx)
        return total

    # Probe the output conv weight at its largest-gradient element.
    param = generator.to_image.weight
    generator.zero_grad(set_to_none=True)
    loss_value().backward()
    grad = param.grad.detach().clone()
    flat_index = int(grad.abs().argmax())
    analytic = float(grad.flatten()[flat_index])

    h = 1e-6
    with torch.no_grad():
        base = param.flatten()[flat_index].item()
        param.flatten()[flat_index] = base + h
        plus = float(loss_value())
        param.flatten()[flat_index] = base - h
        minus = float(loss_value())
        param.flatten()[flat_index] = base
    numeric = (plus - minus) / (2 * h)
    rel_err = abs(numeric - analytic) / max(abs(analytic), 1e-12)
    assert rel_err < 1e-3, f"analytic {analytic} vs numeric {numeric} (rel {rel_err:.2e})"


def test_overfit_trend_on_eight_chips(corpus32, tmp_path):
    # 8 synthgen chips, 200 generator steps: the critic real-vs-fake score
    # gap at step 200 must drop below the step-10 baseline in >= 2 of 3
    # seeds, all inside a 5 minute budget.
    start = time.monotonic()
    successes = 0
    for seed in (0, 1, 2):
        config = TrainConfig(
            condition_name="feed_rate",
            image_size=32,
            batch_size=8,
            max_steps=200,
            seed=seed,
        )
        result = train(config, corpus32, tmp_path / f"ckpt{seed}")
        assert all(
            torch.isfinite(torch.tensor(row["critic_loss"]))
            and torch.isfinite(torch.tensor(row["generator_loss"]))
            for row in result.history
        )
        if result.gap_at(200) < result.gap_at(10):
            successes += 1
    elapsed = time.monotonic() - start
    assert successes >= 2, f"gap shrank in only {successes}/3 seeds"
    assert elapsed < 300.0, f"overfit runs took {elapsed:.0f}s"


def test_round_trip_through_analysis_pipeline(tmp_path):
    # sample() output must feed the analysis `report` CLI with exit status 0.
    corpus = make_labeled_corpus(
        tmp_path / "experimental", count=8, size=32, seed=4242,
        condition="feed_rate", bin_label="low",
    )
    config = TrainConfig(
        condition_name="feed_rate", image_size=32, batch_size=8, max_steps=20, seed=0
    )
    checkpoint = train(config, corpus, tmp_path / "ckpt").checkpoint_dir
    manifest = sample(checkpoint, "T5", "low", 8, seed=1, out_dir=tmp_path / "sampled")

    proc = subprocess.run(
        [
            microfid_cli(), "--seed", "3", "--out", str(tmp_path / "report"),
            "report",
            "--experimental", str(corpus),
            "--synthetic", str(manifest),
            "--chip-size", "32", "--stride", "32", "--sample-size", "8",
        ],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, f"report failed:\n{proc.stdout}\n{proc.stderr}"
    assert (tmp_path / "report" / "report.json").is_file()
