"""WGAN-GP loss terms with auxiliary classification heads."""

from __future__ import annotations

import torch
import torch.nn.functional as F


def _score_of(critic, images) -> torch.Tensor:
    out = critic(images)
    return out.critic_score if hasattr(out, "critic_score") else out


def gradient_penalty(critic, real_batch, fake_batch, generator_rng=None) -> torch.Tensor:
    """Mean squared deviation of the critic-score gradient norm from 1.

    Evaluated at per-sample uniform interpolates between real and fake
    batches, as in the WGAN-GP formulation.
    """
    if real_batch.shape != fake_batch.shape:
        raise ValueError(
            f"batch shapes differ: {tuple(real_batch.shape)} vs {tuple(fake_batch.shape)}"
        )
    n = real_batch.shape[0]
    eps_shape = (n,) + (1,) * (real_batch.dim() - 1)
    if generator_rng is None:
        eps = torch.rand(eps_shape, dtype=real_batch.dtype, device=real_batch.device)
    else:
        eps = torch.rand(
            eps_shape, dtype=real_batch.dtype, device=real_batch.device, generator=generator_rng
        )
    interpolates = (eps * real_batch + (1.0 - eps) * fake_batch).requires_grad_(True)
    scores = _score_of(critic, interpolates)
    grads = torch.autograd.grad(
        scores.sum(), interpolates, create_graph=True, retain_graph=True
    )[0]
    norms = grads.flatten(1).norm(2, dim=1)
    return ((norms - 1.0) ** 2).mean()


def critic_loss(
    critic,
    real_batch,
    fake_batch,
    temper_idx,
    bin_idx,
    gp_weight: float = 10.0,
    cls_weight: float = 5.0,
    generator_rng=None,
):
    """Wasserstein critic loss + weighted GP + classification on real samples."""
    real_out = critic(real_batch)
    fake_out = critic(fake_batch)
    wasserstein = fake_out.critic_score.mean() - real_out.critic_score.mean()
    gp = gradient_penalty(critic, real_batch, fake_batch, generator_rng)
    cls = F.cross_entropy(real_out.temper_logits, temper_idx) + F.cross_entropy(
        real_out.bin_logits, bin_idx
    )
    total = wasserstein + gp_weight * gp + cls_weight * cls
    return total, {
        "wasserstein": float(wasserstein.detach()),
        "gradient_penalty": float(gp.detach()),
        "classification": float(cls.detach()),
        "real_score": float(real_out.critic_score.mean().detach()),
        "fake_score": float(fake_out.critic_score.mean().detach()),
    }


def generator_loss(critic, fake_batch, temper_idx, bin_idx, cls_weight: float = 5.0):
    """Adversarial score plus classification of fakes against their conditioning."""
    out = critic(fake_batch)
    adversarial = -out.critic_score.mean()
    cls = F.cross_entropy(out.temper_logits, temper_idx) + F.cross_entropy(
        out.bin_logits, bin_idx
    )
    total = adversarial + cls_weight * cls
    return total, {
        "adversarial": float(adversarial.detach()),
        "classification": float(cls.detach()),
    }
