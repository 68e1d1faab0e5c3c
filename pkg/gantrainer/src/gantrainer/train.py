"""Training loop: alternating critic/generator updates with checkpointing.

One logical step is ``critic_steps_per_gen_step`` critic updates followed by
a single generator update; the per-step critic real-vs-fake score gap is
logged so desk-scale smoke tests can assert a learning trend. Checkpoints
are a directory holding config, weights, and the training history, written
atomically (write to a temp name, then rename).
"""

from __future__ import annotations

import dataclasses
import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import torch
from torch.optim import AdamW

from .data import load_corpus, load_training_records
from .losses import critic_loss, generator_loss
from .model import NOISE_DIM, Critic, Generator

__all__ = ["TrainConfig", "TrainResult", "train", "save_checkpoint", "load_generator"]


CONDITION_NAMES = ("feed_rate", "uts")


@dataclass(frozen=True)
class TrainConfig:
    condition_name: str = "feed_rate"
    image_size: int = 128
    epochs: int = 400
    batch_size: int = 64
    learning_rate: float = 1e-4
    betas: tuple[float, float] = (0.0, 0.9)
    weight_decay: float = 0.01
    gp_weight: float = 10.0
    cls_weight: float = 5.0
    critic_steps_per_gen_step: int = 5
    max_steps: int | None = None  # generator steps; overrides epochs when set
    seed: int = 0

    def __post_init__(self):
        if self.condition_name not in CONDITION_NAMES:
            raise ValueError(
                f"one model per conditioning variable: expected one of "
                f"{CONDITION_NAMES}, got {self.condition_name!r}"
            )

    def to_json(self) -> dict:
        d = dataclasses.asdict(self)
        d["betas"] = list(self.betas)
        return d

    @classmethod
    def from_json(cls, obj: dict) -> "TrainConfig":
        obj = dict(obj)
        obj["betas"] = tuple(obj.get("betas", (0.0, 0.9)))
        if obj.get("max_steps") is not None:
            obj["max_steps"] = int(obj["max_steps"])
        return cls(**obj)


@dataclass
class TrainResult:
    checkpoint_dir: Path
    history: list[dict]

    def gap_at(self, step: int) -> float:
        """Critic real-vs-fake score gap logged at a generator step."""
        for row in self.history:
            if row["step"] == step:
                return row["score_gap"]
        raise KeyError(f"no history entry for step {step}")


def train(config: TrainConfig, manifest_path: str | Path, out_dir: str | Path) -> TrainResult:
    """Train one conditional GAN on a labeled chip manifest."""
    records = load_training_records(manifest_path, config.condition_name)
    images, tempers, bins = load_corpus(records, config.image_size)

    torch.manual_seed(config.seed)
    generator = Generator(config.image_size)
    critic = Critic(config.image_size)
    opt_g = AdamW(
        generator.parameters(),
        lr=config.learning_rate,
        betas=config.betas,
        weight_decay=config.weight_decay,
    )
    opt_c = AdamW(
        critic.parameters(),
        lr=config.learning_rate,
        betas=config.betas,
        weight_decay=config.weight_decay,
    )
    rng = torch.Generator().manual_seed(config.seed)

    n = len(records)
    batch = min(config.batch_size, n)
    steps_per_epoch = max(1, n // batch)
    total_steps = (
        config.max_steps if config.max_steps is not None else config.epochs * steps_per_epoch
    )

    def draw_batch():
        idx = torch.randint(0, n, (batch,), generator=rng)
        return images[idx], tempers[idx], bins[idx]

    def fake_like(temper_idx, bin_idx):
        noise = torch.randn(len(temper_idx), NOISE_DIM, generator=rng)
        return generator(noise, temper_idx, bin_idx)

    history: list[dict] = []
    for step in range(1, total_steps + 1):
        last_critic_stats: dict = {}
        for _ in range(config.critic_steps_per_gen_step):
            real, t_idx, b_idx = draw_batch()
            with torch.no_grad():
                fake = fake_like(t_idx, b_idx)
            loss_c, last_critic_stats = critic_loss(
                critic,
                real,
                fake,
                t_idx,
                b_idx,
                gp_weight=config.gp_weight,
                cls_weight=config.cls_weight,
                generator_rng=rng,
            )
            opt_c.zero_grad(set_to_none=True)
            loss_c.backward()
            opt_c.step()

        _, t_idx, b_idx = draw_batch()
        fake = fake_like(t_idx, b_idx)
        loss_g, gen_stats = generator_loss(
            critic, fake, t_idx, b_idx, cls_weight=config.cls_weight
        )
        opt_g.zero_grad(set_to_none=True)
        loss_g.backward()
        opt_g.step()

        history.append(
            {
                "step": step,
                "critic_loss": float(loss_c.detach()),
                "generator_loss": float(loss_g.detach()),
                "real_score": last_critic_stats["real_score"],
                "fake_score": last_critic_stats["fake_score"],
                "score_gap": last_critic_stats["real_score"] - last_critic_stats["fake_score"],
                "gradient_penalty": last_critic_stats["gradient_penalty"],
            }
        )

    checkpoint_dir = save_checkpoint(Path(out_dir), config, generator, critic, history)
    return TrainResult(checkpoint_dir=checkpoint_dir, history=history)


def save_checkpoint(
    out_dir: Path, config: TrainConfig, generator: Generator, critic: Critic, history
) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    _atomic_write_text(out_dir / "config.json", json.dumps(config.to_json(), indent=2) + "\n")
    _atomic_write_text(out_dir / "history.json", json.dumps(history) + "\n")
    _atomic_save(
        {"generator": generator.state_dict(), "critic": critic.state_dict()},
        out_dir / "weights.pt",
    )
    return out_dir


def load_generator(checkpoint_dir: str | Path) -> tuple[Generator, TrainConfig]:
    checkpoint_dir = Path(checkpoint_dir)
    config = TrainConfig.from_json(
        json.loads((checkpoint_dir / "config.json").read_text(encoding="utf-8"))
    )
    generator = Generator(config.image_size)
    state = torch.load(checkpoint_dir / "weights.pt", map_location="cpu", weights_only=True)
    generator.load_state_dict(state["generator"])
    generator.eval()
    return generator, config


def _atomic_write_text(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _atomic_save(obj, path: Path) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name)
    os.close(fd)
    try:
        torch.save(obj, tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
