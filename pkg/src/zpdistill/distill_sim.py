"""Desk-scale synthetic distillation world.

The world is a single-token classification task. Each problem i has a unit
feature vector x_i, a correct token a_i, and a fixed teacher distribution
softmax(sharpness * e_{a_i} + jitter). The student is a shared linear
softmax model: logits_i = theta^T x_i with theta an F x V matrix, so
problems interact only through theta.

Difficulty is built into the features. Token prototypes mu_v are random
unit vectors, the initial student is the prototype classifier at the
teacher's own sharpness, theta_0 = sharpness * [mu_1 .. mu_V], and problem
features are x_i = unit(mu_{a_i} + eps_i * n_i) with n_i a random unit
direction. Growing eps_i attenuates the correct-answer logit under theta_0
from `sharpness` toward noise level, so sweeping eps_i across problems
makes initial pass rates span [0, 1]. The same mixing controls gradient
geometry: hopeless problems are noise-directional (incoherent gradients),
mastered ones start matched to the teacher and differ only through
per-problem jitter (dispersed small gradients), and mid-band problems
share the coherent prototype-alignment signal. _TEACHER_JITTER and the
anchor difficulty range were tuned once against the default desk
configuration and are frozen.

Anchor inputs are generated the same way (disjoint streams, easier range)
and their targets are defined as the initial student's own distributions,
so retention KL is exactly 0 before training and measures pure drift.

Determinism: every random draw comes from a counter-based stream keyed by
(seed, purpose, step, problem_id), so results do not depend on evaluation
order and identical configs replay bit-for-bit. Rollouts for weighting,
telemetry, and SNR measurement use distinct purpose labels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, DomainError
from .kernel import KernelParams, WeightVector, beta_weight, normalize_weights
from .numerics import log_softmax, stream
from .passrate import (
    THREE_BIN_EDGES,
    PassRate,
    RolloutRecord,
    estimate_pass_rate,
    hard_filter,
    histogram,
)
from .snr_profile import GradientRecord

__all__ = [
    "SimConfig",
    "SimWorld",
    "SimMetrics",
    "CheckpointRow",
    "build_world",
    "run_rollouts",
    "forward_kl",
    "reverse_kl",
    "train",
    "measure_snr",
    "retention",
]

_TEACHER_JITTER = 1.5
# Anchors draw difficulties from the easy quarter of the sweep: retention
# is meant to probe confidently-held prior behavior.
_ANCHOR_DIFFICULTY_FRACTION = 0.25

_SCHEMES = ("beta", "hard", "unweighted")
_DIRECTIONS = ("forward", "reverse", "two_stage")
_STAGE_DIRECTIONS = ("forward", "reverse")


@dataclass(frozen=True)
class SimConfig:
    """Configuration of one simulated distillation run."""

    num_problems: int = 200
    num_anchors: int = 50
    feature_dim: int = 16
    vocab_size: int = 16
    difficulty_spread: float = 7.0
    teacher_sharpness: float = 8.0
    rollout_count: int = 8
    rollout_temperature: float = 1.0
    scheme: str = "beta"
    alpha: float = 1.0
    beta: float = 1.0
    filter_lo: float = 0.2
    filter_hi: float = 0.8
    weight_floor: float = 0.0
    loss_direction: str = "forward"
    stage1_fraction: float = 0.5
    learning_rate: float = 6.0
    steps: int = 60
    batch_size: int | None = None
    reverse_kl_samples: int = 0
    recompute_interval: int | None = None
    seed: int = 7
    eval_interval: int = 20

    def __post_init__(self) -> None:
        counts = {
            "num_problems": self.num_problems,
            "num_anchors": self.num_anchors,
            "feature_dim": self.feature_dim,
            "rollout_count": self.rollout_count,
            "steps": self.steps,
            "eval_interval": self.eval_interval,
        }
        for key, value in counts.items():
            if not isinstance(value, int) or value < 1:
                raise ConfigError(f"{key} must be an integer >= 1, got {value!r}")
        if not isinstance(self.vocab_size, int) or self.vocab_size < 2:
            raise ConfigError(f"vocab_size must be an integer >= 2, got {self.vocab_size!r}")
        if not math.isfinite(self.difficulty_spread) or self.difficulty_spread < 0.0:
            raise ConfigError(
                f"difficulty_spread must be >= 0, got {self.difficulty_spread!r}"
            )
        if not self.teacher_sharpness > 0.0:
            raise ConfigError(
                f"teacher_sharpness must be > 0, got {self.teacher_sharpness!r}"
            )
        if not self.rollout_temperature > 0.0:
            raise ConfigError(
                f"rollout_temperature must be > 0, got {self.rollout_temperature!r}"
            )
        if self.scheme not in _SCHEMES:
            raise ConfigError(f"scheme must be one of {_SCHEMES}, got {self.scheme!r}")
        if self.scheme == "beta":
            if self.alpha < 0.0 or self.beta < 0.0:
                raise ConfigError(
                    f"alpha and beta must be >= 0, got ({self.alpha}, {self.beta})"
                )
        if self.scheme == "hard":
            if not (0.0 <= self.filter_lo <= self.filter_hi <= 1.0):
                raise ConfigError(
                    "filter_lo/filter_hi must satisfy 0 <= lo <= hi <= 1, got "
                    f"({self.filter_lo}, {self.filter_hi})"
                )
        if self.weight_floor < 0.0:
            raise ConfigError(f"weight_floor must be >= 0, got {self.weight_floor!r}")
        if self.loss_direction not in _DIRECTIONS:
            raise ConfigError(
                f"loss_direction must be one of {_DIRECTIONS}, got {self.loss_direction!r}"
            )
        if not 0.0 < self.stage1_fraction < 1.0:
            raise ConfigError(
                f"stage1_fraction must lie in (0,1), got {self.stage1_fraction!r}"
            )
        # learning_rate 0 is allowed: a no-op run is a useful control.
        if not math.isfinite(self.learning_rate) or self.learning_rate < 0.0:
            raise ConfigError(
                f"learning_rate must be finite and >= 0, got {self.learning_rate!r}"
            )
        if self.batch_size is not None:
            if not isinstance(self.batch_size, int) or not (
                1 <= self.batch_size <= self.num_problems
            ):
                raise ConfigError(
                    f"batch_size must be in [1, num_problems], got {self.batch_size!r}"
                )
        if self.reverse_kl_samples < 0:
            raise ConfigError(
                f"reverse_kl_samples must be >= 0, got {self.reverse_kl_samples!r}"
            )
        if self.recompute_interval is not None and (
            not isinstance(self.recompute_interval, int) or self.recompute_interval < 1
        ):
            raise ConfigError(
                f"recompute_interval must be a positive integer or none, "
                f"got {self.recompute_interval!r}"
            )
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be a 64-bit nonnegative integer, got {self.seed!r}")


@dataclass
class SimWorld:
    """Mutable world state: fixed data plus the trainable student matrix."""

    config: SimConfig
    problem_ids: tuple[str, ...]
    features: np.ndarray  # (N, F), unit rows
    answers: np.ndarray  # (N,), int tokens
    teacher_logits: np.ndarray  # (N, V)
    anchor_features: np.ndarray  # (M, F)
    anchor_log_targets: np.ndarray  # (M, V)
    theta: np.ndarray  # (F, V)
    step: int = 0

    def student_logits(self, features: np.ndarray | None = None) -> np.ndarray:
        x = self.features if features is None else features
        return x @ self.theta

    def teacher_log_probs(self) -> np.ndarray:
        return log_softmax(self.teacher_logits, axis=1)


@dataclass(frozen=True)
class CheckpointRow:
    step: int
    stage: str
    loss: float
    train_acc: float
    retention_kl: float
    frac_low: float
    frac_med: float
    frac_high: float
    mean_p: float


@dataclass(frozen=True)
class SimMetrics:
    rows: tuple[CheckpointRow, ...]
    recompute_steps: tuple[int, ...]
    stage_switch_step: int | None
    gradient_dumps: dict[int, tuple[GradientRecord, ...]] = field(default_factory=dict)


def _unit_rows(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _mixture_features(
    prototypes: np.ndarray,
    answers: np.ndarray,
    eps: np.ndarray,
    noise_gen: np.random.Generator,
) -> np.ndarray:
    feature_dim = prototypes.shape[0]
    noise = _unit_rows(noise_gen.standard_normal((answers.size, feature_dim)))
    mixed = prototypes.T[answers] + eps[:, None] * noise
    return _unit_rows(mixed)


def build_world(config: SimConfig) -> SimWorld:
    """Deterministic world construction from the config seed."""
    n, m = config.num_problems, config.num_anchors
    f, v = config.feature_dim, config.vocab_size
    seed = config.seed

    proto_gen = stream(seed, "proto")
    prototypes = _unit_rows(proto_gen.standard_normal((v, f))).T  # (F, V)

    answers = stream(seed, "answers").integers(0, v, size=n)
    # Stratified difficulty sweep with jitter: eps_i covers [0, spread].
    jitter = stream(seed, "difficulty").random(n)
    eps = config.difficulty_spread * (np.arange(n) + jitter) / n
    features = _mixture_features(prototypes, answers, eps, stream(seed, "noise"))

    teacher_noise = stream(seed, "teacher").standard_normal((n, v))
    teacher_logits = _TEACHER_JITTER * teacher_noise
    teacher_logits[np.arange(n), answers] += config.teacher_sharpness

    # Initial student: prototype classifier at the teacher's own sharpness,
    # so the easiest problems start already matched to the teacher and the
    # high-p gradient mean collapses to per-problem jitter.
    theta = config.teacher_sharpness * prototypes.copy()

    anchor_answers = stream(seed, "anchor_answers").integers(0, v, size=m)
    anchor_jitter = stream(seed, "anchor_difficulty").random(m)
    anchor_eps = (
        _ANCHOR_DIFFICULTY_FRACTION
        * config.difficulty_spread
        * (np.arange(m) + anchor_jitter)
        / m
    )
    anchor_features = _mixture_features(
        prototypes, anchor_answers, anchor_eps, stream(seed, "anchor_noise")
    )
    anchor_log_targets = log_softmax(anchor_features @ theta, axis=1)

    return SimWorld(
        config=config,
        problem_ids=tuple(f"p{i:04d}" for i in range(n)),
        features=features,
        answers=answers,
        teacher_logits=teacher_logits,
        anchor_features=anchor_features,
        anchor_log_targets=anchor_log_targets,
        theta=theta,
        step=0,
    )


def _sample_pass_rates(
    world: SimWorld, k: int, purpose: str
) -> list[RolloutRecord]:
    if k < 1:
        raise DomainError(f"rollout count must be >= 1, got {k}")
    logits = world.student_logits() / world.config.rollout_temperature
    probs = np.exp(log_softmax(logits, axis=1))
    records = []
    for i, pid in enumerate(world.problem_ids):
        gen = stream(world.config.seed, purpose, world.step, pid)
        u = gen.random(k)
        cdf = np.cumsum(probs[i])
        tokens = np.minimum(
            np.searchsorted(cdf, u, side="right"), world.config.vocab_size - 1
        )
        outcomes = tuple(bool(t == world.answers[i]) for t in tokens)
        records.append(RolloutRecord(problem_id=pid, outcomes=outcomes))
    return records


def run_rollouts(world: SimWorld, K: int) -> list[RolloutRecord]:
    """K rollouts per problem at the current step (weighting stream)."""
    return _sample_pass_rates(world, K, "rollout")


def _losses_and_diffs(
    world: SimWorld, direction: str
) -> tuple[np.ndarray, np.ndarray]:
    """Per-problem losses and logit-space gradient rows for one direction."""
    log_ps = log_softmax(world.student_logits(), axis=1)
    ps = np.exp(log_ps)
    log_pt = world.teacher_log_probs()
    if direction == "forward":
        pt = np.exp(log_pt)
        losses = np.sum(pt * (log_pt - log_ps), axis=1)
        diffs = ps - pt
    elif direction == "reverse":
        ratio = log_ps - log_pt
        losses = np.sum(ps * ratio, axis=1)
        diffs = ps * (ratio - losses[:, None])
    else:
        raise DomainError(f"unknown loss direction {direction!r}")
    return losses, diffs


def _single_loss_grad(world: SimWorld, problem_index: int, direction: str):
    n = world.config.num_problems
    if not 0 <= problem_index < n:
        raise DomainError(f"problem_index must lie in [0, {n}), got {problem_index}")
    losses, diffs = _losses_and_diffs(world, direction)
    grad = np.outer(world.features[problem_index], diffs[problem_index])
    return float(losses[problem_index]), grad


def forward_kl(world: SimWorld, problem_index: int) -> tuple[float, np.ndarray]:
    """KL(teacher || student) for one problem and its exact theta gradient."""
    return _single_loss_grad(world, problem_index, "forward")


def reverse_kl(world: SimWorld, problem_index: int) -> tuple[float, np.ndarray]:
    """KL(student || teacher) for one problem and its exact theta gradient."""
    return _single_loss_grad(world, problem_index, "reverse")


def _sampled_reverse_diffs(world: SimWorld, n_samples: int) -> np.ndarray:
    """Score-function estimate of the reverse-KL logit gradient rows."""
    log_ps = log_softmax(world.student_logits(), axis=1)
    ps = np.exp(log_ps)
    log_pt = world.teacher_log_probs()
    ratio = log_ps - log_pt
    diffs = np.zeros_like(ps)
    for i, pid in enumerate(world.problem_ids):
        gen = stream(world.config.seed, "revkl", world.step, pid)
        u = gen.random(n_samples)
        cdf = np.cumsum(ps[i])
        tokens = np.minimum(
            np.searchsorted(cdf, u, side="right"), world.config.vocab_size - 1
        )
        acc = np.zeros(ps.shape[1])
        for t in tokens:
            one_hot = np.zeros(ps.shape[1])
            one_hot[t] = 1.0
            acc += ratio[i, t] * (one_hot - ps[i])
        diffs[i] = acc / n_samples
    return diffs


def _weight_vector(config: SimConfig, records: Sequence[RolloutRecord]) -> WeightVector:
    raw: list[tuple[str, float]] = []
    if config.scheme == "beta":
        params = KernelParams(config.alpha, config.beta)
        for rec in records:
            pr = estimate_pass_rate(rec)
            raw.append((rec.problem_id, max(beta_weight(pr.p, params), config.weight_floor)))
    elif config.scheme == "hard":
        for rec in records:
            pr = estimate_pass_rate(rec)
            keep = hard_filter(pr, config.filter_lo, config.filter_hi)
            raw.append((rec.problem_id, 1.0 if keep else max(0.0, config.weight_floor)))
    else:
        raw = [(rec.problem_id, 1.0) for rec in records]
    return normalize_weights(raw)


def _direction_at(config: SimConfig, local_step: int, switch_step: int) -> str:
    if config.loss_direction != "two_stage":
        return config.loss_direction
    return "forward" if local_step < switch_step else "reverse"


def _weighted_loss(world: SimWorld, weights: np.ndarray, direction: str) -> float:
    losses, _ = _losses_and_diffs(world, direction)
    return float(np.mean(weights * losses))


def _eval_checkpoint(
    world: SimWorld,
    weights: np.ndarray,
    direction: str,
    absolute_step: int,
) -> CheckpointRow:
    records = _sample_pass_rates(world, world.config.rollout_count, "eval")
    rates = [estimate_pass_rate(r) for r in records]
    hist = histogram(rates, THREE_BIN_EDGES)
    train_acc = float(np.mean([r.p for r in rates]))
    return CheckpointRow(
        step=absolute_step,
        stage=direction,
        loss=_weighted_loss(world, weights, direction),
        train_acc=train_acc,
        retention_kl=retention(world),
        frac_low=hist.fractions[0],
        frac_med=hist.fractions[1],
        frac_high=hist.fractions[2],
        mean_p=hist.mean_p,
    )


def train(
    world: SimWorld,
    config: SimConfig,
    snr_dump_steps: Iterable[int] = (),
) -> SimMetrics:
    """Run the weighting-then-descend loop and return checkpoint telemetry.

    Pass rates and weights are computed once at the start, again at the
    two-stage switch, and every recompute_interval steps when configured.
    Checkpoints (every eval_interval steps, plus step 0 and the final step)
    record state before that step's parameter update. theta and the step
    counter are updated in place on the passed world.
    """
    n = config.num_problems
    t_total = config.steps
    switch_step = 0
    if config.loss_direction == "two_stage":
        switch_step = int(round(config.stage1_fraction * t_total))
        switch_step = min(max(switch_step, 1), t_total - 1) if t_total >= 2 else 1

    dump_steps = sorted(set(int(s) for s in snr_dump_steps))
    for s in dump_steps:
        if not 0 <= s <= t_total:
            raise DomainError(f"snr dump step {s} outside [0, {t_total}]")

    base = world.step
    weights_vec: WeightVector | None = None
    weights = np.zeros(n)
    recompute_steps: list[int] = []
    rows: list[CheckpointRow] = []
    dumps: dict[int, tuple[GradientRecord, ...]] = {}

    for local in range(t_total + 1):
        direction = _direction_at(config, min(local, t_total - 1), switch_step)
        needs_recompute = (
            weights_vec is None
            or (
                config.loss_direction == "two_stage"
                and local == switch_step
                and local < t_total
            )
            or (
                config.recompute_interval is not None
                and local > 0
                and local < t_total
                and local % config.recompute_interval == 0
            )
        )
        if needs_recompute:
            records = run_rollouts(world, config.rollout_count)
            weights_vec = _weight_vector(config, records)
            weights = weights_vec.normalized
            recompute_steps.append(world.step)

        if local % config.eval_interval == 0 or local == t_total:
            rows.append(_eval_checkpoint(world, weights, direction, world.step))
        if local in dump_steps:
            dumps[local] = tuple(measure_snr(world, direction))

        if local == t_total:
            break

        # Parameter update for step `local`.
        if direction == "reverse" and config.reverse_kl_samples > 0:
            diffs = _sampled_reverse_diffs(world, config.reverse_kl_samples)
        else:
            _, diffs = _losses_and_diffs(world, direction)

        if config.batch_size is None:
            grad = world.features.T @ ((weights[:, None] / n) * diffs)
        else:
            gen = stream(config.seed, "batch", world.step)
            batch = gen.choice(n, size=config.batch_size, replace=False)
            scale = weights[batch, None] / config.batch_size
            grad = world.features[batch].T @ (scale * diffs[batch])

        world.theta = world.theta - config.learning_rate * grad
        world.step = base + local + 1

    return SimMetrics(
        rows=tuple(rows),
        recompute_steps=tuple(recompute_steps),
        stage_switch_step=(
            base + switch_step if config.loss_direction == "two_stage" else None
        ),
        gradient_dumps=dumps,
    )


def measure_snr(world: SimWorld, loss_direction: str) -> list[GradientRecord]:
    """One flattened gradient per problem plus fresh pass-rate estimates."""
    if loss_direction not in _STAGE_DIRECTIONS:
        raise DomainError(
            f"loss_direction must be one of {_STAGE_DIRECTIONS}, got {loss_direction!r}"
        )
    records = _sample_pass_rates(world, world.config.rollout_count, "snr")
    rates = [estimate_pass_rate(r) for r in records]
    _, diffs = _losses_and_diffs(world, loss_direction)
    grads = world.features[:, :, None] * diffs[:, None, :]
    out = []
    for i, pid in enumerate(world.problem_ids):
        out.append(
            GradientRecord(
                problem_id=pid,
                pass_rate=rates[i],
                gradient=tuple(grads[i].ravel()),
            )
        )
    return out


def retention(world: SimWorld) -> float:
    """Mean KL from the stored anchor targets to the current student."""
    if world.config.num_anchors < 1:
        raise DomainError("retention requires at least one anchor")
    log_current = log_softmax(world.anchor_features @ world.theta, axis=1)
    targets = np.exp(world.anchor_log_targets)
    kl = np.sum(targets * (world.anchor_log_targets - log_current), axis=1)
    return float(np.mean(kl))
