"""Clipped-surrogate policy optimization with Monte Carlo returns.

The objective is the clipped importance-weighted surrogate

    loss = -mean_b min(w_b * A_b, clip(w_b, 1-eps, 1+eps) * A_b)

with w the probability ratio of the current policy to the data-collecting
policy and A the discounted return-to-go of each step (no value baseline;
advantages are normalized per batch to zero mean and unit std before the
surrogate).  Gradients are hand-derived and validated against central
finite differences.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from ..env import NormalizationStats, state_vector
from .mlp import AdamOptimizer
from .policy import SquashedGaussianPolicy


def returns_to_go(rewards, gamma: float) -> np.ndarray:
    """Discounted suffix sums of one episode's rewards (backward recursion)."""
    r = np.asarray(rewards, dtype=float)
    if not np.all(np.isfinite(r)):
        raise ValueError("rewards must be finite")
    out = np.empty_like(r)
    acc = 0.0
    for t in range(len(r) - 1, -1, -1):
        acc = r[t] + gamma * acc
        out[t] = acc
    return out


def normalized_advantages(returns: np.ndarray, eps: float = 1e-8) -> np.ndarray:
    """Zero-mean unit-std rescaling of raw returns-to-go.

    A constant batch normalizes to all zeros (no preferred direction).
    """
    r = np.asarray(returns, dtype=float)
    std = r.std()
    if std < eps:
        return np.zeros_like(r)
    return (r - r.mean()) / (std + eps)


@dataclass
class RolloutBatch:
    """Flattened rollout data collected under a frozen policy.

    pre_squash holds the raw Gaussian samples, so the collecting policy's
    density can be re-evaluated exactly; old_log_prob was computed at
    collection time; returns are raw (unnormalized) returns-to-go.
    """

    obs: np.ndarray          # (B, obs_dim) normalized observations
    pre_squash: np.ndarray   # (B, n_regions)
    actions: np.ndarray      # (B, n_regions) squashed actions as executed
    old_log_prob: np.ndarray  # (B,)
    returns: np.ndarray      # (B,)

    def __post_init__(self) -> None:
        n = len(self.obs)
        if n == 0:
            raise ValueError("batch must be non-empty")
        for name in ("pre_squash", "actions", "old_log_prob", "returns"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} length differs from obs")
        if not np.all(np.isfinite(self.old_log_prob)):
            raise ValueError("old log-probabilities must be finite")

    def __len__(self) -> int:
        return len(self.obs)

    def subset(self, idx: np.ndarray) -> "RolloutBatch":
        return RolloutBatch(self.obs[idx], self.pre_squash[idx],
                            self.actions[idx], self.old_log_prob[idx],
                            self.returns[idx])


def importance_ratio(policy: SquashedGaussianPolicy, old_log_prob: float,
                     obs: np.ndarray, pre_squash: np.ndarray) -> float:
    """w = exp(log pi(a|s) - old_log_prob) for one rollout record.

    The action is identified by its pre-squash sample, so the density is
    evaluated at exactly the stored point.
    """
    logp = float(policy.log_prob(np.atleast_2d(obs), np.atleast_2d(pre_squash))[0])
    return math.exp(logp - float(old_log_prob))


def _surrogate_terms(policy: SquashedGaussianPolicy, batch: RolloutBatch,
                     epsilon: float, advantages: np.ndarray):
    """Shared forward computation for loss and gradients."""
    m, cache = policy.forward_mean(batch.obs)
    logp = policy.log_prob_from_mean(batch.pre_squash, m)
    ratio = np.exp(logp - batch.old_log_prob)
    clipped = np.clip(ratio, 1.0 - epsilon, 1.0 + epsilon)
    s_plain = ratio * advantages
    s_clip = clipped * advantages
    surrogate = np.minimum(s_plain, s_clip)
    loss = -float(surrogate.mean())
    return m, cache, logp, ratio, s_plain, s_clip, loss


def ppo_loss(batch: RolloutBatch, policy: SquashedGaussianPolicy,
             epsilon: float, advantages: np.ndarray | None = None) -> float:
    """Clipped-surrogate loss on a batch.

    advantages default to the per-batch normalization of batch.returns; pass
    them explicitly when minibatching so the normalization spans the full
    collection batch.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    adv = normalized_advantages(batch.returns) if advantages is None else np.asarray(advantages, dtype=float)
    *_, loss = _surrogate_terms(policy, batch, epsilon, adv)
    return loss


def ppo_loss_and_grads(batch: RolloutBatch, policy: SquashedGaussianPolicy,
                       epsilon: float,
                       advantages: np.ndarray | None = None
                       ) -> tuple[float, list[np.ndarray]]:
    """Loss plus analytic gradients in policy.param_arrays order.

    Per sample the surrogate is min(w*A, clip(w)*A); its derivative w.r.t.
    w is A on the unclipped branch and 0 once the clipped branch is strictly
    smaller (ties take the unclipped branch).  d w / d log pi = w, and the
    Gaussian head gives d log pi / d mean = z / sigma and
    d log pi / d log_std = z^2 - 1 with z the standardized residual.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    adv = normalized_advantages(batch.returns) if advantages is None else np.asarray(advantages, dtype=float)
    m, cache, logp, ratio, s_plain, s_clip, loss = _surrogate_terms(
        policy, batch, epsilon, adv)

    B = len(batch)
    dsurr_dratio = np.where(s_plain <= s_clip, adv, 0.0)
    dloss_dlogp = -(dsurr_dratio * ratio) / B

    sigma = np.exp(policy.log_std)
    z = (batch.pre_squash - m) / sigma
    # log pi depends on the mean through the Gaussian term only
    grad_mean = dloss_dlogp[:, None] * (z / sigma)
    grad_log_std = (dloss_dlogp[:, None] * (z ** 2 - 1.0)).sum(axis=0)

    grad_w, grad_b = policy.net.backward(cache, grad_mean)
    grads: list[np.ndarray] = []
    for gw, gb in zip(grad_w, grad_b):
        grads.extend((gw, gb))
    grads.append(grad_log_std)
    return loss, grads


def finite_difference_gradient(f, x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central finite differences of a scalar function at x."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for k in range(x.size):
        bump = np.zeros_like(x)
        bump[k] = h
        g[k] = (f(x + bump) - f(x - bump)) / (2.0 * h)
    return g


GRADIENT_CHECK_MAX_PARAMS = 100


def gradient_check(policy: SquashedGaussianPolicy, batch: RolloutBatch,
                   epsilon: float = 0.3, h: float = 1e-5) -> float:
    """Max relative error between analytic and finite-difference gradients.

    Only tractable (and only allowed) for small policies; the relative error
    denominator is floored so that zero-gradient coordinates compare exactly.
    """
    if policy.parameter_count > GRADIENT_CHECK_MAX_PARAMS:
        raise ValueError(
            f"gradient_check is limited to {GRADIENT_CHECK_MAX_PARAMS} parameters "
            f"(got {policy.parameter_count})"
        )
    adv = normalized_advantages(batch.returns)
    theta0 = policy.get_flat_params()

    def loss_at(theta: np.ndarray) -> float:
        policy.set_flat_params(theta)
        return ppo_loss(batch, policy, epsilon, advantages=adv)

    try:
        _, grads = ppo_loss_and_grads(batch, policy, epsilon, advantages=adv)
        analytic = np.concatenate([g.ravel() for g in grads])
        numeric = finite_difference_gradient(loss_at, theta0, h=h)
    finally:
        policy.set_flat_params(theta0)

    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-8)
    err = np.abs(analytic - numeric) / denom
    err[(np.abs(analytic) < 1e-12) & (np.abs(numeric) < 1e-12)] = 0.0
    return float(err.max())


@dataclass(frozen=True)
class TrainerConfig:
    """Training-loop settings.

    learning_rate defaults to 1e-3, not the optimizer class's 1e-2: the
    adaptive optimizer's per-coordinate step is scale-invariant in the
    gradient, so with no value baseline the larger rate turns each iteration
    into a near-random jump and log_std grows instead of the reward (checked
    by sweeping rate x batch on the default environment).  episodes_per_worker
    keeps the collection batch (workers * episodes_per_worker * episode_length
    samples) comfortably above minibatch_size.
    """

    learning_rate: float = 0.001
    gamma: float = 0.99
    clip_epsilon: float = 0.3
    minibatch_size: int = 128
    max_iterations: int = 1000
    workers: int = 2
    episodes_per_worker: int = 16
    episode_length: int = 30
    convergence_band: float = 0.03
    convergence_window: int = 25
    convergence_patience: int = 3
    epochs: int = 4
    hidden: tuple[int, ...] = (256, 256)
    init_log_std: float = math.log(0.5)
    warmup_episodes: int = 16

    def __post_init__(self) -> None:
        if not 0 < self.gamma <= 1:
            raise ValueError("gamma must lie in (0, 1]")
        if self.clip_epsilon <= 0:
            raise ValueError("clip_epsilon must be positive")
        if self.minibatch_size < 1:
            raise ValueError("minibatch_size must be >= 1")
        if self.workers < 1 or self.max_iterations < 1 or self.episode_length < 1:
            raise ValueError("workers, max_iterations, episode_length must be >= 1")
        if self.episodes_per_worker < 1:
            raise ValueError("episodes_per_worker must be >= 1")
        if self.convergence_window < 1 or not 0 < self.convergence_band < 1:
            raise ValueError("bad convergence settings")
        if self.convergence_patience < 1:
            raise ValueError("convergence_patience must be >= 1")
        if self.epochs < 1 or self.warmup_episodes < 1:
            raise ValueError("epochs and warmup_episodes must be >= 1")


@dataclass
class CurvePoint:
    iteration: int
    total_reward: float
    loss: float


class TrainingDiverged(RuntimeError):
    """Raised on a non-finite loss; carries the curve so far for diagnosis."""

    def __init__(self, message: str, curve: list[CurvePoint]):
        super().__init__(message)
        self.curve = curve


def _converged(totals: list[float], window: int, band: float) -> bool:
    """Mean episode reward of the last window vs the window before it."""
    if len(totals) < 2 * window:
        return False
    cur = float(np.mean(totals[-window:]))
    prev = float(np.mean(totals[-2 * window:-window]))
    if prev == 0.0:
        return abs(cur) < 1e-12
    return abs(cur - prev) <= band * abs(prev)


def _collect_normalization_stats(envs, config: TrainerConfig,
                                 rng: np.random.Generator) -> NormalizationStats:
    """Freeze observation statistics from random-action warmup episodes."""
    samples = []
    n_regions = envs[0].config.n_regions
    a_max = envs[0].config.a_max
    for k in range(config.warmup_episodes):
        env = envs[k % len(envs)]
        st = env.reset(seed=int(rng.integers(2 ** 32)))
        samples.append(state_vector(st))
        for _ in range(config.episode_length):
            tr = env.step(rng.uniform(0.0, a_max, size=n_regions))
            samples.append(state_vector(tr.next_state))
    n_continuous = envs[0].config.obs_dim - 12   # month one-hot stays raw
    return NormalizationStats.from_samples(np.array(samples), n_continuous)


def train(config: TrainerConfig, env_factory, seed: int
          ) -> tuple[SquashedGaussianPolicy, list[CurvePoint]]:
    """Optimize a policy against environments from env_factory.

    Each iteration collects episodes_per_worker episodes per worker under the
    frozen current parameters, computes returns-to-go, then takes minibatch
    surrogate steps.  Stops early once the mean episode reward of the last
    convergence_window iterations sits within convergence_band of the window
    before it for convergence_patience consecutive iterations (episode totals
    are noisy, so a single window pass is not trusted).  Fully deterministic
    for a fixed (seed, config, env_factory).
    """
    rng = np.random.default_rng(seed)
    envs = [env_factory() for _ in range(config.workers)]
    env_cfg = envs[0].config
    for e in envs[1:]:
        if e.config.obs_dim != env_cfg.obs_dim or e.config.n_regions != env_cfg.n_regions:
            raise ValueError("workers must share one environment layout")

    stats = _collect_normalization_stats(envs, config, rng)
    policy = SquashedGaussianPolicy(
        obs_dim=env_cfg.obs_dim, n_regions=env_cfg.n_regions,
        a_max=env_cfg.a_max, hidden=config.hidden,
        seed=int(rng.integers(2 ** 32)), init_log_std=config.init_log_std)
    policy.norm_stats = stats
    optimizer = AdamOptimizer(policy.param_arrays, lr=config.learning_rate)

    curve: list[CurvePoint] = []
    totals: list[float] = []
    steady = 0
    for it in range(config.max_iterations):
        obs_l, u_l, a_l, logp_l, ret_l = [], [], [], [], []
        episode_totals = []
        for env in envs:
            for _ in range(config.episodes_per_worker):
                st = env.reset(seed=int(rng.integers(2 ** 32)))
                rewards = []
                for _ in range(config.episode_length):
                    obs = stats.apply(state_vector(st))
                    a, u, logp = policy.sample(obs, rng)
                    tr = env.step(a)
                    obs_l.append(obs)
                    u_l.append(u)
                    a_l.append(a)
                    logp_l.append(logp)
                    rewards.append(tr.reward)
                    st = tr.next_state
                ret_l.append(returns_to_go(rewards, config.gamma))
                episode_totals.append(float(np.sum(rewards)))

        batch = RolloutBatch(
            obs=np.array(obs_l), pre_squash=np.array(u_l), actions=np.array(a_l),
            old_log_prob=np.array(logp_l), returns=np.concatenate(ret_l))
        advantages = normalized_advantages(batch.returns)
        total_reward = float(np.mean(episode_totals))

        loss_val = math.nan
        order = np.arange(len(batch))
        for _ in range(config.epochs):
            rng.shuffle(order)
            for lo in range(0, len(order), config.minibatch_size):
                idx = order[lo:lo + config.minibatch_size]
                loss_val, grads = ppo_loss_and_grads(
                    batch.subset(idx), policy, config.clip_epsilon,
                    advantages=advantages[idx])
                if not math.isfinite(loss_val):
                    raise TrainingDiverged(
                        f"non-finite loss at iteration {it}", curve)
                optimizer.step(policy.param_arrays, grads)
                policy.clamp_log_std()

        curve.append(CurvePoint(iteration=it, total_reward=total_reward,
                                loss=loss_val))
        totals.append(total_reward)
        if _converged(totals, config.convergence_window, config.convergence_band):
            steady += 1
            if steady >= config.convergence_patience:
                break
        else:
            steady = 0
    return policy, curve


def write_training_curve(path, curve: list[CurvePoint]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("iteration", "total_reward", "loss"))
        for pt in curve:
            writer.writerow((pt.iteration, repr(pt.total_reward), repr(pt.loss)))
