"""Value network and trainer: plain MLP, replay memory, epsilon-greedy control.

The network is a rectifier MLP trained with minibatch SGD on a mean squared
temporal-difference error. Action selection and target evaluation share the
same parameter set; there is no separate target network.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .rl_env import N_ACTIONS, N_FEATURES

WEIGHT_FORMAT_VERSION = 1

DEFAULT_LAYER_SIZES = (N_FEATURES, 128, 128, 128, N_ACTIONS)


@dataclass
class TrainConfig:
    learning_rate: float = 0.005
    discount: float = 0.99
    epsilon_start: float = 1.0
    epsilon_decay: float = 0.99   # multiplicative, once per episode
    epsilon_min: float = 0.01
    batch_size: int = 64
    buffer_capacity: int = 1_000_000
    max_episodes: int = 300
    # Bootstrap targets are evaluated on a frozen copy of the network
    # refreshed every this many SGD updates (double estimation: the online
    # network still selects the next action). Evaluating targets on the live
    # parameters couples Q(s) and Q(s') so tightly that values grow
    # geometrically and overflow within a few hundred updates.
    target_sync_steps: int = 200
    plateau_window: int = 20
    # Convergence: the window moving average moves by less than 1% of its
    # previous value for plateau_patience episodes in a row. The absolute
    # tolerance floor lets flat near-zero curves (nothing left to sense)
    # terminate instead of riding out the episode cap.
    plateau_rel: float = 0.01
    plateau_abs_tol: float = 0.3
    plateau_patience: int = 10

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not 0.0 <= self.discount <= 1.0:
            raise ValueError("discount must be in [0, 1]")
        for name in ("epsilon_start", "epsilon_min"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")


class QNetwork:
    """Fully connected rectifier network with an identity output layer."""

    def __init__(self, layer_sizes: Sequence[int] = DEFAULT_LAYER_SIZES,
                 rng: np.random.Generator | None = None,
                 dtype: np.dtype = np.float32):
        if len(layer_sizes) < 2:
            raise ValueError("need at least input and output layers")
        rng = rng if rng is not None else np.random.default_rng()
        self.layer_sizes = tuple(int(s) for s in layer_sizes)
        self.dtype = np.dtype(dtype)
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for fan_in, fan_out in zip(self.layer_sizes, self.layer_sizes[1:]):
            bound = np.sqrt(6.0 / (fan_in + fan_out))
            w = rng.uniform(-bound, bound, size=(fan_in, fan_out))
            self.weights.append(w.astype(self.dtype))
            self.biases.append(np.zeros(fan_out, dtype=self.dtype))

    @property
    def n_inputs(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_outputs(self) -> int:
        return self.layer_sizes[-1]

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Batch forward pass, (B, n_in) -> (B, n_out)."""
        h = np.asarray(x, dtype=self.dtype)
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w + b
            if i != last:
                np.maximum(h, 0.0, out=h)
        return h

    def forward_cached(self, x: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
        """Forward pass keeping post-activation values for backprop.

        The cache holds [input, h1, ..., h_{L-1}]; the returned array is the
        raw output layer.
        """
        h = np.asarray(x, dtype=self.dtype)
        cache = [h]
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w + b
            if i != last:
                np.maximum(h, 0.0, out=h)
                cache.append(h)
        return h, cache

    def backward(self, cache: list[np.ndarray],
                 grad_out: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
        """Gradients of a scalar loss given d(loss)/d(output).

        Returns [(dW, db), ...] in layer order. The rectifier derivative is
        taken from the cached post-activation values (positive iff active).
        """
        grads: list[tuple[np.ndarray, np.ndarray]] = [None] * len(self.weights)
        delta = np.asarray(grad_out, dtype=self.dtype)
        for i in range(len(self.weights) - 1, -1, -1):
            grads[i] = (cache[i].T @ delta, delta.sum(axis=0))
            if i > 0:
                delta = delta @ self.weights[i].T
                delta *= cache[i] > 0
        return grads

    def apply_sgd(self, grads: list[tuple[np.ndarray, np.ndarray]], lr: float) -> None:
        for (dw, db), w, b in zip(grads, self.weights, self.biases):
            w -= lr * dw
            b -= lr * db

    def parameters_finite(self) -> bool:
        return all(np.all(np.isfinite(w)) for w in self.weights) and \
            all(np.all(np.isfinite(b)) for b in self.biases)

    def copy_from(self, other: "QNetwork") -> None:
        """Hard parameter sync (target refresh)."""
        for mine, theirs in zip(self.weights, other.weights):
            np.copyto(mine, theirs)
        for mine, theirs in zip(self.biases, other.biases):
            np.copyto(mine, theirs)

    def clone(self) -> "QNetwork":
        twin = QNetwork(self.layer_sizes, rng=np.random.default_rng(0),
                        dtype=self.dtype)
        twin.copy_from(self)
        return twin

    # --- persistence --------------------------------------------------------

    def save(self, path) -> None:
        arrays = {"version": np.array(WEIGHT_FORMAT_VERSION),
                  "layer_sizes": np.array(self.layer_sizes)}
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            arrays[f"w{i}"] = w
            arrays[f"b{i}"] = b
        np.savez(path, **arrays)

    @classmethod
    def load(cls, path) -> "QNetwork":
        with np.load(path) as data:
            version = int(data["version"])
            if version != WEIGHT_FORMAT_VERSION:
                raise ValueError(f"unsupported weight format version {version}")
            sizes = tuple(int(s) for s in data["layer_sizes"])
            net = cls(sizes, rng=np.random.default_rng(0))
            net.weights = [np.array(data[f"w{i}"]) for i in range(len(sizes) - 1)]
            net.biases = [np.array(data[f"b{i}"]) for i in range(len(sizes) - 1)]
            net.dtype = net.weights[0].dtype
        return net


class ReplayBuffer:
    """Ring buffer of transitions; oldest entries are evicted first."""

    def __init__(self, capacity: int = 1_000_000, obs_dim: int = N_FEATURES,
                 dtype: np.dtype = np.float32):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.states = np.empty((capacity, obs_dim), dtype=dtype)
        self.actions = np.empty(capacity, dtype=np.int64)
        self.rewards = np.empty(capacity, dtype=dtype)
        self.next_states = np.empty((capacity, obs_dim), dtype=dtype)
        self.dones = np.empty(capacity, dtype=bool)
        self.size = 0
        self._ptr = 0

    def __len__(self) -> int:
        return self.size

    def push(self, state, action: int, reward: float, next_state, done: bool) -> None:
        i = self._ptr
        self.states[i] = state
        self.actions[i] = action
        self.rewards[i] = reward
        self.next_states[i] = next_state
        self.dones[i] = done
        self._ptr = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def gather(self, idx: np.ndarray):
        return (self.states[idx], self.actions[idx], self.rewards[idx],
                self.next_states[idx], self.dones[idx])


def q_values(net: QNetwork, features: np.ndarray) -> np.ndarray:
    """Action values for a single feature vector."""
    feats = np.asarray(features)
    if feats.shape != (net.n_inputs,):
        raise ValueError(f"expected {net.n_inputs} features, got shape {feats.shape}")
    return net.forward(feats[None, :])[0]


def select_action(net: QNetwork, features: np.ndarray, epsilon: float,
                  rng: np.random.Generator) -> int:
    """Epsilon-greedy choice; greedy ties resolve to the lowest action index."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must be in [0, 1]")
    if epsilon > 0.0 and rng.random() < epsilon:
        return int(rng.integers(net.n_outputs))
    return int(np.argmax(q_values(net, features)))


def td_target(net: QNetwork, transition, gamma: float,
              target_net: QNetwork | None = None) -> float:
    """Bootstrap value for one transition (state, action, reward, next, done).

    The online network selects the next action; `target_net` (the online
    network itself when omitted) evaluates it. Terminal transitions return
    the bare reward.
    """
    _state, _action, reward, next_state, done = transition
    if done:
        return float(reward)
    best = int(np.argmax(q_values(net, next_state)))
    evaluator = target_net if target_net is not None else net
    return float(reward + gamma * q_values(evaluator, next_state)[best])


def _batch_targets(net: QNetwork, target_net: QNetwork, rewards, next_states,
                   dones, gamma: float) -> np.ndarray:
    best = np.argmax(net.forward(next_states), axis=1)
    q_eval = target_net.forward(next_states)
    bootstrap = q_eval[np.arange(q_eval.shape[0]), best]
    return rewards + gamma * bootstrap * ~dones


def train_step(net: QNetwork, buffer: ReplayBuffer, config: TrainConfig,
               rng: np.random.Generator,
               target_net: QNetwork | None = None) -> Optional[float]:
    """One SGD update on a uniform minibatch; returns the loss, or None while
    the buffer is still shorter than a batch."""
    if len(buffer) < config.batch_size:
        return None
    idx = rng.integers(0, len(buffer), size=config.batch_size)
    states, actions, rewards, next_states, dones = buffer.gather(idx)

    targets = _batch_targets(net, target_net if target_net is not None else net,
                             rewards, next_states, dones, config.discount)
    out, cache = net.forward_cached(states)
    rows = np.arange(config.batch_size)
    err = out[rows, actions] - targets
    loss = float(np.mean(err * err))

    grad_out = np.zeros_like(out)
    grad_out[rows, actions] = (2.0 / config.batch_size) * err
    net.apply_sgd(net.backward(cache, grad_out), config.learning_rate)
    return loss


def moving_average(values: Sequence[float], window: int) -> np.ndarray:
    """Trailing window means; entry j averages values[j-window+1 .. j]."""
    v = np.asarray(values, dtype=np.float64)
    if len(v) < window:
        return np.empty(0)
    c = np.cumsum(np.concatenate(([0.0], v)))
    return (c[window:] - c[:-window]) / window


def _plateau_episode(scores: Sequence[float], config: TrainConfig) -> Optional[int]:
    """Episode count at which the convergence rule fires, or None if it never does."""
    ma = moving_average(scores, config.plateau_window)
    streak = 0
    for j in range(1, len(ma)):
        tol = max(config.plateau_rel * abs(ma[j - 1]), config.plateau_abs_tol)
        streak = streak + 1 if abs(ma[j] - ma[j - 1]) < tol else 0
        if streak >= config.plateau_patience:
            return j + config.plateau_window
    return None


def episodes_to_plateau(scores: Sequence[float], config: TrainConfig) -> int:
    """Episodes until convergence; curves that never plateau count in full."""
    fired = _plateau_episode(scores, config)
    return len(scores) if fired is None else fired


def greedy_score(env, net: QNetwork) -> float:
    """Total reward of one deterministic greedy episode (no learning, no rng)."""
    state = env.reset()
    total = 0.0
    done = False
    rng = np.random.default_rng(0)  # never consulted at epsilon 0
    while not done:
        action = select_action(net, env.observe(state), 0.0, rng)
        state, reward, done = env.step(state, action)
        total += reward
    return total


def train_agent(env, config: TrainConfig | None = None,
                rng: np.random.Generator | None = None) -> tuple[QNetwork, list[float]]:
    """Full training loop over one environment.

    Episodes run to the horizon; transitions go to replay; one SGD step per
    environment step once the buffer holds a batch. Epsilon decays per
    episode. Stops at max_episodes or at the score plateau, whichever first.

    Returns the parameter snapshot whose greedy policy evaluated best during
    training, not the final iterate: per-step SGD keeps reshuffling the
    greedy argmax in low-signal regions, so the last snapshot is often a poor
    draw of an otherwise converged run. Each episode's snapshot is scored by
    a deterministic evaluation episode that touches neither the replay
    buffer nor the random stream.
    """
    config = config or TrainConfig()
    rng = rng if rng is not None else np.random.default_rng()
    net = QNetwork(rng=rng)
    target = net.clone()
    best = net.clone()
    best_eval = -np.inf
    buffer = ReplayBuffer(config.buffer_capacity)
    epsilon = config.epsilon_start
    scores: list[float] = []
    updates = 0

    for _episode in range(config.max_episodes):
        state = env.reset()
        total = 0.0
        done = False
        while not done:
            feats = env.observe(state)
            action = select_action(net, feats, epsilon, rng)
            next_state, reward, done = env.step(state, action)
            buffer.push(feats, action, reward, env.observe(next_state), done)
            if train_step(net, buffer, config, rng, target) is not None:
                updates += 1
                if updates % config.target_sync_steps == 0:
                    target.copy_from(net)
            total += reward
            state = next_state
        scores.append(total)
        evaluation = greedy_score(env, net)
        if evaluation > best_eval:
            best_eval = evaluation
            best.copy_from(net)
        epsilon = max(config.epsilon_min, epsilon * config.epsilon_decay)
        if _plateau_episode(scores, config) is not None:
            break
    return best, scores
