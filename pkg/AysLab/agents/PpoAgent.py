import numpy as np
import logManager
from agents.A2cAgent import A2cAgent, one_hot, entropy_gradient, value_regression
from network import softmax_policy, categorical_entropy, log_probability
from replay.RolloutBuffer import compute_gae

logging = logManager.logger.get_logger(__name__)

ADVANTAGE_STD_FLOOR = 1e-8


def normalize_advantages(advantages):
    advantages = np.asarray(advantages, dtype=np.float64)
    return (advantages - np.mean(advantages)) / max(float(np.std(advantages)), ADVANTAGE_STD_FLOOR)


def clipped_surrogate(ratios, advantages, clip_range):
    """Per-step min(r A, clip(r) A) and its derivative with respect to log r."""
    unclipped = ratios * advantages
    clipped = np.clip(ratios, 1.0 - clip_range, 1.0 + clip_range) * advantages
    surrogate = np.minimum(unclipped, clipped)
    # the clipped branch is flat wherever it is the smaller one
    slope = np.where(unclipped <= clipped, unclipped, 0.0)
    return surrogate, slope


class PpoAgent(A2cAgent):
    kind = "ppo"

    def __init__(self, observation_width, hyperparameters, total_frames, rng):
        super().__init__(observation_width, hyperparameters, total_frames, rng)
        hp = self.hyperparameters
        self.clip_range = hp["clip_range"]
        self.epochs = hp["epochs"]
        self.batch_size = hp["batch_size"]

    def bootstrap_value(self, rollout):
        last = rollout.steps[-1]
        if last.done:
            return 0.0
        return float(self.critic_net.predict(last.next_state)[0])

    def loss_and_gradients(self, states, actions, old_log_probs, advantages, returns):
        """Clipped-surrogate actor loss and lambda-return critic loss on one batch.

        Advantages are normalized here. Returns (actor_loss, critic_loss,
        actor_grads, critic_grads).
        """
        count = len(actions)
        advantages = normalize_advantages(advantages)
        preferences, cache = self.actor_net.forward(states)
        probs = softmax_policy(preferences)
        ratios = np.exp(log_probability(probs, actions) - old_log_probs)
        surrogate, slope = clipped_surrogate(ratios, advantages, self.clip_range)
        entropy = categorical_entropy(probs)
        actor_loss = float(-np.mean(surrogate) - self.entropy_coefficient * np.mean(entropy))
        output_gradient = (-slope[:, None] * (one_hot(actions) - probs)
                           - self.entropy_coefficient * entropy_gradient(probs)) / count
        actor_grads = self.actor_net.backward(cache, output_gradient)
        critic_loss, critic_grads = value_regression(self.critic_net, states, returns)
        return actor_loss, critic_loss, actor_grads, critic_grads

    def update(self, rollout):
        data = rollout.arrays()
        advantages, returns = compute_gae(rollout, self.bootstrap_value(rollout))
        count = len(advantages)
        actor_losses, critic_losses = [], []
        for epoch in range(self.epochs):
            order = self.rng.permutation(count)
            for start in range(0, count, self.batch_size):
                batch = order[start:start + self.batch_size]
                actor_loss, critic_loss, actor_grads, critic_grads = self.loss_and_gradients(
                    data["states"][batch], data["actions"][batch], data["log_probs"][batch],
                    advantages[batch], returns[batch])
                self._check_loss("actor", actor_loss)
                self._check_loss("critic", critic_loss)
                self._apply(actor_grads, critic_grads)
                if epoch == self.epochs - 1:
                    actor_losses.append(actor_loss)
                    critic_losses.append(critic_loss)
        return {"actor_loss": float(np.mean(actor_losses)), "critic_loss": float(np.mean(critic_losses))}
