import numpy as np
import logManager
from agents.BaseAgent import BaseAgent, ACTION_COUNT
from network import softmax_policy, categorical_entropy, log_probability, sample_categorical, greedy_action, PROBABILITY_FLOOR
from network.Mlp import Mlp
from network.Adam import AdamState, clip_gradients
from replay.RolloutBuffer import RolloutBuffer, RolloutStep
from functions.errors import UsageError

logging = logManager.logger.get_logger(__name__)


def one_hot(actions, width=ACTION_COUNT):
    encoded = np.zeros((len(actions), width))
    encoded[np.arange(len(actions)), actions] = 1.0
    return encoded


def entropy_gradient(probs):
    """d H / d preferences for H = -sum p ln p under a softmax."""
    log_probs = np.log(np.maximum(probs, PROBABILITY_FLOOR))
    entropy = -np.sum(probs * log_probs, axis=-1, keepdims=True)
    return -probs * (log_probs + entropy)


def value_regression(critic, states, targets):
    """Mean squared error of the critic against fixed targets, with gradients."""
    values, cache = critic.forward(states)
    errors = targets - values[:, 0]
    loss = float(np.mean(errors ** 2))
    grads = critic.backward(cache, (-2.0 * errors / len(errors))[:, None])
    return loss, grads


class A2cAgent(BaseAgent):
    kind = "a2c"

    def __init__(self, observation_width, hyperparameters, total_frames, rng):
        super().__init__(observation_width, hyperparameters, total_frames, rng)
        hp = self.hyperparameters
        self.actor_net = Mlp.build(self.observation_width, hp["hidden_widths"], ACTION_COUNT, "action_preferences", rng)
        self.critic_net = Mlp.build(self.observation_width, hp["hidden_widths"], 1, "scalar_value", rng)
        self.actor_adam = AdamState.for_parameters(self.actor_net.parameters(), hp["actor_learning_rate"])
        self.critic_adam = AdamState.for_parameters(self.critic_net.parameters(), hp["critic_learning_rate"])
        self.entropy_coefficient = hp["entropy_coefficient"]
        self.max_grad_norm = hp["max_grad_norm"]
        self.rollout = RolloutBuffer(hp["rollout_length"], self.gamma, hp.get("gae_lambda", 0.0))
        self.generation = 0
        self.pending = None

    def policy(self, observation):
        return softmax_policy(self.actor_net.predict(self._check_observation(observation)))

    def act(self, observation, training=True, greedy=None):
        observation = self._check_observation(observation)
        probs = self.policy(observation)
        if greedy:
            action = greedy_action(probs)
        else:
            action = sample_categorical(probs, self.rng)
        if training:
            self.pending = (action, float(log_probability(probs, action)[0]),
                            float(self.critic_net.predict(observation)[0]), self.generation)
        return action

    def observe(self, transition):
        if self.pending is None or self.pending[0] != int(transition.action):
            raise UsageError("observed a transition the agent did not act for")
        action, log_prob, value, generation = self.pending
        self.pending = None
        self.rollout.push(RolloutStep(np.asarray(transition.state, dtype=np.float64), action, log_prob, value,
                                      float(transition.reward), np.asarray(transition.next_state, dtype=np.float64),
                                      bool(transition.done)), generation)
        self.frames += 1

    def loss_and_gradients(self, states, actions, rewards, next_states, dones):
        """Actor and critic losses of one rollout with TD(0) advantages.

        The advantage is a constant for the actor, and v(s') is a constant for
        the critic. Returns (actor_loss, critic_loss, actor_grads, critic_grads).
        """
        count = len(actions)
        next_values = self.critic_net.predict(next_states)[:, 0]
        targets = rewards + (1.0 - dones) * self.gamma * next_values
        values = self.critic_net.predict(states)[:, 0]
        advantages = targets - values
        critic_loss, critic_grads = value_regression(self.critic_net, states, targets)

        preferences, cache = self.actor_net.forward(states)
        probs = softmax_policy(preferences)
        log_probs = log_probability(probs, actions)
        entropy = categorical_entropy(probs)
        actor_loss = float(-np.mean(advantages * log_probs) - self.entropy_coefficient * np.mean(entropy))
        output_gradient = (-advantages[:, None] * (one_hot(actions) - probs)
                           - self.entropy_coefficient * entropy_gradient(probs)) / count
        actor_grads = self.actor_net.backward(cache, output_gradient)
        return actor_loss, critic_loss, actor_grads, critic_grads

    def _apply(self, actor_grads, critic_grads):
        hp = self.hyperparameters
        self.actor_adam.learning_rate = self._rate(hp["actor_learning_rate"])
        self.critic_adam.learning_rate = self._rate(hp["critic_learning_rate"])
        self.actor_net.apply_gradients(clip_gradients(actor_grads, self.max_grad_norm), self.actor_adam)
        self.critic_net.apply_gradients(clip_gradients(critic_grads, self.max_grad_norm), self.critic_adam)

    def update(self, rollout):
        data = rollout.arrays()
        actor_loss, critic_loss, actor_grads, critic_grads = self.loss_and_gradients(
            data["states"], data["actions"], data["rewards"], data["next_states"], data["dones"])
        self._check_loss("actor", actor_loss)
        self._check_loss("critic", critic_loss)
        self._apply(actor_grads, critic_grads)
        return {"actor_loss": actor_loss, "critic_loss": critic_loss}

    def maybe_update(self):
        if not self.rollout.full:
            return None
        if self.rollout.generation != self.generation:
            raise UsageError("rollout was collected by policy generation %r, agent is at %r"
                             % (self.rollout.generation, self.generation))
        result = self.update(self.rollout)
        self.rollout.clear()
        self.generation += 1
        self.updates += 1
        return result

    def value_estimate(self, observation):
        return float(self.critic_net.predict(self._check_observation(observation))[0])

    def preferred_action(self, observation):
        return greedy_action(self.policy(observation))

    def networks(self):
        return {"actor": self.actor_net, "critic": self.critic_net}

    def optimizers(self):
        return {"actor": (self.actor_adam, self.actor_net), "critic": (self.critic_adam, self.critic_net)}

    def buffers(self):
        return {"rollout": self.rollout}

    def counters(self):
        counters = super().counters()
        counters["generation"] = self.generation
        return counters

    def restore_counters(self, counters):
        super().restore_counters(counters)
        self.generation = int(counters.get("generation", 0))

    def stats(self):
        return {"rollout": len(self.rollout), "generation": self.generation}
