import numpy as np
import logManager
from agents.BaseAgent import BaseAgent, ACTION_COUNT
from agents.schedules import EpsilonSchedule
from network import greedy_action
from network.Mlp import Mlp
from network.Adam import AdamState
from replay.ReplayBuffer import ReplayBuffer, stack

logging = logManager.logger.get_logger(__name__)


def max_q_target(target_net, rewards, next_states, dones, gamma):
    next_q = target_net.predict(next_states)
    return rewards + (1.0 - dones) * gamma * np.max(next_q, axis=1)


def squared_error_loss(net, states, actions, targets, weights=None):
    """Mean (optionally weighted) squared TD error at the taken actions.

    Returns (loss, gradients, td_errors) where td_errors = Q(s, a) - y.
    """
    q, cache = net.forward(states)
    rows = np.arange(len(actions))
    errors = q[rows, actions] - targets
    if weights is None:
        weights = np.ones_like(errors)
    count = len(errors)
    loss = float(np.mean(weights * errors ** 2))
    output_gradient = np.zeros_like(q)
    output_gradient[rows, actions] = 2.0 * weights * errors / count
    return loss, net.backward(cache, output_gradient), errors


class DqnAgent(BaseAgent):
    kind = "dqn"
    head = "action_values"
    greedy_by_default = True

    def __init__(self, observation_width, hyperparameters, total_frames, rng):
        super().__init__(observation_width, hyperparameters, total_frames, rng)
        hp = self.hyperparameters
        self.policy_net = Mlp.build(self.observation_width, hp["hidden_widths"], ACTION_COUNT, self.head, rng)
        self.target_net = self.policy_net.copy()
        self.adam = AdamState.for_parameters(self.policy_net.parameters(), hp["learning_rate"])
        self.epsilon = EpsilonSchedule(hp["epsilon_decay"])
        self.batch_size = hp["batch_size"]
        self.target_update = hp["target_update"]
        self.action_counter = 0
        self.last_loss = None
        self.buffer = self._make_buffer()

    def _make_buffer(self):
        return ReplayBuffer(self.hyperparameters["buffer_size"])

    def current_epsilon(self):
        return self.epsilon.value(self.action_counter)

    def act(self, observation, training=True, greedy=None):
        observation = self._check_observation(observation)
        if greedy is None:
            greedy = not training
        if training:
            self.action_counter += 1
        if not greedy:
            # one uniform draw per decision keeps the rng stream aligned
            if self.rng.random() < self.current_epsilon():
                return int(self.rng.integers(ACTION_COUNT))
        return greedy_action(self.policy_net.predict(observation))

    def observe(self, transition):
        self._check_observation(transition.state)
        self.buffer.push(transition)
        self.frames += 1

    def compute_targets(self, rewards, next_states, dones):
        return max_q_target(self.target_net, rewards, next_states, dones, self.gamma)

    def loss_and_gradients(self, states, actions, targets, weights=None):
        return squared_error_loss(self.policy_net, states, actions, targets, weights)

    def _step(self, grads):
        self.adam.learning_rate = self._rate(self.hyperparameters["learning_rate"])
        self.policy_net.apply_gradients(grads, self.adam)
        self.updates += 1
        if self.updates % self.target_update == 0:
            self.target_net.load_parameters(self.policy_net)
            logging.debug("Target network refreshed after update " + str(self.updates))

    def maybe_update(self):
        if len(self.buffer) < self.batch_size:
            return None
        states, actions, rewards, next_states, dones = stack(self.buffer.sample(self.batch_size, self.rng))
        targets = self.compute_targets(rewards, next_states, dones)
        loss, grads, _ = self.loss_and_gradients(states, actions, targets)
        self._check_loss("q", loss)
        self._step(grads)
        self.last_loss = loss
        return {"loss": loss}

    def value_estimate(self, observation):
        return float(np.max(self.policy_net.predict(self._check_observation(observation))))

    def preferred_action(self, observation):
        return greedy_action(self.policy_net.predict(self._check_observation(observation)))

    def networks(self):
        return {"policy": self.policy_net, "target": self.target_net}

    def optimizers(self):
        return {"policy": (self.adam, self.policy_net)}

    def buffers(self):
        return {"replay": self.buffer}

    def counters(self):
        counters = super().counters()
        counters["action_counter"] = self.action_counter
        return counters

    def restore_counters(self, counters):
        super().restore_counters(counters)
        self.action_counter = int(counters.get("action_counter", 0))

    def stats(self):
        return {"buffer": len(self.buffer), "epsilon": self.current_epsilon()}
