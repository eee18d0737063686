import numpy as np
import logManager
from agents.DqnAgent import DqnAgent
from replay.PrioritizedBuffer import PrioritizedBuffer
from replay.ReplayBuffer import stack

logging = logManager.logger.get_logger(__name__)


def double_q_target(policy_net, target_net, rewards, next_states, dones, gamma, convention="target_select"):
    """r + gamma * Q_eval(s', argmax_a Q_select(s', a)) on non-terminal steps.

    "target_select" selects with the target net and evaluates with the policy net,
    "standard" swaps the roles.
    """
    if convention == "target_select":
        selector, evaluator = target_net, policy_net
    else:
        selector, evaluator = policy_net, target_net
    next_states = np.atleast_2d(np.asarray(next_states, dtype=np.float64))
    chosen = np.argmax(selector.predict(next_states), axis=1)
    evaluated = evaluator.predict(next_states)[np.arange(len(chosen)), chosen]
    return np.asarray(rewards, dtype=np.float64) + (1.0 - np.asarray(dones, dtype=np.float64)) * gamma * evaluated


class DuelDdqnAgent(DqnAgent):
    kind = "duelddqn"
    head = "dueling"

    def _make_buffer(self):
        hp = self.hyperparameters
        return PrioritizedBuffer(hp["buffer_size"], hp["alpha"], hp["beta"])

    def compute_targets(self, rewards, next_states, dones):
        return double_q_target(self.policy_net, self.target_net, rewards, next_states, dones, self.gamma,
                               self.hyperparameters["double_q"])

    def maybe_update(self):
        if len(self.buffer) < self.batch_size:
            return None
        self.buffer.anneal_beta(self.frames, self.total_frames)
        transitions, leaves, weights = self.buffer.sample(self.batch_size, self.rng)
        states, actions, rewards, next_states, dones = stack(transitions)
        targets = self.compute_targets(rewards, next_states, dones)
        loss, grads, errors = self.loss_and_gradients(states, actions, targets, weights)
        self._check_loss("q", loss)
        self._step(grads)
        self.buffer.update_priorities(leaves, errors)
        self.last_loss = loss
        return {"loss": loss}

    def counters(self):
        counters = super().counters()
        counters["beta"] = self.buffer.beta
        counters["max_priority"] = self.buffer.max_priority
        return counters

    def restore_counters(self, counters):
        super().restore_counters(counters)
        self.buffer.beta = float(counters.get("beta", self.buffer.beta))
        self.buffer.max_priority = float(counters.get("max_priority", self.buffer.max_priority))

    def stats(self):
        stats = super().stats()
        stats["max_priority"] = self.buffer.max_priority
        stats["beta"] = self.buffer.beta
        return stats
