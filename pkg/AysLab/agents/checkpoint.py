"""Binary agent checkpoints.

Layout: magic, format version and the byte length of a JSON header, the
header itself (agent kind, observation width, hyperparameters, counters, rng
state, run config, Adam scalars, buffer metadata and, for checkpoints written
by the trainer, the training position), then one network snapshot per entry of
agent.networks(), the Adam moments of every optimizer (first moments before
second moments) and finally the arrays of every buffer, all little-endian
float64.
"""
import json
import struct
import numpy as np
import logManager
from agents import agent_factory
from network.Mlp import Mlp
from functions.errors import ConfigError

logging = logManager.logger.get_logger(__name__)

CHECKPOINT_MAGIC = b"AYSCKPT"
CHECKPOINT_VERSION = 2
_HEADER = struct.Struct("<7sHI")


def _array_bytes(array):
    return np.ascontiguousarray(array, dtype="<f8").tobytes()


def _read_array(data, offset, shape):
    count = int(np.prod(shape)) if shape else 1
    if offset + 8 * count > len(data):
        raise ConfigError("truncated checkpoint")
    array = np.frombuffer(data, dtype="<f8", count=count, offset=offset).reshape(shape).astype(np.float64)
    return array, offset + 8 * count


def dumps(agent, run_config=None, training=None):
    """Checkpoint bytes of `agent`.

    `training` (seed, episodes, frames, environment rng state) marks a
    checkpoint written at an episode boundary that a run can resume from.
    """
    networks = agent.networks()
    optimizers = agent.optimizers()
    buffers = {}
    for name, buffer in agent.buffers().items():
        buffers[name] = buffer.state_dict()
    header = {
        "kind": agent.kind,
        "observation_width": agent.observation_width,
        "total_frames": agent.total_frames,
        "hyperparameters": agent.hyperparameters,
        "counters": agent.counters(),
        "rng_state": agent.rng.bit_generator.state,
        "run_config": run_config or {},
        "networks": list(networks),
        "optimizers": {name: {"learning_rate": state.learning_rate, "beta1": state.beta1, "beta2": state.beta2,
                              "epsilon_num": state.epsilon_num, "step_count": state.step_count}
                       for name, (state, _) in optimizers.items()},
        "buffers": [[name, meta, [[key, list(array.shape)] for key, array in arrays.items()]]
                    for name, (meta, arrays) in buffers.items()],
        "training": training,
    }
    encoded = json.dumps(header, sort_keys=True).encode("utf-8")
    chunks = [_HEADER.pack(CHECKPOINT_MAGIC, CHECKPOINT_VERSION, len(encoded)), encoded]
    for name in networks:
        chunks.append(networks[name].dump())
    for name, (state, _) in optimizers.items():
        for moment in state.first_moment + state.second_moment:
            chunks.append(_array_bytes(moment))
    for name, (meta, arrays) in buffers.items():
        for array in arrays.values():
            chunks.append(_array_bytes(array))
    return b"".join(chunks)


def _decode(data):
    try:
        magic, version, length = _HEADER.unpack_from(data, 0)
    except struct.error:
        raise ConfigError("truncated checkpoint")
    if magic != CHECKPOINT_MAGIC or version != CHECKPOINT_VERSION:
        raise ConfigError("not an agent checkpoint of version %d" % CHECKPOINT_VERSION)
    offset = _HEADER.size
    try:
        header = json.loads(data[offset:offset + length].decode("utf-8"))
    except ValueError:
        raise ConfigError("checkpoint header is not valid JSON")
    offset += length

    agent = agent_factory(header["kind"], header["hyperparameters"], header["observation_width"],
                          header["total_frames"], np.random.default_rng(0))
    agent.rng.bit_generator.state = header["rng_state"]
    networks = agent.networks()
    if list(networks) != header["networks"]:
        raise ConfigError("checkpoint networks %s do not match agent %s" % (header["networks"], list(networks)))
    for name in header["networks"]:
        stored, offset = Mlp.load(data, offset)
        networks[name].load_parameters(stored)
    for name, (state, net) in agent.optimizers().items():
        scalars = header["optimizers"][name]
        state.learning_rate = scalars["learning_rate"]
        state.beta1, state.beta2, state.epsilon_num = scalars["beta1"], scalars["beta2"], scalars["epsilon_num"]
        state.step_count = scalars["step_count"]
        moments = []
        for param in net.parameters() + net.parameters():
            moment, offset = _read_array(data, offset, param.shape)
            moments.append(moment)
        half = len(moments) // 2
        state.first_moment, state.second_moment = moments[:half], moments[half:]
    buffers = agent.buffers()
    if [entry[0] for entry in header["buffers"]] != list(buffers):
        raise ConfigError("checkpoint buffers do not match agent " + agent.kind)
    for name, meta, shapes in header["buffers"]:
        arrays = {}
        for key, shape in shapes:
            arrays[key], offset = _read_array(data, offset, tuple(shape))
        buffers[name].load_state(meta, arrays)
    agent.restore_counters(header["counters"])
    return agent, header


def loads(data):
    """Rebuild an agent from checkpoint bytes; returns (agent, run_config)."""
    agent, header = _decode(data)
    return agent, header["run_config"]


def save_checkpoint(agent, path, run_config=None, training=None):
    with open(path, "wb") as fp:
        fp.write(dumps(agent, run_config, training))
    logging.debug("Checkpoint written to " + str(path))


def _read(path):
    try:
        with open(path, "rb") as fp:
            return fp.read()
    except OSError as error:
        raise ConfigError("cannot read checkpoint " + str(path) + ": " + str(error))


def load_checkpoint(path):
    return loads(_read(path))


def load_training_state(path):
    """(agent, run_config, training) of a checkpoint written by the trainer."""
    agent, header = _decode(_read(path))
    if not header.get("training"):
        raise ConfigError("checkpoint " + str(path) + " holds no training position to resume from")
    return agent, header["run_config"], header["training"]
