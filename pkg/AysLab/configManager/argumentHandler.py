import argparse
import logManager
from os import getenv

logging = logManager.logger.get_logger(__name__)

GRID_MODES = ["value", "first-action", "end-state"]


def get_environment_variable(var, boolean=False):
    value = getenv(var)
    if boolean and value:
        if value.lower() == "true":
            value = True
        else:
            value = False
    return value


def process_arguments(args, runDir=None):
    if not args["DEBUG"]:
        logManager.logger.configure_logger("INFO", runDir)
    else:
        logManager.logger.configure_logger("DEBUG", runDir)
        logging.info("Debug logging enabled!")


def _build_parser():
    ap = argparse.ArgumentParser(prog="AysLab", description="Deep RL agents on the AYS World-Earth model")
    # Arguements can also be passed as Environment Variables.
    ap.add_argument("--debug", action='store_true', help="Enables debug output")
    sub = ap.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="Train an agent on an experiment preset")
    train.add_argument("--preset", help="Experiment preset (pb, policy_cost, simple, noisy, noisy_fixed, markov)", type=str)
    train.add_argument("--agent", help="Agent kind (dqn, duelddqn, a2c, ppo, random)", type=str)
    train.add_argument("--seed", help="Train a single seed instead of every configured one", type=int)
    train.add_argument("--frames", help="Frame limit of the run", type=int)
    train.add_argument("--config", help="YAML file with run settings and hyperparameter overrides", type=str)
    train.add_argument("--out", help="Output directory", type=str)
    train.add_argument("--workers", help="Run seeds in this many processes", type=int, default=1)
    train.add_argument("--resume", type=str,
                       help="Continue the run of this checkpoint, in its directory; --frames raises the frame limit")

    evaluate = sub.add_parser("evaluate", help="Run frozen-policy episodes from a checkpoint")
    evaluate.add_argument("--checkpoint", help="Agent checkpoint file", type=str, required=True)
    evaluate.add_argument("--episodes", help="Number of episodes", type=int, default=10)
    evaluate.add_argument("--greedy", action='store_true', help="Act greedily with actor-critic agents too")
    evaluate.add_argument("--start", help="Start every episode from the given state (s0)", type=str)
    evaluate.add_argument("--noise-variance", help="Evaluate on one parameter set sampled at this variance", type=float)
    evaluate.add_argument("--seed", help="Evaluation seed", type=int)
    evaluate.add_argument("--out", help="Output directory", type=str)

    grid = sub.add_parser("grid", help="Sweep a checkpoint over the initial-state square")
    grid.add_argument("--checkpoint", help="Agent checkpoint file", type=str, required=True)
    grid.add_argument("--mode", help="Cell content", choices=GRID_MODES, default="value")
    grid.add_argument("--resolution", help="Grid points per axis", type=int, default=11)
    grid.add_argument("--out", help="Output directory", type=str)
    return ap


def parse_arguments(argv=None):
    argumentDict = {"COMMAND": None, "DEBUG": False, "OUTPUT": "runs", "SEED": None}
    args = _build_parser().parse_args(argv)
    argumentDict["COMMAND"] = args.command

    if args.debug or get_environment_variable('DEBUG', True):
        argumentDict["DEBUG"] = True

    if args.out:
        output = args.out
    elif get_environment_variable('AYSLAB_OUTPUT'):
        output = get_environment_variable('AYSLAB_OUTPUT')
    else:
        output = 'runs'
    argumentDict["OUTPUT"] = output

    if getattr(args, "seed", None) is not None:
        argumentDict["SEED"] = args.seed
    elif get_environment_variable('AYSLAB_SEED'):
        argumentDict["SEED"] = int(get_environment_variable('AYSLAB_SEED'))

    if args.command == "train":
        argumentDict["PRESET"] = args.preset
        argumentDict["AGENT"] = args.agent
        argumentDict["FRAMES"] = args.frames
        argumentDict["CONFIG"] = args.config
        argumentDict["WORKERS"] = max(1, args.workers)
        argumentDict["RESUME"] = args.resume
    elif args.command == "evaluate":
        argumentDict["CHECKPOINT"] = args.checkpoint
        argumentDict["EPISODES"] = args.episodes
        argumentDict["GREEDY"] = args.greedy
        argumentDict["START"] = args.start
        argumentDict["NOISE_VARIANCE"] = args.noise_variance
    else:
        argumentDict["CHECKPOINT"] = args.checkpoint
        argumentDict["MODE"] = args.mode
        argumentDict["RESOLUTION"] = args.resolution
    return argumentDict
