#!/usr/bin/env python
import os
import logManager
import configManager
from configManager.configHandler import build_run_config
from functions.errors import ConfigError, DomainError, NumericError
from services import trainer, evaluation

logging = logManager.logger.get_logger(__name__)

EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _log_summary(summary):
    logging.info("Seed " + str(summary["seed"]) + " mean return " + "%.3f" % summary["mean_return"]
                 + " success rate " + "%.3f" % summary["success_rate"])


def run_train(args):
    if args["RESUME"]:
        _, summary = trainer.resume(args["RESUME"], args["FRAMES"])
        _log_summary(summary)
        return
    cli = {"agent": args["AGENT"], "frames": args["FRAMES"], "output_dir": args["OUTPUT"]}
    config = build_run_config(args["PRESET"], args["CONFIG"], cli)
    seeds = [args["SEED"]] if args["SEED"] is not None else config.seeds
    for summary in trainer.train_seeds(config, seeds, args["WORKERS"]):
        _log_summary(summary)


def run_evaluate(args):
    outDir = os.path.join(args["OUTPUT"], "evaluation")
    evaluation.evaluate(args["CHECKPOINT"], args["EPISODES"], args["GREEDY"], evaluation.parse_start(args["START"]),
                        args["NOISE_VARIANCE"], args["SEED"] or 0, outDir)


def run_grid(args):
    _, _, _, path = evaluation.grid_from_checkpoint(args["CHECKPOINT"], args["RESOLUTION"], args["MODE"],
                                                    args["OUTPUT"])
    logging.info("Grid written to " + str(path))


def main(argv=None):
    args = configManager.argumentHandler.parse_arguments(argv)
    configManager.argumentHandler.process_arguments(args)
    commands = {"train": run_train, "evaluate": run_evaluate, "grid": run_grid}
    try:
        commands[args["COMMAND"]](args)
    except (ConfigError, DomainError) as error:
        logging.exception("CRITICAL! Invalid configuration: " + str(error))
        raise SystemExit(EXIT_CONFIG)
    except NumericError as error:
        logging.exception("CRITICAL! Numeric failure: " + str(error))
        raise SystemExit(EXIT_NUMERIC)


if __name__ == "__main__":
    main()
