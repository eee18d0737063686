import os
import yaml
import logManager
from configManager.runtimeConfigHandler import RunConfig, RUN_FIELDS
from configManager.presets import preset_values
from agents.hyperparameters import known_keys
from functions.errors import ConfigError

logging = logManager.logger.get_logger(__name__)


class NoAliasDumper(yaml.SafeDumper):
    def ignore_aliases(self, data):
        return True


def _open_yaml(path):
    try:
        with open(path, 'r', encoding="utf-8") as fp:
            contents = yaml.safe_load(fp)
    except OSError as error:
        raise ConfigError("cannot read config file " + str(path) + ": " + str(error))
    except yaml.YAMLError as error:
        raise ConfigError("config file " + str(path) + " is not valid YAML: " + str(error))
    if contents is None:
        return {}
    if not isinstance(contents, dict):
        raise ConfigError("config file " + str(path) + " must hold one flat mapping")
    return contents


def _write_yaml(path, contents):
    with open(path, 'w', encoding="utf-8") as fp:
        yaml.dump(contents, fp, Dumper=NoAliasDumper, allow_unicode=True, sort_keys=False)


def build_run_config(preset=None, path=None, cli=None):
    """Preset defaults, then the config file, then command-line values.

    Keys that are not RunConfig fields are hyperparameter overrides and must be
    known to the selected agent kind.
    """
    fileValues = _open_yaml(path) if path else {}
    cli = {key: value for key, value in (cli or {}).items() if value is not None}
    name = preset or cli.get("preset") or fileValues.get("preset") or "pb"
    values = preset_values(name)
    overrides = {}
    for source in (fileValues, cli):
        for key, value in source.items():
            if key == "overrides":
                if not isinstance(value, dict):
                    raise ConfigError("overrides must be a mapping")
                overrides.update(value)
            elif key == "preset":
                continue
            elif key in RUN_FIELDS:
                values[key] = value
            else:
                overrides[key] = value
    agent = values.get("agent", "dqn")
    unknown = sorted(key for key in overrides if key not in known_keys(agent))
    if unknown:
        raise ConfigError("unknown config keys for agent " + agent + ": " + ", ".join(unknown))
    try:
        config = RunConfig(overrides=overrides, **values)
    except TypeError as error:
        raise ConfigError("invalid run config: " + str(error))
    logging.debug("Run config resolved to " + str(config.to_dict()))
    return config


def write_run_config(config, directory):
    _write_yaml(os.path.join(directory, "config.yaml"), config.to_dict())
