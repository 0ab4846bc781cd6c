# coding=utf-8
from __future__ import absolute_import, print_function

import os
import json
import copy

from cmlab.logger import logger
from cmlab.error import ParameterError, RegistryError

CMLAB_SEED_ENV = "CMLAB_SEED"

_config = dict()


def get_config():
    """Packaged defaults from cfg/config.json. Read once per session.

    Returns:
        dict: A copy of the configuration, safe to modify.
    """
    if not _config:
        module_dir = os.path.split(__file__)[0]
        config_location = os.path.join(module_dir, "cfg", "config.json")
        with open(config_location) as fp:
            _config.update(json.load(fp))
    return copy.deepcopy(_config)


def get_option(key):
    """Single packaged default.

    Args:
        key (str): Option name as found in cfg/config.json.

    Returns:
        object: The option value.
    """
    return get_config()[key]


def update_config(values):
    """Override packaged defaults for this session.

    Args:
        values (dict): {option:value}, options must exist in cfg/config.json.

    Raises:
        RegistryError: Unknown option.

    Returns:
        dict: The updated configuration.
    """
    current = get_config()
    unknown = sorted(set(values.keys()) - set(current.keys()))
    if unknown:
        raise RegistryError(
            "Unknown options: {}. Valid options: {}".format(", ".join(unknown), ", ".join(sorted(current)))
        )
    _config.update(copy.deepcopy(values))
    logger.debug("Config updated: {}".format(sorted(values.keys())))
    return get_config()


def reset_config():
    """Drop session overrides and read the packaged defaults again.

    Returns:
        bool: True if clearing was successful.
    """
    _config.clear()
    get_config()
    return True


def get_seed():
    """Get default seed from either global environment variable or packaged config,
    giving priority to environment variable.

    Environment variable name: CMLAB_SEED

    Raises:
        ParameterError: CMLAB_SEED is set but is not an integer.

    Returns:
        int: Seed
    """
    env_seed = os.environ.get(CMLAB_SEED_ENV)
    if env_seed:
        try:
            seed = int(env_seed)
        except ValueError:
            raise ParameterError("{} must be an integer, got '{}'".format(CMLAB_SEED_ENV, env_seed))
        logger.debug("Seed from environment: {}".format(seed))
        return seed
    return int(get_option("default_seed"))


def load_config_file(filepath, allowed=None):
    """Read a user JSON config file.

    Args:
        filepath (str): Path to a JSON object.
        allowed (iterable, optional): Accepted keys. Defaults to the packaged option
            names.

    Raises:
        RegistryError: File holds keys that are not accepted.

    Returns:
        dict: {option:value}
    """
    with open(filepath) as fp:
        values = json.load(fp)
    allowed = set(allowed if allowed is not None else get_config().keys())
    unknown = sorted(set(values.keys()) - allowed)
    if unknown:
        raise RegistryError(
            "Unknown config keys in {}: {}. Valid keys: {}".format(
                filepath, ", ".join(unknown), ", ".join(sorted(allowed))
            )
        )
    logger.debug("Config file loaded: {}".format(filepath))
    return values
