# coding=utf-8
from __future__ import absolute_import, print_function

import logging
import sys
import os
import json
from datetime import date

_base_name = "cmlab"
logger = logging.getLogger(name='{}log'.format(_base_name))

_FORMAT = '[%(asctime)s:%(module)s:%(funcName)s:%(lineno)s:%(levelname)s] %(message)s'


def _has_handler(kind):
    for each in logger.handlers:
        if type(each) is kind:
            return True
    return False


def init_logger(level=logging.DEBUG):
    """Initialize 'cmlablog' logging object and add a STDOUT handler to output to
    console, terminal, etc.

    Args:
        level (int, optional): Logging level for both the logger and the handler.
            Defaults to logging.DEBUG.
    """
    logger.setLevel(level)
    if _has_handler(logging.StreamHandler):
        return
    stream_handler = logging.StreamHandler(sys.stdout)
    stream_handler.setLevel(level)
    stream_handler.setFormatter(logging.Formatter(_FORMAT))
    logger.addHandler(stream_handler)


def init_file_logger(directory=None):
    """Adds file log to 'cmlablog' logging object. Unless a directory is given, log
    files will be located at ~/.<logger_dir_name> as configured in cfg/config.json.

    Args:
        directory (str, optional): Directory for the log file. Defaults to None.

    Raises:
        OSError, IOError: Directory for log files couldn't be created.

    Returns:
        [str]: Log file path, None if a file handler was already attached.
    """
    if _has_handler(logging.FileHandler):
        return None

    if directory is None:
        module_dir = os.path.split(__file__)[0]
        with open(os.path.join(module_dir, "cfg", "config.json")) as fp:
            config = json.load(fp)
        directory = os.path.join(os.path.expanduser("~"), "." + config["logger_dir_name"])

    try:
        if not os.path.exists(directory):
            os.makedirs(directory)
    except (OSError, IOError) as why:
        raise why

    date_string = date.today().strftime("%d-%m-%Y")
    log_file_path = os.path.join(directory, '{}_{}.log'.format(_base_name, date_string))
    file_handler = logging.FileHandler(log_file_path, mode='a')
    file_handler.setLevel(logging.DEBUG)
    file_handler.setFormatter(logging.Formatter(_FORMAT))
    logger.addHandler(file_handler)
    if logger.level == logging.NOTSET or logger.level > logging.DEBUG:
        logger.setLevel(logging.DEBUG)
    return log_file_path
