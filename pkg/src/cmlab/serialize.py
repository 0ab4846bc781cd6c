# coding=utf-8
from __future__ import absolute_import, print_function

import copy
import json

import numpy as np

_VERSION = "1.0"


def to_builtin(value):
    """Convert numpy scalars and arrays nested in dicts, lists and tuples to plain
    Python objects that json can write.

    Args:
        value (object): Any value.

    Returns:
        object: The same value built from dict, list, float, int, bool, str and None.
    """
    if isinstance(value, dict):
        return {str(k): to_builtin(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_builtin(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_builtin(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


class Serializable(object):
    # Attributes left out of data(), e.g. runtime-only values.
    _transient = ()

    def data(self):
        """Collect all data for this object instance.

        Returns:
            dict: {attribute:value}
        """
        retval = dict()
        for key, value in self.__dict__.items():
            if key in self._transient:
                continue
            retval[key] = to_builtin(copy.deepcopy(value))
        retval["_Serializable_classname"] = type(self).__name__
        retval["_Serializable_version"] = _VERSION
        return retval

    @classmethod
    def from_data(cls, data):
        """Create object instance from given data. Used by TestReport, ExperimentSpec
        and RunConfig to create object instances from disk saved data.

        Args:
            data (dict): {attribute:value}

        Returns:
            Serializable: Object instance, None if data belongs to another class.
        """
        data = dict(data)
        if data.get("_Serializable_classname") != cls.__name__:
            return None
        del data["_Serializable_classname"]
        if data.get("_Serializable_version") is not None:
            del data["_Serializable_version"]

        this = cls.__new__(cls)
        for key in cls._transient:
            setattr(this, key, None)
        this.__dict__.update(data)
        return this


def save_objects(objects, filepath):
    """Write a list of Serializable objects as a JSON array.

    Args:
        objects (list): Serializable instances.
        filepath (str): Destination file.

    Returns:
        str: The written file path.
    """
    with open(filepath, "w") as fp:
        json.dump([each.data() for each in objects], fp, indent=4, sort_keys=True)
    return filepath


def load_objects(cls, filepath):
    """Read a JSON array written by save_objects() back into instances of cls.

    Args:
        cls (type): Serializable subclass to build.
        filepath (str): Source file.

    Returns:
        list: Instances; entries of other classes are skipped.
    """
    with open(filepath) as fp:
        records = json.load(fp)
    retval = list()
    for each in records:
        this = cls.from_data(each)
        if this is not None:
            retval.append(this)
    return retval
