# coding=utf-8


class ParameterError(BaseException):
    '''Raise when a parameter lies outside the domain of a law or construction'''


class InputError(BaseException):
    '''Raise when given samples or paths can't be used as input'''


class RangeError(BaseException):
    '''Raise when a query time falls outside a skeleton's span'''


class OrderingError(BaseException):
    '''Raise when two times are given in the wrong order'''


class ConstructionError(BaseException):
    '''Raise when a Poisson construction couldn't be completed'''


class CoverageError(BaseException):
    '''Raise when a construction doesn't reach deep enough for the requested chain'''


class SetupError(BaseException):
    '''Raise when a test can't be set up from the given oracle'''


class RegistryError(BaseException):
    '''Raise when an experiment name or parameter is not registered'''
