import os
import gzip
import multiprocessing
from contextlib import contextmanager

import six


THREADS_ENV = "HESTONVAR_THREADS"


class HestonvarError(Exception):
    """Base type for all errors raised deliberately by :mod:`hestonvar`."""
    pass


class NumericalFailure(HestonvarError, ArithmeticError):
    '''Raised when a linear solve or quadrature fails or produces non-finite
    values.

    Attributes
    ----------
    condition: float or None
        An estimate of the condition number of the failing system, if known
    '''

    def __init__(self, message, condition=None):
        super(NumericalFailure, self).__init__(message)
        self.condition = condition


def opener(obj, mode='r'):
    '''
    Try to use `obj` to access a file-object. If `obj` is a string, assume
    it denotes a path to a file, and open that file in the specified mode.
    If `obj` has an attribute `read` or `write`, assume it is itself a
    file-like object and return it.

    Text modes always use LF line endings so written artefacts are identical
    across platforms.

    Parameters
    ----------
    obj: str or file-like object
        A path, or an object supporting `read`/`write`
    mode: str, optional
        The mode to open `obj` with if it is a path. Defaults to 'r'
    '''
    if isinstance(obj, six.string_types):
        if obj.endswith('.gz'):  # pragma: no cover
            return gzip.open(obj, mode + ('t' if 'b' not in mode else ''))
        if 'b' in mode:
            return open(obj, mode)
        return open(obj, mode, newline='')
    elif hasattr(obj, "read") or hasattr(obj, "write"):
        return obj
    else:  # pragma: no cover
        raise IOError("Can't find a way to open {}".format(obj))


@contextmanager
def opened(obj, mode='r'):
    '''Like :func:`opener`, but as a context manager that only closes handles
    it opened itself.'''
    handle = opener(obj, mode)
    try:
        yield handle
    finally:
        if handle is not obj:
            handle.close()


def fmt_float(value):
    """Render a float as its shortest round-tripping decimal string."""
    return repr(float(value))


def worker_count(requested=None, cap=4):
    '''
    Decide how many worker processes to use.

    An explicit `requested` value wins, then the ``HESTONVAR_THREADS``
    environment variable, then ``min(cpu_count, cap)``. The environment
    variable also caps an explicit request.
    '''
    env = os.environ.get(THREADS_ENV)
    limit = None
    if env:
        try:
            limit = max(int(env), 1)
        except ValueError:
            raise HestonvarError("%s must be an integer, got %r" % (THREADS_ENV, env))
    if requested is None:
        requested = limit if limit is not None else min(multiprocessing.cpu_count(), cap)
    requested = max(int(requested), 1)
    if limit is not None:
        requested = min(requested, limit)
    return requested


class Struct(object):
    '''
    An immutable record with named fields declared in ``__slots__``.

    Subclasses list their fields in ``__slots__`` and may override
    :meth:`_validate` to check invariants; construction always goes through
    it. Instances compare by value, pickle by state and are never mutated in
    place: use :meth:`_replace` to derive a modified copy.
    '''
    __slots__ = ()

    def __init__(self, *args, **kwargs):
        fields = self.__slots__
        if len(args) > len(fields):
            raise TypeError("%s takes at most %d arguments" % (self.__class__.__name__, len(fields)))
        values = dict(zip(fields, args))
        for key, value in kwargs.items():
            if key not in fields:
                raise TypeError("%s has no field %r" % (self.__class__.__name__, key))
            if key in values:
                raise TypeError("%s got multiple values for %r" % (self.__class__.__name__, key))
            values[key] = value
        defaults = self._defaults()
        for field in fields:
            if field not in values:
                if field not in defaults:
                    raise TypeError("%s missing field %r" % (self.__class__.__name__, field))
                values[field] = defaults[field]
            object.__setattr__(self, field, values[field])
        self._validate()

    @classmethod
    def _defaults(cls):
        return {}

    def _validate(self):
        pass

    def __setattr__(self, key, value):
        raise AttributeError("%s is immutable" % (self.__class__.__name__,))

    def __getstate__(self):
        return tuple(getattr(self, f) for f in self.__slots__)

    def __setstate__(self, state):
        for field, value in zip(self.__slots__, state):
            object.__setattr__(self, field, value)

    def __reduce__(self):
        return (self.__class__, self.__getstate__())

    def __eq__(self, other):
        if self.__class__ is not other.__class__:
            return False
        return self.__getstate__() == other.__getstate__()

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash((self.__class__.__name__,) + tuple(
            str(v) for v in self.__getstate__()))

    def __repr__(self):
        rep = ', '.join("%s=%r" % (f, getattr(self, f)) for f in self.__slots__)
        return "%s(%s)" % (self.__class__.__name__, rep)

    def _replace(self, **kwargs):
        values = self.to_dict()
        values.update(kwargs)
        return self.__class__(**values)

    def to_dict(self):
        return {f: getattr(self, f) for f in self.__slots__}

    @classmethod
    def from_dict(cls, d):
        return cls(**d)
