"""A few helper decorators to simplify construction of the code."""
import functools
import inspect
import numbers
import typing

from .exceptions import InputTypeError

# A float parameter takes any real scalar, numpy scalars included
_WIDENED = {
    float: numbers.Real,
    int: numbers.Integral,
    complex: numbers.Complex,
}


def check_simple_types(f: typing.Callable) -> typing.Callable:
    """A decorator that will check the types of the arguments at runtime.

    Only parameters annotated with a concrete class are checked, so
    fancy ``typing`` annotations pass through untouched. ``float``
    accepts any real number and ``int`` any integral number, which lets
    numpy scalars through. Booleans are never accepted as numbers.
    """
    signature = inspect.signature(f)
    checked = {name: _WIDENED.get(param.annotation, param.annotation)
               for name, param in signature.parameters.items()
               if isinstance(param.annotation, type)
               and param.annotation is not inspect.Parameter.empty}

    @functools.wraps(f)
    def ret(*args, **kwargs):
        bound = signature.bind(*args, **kwargs)
        for name, arg in bound.arguments.items():
            typ = checked.get(name)
            if typ is None:
                continue
            if not isinstance(arg, typ) or (isinstance(arg, bool) and typ is not bool):
                fmt = "Expecting {name} to be of type {typ}, was {realtyp} instead."
                raise InputTypeError(fmt.format(name=name, typ=typ.__name__,
                                                realtyp=type(arg).__name__))
        return f(*args, **kwargs)

    return ret


def wrap_exceptions_with(ex: typing.Type[Exception], message='', target=Exception):
    """Catch exceptions and rethrow them wrapped in an exception of our choosing.

    This is mainly for the purpose of catching whatever builtin or
    library exceptions might be thrown and showing them to the outside
    world as custom module exceptions. That way an external importer can
    just catch the SebaError and thus catch every exception thrown by
    this package.

    ``target`` specifies what to catch and therefore wrap. By default
    it's ``Exception`` to cast a wide net but note that you can catch
    any specific exception you please, or a set of exceptions if you
    pass in a tuple of exception classes. Exceptions that are already
    package exceptions are passed through unchanged.

    :param ex: The exception to use as wrapper.
    :param message: A custom message to use for the wrapper exception.
    :param target: Which exception(s) you want to catch.
    """
    from .exceptions import SebaError

    def decorator(f):
        @functools.wraps(f)
        def wrapped(*args, **kwargs):
            try:
                return f(*args, **kwargs)
            except SebaError:
                raise
            except target as e:
                raise ex('{}: {}'.format(message, e) if message else str(e)) from e

        return wrapped

    return decorator
