import logging

import numpy as np
import pytest

from sebalab.lib import logs
from sebalab.lib.exceptions import (BracketFailureError, InputTypeError, NumericalError,
                                    OutOfRangeError, ParameterError, SebaError)
from sebalab.lib.helpers import check_simple_types, wrap_exceptions_with
from sebalab.lib.roots import find_root, margin


@check_simple_types
def scaled(x: float, n: int, label: str = 'x'):
    return '{}={}'.format(label, x * n)


@pytest.mark.parametrize("args", [
    (1.5, 2),
    (1, 2),
    (np.float64(1.5), np.int64(2)),
])
def test_types_accepted(args):
    scaled(*args)


@pytest.mark.parametrize("args", [
    (True, 2),
    (1.5, 2.0),
    ('1.5', 2),
    (1.5, 2, 3),
])
def test_types_rejected(args):
    with pytest.raises(InputTypeError):
        scaled(*args)


@wrap_exceptions_with(ParameterError, 'Cannot convert', target=(KeyError, ValueError))
def lookup(table, key):
    if key == 'bad':
        raise OutOfRangeError("bad key")
    return int(table[key])


def test_wrap_exceptions():
    assert lookup({'a': '3'}, 'a') == 3
    with pytest.raises(ParameterError) as info:
        lookup({}, 'a')
    assert str(info.value).startswith('Cannot convert')
    with pytest.raises(ParameterError):
        lookup({'a': 'three'}, 'a')
    with pytest.raises(OutOfRangeError):
        lookup({}, 'bad')
    with pytest.raises(TypeError):
        lookup(None, 'a')


def test_exception_hierarchy():
    assert issubclass(OutOfRangeError, ValueError)
    assert issubclass(InputTypeError, TypeError)
    assert issubclass(NumericalError, ArithmeticError)
    assert issubclass(BracketFailureError, SebaError)


def test_numerical_error_index():
    assert str(NumericalError('no root')) == 'no root'
    assert str(NumericalError('no root', 3)) == 'no root (at index 3)'
    assert NumericalError('no root', 3).index == 3


def test_find_root():
    root = find_root(lambda x: x * x - 2, 0.0, 2.0)
    assert root.value == pytest.approx(2 ** 0.5, abs=2e-12)
    assert root.bracket_width <= 1e-12 * 2
    assert abs(root.residual) < 1e-10


def test_find_root_needs_a_sign_change():
    with pytest.raises(BracketFailureError) as info:
        find_root(lambda x: x * x + 1, 0.0, 2.0, index=7)
    assert info.value.index == 7


def test_log_level_from_environment(monkeypatch):
    root = logging.getLogger(logs.ROOT)
    previous = root.level
    try:
        monkeypatch.setenv(logs.ENV_LEVEL, 'info')
        assert logs.configure().level == logging.INFO
        assert logs.configure('debug').level == logging.DEBUG
        assert logs.configure('chatty').level == logging.WARNING
        assert len(root.handlers) == 1
        assert logs.get_logger('sebalab.lib.secular').getEffectiveLevel() == logging.WARNING
    finally:
        root.setLevel(previous)


def test_get_logger_installs_no_handler():
    root = logging.getLogger(logs.ROOT)
    saved = root.handlers[:]
    root.handlers.clear()
    try:
        logger = logs.get_logger('sebalab.lib.spectrum')
        assert logger.name == 'sebalab.lib.spectrum'
        assert root.handlers == []
        assert logger.handlers == []
    finally:
        root.handlers[:] = saved


def test_margin_stays_off_the_pole():
    assert margin(0.0, 1.0) == pytest.approx(1e-9)
    lo, hi = 600.0, 600.0 + 2e-5
    delta = margin(lo, hi)
    assert lo < lo + delta < hi - delta < hi
    lo, hi = 1.0, 1.0 + 1e-15
    assert margin(lo, hi) == (hi - lo) / 4
