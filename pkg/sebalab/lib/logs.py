"""Module loggers for the package.

Every module asks for its logger through ``get_logger(__name__)``, which
does no more than ``logging.getLogger``: the library never installs a
handler of its own. The command line calls ``configure`` once at start
up, which takes the level from the ``SEBALAB_LOG_LEVEL`` environment
variable unless ``--log-level`` is given, so a run can be made chatty
without touching code, e.g. ``SEBALAB_LOG_LEVEL=DEBUG``.
"""
import logging
import os

ROOT = 'sebalab'
ENV_LEVEL = 'SEBALAB_LOG_LEVEL'
_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'


def configure(level=None) -> logging.Logger:
    """Attach a stream handler to the package root logger and set its level.

    :param level: A level name or number. Falls back to the environment
        variable and then to WARNING.
    :return: The package root logger.
    """
    root = logging.getLogger(ROOT)
    if level is None:
        level = os.getenv(ENV_LEVEL, 'WARNING')
    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
        if not isinstance(level, int):
            level = logging.WARNING
    root.setLevel(level)
    if not root.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(_FORMAT))
        root.addHandler(handler)
    return root


def get_logger(name: str) -> logging.Logger:
    """Get the logger for a module of this package."""
    return logging.getLogger(name)
