# netnl/__init__.py
"""
Network nonlocality toolkit.

Simulates quantum correlations in small causal networks, classifies them
against classical and quantum-wirable models, and certifies the Bell-state
measurement self-test on concrete instances.

`configure_logging` plays the role of an application factory for the
command-line entry point: library modules only ever call
`logging.getLogger(__name__)`.
"""

import logging
import os
from logging.handlers import RotatingFileHandler

from .config import Config

__version__ = '1.0.0'

_LOG_FORMAT = '%(asctime)s %(levelname)s: %(message)s [in %(pathname)s:%(lineno)d]'


def configure_logging(config_class=Config, stream=True):
    """
    Attaches a rotating file handler (and optionally a stderr handler) to the
    package logger. Calling it again is a no-op.
    """
    package_logger = logging.getLogger(__name__)
    if getattr(package_logger, '_netnl_configured', False):
        return package_logger

    level = getattr(logging, str(config_class.LOG_LEVEL).upper(), logging.INFO)
    package_logger.setLevel(level)

    try:
        os.makedirs(config_class.LOG_DIR, exist_ok=True)
        log_file = os.path.join(config_class.LOG_DIR, 'netnl.log')
        file_handler = RotatingFileHandler(log_file, maxBytes=10240, backupCount=10)
        file_handler.setFormatter(logging.Formatter(_LOG_FORMAT))
        file_handler.setLevel(level)
        package_logger.addHandler(file_handler)
    except OSError as e:
        # Read-only working directories still get console logging.
        package_logger.warning(f"Could not open log directory {config_class.LOG_DIR}: {e}")

    if stream:
        stream_handler = logging.StreamHandler()
        stream_handler.setFormatter(logging.Formatter('%(levelname)s: %(message)s'))
        stream_handler.setLevel(logging.WARNING)
        package_logger.addHandler(stream_handler)

    package_logger._netnl_configured = True
    package_logger.info(f'netnl {__version__} starting...')
    return package_logger
