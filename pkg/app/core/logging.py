"""
Logging Configuration
Stderr logging plus optional per-level log files
"""
import logging
import os
import sys

from app.core.config import LOG_DIR, LOG_LEVEL

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(message)s"

# file name -> lowest level written to it
LOG_FILES = {"debug.log": logging.DEBUG, "app.log": logging.INFO, "error.log": logging.ERROR}


class MultiFileHandler(logging.Handler):
    """Duplicate records into the LOG_FILES under one directory, filtered by level"""

    def __init__(self, directory: str):
        super().__init__()
        os.makedirs(directory, exist_ok=True)
        formatter = logging.Formatter(LOG_FORMAT)
        self.targets = []
        for name, level in LOG_FILES.items():
            handler = logging.FileHandler(os.path.join(directory, name), encoding="utf-8")
            handler.setLevel(level)
            handler.setFormatter(formatter)
            self.targets.append(handler)

    def emit(self, record):
        for handler in self.targets:
            if record.levelno >= handler.level:
                handler.emit(record)

    def close(self):
        for handler in self.targets:
            handler.close()
        super().close()


def setup_logger(level: str = LOG_LEVEL, log_dir: str = LOG_DIR) -> logging.Logger:
    """Configure and return the package logger; stdout stays free for reports"""
    log = logging.getLogger("ngp_certify")
    log.setLevel(getattr(logging, level, logging.INFO))
    log.propagate = False
    for handler in list(log.handlers):
        log.removeHandler(handler)

    stream = logging.StreamHandler(sys.stderr)
    stream.setFormatter(logging.Formatter(LOG_FORMAT))
    log.addHandler(stream)
    if log_dir:
        log.addHandler(MultiFileHandler(log_dir))
    return log


def set_level(level: str) -> None:
    """Change verbosity at runtime (CLI --log-level)"""
    logger.setLevel(getattr(logging, level.upper(), logging.INFO))


logger = setup_logger()
