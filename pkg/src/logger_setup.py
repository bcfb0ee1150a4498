import logging
import os
import sys
from datetime import datetime
from logging.handlers import RotatingFileHandler

import pytz

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(filename)s:%(lineno)d - %(message)s'


class ZonedFormatter(logging.Formatter):
    """Formatter stamping records in a fixed timezone instead of the host's local time."""

    def __init__(self, fmt: str = LOG_FORMAT, tz_name: str = 'UTC'):
        super().__init__(fmt)
        try:
            self.tz = pytz.timezone(tz_name)
        except pytz.UnknownTimeZoneError:
            print(f"Unknown log timezone '{tz_name}', using UTC", file=sys.stderr)
            self.tz = pytz.utc

    def formatTime(self, record, datefmt=None):
        stamp = datetime.fromtimestamp(record.created, self.tz)
        if datefmt:
            return stamp.strftime(datefmt)
        return stamp.strftime('%Y-%m-%d %H:%M:%S') + f",{int(record.msecs):03d} {stamp.tzname()}"


def _writable_log_path(log_file_path: str) -> str:
    log_dir = os.path.dirname(log_file_path)
    if not log_dir:
        return log_file_path
    try:
        os.makedirs(log_dir, exist_ok=True)
        return log_file_path
    except OSError as e:
        fallback = os.path.basename(log_file_path) or 'villebet.log'
        print(f"Cannot create log directory {log_dir} ({e}); logging to {fallback}", file=sys.stderr)
        return fallback


def setup_logging(log_file_path='logs/villebet.log', log_level_str='INFO', tz_name='UTC'):
    """
    Configures the VilleBet logger: stdout plus a rotating file (5 x 5MB).

    Calling it again replaces the previous handlers, so each CLI run logs to its own settings.

    Returns:
        logging.Logger: The configured logger.
    """
    log_level = getattr(logging, str(log_level_str).upper(), None)
    if not isinstance(log_level, int):
        print(f"Unknown log level '{log_level_str}', using INFO", file=sys.stderr)
        log_level = logging.INFO

    logger = logging.getLogger('VilleBet')
    logger.setLevel(log_level)
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()

    formatter = ZonedFormatter(tz_name=tz_name)
    console_handler = logging.StreamHandler(sys.stdout)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    log_file_path = _writable_log_path(log_file_path)
    try:
        file_handler = RotatingFileHandler(log_file_path, maxBytes=5 * 1024 * 1024, backupCount=5, encoding='utf-8')
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)
    except OSError as e:
        logger.error(f"Failed to set up file logging to {log_file_path}: {e}")

    logger.debug(f"Logging ready: level={logging.getLevelName(log_level)}, file={log_file_path}, tz={tz_name}")
    return logger
