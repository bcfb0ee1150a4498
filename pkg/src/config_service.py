import configparser
import json
import logging
import os
from typing import Any, Dict

logger = logging.getLogger('VilleBet')

DEFAULT_CONFIG_PATH = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'config', 'config.ini')

# Keys a JSON run file may carry; they mirror the CLI flags
RUN_CONFIG_KEYS = {
    "m0", "prior", "stream", "seed", "horizon", "alpha", "s0", "nodes_per_side",
    "replications", "checkpoints", "out", "workers", "certify", "log_level", "corpus_size",
}


class ConfigValidationError(Exception):
    pass


class ConfigService:
    """INI-backed defaults for experiment runs (config/config.ini unless another path is given)."""

    def __init__(self, config_file=DEFAULT_CONFIG_PATH):
        self.config_file = config_file
        self.config = configparser.ConfigParser()
        self._load_config()

    def _load_config(self):
        if not os.path.exists(self.config_file):
            logger.error(f"Configuration file not found: {self.config_file}")
            raise FileNotFoundError(f"Configuration file not found: {self.config_file}")

        try:
            self.config.read(self.config_file)
            logger.info(f"Configuration loaded successfully from {self.config_file}")
        except configparser.Error as e:
            logger.error(f"Error reading configuration file {self.config_file}: {e}")
            raise

    def get(self, section, option, fallback=None):
        """Gets a configuration value as a string."""
        return self.config.get(section, option, fallback=fallback)

    def _typed(self, parse, type_name, section, option, fallback):
        """Parses [section]option with a ConfigParser getter, logging and using the fallback on bad values."""
        try:
            return parse(section, option, fallback=fallback)
        except (ValueError, TypeError) as e:
            logger.warning(f"Config Error: Could not parse [{section}]{option} as {type_name}. Using fallback '{fallback}'. Error: {e}")
            if fallback is not None:
                return fallback
            raise ValueError(f"Invalid {type_name} value for [{section}]{option} and no fallback provided.") from e

    def getint(self, section, option, fallback=None):
        return self._typed(self.config.getint, "int", section, option, fallback)

    def getfloat(self, section, option, fallback=None):
        return self._typed(self.config.getfloat, "float", section, option, fallback)

    def getboolean(self, section, option, fallback=None):
        return self._typed(self.config.getboolean, "boolean", section, option, fallback)

    def run_defaults(self) -> Dict[str, Any]:
        """Defaults for a CLI run, read from the [Market], [Quadrature] and [Experiment] sections."""
        return {
            "m0": self.getfloat('Market', 'm0', fallback=0.5),
            "nodes_per_side": self.getint('Quadrature', 'nodes_per_side', fallback=2048),
            "gl_order": self.getint('Quadrature', 'gl_order', fallback=16),
            "grading_levels": self.getint('Quadrature', 'grading_levels', fallback=24),
            "alpha": self.getfloat('Experiment', 'alpha', fallback=0.05),
            "s0": self.getfloat('Experiment', 's0', fallback=0.5),
            "horizon": self.getint('Experiment', 'horizon', fallback=10000),
            "replications": self.getint('Experiment', 'replications', fallback=500),
            "seed": self.getint('Experiment', 'seed', fallback=0),
            "workers": self.getint('Experiment', 'workers', fallback=1),
            "ville_nodes_per_side": self.getint('Experiment', 'ville_nodes_per_side', fallback=64),
            "tolerance": self.getfloat('Experiment', 'tolerance', fallback=1e-8),
            "max_quadrature_gap": self.getfloat('Experiment', 'max_quadrature_gap', fallback=1e-6),
            "log_file": self.get('Logging', 'log_file', fallback='logs/villebet.log'),
            "log_level": self.get('Logging', 'log_level', fallback='INFO'),
            "timezone": self.get('Logging', 'timezone', fallback='UTC'),
        }

    def reload_config(self):
        """Reloads the configuration from the file."""
        logger.info("Reloading configuration...")
        self._load_config()


def load_run_config(path: str) -> Dict[str, Any]:
    """
    Reads a JSON run file whose keys mirror the CLI flags (dashes or underscores).

    Raises:
        ConfigValidationError: The file is not a JSON object or carries an unknown key.
    """
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        logger.error(f"Could not read run config {path}: {e}")
        raise ConfigValidationError(f"Could not read run config {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigValidationError(f"Run config {path} must hold a JSON object")
    normalized = {key.replace('-', '_'): value for key, value in data.items()}
    unknown = sorted(set(normalized) - RUN_CONFIG_KEYS)
    if unknown:
        raise ConfigValidationError(f"Unknown keys in run config {path}: {', '.join(unknown)}")
    logger.info(f"Run config loaded from {path}: {sorted(normalized)}")
    return normalized


# Shared instance; None when config/config.ini is unreadable
try:
    config_service = ConfigService()
except Exception as e:
    logger.critical(f"Failed to initialize ConfigService: {e}", exc_info=True)
    config_service = None
