"""
Configuration Manager for Hybrid Bell
Handles numerical defaults, JSON settings files and key=value run files
"""
import copy
import json
import logging
import os

import psutil

from photonics.errors import DomainError


def default_workers():
    """Physical core count, falling back to 1"""
    return psutil.cpu_count(logical=False) or 1


class ConfigManager:
    """Manages run configuration"""

    DEFAULT_CONFIG = {
        "version": "1.0",
        "cutoffs": {
            "psi2": 4,
            "tmss": 60,
            "cat": 60
        },
        "optimizer": {
            "z_max": 4.0,
            "grid_points": 81,
            "xtol": 1e-4
        },
        "frontier": {
            "cross_check": True,
            "agreement": 1e-4
        },
        "parallel": {
            "workers": None  # resolved from the physical core count
        },
        "logging": {
            "level": "WARNING"
        }
    }

    def __init__(self, config_path=None):
        """Initialize configuration manager; without a path only the defaults are used"""
        self.config_path = config_path
        self.config = self.load_config()

    def load_config(self):
        """Load configuration from file"""
        if self.config_path and os.path.exists(self.config_path):
            try:
                with open(self.config_path, 'r', encoding='utf-8') as f:
                    config = json.load(f)
                    # Merge with defaults to ensure all keys exist
                    return self.merge_with_defaults(config)
            except Exception as e:
                logging.error(f"Error loading config {self.config_path}: {e}")
        return copy.deepcopy(self.DEFAULT_CONFIG)

    def merge_with_defaults(self, config):
        """Merge loaded config with defaults to ensure all keys exist"""
        def merge_dict(base, update):
            result = copy.deepcopy(base)
            for key, value in update.items():
                if key in result and isinstance(result[key], dict) and isinstance(value, dict):
                    result[key] = merge_dict(result[key], value)
                else:
                    result[key] = value
            return result

        return merge_dict(self.DEFAULT_CONFIG, config)

        try:
            with open(self.config_path, 'w', encoding='utf-8') as f:
                json.dump(config, f, indent=2)
            return True
        except Exception as e:
            logging.error(f"Error saving config: {e}")
            return False

    def get(self, key_path, default=None):
        """Get configuration value by dot-notation path

        Example: get('cutoffs.tmss')
        """
        keys = key_path.split('.')
        value = self.config

        for key in keys:
            if isinstance(value, dict) and key in value:
                value = value[key]
            else:
                return default

        return value

    def set(self, key_path, value):
        """Set configuration value by dot-notation path (in memory only)"""
        keys = key_path.split('.')
        config = self.config

        for key in keys[:-1]:
            if key not in config:
                config[key] = {}
            config = config[key]

        config[keys[-1]] = value

    def get_workers(self):
        """Worker threads for grid evaluation"""
        workers = self.get('parallel.workers')
        return int(workers) if workers else default_workers()

    def get_log_level(self):
        level = str(self.get('logging.level', 'WARNING')).upper()
        return getattr(logging, level, logging.WARNING)

    def get_optimizer_settings(self):
        """Get coarse-grid and golden-section settings"""
        return {
            'z_max': float(self.get('optimizer.z_max', 4.0)),
            'grid_points': int(self.get('optimizer.grid_points', 81)),
            'xtol': float(self.get('optimizer.xtol', 1e-4))
        }

    def export_config(self, output_path):
        """Export configuration to a file"""
        try:
            with open(output_path, 'w', encoding='utf-8') as f:
                json.dump(self.config, f, indent=2)
            return True
        except Exception as e:
            logging.error(f"Error exporting config: {e}")
            return False

    def import_config(self, input_path):
        """Import configuration from a JSON file"""
        try:
            with open(input_path, 'r', encoding='utf-8') as f:
                imported_config = json.load(f)

            # Merge with current config
            self.config = self.merge_with_defaults(imported_config)
            return True
        except Exception as e:
            logging.error(f"Error importing config: {e}")
            return False

    @staticmethod
    def load_run_file(path):
        """
        Read a key=value run file whose keys mirror CLI flag names

        Blank lines and '#' comments are skipped. Keys may be written with or
        without leading dashes.
        """
        values = {}
        try:
            with open(path, 'r', encoding='utf-8') as f:
                lines = f.readlines()
        except OSError as e:
            raise DomainError(f"cannot read run file {path}: {e}")

        for lineno, raw in enumerate(lines, start=1):
            line = raw.split('#', 1)[0].strip()
            if not line:
                continue
            if '=' not in line:
                raise DomainError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
            key, value = (part.strip() for part in line.split('=', 1))
            key = key.lstrip('-')
            if not key:
                raise DomainError(f"{path}:{lineno}: empty key")
            values[key] = value
        logging.info(f"Loaded {len(values)} setting(s) from run file {path}")
        return values


# Global config instance
_config_manager = None

def get_config_manager():
    """Get global configuration manager instance"""
    global _config_manager
    if _config_manager is None:
        _config_manager = ConfigManager()
    return _config_manager


def reset_config_manager(config_path=None):
    """Replace the global instance, e.g. after a --settings file is given"""
    global _config_manager
    _config_manager = ConfigManager(config_path)
    return _config_manager
