"""
Hybrid Bell - Version Information
Reads the release manifest shipped next to the sources
"""
import json
import logging
import os

from packaging import version

VERSION_FILE = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'version.json')
FALLBACK_VERSION = "0.0.0"


def load_version_info(path=VERSION_FILE):
    """Return the parsed release manifest, or an empty dict if it cannot be read"""
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except (OSError, ValueError) as e:
        logging.debug(f"Could not read version manifest {path}: {e}")
        return {}


def get_current_version():
    """Get the current version, normalized by packaging"""
    raw = load_version_info().get('version', FALLBACK_VERSION)
    try:
        return str(version.Version(raw))
    except version.InvalidVersion:
        logging.warning(f"Invalid version string in manifest: {raw!r}")
        return FALLBACK_VERSION

